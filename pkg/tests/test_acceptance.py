"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line with the
measured numbers. The training criteria (2 to 6) take roughly 35 minutes on
one core; run them alone with ``pytest tests/test_acceptance.py -s``.
"""

from __future__ import annotations

import statistics
import time

import numpy as np
import pytest

from dmnet import DmnConfig, DynamicMemoryNetwork, TrainConfig, build_vocab, evaluate, generate_synthetic, train
from dmnet import dmn, nn
from dmnet import tensor as T
from dmnet.train import AdamState, adam_step, joint_loss

from gradcheck import check
from helpers import TWO_SENTENCE, tiny_model

SEEDS = (0, 1, 2)


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}", flush=True)
    return emit


# -- 1: gradient correctness -------------------------------------------------


def test_criterion_1_gradients(report):
    start = time.perf_counter()
    errors = {}
    with T.precision("float64"):
        rng = np.random.default_rng(0)
        gru = nn.GruParams.create(3, 4, rng)
        for t in gru.tensors():
            t.data = rng.normal(size=t.shape) * 0.5
        x, h = T.parameter(rng.normal(size=3)), T.parameter(rng.normal(size=4))
        w = T.constant(rng.normal(size=4))
        errors["gru_step"] = check(lambda: T.sum(T.mul(nn.gru_step(gru, x, h), w)),
                                   [x, h, *gru.tensors()])

        gate = dmn.GateNetParams(**{k: T.parameter(rng.normal(size=s))
                                    for k, s in dmn.GateNetParams.dims(4, 5).items()})
        c, m, q = (T.parameter(rng.normal(size=4)) for _ in range(3))
        errors["gate_score"] = check(lambda: dmn.gate_score(gate, c, m, q)[1],
                                     [gate.W1, gate.b1, gate.W2, gate.b2, gate.W_b, c, m, q])

        C = T.parameter(rng.normal(size=(3, 4)))
        s = T.parameter(rng.normal(size=3))
        egru = nn.GruParams.create(4, 4, rng)
        for t in egru.tensors():
            t.data = rng.normal(size=t.shape) * 0.5
        for mode in ("sigmoid-gru", "softmax"):
            def ep(mode=mode):
                facts = dmn.FactSequence([], [], T.take(C, 2), C)
                facts.set_matrix(C)
                return T.sum(T.mul(dmn.episode(mode, facts, s, egru), w))
            errors[f"episode/{mode}"] = check(ep, [C, s, *egru.tensors()])

        e, mp = T.parameter(rng.normal(size=4)), T.parameter(rng.normal(size=4))
        errors["memory_update"] = check(lambda: T.sum(T.mul(dmn.memory_update(egru, e, mp), w)),
                                        [e, mp, *egru.tensors()])

        model = tiny_model()
        mem = T.parameter(rng.normal(size=3))
        qv = T.parameter(rng.normal(size=3))
        targets = model.answer_targets(TWO_SENTENCE)

        def decoder():
            logits = model.answer_logits(mem, qv, targets)
            return joint_loss(dmn.GateTrace(), [], logits, targets, 0.0, 1.0)

        errors["answer_sequence"] = check(
            decoder, [mem, qv, model.answer.W_a, *model.answer.gru.tensors()])

        for mode in ("sigmoid-gru", "softmax"):
            model = tiny_model(attention_mode=mode, use_sentinel=True, T_M=3)
            params = list(model.parameters().values())

            def full(model=model):
                res = model.forward(TWO_SENTENCE)
                return joint_loss(res.trace, res.gate_targets, res.answer_logits,
                                  res.answer_targets, 1.0, 1.0)

            errors[f"joint_loss/{mode}"] = check(full, params)
    elapsed = time.perf_counter() - start
    worst = max(errors.values())
    ok = worst < 1e-4 and elapsed < 120
    detail = ", ".join(f"{k}={v:.1e}" for k, v in errors.items())
    report(1, ok, f"max rel err {worst:.2e} (< 1e-4), {elapsed:.1f}s (< 120s); {detail}")
    assert ok


# -- 2: single supporting fact ------------------------------------------------


def single_fact_run(seed: int) -> float:
    stories = generate_synthetic("single-fact", 100 + seed, 1200)
    train_set, test_set = stories[:1000], stories[1000:]
    model = DynamicMemoryNetwork(DmnConfig(n_I=64, n_H=64, T_M=1), build_vocab(train_set),
                                 seed=seed)
    cfg = TrainConfig(epochs=30, switch_epoch=1, seed=seed, target_accuracy=1.0)
    model, _ = train(model, train_set, cfg)
    return evaluate(model, test_set).accuracy


@pytest.mark.slow
def test_criterion_2_single_fact(report):
    start = time.perf_counter()
    accs = [single_fact_run(s) for s in SEEDS]
    elapsed = time.perf_counter() - start
    med = statistics.median(accs)
    ok = med >= 0.98 and elapsed < 15 * 60
    report(2, ok, f"median test accuracy {med:.3f} (>= 0.98) over seeds {accs}, "
                  f"{elapsed / 60:.1f} min (< 15)")
    assert ok


# -- 3, 4, 5: two supporting facts --------------------------------------------

TWO_FACT_CFG = TrainConfig(dropout=0.0, epochs=45, switch_epoch=25, patience=10,
                           target_accuracy=1.0)


def two_fact_run(seed: int, passes: int, mode: str) -> dict:
    stories = generate_synthetic("two-fact", seed, 1200)
    train_set, test_set = stories[:1000], stories[1000:]
    model = DynamicMemoryNetwork(DmnConfig(n_I=64, n_H=32, T_M=passes, attention_mode=mode),
                                 build_vocab(train_set), seed=seed)
    start = time.perf_counter()
    cfg = TrainConfig(**{**TWO_FACT_CFG.to_dict(), "seed": seed})
    model, _ = train(model, train_set[:], cfg)
    res = evaluate(model, test_set)
    pattern = []
    for story in test_set:
        pred = model.predict(story)
        if pred.answer == story.answer:
            pattern.append(pred.trace.chosen[:2] == story.support_ordinals())
    return {"accuracy": res.accuracy, "gate_accuracy": res.gate_accuracy,
            "pattern": pattern, "seconds": time.perf_counter() - start}


@pytest.fixture(scope="module")
def softmax_runs():
    return {(s, p): two_fact_run(s, p, "softmax") for s in SEEDS for p in (1, 2)}


@pytest.fixture(scope="module")
def sigmoid_runs():
    return {s: two_fact_run(s, 2, "sigmoid-gru") for s in SEEDS}


@pytest.mark.slow
def test_criterion_3_pass_ablation(softmax_runs, report):
    one = [softmax_runs[s, 1]["accuracy"] for s in SEEDS]
    two = [softmax_runs[s, 2]["accuracy"] for s in SEEDS]
    gap = statistics.median(two) - statistics.median(one)
    minutes = sum(r["seconds"] for r in softmax_runs.values()) / 60
    ok = gap >= 0.05 and minutes < 30
    report(3, ok, f"T_M=2 {two} vs T_M=1 {one}: median gap {100 * gap:.1f} pts (>= 5), "
                  f"{minutes:.1f} min (< 30)")
    assert ok


@pytest.mark.slow
def test_criterion_4_gate_pattern(softmax_runs, report):
    pattern = [p for s in SEEDS for p in softmax_runs[s, 2]["pattern"]]
    frac = float(np.mean(pattern)) if pattern else 0.0
    ok = bool(pattern) and frac >= 0.90
    report(4, ok, f"{frac:.3f} of {len(pattern)} correctly answered stories (3 seeds) attend "
                  f"object fact then location fact (>= 0.90)")
    assert ok


@pytest.mark.slow
def test_criterion_5_softmax_vs_sigmoid(softmax_runs, sigmoid_runs, report):
    soft = [softmax_runs[s, 2]["gate_accuracy"] for s in SEEDS]
    sig = [sigmoid_runs[s]["gate_accuracy"] for s in SEEDS]
    ok = statistics.median(soft) >= statistics.median(sig)
    report(5, ok, f"median gate accuracy softmax {statistics.median(soft):.3f} {soft} >= "
                  f"sigmoid-gru {statistics.median(sig):.3f} {sig}")
    assert ok


# -- 6: per-token answers ------------------------------------------------------


@pytest.mark.slow
def test_criterion_6_per_token(report):
    train_set = generate_synthetic("tagging", 0, 500)
    test_set = generate_synthetic("tagging", 1, 200)
    labels = sorted({a for s in train_set for a in s.answer})
    cfg = DmnConfig(n_I=32, n_H=32, T_M=1, answer_mode="per-token", fact_unit="word")
    model = DynamicMemoryNetwork(cfg, build_vocab(train_set), labels, seed=0)
    model, _ = train(model, train_set, TrainConfig(epochs=30, target_accuracy=1.0))
    acc = evaluate(model, test_set).accuracy
    identical = True
    for story in test_set:
        facts = model.encode_input(story.facts)
        q = model.encode_question(story.question)
        with T.no_grad():
            _, gate_log = model.answer_per_token(facts, q)
        first = gate_log[0][0].data.tobytes()
        identical &= all(g.data.tobytes() == first for g in gate_log[0])
    ok = acc >= 0.95 and identical
    report(6, ok, f"token accuracy {acc:.4f} (>= 0.95); first-pass gates bitwise identical "
                  f"across positions: {identical}")
    assert ok


# -- 7: property suites -------------------------------------------------------

PROPERTY_MODULES = ["tests/test_tensor.py", "tests/test_dmn.py", "tests/test_data.py",
                    "tests/test_checkpoint.py", "tests/test_train.py"]
PROPERTY_TESTS = [
    "test_tensor.py::test_softmax_is_a_distribution",
    "test_tensor.py::test_sigmoid_in_open_interval",
    "test_dmn.py::test_gate_feature_length_and_range",
    "test_dmn.py::test_episode_special_cases",
    "test_dmn.py::test_first_pass_uses_question_as_memory",
    "test_dmn.py::test_pass_count_bounded",
    "test_data.py::test_round_trip_property",
    "test_checkpoint.py::test_round_trip_reproduces_evaluation",
    "test_train.py::test_train_is_deterministic",
]


def test_criterion_7_property_suites(report, pytestconfig):
    root = pytestconfig.rootpath / "tests"
    args = [str(root / t) for t in PROPERTY_TESTS] + ["-q", "-p", "no:cacheprovider"]
    start = time.perf_counter()
    code = pytest.main(args)
    elapsed = time.perf_counter() - start
    ok = code == 0 and elapsed < 60
    report(7, ok, f"{len(PROPERTY_TESTS)} property suites exit code {int(code)}, "
                  f"{elapsed:.1f}s (< 60s)")
    assert ok


# -- 8: Adam oracle ------------------------------------------------------------


def test_criterion_8_adam_oracle(report):
    A = np.array([[3.0, 0.5], [0.5, 1.0]])
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    theta = np.array([1.0, -1.5])
    m = np.zeros(2)
    v = np.zeros(2)
    cfg = TrainConfig(lr=lr, beta1=b1, beta2=b2, eps=eps, l2=0.0)
    with T.precision("float64"):
        p = T.parameter(theta.copy())
        state = AdamState()
        worst = 0.0
        for t in range(1, 101):
            g = A @ theta
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            theta = theta - lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
            adam_step(state, {"w": p}, {"w": A @ p.data}, cfg)
            worst = max(worst, float(np.max(np.abs(p.data - theta))))
    loss = 0.5 * p.data @ A @ p.data
    ok = worst < 1e-10 and loss < 1e-3
    report(8, ok, f"max deviation from reference {worst:.1e} (< 1e-10), final loss {loss:.1e}")
    assert ok
