"""Joint gate/answer objective, Adam, the loss-weight schedule, and the
training and evaluation loops."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict, replace
from typing import Callable, Sequence

import numpy as np

from . import tensor as T
from .data import Story, split_dev
from .dmn import DynamicMemoryNetwork, GateTrace
from .errors import ConfigError, ContractError, DimensionError
from .tensor import Tensor

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    l2: float = 1e-5
    dropout: float = 0.1
    alpha: float = 1.0
    beta: float = 1.0
    switch_epoch: int = 5
    epochs: int = 50
    seed: int = 0
    patience: int = 10
    dev_fraction: float = 0.1
    target_accuracy: float | None = None

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.eps <= 0 or self.l2 < 0:
            raise ConfigError("eps must be positive and l2 nonnegative")
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("loss weights must be nonnegative")
        if self.switch_epoch < 0 or self.epochs < 0 or self.patience < 1:
            raise ConfigError("switch_epoch/epochs must be >= 0 and patience >= 1")
        if not 0 < self.dev_fraction < 1:
            raise ConfigError("dev_fraction must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


def schedule(epoch: int, cfg: TrainConfig) -> tuple[float, float]:
    """Gate loss only before ``switch_epoch``; both terms from then on."""
    if epoch < cfg.switch_epoch:
        return cfg.alpha, 0.0
    return cfg.alpha, cfg.beta


def joint_loss(trace: GateTrace, gate_targets: Sequence[int | None],
               answer_logits: Sequence[Tensor], answer_targets: Sequence[int],
               alpha: float, beta: float) -> Tensor:
    """alpha * sum of per-pass gate cross-entropies + beta * sum of per-step
    answer cross-entropies. Gate terms use pre-activation scores over all slots."""
    terms: list[Tensor] = []
    if alpha:
        for i, tgt in enumerate(gate_targets):
            if tgt is None or i >= len(trace.scores):
                continue
            terms.append(T.scale(T.cross_entropy(trace.scores[i], tgt), alpha))
    if beta:
        if len(answer_logits) != len(answer_targets):
            raise ContractError(f"{len(answer_logits)} answer steps for "
                                f"{len(answer_targets)} targets")
        for logits, tgt in zip(answer_logits, answer_targets):
            terms.append(T.scale(T.cross_entropy(logits, tgt), beta))
    if not terms:
        return T.zeros()
    total = terms[0]
    for t in terms[1:]:
        total = T.add(total, t)
    return total


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(state: AdamState, params: dict[str, Tensor], grads: dict[str, np.ndarray],
              cfg: TrainConfig, decay: Callable[[str], bool] = lambda name: True) -> None:
    """One bias-corrected Adam update, in place.

    L2 enters as ``l2 * theta`` added to the gradient of every parameter for
    which ``decay(name)`` holds. Parameters without a gradient are skipped.
    """
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if g.shape != p.shape:
            raise DimensionError(f"{name}: gradient {g.shape} vs parameter {p.shape}")
        if cfg.l2 and decay(name):
            g = g + cfg.l2 * p.data
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        # lr * (m / c1) / (sqrt(v / c2) + eps), with fewer temporaries
        denom = np.sqrt(v)
        denom *= 1.0 / np.sqrt(c2)
        denom += cfg.eps
        step = np.divide(m, denom, out=denom)
        step *= cfg.lr / c1
        p.data -= step


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalResult:
    accuracy: float
    gate_accuracy: float | None
    n: int
    correct: int
    gate_correct: int = 0
    gate_total: int = 0


def _supervised_passes(model: DynamicMemoryNetwork, story: Story) -> list[int | None]:
    passes = model.cfg.T_M
    if model.cfg.use_sentinel and story.supporting_facts:
        passes = min(passes, len(story.supporting_facts) + 1)
    return model.gate_targets(story, passes)


def evaluate(model: DynamicMemoryNetwork, stories: Sequence[Story]) -> EvalResult:
    """Exact-match answer accuracy (token accuracy in per-token mode) and the
    fraction of supervised passes whose argmax slot hits its target."""
    if not stories:
        raise ContractError("cannot evaluate on an empty set")
    per_token = model.cfg.answer_mode == "per-token"
    correct = total = 0
    g_ok = g_total = 0
    for story in stories:
        pred = model.predict(story)
        if per_token:
            total += len(story.answer)
            correct += sum(a == b for a, b in zip(pred.answer, story.answer))
        else:
            total += 1
            correct += pred.answer == story.answer
        for i, tgt in enumerate(_supervised_passes(model, story)):
            if tgt is None:
                continue
            g_total += 1
            g_ok += i < len(pred.trace.chosen) and pred.trace.chosen[i] == tgt
    gate_acc = g_ok / g_total if g_total else None
    return EvalResult(correct / total, gate_acc, len(stories), correct, g_ok, g_total)


def mean_loss(model: DynamicMemoryNetwork, stories: Sequence[Story],
              alpha: float, beta: float) -> float:
    total = 0.0
    with T.no_grad():
        for story in stories:
            res = model.forward(story)
            total += joint_loss(res.trace, res.gate_targets, res.answer_logits,
                                res.answer_targets, alpha, beta).item()
    return total / max(len(stories), 1)


# ---------------------------------------------------------------------------
# training


@dataclass
class Metrics:
    """One record per epoch; epoch 0 is the untrained model."""

    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_dev_accuracy: float = 0.0
    stopped_epoch: int = 0

    def column(self, key: str) -> list:
        return [rec[key] for rec in self.history]


def train_step(model: DynamicMemoryNetwork, story: Story, state: AdamState,
               cfg: TrainConfig, alpha: float, beta: float,
               rng: np.random.Generator, params: dict[str, Tensor] | None = None) -> float:
    params = params if params is not None else model.trainable()
    res = model.forward(story, cfg.dropout, rng, training=True)
    J = joint_loss(res.trace, res.gate_targets, res.answer_logits, res.answer_targets,
                   alpha, beta)
    if J.requires_grad:
        T.backward(J)
    grads = {k: p.grad for k, p in params.items() if p.grad is not None}
    adam_step(state, params, grads, cfg, model.decays)
    for p in params.values():
        p.grad = None
    return J.item()


def train(model: DynamicMemoryNetwork, stories: Sequence[Story], cfg: TrainConfig,
          dev: Sequence[Story] | None = None,
          on_epoch: Callable[[dict], None] | None = None) -> tuple[DynamicMemoryNetwork, Metrics]:
    """Example-at-a-time training with early stopping on dev accuracy.

    Without ``dev``, ``cfg.dev_fraction`` of ``stories`` is held out. Patience
    is only counted once the answer loss is switched on. The returned model
    carries the parameters of the best dev epoch.
    """
    if not stories:
        raise ConfigError("empty training corpus")
    if dev is None:
        stories, dev = split_dev(stories, cfg.dev_fraction, cfg.seed)
    if not stories or not dev:
        raise ConfigError("need nonempty train and dev splits")
    stories = list(stories)
    supervised = any(
        any(t is not None for t in model.gate_targets(s)) for s in stories)
    sched = cfg if supervised else replace(cfg, switch_epoch=0)

    order_rng = np.random.default_rng(cfg.seed)
    drop_rng = np.random.default_rng(cfg.seed + 1)
    state = AdamState()
    params = model.trainable()
    metrics = Metrics()

    def record(epoch, alpha, beta, train_loss):
        res = evaluate(model, dev)
        rec = {
            "epoch": epoch, "alpha": alpha, "beta": beta,
            "train_loss": train_loss,
            "dev_loss": mean_loss(model, dev, cfg.alpha, cfg.beta),
            "dev_accuracy": res.accuracy,
            "dev_gate_accuracy": res.gate_accuracy,
        }
        metrics.history.append(rec)
        if on_epoch is not None:
            on_epoch(rec)
        log.info("epoch %d loss %s dev acc %.4f", epoch, train_loss, res.accuracy)
        return rec

    rec = record(0, None, None, None)
    best = model.state_arrays()
    metrics.best_dev_accuracy = rec["dev_accuracy"]
    stale = 0
    for epoch in range(1, cfg.epochs + 1):
        alpha, beta = schedule(epoch - 1, sched)
        total = 0.0
        for i in order_rng.permutation(len(stories)):
            total += train_step(model, stories[i], state, cfg, alpha, beta, drop_rng, params)
        rec = record(epoch, alpha, beta, total / len(stories))
        metrics.stopped_epoch = epoch
        if rec["dev_accuracy"] > metrics.best_dev_accuracy:
            metrics.best_dev_accuracy = rec["dev_accuracy"]
            metrics.best_epoch = epoch
            best = model.state_arrays()
            stale = 0
        elif beta > 0:
            stale += 1
        if cfg.target_accuracy is not None and beta > 0 \
                and metrics.best_dev_accuracy >= cfg.target_accuracy:
            break
        if stale >= cfg.patience:
            break
    model.load_arrays(best)
    return model, metrics
