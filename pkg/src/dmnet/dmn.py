"""Input, question, episodic memory and answer modules.

Facts are the input encoder's hidden states, either at every word or at the
end-of-sentence token appended to each sentence. Each pass of the episodic
memory scores every fact against the current memory and the question, folds
the facts into an episode (gated GRU or softmax-weighted sum) and updates the
memory with a GRU. The answer decoder starts from the final memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from . import tensor as T
from .data import Story, Vocab
from .errors import ConfigError, ContractError, DimensionError, InputError
from .nn import (EmbeddingMatrix, GruParams, dropout_embed, embed_many, gru_run,
                 gru_step, init_array)
from .tensor import Tensor

ATTENTION_MODES = ("sigmoid-gru", "softmax")
ANSWER_MODES = ("sequence", "per-token", "single-class")
FACT_UNITS = ("sentence", "word")
SENTINEL_LABEL = "[done reading]"


@dataclass
class DmnConfig:
    n_I: int = 64
    n_H: int = 64
    T_M: int = 3
    attention_mode: str = "sigmoid-gru"
    answer_mode: str = "sequence"
    use_sentinel: bool = False
    share_encoder: bool = False
    max_answer_len: int = 5
    gate_hidden: int | None = None
    fact_unit: str = "sentence"

    def __post_init__(self):
        if self.T_M < 0:
            raise ConfigError("T_M must be >= 0")
        if self.max_answer_len < 1:
            raise ConfigError("max_answer_len must be >= 1")
        if self.n_I < 1 or self.n_H < 1:
            raise ConfigError("dimensions must be positive")
        if self.attention_mode not in ATTENTION_MODES:
            raise ConfigError(f"attention_mode must be one of {ATTENTION_MODES}")
        if self.answer_mode not in ANSWER_MODES:
            raise ConfigError(f"answer_mode must be one of {ANSWER_MODES}")
        if self.fact_unit not in FACT_UNITS:
            raise ConfigError(f"fact_unit must be one of {FACT_UNITS}")
        if self.answer_mode == "per-token" and self.fact_unit != "word":
            raise ConfigError("per-token answers need word-level facts")

    @property
    def d_h(self) -> int:
        return self.gate_hidden or self.n_H

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FactSequence:
    """Fact vectors c_1..c_T_C with their token spans.

    ``states`` holds every input-encoder state (rows of a matrix) and
    ``final_state`` the last one. Facts are kept as a (T_C, n_H) matrix; the
    per-fact vectors are sliced from it on demand.
    """

    facts_given: list[Tensor]
    spans: list[tuple[int, int]]
    final_state: Tensor
    states: Tensor | list[Tensor]
    sentinel: Tensor | None = None

    def __post_init__(self):
        self._matrix = T.stack(self.facts_given) if self.facts_given else None
        self._rows = list(self.facts_given) if self.facts_given else None

    def set_matrix(self, matrix: Tensor) -> None:
        self._matrix = matrix
        self._rows = None

    @property
    def T_C(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> Tensor:
        """Facts stacked as rows, shape (T_C, n_H)."""
        return self._matrix

    @property
    def facts(self) -> list[Tensor]:
        if self._rows is None:
            self._rows = [T.take(self._matrix, t) for t in range(self.T_C)]
        return self._rows

    def slots(self) -> Tensor:
        """Facts plus the sentinel row when present."""
        if self.sentinel is None:
            return self.matrix
        return T.concat([self.matrix, T.reshape(self.sentinel, (1, -1))], axis=0)


@dataclass
class GateNetParams:
    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor
    W_b: Tensor

    def __post_init__(self):
        n_h = self.W_b.shape[0]
        if self.W1.shape[1] != 7 * n_h + 2:
            raise DimensionError(f"W1 needs {7 * n_h + 2} columns, has {self.W1.shape[1]}")

    @staticmethod
    def dims(n_H: int, d_h: int) -> dict[str, tuple[int, ...]]:
        return {"W1": (d_h, 7 * n_H + 2), "b1": (d_h,), "W2": (1, d_h), "b2": (1,),
                "W_b": (n_H, n_H)}


@dataclass
class AnswerParams:
    W_a: Tensor
    gru: GruParams

    @property
    def n_out(self) -> int:
        return self.W_a.shape[0]


@dataclass
class GateTrace:
    """Per-pass gate scores (pre-activation) and gates over all attended slots."""

    scores: list[Tensor] = field(default_factory=list)
    gates: list[Tensor] = field(default_factory=list)
    chosen: list[int] = field(default_factory=list)
    stop_pass: int = 0
    n_facts: int = 0
    has_sentinel: bool = False

    @property
    def passes(self) -> int:
        return len(self.gates)

    def gate_matrix(self) -> np.ndarray:
        if not self.gates:
            return np.zeros((0, self.n_facts + self.has_sentinel))
        return np.stack([g.data for g in self.gates])

    def score_matrix(self) -> np.ndarray:
        if not self.scores:
            return np.zeros((0, self.n_facts + self.has_sentinel))
        return np.stack([s.data for s in self.scores])


# ---------------------------------------------------------------------------
# attention


def gate_features(c: Tensor, m: Tensor, q: Tensor, W_b: Tensor) -> Tensor:
    """z(c, m, q) = [c, m, q, c*q, c*m, |c-q|, |c-m|, c'W_b q, c'W_b m]."""
    if not c.shape == m.shape == q.shape or c.ndim != 1:
        raise DimensionError(f"gate_features: c {c.shape}, m {m.shape}, q {q.shape}")
    if W_b.shape != (c.shape[0], c.shape[0]):
        raise DimensionError(f"gate_features: W_b {W_b.shape} for vectors of {c.shape[0]}")
    return T.concat([
        c, m, q, T.mul(c, q), T.mul(c, m), T.absdiff(c, q), T.absdiff(c, m),
        T.matmul(c, T.matmul(W_b, q)), T.matmul(c, T.matmul(W_b, m)),
    ])


def gate_score(p: GateNetParams, c: Tensor, m: Tensor, q: Tensor) -> tuple[Tensor, Tensor]:
    """Two-layer scorer; returns (pre-activation score, sigmoid gate)."""
    z = gate_features(c, m, q, p.W_b)
    hidden = T.tanh(T.add(T.matmul(p.W1, z), p.b1))
    s = T.reshape(T.add(T.matmul(p.W2, hidden), p.b2), ())
    return s, T.sigmoid(s)


def gate_features_batch(C: Tensor, m: Tensor, q: Tensor, W_b: Tensor) -> Tensor:
    """Row-wise :func:`gate_features` for a matrix of candidate facts."""
    if C.ndim != 2 or C.shape[1] != m.shape[0] or m.shape != q.shape:
        raise DimensionError(f"gate_features: C {C.shape}, m {m.shape}, q {q.shape}")
    n = C.shape[0]
    bq = T.reshape(T.matmul(C, T.matmul(W_b, q)), (n, 1))
    bm = T.reshape(T.matmul(C, T.matmul(W_b, m)), (n, 1))
    return T.concat([
        C, T.repeat_rows(m, n), T.repeat_rows(q, n), T.mul(C, q), T.mul(C, m),
        T.absdiff(C, q), T.absdiff(C, m), bq, bm,
    ], axis=1)


def gate_scores(p: GateNetParams, C: Tensor, m: Tensor, q: Tensor) -> Tensor:
    """Pre-activation scores for every row of ``C``; shape (rows,)."""
    Z = gate_features_batch(C, m, q, p.W_b)
    hidden = T.tanh(T.add(T.matmul(Z, T.transpose(p.W1)), p.b1))
    s = T.add(T.matmul(hidden, T.transpose(p.W2)), p.b2)
    return T.reshape(s, (C.shape[0],))


def gated_update(g: Tensor, new: Tensor, old: Tensor) -> Tensor:
    """g * new + (1 - g) * old for a scalar gate ``g`` (one fused node)."""
    gd, nd, od = g.data, new.data, old.data
    out = gd * nd + (1.0 - gd) * od

    def fn(grad):
        return (np.asarray((grad * (nd - od)).sum(), dtype=gd.dtype).reshape(gd.shape),
                grad * gd, grad * (1.0 - gd))

    return T.make_node(out, (g, new, old), fn, "gated_update")


def gated_states(facts: Sequence[Tensor], gates: Tensor, gru: GruParams) -> list[Tensor]:
    """h_t = g_t GRU(c_t, h_{t-1}) + (1 - g_t) h_{t-1}, h_0 = 0; all states."""
    if gates.shape[0] != len(facts):
        raise ContractError(f"{gates.shape[0]} gates for {len(facts)} facts")
    h = T.zeros(gru.n_hidden)
    states = []
    for t, c in enumerate(facts):
        h = gated_update(T.take(gates, t), gru_step(gru, c, h), h)
        states.append(h)
    return states


def gated_episode(facts: Sequence[Tensor], gates: Tensor, gru: GruParams) -> Tensor:
    states = gated_states(facts, gates, gru)
    return states[-1] if states else T.zeros(gru.n_hidden)


def softmax_episode(facts: Tensor, scores: Tensor) -> Tensor:
    """sum_t softmax(scores)_t c_t with ``facts`` as a (T_C, n_H) matrix."""
    if scores.shape != (facts.shape[0],):
        raise ContractError(f"{scores.shape} scores for {facts.shape[0]} facts")
    return T.matmul(T.softmax(scores), facts)


def episode(mode: str, facts: FactSequence, scores: Tensor, gru: GruParams) -> Tensor:
    """Episode from per-slot pre-activation ``scores``.

    ``scores`` covers the facts and, when present, the sentinel slot last; the
    sentinel only takes part in choosing when to stop.
    """
    n = facts.T_C
    allowed = {n, n + 1} if facts.sentinel is not None else {n}
    if scores.ndim != 1 or scores.shape[0] not in allowed:
        raise ContractError(f"{scores.shape} scores for {n} facts")
    if scores.shape[0] != n:
        scores = T.index(scores, slice(0, n))
    if mode == "softmax":
        return softmax_episode(facts.matrix, scores)
    if mode == "sigmoid-gru":
        return gated_episode(facts.facts, T.sigmoid(scores), gru)
    raise ConfigError(f"unknown attention mode {mode!r}")


def memory_update(mem_gru: GruParams, e: Tensor, m_prev: Tensor) -> Tensor:
    return gru_step(mem_gru, e, m_prev)


# ---------------------------------------------------------------------------
# model


@dataclass
class Prediction:
    answer: list[str]
    trace: GateTrace
    answer_ids: list[int] = field(default_factory=list)


@dataclass
class ForwardResult:
    """Graph outputs for one story: everything the joint objective consumes."""

    trace: GateTrace
    gate_targets: list[int | None]
    answer_logits: list[Tensor]
    answer_targets: list[int]


class DynamicMemoryNetwork:
    """Parameters plus forward computation for one configuration.

    ``labels`` fixes the output classes for the single-class and per-token
    answer modes; sequence answers decode over the full vocabulary.
    """

    def __init__(self, cfg: DmnConfig, vocab: Vocab, labels: Sequence[str] | None = None,
                 seed: int = 0, embedding: EmbeddingMatrix | None = None):
        self.cfg = cfg
        self.vocab = vocab
        if cfg.answer_mode == "sequence":
            self.labels = None
        else:
            if not labels:
                raise ConfigError(f"answer mode {cfg.answer_mode} needs a label set")
            self.labels = list(labels)
        self._label_index = {lab: i for i, lab in enumerate(self.labels or ())}

        rng = np.random.default_rng(seed)
        if embedding is None:
            L = init_array(rng, (cfg.n_I, len(vocab)), "uniform-fan")
            embedding = EmbeddingMatrix(T.parameter(L, name="L"))
        elif embedding.vocab_size != len(vocab):
            raise DimensionError("embedding columns do not match the vocabulary")
        elif embedding.dim != cfg.n_I:
            raise DimensionError(f"embedding width {embedding.dim} but n_I = {cfg.n_I}")
        self.embedding = embedding
        n_I, n_H = cfg.n_I, cfg.n_H
        self.input_gru = GruParams.create(n_I, n_H, rng)
        self.question_gru = self.input_gru if cfg.share_encoder else GruParams.create(n_I, n_H, rng)
        gate = {k: T.parameter(init_array(rng, s, "uniform-fan"), name=k)
                for k, s in GateNetParams.dims(n_H, cfg.d_h).items()}
        self.gate = GateNetParams(**gate)
        self.episode_gru = GruParams.create(n_H, n_H, rng)
        self.memory_gru = GruParams.create(n_H, n_H, rng)
        self.sentinel = None
        if cfg.use_sentinel:
            bound = np.sqrt(6.0 / (n_H + 1))
            self.sentinel = T.parameter(
                rng.uniform(-bound, bound, n_H).astype(T.get_default_dtype()), name="sentinel")
        n_out = len(vocab) if self.labels is None else len(self.labels)
        self.answer = AnswerParams(
            T.parameter(init_array(rng, (n_out, n_H), "uniform-fan"), name="W_a"),
            GruParams.create(n_out + n_H, n_H, rng))

    # -- parameters ---------------------------------------------------------

    def parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {"L": self.embedding.L}
        out.update(self.input_gru.named("input"))
        if not self.cfg.share_encoder:
            out.update(self.question_gru.named("question"))
        for k in ("W1", "b1", "W2", "b2", "W_b"):
            out[f"gate.{k}"] = getattr(self.gate, k)
        out.update(self.episode_gru.named("episode"))
        out.update(self.memory_gru.named("memory"))
        if self.sentinel is not None:
            out["sentinel"] = self.sentinel
        out["answer.W_a"] = self.answer.W_a
        out.update(self.answer.gru.named("answer"))
        return out

    @staticmethod
    def decays(name: str) -> bool:
        """Whether L2 applies: weights yes, biases and the sentinel no."""
        leaf = name.rsplit(".", 1)[-1]
        return not (leaf.startswith("b") or name == "sentinel")

    def trainable(self) -> dict[str, Tensor]:
        return {k: v for k, v in self.parameters().items() if v.requires_grad}

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.parameters().items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        if set(arrays) != set(params):
            raise ContractError(f"parameter names differ: {sorted(set(arrays) ^ set(params))}")
        for k, p in params.items():
            if arrays[k].shape != p.shape:
                raise DimensionError(f"{k}: shape {arrays[k].shape} != {p.shape}")
            p.data = np.array(arrays[k], dtype=p.data.dtype)

    # -- input / question ---------------------------------------------------

    def _embedded(self, ids: Sequence[int], dropout: float, rng, training: bool) -> Tensor:
        X = embed_many(self.embedding, ids)
        return dropout_embed(X, dropout, rng, training)

    def encode_input(self, sentences: Sequence[Sequence[str]], dropout: float = 0.0,
                     rng: np.random.Generator | None = None,
                     training: bool = False) -> FactSequence:
        """Run the input GRU over the concatenated token stream.

        Sentence facts read the state at an end-of-sentence token appended to
        each sentence; word facts keep every state.
        """
        if not sentences or not any(len(s) for s in sentences):
            raise InputError("empty input")
        per_word = self.cfg.fact_unit == "word"
        ids, spans = [], []
        for sent in sentences:
            if not sent:
                continue
            start = len(ids)
            ids.extend(self.vocab.encode(sent))
            if per_word:
                spans.extend((i, i + 1) for i in range(start, len(ids)))
            else:
                spans.append((start, len(ids)))
                ids.append(self.vocab.eos_id)
        X = self._embedded(ids, dropout, rng, training)
        H = gru_run(self.input_gru, X)
        if per_word:
            rows = list(range(len(ids)))
        else:
            rows = [end for _, end in spans]
        facts = FactSequence([], spans, T.take(H, len(ids) - 1), H,
                             None if per_word else self.sentinel)
        facts.set_matrix(T.index(H, np.asarray(rows)))
        return facts

    def encode_question(self, tokens: Sequence[str], dropout: float = 0.0,
                        rng: np.random.Generator | None = None,
                        training: bool = False) -> Tensor:
        if not tokens:
            raise InputError("empty question")
        X = self._embedded(self.vocab.encode(tokens), dropout, rng, training)
        return T.take(gru_run(self.question_gru, X), len(tokens) - 1)

    # -- episodic memory ----------------------------------------------------

    def _gates(self, scores: Tensor) -> Tensor:
        if self.cfg.attention_mode == "softmax":
            return T.softmax(scores)
        return T.sigmoid(scores)

    def run_episodic(self, facts: FactSequence, q: Tensor,
                     n_passes: int | None = None) -> tuple[Tensor, GateTrace]:
        """Iterate attention passes; returns the final memory and the trace.

        With ``n_passes`` given, exactly that many passes run (teacher-forced
        stopping during training). Otherwise passes stop after ``T_M`` or once
        the sentinel slot has the largest gate.
        """
        if facts.T_C < 1:
            raise InputError("no facts to attend over")
        cfg = self.cfg
        sentinel = facts.sentinel is not None
        trace = GateTrace(n_facts=facts.T_C, has_sentinel=sentinel)
        if cfg.T_M == 0:
            return facts.final_state, trace
        limit = cfg.T_M if n_passes is None else min(n_passes, cfg.T_M)
        slots = facts.slots()
        m = q
        for i in range(1, limit + 1):
            s = gate_scores(self.gate, slots, m, q)
            g = self._gates(s)
            e = episode(cfg.attention_mode, facts, s, self.episode_gru)
            m = memory_update(self.memory_gru, e, m)
            chosen = int(np.argmax(g.data))
            trace.scores.append(s)
            trace.gates.append(g)
            trace.chosen.append(chosen)
            trace.stop_pass = i
            if n_passes is None and sentinel and chosen == facts.T_C:
                break
        return m, trace

    # -- answers ------------------------------------------------------------

    def _decoder_input(self, prev: int | None, q: Tensor) -> Tensor:
        y = np.zeros(self.answer.n_out, dtype=q.data.dtype)
        if prev is not None:
            y[prev] = 1.0
        return T.concat([T.constant(y), q])

    def answer_logits(self, m: Tensor, q: Tensor, targets: Sequence[int]) -> list[Tensor]:
        """Teacher-forced decoder logits, one vector per target step."""
        a = m
        prev = None
        logits = []
        for tgt in targets:
            a = gru_step(self.answer.gru, self._decoder_input(prev, q), a)
            logits.append(T.matmul(self.answer.W_a, a))
            prev = tgt
        return logits

    def answer_sequence(self, m: Tensor, q: Tensor) -> list[int]:
        """Greedy decoding until the end token or ``max_answer_len``."""
        a = m
        prev = None
        out: list[int] = []
        steps = 1 if self.cfg.answer_mode == "single-class" else self.cfg.max_answer_len
        for _ in range(steps):
            a = gru_step(self.answer.gru, self._decoder_input(prev, q), a)
            y = int(np.argmax(self.answer.W_a.data @ a.data))
            if self.labels is None and y == self.vocab.end_id:
                break
            out.append(y)
            prev = y
        return out

    def answer_per_token(self, facts: FactSequence, q: Tensor,
                         reuse_first_pass: bool = True) -> tuple[list[Tensor], list[list[Tensor]]]:
        """One classifier output per word.

        For word ``t`` the episode of each pass is the episode-GRU state at
        ``t``. First-pass gates depend only on the question, so they are
        scored once and shared by every position unless ``reuse_first_pass``
        is off. Returns (logits per word, gates[pass][word]).
        """
        if self.cfg.fact_unit != "word" or facts.spans and any(b - a != 1 for a, b in facts.spans):
            raise ContractError("per-token answers need word-level facts")
        n = facts.T_C
        C = facts.matrix
        softmax = self.cfg.attention_mode == "softmax"

        def prefix_episode(scores: Tensor, t: int, gate_states: list[Tensor] | None) -> Tensor:
            if softmax:
                w = T.softmax(T.index(scores, slice(0, t + 1)))
                return T.matmul(w, T.index(C, slice(0, t + 1)))
            return gate_states[t]

        memories = [q] * n if self.cfg.T_M else list(facts.facts)
        gate_log: list[list[Tensor]] = []
        for i in range(self.cfg.T_M):
            row = []
            new_mem = []
            shared = None
            if i == 0 and reuse_first_pass:
                shared = gate_scores(self.gate, C, q, q)
                shared_states = None if softmax else gated_states(
                    facts.facts, T.sigmoid(shared), self.episode_gru)
            for t in range(n):
                if shared is not None:
                    s, states = shared, shared_states
                else:
                    s = gate_scores(self.gate, C, memories[t], q)
                    states = None if softmax else gated_states(
                        facts.facts[:t + 1], T.sigmoid(T.index(s, slice(0, t + 1))),
                        self.episode_gru)
                e = prefix_episode(s, t, states)
                new_mem.append(memory_update(self.memory_gru, e, memories[t]))
                row.append(self._gates(s))
            memories = new_mem
            gate_log.append(row)
        logits = []
        for t in range(n):
            a = gru_step(self.answer.gru, self._decoder_input(None, q), memories[t])
            logits.append(T.matmul(self.answer.W_a, a))
        return logits, gate_log

    # -- whole-story helpers -------------------------------------------------

    def gate_targets(self, story: Story, passes: int | None = None) -> list[int | None]:
        """Supervised slot for each pass: supporting facts in order, then the
        sentinel; ``None`` where a pass is unsupervised."""
        passes = self.cfg.T_M if passes is None else passes
        if self.cfg.answer_mode == "per-token":
            return [None] * passes
        support = story.support_ordinals()
        sentinel = self.cfg.use_sentinel
        out: list[int | None] = []
        for i in range(passes):
            if i < len(support):
                out.append(support[i])
            elif sentinel and support:
                out.append(len(story.facts))
            else:
                out.append(None)
        return out

    def answer_targets(self, story: Story) -> list[int]:
        if self.labels is None:
            return self.vocab.encode(story.answer) + [self.vocab.end_id]
        try:
            return [self._label_index[a] for a in story.answer]
        except KeyError as exc:
            raise ContractError(f"answer label {exc.args[0]!r} not in the label set") from None

    def forward(self, story: Story, dropout: float = 0.0,
                rng: np.random.Generator | None = None, training: bool = False) -> ForwardResult:
        facts = self.encode_input(story.facts, dropout, rng, training)
        q = self.encode_question(story.question, dropout, rng, training)
        targets = self.answer_targets(story)
        if self.cfg.answer_mode == "per-token":
            if len(targets) != facts.T_C:
                raise ContractError(f"{len(targets)} labels for {facts.T_C} words")
            logits, gate_log = self.answer_per_token(facts, q)
            trace = GateTrace(gates=[row[0] for row in gate_log], n_facts=facts.T_C,
                              stop_pass=len(gate_log))
            return ForwardResult(trace, [], logits, targets)
        n_passes = None
        if self.cfg.use_sentinel and story.supporting_facts:
            n_passes = min(self.cfg.T_M, len(story.supporting_facts) + 1)
        elif self.cfg.use_sentinel:
            n_passes = self.cfg.T_M
        m, trace = self.run_episodic(facts, q, n_passes)
        gate_targets = self.gate_targets(story, trace.passes)
        if self.cfg.answer_mode == "single-class":
            targets = targets[:1]
        logits = self.answer_logits(m, q, targets)
        return ForwardResult(trace, gate_targets, logits, targets)

    def predict(self, story: Story) -> Prediction:
        with T.no_grad():
            facts = self.encode_input(story.facts)
            q = self.encode_question(story.question)
            if self.cfg.answer_mode == "per-token":
                logits, gate_log = self.answer_per_token(facts, q)
                ids = [int(np.argmax(l.data)) for l in logits]
                trace = GateTrace(gates=[row[0] for row in gate_log], n_facts=facts.T_C,
                                  stop_pass=len(gate_log),
                                  chosen=[int(np.argmax(row[0].data)) for row in gate_log])
                return Prediction([self.labels[i] for i in ids], trace, ids)
            m, trace = self.run_episodic(facts, q)
            ids = self.answer_sequence(m, q)
            if self.labels is None:
                answer = self.vocab.decode(ids)
            else:
                answer = [self.labels[i] for i in ids]
            return Prediction(answer, trace, ids)

    def fact_text(self, story: Story) -> list[str]:
        """Column labels for traces: one entry per attended slot."""
        if self.cfg.fact_unit == "word":
            text = [tok for fact in story.facts for tok in fact]
        else:
            text = [" ".join(f) for f in story.facts]
        if self.cfg.use_sentinel and self.cfg.fact_unit != "word":
            text.append(SENTINEL_LABEL)
        return text
