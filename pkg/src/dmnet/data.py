"""bAbI-format stories, vocabularies, pretrained vectors and synthetic tasks.

The bAbI text format, one record per line::

    <id> <statement tokens>
    <id> <question tokens>\\t<answer>[\\t<supporting ids>]

An id of 1 starts a new story block. A question produces one :class:`Story`
holding every statement seen so far in its block. Multi-token answers are
comma-separated, as in the original corpus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError
from .nn import EmbeddingMatrix, init_array
from . import tensor as T

_TOKEN = re.compile(r"[a-z0-9'_<>]+|[^\sa-z0-9'_<>]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split; punctuation marks become their own tokens."""
    return _TOKEN.findall(text.lower())


@dataclass
class Story:
    facts: list[list[str]]
    lines: list[int]
    question: list[str]
    answer: list[str]
    supporting_facts: list[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.facts) != len(self.lines):
            raise ValueError("facts and line numbers differ in length")
        if not self.answer:
            raise ValueError("answer must be nonempty")
        missing = [s for s in self.supporting_facts if s not in self.lines]
        if missing:
            raise ValueError(f"supporting facts {missing} are not fact lines")

    def support_ordinals(self) -> list[int]:
        """Supporting line numbers mapped to positions among the facts."""
        pos = {line: i for i, line in enumerate(self.lines)}
        return [pos[s] for s in self.supporting_facts]

    @property
    def tokens(self) -> list[str]:
        return [tok for fact in self.facts for tok in fact]


def parse_babi(text: str) -> list[Story]:
    stories: list[Story] = []
    facts: list[list[str]] = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        head, sep, rest = raw.strip().partition(" ")
        try:
            line_id = int(head)
        except ValueError:
            raise ParseError(f"expected a line id, got {head!r}", lineno) from None
        if not sep or not rest.strip():
            raise ParseError("empty statement", lineno)
        if line_id == 1:
            facts, lines = [], []
        if "\t" not in rest:
            facts.append(tokenize(rest))
            lines.append(line_id)
            continue
        parts = rest.split("\t")
        if len(parts) not in (2, 3):
            raise ParseError("question lines need 2 or 3 tab-separated fields", lineno)
        answer = [a for a in (tok.strip().lower() for tok in parts[1].split(",")) if a]
        if not answer:
            raise ParseError("empty answer", lineno)
        support: list[int] = []
        if len(parts) == 3 and parts[2].strip():
            try:
                support = [int(s) for s in parts[2].split()]
            except ValueError:
                raise ParseError(f"bad supporting ids {parts[2]!r}", lineno) from None
        unknown = [s for s in support if s not in lines]
        if unknown:
            raise ParseError(f"supporting ids {unknown} do not name statements", lineno)
        stories.append(Story([list(f) for f in facts], list(lines), tokenize(parts[0]),
                             answer, support))
    return stories


def serialize_babi(stories: Iterable[Story]) -> str:
    """Inverse of :func:`parse_babi`; each story becomes its own block."""
    out = []
    for story in stories:
        if story.lines and story.lines[0] != 1:
            raise ValueError("a serialized story must start at line 1")
        for line, fact in zip(story.lines, story.facts):
            out.append(f"{line} {' '.join(fact)}")
        qid = (max(story.lines) if story.lines else 0) + 1
        support = " ".join(str(s) for s in story.supporting_facts)
        out.append(f"{qid} {' '.join(story.question)}\t{','.join(story.answer)}\t{support}")
    return "\n".join(out) + "\n"


class Vocab:
    """Token <-> id bijection; ids 0..2 are reserved."""

    UNK = "<unk>"
    EOS = "<eos>"    # end of sentence, marks fact positions in the input stream
    END = "<end>"    # end of an answer sequence
    RESERVED = (UNK, EOS, END)

    def __init__(self, tokens: Iterable[str] = ()):
        self._itos: list[str] = []
        self._stoi: dict[str, int] = {}
        for tok in self.RESERVED:
            self.add(tok)
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if token not in self._stoi:
            self._stoi[token] = len(self._itos)
            self._itos.append(token)
        return self._stoi[token]

    def __len__(self):
        return len(self._itos)

    def __contains__(self, token):
        return token in self._stoi

    def __eq__(self, other):
        return isinstance(other, Vocab) and self._itos == other._itos

    def __repr__(self):
        return f"Vocab({len(self)} tokens)"

    @property
    def unk_id(self) -> int:
        return self._stoi[self.UNK]

    @property
    def eos_id(self) -> int:
        return self._stoi[self.EOS]

    @property
    def end_id(self) -> int:
        return self._stoi[self.END]

    def id(self, token: str) -> int:
        return self._stoi.get(token, self._stoi[self.UNK])

    def token(self, idx: int) -> str:
        return self._itos[idx]

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self._itos[i] for i in ids]

    def tokens(self) -> list[str]:
        return list(self._itos)

    def missing(self, tokens: Iterable[str]) -> set[str]:
        return {t for t in tokens if t not in self._stoi}


def build_vocab(stories: Sequence[Story]) -> Vocab:
    """First-occurrence ordering over facts, question, then answer of each story."""
    vocab = Vocab()
    for story in stories:
        for fact in story.facts:
            for tok in fact:
                vocab.add(tok)
        for tok in story.question:
            vocab.add(tok)
        for tok in story.answer:
            vocab.add(tok)
    return vocab


def story_tokens(stories: Iterable[Story]) -> set[str]:
    out: set[str] = set()
    for s in stories:
        out.update(s.tokens)
        out.update(s.question)
        out.update(s.answer)
    return out


@dataclass
class PretrainedEmbeddings:
    dim: int
    vectors: dict[str, np.ndarray]


def parse_embeddings(text: str) -> PretrainedEmbeddings:
    """Read ``token v1 ... vd`` lines (GloVe text format)."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ParseError("line has a token but no values", lineno)
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError("non-numeric vector entry", lineno) from None
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ParseError(f"width {vec.size} differs from {dim}", lineno)
        vectors[parts[0]] = vec
    if dim is None:
        raise ParseError("no vectors found")
    return PretrainedEmbeddings(dim, vectors)


def load_embeddings(text: str, vocab: Vocab, seed: int = 0,
                    trainable: bool = True) -> EmbeddingMatrix:
    """Embedding matrix for ``vocab``; rows absent from ``text`` are randomly drawn."""
    pre = parse_embeddings(text)
    rng = np.random.default_rng(seed)
    L = init_array(rng, (pre.dim, len(vocab)), "uniform-fan")
    for i, tok in enumerate(vocab.tokens()):
        vec = pre.vectors.get(tok)
        if vec is not None:
            L[:, i] = vec
    return EmbeddingMatrix(T.Tensor(L, requires_grad=trainable, name="L"), trainable)


# ---------------------------------------------------------------------------
# synthetic tasks

PEOPLE = ("mary", "john", "sandra", "daniel")
LOCATIONS = ("hallway", "bathroom", "garden", "kitchen", "office", "bedroom")
OBJECTS = ("football", "milk", "apple")
MOVES = (("went", "to"), ("moved", "to"), ("travelled", "to"), ("journeyed", "to"),
         ("went", "back", "to"))
PICKUPS = (("picked", "up"), ("got",), ("grabbed",), ("took",))
DROPS = (("dropped",), ("put", "down"), ("discarded",), ("left",))
COUNTS = ("none", "one", "two")

TAG_LEXICON = {
    "det": ("the", "a", "every", "this"),
    "adj": ("big", "small", "red", "old", "happy"),
    "noun": ("dog", "cat", "man", "bird", "fish", "watch", "walk", "run"),
    "verb": ("sleeps", "eats", "sings", "fish", "watch", "walk", "run"),
}
TAG_TEMPLATES = (("det", "adj", "noun", "verb"), ("det", "noun", "verb", "adj"))

KINDS = ("single-fact", "two-fact", "counting", "tagging")


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _single_fact(rng, target):
    while True:
        n = int(rng.integers(3, 7))
        facts, where = [], {}
        for line in range(1, n + 1):
            person, loc = _pick(rng, PEOPLE), _pick(rng, LOCATIONS)
            facts.append([person, *_pick(rng, MOVES), "the", loc, "."])
            where[person] = (loc, line)
        match = [p for p in PEOPLE if p in where and where[p][0] == target]
        if match:
            person = _pick(rng, match)
            loc, line = where[person]
            return Story(facts, list(range(1, n + 1)), ["where", "is", person, "?"],
                         [loc], [line])


def _world_events(rng, n):
    """Random move/pickup/drop events; returns facts and the event log."""
    facts, events = [], []
    loc: dict[str, str] = {}
    holder: dict[str, str] = {}
    while len(facts) < n:
        person = _pick(rng, PEOPLE)
        roll = rng.random()
        carried = [o for o, h in holder.items() if h == person]
        free = [o for o in OBJECTS if o not in holder]
        if roll < 0.3 and person in loc and free:
            obj = _pick(rng, free)
            holder[obj] = person
            facts.append([person, *_pick(rng, PICKUPS), "the", obj, "."])
            events.append(("get", person, obj))
        elif roll < 0.45 and carried:
            obj = _pick(rng, carried)
            del holder[obj]
            facts.append([person, *_pick(rng, DROPS), "the", obj, "."])
            events.append(("drop", person, obj))
        else:
            place = _pick(rng, LOCATIONS)
            loc[person] = place
            facts.append([person, *_pick(rng, MOVES), "the", place, "."])
            events.append(("move", person, place))
    return facts, events


def _two_fact(rng, target):
    """Each person moves at most once, so the holder's location is unambiguous.

    The queried object is picked up once and never dropped; other objects may
    be picked up and dropped by other people as distractors.
    """
    while True:
        people = [PEOPLE[i] for i in rng.permutation(len(PEOPLE))]
        holder, others = people[0], people[1:]
        objects = [OBJECTS[i] for i in rng.permutation(len(OBJECTS))]
        obj = objects[0]
        movers = [holder] + others[:int(rng.integers(1, len(others) + 1))]
        where = {p: _pick(rng, LOCATIONS) for p in movers}
        if where[holder] != target:
            continue
        events = [("move", p, where[p]) for p in movers]
        events.append(("get", holder, obj))
        for other_obj in objects[1:int(rng.integers(1, len(objects) + 1))]:
            events.append(("get", _pick(rng, others), other_obj))
        order = list(rng.permutation(len(events)))
        events = [events[i] for i in order]
        # a distractor pickup may be followed by a drop somewhere later
        for i in range(len(events) - 1, -1, -1):
            kind, who, what = events[i]
            if kind == "get" and what != obj and rng.random() < 0.5:
                pos = int(rng.integers(i + 1, len(events) + 1))
                events.insert(pos, ("drop", who, what))
        facts = []
        for kind, who, what in events:
            verb = {"move": MOVES, "get": PICKUPS, "drop": DROPS}[kind]
            facts.append([who, *_pick(rng, verb), "the", what, "."])
        obj_line = events.index(("get", holder, obj)) + 1
        loc_line = events.index(("move", holder, target)) + 1
        n = len(facts)
        return Story(facts, list(range(1, n + 1)), ["where", "is", "the", obj, "?"],
                     [target], [obj_line, loc_line])


def _counting(rng, target):
    while True:
        n = int(rng.integers(3, 8))
        facts, events = _world_events(rng, n)
        options = []
        for person in PEOPLE:
            held: set[str] = set()
            support = []
            for i, (kind, who, what) in enumerate(events):
                if who != person or kind == "move":
                    continue
                support.append(i + 1)
                if kind == "get":
                    held.add(what)
                else:
                    held.discard(what)
            if support and len(held) < len(COUNTS) and COUNTS[len(held)] == target:
                options.append((person, support))
        if options:
            person, support = options[int(rng.integers(len(options)))]
            return Story(facts, list(range(1, n + 1)),
                         ["how", "many", "objects", "is", person, "carrying", "?"],
                         [target], support)


def _tagging(rng):
    clauses = int(rng.integers(1, 3))
    words, tags = [], []
    for _ in range(clauses):
        for tag in _pick(rng, TAG_TEMPLATES):
            words.append(_pick(rng, TAG_LEXICON[tag]))
            tags.append(tag)
    return Story([words], [1], ["pos", "tags", "?"], tags, [])


def generate_synthetic(kind: str, seed: int, count: int) -> list[Story]:
    """Deterministic synthetic corpus.

    Answer classes are cycled through a seeded permutation, so QA corpora are
    balanced to within one story per class.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown synthetic task {kind!r}; choose from {KINDS}")
    if count < 1:
        raise ConfigError("count must be at least 1")
    rng = np.random.default_rng(seed)
    if kind == "tagging":
        return [_tagging(rng) for _ in range(count)]
    classes = {"single-fact": LOCATIONS, "two-fact": LOCATIONS, "counting": COUNTS}[kind]
    make = {"single-fact": _single_fact, "two-fact": _two_fact, "counting": _counting}[kind]
    stories = []
    order: list[str] = []
    for _ in range(count):
        if not order:
            order = [classes[i] for i in rng.permutation(len(classes))]
        stories.append(make(rng, order.pop()))
    return stories


def split_dev(stories: Sequence[Story], fraction: float = 0.1,
              seed: int = 0) -> tuple[list[Story], list[Story]]:
    """Hold out ``fraction`` of ``stories`` (at least one) for development."""
    n = len(stories)
    n_dev = max(1, int(round(n * fraction))) if n > 1 else 0
    perm = np.random.default_rng(seed).permutation(n)
    dev = sorted(perm[:n_dev].tolist())
    dev_set = set(dev)
    return [stories[i] for i in range(n) if i not in dev_set], [stories[i] for i in dev]
