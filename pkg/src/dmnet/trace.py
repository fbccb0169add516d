"""Machine-readable attention traces and terminal heatmaps."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from importlib import resources

import numpy as np

from .data import Story
from . import tensor as T
from .dmn import DynamicMemoryNetwork, Prediction

TRACE_VERSION = 1
# lower edges of the shaded buckets; gates under the first edge stay blank
SHADE_EDGES = (0.01, 0.25, 0.5, 0.75)
SHADES = (" ", "░", "▒", "▓", "█")


def load_schema() -> dict:
    return json.loads(resources.files("dmnet").joinpath("trace_schema.json").read_text())


@dataclass
class TraceRecord:
    facts: list[str]
    question: str
    answer: list[str]
    passes: list[list[float]]
    chosen: list[int]
    stop_pass: int
    version: int = TRACE_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TraceRecord":
        return cls(**json.loads(text))


def trace_record(model: DynamicMemoryNetwork, story: Story,
                 pred: Prediction | None = None) -> TraceRecord:
    """Run ``model`` on ``story`` (unless ``pred`` is given) and round gates to 4 places.

    When inference stopped early at the sentinel, the remaining passes up to
    ``T_M`` are still run so the trace always has ``T_M`` rows; ``stop_pass``
    records where inference stopped.
    """
    pred = model.predict(story) if pred is None else pred
    trace = pred.trace
    cfg = model.cfg
    if cfg.use_sentinel and cfg.answer_mode != "per-token" and trace.passes < cfg.T_M:
        with T.no_grad():
            facts = model.encode_input(story.facts)
            q = model.encode_question(story.question)
            _, full = model.run_episodic(facts, q, n_passes=cfg.T_M)
        full.stop_pass = trace.stop_pass
        trace = full
    return TraceRecord(
        facts=model.fact_text(story),
        question=" ".join(story.question),
        answer=list(pred.answer),
        passes=[[round(float(g), 4) for g in row] for row in trace.gate_matrix()],
        chosen=[int(c) for c in trace.chosen],
        stop_pass=int(trace.stop_pass),
    )


def shade(value: float) -> str:
    return SHADES[int(np.searchsorted(SHADE_EDGES, value, side="right"))]


def heatmap(record: TraceRecord) -> str:
    """One row per pass and one column per attended slot; darker is larger."""
    n = len(record.facts)
    sentinel = bool(record.facts) and record.facts[-1] == "[done reading]"
    labels = [str(i + 1) for i in range(n)]
    if sentinel:
        labels[-1] = "S"
    width = max(2, max((len(l) for l in labels), default=1)) + 1
    lines = [f"Q: {record.question}", f"A: {' '.join(record.answer)}"]
    lines.append(" " * 8 + "".join(l.rjust(width) for l in labels))
    for i, row in enumerate(record.passes):
        cells = "".join((shade(v) * (width - 1)).rjust(width) for v in row)
        lines.append(f"pass {i + 1:<3}" + cells)
    for label, text in zip(labels, record.facts):
        lines.append(f"  {label:>3}  {text}")
    return "\n".join(lines)
