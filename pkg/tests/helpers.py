"""Small fixtures shared by the test modules."""

from __future__ import annotations

import numpy as np

from dmnet import DmnConfig, DynamicMemoryNetwork, build_vocab
from dmnet.data import Story

TWO_SENTENCE = Story(
    facts=[["mary", "got", "the", "milk", "."], ["mary", "went", "to", "the", "office", "."]],
    lines=[1, 2],
    question=["where", "is", "the", "milk", "?"],
    answer=["office"],
    supporting_facts=[1, 2],
)


def tiny_model(story=TWO_SENTENCE, seed=0, labels=None, scale=1.0, **cfg) -> DynamicMemoryNetwork:
    """A small model whose parameters (biases included) are all nonzero."""
    base = dict(n_I=4, n_H=3, T_M=2, gate_hidden=3, max_answer_len=3)
    base.update(cfg)
    model = DynamicMemoryNetwork(DmnConfig(**base), build_vocab([story]), labels, seed=seed)
    rng = np.random.default_rng(seed + 100)
    for p in model.parameters().values():
        p.data = (rng.normal(size=p.shape) * 0.5 * scale).astype(p.data.dtype)
    return model
