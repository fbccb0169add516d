"""Dynamic memory networks for question answering and sequence tagging."""

from .data import Story, Vocab, build_vocab, generate_synthetic, parse_babi, serialize_babi
from .dmn import DmnConfig, DynamicMemoryNetwork, GateTrace
from .train import TrainConfig, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "Story", "Vocab", "build_vocab", "generate_synthetic", "parse_babi", "serialize_babi",
    "DmnConfig", "DynamicMemoryNetwork", "GateTrace", "TrainConfig", "evaluate", "train",
]
