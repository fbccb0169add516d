"""Train a small memory network on single-fact stories and look at where it attends.

Run: python demos/02_single_fact.py   (about a minute on one core)
"""

from dmnet import (DmnConfig, DynamicMemoryNetwork, TrainConfig, build_vocab, evaluate,
                   generate_synthetic, train)
from dmnet.trace import heatmap, trace_record

stories = generate_synthetic("single-fact", seed=7, count=500)
train_set, test_set = stories[:400], stories[400:]

print("a generated story:")
for i, fact in enumerate(train_set[0].facts, 1):
    print(f"  {i}. {' '.join(fact)}")
print(f"  Q: {' '.join(train_set[0].question)}  A: {' '.join(train_set[0].answer)}")

model = DynamicMemoryNetwork(DmnConfig(n_I=32, n_H=32, T_M=1, attention_mode="softmax"), build_vocab(stories), seed=0)
cfg = TrainConfig(epochs=15, switch_epoch=1, dropout=0.0, target_accuracy=1.0)


def report(rec):
    print(f"epoch {rec['epoch']:>2}  dev acc {rec['dev_accuracy']:.3f}  "
          f"gate acc {rec.get('dev_gate_accuracy') or 0:.3f}")


model, _ = train(model, train_set, cfg, on_epoch=report)
res = evaluate(model, test_set)
print(f"\nheld-out answer accuracy {res.accuracy:.3f}, gate accuracy {res.gate_accuracy:.3f}\n")
print(heatmap(trace_record(model, test_set[0])))
