"""
Cross-entropy first, then self-critical training
================================================

A tiny log-linear policy learns to verbalize toy graphs. After a few
cross-entropy epochs it imitates the references but hedges between sentence
orders. Self-critical training samples an output, decodes greedily as a
baseline, and pushes up samples that score better than the greedy output.
It runs in a few seconds.
"""

# In[ ]
from kgtext.codec import linearize
from kgtext.scst import RewardSpec, TrainConfig, generate, toy_task_generate, train

data = toy_task_generate(1100, seed=3)
print(data[0].text)
print(" ".join(linearize(data[0].graph)))

# In[ ]
config = TrainConfig(data[:1000], data[1000:], RewardSpec.single("bleu_smoothed"),
                     ce_epochs=5, scst_epochs=10, scst_lr=0.05, seed=3)
report, policy = train(config)
for e in report.epochs:
    print(f"{e.phase:4s} {e.epoch:2d} validation reward {e.val_reward:.4f}")
print("best CE", round(report.best_ce_reward, 4), "best SCST", round(report.best_scst_reward, 4))

# In[ ]
sample = data[1000]
out, _ = generate(policy, linearize(sample.graph))
print("reference:", sample.text)
print("greedy:   ", " ".join(out[:-1]))
