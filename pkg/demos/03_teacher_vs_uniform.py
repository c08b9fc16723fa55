"""
Teacher against uniform sampling
================================

An oracle student has ten groups: group 0 is ten times harder than the rest.
Skills are forgotten slowly when a group is not trained. We compare where the
teacher puts its probability mass and how the difficulty-weighted loss ends up
against a sampler that picks groups uniformly.
"""

# %%
import numpy as np

from advteacher.config import config_from_dict
from advteacher.runner import train

rows = []
for seed in range(3):
    t = train(config_from_dict({"mode": "teacher", "seed": seed, "eval": {"holdout_scenes": 0}}))
    u = train(config_from_dict({"mode": "uniform", "seed": seed, "eval": {"holdout_scenes": 0}}))
    rows.append((seed, t.tail_mean_p()[0], t.tail_weighted_loss(), u.tail_weighted_loss()))

print("seed  P(hard) last 500  weighted loss teacher  uniform")
for seed, mass, lt, lu in rows:
    print(f"{seed:4d}  {mass:17.3f}  {lt:21.3f}  {lu:7.3f}")

# %%
# How the distribution evolves over one run, in 500-step blocks.
res = train(config_from_dict({"seed": 0, "eval": {"holdout_scenes": 0}}))
blocks = res.p_tilde.reshape(10, 500, 10).mean(axis=1)
for k, b in enumerate(blocks):
    bar = "#" * int(round(b[0] * 40))
    print(f"steps {k * 500:4d}-{k * 500 + 499:4d}  P(hard) {b[0]:.3f} {bar}")
print("skills at the end:", np.round(res.student.group_skill, 2))
