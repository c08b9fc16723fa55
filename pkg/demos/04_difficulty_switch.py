"""
Following a moving target
=========================

Halfway through training the hard group changes from 2 to 7. A teacher that
only tracked a fixed prior would keep sampling group 2.
"""

# %%
import numpy as np

from advteacher.config import config_from_dict
from advteacher.runner import train

cfg = config_from_dict({
    "seed": 1,
    "student": {"difficulties": [0.1, 0.1, 1.0] + [0.1] * 7,
                "switch_step": 2500, "switch_difficulties": [0.1] * 7 + [1.0, 0.1, 0.1]},
    "eval": {"holdout_scenes": 0},
})
res = train(cfg)

for lo in range(0, 5000, 500):
    mean = res.p_tilde[lo:lo + 500].mean(axis=0)
    print(f"steps {lo:4d}+  P(2)={mean[2]:.3f}  P(7)={mean[7]:.3f}  argmax={mean.argmax()}")

# %%
counts = np.bincount(res.groups[2500:], minlength=10)
print("latched-group step counts after the switch:", counts)
