"""
Reward sign and pseudo ground truth
===================================

The teacher never sees a gradient from the student. It compares the latest
synthetic loss with a short moving window, nudges its own output toward (or
away from) the group it just picked, and fits that nudged target with a KL loss.
"""

# %%
import numpy as np

from advteacher.reward import LossHistory, evaluate_reward
from advteacher.simplex import kl_divergence, pseudo_gt_update
from advteacher.teacher import (AdamState, StudentStateTracker, TeacherNet, apply_update, forward,
                                loss_and_gradients)

history = LossHistory(size=3)
for loss in [0.40, 0.42, 0.38, 0.55, 0.30]:
    sig = evaluate_reward(history, loss)
    print(f"loss {loss:.2f}  window mean {sig.window_mean:.3f}  delta {sig.delta:+d}")

# %%
# A positive sign moves ``alpha * p_i`` onto the selected group and takes it
# evenly from the rest; a negative sign does the reverse.
p = np.full(5, 0.2)
print("reward  :", pseudo_gt_update(p, 1, alpha=0.5, delta=+1).round(4))
print("penalty :", pseudo_gt_update(p, 1, alpha=0.5, delta=-1).round(4))

# %%
# One small network, a handful of updates toward a fixed target.
tracker = StudentStateTracker(num_groups=5)
for g, loss in [(0, 0.9), (1, 0.2), (0, 0.8), (3, 0.1)]:
    tracker.observe(g, loss)
state = tracker.vector()
net = TeacherNet.init(tracker.input_dim, 16, 5, seed=0)
opt = AdamState.for_net(net, lr=0.05)
target = pseudo_gt_update(forward(net, state), 0, 0.1, +1)
for step in range(6):
    loss, grads = loss_and_gradients(net, state, target)
    print(f"step {step}: KL {loss:.6f}  p0 {forward(net, state)[0]:.4f}")
    net, opt = apply_update(net, opt, grads)
print("final KL to target:", kl_divergence(target, forward(net, state)))
