"""
Difficulty groups from scene features
=====================================

Every training person falls into one of ``|g|`` bins, either by the distance
to its nearest neighbour in the image or by the camera pitch of the render.
"""

# %%
# Nearest-neighbour distance bins are fixed: ten equal bins over [0, 640) px.
import warnings

import numpy as np

from advteacher.grouping import (GroupingWarning, assign_groups, build_min_distance_spec,
                                 build_pitch_spec, min_distances)

spec = build_min_distance_spec(10)
print("edges:", spec.edges)

rng = np.random.default_rng(0)
people = rng.uniform(0, 640, size=(12, 2))
d = min_distances(people)
for (x, y), dist, g in zip(people, d, assign_groups(spec, d)):
    print(f"person at ({x:5.1f}, {y:5.1f})  nearest {dist:6.1f} px  -> group {g}")

# %%
# Pitch bins depend on the data. The interval is shrunk by the population
# variance on each side; when that empties it (variance is in squared degrees,
# so it usually does for a 0-45 degree range) the full [min, max) is used.
narrow = np.concatenate([[10.0], np.full(500, 15.0), [20.0]])
print(build_pitch_spec(narrow, 5))

wide = rng.uniform(0, 45, size=2000)
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always", GroupingWarning)
    pitch_spec = build_pitch_spec(wide, 5)
print(pitch_spec)
print("warning:", caught[0].message if caught else None)
print("counts per pitch group:", np.bincount(assign_groups(pitch_spec, wide), minlength=5))
