"""
Dataset files and group statistics
==================================

Scenes are stored one JSON object per line. Derived fields (nearest-neighbour
distance, visible ratio, visibility flags) are rechecked on read.
"""

# %%
import json
from pathlib import Path

from advteacher.annotations import read_dataset, write_dataset
from advteacher.compositor import CompositionConfig, compose_dataset, make_real_backgrounds, make_template_library
from advteacher.config import config_from_dict
from advteacher.runner import group_stats

out = Path("demo_output")
out.mkdir(exist_ok=True)
library = make_template_library()

# mixed mode: "real" backgrounds get extra synthetic people, real labels untouched
backgrounds = make_real_backgrounds(4, library, seed=0)
cfg = CompositionConfig(lam=4, renders_per_background=5, seed=0)
n = write_dataset((s for s, _ in compose_dataset(backgrounds, library, cfg, keep_pitch=True)),
                  out / "mixed.jsonl")
print(f"{n} records written")

scenes = read_dataset(out / "mixed.jsonl")
first = json.loads((out / "mixed.jsonl").read_text().splitlines()[0])
print("record keys:", sorted(first))
print("person keys:", sorted(first["persons"][0]))

# %%
stats = group_stats(config_from_dict({"grouping": {"kind": "min_distance", "num_groups": 10}}),
                    out / "mixed.jsonl")
print("people per distance group:", stats["synthetic_counts"])
print("real people:", stats["real_samples"])
