import json

import pytest

from advteacher.config import ConfigError, RunConfig, config_from_dict, load_config
from advteacher.grouping import GroupingKind


def test_defaults_are_valid():
    cfg = config_from_dict({})
    assert cfg.mode == "teacher"
    assert (cfg.teacher.alpha, cfg.teacher.epsilon, cfg.teacher.steps_per_group, cfg.teacher.history) == (0.1, 0.1, 50, 10)
    assert cfg.grouping.num_groups == 10
    assert cfg.student.difficulty_vector(10) == [1.0] + [0.1] * 9
    assert cfg.compose.composition(0).lam == 9.0
    assert config_from_dict({"compose": {"mode": "mixed"}}).compose.composition(0).lam == 4.0


def test_lambda_alias_round_trip():
    cfg = config_from_dict({"compose": {"lambda": 6}})
    assert cfg.compose.lam == 6
    d = cfg.to_dict()
    assert d["compose"]["lambda"] == 6
    again = config_from_dict(json.loads(json.dumps(d)))
    assert again.to_dict() == d


def test_min_distance_spec():
    spec = config_from_dict({}).grouping.fixed_spec()
    assert spec.kind is GroupingKind.MIN_DISTANCE
    assert (spec.lower, spec.upper) == (0.0, 640.0)
    assert config_from_dict({"grouping": {"kind": "camera_pitch"}}).grouping.fixed_spec() is None


@pytest.mark.parametrize("data, where", [
    ({"bogus": 1}, "bogus: unknown field"),
    ({"teacher": {"gamma": 1}}, "teacher.gamma: unknown field"),
    ({"mode": "random"}, "config: mode"),
    ({"total_steps": 0}, "total_steps"),
    ({"batch_size": 7}, "batch_size"),
    ({"teacher": {"alpha": 2}}, "teacher: alpha"),
    ({"teacher": {"epsilon": -0.1}}, "teacher: epsilon"),
    ({"teacher": {"steps_per_group": 0}}, "teacher: steps_per_group"),
    ({"teacher": {"lr": 0}}, "teacher: lr"),
    ({"grouping": {"num_groups": 1}}, "grouping: num_groups"),
    ({"grouping": {"kind": "height"}}, "grouping"),
    ({"grouping": {"lower": 0}}, "grouping: lower and upper"),
    ({"student": {"difficulties": [1, 2]}}, "student.difficulties"),
    ({"student": {"switch_step": 10}}, "student: switch_step"),
    ({"compose": {"lambda": 0}}, "compose: lambda"),
    ({"compose": {"pitch_range": [10, 0]}}, "compose: pitch_range"),
    ({"compose": {"mode": "real"}}, "compose: mode"),
    ({"eval": {"num_occlusion_bins": 0}}, "eval"),
    ({"teacher": 5}, "teacher: expected an object"),
])
def test_field_level_diagnostics(data, where):
    with pytest.raises(ConfigError) as e:
        config_from_dict(data)
    assert where in str(e.value)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": 1,\n "mode": }')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(bad)


def test_shipped_configs_load():
    from pathlib import Path
    for path in sorted((Path(__file__).parent.parent / "configs").glob("*.json")):
        assert isinstance(load_config(path), RunConfig)
