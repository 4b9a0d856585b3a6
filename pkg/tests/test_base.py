import math

import numpy as np
import pytest

from svmcoreset import base
from svmcoreset.enums import ReportFormat, SamplingMethod


def test_coerce_enum_accepts_members_and_values():
    assert base.coerce_enum("uniform", SamplingMethod) is SamplingMethod.UNIFORM
    assert base.coerce_enum(SamplingMethod.CORESET, SamplingMethod) is SamplingMethod.CORESET

    with pytest.raises(ValueError, match="Expected one of: csv, json"):
        base.coerce_enum("xml", ReportFormat)


def test_change_enum_rejects_wrong_types():
    assert base.change_enum(ReportFormat.JSON) == "json"
    assert base.change_enum(None) is None

    with pytest.raises(ValueError):
        base.change_enum(1.5, [str, int])


def test_json_safe_conversion():
    obj = {
        1: np.float64(0.25),
        "arr": np.arange(3),
        "flag": np.bool_(True),
        "nan": float("nan"),
        "inf": np.float32(math.inf),
        "fmt": ReportFormat.CSV,
        "nested": (np.int64(4), [np.float32(0.5)]),
    }

    assert base.to_json_safe(obj) == {
        "1": 0.25,
        "arr": [0, 1, 2],
        "flag": True,
        "nan": None,
        "inf": None,
        "fmt": "csv",
        "nested": [4, [0.5]],
    }


def test_json_file_round_trip(tmp_path):
    path = tmp_path / "x.json"
    base.write_json(path, {"b": np.arange(2), "a": 1.5})

    assert base.read_json(path) == {"a": 1.5, "b": [0, 1]}
    # keys come out sorted
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


def test_spawn_seeds_are_reproducible_and_distinct():
    first = [s.generate_state(2).tolist() for s in base.spawn_seeds(11, 3)]
    again = [s.generate_state(2).tolist() for s in base.spawn_seeds(11, 3)]

    assert first == again
    assert len({tuple(s) for s in first}) == 3


def test_make_rng_passes_generators_through():
    rng = np.random.default_rng(0)

    assert base.make_rng(rng) is rng
    assert base.make_rng(5).random() == np.random.default_rng(5).random()


def test_provenance_record():
    record = base.provenance("coreset", {"epsilon": np.float64(0.2), "method": SamplingMethod.UNIFORM}, seed=3)

    assert record["command"] == "coreset"
    assert record["seed"] == 3
    assert record["config"] == {"epsilon": 0.2, "method": "uniform"}
    assert set(record["versions"]) == {"svmcoreset", "numpy", "pandas", "sklearn", "python", "json_backend"}


def test_spawn_seeds_leaves_a_seed_sequence_untouched():
    parent = np.random.SeedSequence(11)

    first = [s.generate_state(2).tolist() for s in base.spawn_seeds(parent, 2)]
    again = [s.generate_state(2).tolist() for s in base.spawn_seeds(parent, 2)]

    assert first == again
    assert parent.n_children_spawned == 0
