# ========================================================= #
import logging
import math
import platform
from enum import Enum
from typing import Union

import numpy as np

try:
    import orjson as json
except ImportError:  # pragma: no cover
    import json

# ========================================================= #


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def change_enum(val: Union[str, Enum, float, int], allowed_type=str):
    """
    Normalizes a value which may be supplied either as an enum member or as its raw value.

    :param val: the enum member or the raw value
    :param allowed_type: the type (or list of types) the raw value must have
    :return: the raw value
    """
    if isinstance(val, Enum):
        return val.value

    if isinstance(allowed_type, list):
        if type(val) in allowed_type:
            return val

        raise ValueError(
            f"The value supplied: ({val}) does not match the required type: ({allowed_type}). "
            f"Please consider using the specified enum in the docs for this function or recheck "
            f"the value supplied."
        )

    if isinstance(val, allowed_type) or val is None:
        return val

    raise ValueError(f"The value supplied: ({val}) does not match the required type: ({allowed_type}).")


def coerce_enum(val, enum_cls):
    """
    Turns a raw value or an enum member into a member of ``enum_cls``

    :param val: the value to convert
    :param enum_cls: target enum class
    :return: the enum member
    """
    raw = change_enum(val, [str, int])

    try:
        return enum_cls(raw)
    except ValueError:
        choices = ", ".join(str(m.value) for m in enum_cls)
        raise ValueError(f"Unknown {enum_cls.__name__} value: ({val}). Expected one of: {choices}")


# ========================================================= #


def to_json_safe(obj):
    """
    Recursively converts numpy scalars / arrays and enums into plain python objects so that both ``orjson`` and the
    standard ``json`` module can serialize them.
    """
    if isinstance(obj, dict):
        return {str(k): to_json_safe(v) for k, v in obj.items()}

    if isinstance(obj, (list, tuple)):
        return [to_json_safe(v) for v in obj]

    if isinstance(obj, np.ndarray):
        return to_json_safe(obj.tolist())

    if isinstance(obj, Enum):
        return obj.value

    if isinstance(obj, np.bool_):
        return bool(obj)

    if isinstance(obj, np.integer):
        return int(obj)

    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None

    if isinstance(obj, np.random.SeedSequence):
        # entropy may not fit in 64 bits
        return {"entropy": str(obj.entropy), "spawn_key": list(obj.spawn_key)}

    return obj


def dumps_json(obj) -> bytes:
    """
    Serializes to JSON bytes with sorted keys, using ``orjson`` when it is installed.
    """
    safe = to_json_safe(obj)

    if json.__name__ == "orjson":
        return json.dumps(safe, option=json.OPT_SORT_KEYS | json.OPT_INDENT_2)

    return json.dumps(safe, sort_keys=True, indent=2).encode("utf-8")


def loads_json(raw: Union[bytes, str]):
    return json.loads(raw)


def write_json(path, obj) -> None:
    with open(path, "wb") as f:
        f.write(dumps_json(obj))
        f.write(b"\n")


def read_json(path):
    with open(path, "rb") as f:
        return loads_json(f.read())


# ========================================================= #


def make_rng(seed) -> np.random.Generator:
    """
    Builds a numpy ``Generator`` from an int seed, a ``SeedSequence`` or an existing generator (returned as is).
    """
    if isinstance(seed, np.random.Generator):
        return seed

    return np.random.default_rng(seed)


def spawn_seeds(seed, count: int) -> list:
    """
    Splits one seed into ``count`` statistically independent child seed sequences. The same ``seed`` always yields
    the same children, whatever order they are consumed in.

    :param seed: an int seed or a ``SeedSequence``
    :param count: number of children
    :return: list of ``numpy.random.SeedSequence``
    """
    if isinstance(seed, np.random.SeedSequence):
        # spawn from a copy, SeedSequence.spawn advances the counter of the instance it is called on
        seed = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size)

        return seed.spawn(count)

    return np.random.SeedSequence(seed).spawn(count)


def provenance(command: str, config: dict, seed=None) -> dict:
    """
    The provenance record written next to every primary output.

    :param command: name of the pipeline stage or CLI sub-command
    :param config: the configuration snapshot of the run
    :param seed: the root seed
    :return: a JSON safe dict
    """
    import pandas as pd
    import sklearn

    from . import __version__

    return {
        "command": command,
        "seed": seed,
        "config": to_json_safe(config),
        "versions": {
            "svmcoreset": __version__,
            "numpy": np.__version__,
            "pandas": pd.__version__,
            "sklearn": sklearn.__version__,
            "python": platform.python_version(),
            "json_backend": json.__name__,
        },
    }


# ========================================================= #

if __name__ == "__main__":  # Tests
    print("Don't You Dare Running Lib Files Directly")
