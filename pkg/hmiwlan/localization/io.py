"""Anchor and MS path files."""
import json

from hmiwlan.errors import ConfigError
from hmiwlan.models import Anchor


def _read_json_array(path, what):
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError("cannot read {} file {}: {}".format(what, path, e.strerror))
    except json.JSONDecodeError as e:
        raise ConfigError("invalid {} JSON: {}".format(what, e.msg), e.lineno, e.colno)
    if not isinstance(data, list):
        raise ConfigError("{} file must hold a JSON array".format(what))
    return data


def _point(item, what):
    try:
        return float(item["x"]), float(item["y"]), float(item["z"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError("{} entries need numeric x, y and z: {!r}".format(what, item))


def load_anchors(path):
    """`[{"id": 0, "x": 0, "y": 0, "z": 0}, ...]` -> list of Anchor."""
    anchors = []
    seen = set()
    for item in _read_json_array(path, "anchors"):
        if not isinstance(item, dict) or "id" not in item:
            raise ConfigError("anchor entries need an id: {!r}".format(item))
        anchor_id = item["id"]
        if anchor_id in seen:
            raise ConfigError("anchor id {} appears twice".format(anchor_id))
        seen.add(anchor_id)
        anchors.append(Anchor(anchor_id, _point(item, "anchor")))
    return anchors


def load_path(path):
    """`[{"x": .., "y": .., "z": ..}, ...]` -> list of 3-tuples."""
    return [_point(item, "path") for item in _read_json_array(path, "path")]
