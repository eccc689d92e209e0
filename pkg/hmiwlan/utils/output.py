import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

from hmiwlan.errors import ConfigError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"


@dataclass
class RunManifest:
    """Everything needed to re-run one CLI invocation bit-identically."""
    subcommand: str
    config: Dict[str, Any]
    seed: int
    version: str
    outputs: List[str] = field(default_factory=list)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @staticmethod
    def load(path):
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
            return RunManifest(**data)
        except (OSError, ValueError, TypeError) as e:
            raise ConfigError("cannot read manifest {}: {}".format(path, e))


def manifest_path(csv_path):
    root, _ = os.path.splitext(str(csv_path))
    return root + ".manifest.json"


def write_csv(frame, path):
    directory = os.path.dirname(str(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %d rows to %s", len(frame), path)
    return str(path)


def write_manifest(manifest, csv_path):
    path = manifest_path(csv_path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest.to_json())
    return path
