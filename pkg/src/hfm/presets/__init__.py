"""Best-effort manifests for the five public benchmark datasets.

The data files are not shipped; point ``csv_path`` at a local copy (paths are
resolved relative to the manifest, or use :func:`preset` with ``data_dir``).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import yaml

from hfm.ingest import Manifest

NAMES = ("ricci", "credit", "income", "ppr", "ppvr")


def preset(name: str, data_dir) -> Manifest:
    if name not in NAMES:
        raise KeyError(f"unknown preset {name!r}; choose from {NAMES}")
    text = resources.files(__package__).joinpath(f"{name}.yaml").read_text(encoding="utf-8")
    return Manifest.from_dict(yaml.safe_load(text), base_dir=Path(data_dir))
