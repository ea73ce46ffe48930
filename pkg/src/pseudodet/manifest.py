"""Machine-model manifest: the constants every bound in the package uses.

The defaults ship as ``manifest.json`` next to this module. Point the
``PSEUDODET_MANIFEST`` environment variable at another JSON file to override
them.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

MANIFEST_ENV = "PSEUDODET_MANIFEST"


@dataclass(frozen=True)
class Manifest:
    version: str
    compile_k: int
    fact51_c_prime: int
    fact51_c0: int
    kt_rkt_slack: int
    prime_witness_overhead: int

    def as_dict(self) -> dict:
        return asdict(self)


def load_manifest(path: str | os.PathLike | None = None) -> Manifest:
    if path is None:
        path = os.environ.get(MANIFEST_ENV)
    if path:
        text = Path(path).read_text()
    else:
        text = resources.files(__package__).joinpath("manifest.json").read_text()
    data = json.loads(text)
    return Manifest(**{k: data[k] for k in Manifest.__dataclass_fields__})
