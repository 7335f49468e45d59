"""Report envelopes and atomic file output.

Every command writes JSON reports that echo the configuration and seed
that produced them; apart from the generated_at field, re-running with
the same inputs yields byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["make_report", "write_json", "write_bytes"]


def make_report(kind: str, payload: dict, config: dict | None = None,
                seed: int | None = None) -> dict:
    return {
        "kind": kind,
        "generated_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "seed": seed,
        "config": config or {},
        **payload,
    }


def write_bytes(path: Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: Path, obj) -> None:
    write_bytes(Path(path), (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8"))
