"""Small filesystem helpers: atomic writes and input checksums."""

from __future__ import annotations

import hashlib
import os
from pathlib import Path


def write_text_atomic(path: str | Path, text: str) -> Path:
    """Write via a temp file in the same directory plus rename, so readers
    never observe a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return path


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
