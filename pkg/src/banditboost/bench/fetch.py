"""Optional dataset downloads. Nothing else in the package needs the network.

Each schema file lists its raw sources; fetching downloads them into
``<dest>/<name>/<file>``, decompressing gz and zip archives and
concatenating multi-part datasets in source order. Re-fetching overwrites.
"""

from __future__ import annotations

import gzip
import io
import shutil
import urllib.request
import zipfile
from importlib import resources
from pathlib import Path

from .datasets import load_schema

SCHEMA_DATASETS = ("abalone", "adult", "census", "letter", "slice")


def bundled_schema_path(name: str) -> Path:
    """Path to a schema shipped with the package."""
    if name not in SCHEMA_DATASETS:
        raise ValueError(
            f"unknown dataset {name!r}; bundled schemas: {', '.join(SCHEMA_DATASETS)}"
        )
    return Path(str(resources.files("banditboost.bench") / "schemas" / f"{name}.json"))


def _download(url: str, timeout: float) -> bytes:
    request = urllib.request.Request(url, headers={"User-Agent": "dataset-fetch"})
    with urllib.request.urlopen(request, timeout=timeout) as response:
        return response.read()


def fetch_dataset(name: str, dest: str | Path = "data", timeout: float = 60.0) -> Path:
    """Download one dataset's raw files; returns the assembled file path."""
    schema_path = bundled_schema_path(name)
    spec = load_schema(schema_path)
    sources = spec.get("sources")
    if not sources:
        raise ValueError(f"schema {name!r} declares no sources to fetch")
    out_dir = Path(dest) / name
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / spec.get("file", f"{name}.csv")

    with open(out_path, "wb") as out:
        for source in sources:
            raw = _download(source["url"], timeout)
            compression = source.get("compression")
            if compression == "gz":
                raw = gzip.decompress(raw)
            elif compression == "zip":
                with zipfile.ZipFile(io.BytesIO(raw)) as zf:
                    member = source.get("member") or zf.namelist()[0]
                    raw = zf.read(member)
            elif compression:
                raise ValueError(f"unknown compression {compression!r}")
            out.write(raw)
            if not raw.endswith(b"\n"):
                out.write(b"\n")

    schema_copy = out_dir / f"{name}.schema.json"
    shutil.copyfile(schema_path, schema_copy)
    return out_path
