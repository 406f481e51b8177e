"""Deterministic persistence helpers: CSV tables, flat binary arrays with JSON
sidecars, PGM images, and run manifests.

Every artifact except manifest.json is a pure function of (config, seed):
floats are written with shortest round-trip repr and JSON keys are sorted, so
re-running a study reproduces the bytes.  manifest.json carries wall times and
library versions and is therefore excluded from the byte-identical guarantee.
"""

import hashlib
import json
import time
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def config_hash(config):
    """sha256 of the canonical JSON encoding of a config object."""
    payload = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")
    return path


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def save_array(path, array, sidecar):
    """Write a float64 flat binary plus a JSON sidecar with shape/meta."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    array = np.asarray(array, dtype=np.float64)
    array.tofile(path)
    meta = {"dtype": "float64", "shape": list(array.shape), "order": "C"}
    meta.update(sidecar)
    write_json(path.with_suffix(path.suffix + ".json"), meta)
    return path


def load_array(path):
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as fh:
        meta = json.load(fh)
    data = np.fromfile(path, dtype=meta["dtype"])
    return data.reshape(meta["shape"]), meta


def write_pgm(path, image, maxval=65535):
    """ASCII PGM (P2) with the image range mapped onto [0, maxval]."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    img = np.asarray(image, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    scale = (maxval / (hi - lo)) if hi > lo else 0.0
    quantized = np.round((img - lo) * scale).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n{maxval}\n")
        for row in quantized:
            fh.write(" ".join(str(v) for v in row) + "\n")
    return path


def write_manifest(out_dir, config, wall_time, extra=None):
    import numpy
    import scipy
    payload = {
        "config": _jsonable(config),
        "config_hash": config_hash(config),
        "wall_time_seconds": wall_time,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "versions": {"mhotv": "0.1.0", "numpy": numpy.__version__, "scipy": scipy.__version__},
    }
    if extra:
        payload.update(extra)
    return write_json(Path(out_dir) / "manifest.json", payload)
