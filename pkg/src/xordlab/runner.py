"""Run manifests, deterministic trial seeding, worker pools, and the CSV
conventions shared by every subcommand.

Every data file starts with a ``# schema=...`` line and a second comment
line embedding the config hash and master seed, so any output can be traced
back to the exact configuration that produced it.  Reruns with equal
(config, seed) produce byte-identical data files; the manifest (which
carries wall time) is metadata, not data.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["config_hash", "RunManifest", "write_csv", "write_json",
           "trial_seeds", "TrialPool", "load_yaml"]


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int
    outputs: list = field(default_factory=list)
    started: float = field(default_factory=time.time)

    @property
    def hash(self) -> str:
        return config_hash(self.config)

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / "manifest.json"
        payload = {
            "schema_version": 1,
            "subcommand": self.subcommand,
            "config": self.config,
            "config_hash": self.hash,
            "seed": self.seed,
            "artifact_version": __version__,
            "wall_time_s": round(time.time() - self.started, 3),
            "outputs": [str(p) for p in self.outputs],
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
        return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, schema: str, header, rows, manifest: RunManifest | None = None):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema=xordlab/{schema}/v1\n")
        if manifest is not None:
            fh.write(f"# config_hash={manifest.hash} seed={manifest.seed}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[h]) for h in header) + "\n")
    if manifest is not None:
        manifest.outputs.append(path)
    return path


def write_json(path, payload, manifest: RunManifest | None = None):
    path = Path(path)
    if manifest is not None:
        payload = dict(payload)
        payload.setdefault("config_hash", manifest.hash)
        payload.setdefault("seed", manifest.seed)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
    if manifest is not None:
        manifest.outputs.append(path)
    return path


def trial_seeds(master_seed: int, n: int) -> list:
    """Per-trial integer seeds derived by trial index (SeedSequence([s, i]))."""
    return [int(np.random.SeedSequence([master_seed, i]).generate_state(1)[0])
            for i in range(n)]


class TrialPool:
    """Order-preserving map over trials.  Workers share nothing; results are
    gathered in submission order so aggregation is deterministic."""

    def __init__(self, threads: int = 1):
        self.threads = max(1, int(threads))
        self._pool = None

    def __enter__(self):
        if self.threads > 1:
            self._pool = get_context("spawn").Pool(self.threads)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()

    def map(self, fn, args_list):
        if self._pool is None:
            return [fn(*args) for args in args_list]
        return self._pool.starmap(fn, args_list)


def load_yaml(path):
    import yaml

    with open(path) as fh:
        return yaml.safe_load(fh) or {}
