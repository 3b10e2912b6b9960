"""Run configuration: one JSON block controlling grid, mollifier, probes,
tolerances, output and seeding.  Every report embeds the config hash so
identical inputs are recognizable as identical runs."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .grid import EpsilonGrid


@dataclass
class RunConfig:
    grid_eps0: float = 0.5
    grid_ratio: float = 0.5
    grid_count: int = 48
    grid_tail_window: float = 0.5
    mollifier_Q: int = 4
    mollifier_R: float = 1.0
    probe_lo: float = -2.0
    probe_hi: float = 2.0
    v_negl: float = 40.0
    v_assoc: float = 0.3
    slope_tol: float = 0.2
    out_dir: str = "out"
    seed: int = 2718

    def __post_init__(self):
        if min(self.v_negl, self.v_assoc, self.slope_tol) <= 0:
            raise ConfigError("tolerances must be positive")
        if not (0 < self.grid_eps0 <= 1 and 0 < self.grid_ratio < 1):
            raise ConfigError("grid spec out of range")
        if self.grid_count < 8:
            raise ConfigError("grid needs at least 8 points")
        if self.mollifier_Q < 0 or self.mollifier_Q % 2:
            raise ConfigError("mollifier Q must be even and nonnegative")

    @staticmethod
    def from_json(payload: dict) -> "RunConfig":
        cfg = RunConfig()
        grid = payload.get("grid", {})
        for src, dst in (("eps0", "grid_eps0"), ("ratio", "grid_ratio"),
                         ("count", "grid_count"),
                         ("tail_window", "grid_tail_window")):
            if src in grid:
                setattr(cfg, dst, type(getattr(cfg, dst))(grid[src]))
        mol = payload.get("mollifier", {})
        if "Q" in mol:
            cfg.mollifier_Q = int(mol["Q"])
        if "R" in mol:
            cfg.mollifier_R = float(mol["R"])
        probes = payload.get("probes", {})
        cfg.probe_lo = float(probes.get("lo", cfg.probe_lo))
        cfg.probe_hi = float(probes.get("hi", cfg.probe_hi))
        tol = payload.get("tolerances", {})
        cfg.v_negl = float(tol.get("v_negl", cfg.v_negl))
        cfg.v_assoc = float(tol.get("v_assoc", cfg.v_assoc))
        cfg.slope_tol = float(tol.get("slope_tol", cfg.slope_tol))
        cfg.out_dir = str(payload.get("out_dir", cfg.out_dir))
        cfg.seed = int(payload.get("seed", cfg.seed))
        cfg.__post_init__()
        return cfg

    @staticmethod
    def load(path: str | None) -> "RunConfig":
        if path is None:
            return RunConfig()
        try:
            with open(path) as fh:
                return RunConfig.from_json(json.load(fh))
        except (OSError, json.JSONDecodeError) as ex:
            raise ConfigError("cannot read config %s: %s" % (path, ex))

    def grid(self) -> EpsilonGrid:
        return EpsilonGrid.geometric(self.grid_eps0, self.grid_ratio,
                                     self.grid_count, self.grid_tail_window)

    def canonical(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def stamp(self) -> dict:
        return {"config_hash": self.hash(),
                "grid": self.grid().describe(),
                "seed": self.seed}


def max_workers() -> int:
    """Parallelism cap from the COLOMBEAU_THREADS environment variable."""
    raw = os.environ.get("COLOMBEAU_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map honoring the thread cap (serial by default)."""
    items = list(items)
    workers = min(max_workers(), max(1, len(items)))
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
