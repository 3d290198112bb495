"""Synthetic geo-clustered scenarios.

Locations and data sources are grouped into clusters. Transfer rates inside a
cluster come from ``intra_rate``; rates between clusters come from the strictly
slower ``inter_rate`` range.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, fields
from typing import Mapping

from .model import CostModel, Location, ModelError, Scenario, Task


@dataclass(frozen=True)
class GenParams:
    n_locations: int = 8
    n_sources: int = 38
    n_tasks: int = 200
    size_min: float = 4.0
    size_max: float = 16.0
    n_clusters: int = 4
    intra_rate: tuple[float, float] = (1.0, 4.0)
    inter_rate: tuple[float, float] = (12.0, 30.0)
    comp: float = 2.0
    startup: float = 60.0
    block_seconds: float = 3600.0
    block_price: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "intra_rate", tuple(self.intra_rate))
        object.__setattr__(self, "inter_rate", tuple(self.inter_rate))
        for name in ("n_locations", "n_sources", "n_tasks", "n_clusters"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1")
        if self.n_clusters > self.n_locations:
            raise ModelError("n_clusters cannot exceed n_locations: every cluster needs a location")
        if not 0 < self.size_min <= self.size_max:
            raise ModelError("sizes need 0 < size_min <= size_max")
        lo, hi = self.intra_rate
        ilo, ihi = self.inter_rate
        if not (0 <= lo <= hi and ilo <= ihi):
            raise ModelError("rate ranges must be ordered (low, high) and non-negative")
        if self.n_clusters > 1 and not hi < ilo:
            raise ModelError("intra-cluster rates must lie strictly below inter-cluster rates")

    @classmethod
    def from_dict(cls, doc: Mapping) -> GenParams:
        known = {f.name for f in fields(cls)}
        extra = sorted(set(doc) - known)
        if extra:
            raise ModelError(f"unknown GenParams keys {extra}")
        return cls(**doc)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["intra_rate"] = list(self.intra_rate)
        d["inter_rate"] = list(self.inter_rate)
        return d


def gen_scenario(params: GenParams) -> Scenario:
    rng = random.Random(params.seed)
    width_l = len(str(params.n_locations - 1))
    width_s = len(str(params.n_sources - 1))
    width_t = len(str(params.n_tasks - 1))

    locations = tuple(
        Location(f"L{i:0{width_l}d}", f"region-{i} (cluster {i % params.n_clusters})")
        for i in range(params.n_locations)
    )
    loc_cluster = {loc.id: i % params.n_clusters for i, loc in enumerate(locations)}

    sources = tuple(f"S{j:0{width_s}d}" for j in range(params.n_sources))
    # First sources cover every cluster; the rest land anywhere.
    src_cluster = {
        s: (j if j < params.n_clusters else rng.randrange(params.n_clusters))
        for j, s in enumerate(sources)
    }

    transfer = {}
    for s in sources:
        row = {}
        for loc in locations:
            lo, hi = params.intra_rate if loc_cluster[loc.id] == src_cluster[s] else params.inter_rate
            row[loc.id] = rng.uniform(lo, hi)
        transfer[s] = row

    tasks = tuple(
        Task(
            f"t{k:0{width_t}d}",
            float(rng.randint(int(params.size_min), int(params.size_max)))
            if float(params.size_min).is_integer() and float(params.size_max).is_integer()
            else rng.uniform(params.size_min, params.size_max),
            rng.choice(sources),
        )
        for k in range(params.n_tasks)
    )
    cm = CostModel(
        transfer=transfer,
        comp=params.comp,
        startup=params.startup,
        block_seconds=params.block_seconds,
        block_price=params.block_price,
    )
    return Scenario(locations, tasks, cm, sources)
