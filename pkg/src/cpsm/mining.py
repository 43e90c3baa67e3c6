"""Build a model for a config, run the search and collect a report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .constraints import MiningConfig, closed_filter
from .data import SequenceDB
from .model_decomposed import build_decomposed_model
from .model_global import Model, build_global_model

SCHEMA_VERSION = 1


@dataclass
class PatternResult:
    pattern: tuple[int, ...]
    cover: frozenset[int]
    support: int
    witnesses: Optional[dict[int, tuple[int, ...]]] = None
    # cover outside the support scope, only for two-class runs
    negative_support: Optional[int] = None


@dataclass
class RunReport:
    db: SequenceDB
    config: MiningConfig
    patterns: list[PatternResult] = field(default_factory=list)
    nodes: int = 0
    propagations: int = 0
    wall_time: float = 0.0

    @property
    def solution_count(self) -> int:
        return len(self.patterns)

    def pairs(self) -> set[tuple[tuple[int, ...], frozenset[int]]]:
        return {(p.pattern, p.cover) for p in self.patterns}

    def lines(self) -> list[str]:
        return [" ".join(self.db.decode(p.pattern)) + "\t" + str(p.support) for p in self.patterns]

    def to_dict(self, covers: bool = True) -> dict:
        out = []
        for p in self.patterns:
            entry = {"pattern": self.db.decode(p.pattern), "support": p.support}
            if p.negative_support is not None:
                entry["negative_support"] = p.negative_support
            if covers:
                entry["cover"] = sorted(i + 1 for i in p.cover)
            if p.witnesses is not None:
                entry["witnesses"] = {str(i + 1): list(w) for i, w in sorted(p.witnesses.items())}
            out.append(entry)
        return {
            "schema": SCHEMA_VERSION,
            "config": self.config.as_dict(),
            "solutions": self.solution_count,
            "nodes": self.nodes,
            "propagations": self.propagations,
            "wall_time": round(self.wall_time, 6),
            "patterns": out,
        }


def build_model(db: SequenceDB, config: MiningConfig) -> Model:
    if config.model == "decomposed":
        return build_decomposed_model(db, config)
    return build_global_model(db, config)


def sort_key(pattern: tuple[int, ...]) -> tuple:
    # ε sorts after every symbol, as in the branching order
    return pattern + (float("inf"),)


def mine(
    db: SequenceDB,
    config: MiningConfig,
    witnesses: bool = False,
    time_limit: Optional[float] = None,
) -> RunReport:
    """All patterns satisfying ``config``; raises kernel.SearchLimit on timeout."""
    start = time.monotonic()
    model = build_model(db, config)
    space = model.space
    if time_limit is not None:
        space.deadline = start + time_limit
    scope = set(model.scope)
    two_class = config.positive is not None
    found: list[PatternResult] = []

    def collect(sp):
        cov = model.cover()
        wit = None
        if witnesses:
            wit = {i: model.witness(i) for i in sorted(cov)}
        neg = len(cov - scope) if two_class else None
        found.append(PatternResult(model.pattern(), cov, len(cov & scope), wit, neg))

    space.search_all(collect)
    if config.closed:
        keep = {p for p, _ in closed_filter((r.pattern, r.cover) for r in found)}
        found = [r for r in found if r.pattern in keep]
    found.sort(key=lambda r: sort_key(r.pattern))
    return RunReport(
        db=db,
        config=config,
        patterns=found,
        nodes=space.nodes,
        propagations=space.propagations,
        wall_time=time.monotonic() - start,
    )
