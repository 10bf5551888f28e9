"""Objective functions over clearing vectors, preference counts and centrality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadObjective, EmptySet, MissingDesignation, NotAClearingVector
from .model import DEFAULT_TOL, FinancialSystem, check_clearing, evaluate_state

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

OBJECTIVES = {
    "MaxEquity": MAXIMIZE,
    "MinEquity": MINIMIZE,
    "MinDefault": MINIMIZE,
    "MaxSurviving": MAXIMIZE,
    "MaxPrefer": MAXIMIZE,
    "MinLeastPrefer": MINIMIZE,
    "MinUnpaid": MINIMIZE,
    "MaxPaid": MAXIMIZE,
    "MinPropUnpaid": MINIMIZE,
    "MaxPropPaid": MAXIMIZE,
    "MinDiffEq": MINIMIZE,
    "AllianceBalance": MINIMIZE,
}

_ALIASES = {k.lower(): k for k in OBJECTIVES}


def canonical_objective(name: str) -> str:
    """Accept ``MaxEquity``, ``max-equity`` or ``max_equity``."""
    key = name.replace("-", "").replace("_", "").lower()
    if key not in _ALIASES:
        raise BadObjective(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}")
    return _ALIASES[key]


@dataclass(frozen=True)
class ObjectiveValue:
    kind: str
    value: float
    direction: str

    def better_than(self, other: "ObjectiveValue", tol: float = 0.0) -> bool:
        if self.direction == MAXIMIZE:
            return self.value > other.value + tol
        return self.value < other.value - tol


def _block(system: FinancialSystem, block) -> np.ndarray:
    return np.arange(system.n) if block is None else np.asarray(list(block), dtype=int)


def evaluate_objective(
    system: FinancialSystem,
    r,
    kind: str,
    node: int | None = None,
    pair: tuple[int, int] | None = None,
    partition: tuple[Sequence[int], Sequence[int]] | None = None,
    block: Iterable[int] | None = None,
    solutions: Sequence | None = None,
    tol: float = DEFAULT_TOL,
    verify: bool = True,
) -> ObjectiveValue:
    """Score one clearing vector.

    Counting and payment objectives are taken over ``block`` (all banks by
    default).  The preference objectives need the full list of ``solutions``
    that ``r`` belongs to.
    """
    kind = canonical_objective(kind)
    if verify:
        verdict = check_clearing(system, r, tol)
        if not verdict.ok:
            raise NotAClearingVector(f"clearing fails at bank {verdict.first_violation}")
    st = evaluate_state(system, r)
    idx = _block(system, block)
    direction = OBJECTIVES[kind]
    if kind in ("MaxEquity", "MinEquity"):
        if node is None:
            raise MissingDesignation(f"{kind} needs a designated node")
        value = st.equity[node]
    elif kind in ("MinDefault", "MaxSurviving"):
        defaults = int(np.count_nonzero(st.rates[idx] < 1.0 - tol))
        value = defaults if kind == "MinDefault" else len(idx) - defaults
    elif kind == "MinUnpaid":
        value = st.unpaid[idx].sum()
    elif kind == "MaxPaid":
        value = st.paid[idx].sum()
    elif kind in ("MinPropUnpaid", "MaxPropPaid"):
        total = st.total_liab[idx].sum()
        part = st.unpaid[idx].sum() if kind == "MinPropUnpaid" else st.paid[idx].sum()
        value = part / total if total > 0 else 0.0
    elif kind == "MinDiffEq":
        if pair is None:
            raise MissingDesignation("MinDiffEq needs a designated pair (v1, v2)")
        value = abs(st.equity[pair[0]] - st.equity[pair[1]])
    elif kind == "AllianceBalance":
        if partition is None:
            raise MissingDesignation("AllianceBalance needs a partition (V1, V2)")
        v1, v2 = partition
        value = abs(st.equity[list(v1)].sum() - st.equity[list(v2)].sum())
    else:
        if solutions is None:
            raise MissingDesignation(f"{kind} needs the solution set")
        counts = preference_counts(system, solutions, block=block, tol=tol)
        R = np.vstack([np.asarray(s, dtype=float) for s in solutions])
        hit = np.flatnonzero(np.max(np.abs(R - np.asarray(r, dtype=float)), axis=1) <= 10 * tol)
        if hit.size == 0:
            raise MissingDesignation("the scored vector is not in the supplied solution set")
        value = counts[hit[0]][0 if kind == "MaxPrefer" else 1]
    return ObjectiveValue(kind, float(value), direction)


def preference_counts(
    system: FinancialSystem,
    solutions: Sequence,
    block: Iterable[int] | None = None,
    tol: float = DEFAULT_TOL,
) -> list[tuple[int, int]]:
    """Per solution: how many banks attain their best and their worst equity there."""
    sols = list(solutions)
    if not sols:
        raise EmptySet("preference counts need at least one solution")
    idx = _block(system, block)
    Q = np.vstack([evaluate_state(system, r).equity[idx] for r in sols])
    qmax = Q.max(axis=0)
    qmin = Q.min(axis=0)
    eps = 10 * tol * np.maximum(1.0, np.abs(Q).max(axis=0))
    best = (Q >= qmax - eps).sum(axis=1)
    worst = (Q <= qmin + eps).sum(axis=1)
    return [(int(a), int(b)) for a, b in zip(best, worst)]


def distance(r, r2) -> float:
    """L1 distance between two rate vectors."""
    return float(np.abs(np.asarray(r, dtype=float) - np.asarray(r2, dtype=float)).sum())


def centrality(solutions: Sequence, which: str = "cent1") -> np.ndarray:
    """``cent1``: distance to the mean solution; ``cent2``: summed distance to all."""
    sols = list(solutions)
    if not sols:
        raise EmptySet("centrality needs at least one solution")
    R = np.vstack([np.asarray(s, dtype=float) for s in sols])
    if which == "cent1":
        return np.abs(R - R.mean(axis=0)).sum(axis=1)
    if which == "cent2":
        return np.array([np.abs(R - row).sum() for row in R])
    raise BadObjective(f"unknown centrality {which!r}")
