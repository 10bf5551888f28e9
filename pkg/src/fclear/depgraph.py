"""Colored dependency graph of a financial system and its structural class.

Green edges are long positions: debtor to creditor for every contract, and
reference to debtor for every CDS.  Red edges are short positions: reference
to creditor for every CDS, unless the reference itself owes the creditor at
least the CDS notional.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .model import FinancialSystem


class SystemClass(enum.Enum):
    ACYCLIC = "Acyclic"
    RED_TO_LEAF_ONLY = "RedToLeafOnly"
    RED_CYCLE_FREE = "RedCycleFree"
    GENERAL = "General"


@dataclass(frozen=True)
class DependencyGraph:
    n: int
    green: frozenset[tuple[int, int]]
    red: frozenset[tuple[int, int]]

    def edges(self) -> set[tuple[int, int]]:
        return set(self.green) | set(self.red)

    def to_text(self, labels=None) -> str:
        name = (lambda i: labels[i]) if labels else str
        lines = [f"G {name(u)} {name(v)}" for u, v in sorted(self.green)]
        lines += [f"R {name(u)} {name(v)}" for u, v in sorted(self.red)]
        return "\n".join(lines) + ("\n" if lines else "")


def build_dependency_graph(system: FinancialSystem, aggregate: str = "contract") -> DependencyGraph:
    """Apply the three edge rules.

    ``aggregate="contract"`` compares each stored CDS (parallel CDSs on the
    same debtor, creditor and reference are already merged) against the
    reference's debt to the creditor; ``aggregate="creditor"`` first sums all
    CDS notionals into a creditor on the same reference, across debtors.
    """
    if aggregate not in ("contract", "creditor"):
        raise ValueError(f"unknown aggregation {aggregate!r}")
    green: set[tuple[int, int]] = set()
    red: set[tuple[int, int]] = set()
    for (u, v) in system.debts:
        green.add((u, v))
    pooled: dict[tuple[int, int], float] = {}
    for (u, v, w), d in system.cdss.items():
        green.add((u, v))
        green.add((w, u))
        pooled[(w, v)] = pooled.get((w, v), 0.0) + d
    for (u, v, w), d in system.cdss.items():
        notional = pooled[(w, v)] if aggregate == "creditor" else d
        if system.debts.get((w, v), 0.0) < notional:
            red.add((w, v))
    return DependencyGraph(system.n, frozenset(green), frozenset(red))


@dataclass(frozen=True)
class Classification:
    kind: SystemClass
    witness: tuple[int, int] | None = None
    cycle: tuple[int, ...] | None = None

    def describe(self, labels=None) -> str:
        name = (lambda i: labels[i]) if labels else str
        if self.kind is SystemClass.GENERAL and self.cycle:
            return f"General: red cycle {' -> '.join(name(i) for i in self.cycle)}"
        if self.witness is not None:
            u, v = self.witness
            return f"{self.kind.value}: witness edge {name(u)} -> {name(v)}"
        return self.kind.value


def _components(dg: DependencyGraph) -> np.ndarray:
    edges = dg.edges()
    if not edges:
        return np.arange(dg.n)
    rows, cols = zip(*edges)
    A = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dg.n, dg.n))
    _count, labels = connected_components(A, directed=True, connection="strong")
    return labels


def _path(dg: DependencyGraph, src: int, dst: int, allowed: set[int]) -> list[int]:
    adj: dict[int, list[int]] = {}
    for u, v in sorted(dg.edges()):
        if u in allowed and v in allowed:
            adj.setdefault(u, []).append(v)
    prev = {src: None}
    q = deque([src])
    while q:
        u = q.popleft()
        if u == dst:
            break
        for v in adj.get(u, []):
            if v not in prev:
                prev[v] = u
                q.append(v)
    out = [dst]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])
    return out[::-1]


def classify_graph(dg: DependencyGraph) -> Classification:
    comp = _components(dg)
    cyclic = [(u, v) for u, v in sorted(dg.edges()) if comp[u] == comp[v]]
    if not cyclic:
        return Classification(SystemClass.ACYCLIC)
    has_out = {u for u, _v in dg.edges()}
    bad_leaf = [(u, v) for u, v in sorted(dg.red) if v in has_out]
    if not bad_leaf:
        return Classification(SystemClass.RED_TO_LEAF_ONLY, witness=cyclic[0])
    inside = [(u, v) for u, v in sorted(dg.red) if comp[u] == comp[v]]
    if not inside:
        return Classification(SystemClass.RED_CYCLE_FREE, witness=bad_leaf[0])
    u, v = inside[0]
    members = set(np.flatnonzero(comp == comp[u]).tolist())
    back = _path(dg, v, u, members)
    return Classification(SystemClass.GENERAL, witness=(u, v), cycle=tuple([u] + back))


def classify_system(system: FinancialSystem, aggregate: str = "contract") -> Classification:
    """Most restrictive of Acyclic, RedToLeafOnly, RedCycleFree, General."""
    return classify_graph(build_dependency_graph(system, aggregate))
