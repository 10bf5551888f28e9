"""Searching for clearing vectors and comparing them.

Three search strategies live here: plain (optionally damped) fixed-point
iteration, enumeration of designated driver gadgets followed by propagation
of the remaining rates, and exhaustive search over default patterns for small
systems.  The comparison helpers implement Pareto dominance on equities.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EnumerationTooLarge,
    NotAClearingVector,
    PropagationDiverged,
    TooLarge,
    ValidationError,
)
from .model import (
    DEFAULT_TOL,
    FinancialSystem,
    batch_check,
    batch_terms,
    batch_update,
    check_clearing,
    check_rates,
    evaluate_state,
)

MAX_SCENARIOS = 2**20
_CHUNK = 4096


class SolveStatus(enum.Enum):
    CONVERGED = "Converged"
    OSCILLATING = "Oscillating"
    MAX_ITER = "MaxIterExceeded"


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    rates: np.ndarray | None
    iterations: int
    residual: float
    last: np.ndarray = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def _snap(system: FinancialSystem, r: np.ndarray) -> np.ndarray:
    # Iterates under damping approach 1 only geometrically; pin solvent banks.
    upd = batch_update(system, r[None, :])[0]
    return np.where(upd == 1.0, 1.0, r)


def iterate_to_fixpoint(
    system: FinancialSystem,
    r0=None,
    damping: float = 1.0,
    max_iter: int = 10000,
    tol: float = DEFAULT_TOL,
) -> SolveReport:
    """Iterate ``r <- (1-d) r + d update(r)`` until the step falls below ``tol``."""
    if not 0.0 < damping <= 1.0:
        raise ValidationError(f"damping must lie in (0, 1], got {damping}")
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    r = np.ones(system.n) if r0 is None else check_rates(system, r0).copy()
    prev = None
    step = float("inf")
    for it in range(1, max_iter + 1):
        upd = batch_update(system, r[None, :])[0]
        nxt = (1.0 - damping) * r + damping * upd
        step = float(np.max(np.abs(nxt - r))) if system.n else 0.0
        if step < tol:
            cand = _snap(system, nxt)
            verdict = check_clearing(system, cand, tol)
            if verdict.ok:
                return SolveReport(SolveStatus.CONVERGED, cand, it, verdict.residual, cand)
        elif prev is not None and np.max(np.abs(nxt - prev)) < tol:
            return SolveReport(SolveStatus.OSCILLATING, None, it, step, nxt)
        prev, r = r, nxt
    return SolveReport(SolveStatus.MAX_ITER, None, max_iter, step, r)


# ---------------------------------------------------------------------------
# driver enumeration


@dataclass(frozen=True)
class Driver:
    """A gadget whose state is chosen by enumeration.

    ``states`` lists the rates fixed on ``members`` for each state; ``None`` as a
    state leaves the members to propagation.  With ``gate=(j, allowed)`` the
    driver is only enumerated while driver ``j`` is in one of ``allowed`` and is
    left free otherwise.
    """

    name: str
    members: tuple[int, ...]
    states: tuple[tuple[float, ...] | None, ...]
    gate: tuple[int, tuple[int, ...]] | None = None


@dataclass
class SolutionSet:
    solutions: list[np.ndarray]
    labels: list[str | None]
    continuum: bool = False
    witnesses: tuple[np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def matrix(self, n: int | None = None) -> np.ndarray:
        if not self.solutions:
            return np.zeros((0, n or 0))
        return np.vstack(self.solutions)

    def by_label(self) -> dict[str, np.ndarray]:
        return {lab: r for lab, r in zip(self.labels, self.solutions)}


def _scenarios(drivers: Sequence[Driver]) -> list[tuple[int | None, ...]]:
    bound = 1
    for d in drivers:
        bound *= max(1, len(d.states))
        if bound > MAX_SCENARIOS:
            raise EnumerationTooLarge(
                f"{len(drivers)} drivers give more than {MAX_SCENARIOS} state assignments"
            )
    out: list[tuple[int | None, ...]] = [()]
    for i, d in enumerate(drivers):
        nxt = []
        for partial in out:
            if d.gate is not None:
                j, allowed = d.gate
                if j >= i:
                    raise ValidationError(f"driver {d.name} is gated on a later driver")
                if partial[j] not in allowed:
                    nxt.append(partial + (None,))
                    continue
            nxt.extend(partial + (s,) for s in range(len(d.states)))
        out = nxt
    return out


def _label(choice: tuple[int | None, ...]) -> str:
    return "".join("*" if c is None else str(c) for c in choice)


def propagate(
    system: FinancialSystem,
    R0: np.ndarray,
    fixed: np.ndarray,
    max_iter: int | None = None,
    settle_tol: float = 1e-13,
) -> tuple[np.ndarray, np.ndarray]:
    """Iterate the free coordinates of each row with the fixed ones held.

    Returns ``(R, settled)`` where ``settled`` marks rows whose last step was
    below ``settle_tol``.
    """
    R = np.where(fixed, R0, 1.0)
    limit = max_iter if max_iter is not None else max(10 * system.n, 200)
    settled = np.zeros(R.shape[0], dtype=bool)
    active = np.arange(R.shape[0])
    for _ in range(limit):
        if active.size == 0:
            break
        sub = R[active]
        upd = np.where(fixed[active], sub, batch_update(system, sub))
        step = np.max(np.abs(upd - sub), axis=1) if system.n else np.zeros(len(active))
        R[active] = upd
        done = step < settle_tol
        settled[active[done]] = True
        active = active[~done]
    return R, settled


def enumerate_binary_solutions(
    compiled=None,
    tol: float = DEFAULT_TOL,
    system: FinancialSystem | None = None,
    drivers: Sequence[Driver] | None = None,
) -> SolutionSet:
    """Fix every driver state assignment, propagate the rest, keep clearing vectors.

    Accepts a compiled reduction (anything with ``system`` and ``drivers``) or
    an explicit ``system``/``drivers`` pair.  Results are ordered by label.
    """
    if compiled is not None:
        system = compiled.system
        drivers = compiled.drivers
    if system is None or drivers is None:
        raise ValidationError("need a compiled reduction or a system with drivers")
    n = system.n
    choices = _scenarios(drivers)
    sols: list[np.ndarray] = []
    labels: list[str] = []
    for start in range(0, len(choices), _CHUNK):
        chunk = choices[start : start + _CHUNK]
        R0 = np.ones((len(chunk), n))
        fixed = np.zeros((len(chunk), n), dtype=bool)
        for row, choice in enumerate(chunk):
            for d, c in zip(drivers, choice):
                if c is None or d.states[c] is None:
                    continue
                idx = list(d.members)
                R0[row, idx] = d.states[c]
                fixed[row, idx] = True
        R, settled = propagate(system, R0, fixed)
        if not settled.all():
            bad = [_label(chunk[i]) for i in np.flatnonzero(~settled)]
            raise PropagationDiverged(
                f"{len(bad)} driver assignments did not settle, first {bad[0]}", bad
            )
        ok, _bank_ok, _viol = batch_check(system, R, tol)
        for row in np.flatnonzero(ok):
            sols.append(R[row].copy())
            labels.append(_label(chunk[row]))
    order = sorted(range(len(labels)), key=lambda i: labels[i])
    return SolutionSet([sols[i] for i in order], [labels[i] for i in order])


# ---------------------------------------------------------------------------
# default-set enumeration


def _starts(k: int) -> list[np.ndarray]:
    base = [np.zeros(k), np.full(k, 0.5), np.full(k, 0.99)]
    # asymmetric starts break ties between mirror-image banks
    idx = np.arange(k)
    base.append((0.15 + 0.37 * idx) % 1.0)
    base.append((0.8 - 0.29 * idx) % 1.0)
    return base


def _dedupe(rows: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for r in rows[np.lexsort(rows.T[::-1])] if len(rows) else rows:
        if not kept or np.min(np.max(np.abs(np.vstack(kept) - r), axis=1)) > tol:
            kept.append(r)
    return np.vstack(kept) if kept else rows[:0]


def _constrained_iterate(system, M, R, damping, iterations, tol):
    """Iterate rows of ``R`` with banks outside mask ``M`` pinned at 1."""
    active = np.arange(R.shape[0])
    for _ in range(iterations):
        if active.size == 0:
            break
        sub = R[active]
        total, _a_full, a_loss = batch_terms(system, sub)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(total > 0, a_loss / np.where(total > 0, total, 1.0), 1.0)
        tgt = np.where(M[active], np.clip(ratio, 0.0, 1.0), 1.0)
        nxt = (1.0 - damping) * sub + damping * tgt
        step = np.max(np.abs(nxt - sub), axis=1)
        R[active] = nxt
        active = active[step >= tol * 1e-3]
    return R


def enumerate_default_sets(
    system: FinancialSystem,
    tol: float = DEFAULT_TOL,
    max_n: int = 16,
    iterations: int = 2000,
) -> SolutionSet:
    """Search every default pattern ``D`` for clearing vectors by multi-start iteration.

    Banks outside ``D`` are held at 1; banks in ``D`` follow ``a_v / l_v`` with
    lossy assets.  Each start is run undamped first and then with damping 1/2,
    which settles the two-cycles that undamped iteration falls into.
    Candidates are verified with :func:`check_clearing`.  When two verified,
    distinct vectors share a default pattern the set is flagged as a continuum
    and both are kept as witnesses.
    """
    n = system.n
    if n > max_n:
        raise TooLarge(f"{n} banks exceeds the default-set limit {max_n}")
    if n == 0:
        return SolutionSet([np.zeros(0)], [""])
    masks = np.array(list(itertools.product((False, True), repeat=n)), dtype=bool)
    starts = np.vstack(_starts(n))
    found = []
    for c0 in range(0, len(masks), _CHUNK):
        M = np.repeat(masks[c0 : c0 + _CHUNK], len(starts), axis=0)
        S = np.tile(starts, (len(masks[c0 : c0 + _CHUNK]), 1))
        for damping, its in ((1.0, min(iterations, 200)), (0.5, iterations)):
            R = _constrained_iterate(system, M, np.where(M, S, 1.0), damping, its, tol)
            upd = batch_update(system, R)
            R = np.where(upd == 1.0, 1.0, R)
            ok, _b, _v = batch_check(system, R, tol)
            found.append(R[ok])
    allrows = np.vstack(found)
    sols = _dedupe(allrows, 10 * tol)
    continuum = False
    witnesses = None
    patterns: dict[tuple[bool, ...], np.ndarray] = {}
    for r in sols:
        key = tuple(r < 1.0 - tol)
        if key in patterns and not continuum:
            continuum = True
            witnesses = (patterns[key], r)
        patterns.setdefault(key, r)
    sols_list = [r.copy() for r in sols]
    labels = ["".join("1" if v < 1.0 - tol else "0" for v in r) for r in sols_list]
    order = sorted(range(len(sols_list)), key=lambda i: (labels[i], tuple(sols_list[i])))
    return SolutionSet(
        [sols_list[i] for i in order], [labels[i] for i in order], continuum, witnesses
    )


# ---------------------------------------------------------------------------
# comparison


class ParetoVerdict(enum.Enum):
    STRICTLY_BETTER = "StrictlyBetter"
    STRICTLY_WORSE = "StrictlyWorse"
    EQUAL = "Equal"
    INCOMPARABLE = "Incomparable"


def _equity_tol(q1: np.ndarray, q2: np.ndarray, tol: float) -> np.ndarray:
    return 10 * tol * np.maximum(1.0, np.maximum(np.abs(q1), np.abs(q2)))


def _compare_equities(q1: np.ndarray, q2: np.ndarray, tol: float) -> ParetoVerdict:
    diff = q1 - q2
    eps = _equity_tol(q1, q2, tol)
    up = np.any(diff > eps)
    down = np.any(diff < -eps)
    if up and down:
        return ParetoVerdict.INCOMPARABLE
    if up:
        return ParetoVerdict.STRICTLY_BETTER
    if down:
        return ParetoVerdict.STRICTLY_WORSE
    return ParetoVerdict.EQUAL


def pareto_compare(system: FinancialSystem, r, r2, tol: float = DEFAULT_TOL) -> ParetoVerdict:
    """How ``r`` compares with ``r2``: StrictlyBetter means every equity weakly higher."""
    for name, vec in (("first", r), ("second", r2)):
        verdict = check_clearing(system, vec, tol)
        if not verdict.ok:
            raise NotAClearingVector(
                f"{name} vector violates clearing at bank {verdict.first_violation}"
            )
    return _compare_equities(evaluate_state(system, r).equity, evaluate_state(system, r2).equity, tol)


@dataclass(frozen=True)
class SpaceSummary:
    essential_classes: int
    classes: dict[tuple[bool, ...], list[int]]
    pareto_front: list[int]


def equity_matrix(system: FinancialSystem, solutions: Iterable) -> np.ndarray:
    rows = [evaluate_state(system, r).equity for r in solutions]
    return np.vstack(rows) if rows else np.zeros((0, system.n))


def solution_space_summary(
    system: FinancialSystem, solutions: Iterable, tol: float = DEFAULT_TOL
) -> SpaceSummary:
    """Group solutions by default pattern and find the non-dominated ones (by index)."""
    sols = [check_rates(system, r) for r in solutions]
    classes: dict[tuple[bool, ...], list[int]] = {}
    for i, r in enumerate(sols):
        classes.setdefault(tuple(bool(b) for b in r < 1.0 - tol), []).append(i)
    Q = equity_matrix(system, sols)
    front = []
    for i in range(len(sols)):
        dominated = any(
            _compare_equities(Q[j], Q[i], tol) is ParetoVerdict.STRICTLY_BETTER
            for j in range(len(sols))
            if j != i
        )
        if not dominated:
            front.append(i)
    return SpaceSummary(len(classes), classes, front)
