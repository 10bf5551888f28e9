"""Financial systems with debts and credit default swaps, and their clearing equations.

A system holds per-bank external assets, unconditional debts ``(debtor, creditor)``
and CDSs ``(debtor, creditor, reference)``.  Given recovery rates ``r`` the CDS
``u -> v`` referencing ``w`` with notional ``d`` becomes a liability of
``d * (1 - r_w)``; a bank pays an ``r_u`` share of every liability, and a
defaulting bank only keeps ``alpha`` of its external assets and ``beta`` of its
incoming payments.

All numerical work is done on batches of rate vectors (rows of a 2-d array) so
that the solvers can push thousands of candidate vectors through one call.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatch,
    NonPositiveWeight,
    SanityViolation,
    SelfContract,
    SelfReference,
    ValidationError,
)

DEFAULT_TOL = 1e-9
# Relative slack used when deciding solvency (a_v >= l_v) in the update map.
SOLVENCY_SLACK = 1e-12

ROLES = ("source", "sink", "gadget", "objective", "indicator")


def _as_debt_map(debts) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    items = debts.items() if isinstance(debts, Mapping) else ((tuple(d[:2]), d[2]) for d in debts)
    for (u, v), w in items:
        key = (int(u), int(v))
        out[key] = out.get(key, 0.0) + float(w)
    return out


def _as_cds_map(cdss) -> dict[tuple[int, int, int], float]:
    out: dict[tuple[int, int, int], float] = {}
    items = cdss.items() if isinstance(cdss, Mapping) else ((tuple(c[:3]), c[3]) for c in cdss)
    for (u, v, w), d in items:
        key = (int(u), int(v), int(w))
        out[key] = out.get(key, 0.0) + float(d)
    return out


def _incidence(cols: np.ndarray, n: int) -> sp.csr_matrix:
    """Sparse (n x m) matrix scattering contract columns onto bank rows."""
    m = len(cols)
    return sp.csr_matrix((np.ones(m), (cols, np.arange(m))), shape=(n, m))


def _scatter(inc: sp.csr_matrix, values: np.ndarray) -> np.ndarray:
    # values: (B, m) -> (B, n)
    if inc.shape[1] == 0:
        return np.zeros((values.shape[0], inc.shape[0]))
    return np.asarray(inc @ values.T).T


@dataclass(frozen=True, eq=False)
class FinancialSystem:
    """Immutable financial system; build it through :func:`build_system`."""

    externals: tuple[float, ...]
    debts: Mapping[tuple[int, int], float]
    cdss: Mapping[tuple[int, int, int], float]
    alpha: float = 1.0
    beta: float = 1.0
    labels: tuple[str | None, ...] = ()
    roles: tuple[str | None, ...] = ()

    @property
    def n(self) -> int:
        return len(self.externals)

    @property
    def lossless(self) -> bool:
        return self.alpha == 1.0 and self.beta == 1.0

    def label(self, i: int) -> str:
        lab = self.labels[i] if self.labels else None
        return lab if lab is not None else str(i)

    def index(self, label: str) -> int:
        for i in range(self.n):
            if self.label(i) == label:
                return i
        raise KeyError(label)

    def banks_with_role(self, role: str) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r == role]

    # cached array views -------------------------------------------------
    @cached_property
    def e(self) -> np.ndarray:
        return np.asarray(self.externals, dtype=float)

    @cached_property
    def _debt_arrays(self):
        if not self.debts:
            z = np.zeros(0, dtype=int)
            return z, z, np.zeros(0)
        keys = sorted(self.debts)
        u = np.array([k[0] for k in keys], dtype=int)
        v = np.array([k[1] for k in keys], dtype=int)
        w = np.array([self.debts[k] for k in keys], dtype=float)
        return u, v, w

    @cached_property
    def _cds_arrays(self):
        if not self.cdss:
            z = np.zeros(0, dtype=int)
            return z, z, z, np.zeros(0)
        keys = sorted(self.cdss)
        u = np.array([k[0] for k in keys], dtype=int)
        v = np.array([k[1] for k in keys], dtype=int)
        w = np.array([k[2] for k in keys], dtype=int)
        d = np.array([self.cdss[k] for k in keys], dtype=float)
        return u, v, w, d

    @cached_property
    def _kernel(self):
        n = self.n
        du, dv, dw = self._debt_arrays
        cu, cv, cref, cd = self._cds_arrays
        debt_out = np.bincount(du, weights=dw, minlength=n) if len(du) else np.zeros(n)
        return {
            "debt_out": debt_out,
            "debt_in": _incidence(dv, n),
            "cds_out": _incidence(cu, n),
            "cds_in": _incidence(cv, n),
        }

    def max_weight(self) -> float:
        ws = list(self.debts.values()) + list(self.cdss.values())
        return max(ws) if ws else 0.0

    def min_weight(self) -> float:
        ws = list(self.debts.values()) + list(self.cdss.values())
        return min(ws) if ws else 0.0

    def digest(self) -> str:
        payload = json.dumps(
            {
                "e": list(self.externals),
                "d": sorted([list(k) + [w] for k, w in self.debts.items()]),
                "c": sorted([list(k) + [w] for k, w in self.cdss.items()]),
                "a": self.alpha,
                "b": self.beta,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def build_system(
    externals: Sequence[float],
    debts=(),
    cdss=(),
    alpha: float = 1.0,
    beta: float = 1.0,
    strict_sanity: bool = False,
    labels: Sequence[str | None] | None = None,
    roles: Sequence[str | None] | None = None,
) -> FinancialSystem:
    """Validate and freeze a financial system.

    ``debts`` is a mapping ``(debtor, creditor) -> weight`` or an iterable of
    triples; ``cdss`` a mapping ``(debtor, creditor, reference) -> weight`` or an
    iterable of 4-tuples.  Repeated contracts on the same key are summed.
    """
    ext = tuple(float(x) for x in externals)
    n = len(ext)
    for i, x in enumerate(ext):
        if not np.isfinite(x) or x < 0:
            raise ValidationError(f"bank {i}: external assets must be finite and >= 0, got {x}")
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ValidationError(f"alpha/beta must lie in [0, 1], got {alpha}, {beta}")

    dmap = _as_debt_map(debts)
    cmap = _as_cds_map(cdss)

    def _check_idx(*ids):
        for i in ids:
            if not 0 <= i < n:
                raise ValidationError(f"bank index {i} out of range [0, {n})")

    for (u, v), w in dmap.items():
        _check_idx(u, v)
        if u == v:
            raise SelfContract(f"debt {u}->{v} has debtor == creditor")
        if not w > 0:
            raise NonPositiveWeight(f"debt {u}->{v} has non-positive weight {w}")
    for (u, v, w), d in cmap.items():
        _check_idx(u, v, w)
        if u == v:
            raise SelfContract(f"CDS {u}->{v} ref {w} has debtor == creditor")
        if w in (u, v):
            raise SelfReference(f"CDS {u}->{v} ref {w} references one of its parties")
        if not d > 0:
            raise NonPositiveWeight(f"CDS {u}->{v} ref {w} has non-positive weight {d}")

    if strict_sanity:
        debtors = {u for (u, _v) in dmap}
        for (u, v, w) in sorted(cmap):
            if w not in debtors:
                raise SanityViolation(
                    f"CDS {u}->{v} ref {w}: reference bank has no outgoing debt"
                )

    labs = tuple(labels) if labels is not None else (None,) * n
    rols = tuple(roles) if roles is not None else (None,) * n
    if len(labs) != n or len(rols) != n:
        raise DimensionMismatch("labels/roles must have one entry per bank")
    for r in rols:
        if r is not None and r not in ROLES:
            raise ValidationError(f"unknown role {r!r}")
    return FinancialSystem(
        externals=ext,
        debts=MappingProxyType(dmap),
        cdss=MappingProxyType(cmap),
        alpha=float(alpha),
        beta=float(beta),
        labels=labs,
        roles=rols,
    )


# ---------------------------------------------------------------------------
# batched kernels


def _as_batch(system: FinancialSystem, r) -> np.ndarray:
    R = np.asarray(r, dtype=float)
    if R.ndim == 1:
        R = R[None, :]
    if R.ndim != 2 or R.shape[1] != system.n:
        raise DimensionMismatch(f"rate vector has shape {R.shape}, system has {system.n} banks")
    return R


def batch_terms(system: FinancialSystem, R: np.ndarray):
    """Return ``(total_liab, assets_lossless, assets_lossy)`` for each row of ``R``."""
    k = system._kernel
    cu, _cv, cref, cd = system._cds_arrays
    du, _dv, dw = system._debt_arrays
    B = R.shape[0]
    cds_l = cd[None, :] * (1.0 - R[:, cref]) if len(cd) else np.zeros((B, 0))
    total = k["debt_out"][None, :] + _scatter(k["cds_out"], cds_l)
    incoming = _scatter(k["debt_in"], R[:, du] * dw[None, :]) if len(dw) else np.zeros((B, system.n))
    if len(cd):
        incoming = incoming + _scatter(k["cds_in"], R[:, cu] * cds_l)
    e = system.e[None, :]
    return total, e + incoming, system.alpha * e + system.beta * incoming


def batch_update(system: FinancialSystem, R: np.ndarray, slack: float = SOLVENCY_SLACK) -> np.ndarray:
    total, a_full, a_loss = batch_terms(system, R)
    scale = np.maximum(1.0, total)
    solvent = a_full >= total - slack * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(total > 0, a_loss / np.where(total > 0, total, 1.0), 1.0)
    return np.where(solvent, 1.0, np.clip(ratio, 0.0, 1.0))


def batch_check(system: FinancialSystem, R: np.ndarray, tol: float = DEFAULT_TOL):
    """Per-bank clearing verdicts for each row; returns ``(ok_rows, bank_ok, violation)``."""
    total, a_full, a_loss = batch_terms(system, R)
    scale = np.maximum(1.0, total)
    surviving = R >= 1.0 - tol
    ok_surv = a_full >= total - tol * scale
    resid = np.abs(R * total - a_loss)
    ok_def = (resid <= tol * scale) & (a_full < total + tol * scale) & (total > tol)
    bank_ok = np.where(surviving, ok_surv, ok_def)
    violation = np.where(
        surviving,
        np.maximum(total - a_full, 0.0) / scale,
        np.where(total > tol, resid / scale, 1.0),
    )
    return bank_ok.all(axis=1), bank_ok, violation


# ---------------------------------------------------------------------------
# single-vector API


@dataclass(frozen=True, eq=False)
class ClearingState:
    system: FinancialSystem
    rates: np.ndarray
    total_liab: np.ndarray
    assets: np.ndarray
    equity: np.ndarray
    defaulting: np.ndarray

    @cached_property
    def liab(self) -> np.ndarray:
        """Dense pairwise liability matrix ``l[u, v]``."""
        n = self.system.n
        L = np.zeros((n, n))
        for (u, v), w in self.system.debts.items():
            L[u, v] += w
        for (u, v, w), d in self.system.cdss.items():
            L[u, v] += d * (1.0 - self.rates[w])
        return L

    @cached_property
    def pay(self) -> np.ndarray:
        return self.rates[:, None] * self.liab

    @property
    def paid(self) -> np.ndarray:
        """Total payments made by each bank, ``r_v * l_v``."""
        return self.rates * self.total_liab

    @property
    def unpaid(self) -> np.ndarray:
        return (1.0 - self.rates) * self.total_liab


def check_rates(system: FinancialSystem, r) -> np.ndarray:
    R = np.asarray(r, dtype=float)
    if R.shape != (system.n,):
        raise DimensionMismatch(f"rate vector has shape {R.shape}, system has {system.n} banks")
    if np.any(R < -1e-12) or np.any(R > 1 + 1e-12) or not np.all(np.isfinite(R)):
        raise ValidationError("recovery rates must lie in [0, 1]")
    return np.clip(R, 0.0, 1.0)


def evaluate_state(system: FinancialSystem, r) -> ClearingState:
    """Liabilities, assets and equities implied by the rate vector ``r``.

    Banks with ``r_v == 1`` use the lossless asset formula, all others the
    ``alpha``/``beta`` discounted one.
    """
    R = check_rates(system, r)
    total, a_full, a_loss = batch_terms(system, R[None, :])
    total, a_full, a_loss = total[0], a_full[0], a_loss[0]
    defaulting = R < 1.0
    assets = np.where(defaulting, a_loss, a_full)
    equity = np.maximum(assets - total, 0.0)
    return ClearingState(system, R, total, assets, equity, defaulting)


@dataclass(frozen=True)
class ClearingVerdict:
    ok: bool
    bank_ok: np.ndarray = field(repr=False)
    violation: np.ndarray = field(repr=False)
    first_violation: int | None = None

    @property
    def residual(self) -> float:
        return float(self.violation.max()) if self.violation.size else 0.0

    def __bool__(self) -> bool:
        return self.ok


def check_clearing(system: FinancialSystem, r, tol: float = DEFAULT_TOL) -> ClearingVerdict:
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    R = check_rates(system, r)
    ok, bank_ok, viol = batch_check(system, R[None, :], tol)
    bad = np.flatnonzero(~bank_ok[0])
    return ClearingVerdict(bool(ok[0]), bank_ok[0], viol[0], int(bad[0]) if len(bad) else None)


def update_step(system: FinancialSystem, r, slack: float = SOLVENCY_SLACK) -> np.ndarray:
    """One application of the clearing map: solvent banks go to 1, others to a_v/l_v."""
    R = check_rates(system, r)
    return batch_update(system, R[None, :], slack)[0]


def rates_from_mapping(system: FinancialSystem, rates: Mapping, default: float = 1.0) -> np.ndarray:
    """Build a full rate vector from ``{bank id or label: rate}``."""
    r = np.full(system.n, float(default))
    for key, val in rates.items():
        i = key if isinstance(key, int) else _resolve(system, key)
        r[i] = float(val)
    return check_rates(system, r)


def _resolve(system: FinancialSystem, key: str) -> int:
    try:
        return int(key)
    except ValueError:
        return system.index(key)


def total_externals(system: FinancialSystem, banks: Iterable[int] | None = None) -> float:
    if banks is None:
        return float(system.e.sum())
    return float(sum(system.externals[i] for i in banks))
