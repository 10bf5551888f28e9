"""Building blocks for constructed systems: branching gadgets, gates, cutoffs, penalties.

Everything is emitted through :class:`SystemBuilder`, which allocates banks and
contracts and keeps a log of the gadgets it created.  Sources are banks whose
endowment is fixed at :meth:`SystemBuilder.finalize` to the sum of their
outgoing notionals, so they never default; sinks have no liabilities.

Gates only read their inputs through the reference field of CDSs, so wiring a
gate never changes the input bank's own balance sheet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ArityError, BadParams, NonBinaryInput, RequiresLoss
from .model import FinancialSystem, build_system

DEFAULT_CAP = 4.0


@dataclass(frozen=True)
class NodeHandle:
    bank: int
    binary: bool = True

    def __index__(self) -> int:
        return self.bank


@dataclass
class GadgetRecord:
    kind: str
    banks: list[int]
    handles: list[int]
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "banks": self.banks, "handles": self.handles, "params": self.params}


class SystemBuilder:
    """Single-writer builder that emits a validated :class:`FinancialSystem`.

    ``shared=True`` routes every source/sink request to one global source and
    one global sink.  ``bounded=True`` splits every contract heavier than
    ``cap`` into lighter pieces on distinct sources/sinks as it is emitted.
    """

    def __init__(
        self,
        alpha: float = 1.0,
        beta: float = 1.0,
        shared: bool = False,
        bounded: bool = False,
        cap: float = DEFAULT_CAP,
        demorgan: bool = False,
    ):
        self.alpha = alpha
        self.demorgan = demorgan
        self.beta = beta
        self.shared = shared
        self.bounded = bounded
        self.cap = cap
        self.externals: list[float] = []
        self.labels: list[str] = []
        self.roles: list[str | None] = []
        self.debts: dict[tuple[int, int], float] = {}
        self.cdss: dict[tuple[int, int, int], float] = {}
        self.log: list[GadgetRecord] = []
        self.binary: set[int] = set()
        self._sources: set[int] = set()
        self._sinks: set[int] = set()
        self._shared_source: int | None = None
        self._shared_sink: int | None = None
        self._counter: dict[str, int] = {}
        self._const_one: NodeHandle | None = None

    # allocation ---------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.externals)

    def add_bank(self, prefix: str = "b", external: float = 0.0, role: str | None = "gadget") -> int:
        i = self._counter.get(prefix, 0)
        self._counter[prefix] = i + 1
        self.externals.append(float(external))
        self.labels.append(f"{prefix}{i}")
        self.roles.append(role)
        return self.n - 1

    def source(self, fresh: bool = False) -> int:
        if self.shared and not fresh:
            if self._shared_source is None:
                self._shared_source = self._new_source()
            return self._shared_source
        return self._new_source()

    def _new_source(self) -> int:
        s = self.add_bank("s", role="source")
        self._sources.add(s)
        return s

    def sink(self, fresh: bool = False) -> int:
        if self.shared and not fresh:
            if self._shared_sink is None:
                self._shared_sink = self._new_sink()
            return self._shared_sink
        return self._new_sink()

    def _new_sink(self) -> int:
        t = self.add_bank("t", role="sink")
        self._sinks.add(t)
        return t

    def is_source(self, b: int) -> bool:
        return b in self._sources

    def is_sink(self, b: int) -> bool:
        return b in self._sinks

    def record(self, kind: str, banks: Sequence[int], handles: Sequence[int], **params) -> None:
        self.log.append(GadgetRecord(kind, [int(b) for b in banks], [int(h) for h in handles], params))

    # contracts ------------------------------------------------------------
    def _pieces(self, w: float) -> list[float]:
        if not self.bounded or w <= self.cap:
            return [float(w)]
        if float(w).is_integer():
            return [1.0] * int(w)
        k = math.ceil(w / self.cap)
        return [w / k] * k

    def debt(self, u: int, v: int, w: float) -> None:
        pieces = self._pieces(w)
        if len(pieces) == 1:
            self._add_debt(u, v, w)
            return
        # a heavy debt becomes unit debts from u to fresh sinks plus unit
        # payments into v from fresh sources
        for p in pieces:
            if not self.is_sink(v):
                self._add_debt(self._new_source(), v, p)
            if not self.is_source(u):
                self._add_debt(u, self._new_sink(), p)

    def cds(self, u: int, v: int, ref: int, w: float) -> None:
        pieces = self._pieces(w)
        if len(pieces) == 1:
            self._add_cds(u, v, ref, w)
            return
        for p in pieces:
            if not self.is_sink(v):
                self._add_cds(self._new_source(), v, ref, p)
            if not self.is_source(u):
                self._add_cds(u, self._new_sink(), ref, p)

    def _add_debt(self, u: int, v: int, w: float) -> None:
        self.debts[(u, v)] = self.debts.get((u, v), 0.0) + float(w)

    def _add_cds(self, u: int, v: int, ref: int, w: float) -> None:
        self.cdss[(u, v, ref)] = self.cdss.get((u, v, ref), 0.0) + float(w)

    def income(self, v: int, ref: int, w: float) -> None:
        """CDS of weight ``w`` into ``v`` from a source, referencing ``ref``."""
        self.cds(self.source(), v, ref, w)

    def income_debt(self, v: int, w: float) -> None:
        self.debt(self.source(), v, w)

    def outflow(self, v: int, w: float) -> None:
        """Unconditional debt of weight ``w`` from ``v`` to a sink."""
        self.debt(v, self.sink(), w)

    def finalize(self, strict_sanity: bool = False) -> FinancialSystem:
        ext = list(self.externals)
        for s in self._sources:
            out = sum(w for (u, _v), w in self.debts.items() if u == s)
            out += sum(w for (u, _v, _r), w in self.cdss.items() if u == s)
            ext[s] = out
        return build_system(
            ext,
            dict(self.debts),
            dict(self.cdss),
            self.alpha,
            self.beta,
            strict_sanity=strict_sanity,
            labels=self.labels,
            roles=self.roles,
        )

    def max_weight(self) -> float:
        ws = list(self.debts.values()) + list(self.cdss.values())
        return max(ws) if ws else 0.0


def _need_binary(b: SystemBuilder, handles: Sequence[NodeHandle]) -> None:
    for h in handles:
        if not getattr(h, "binary", False) and int(h) not in b.binary:
            raise NonBinaryInput(f"bank {int(h)} is not a binary node")


def _binary(b: SystemBuilder, bank: int) -> NodeHandle:
    b.binary.add(bank)
    return NodeHandle(bank, True)


# ---------------------------------------------------------------------------
# branching gadgets


def add_branching(b: SystemBuilder, dx: float = 2.0, dy: float = 1.0) -> tuple[NodeHandle, NodeHandle]:
    """Two banks with unit debts whose incoming CDSs reference each other.

    With ``(dx, dy) = (2, 1)`` the only clearing states are ``(0, 1)`` and ``(1, 0)``.
    """
    if not dx >= dy >= 1:
        raise BadParams(f"branching needs dx >= dy >= 1, got ({dx}, {dy})")
    x = b.add_bank("x")
    y = b.add_bank("y")
    b.outflow(x, 1.0)
    b.outflow(y, 1.0)
    b.income(x, y, dx)
    b.income(y, x, dy)
    # dy = 1 < dx rules out the interior solution, leaving (0, 1) and (1, 0)
    clean = dy == 1 and dx > 1
    b.record("branching", [x, y], [x, y], dx=dx, dy=dy)
    if clean:
        return _binary(b, x), _binary(b, y)
    return NodeHandle(x, False), NodeHandle(y, False)


def add_lossy_binary_pair(b: SystemBuilder) -> tuple[NodeHandle, NodeHandle]:
    """Two banks owing each other 1 with no assets; binary when ``beta < 1``."""
    if b.beta >= 1.0:
        raise RequiresLoss("the binary pair needs beta < 1")
    v0 = b.add_bank("p")
    v1 = b.add_bank("p")
    b.debt(v0, v1, 1.0)
    b.debt(v1, v0, 1.0)
    b.record("lossy_pair", [v0, v1], [v0, v1])
    return _binary(b, v0), _binary(b, v1)


# ---------------------------------------------------------------------------
# gates


def add_not(b: SystemBuilder, v: NodeHandle) -> NodeHandle:
    _need_binary(b, [v])
    w = b.add_bank("n")
    b.income(w, int(v), 1.0)
    b.outflow(w, 1.0)
    b.record("NOT", [w], [w], input=int(v))
    return _binary(b, w)


def const_one(b: SystemBuilder) -> NodeHandle:
    if b._const_one is None:
        c = b.add_bank("one", external=1.0)
        b.outflow(c, 1.0)
        b.record("ONE", [c], [c])
        b._const_one = _binary(b, c)
    return b._const_one


def add_or(b: SystemBuilder, inputs: Sequence[NodeHandle]) -> NodeHandle:
    _need_binary(b, inputs)
    negs = [add_not(b, v) for v in inputs]
    w = b.add_bank("or")
    for nv in negs:
        b.income(w, int(nv), 1.0)
    b.outflow(w, 1.0)
    b.record("OR", [w] + [int(x) for x in negs], [w], inputs=[int(v) for v in inputs])
    return _binary(b, w)


def add_nand(b: SystemBuilder, inputs: Sequence[NodeHandle]) -> NodeHandle:
    """1 unless every input is 1; a unit CDS per input, debt 1."""
    _need_binary(b, inputs)
    w = b.add_bank("nand")
    for v in inputs:
        b.income(w, int(v), 1.0)
    b.outflow(w, 1.0)
    b.record("NAND", [w], [w], inputs=[int(v) for v in inputs])
    return _binary(b, w)


def add_and(b: SystemBuilder, inputs: Sequence[NodeHandle], demorgan: bool | None = None) -> NodeHandle:
    """AND of binary inputs.

    By default one unit per true input is collected on a node with debt ``k``
    and thresholded with a cutoff.  Bounded builders, builders created with
    ``demorgan=True`` and calls with ``demorgan=True`` use NOT of NAND instead.
    """
    _need_binary(b, inputs)
    if len(inputs) == 0:
        return const_one(b)
    if len(inputs) == 1:
        return inputs[0]
    if demorgan is None:
        demorgan = b.bounded or b.demorgan
    if demorgan:
        return add_not(b, add_nand(b, inputs))
    k = len(inputs)
    negs = [add_not(b, v) for v in inputs]
    w0 = b.add_bank("and")
    for nv in negs:
        b.income(w0, int(nv), 1.0)
    b.outflow(w0, float(k))
    if k == 2:
        eta = (0.7, 0.9)
    else:
        eta = (1 - 3 / (4 * k), 1 - 1 / (4 * k))
    out = add_cutoff(b, NodeHandle(w0, False), *eta)
    b.record("AND", [w0] + [int(x) for x in negs], [int(out)], inputs=[int(v) for v in inputs])
    return out


def add_gate(b: SystemBuilder, kind: str, inputs: Sequence[NodeHandle]) -> NodeHandle:
    kind = kind.upper()
    if kind == "NOT":
        if len(inputs) != 1:
            raise ArityError("NOT takes exactly one input")
        return add_not(b, inputs[0])
    if kind not in ("OR", "AND"):
        raise ArityError(f"unknown gate {kind}")
    if len(inputs) < 2:
        raise ArityError(f"{kind} takes at least two inputs")
    return add_or(b, inputs) if kind == "OR" else add_and(b, inputs)


# ---------------------------------------------------------------------------
# cutoffs


def cutoff_gains(eta1: float, eta2: float) -> tuple[float, float]:
    """Gains of the two negation stages of the generic cutoff.

    The first stage saturates at 1 as soon as the input is at most
    ``mid = eta1 + (eta2 - eta1) / 4``; for inputs of at least ``eta2`` it stays
    at or below ``c < 1`` and the second stage lifts anything at most ``c``
    back to 1 with 25% headroom.
    """
    mid = eta1 + (eta2 - eta1) / 4
    g1 = 1.0 / (1.0 - mid)
    c = (1.0 - eta2) / (1.0 - mid)
    g2 = 1.25 / (1.0 - c)
    return g1, g2


def add_cutoff(b: SystemBuilder, v: NodeHandle, eta1: float, eta2: float) -> NodeHandle:
    """Binary output: 0 when ``r_v <= eta1`` and 1 when ``r_v >= eta2``."""
    if not 0 < eta1 < eta2 < 1:
        raise BadParams(f"cutoff needs 0 < eta1 < eta2 < 1, got ({eta1}, {eta2})")
    g1, g2 = cutoff_gains(eta1, eta2)
    a = b.add_bank("c")
    b.income(a, int(v), g1)
    b.outflow(a, 1.0)
    w = b.add_bank("c")
    b.income(w, a, g2)
    b.outflow(w, 1.0)
    b.record("cutoff", [a, w], [w], eta1=eta1, eta2=eta2, gains=[g1, g2])
    return _binary(b, w)


def add_const_cutoff_k(b: SystemBuilder, v: NodeHandle, k: int) -> NodeHandle:
    """Unit-weight threshold: output 1 iff ``r_v == 1`` given ``k`` unit debts on ``v``.

    Installs the ``k`` unit debts from ``v`` to distinct sinks.  The indicator
    ``u`` collects ``k`` unit CDSs referencing ``v``; it is solvent as soon as
    ``r_v <= (k-1)/k`` and in full default when ``r_v = 1``.
    """
    if not isinstance(k, int) or k < 1:
        raise BadParams(f"k must be a positive integer, got {k}")
    for _ in range(k):
        b.debt(int(v), b.sink(fresh=True), 1.0)
    u = b.add_bank("k")
    for _ in range(k):
        b.cds(b.source(fresh=True), u, int(v), 1.0)
    b.outflow(u, 1.0)
    b.binary.add(u)
    out = add_not(b, NodeHandle(u, True))
    b.record("const_cutoff", [u], [int(out)], k=k)
    return out


# ---------------------------------------------------------------------------
# lossy penalties


@dataclass(frozen=True)
class PenaltyHandles:
    t0: int
    u: int
    t1: int
    b: float


def add_unhappy_penalty(b: SystemBuilder, v: int, v0: NodeHandle, h: float, alpha: float | None = None) -> PenaltyHandles:
    """Penalise ``v`` by ``h`` whenever ``v0`` defaults, without helping anyone else.

    ``t1`` collects exactly ``bb = (h + 5) / (1 - alpha)`` when ``v0`` survives
    and strictly less otherwise.
    """
    alpha = b.alpha if alpha is None else alpha
    if alpha >= 1.0:
        raise RequiresLoss("the unhappy penalty needs alpha < 1")
    _need_binary(b, [v0])
    bb = (h + 5.0) / (1.0 - alpha)
    t0 = b.add_bank("pt", external=1.0)
    u = b.add_bank("pu", external=bb + 1.0)
    t1 = b.sink(fresh=True)
    b.cds(int(v), t0, int(v0), h)
    b.debt(u, t0, bb)
    b.cds(u, t1, int(v0), 2.0)
    b.debt(t0, t1, bb)
    b.record("unhappy_penalty", [t0, u, t1], [t1], target=int(v), trigger=int(v0), h=h, b=bb)
    return PenaltyHandles(t0, u, t1, bb)


# ---------------------------------------------------------------------------
# modified branching


@dataclass(frozen=True)
class ModifiedBranching:
    x: NodeHandle
    y: NodeHandle
    core: tuple[int, int]
    trigger: NodeHandle


def add_modified_branching(b: SystemBuilder) -> ModifiedBranching:
    """Branching behaviour without a red cycle in the dependency graph.

    A pair ``v0, v0'`` with mutual unit debts carries a shared rate ``rho``.
    Guard cutoffs expose ``rho`` in the middle band through ``trigger`` (the
    caller penalises it); outside ``[1/3, 2/3]`` the outputs are ``(1, 0)``
    for small ``rho`` and ``(0, 1)`` for large ``rho``.
    """
    v0 = b.add_bank("m")
    v1 = b.add_bank("m")
    b.debt(v0, v1, 1.0)
    b.debt(v1, v0, 1.0)
    core = NodeHandle(v0, False)
    w1 = add_cutoff(b, core, 1 / 6, 1 / 3)
    w2 = add_cutoff(b, core, 2 / 3, 5 / 6)
    trigger = add_and(b, [w1, add_not(b, w2)])
    x = add_not(b, add_cutoff(b, core, 1 / 3, 1 / 2))
    y = add_cutoff(b, core, 1 / 2, 2 / 3)
    b.record("modified_branching", [v0, v1], [int(x), int(y), int(trigger)])
    return ModifiedBranching(x, y, (v0, v1), trigger)
