"""Compiling graphs into financial systems whose solutions encode node sets.

Every graph node ``z`` gets a branching gadget with handles ``x_z`` (``z`` is
chosen) and ``y_z`` (``z`` is not chosen).  Gates turn the chosen set into a
constraint indicator ``v_C`` and the objective wiring reads ``v_C`` and the
handles.  Cubic replication counts are replaced by a multiplier ``m`` and
infinite weights by a finite penalty ``M``.

The module also carries the exhaustive graph oracles and the small showcase
systems with hand-picked solution spaces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadK,
    BadMultiplier,
    BadParams,
    DuplicateEdge,
    MissingDesignation,
    ParseError,
    RequiresLoss,
    SelfLoop,
    TooLarge,
    UnsplittableContract,
)
from .gadgets import (
    NodeHandle,
    SystemBuilder,
    add_and,
    add_branching,
    add_const_cutoff_k,
    add_cutoff,
    add_lossy_binary_pair,
    add_modified_branching,
    add_not,
    add_or,
    add_unhappy_penalty,
)
from .model import DEFAULT_TOL, FinancialSystem
from .objectives import OBJECTIVES, ObjectiveValue, canonical_objective, evaluate_objective
from .solver import Driver, SolutionSet

ORACLE_LIMIT = 24


# ---------------------------------------------------------------------------
# graphs and oracles


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        seen = set()
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"edge ({u}, {v}) out of range for {n} nodes")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise DuplicateEdge(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, frozenset(seen))

    def neighbors(self, z: int) -> list[int]:
        return sorted({v for u, v in self.edges if u == z} | {u for u, v in self.edges if v == z})

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_independent(self, nodes) -> bool:
        s = set(nodes)
        return not any(u in s and v in s for u, v in self.edges)

    def is_dominating(self, nodes) -> bool:
        s = set(nodes)
        return all(z in s or any(w in s for w in self.neighbors(z)) for z in range(self.n))

    def to_text(self) -> str:
        lines = [f"{self.n} {len(self.edges)}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.sorted_edges()]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse ``N M`` followed by ``M`` 1-indexed pairs, or DIMACS ``p edge`` format."""
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "#", "%")):
            continue
        rows.append(line.split())
    if not rows:
        raise ParseError("empty graph description")
    try:
        if rows[0][0] == "p":
            if len(rows[0]) != 4:
                raise ParseError("malformed DIMACS problem line")
            n, m = int(rows[0][2]), int(rows[0][3])
            pairs = []
            for r in rows[1:]:
                if r[0] != "e" or len(r) != 3:
                    raise ParseError(f"malformed DIMACS edge line {' '.join(r)!r}")
                pairs.append((int(r[1]), int(r[2])))
        else:
            if len(rows[0]) != 2:
                raise ParseError("header must be 'N M'")
            n, m = int(rows[0][0]), int(rows[0][1])
            pairs = []
            for r in rows[1:]:
                if len(r) != 2:
                    raise ParseError(f"edge line must hold two node ids, got {' '.join(r)!r}")
                pairs.append((int(r[0]), int(r[1])))
    except ValueError as exc:
        raise ParseError(f"non-integer token: {exc}") from None
    if n < 0 or m < 0:
        raise ParseError("negative counts in header")
    if len(pairs) != m:
        raise ParseError(f"header announces {m} edges, found {len(pairs)}")
    for u, v in pairs:
        if u == v:
            raise SelfLoop(f"self-loop on node {u}")
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"edge ({u}, {v}) out of range 1..{n}")
    return Graph.from_edges(n, [(u - 1, v - 1) for u, v in pairs])


@dataclass(frozen=True)
class OracleResult:
    value: int
    witness: frozenset[int]


def _subset_masks(G: Graph):
    n = G.n
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(len(masks), dtype=bool)
    for u, v in G.edges:
        ok &= ((masks >> u) & (masks >> v) & 1) == 0
    sizes = np.zeros(len(masks), dtype=np.int64)
    for z in range(n):
        sizes += (masks >> z) & 1
    return masks, ok, sizes


def graph_oracle(G: Graph, problem: str) -> OracleResult:
    """Exact MaxIS or MinIDS by enumerating all node subsets."""
    if G.n > ORACLE_LIMIT:
        raise TooLarge(f"oracle limited to {ORACLE_LIMIT} nodes, got {G.n}")
    masks, indep, sizes = _subset_masks(G)
    key = problem.replace("-", "").lower()
    if key == "maxis":
        feasible = indep
        best = int(sizes[feasible].max())
    elif key == "minids":
        closed = [(1 << z) | sum(1 << w for w in G.neighbors(z)) for z in range(G.n)]
        dom = np.ones(len(masks), dtype=bool)
        for c in closed:
            dom &= (masks & c) != 0
        feasible = indep & dom
        best = int(sizes[feasible].min())
    else:
        raise BadParams(f"unknown graph problem {problem!r}")
    pick = masks[feasible & (sizes == best)][0]
    witness = frozenset(z for z in range(G.n) if (int(pick) >> z) & 1)
    return OracleResult(best, witness)


# ---------------------------------------------------------------------------
# compiled reductions


@dataclass
class CompiledReduction:
    system: FinancialSystem
    objective: str
    drivers: list[Driver]
    graph: Graph | None = None
    graph_drivers: list[int] = field(default_factory=list)
    xs: list[int] = field(default_factory=list)
    ys: list[int] = field(default_factory=list)
    v_c: int | None = None
    nodes: dict[str, int] = field(default_factory=dict)
    block: list[int] | None = None
    partition: tuple[list[int], list[int]] | None = None
    m: int = 1
    M: float | None = None
    bounded: bool = False
    log: list[dict] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    recipe: tuple[Callable, tuple, dict] | None = field(default=None, repr=False)

    @property
    def c(self) -> float:
        return self.system.max_weight()

    def decode(self, label: str) -> frozenset[int]:
        return frozenset(
            z for z, d in enumerate(self.graph_drivers) if label[d] == "1"
        )

    def encode(self, nodes) -> str:
        """Label over all drivers; non-graph drivers are written as ``*``."""
        chars = ["*"] * len(self.drivers)
        for z, d in enumerate(self.graph_drivers):
            chars[d] = "1" if z in nodes else "0"
        return "".join(chars)

    def constraint_ok(self, r) -> bool:
        if self.v_c is None:
            raise MissingDesignation("no constraint indicator in this construction")
        return bool(r[self.v_c] > 0.5)

    def evaluate(self, r, solutions=None, tol: float = DEFAULT_TOL, verify: bool = True) -> ObjectiveValue:
        kind = self.objective
        if kind not in OBJECTIVES:
            raise MissingDesignation(f"construction {kind!r} has no scalar objective")
        if solutions is not None and not isinstance(solutions, list):
            solutions = list(solutions)
        return evaluate_objective(
            self.system,
            r,
            kind,
            node=self.nodes.get("v"),
            pair=(self.nodes["v1"], self.nodes["v2"]) if "v1" in self.nodes else None,
            partition=self.partition,
            block=self.block,
            solutions=solutions,
            tol=tol,
            verify=verify,
        )

    def manifest(self) -> dict:
        return {
            "objectiveKind": self.objective,
            "m": self.m,
            "M": self.M,
            "bounded": self.bounded,
            "c": self.c,
            "nodes": dict(sorted(self.nodes.items())),
            "constraintIndicator": self.v_c,
            "block": self.block,
            "partition": [list(p) for p in self.partition] if self.partition else None,
            "graph": {"n": self.graph.n, "edges": [list(e) for e in self.graph.sorted_edges()]}
            if self.graph
            else None,
            "graphDrivers": self.graph_drivers,
            "drivers": [
                {
                    "name": d.name,
                    "members": list(d.members),
                    "states": [list(s) if s is not None else None for s in d.states],
                    "gate": [d.gate[0], list(d.gate[1])] if d.gate else None,
                }
                for d in self.drivers
            ],
            "decode": {"1": "node chosen", "0": "node not chosen"},
            "params": self.params,
            "gadgets": self.log,
        }


@dataclass
class _Base:
    b: SystemBuilder
    xs: list[NodeHandle]
    ys: list[NodeHandle]
    drivers: list[Driver]
    graph_drivers: list[int]
    v_c: NodeHandle


_CLEAN_STATES = ((0.0, 1.0), (1.0, 0.0))
_PAIR_STATES = ((1.0, 1.0), (0.0, 0.0))


def _build_base(
    b: SystemBuilder,
    G: Graph,
    dominating: bool,
    modified: bool = False,
    gate: tuple[int, tuple[int, ...]] | None = None,
) -> _Base:
    xs, ys, drivers, graph_drivers = [], [], [], []
    extra: list[NodeHandle] = []
    offset = len(b.log)
    for z in range(G.n):
        if modified:
            mb = add_modified_branching(b)
            x, y = mb.x, mb.y
            extra.append(add_not(b, mb.trigger))
            drivers.append(Driver(f"z{z}", mb.core, _PAIR_STATES, gate))
        else:
            x, y = add_branching(b, 2.0, 1.0)
            drivers.append(Driver(f"z{z}", (int(x), int(y)), _CLEAN_STATES, gate))
        xs.append(x)
        ys.append(y)
        graph_drivers.append(z)
    constraints: list[NodeHandle] = list(extra)
    for u, v in G.sorted_edges():
        constraints.append(add_not(b, add_and(b, [xs[u], xs[v]])))
    if dominating:
        for z in range(G.n):
            closed = [xs[z]] + [xs[w] for w in G.neighbors(z)]
            constraints.append(closed[0] if len(closed) == 1 else add_or(b, closed))
    v_c = add_and(b, constraints)
    b.record("constraint", [int(v_c)], [int(v_c)], first_gadget=offset)
    return _Base(b, xs, ys, drivers, graph_drivers, v_c)


def _check_graph_args(G: Graph, m: int) -> None:
    if G.n < 1:
        raise BadParams("the graph needs at least one node")
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise BadMultiplier(f"multiplier must be a positive integer, got {m}")


def _finish(
    b: SystemBuilder,
    base: _Base,
    objective: str,
    G: Graph,
    recipe,
    offset: int = 0,
    **kw,
) -> CompiledReduction:
    system = b.finalize()
    return CompiledReduction(
        system=system,
        objective=objective,
        drivers=base.drivers if "drivers" not in kw else kw.pop("drivers"),
        graph=G,
        graph_drivers=[d + offset for d in base.graph_drivers],
        xs=[int(x) for x in base.xs],
        ys=[int(y) for y in base.ys],
        v_c=int(base.v_c),
        bounded=b.bounded,
        log=[g.as_dict() for g in b.log],
        recipe=recipe,
        **kw,
    )


def compile_objective(
    G: Graph,
    objective: str,
    m: int = 1,
    bounded: bool = False,
    modified: bool = False,
    alpha: float = 1.0,
    beta: float = 1.0,
    h: float = 1.0,
) -> CompiledReduction:
    """Compile ``G`` into a system whose optimum under ``objective`` encodes MaxIS or MinIDS."""
    kind = canonical_objective(objective)
    _check_graph_args(G, m)
    recipe = (compile_objective, (G, kind), dict(m=m, modified=modified, alpha=alpha, beta=beta, h=h))
    lossy = alpha < 1 or beta < 1
    b = SystemBuilder(alpha, beta, bounded=bounded, demorgan=lossy and kind == "AllianceBalance")
    N = G.n
    # maximisation objectives encode MaxIS, minimisation ones MinIDS
    base = _build_base(b, G, dominating=OBJECTIVES[kind] == "minimize", modified=modified)
    xs, ys, v_c = base.xs, base.ys, base.v_c
    nodes: dict[str, int] = {}
    block: list[int] | None = None
    partition = None
    M: float | None = None

    if kind == "MaxEquity":
        v = b.add_bank("v", role="objective")
        for y in ys:
            b.income(v, int(y), 1.0)
        M = float(N + 1)
        b.cds(v, b.sink(), int(v_c), M)
        nodes["v"] = v
    elif kind == "MinEquity":
        v = b.add_bank("v", role="objective")
        for y in ys:
            b.income(v, int(y), 1.0)
        M = float(N + 1)
        b.income(v, int(v_c), M)
        nodes["v"] = v
    elif kind in ("MinDefault", "MinUnpaid", "MinLeastPrefer", "MaxSurviving", "MaxPrefer"):
        block = []
        for z in range(N):
            pick = ys[z] if kind in ("MinDefault", "MinUnpaid", "MinLeastPrefer") else xs[z]
            vz = add_and(b, [v_c, pick])
            for _ in range(m):
                u = b.add_bank("u", external=1.0, role="objective")
                b.cds(u, b.sink(), int(vz), 2.0)
                block.append(u)
    elif kind == "MaxPaid":
        block = []
        not_c = add_not(b, v_c)
        for z in range(N):
            vz = add_or(b, [ys[z], not_c])
            for _ in range(m):
                u = b.add_bank("u", external=1.0, role="objective")
                b.cds(u, b.sink(), int(vz), 1.0)
                block.append(u)
    elif kind in ("MinPropUnpaid", "MaxPropPaid"):
        block = []
        not_c = add_not(b, v_c)
        e_u = 2.0 if kind == "MinPropUnpaid" else 0.0
        for z in range(N):
            vz = add_or(b, [not_c, xs[z]])
            vz2 = add_or(b, [not_c, ys[z]])
            for _ in range(m):
                u = b.add_bank("u", external=e_u, role="objective")
                b.cds(u, b.sink(), int(vz), 2.0)
                u2 = b.add_bank("u", external=1.0, role="objective")
                b.cds(u2, b.sink(), int(vz2), 2.0)
                block += [u, u2]
        for _ in range(m * N):
            p = b.add_bank("pen", role="objective")
            b.cds(p, b.sink(), int(v_c), 1.0)
            block.append(p)
    elif kind in ("MinDiffEq", "AllianceBalance"):
        v1 = b.add_bank("v", external=2.0 * N, role="objective")
        v2 = b.add_bank("v", external=2.0 * N, role="objective")
        for y in ys:
            b.cds(v1, v2, int(y), 1.0)
        M = float(N)
        b.cds(v1, v2, int(v_c), M)
        nodes.update(v1=v1, v2=v2)
        if kind == "AllianceBalance":
            s = b.add_bank("as", external=h, role="objective")
            t = b.add_bank("at", external=h, role="objective")
            nodes.update(s=s, t=t)
            system = b.finalize()
            others = [i for i in range(system.n) if i not in (v1, v2, s, t)]
            b.externals[t] = h + float(sum(system.externals[i] for i in others))
            partition = (others + [v1, s], [v2, t])
    else:  # pragma: no cover - canonical_objective guards this
        raise MissingDesignation(kind)

    return _finish(
        b, base, kind, G, recipe, nodes=nodes, block=block, partition=partition, m=m, M=M,
        params={"alpha": alpha, "beta": beta, "modified": modified, "h": h},
    )


def compile_decision(
    G: Graph,
    k: int,
    bounded: bool = False,
    modified: bool = False,
    alpha: float = 1.0,
    beta: float = 1.0,
    builder: SystemBuilder | None = None,
    gate=None,
    _finish_build: bool = True,
):
    """``v_D`` is 1 in some solution iff ``G`` has an independent set of size >= ``k``."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= G.n:
        raise BadK(f"k must lie in [1, {G.n}], got {k}")
    b = builder or SystemBuilder(alpha, beta, bounded=bounded)
    base = _build_base(b, G, dominating=False, modified=modified, gate=gate)
    v = b.add_bank("v", role="objective")
    for y in base.ys:
        b.income(v, int(y), 1.0)
    vh = NodeHandle(v, False)
    if b.bounded:
        cut = add_const_cutoff_k(b, vh, int(k))
    else:
        b.outflow(v, float(k))
        lo = (k - 1) / k
        cut = add_cutoff(b, vh, lo + 1 / (3 * k), lo + 2 / (3 * k))
    v_d = add_and(b, [cut, base.v_c])
    if not _finish_build:
        return base, v, v_d
    recipe = (compile_decision, (G, k), dict(modified=modified, alpha=alpha, beta=beta))
    return _finish(b, base, "Decision", G, recipe, nodes={"v": v, "vD": int(v_d)}, params={"k": k})


def compile_representative(
    G: Graph,
    k: int,
    m_g: int = 2,
    m_c: int = 8,
    bounded: bool = False,
) -> tuple[CompiledReduction, np.ndarray, np.ndarray]:
    """Decision system plus a generating group and a control group.

    Returns the compiled system, the empty-set solution ``r`` (controls at 1)
    and a one-node solution ``r2`` (controls at 0).
    """
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise BadK(f"the representative construction needs k >= 2, got {k}")
    for name, val in (("m_g", m_g), ("m_c", m_c)):
        if not isinstance(val, (int, np.integer)) or val < 1:
            raise BadMultiplier(f"{name} must be a positive integer, got {val}")
    b = SystemBuilder(bounded=bounded)
    base, v, v_d = compile_decision(G, k, builder=b, _finish_build=False)
    not_d = add_not(b, v_d)
    s_g = b.add_bank("sg")
    drivers = list(base.drivers)
    gen = []
    for i in range(m_g):
        x = b.add_bank("gx")
        y = b.add_bank("gy")
        b.outflow(x, 1.0)
        b.outflow(y, 1.0)
        b.cds(s_g, x, y, 2.0)
        b.cds(s_g, y, x, 1.0)
        gen.append((x, y))
        drivers.append(Driver(f"g{i}", (x, y), ((1.0, 0.0), (0.0, 1.0), (0.0, 0.0))))
    b.income(s_g, int(not_d), 3.0 * m_g)
    s_c = b.add_bank("sc")
    controls = []
    for _ in range(m_c):
        c = b.add_bank("ctl")
        b.debt(s_c, c, 1.0)
        b.outflow(c, 1.0)
        controls.append(c)
    b.income(s_c, int(not_d), float(m_c))
    v_empty = add_not(b, add_and(b, list(base.ys)))
    b.income(s_c, int(v_empty), float(m_c))
    recipe = (compile_representative, (G, k), dict(m_g=m_g, m_c=m_c))
    compiled = _finish(
        b, base, "Representative", G, recipe, drivers=drivers, m=m_c,
        nodes={"v": v, "vD": int(v_d), "sg": s_g, "sc": s_c, "vEmpty": int(v_empty)},
        block=controls, params={"k": k, "m_g": m_g, "m_c": m_c, "generating": gen},
    )
    from .solver import propagate

    def fix(nodes):
        label = compiled.encode(nodes)
        label = label.replace("*", "2")
        R0 = np.ones((1, compiled.system.n))
        fixed = np.zeros_like(R0, dtype=bool)
        for d, ch in zip(drivers, label):
            R0[0, list(d.members)] = d.states[int(ch)]
            fixed[0, list(d.members)] = True
        R, _ok = propagate(compiled.system, R0, fixed)
        return R[0]

    return compiled, fix(frozenset()), fix(frozenset({0}))


def compile_pareto_suboptimal(
    G: Graph,
    k: int,
    alpha: float = 0.5,
    beta: float = 0.5,
) -> tuple[CompiledReduction, np.ndarray]:
    """Lossy system with a designated solution ``r`` that is Pareto-dominated iff
    ``G`` has an independent set of size at least ``k``.

    A lossy binary pair ``v0`` drives everything: when ``v0`` defaults, unhappy
    penalties push every decision-system bank into default, giving the single
    solution ``r``.  When ``v0`` survives the decision system runs normally and
    the penalty members are strictly better off.  A payer ``s0`` owes ``w`` two
    unit CDSs referencing ``v0`` and a guard ``g``; ``g`` is solvent in ``r`` and
    in full default exactly when ``v0`` survives and ``v_D = 1``, so ``w`` keeps
    its equity of 1 only in those solutions.
    """
    if alpha >= 1.0 or beta >= 1.0:
        raise RequiresLoss("the construction needs alpha < 1 and beta < 1")
    b = SystemBuilder(alpha, beta)
    v0, v0b = add_lossy_binary_pair(b)
    pair = Driver("pair", (int(v0), int(v0b)), ((0.0, 0.0), (1.0, 1.0)))
    first = b.n
    base, v, v_d = compile_decision(G, k, builder=b, gate=(0, (1,)), _finish_build=False)
    base_nodes = list(range(first, b.n))

    g = b.add_bank("g")
    b.cds(b.source(), g, int(v0), 1.0)
    b.cds(b.source(), g, int(v_d), 1.0)
    tg1 = b.sink()
    tg2 = b.sink()
    b.debt(g, tg1, 1.0)
    b.cds(g, tg2, int(v_d), 1.0)
    penalised = base_nodes + [tg1, tg2]

    s0 = b.add_bank("s0", external=2.0, role="objective")
    w = b.add_bank("w", role="objective")
    b.cds(s0, w, int(v0), 1.0)
    b.cds(s0, w, g, 1.0)

    # every penalised bank must be unable to cover the penalty on its own
    incoming = np.zeros(b.n)
    outgoing = np.zeros(b.n)
    for (u, x), wt in b.debts.items():
        incoming[x] += wt
        outgoing[u] += wt
    for (u, x, _r), wt in b.cdss.items():
        incoming[x] += wt
        outgoing[u] += wt
    H = max(
        (outgoing[i] if b.is_source(i) else b.externals[i] + incoming[i]) for i in penalised
    )
    h = float(np.ceil(H)) + 1.0
    for i in penalised:
        add_unhappy_penalty(b, i, v0, h)

    drivers = [pair] + list(base.drivers)
    recipe = (compile_pareto_suboptimal, (G, k), dict(alpha=alpha, beta=beta))
    compiled = _finish(
        b, base, "ParetoSuboptimal", G, recipe, offset=1, drivers=drivers,
        nodes={"v": v, "vD": int(v_d), "v0": int(v0), "g": g, "s0": s0, "w": w},
        params={"k": k, "h": h, "penalised": len(penalised)},
    )
    from .solver import propagate

    R0 = np.ones((1, compiled.system.n))
    fixed = np.zeros_like(R0, dtype=bool)
    R0[0, [int(v0), int(v0b)]] = 0.0
    fixed[0, [int(v0), int(v0b)]] = True
    R, _ok = propagate(compiled.system, R0, fixed)
    return compiled, R[0]


# ---------------------------------------------------------------------------
# showcases


def build_showcase(kind: str, g: int = 1, h: float | None = None, sizes: tuple[int, int] | None = None):
    """Small systems with a known solution-space shape.

    ``InfiniteSolutions``: a lossless branching gadget with unit weights.
    ``ExponentialSolutions``: ``g`` independent clean gadgets.
    ``FourOptima``: two clean gadgets whose four combinations are each optimal
    for a different objective.
    """
    key = kind.replace("-", "").replace("_", "").lower()
    if key == "infinitesolutions":
        b = SystemBuilder()
        x, y = add_branching(b, 1.0, 1.0)
        return CompiledReduction(b.finalize(), "InfiniteSolutions", [], nodes={"x": int(x), "y": int(y)},
                                 log=[r.as_dict() for r in b.log])
    if key == "exponentialsolutions":
        if g < 1:
            raise BadParams("need at least one gadget")
        b = SystemBuilder()
        drivers = []
        for i in range(g):
            x, y = add_branching(b)
            drivers.append(Driver(f"g{i}", (int(x), int(y)), _CLEAN_STATES))
        return CompiledReduction(b.finalize(), "ExponentialSolutions", drivers,
                                 log=[r.as_dict() for r in b.log])
    if key == "fouroptima":
        return _four_optima(h, sizes)
    raise BadParams(f"unknown showcase {kind!r}")


def _four_optima(h: float | None, sizes: tuple[int, int] | None) -> CompiledReduction:
    b = SystemBuilder()
    x1, y1 = add_branching(b)
    x2, y2 = add_branching(b)
    drivers = [
        Driver("g0", (int(x1), int(y1)), _CLEAN_STATES),
        Driver("g1", (int(x2), int(y2)), _CLEAN_STATES),
    ]
    u = [
        add_and(b, [x1, x2]),
        add_and(b, [x1, y2]),
        add_and(b, [y1, x2]),
        add_and(b, [y1, y2]),
    ]
    not_u2 = add_not(b, u[1])
    not_u4 = add_not(b, u[3])
    t = b.sink()
    w3 = b.add_bank("w3")
    w4 = b.add_bank("w4")
    s3 = b.source()
    s4 = b.source()
    gate_banks = b.n
    if sizes is None:
        n1 = gate_banks + 1
        sizes = (n1, 2 * (gate_banks + n1) + 1)
    n1, n2 = sizes
    if n1 < 1 or n2 < 1:
        raise BadParams("replication sizes must be positive")
    W1, W2 = [], []
    for _ in range(n1):
        w = b.add_bank("W1_")
        b.cds(w, t, int(u[0]), 1.0)
        W1.append(w)
    # one common payer for W2; dedicated payers would each prefer the
    # solutions in which they pay nothing
    s2 = b.source()
    for _ in range(n2):
        w = b.add_bank("W2_")
        b.cds(s2, w, int(not_u2), 1.0)
        W2.append(w)
    if h is None:
        h = 10.0 * b.n
    if h <= b.n:
        raise BadParams(f"h must exceed the system size {b.n}")
    b.cds(w3, t, int(u[2]), h**2)
    b.cds(s3, t, int(u[2]), h**2)
    b.cds(w4, t, int(u[3]), h)
    b.cds(s4, t, int(not_u4), h**3)
    labels = {"00": 3, "01": 2, "10": 1, "11": 0}
    return CompiledReduction(
        b.finalize(), "FourOptima", drivers,
        nodes={"u1": int(u[0]), "u2": int(u[1]), "u3": int(u[2]), "u4": int(u[3]), "w3": w3, "w4": w4},
        log=[r.as_dict() for r in b.log],
        params={"h": h, "sizes": list(sizes), "W1": W1, "W2": W2, "indicatorByLabel": labels},
    )


# ---------------------------------------------------------------------------
# bounded weights


def bounded_weight_transform(compiled) -> CompiledReduction:
    """Re-emit a compiled construction with every weight in ``[1, 4]``.

    Heavy contracts become unit pieces on distinct sources/sinks, multi-input
    ANDs become NOT of NAND, and decision thresholds use the unit-weight cutoff.
    Plain systems carry no gadget log and cannot be transformed.
    """
    recipe = getattr(compiled, "recipe", None)
    if recipe is None or not getattr(compiled, "log", None):
        raise UnsplittableContract("bounded transform needs a compiled system with its gadget log")
    fn, args, kw = recipe
    kw = dict(kw)
    kw["bounded"] = True
    out = fn(*args, **kw)
    return out[0] if isinstance(out, tuple) else out


def optimum(compiled: CompiledReduction, solutions: SolutionSet, tol: float = DEFAULT_TOL):
    """Best objective value over an enumerated solution set and the label attaining it."""
    sols = list(solutions.solutions)
    if not sols:
        raise MissingDesignation("no solutions to optimise over")
    vals = [compiled.evaluate(r, solutions=sols, tol=tol, verify=False) for r in sols]
    pick = max if vals[0].direction == "maximize" else min
    best = pick(range(len(vals)), key=lambda i: vals[i].value)
    return vals[best].value, solutions.labels[best]


def all_graphs_up_to_iso(n: int):
    """Every simple graph on ``n`` nodes (labelled; callers dedupe if needed)."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


NAMED_GRAPHS = {
    "K1": (1, []),
    "K3": (3, [(0, 1), (1, 2), (0, 2)]),
    "P3": (3, [(0, 1), (1, 2)]),
    "C5": (5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
    "K13": (4, [(0, 1), (0, 2), (0, 3)]),
    "P4": (4, [(0, 1), (1, 2), (2, 3)]),
    "C4": (4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
    "2K2": (4, [(0, 1), (2, 3)]),
}


def named_graph(name: str) -> Graph:
    n, edges = NAMED_GRAPHS[name]
    return Graph.from_edges(n, edges)
