"""JSON formats for systems, rate vectors, solution sets and compiled reductions."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FClearError, ParseError
from .model import FinancialSystem, build_system, check_rates
from .solver import Driver, SolutionSet

FORMAT_VERSION = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def system_to_dict(system: FinancialSystem) -> dict:
    banks = []
    for i in range(system.n):
        rec = {"id": i, "external": system.externals[i]}
        if system.labels and system.labels[i] is not None:
            rec["label"] = system.labels[i]
        if system.roles and system.roles[i] is not None:
            rec["role"] = system.roles[i]
        banks.append(rec)
    return {
        "version": FORMAT_VERSION,
        "alpha": system.alpha,
        "beta": system.beta,
        "banks": banks,
        "debts": [
            {"debtor": u, "creditor": v, "weight": w} for (u, v), w in sorted(system.debts.items())
        ],
        "cds": [
            {"debtor": u, "creditor": v, "reference": r, "weight": w}
            for (u, v, r), w in sorted(system.cdss.items())
        ],
    }


def system_from_dict(data: dict, strict_sanity: bool = False) -> FinancialSystem:
    try:
        banks = sorted(data["banks"], key=lambda b: int(b["id"]))
        ids = [int(b["id"]) for b in banks]
        if ids != list(range(len(ids))):
            raise ParseError("bank ids must be the dense range 0..n-1")
        debts = [(int(d["debtor"]), int(d["creditor"]), float(d["weight"])) for d in data.get("debts", [])]
        cdss = [
            (int(c["debtor"]), int(c["creditor"]), int(c["reference"]), float(c["weight"]))
            for c in data.get("cds", [])
        ]
        return build_system(
            [float(b["external"]) for b in banks],
            debts,
            cdss,
            float(data.get("alpha", 1.0)),
            float(data.get("beta", 1.0)),
            strict_sanity=strict_sanity,
            labels=[b.get("label") for b in banks],
            roles=[b.get("role") for b in banks],
        )
    except FClearError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed system file: {exc!r}") from None


def save_system(system: FinancialSystem, path) -> None:
    Path(path).write_text(dumps(system_to_dict(system)))


def _read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def load_system(path, strict_sanity: bool = False) -> FinancialSystem:
    return system_from_dict(_read_json(path), strict_sanity)


def rates_to_dict(system: FinancialSystem, r) -> dict:
    return {"systemHash": system.digest(), "rates": {str(i): float(x) for i, x in enumerate(r)}}


def rates_from_dict(system: FinancialSystem, data: dict) -> np.ndarray:
    try:
        rates = data["rates"]
    except (KeyError, TypeError):
        raise ParseError("rates file needs a 'rates' field") from None
    if isinstance(rates, list):
        return check_rates(system, rates)
    r = np.ones(system.n)
    for key, val in rates.items():
        try:
            idx = int(key)
        except ValueError:
            try:
                idx = system.index(key)
            except KeyError:
                raise ParseError(f"unknown bank {key!r} in rates file") from None
        if not 0 <= idx < system.n:
            raise ParseError(f"bank {idx} out of range")
        r[idx] = float(val)
    return check_rates(system, r)


def load_rates(system: FinancialSystem, path) -> np.ndarray:
    return rates_from_dict(system, _read_json(path))


def solutions_to_dict(system: FinancialSystem, sols: SolutionSet) -> dict:
    return {
        "systemHash": system.digest(),
        "continuum": sols.continuum,
        "solutions": [
            {"label": lab, "rates": [float(x) for x in r]} for lab, r in zip(sols.labels, sols.solutions)
        ],
    }


def manifest_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".manifest.json")


def save_compiled(compiled, path) -> Path:
    save_system(compiled.system, path)
    side = manifest_path(path)
    side.write_text(dumps(_jsonable(compiled.manifest())))
    return side


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def load_compiled(path):
    """Load a system and, if present, its manifest as a compiled reduction."""
    from .reductions import CompiledReduction, Graph

    system = load_system(path)
    side = manifest_path(path)
    if not side.exists():
        return None, system
    man = _read_json(side)
    drivers = [
        Driver(
            d["name"],
            tuple(d["members"]),
            tuple(tuple(s) if s is not None else None for s in d["states"]),
            (d["gate"][0], tuple(d["gate"][1])) if d.get("gate") else None,
        )
        for d in man.get("drivers", [])
    ]
    graph = None
    if man.get("graph"):
        graph = Graph.from_edges(man["graph"]["n"], [tuple(e) for e in man["graph"]["edges"]])
    part = man.get("partition")
    compiled = CompiledReduction(
        system=system,
        objective=man.get("objectiveKind", ""),
        drivers=drivers,
        graph=graph,
        graph_drivers=list(man.get("graphDrivers", [])),
        v_c=man.get("constraintIndicator"),
        nodes=dict(man.get("nodes", {})),
        block=man.get("block"),
        partition=(part[0], part[1]) if part else None,
        m=man.get("m", 1),
        M=man.get("M"),
        bounded=man.get("bounded", False),
        log=man.get("gadgets", []),
        params=man.get("params", {}),
    )
    return compiled, system
