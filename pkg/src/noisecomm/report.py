"""Serializable analysis reports.

JSON is written by a small custom encoder so that every float is printed
with 17 significant digits and the output is byte-stable across
serialize -> parse -> serialize round trips.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .channels import KrausChannel
from .linalg import ToleranceConfig
from .structure import WedderburnStructure, structure_string
from .verify import Diagnostic, noiseless_components

__all__ = ["AnalysisReport", "build_report", "dumps", "format_text"]


@dataclass
class AnalysisReport:
    channel_name: str
    dim: int
    unital: bool
    commutant_dim: int
    components: list[dict]
    structure_algebra: str
    structure_commutant: str
    noiseless: list[dict]
    diagnostics: list[dict]
    tolerances: dict
    seed: int
    matrices: dict | None = field(default=None)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["matrices"] is None:
            del d["matrices"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        d = dict(d)
        d.setdefault("matrices", None)
        d["diagnostics"] = [dict(x, residual=_parse_float(x["residual"])) for x in d["diagnostics"]]
        return cls(**d)

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))

    @property
    def passed(self) -> bool:
        return all(x["pass"] for x in self.diagnostics)


def _parse_float(x):
    return float(x) if isinstance(x, str) else x


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return json.dumps(repr(x))  # "inf", "-inf", "nan" as strings
    s = "%.17g" % x
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def _matrix_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def build_report(
    ch: KrausChannel,
    structure: WedderburnStructure | None,
    tol: ToleranceConfig,
    diagnostics: list[Diagnostic] = (),
    full: bool = False,
) -> AnalysisReport:
    if structure is None:
        comps, alg, com, noiseless, cdim = [], "", "", [], 0
    else:
        comps = [
            {"n": c.n, "m": c.m, "rank_of_central": c.linked.central_projection.rank}
            for c in structure.components
        ]
        alg = structure_string(structure, "algebra")
        com = structure_string(structure, "commutant")
        noiseless = [
            {"logical_dim": nc.logical_dim, "cofactor_dim": nc.cofactor_dim, "kind": nc.kind}
            for nc in noiseless_components(structure)
            if nc.usable
        ]
        cdim = structure.commutant_dim
    matrices = None
    if full and structure is not None:
        matrices = {
            "structuring_unitary": _matrix_json(structure.structuring_unitary),
            "central_projections": [_matrix_json(c.linked.central_projection.matrix) for c in structure.components],
        }
    return AnalysisReport(
        channel_name=ch.name,
        dim=ch.dim,
        unital=ch.is_unital_channel,
        commutant_dim=cdim,
        components=comps,
        structure_algebra=alg,
        structure_commutant=com,
        noiseless=noiseless,
        diagnostics=[{"name": d.name, "pass": d.passed, "residual": d.residual} for d in diagnostics],
        tolerances={"eps_rank": tol.eps_rank, "eps_cluster": tol.eps_cluster, "eps_zero": tol.eps_zero},
        seed=tol.seed,
        matrices=matrices,
    )


def format_text(report: AnalysisReport) -> str:
    lines = [
        f"channel:    {report.channel_name or '(unnamed)'}",
        f"dimension:  {report.dim}",
        f"unital:     {'yes' if report.unital else 'no'}",
        f"dim A':     {report.commutant_dim}",
        f"algebra:    {report.structure_algebra}",
        f"commutant:  {report.structure_commutant}",
        "components (n = block size, m = multiplicity):",
    ]
    for i, c in enumerate(report.components):
        lines.append(f"  [{i}] n={c['n']} m={c['m']} rank(central projection)={c['rank_of_central']}")
    if report.noiseless:
        lines.append("noiseless components:")
        for nc in report.noiseless:
            lines.append(f"  logical dim {nc['logical_dim']}, cofactor dim {nc['cofactor_dim']} ({nc['kind']})")
    else:
        lines.append("noiseless components: none (commutant has no matrix block of size >= 2)")
    if report.diagnostics:
        lines.append("diagnostics:")
        for d in report.diagnostics:
            lines.append(f"  {'PASS' if d['pass'] else 'FAIL'}  {d['name']:<32} residual={d['residual']:.3e}")
    return "\n".join(lines) + "\n"
