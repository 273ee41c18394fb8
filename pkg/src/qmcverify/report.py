"""Verification reports: one structure, two renderings.

Reports are deterministic functions of the model and options: no
timestamps, stable key order, eigenvalues sorted by descending modulus
(ties by descending real part, then descending imaginary part).  Infinite
values serialize as the string ``"inf"`` to stay inside strict JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

def _num(value: float):
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return float(value)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.12g}"


@dataclass
class MethodResult:
    method: str
    value: float
    tolerance: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        diag = {k: _num(v) if isinstance(v, float) else v
                for k, v in sorted(self.diagnostics.items())}
        return {
            "method": self.method,
            "value": _num(self.value),
            "tolerance": _num(self.tolerance),
            "diagnostics": diag,
        }


def eigenvalue_table(spectral, eps_unit: float) -> list[dict]:
    """Eigenvalues of the step representation in report order."""
    evals = list(spectral.eigenvalues)
    evals.sort(key=lambda z: (-abs(z), -z.real, -z.imag))
    return [
        {
            "re": float(z.real),
            "im": float(z.imag),
            "modulus": float(abs(z)),
            "unit_circle": bool(abs(abs(z) - 1.0) <= eps_unit),
        }
        for z in evals
    ]


@dataclass
class VerificationReport:
    command: str
    model_path: str
    model_hash: str
    options: dict
    observable: str | None = None
    methods: list[MethodResult] = field(default_factory=list)
    agreement: dict | None = None
    termination: dict | None = None
    eigenvalues: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add_method(self, method: str, value: float, tolerance: float, **diagnostics):
        self.methods.append(MethodResult(method, value, tolerance, diagnostics))

    def compute_agreement(self, tolerance: float) -> float:
        """Fill the pairwise-delta block; returns the max delta."""
        finite = [m for m in self.methods if not math.isinf(m.value)]
        pairs = {}
        max_delta = 0.0
        for i, a in enumerate(finite):
            for b in finite[i + 1 :]:
                delta = abs(a.value - b.value)
                pairs[f"{a.method}/{b.method}"] = delta
                max_delta = max(max_delta, delta)
        self.agreement = {
            "pairs": {k: _num(v) for k, v in sorted(pairs.items())},
            "max_delta": _num(max_delta),
            "tolerance": _num(tolerance),
            "ok": bool(max_delta <= tolerance),
        }
        return max_delta

    def to_dict(self) -> dict:
        doc = {
            "command": self.command,
            "model": self.model_path,
            "model_hash": self.model_hash,
            "options": {k: _num(v) if isinstance(v, float) else v
                        for k, v in sorted(self.options.items())},
            "methods": [m.to_dict() for m in self.methods],
            "eigenvalues": self.eigenvalues,
            "warnings": list(self.warnings),
        }
        if self.observable is not None:
            doc["observable"] = self.observable
        if self.agreement is not None:
            doc["agreement"] = self.agreement
        if self.termination is not None:
            doc["termination"] = self.termination
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        lines = []
        lines.append(f"model: {self.model_path}")
        lines.append(f"hash:  {self.model_hash}")
        if self.observable is not None:
            lines.append(f"observable: {self.observable}")
        if self.eigenvalues:
            lines.append("")
            lines.append("eigenvalues of the step representation:")
            for ev in self.eigenvalues:
                flag = "  unit-circle" if ev["unit_circle"] else ""
                lines.append(
                    f"  {ev['re']:+.9f}{ev['im']:+.9f}j   |lambda| = "
                    f"{ev['modulus']:.9f}{flag}"
                )
        if self.methods:
            lines.append("")
            lines.append(f"{'method':<12}{'value':<22}{'tolerance':<12}diagnostics")
            for m in self.methods:
                diag = " ".join(
                    f"{k}={_fmt(v) if isinstance(v, float) else v}"
                    for k, v in sorted(m.diagnostics.items())
                )
                lines.append(
                    f"{m.method:<12}{_fmt(m.value):<22}{m.tolerance:<12.1e}{diag}"
                )
        if self.agreement is not None:
            status = "OK" if self.agreement["ok"] else "DISAGREE"
            lines.append("")
            lines.append(
                f"agreement: max pairwise delta {_fmt_json_num(self.agreement['max_delta'])} "
                f"(tolerance {_fmt_json_num(self.agreement['tolerance'])})  {status}"
            )
        if self.termination is not None:
            t = self.termination
            lines.append("")
            lines.append(f"termination ({t['scope']}):")
            lines.append(f"  terminates:        {_yn(t['terminates'])}"
                         + (f" at step {t['terminates_at']}" if t["terminates_at"] is not None else ""))
            lines.append(f"  almost terminates: {_yn(t['almost_terminates'])}")
            lines.append(f"  unit overlap norm: {_fmt_json_num(t['unit_overlap_norm'])}")
        for w in self.warnings:
            lines.append("")
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def _fmt_json_num(value) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.6g}"


def simulation_table(trace) -> str:
    """Delimited step table for the simulate command."""
    lines = ["n\tp_n\tp_nontermination\tcumulative"]
    cumulative = 0.0
    for rec in trace.steps:
        cumulative += rec.p
        lines.append(
            f"{rec.n}\t{rec.p:.12g}\t{rec.p_nontermination:.12g}\t{cumulative:.12g}"
        )
    lines.append(f"residual mass after table: {trace.residual_mass:.12g}")
    return "\n".join(lines) + "\n"
