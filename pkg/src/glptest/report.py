"""Serialization of test results and charts: JSON, CSV and plain-text tables."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from typing import Optional

from .glp import GLPChart, GLPResult


def _num(v):
    return None if v is None else float(v)


def result_to_dict(result: GLPResult, dataset=None) -> dict:
    out = {
        "order": result.order,
        "glp": float(result.statistic),
        "df": int(result.df),
        "p_value": float(result.p_asymptotic),
        "p_permutation": _num(result.p_permutation),
        "permutations": int(result.permutations),
        "n": int(result.n),
    }
    if result.z is not None:
        out["communities"] = int(result.z.n_clusters)
        out["kmeans_inertia"] = float(result.z.inertia)
    if result.comeans is not None:
        out["comeans"] = [[float(v) for v in row] for row in result.comeans.values]
    if result.embedding is not None:
        out["eigenvalues"] = [float(v) for v in result.embedding.eigenvalues]
    out["warnings"] = list(result.warnings)
    return out


def chart_to_dict(chart: GLPChart) -> dict:
    components = []
    for row in chart.rows:
        entry = {
            "order": row.order,
            "glp": _num(row.statistic),
            "p_value": _num(row.p_asymptotic),
            "significant": bool(row.significant),
            "skipped": bool(row.skipped),
        }
        if row.result is not None and row.result.p_permutation is not None:
            entry["p_permutation"] = float(row.result.p_permutation)
        components.append(entry)
    overall = {
        "glp": float(chart.overall.statistic),
        "p_value": float(chart.overall.p_asymptotic),
        "df": int(chart.overall.df),
        "significant": bool(chart.overall_significant),
    }
    if chart.overall.p_permutation is not None:
        overall["p_permutation"] = float(chart.overall.p_permutation)
    return {
        "components": components,
        "overall": overall,
        "fused_orders": list(chart.fused_orders),
        "alpha": chart.alpha,
        "warnings": list(chart.warnings),
    }


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    text = resources.files("glptest").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def _fmt_p(p: Optional[float]) -> str:
    if p is None:
        return "-"
    if p < 1e-3:
        return f"{p:.2e}"
    return f"{p:.3f}"


def _fmt_stat(s: Optional[float]) -> str:
    if s is None:
        return "-"
    if 0 < abs(s) < 1e-3:
        return f"{s:.2e}"
    return f"{s:.3f}"


def chart_table(chart: GLPChart) -> str:
    """Chart as text; adjusted-significant components carry an asterisk."""
    lines = [f"{'Component':<10}{'GLP':>12}{'p-value':>12}"]
    lines.append("-" * 34)
    for row in chart.rows:
        if row.skipped:
            lines.append(f"{row.order:<10}{'skipped':>12}{'-':>12}")
            continue
        label = f"{row.order}{'*' if row.significant else ''}"
        lines.append(f"{label:<10}{_fmt_stat(row.statistic):>12}{_fmt_p(row.p_asymptotic):>12}")
    lines.append("-" * 34)
    overall = "overall" + ("" if chart.overall_significant else " (n.s.)")
    lines.append(
        f"{overall:<10}{_fmt_stat(chart.overall.statistic):>12}"
        f"{_fmt_p(chart.overall.p_asymptotic):>12}"
    )
    if chart.fused_orders:
        lines.append(f"fused orders: {', '.join(str(o) for o in chart.fused_orders)}")
    return "\n".join(lines) + "\n"


def chart_csv(chart: GLPChart) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["component", "glp", "p_value", "significant"])
    for row in chart.rows:
        w.writerow([
            row.order,
            "" if row.skipped else repr(float(row.statistic)),
            "" if row.skipped else repr(float(row.p_asymptotic)),
            int(row.significant),
        ])
    w.writerow([
        "overall", repr(float(chart.overall.statistic)),
        repr(float(chart.overall.p_asymptotic)), int(chart.overall_significant),
    ])
    return buf.getvalue()


def result_table(result: GLPResult) -> str:
    lines = [
        f"order          {result.order}",
        f"GLP statistic  {_fmt_stat(result.statistic)}",
        f"df             {result.df}",
        f"p (chi-square) {_fmt_p(result.p_asymptotic)}",
    ]
    if result.p_permutation is not None:
        lines.append(f"p (perm, B={result.permutations}) {_fmt_p(result.p_permutation)}")
    return "\n".join(lines) + "\n"


def result_csv(result: GLPResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["order", "glp", "df", "p_value", "p_permutation"])
    w.writerow([
        result.order, repr(float(result.statistic)), result.df,
        repr(float(result.p_asymptotic)),
        "" if result.p_permutation is None else repr(float(result.p_permutation)),
    ])
    return buf.getvalue()
