import math
from pathlib import Path
from typing import Iterable

from src.models import ERROR_FIELDS, ConvergenceRecord
from src.services.analysis import EXACT, estimate_rate

def fmt_rate(rate: float | None) -> str:
    if rate is None:
        return "n/a"
    if rate == EXACT:
        return "exact"
    return f"{rate:6.3f}"

def fmt_value(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "N/A"
    return f"{v:.3e}"

def _safe_rate(records: list[ConvergenceRecord], field: str) -> float | None:
    try:
        return estimate_rate(records, field)
    except ValueError:
        return None

def format_rate_table(bc: str, t: float, p: int, records: Iterable[ConvergenceRecord]) -> str:
    records = sorted(records, key=lambda r: r.level)
    ok = [r for r in records if not r.failed]

    lines = [f"bc={bc} t={t:g} p={p}  (expected rate {p + 1})"]
    if len(ok) < len(records):
        failed = ", ".join(str(r.level) for r in records if r.failed)
        lines.append(f"  failed levels: {failed}")

    lines.append("  " + " ".join(f"{f:>9}" for f in ERROR_FIELDS))
    lines.append("  " + " ".join(f"{fmt_rate(_safe_rate(ok, f)):>9}" for f in ERROR_FIELDS))

    if ok:
        last = ok[-1]
        ratio_u = last.err_u / last.proj_u if last.proj_u > 0 else math.nan
        ratio_M = last.err_M / last.proj_M if last.proj_M > 0 else math.nan
        lines.append(f"  finest n={last.n}: err_u/proj_u={fmt_value(ratio_u)} err_M/proj_M={fmt_value(ratio_M)}")

    conds = [(r.n, r.condition) for r in ok if r.condition is not None]
    if conds:
        lines.append("  condition: " + " ".join(f"n={n}:{fmt_value(c)}" for n, c in conds))
    return "\n".join(lines)

def gnuplot_script(csv_paths: dict[tuple[float, int], Path]) -> str:
    """Log-log plot of every error column against the number of unknowns, one page per CSV."""
    out = [
        "set datafile separator ','",
        "set logscale xy",
        "set key outside right",
        "set xlabel 'degrees of freedom'",
        "set ylabel 'error'",
        "set terminal pngcairo size 900,600",
    ]
    columns = {name: i + 1 for i, name in enumerate(("level", "n", "dofs", "h") + ERROR_FIELDS)}
    for (t, p), path in csv_paths.items():
        png = path.with_suffix(".png").name
        out.append(f"set output '{png}'")
        out.append(f"set title 't={t:g}, p={p}'")
        # O(h^(p+1)) = O(dofs^-(p+1)), anchored at the coarsest err_u
        out.append(f"stats '{path.name}' using 3:5 nooutput")
        out.append(f"ref(x) = STATS_max_y * (x / STATS_min_x)**(-{p + 1})")
        curves = [
            f"'{path.name}' using 3:{columns[f]} with linespoints title '{f}'"
            for f in ERROR_FIELDS
        ]
        curves.append(f"ref(x) with lines dashtype 2 title 'O(h^{p + 1})'")
        out.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(out) + "\n"
