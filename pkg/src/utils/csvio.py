import logging
from dataclasses import asdict
from pathlib import Path

import pandas as pd

from src.models import CSV_COLUMNS, ConvergenceRecord

log = logging.getLogger("csvio")

INT_COLUMNS = ("level", "n", "dofs")

# 12 significant digits
FLOAT_FORMAT = "%.11e"

def records_frame(records: list[ConvergenceRecord]) -> pd.DataFrame:
    """One row per level, columns in CSV order; study coordinates are dropped."""
    rows = [asdict(r) for r in sorted(records, key=lambda x: x.level)]
    df = pd.DataFrame(rows, columns=list(CSV_COLUMNS))
    df = df.astype({c: "int64" for c in INT_COLUMNS})
    return df.astype({c: "float64" for c in CSV_COLUMNS if c not in INT_COLUMNS})

def save_records(path: Path, records: list[ConvergenceRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    records_frame(records).to_csv(
        tmp,
        index=False,
        float_format=FLOAT_FORMAT,
        na_rep="nan",
        lineterminator="\n",
        encoding="utf-8",
    )
    tmp.replace(path)
    log.info("Saved %d rows to %s", len(records), path)

def study_path(out: Path, t: float, p: int, single: bool) -> Path:
    """`out` itself for a single (t, p) pair, otherwise one sibling file per pair."""
    if single:
        return out
    return out.with_name(f"{out.stem}_t{t:g}_p{p}{out.suffix or '.csv'}")
