import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from cavityring import config
from cavityring.dynamics import SERIES_COLUMNS, TimeSeries
from cavityring.exceptions import OutputError


def format_value(value: Optional[float]) -> str:
    """Twelve significant digits; negative zero prints as 0, missing values as empty."""
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    text = f"{value:.{config.CSV_DIGITS}g}"
    return "0" if text in ("-0", "0") else text


def rounded(value: Optional[float]) -> Optional[float]:
    """JSON counterpart of format_value."""
    if value is None:
        return None
    return float(format_value(value))


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) if isinstance(v, float) or v is None else v for v in row])
    return buffer.getvalue()


def render_json(document: Any) -> str:
    return json.dumps(document, indent=4) + "\n"


def series_csv(series: TimeSeries) -> str:
    return render_csv(SERIES_COLUMNS, series.rows())


def series_json(series: TimeSeries) -> str:
    return render_json(
        {
            "columns": list(SERIES_COLUMNS),
            "rows": [[rounded(v) for v in row] for row in series.rows()],
        }
    )


def render_series(series: TimeSeries, fmt: str) -> str:
    return series_json(series) if fmt == "json" else series_csv(series)


def spectrum_csv(rows: list[dict]) -> str:
    width = max((len(row["coefficients"]) for row in rows), default=0)
    header = ["level", "analytic", "oracle", "deviation", "paper_ref", "energy"]
    header += [f"c{i + 1}" for i in range(width)]
    body = [
        [row["level"], row["analytic"], row["oracle"], row["deviation"], row["paper_ref"], row["energy"]]
        + list(row["coefficients"])
        for row in rows
    ]
    return render_csv(header, body)


def spectrum_json(rows: list[dict]) -> str:
    basis = rows[0]["basis"] if rows else []
    levels = []
    for row in rows:
        levels.append(
            {
                "level": row["level"],
                "analytic": rounded(row["analytic"]),
                "oracle": rounded(row["oracle"]),
                "deviation": rounded(row["deviation"]),
                "paper_ref": rounded(row["paper_ref"]),
                "energy": rounded(row["energy"]),
                "coefficients": [rounded(c) for c in row["coefficients"]],
            }
        )
    return render_json({"basis": basis, "levels": levels})


def render_spectrum(rows: list[dict], fmt: str) -> str:
    return spectrum_json(rows) if fmt == "json" else spectrum_csv(rows)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_atomic(target: Path, text: str) -> Path:
    """Writes to a temporary sibling, then renames over the target."""
    target = Path(target)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, temporary = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
        try:
            with os.fdopen(fd, "w", newline="") as f:
                f.write(text)
            os.replace(temporary, target)
        except BaseException:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise
    except OSError as exc:
        raise OutputError(f"Cannot write {target}: {exc}") from exc
    return target
