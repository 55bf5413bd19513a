"""Deterministic report artifacts.

Canonical JSON (sorted keys, fixed separators) and flat CSV renderings.
Wall-clock timings never enter these artifacts; identical run configurations
therefore produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

from pcrsim import __version__
from pcrsim.nn_core.serialize import canonical_json

OUTPUT_DIR_ENV = "PCRSIM_OUT"


def stamp(payload: dict, *, s: int, seed: int | None, n=None) -> dict:
    """Attach the reproducibility header every artifact carries."""
    out = {
        "tool": "pcrsim",
        "version": __version__,
        "s": s,
        "seed": seed,
    }
    if n is not None:
        out["n"] = n
    out.update(payload)
    return out


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def render_json(doc: dict) -> str:
    return canonical_json(doc)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    """Flat CSV with a fixed column order; missing cells are empty."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in columns})
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def verification_csv(reports: list[dict]) -> str:
    """Summary row per verification report plus one row per failure."""
    columns = [
        "report",
        "n",
        "s",
        "seed",
        "budget",
        "total",
        "passed",
        "failure_count",
        "max_scratch",
        "instance",
        "expected",
        "got",
    ]
    rows: list[dict] = []
    for rep in reports:
        rows.append({k: rep.get(k) for k in columns if k in rep})
        for f in rep.get("failures", []):
            rows.append(
                {
                    "report": rep.get("report"),
                    "n": rep.get("n"),
                    "s": rep.get("s"),
                    "seed": rep.get("seed"),
                    "instance": f.get("instance"),
                    "expected": f.get("expected"),
                    "got": f.get("got"),
                }
            )
    return render_csv(rows, columns)
