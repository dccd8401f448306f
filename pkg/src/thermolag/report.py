"""Serialization of panel results and plot-ready long-format tables."""
from __future__ import annotations

import csv
import io
import json

from .errors import MalformedResults
from .events import EteDefinition, definition_rank

FLAT_COLUMNS = (
    "definition", "cause", "sex", "variant", "rr", "ci_low", "ci_high",
    "significant", "phi", "qaic", "converged", "error",
)
FIGURE_COLUMNS = ("definition", "cause", "sex", "variant", "rr", "ci_low", "ci_high")
FIG4_CAUSES = ("CVD", "RESP")
FIG4_SEXES = ("female", "male")

LAG_WINDOW_NOTE = (
    "cold-spell max_lag defaults to 27 days; the cold-spell figure caption in the source "
    "analysis reports lag 0-21, which is available through the sensitivity grid"
)


def cell_to_dict(cell) -> dict:
    out = cell.config.to_dict()
    est = cell.estimate
    if est is None:
        out.update(rr=None, ci_low=None, ci_high=None, log_rr=None, se=None, significant=None,
                   error=cell.error, fit=None, design=None)
        return out
    out.update(
        rr=est.rr,
        ci_low=est.ci_low,
        ci_high=est.ci_high,
        log_rr=est.log_rr,
        se=est.se,
        significant=est.significant,
        error=None,
        fit=est.fit.to_dict(),
        design=est.metadata,
    )
    return out


def results_document(cells, manifest: dict | None = None) -> dict:
    return {
        "manifest": manifest or {},
        "notes": {"lag_window": LAG_WINDOW_NOTE},
        "cells": [cell_to_dict(c) for c in cells],
    }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def flat_row(cell: dict) -> dict:
    fit = cell.get("fit") or {}
    return {
        "definition": cell["definition"],
        "cause": cell["cause"],
        "sex": cell["sex"],
        "variant": cell["variant"],
        "rr": cell.get("rr"),
        "ci_low": cell.get("ci_low"),
        "ci_high": cell.get("ci_high"),
        "significant": cell.get("significant"),
        "phi": fit.get("dispersion"),
        "qaic": fit.get("qaic"),
        "converged": fit.get("converged"),
        "error": cell.get("error"),
    }


def write_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def flat_csv(document: dict) -> str:
    return write_csv([flat_row(c) for c in document["cells"]], FLAT_COLUMNS)


def load_results(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedResults(f"results file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("cells"), list):
        raise MalformedResults("results file has no 'cells' list")
    for i, cell in enumerate(doc["cells"]):
        missing = [k for k in FIGURE_COLUMNS if k not in cell]
        if missing:
            raise MalformedResults(f"cell {i} lacks fields {missing}")
        try:
            EteDefinition.from_name(cell["definition"])
        except ValueError:
            raise MalformedResults(f"cell {i} has unknown definition {cell['definition']!r}") from None
    return doc


def figure_tables(document: dict) -> dict:
    """Long-format tables keyed by file name.

    ``fig2_*`` hold heat-wave cells, ``fig3_*`` cold-spell cells, and
    ``fig4`` the CVD and RESP cells split by sex for both event kinds.
    """
    def rows(pred):
        sel = [c for c in document["cells"] if pred(c)]
        sel.sort(key=lambda c: (c["variant"] != "overall", definition_rank(EteDefinition.from_name(c["definition"]))))
        return [{k: c.get(k) for k in FIGURE_COLUMNS} for c in sel]

    def kind(c):
        return c["definition"].split("_", 1)[0]

    return {
        "fig2_overall.csv": rows(lambda c: kind(c) == "HW" and c["variant"] == "overall"),
        "fig2_added.csv": rows(lambda c: kind(c) == "HW" and c["variant"] == "added"),
        "fig3_overall.csv": rows(lambda c: kind(c) == "CS" and c["variant"] == "overall"),
        "fig3_added.csv": rows(lambda c: kind(c) == "CS" and c["variant"] == "added"),
        "fig4.csv": rows(lambda c: c["cause"] in FIG4_CAUSES and c["sex"] in FIG4_SEXES),
    }


def report(document: dict) -> dict:
    """Map of file name to CSV text for every figure table."""
    return {name: write_csv(rows, FIGURE_COLUMNS) for name, rows in figure_tables(document).items()}
