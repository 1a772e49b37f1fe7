"""
Report output for retrolift commands.

Every command hands over a flat payload dict and, when it produced one, a
VerificationLedger. Text output is for people, structured output is one
JSON document, and ledgers can also be written as CSV or as a PDF table.
"""

import io
import json
import logging
from pathlib import Path
from typing import Iterable, Optional

from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import mm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from ledger import COLUMNS, FAIL, VerificationLedger

logger = logging.getLogger(__name__)

HEADER_COLOR = "#dde2df"
FAIL_ROW_COLOR = "#C7B994"
WITNESS_WIDTH = 48


def _plain(value):
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def structured(payload: dict, ledger: Optional[VerificationLedger] = None) -> str:
    doc = _plain(payload)
    if ledger is not None:
        doc["ledger"] = {
            "title": ledger.title,
            "ok": ledger.ok,
            "summary": _plain(ledger.summary().to_dict(orient="records")),
            "rows": _plain(ledger.to_records()),
        }
    return json.dumps(doc, indent=2, sort_keys=True)


def text(payload: dict, ledger: Optional[VerificationLedger] = None) -> str:
    lines = []
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{key}:")
            lines += [f"  {k}: {v}" for k, v in value.items()]
        elif isinstance(value, list):
            lines.append(f"{key}:")
            lines += [f"  {v}" for v in value]
        else:
            lines.append(f"{key}: {value}")
    if ledger is not None:
        summary = ledger.summary()
        if not summary.empty:
            lines.append(summary.to_string(index=False))
        lines.append(ledger.to_text())
    return "\n".join(lines)


def render(payload: dict, ledger: Optional[VerificationLedger] = None, fmt: str = "text") -> str:
    if fmt == "structured":
        return structured(payload, ledger)
    return text(payload, ledger)


def write_ledger_csv(ledger: VerificationLedger, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ledger.to_frame().to_csv(path, index=False)
    return path


def _clip(value) -> str:
    if value is None:
        return ""
    s = str(value)
    return s if len(s) <= WITNESS_WIDTH else s[: WITNESS_WIDTH - 3] + "..."


def ledger_pdf_bytes(ledger: VerificationLedger, title: str, notes: Iterable[str] = ()) -> bytes:
    """Render the ledger as an A4 table, failing rows highlighted."""
    buf = io.BytesIO()
    doc = SimpleDocTemplate(
        buf,
        pagesize=A4,
        leftMargin=14 * mm,
        rightMargin=14 * mm,
        topMargin=16 * mm,
        bottomMargin=16 * mm,
        title=title,
        invariant=1,
    )
    styles = getSampleStyleSheet()
    story = [Paragraph(title, styles["Heading2"])]
    for note in notes:
        story.append(Paragraph(note, styles["Normal"]))
    story.append(Spacer(1, 4 * mm))

    data = [[c.upper() for c in COLUMNS]]
    for row in ledger:
        data.append([row.tag, row.location, row.status, _clip(row.witness), row.scope])
    widths = [44 * mm, 40 * mm, 14 * mm, 62 * mm, 22 * mm]
    tbl = Table(data, colWidths=widths, repeatRows=1)
    ts = TableStyle(
        [
            ("GRID", (0, 0), (-1, -1), 0.25, colors.black),
            ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor(HEADER_COLOR)),
            ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
            ("FONTSIZE", (0, 0), (-1, -1), 7),
            ("VALIGN", (0, 0), (-1, -1), "MIDDLE"),
            ("ALIGN", (2, 1), (2, -1), "CENTER"),
        ]
    )
    for i, row in enumerate(ledger, start=1):
        if row.status == FAIL:
            ts.add("BACKGROUND", (0, i), (-1, i), colors.HexColor(FAIL_ROW_COLOR))
            ts.add("FONTNAME", (0, i), (-1, i), "Helvetica-Bold")
    tbl.setStyle(ts)
    story.append(tbl)
    doc.build(story)
    pdf_bytes = buf.getvalue()
    buf.close()
    return pdf_bytes


def write_ledger_pdf(ledger: VerificationLedger, path, title: Optional[str] = None, notes: Iterable[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(ledger_pdf_bytes(ledger, title or ledger.title, notes))
    logger.info("wrote %d ledger rows to %s", len(ledger), path)
    return path
