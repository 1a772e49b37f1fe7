"""
Verification ledgers: one row per checked identity, in a deterministic order.
"""

from dataclasses import dataclass, asdict
from typing import List, Optional

import numpy as np
import pandas as pd

PASS = "PASS"
FAIL = "FAIL"
ABSOLUTE = "absolute"

COLUMNS = ["tag", "location", "status", "witness", "scope"]


@dataclass(frozen=True)
class LedgerRow:
    tag: str
    location: str
    status: str
    witness: Optional[str] = None
    scope: str = ABSOLUTE

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _as_map(value) -> np.ndarray:
    return np.asarray(getattr(value, "map", value), dtype=np.int64)


class VerificationLedger:
    def __init__(self, title: str = "ledger"):
        self.title = title
        self.rows: List[LedgerRow] = []

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def record(self, tag: str, location: str, ok: bool, witness=None, scope: str = ABSOLUTE) -> bool:
        text = None if ok or witness is None else str(witness)
        self.rows.append(LedgerRow(tag, location, PASS if ok else FAIL, text, scope))
        return ok

    def check_maps(self, tag: str, location: str, lhs, rhs, scope: str = ABSOLUTE) -> bool:
        """Record whether two maps (homs or index arrays) agree everywhere."""
        left, right = _as_map(lhs), _as_map(rhs)
        if left.shape != right.shape:
            return self.record(tag, location, False, f"shapes {left.shape} vs {right.shape}", scope)
        bad = np.flatnonzero(left != right)
        if bad.size:
            x = int(bad[0])
            return self.record(tag, location, False, f"at {x}: {int(left[x])} != {int(right[x])}", scope)
        return self.record(tag, location, True, scope=scope)

    def extend(self, other: "VerificationLedger"):
        self.rows.extend(other.rows)

    @property
    def ok(self) -> bool:
        return all(row.passed for row in self.rows)

    def failures(self) -> List[LedgerRow]:
        return [row for row in self.rows if not row.passed]

    def tags(self) -> List[str]:
        return sorted({row.tag for row in self.rows})

    def to_records(self) -> List[dict]:
        return [asdict(row) for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.to_records(), columns=COLUMNS)

    def summary(self) -> pd.DataFrame:
        """PASS/FAIL counts per tag, tags in first-seen order."""
        df = self.to_frame()
        if df.empty:
            return pd.DataFrame(columns=["tag", PASS, FAIL])
        counts = pd.crosstab(df["tag"], df["status"]).reindex(columns=[PASS, FAIL], fill_value=0)
        order = list(dict.fromkeys(df["tag"]))
        return counts.reindex(order).reset_index()

    def to_text(self) -> str:
        lines = [f"# {self.title}: {len(self.rows)} rows, {len(self.failures())} failed"]
        for row in self.rows:
            line = f"{row.status}  {row.tag}  {row.location}"
            if row.scope != ABSOLUTE:
                line += f"  [{row.scope}]"
            if row.witness:
                line += f"  witness: {row.witness}"
            lines.append(line)
        return "\n".join(lines)
