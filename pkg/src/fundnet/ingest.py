"""Holdings-record parsing and quarterly snapshot assembly."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Mapping, TextIO

from .network import HoldingNetwork, NetworkError, build_network_arrays

HOLDINGS_HEADER = ("fund_class_id", "report_date", "asset_id", "market_value")
CLASS_MAP_HEADER = ("fund_class_id", "fund_id")


class HoldingsParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class HoldingRecord:
    fund_id: str
    report_date: date
    asset_id: str
    market_value: float
    line: int | None = None


@dataclass(frozen=True, order=True)
class Quarter:
    year: int
    q: int

    _PATTERN = re.compile(r"^\s*(\d{4})\s*[Qq]([1-4])\s*$")

    @classmethod
    def parse(cls, label: "str | Quarter") -> "Quarter":
        if isinstance(label, Quarter):
            return label
        m = cls._PATTERN.match(label)
        if not m:
            raise ValueError(f"invalid quarter label {label!r}; expected e.g. 2006Q2")
        return cls(int(m.group(1)), int(m.group(2)))

    @property
    def start(self) -> date:
        return date(self.year, 3 * self.q - 2, 1)

    @property
    def end(self) -> date:
        if self.q == 4:
            return date(self.year, 12, 31)
        return date.fromordinal(date(self.year, 3 * self.q + 1, 1).toordinal() - 1)

    def __contains__(self, d: date) -> bool:
        return self.start <= d <= self.end

    def __str__(self) -> str:
        return f"{self.year}Q{self.q}"


def _check_header(header, expected, what):
    if header is None:
        raise HoldingsParseError(f"{what}: missing header", 1)
    got = tuple(h.strip() for h in header)
    if got != expected:
        raise HoldingsParseError(
            f"{what}: unknown header {','.join(got)!r}, expected {','.join(expected)!r}", 1)


def parse_holdings(stream: TextIO) -> list[HoldingRecord]:
    """Parse a holdings CSV (``fund_class_id,report_date,asset_id,market_value``)."""
    reader = csv.reader(stream)
    _check_header(next(reader, None), HOLDINGS_HEADER, "holdings")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise HoldingsParseError(f"expected 4 fields, got {len(row)}", lineno)
        cls_id, raw_date, asset, raw_value = (c.strip() for c in row)
        if not cls_id or not asset:
            raise HoldingsParseError("empty fund class or asset id", lineno)
        try:
            d = date.fromisoformat(raw_date)
        except ValueError:
            raise HoldingsParseError(f"bad report date {raw_date!r}", lineno) from None
        try:
            v = float(raw_value)
        except ValueError:
            raise HoldingsParseError(f"bad market value {raw_value!r}", lineno) from None
        if not math.isfinite(v) or v < 0:
            raise HoldingsParseError(f"market value must be finite and >= 0, got {raw_value}", lineno)
        out.append(HoldingRecord(cls_id, d, asset, v, lineno))
    return out


def parse_class_map(stream: TextIO) -> dict[str, str]:
    reader = csv.reader(stream)
    _check_header(next(reader, None), CLASS_MAP_HEADER, "class map")
    mapping: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise HoldingsParseError("expected fund_class_id,fund_id", lineno)
        cls_id, fund = row[0].strip(), row[1].strip()
        if mapping.get(cls_id, fund) != fund:
            raise HoldingsParseError(f"class {cls_id!r} mapped to two funds", lineno)
        mapping[cls_id] = fund
    return mapping


def consolidate_classes(records: Iterable[HoldingRecord],
                        class_map: Mapping[str, str]) -> list[HoldingRecord]:
    """Replace share-class ids by their fund id; unmapped ids pass through.

    Same-fund, same-asset, same-date records are merged later when the
    snapshot is built (duplicates are summed there).
    """
    return [r if r.fund_id not in class_map else replace(r, fund_id=class_map[r.fund_id])
            for r in records]


def select_latest_reports(records: Iterable[HoldingRecord], quarter) -> list[HoldingRecord]:
    """Records of each fund's most recent report date inside ``quarter``."""
    quarter = Quarter.parse(quarter)
    in_q = [r for r in records if r.report_date in quarter]
    latest: dict[str, date] = {}
    for r in in_q:
        if r.fund_id not in latest or r.report_date > latest[r.fund_id]:
            latest[r.fund_id] = r.report_date
    return [r for r in in_q if r.report_date == latest[r.fund_id]]


def build_quarter_snapshot(records: Iterable[HoldingRecord], quarter) -> HoldingNetwork:
    """Assemble one quarterly snapshot from consolidated records.

    Only each fund's latest report within the quarter is used; funds with no
    report in the quarter are absent (no carry-forward from earlier quarters).
    """
    quarter = Quarter.parse(quarter)
    chosen = select_latest_reports(records, quarter)
    if not chosen:
        raise NetworkError(f"no holding records in {quarter}")
    try:
        return build_network_arrays([r.fund_id for r in chosen], [r.asset_id for r in chosen],
                                    [r.market_value for r in chosen], str(quarter))
    except NetworkError as exc:
        raise NetworkError(f"{quarter}: {exc}") from None
