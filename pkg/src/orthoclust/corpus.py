"""Load, validate, filter, and summarize paired orthovariant datasets.

A datapoint pairs an observed (dialect-bearing) token with its standard
form, the sentence context it occurred in, and a dialect-family tag.
Input is UTF-8 JSONL or CSV with columns id, standard, observed, context,
dtag, and optional target_offset.  Invalid records are collected into a
rejection report rather than silently dropped.
"""

from __future__ import annotations

import csv
import json
import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

log = logging.getLogger(__name__)

MAX_DTAG_CODES = 31

_FIELDS = ("id", "standard", "observed", "context", "dtag")


@dataclass(frozen=True)
class Dtag:
    """A dialect-family tag such as AA, BW, or WS."""

    code: str
    description: str = ""


class DtagInventory:
    """Mutable registry of known Dtag codes, capped at 31 entries."""

    def __init__(self, tags: dict[str, Dtag] | None = None):
        self.tags: dict[str, Dtag] = dict(tags or {})
        if len(self.tags) > MAX_DTAG_CODES:
            raise ValidationError(
                f"dtag inventory has {len(self.tags)} codes, cap is {MAX_DTAG_CODES}"
            )

    def __contains__(self, code: str) -> bool:
        return code in self.tags

    def __len__(self) -> int:
        return len(self.tags)

    def register(self, code: str, description: str = "") -> bool:
        """Register a new code; returns False when the cap is reached."""
        if code in self.tags:
            return True
        if len(self.tags) >= MAX_DTAG_CODES:
            return False
        self.tags[code] = Dtag(code=code, description=description)
        return True


@dataclass(frozen=True)
class DataPoint:
    """One observed/standard token pair with its context and dialect tag."""

    id: str
    standard: str
    observed: str
    context: str
    dtag: str
    target_offset: int | None = None


@dataclass(frozen=True)
class RejectionEntry:
    id: str
    reason: str


def _nfc(value: str) -> str:
    return unicodedata.normalize("NFC", value)


def _span_matches(context: str, observed: str, offset: int, case_fold: bool) -> bool:
    if offset < 0 or offset + len(observed) > len(context):
        return False
    chunk = context[offset : offset + len(observed)]
    if case_fold:
        return chunk.lower() == observed.lower()
    return chunk == observed


def locate_target_span(
    context: str,
    observed: str,
    hint: int | None = None,
    *,
    case_fold: bool = False,
    datapoint_id: str | None = None,
) -> tuple[int, int]:
    """Find the character span of the observed token within its context.

    A valid hint offset is returned unchanged; otherwise the first
    occurrence under word-boundary matching wins, falling back to the first
    plain substring occurrence.
    """
    if hint is not None and _span_matches(context, observed, hint, case_fold):
        return (hint, hint + len(observed))
    flags = re.IGNORECASE if case_fold else 0
    pattern = r"(?<!\w)" + re.escape(observed) + r"(?!\w)"
    match = re.search(pattern, context, flags)
    if match is None:
        match = re.search(re.escape(observed), context, flags)
    if match is None:
        who = f" in datapoint {datapoint_id!r}" if datapoint_id else ""
        raise ValidationError(f"target {observed!r} not found in context{who}")
    return (match.start(), match.end())


def _validate_record(
    raw: dict,
    inventory: DtagInventory,
    unknown_dtag: str,
    case_fold: bool,
    seen_ids: set[str],
    warn_unknown: bool,
) -> DataPoint | RejectionEntry:
    rec_id = str(raw.get("id", "")).strip()
    for field in _FIELDS:
        value = raw.get(field)
        if value is None or str(value).strip() == "":
            return RejectionEntry(id=rec_id or "<unknown>", reason=f"missing field: {field}")

    if rec_id in seen_ids:
        return RejectionEntry(id=rec_id, reason="duplicate id")

    standard = _nfc(str(raw["standard"]).strip())
    observed = _nfc(str(raw["observed"]).strip())
    context = _nfc(str(raw["context"]))
    dtag = str(raw["dtag"]).strip()

    offset = raw.get("target_offset")
    if offset in ("", None):
        offset = None
    else:
        try:
            offset = int(offset)
        except (TypeError, ValueError):
            return RejectionEntry(id=rec_id, reason="target_offset not an integer")

    if dtag not in inventory:
        if unknown_dtag == "reject":
            return RejectionEntry(id=rec_id, reason=f"unknown dtag: {dtag}")
        if not inventory.register(dtag):
            return RejectionEntry(
                id=rec_id, reason=f"unknown dtag: {dtag} (inventory at {MAX_DTAG_CODES}-code cap)"
            )
        if warn_unknown:
            log.warning("registered previously unseen dtag %r (datapoint %s)", dtag, rec_id)

    if offset is not None:
        if not _span_matches(context, observed, offset, case_fold):
            return RejectionEntry(id=rec_id, reason="target not found at given offset")
    else:
        try:
            locate_target_span(context, observed, case_fold=case_fold, datapoint_id=rec_id)
        except ValidationError:
            return RejectionEntry(id=rec_id, reason="target not found")

    seen_ids.add(rec_id)
    return DataPoint(
        id=rec_id,
        standard=standard,
        observed=observed,
        context=context,
        dtag=dtag,
        target_offset=offset,
    )


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_no, exc


def _iter_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.DictReader(fh), 1):
            yield line_no, dict(row)


def load_dataset(
    path: str | Path,
    format: str | None = None,
    *,
    inventory: DtagInventory | None = None,
    unknown_dtag: str = "register",
    case_fold: bool = False,
    warn_unknown: bool = True,
) -> tuple[list[DataPoint], list[RejectionEntry]]:
    """Load and validate a dataset, returning (datapoints, rejections).

    ``format`` is "jsonl" or "csv"; inferred from the suffix when omitted.
    Unknown dtags are registered dynamically by default (``unknown_dtag``
    set to "reject" rejects such records instead).  All strings are
    NFC-normalized, so character counts are Unicode scalar counts.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"dataset file not found: {path}")
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise ValidationError(f"unknown dataset format: {format!r}")

    inventory = inventory if inventory is not None else DtagInventory()
    rows = _iter_csv(path) if format == "csv" else _iter_jsonl(path)

    datapoints: list[DataPoint] = []
    rejections: list[RejectionEntry] = []
    seen_ids: set[str] = set()
    for line_no, raw in rows:
        if isinstance(raw, json.JSONDecodeError):
            rejections.append(RejectionEntry(id=f"<line {line_no}>", reason=f"invalid JSON: {raw.msg}"))
            continue
        if not isinstance(raw, dict):
            rejections.append(RejectionEntry(id=f"<line {line_no}>", reason="record is not an object"))
            continue
        result = _validate_record(raw, inventory, unknown_dtag, case_fold, seen_ids, warn_unknown)
        if isinstance(result, DataPoint):
            datapoints.append(result)
        else:
            rejections.append(result)
    return datapoints, rejections


def save_dataset(path: str | Path, datapoints: list[DataPoint], format: str | None = None) -> None:
    """Serialize datapoints back to JSONL or CSV (round-trips with load_dataset)."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for dp in datapoints:
                record = {
                    "id": dp.id,
                    "standard": dp.standard,
                    "observed": dp.observed,
                    "context": dp.context,
                    "dtag": dp.dtag,
                }
                if dp.target_offset is not None:
                    record["target_offset"] = dp.target_offset
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[*_FIELDS, "target_offset"])
            writer.writeheader()
            for dp in datapoints:
                writer.writerow(
                    {
                        "id": dp.id,
                        "standard": dp.standard,
                        "observed": dp.observed,
                        "context": dp.context,
                        "dtag": dp.dtag,
                        "target_offset": "" if dp.target_offset is None else dp.target_offset,
                    }
                )
    else:
        raise ValidationError(f"unknown dataset format: {format!r}")


def write_rejections(path: str | Path, rejections: list[RejectionEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in rejections:
            fh.write(json.dumps({"id": entry.id, "reason": entry.reason}, ensure_ascii=False) + "\n")


def truncate_by_char_limit(datapoints: list[DataPoint], limit: int) -> list[DataPoint]:
    """Keep datapoints whose context fits in ``limit`` characters, order preserved."""
    if limit <= 0:
        raise ValidationError(f"character limit must be positive, got {limit}")
    return [dp for dp in datapoints if len(dp.context) <= limit]


def tag_histogram(datapoints: list[DataPoint]) -> dict[str, int]:
    """Count datapoints per dtag; counts sum to the input size."""
    return dict(Counter(dp.dtag for dp in datapoints))
