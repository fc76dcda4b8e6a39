"""Historical block-gas ingestion and batch-average analysis.

Input is a CSV of per-block ``number, gas_used, gas_limit`` rows (column
names remappable).  Blocks are grouped into consecutive fixed-size batches;
each batch's average relative size ``y_i = mean(gas_used / gas_limit)``
lives in [0, 1] with the protocol target at 0.5, since the target is half
the block limit.  Doubling converts to target-relative units, which are
compared against the closed-form band ``[1, 2 * factor(d)]``.

The README documents the BigQuery export that produces compatible data for
the real chain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .analysis import theorem1_upper_bound
from .errors import DomainError, InvariantError, ParseError

#: absolute slack when comparing against band edges (double-precision rounding)
BAND_SLACK = 1e-9


@dataclass(frozen=True)
class ColumnMap:
    """Maps the required fields to CSV column names."""

    number: str = "number"
    gas_used: str = "gas_used"
    gas_limit: str = "gas_limit"


@dataclass(frozen=True)
class BlockRecord:
    number: int
    gas_used: float
    gas_limit: float

    @property
    def relative_size(self) -> float:
        return self.gas_used / self.gas_limit


@dataclass(frozen=True)
class BatchSummary:
    """Average relative gas use over one batch of consecutive blocks.
    ``partial`` marks a trailing batch shorter than the batch size."""

    batch_index: int
    first_block: int
    avg_relative_size: float
    count: int
    partial: bool = False


@dataclass(frozen=True)
class SplitStats:
    mean_relative: float
    overshoot_pct: float
    n_batches: int

    def to_json_dict(self) -> dict:
        return {
            "mean_relative": self.mean_relative,
            "overshoot_pct": self.overshoot_pct,
            "n_batches": self.n_batches,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Aggregate comparison of batch averages against the theoretical band.

    ``mean_relative`` is limit-relative (target at 0.5); ``overshoot_pct``
    and the band are target-relative, so a 2.9% overshoot reads as
    ``2 * mean_relative = 1.029``.
    """

    d: float
    mean_relative: float
    overshoot_pct: float
    band: tuple[float, float]
    in_band: bool
    n_batches: int
    n_above_band: int
    n_below_target: int
    pre: Optional[SplitStats] = None
    post: Optional[SplitStats] = None

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "mean_relative": self.mean_relative,
            "overshoot_pct": self.overshoot_pct,
            "band": [self.band[0], self.band[1]],
            "in_band": self.in_band,
            "n_batches": self.n_batches,
            "n_above_band": self.n_above_band,
            "n_below_target": self.n_below_target,
            "pre": self.pre.to_json_dict() if self.pre else None,
            "post": self.post.to_json_dict() if self.post else None,
        }


def ingest_csv(path, schema: Optional[ColumnMap] = None) -> list[BlockRecord]:
    """Parse, validate and sort per-block gas records.

    Raises :class:`ParseError` on malformed cells (reporting row and
    column) and :class:`InvariantError` on gas_used > gas_limit,
    non-positive limits or duplicate block numbers.
    """
    schema = schema or ColumnMap()
    records: list[BlockRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file: no header row")
        missing = [
            name
            for name in (schema.number, schema.gas_used, schema.gas_limit)
            if name not in reader.fieldnames
        ]
        if missing:
            raise ParseError(
                f"missing column(s) {', '.join(missing)}; "
                f"found {', '.join(reader.fieldnames)}"
            )
        for i, row in enumerate(reader, start=1):
            records.append(_parse_row(row, i, schema))
    records.sort(key=lambda r: r.number)
    for prev, cur in zip(records, records[1:]):
        if cur.number == prev.number:
            raise InvariantError(f"duplicate block number {cur.number}")
    return records


def _parse_row(row: dict, i: int, schema: ColumnMap) -> BlockRecord:
    def _num(column: str, conv):
        raw = row.get(column)
        if raw is None or raw == "":
            raise ParseError(
                f"row {i}: missing value in column {column!r}",
                row=i,
                column=column,
            )
        try:
            return conv(raw)
        except ValueError:
            raise ParseError(
                f"row {i}: cannot parse {raw!r} in column {column!r}",
                row=i,
                column=column,
            ) from None

    number = _num(schema.number, int)
    gas_used = _num(schema.gas_used, float)
    gas_limit = _num(schema.gas_limit, float)
    if gas_limit <= 0:
        raise InvariantError(
            f"row {i} (block {number}): gas_limit must be positive, "
            f"got {gas_limit}"
        )
    if not (0 <= gas_used <= gas_limit):
        raise InvariantError(
            f"row {i} (block {number}): gas_used {gas_used} outside "
            f"[0, gas_limit={gas_limit}]"
        )
    return BlockRecord(number=number, gas_used=gas_used, gas_limit=gas_limit)


def batch_averages(
    records: Sequence[BlockRecord], batch_size: int
) -> list[BatchSummary]:
    """Consecutive fixed-size batches by position; a trailing short batch
    is emitted with its true count and flagged as partial."""
    if batch_size < 1:
        raise DomainError(f"batch_size must be >= 1, got {batch_size}")
    summaries = []
    for start in range(0, len(records), batch_size):
        chunk = records[start : start + batch_size]
        avg = math.fsum(r.relative_size for r in chunk) / len(chunk)
        summaries.append(
            BatchSummary(
                batch_index=start // batch_size,
                first_block=chunk[0].number,
                avg_relative_size=avg,
                count=len(chunk),
                partial=len(chunk) < batch_size,
            )
        )
    return summaries


def _split_stats(batches: list[BatchSummary]) -> Optional[SplitStats]:
    if not batches:
        return None
    total = sum(b.count for b in batches)
    mean = math.fsum(b.avg_relative_size * b.count for b in batches) / total
    return SplitStats(
        mean_relative=mean,
        overshoot_pct=(2.0 * mean - 1.0) * 100.0,
        n_batches=len(batches),
    )


def bound_comparison(
    summaries: Sequence[BatchSummary],
    d: float,
    split_height: Optional[int] = None,
    include_partial: bool = False,
) -> ComparisonReport:
    """Compare batch averages (doubled, i.e. target-relative) against the
    band ``[1, 2*factor(d)]``.

    Partial batches are excluded from aggregates unless ``include_partial``.
    With ``split_height``, batches whose first block is below the split are
    aggregated separately from the rest (pre/post analysis).
    """
    factor = theorem1_upper_bound(d).factor
    band = (1.0, 2.0 * factor)
    used = [s for s in summaries if include_partial or not s.partial]
    if not used:
        raise DomainError("no batches to aggregate (all partial?)")

    n_above = sum(1 for s in used if 2.0 * s.avg_relative_size > band[1] + BAND_SLACK)
    n_below = sum(1 for s in used if 2.0 * s.avg_relative_size < band[0] - BAND_SLACK)
    agg = _split_stats(used)
    rel_target = 2.0 * agg.mean_relative
    in_band = band[0] - BAND_SLACK <= rel_target <= band[1] + BAND_SLACK

    pre = post = None
    if split_height is not None:
        pre = _split_stats([s for s in used if s.first_block < split_height])
        post = _split_stats([s for s in used if s.first_block >= split_height])

    return ComparisonReport(
        d=d,
        mean_relative=agg.mean_relative,
        overshoot_pct=agg.overshoot_pct,
        band=band,
        in_band=in_band,
        n_batches=len(used),
        n_above_band=n_above,
        n_below_target=n_below,
        pre=pre,
        post=post,
    )


def write_batches_csv(summaries: Sequence[BatchSummary], path) -> None:
    """batch_index,first_block,avg_relative_size,count rows."""
    with open(path, "w", newline="") as fh:
        fh.write("batch_index,first_block,avg_relative_size,count\n")
        for s in summaries:
            fh.write(
                f"{s.batch_index},{s.first_block},"
                f"{format(s.avg_relative_size, '.12g')},{s.count}\n"
            )
