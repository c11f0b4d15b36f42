"""Lazy readers for sample streams stored as CSV.

Decomposition files hold one sample per line as p comma-separated floats.
Completion files hold p fields per line, each a float (observed) or empty
(unobserved).
"""
import csv
import logging
import math
from collections.abc import Iterator
from pathlib import Path

import numpy as np

from app.core.exceptions import StreamParseError
from app.models.sample import SampleVector

logger = logging.getLogger(__name__)


def _parse_field(field: str, index: int, line_number: int) -> float:
    try:
        value = float(field)
    except ValueError:
        raise StreamParseError(f"field {index + 1} ({field!r}) is not a number", line_number) from None
    if not math.isfinite(value):
        raise StreamParseError(f"field {index + 1} is not finite ({field!r})", line_number)
    return value


def _parse_row(fields: list[str], line_number: int, completion: bool) -> SampleVector:
    if not completion:
        values = [_parse_field(field, k, line_number) for k, field in enumerate(fields)]
        return SampleVector(values=np.array(values))
    values = np.zeros(len(fields))
    mask = np.zeros(len(fields), dtype=bool)
    for k, field in enumerate(fields):
        if field.strip():
            values[k] = _parse_field(field, k, line_number)
            mask[k] = True
    return SampleVector(values=values, mask=mask)


def ingest_stream(path: Path | str, completion: bool = False, p: int | None = None) -> Iterator[SampleVector]:
    """Yield one sample per line without reading the whole file.

    Raises:
        StreamParseError: On a malformed or non-finite field, or a line whose
            field count differs from ``p`` (or from the first line).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        width = p
        for fields in reader:
            line_number = reader.line_num
            if not fields:
                logger.debug("Skipping blank line %d of %s", line_number, path)
                continue
            if width is None:
                width = len(fields)
            if len(fields) != width:
                raise StreamParseError(f"expected {width} fields, found {len(fields)}", line_number)
            yield _parse_row(fields, line_number, completion)


def sniff_dimension(path: Path | str) -> int:
    """Number of fields on the first non-blank line."""
    with open(path, newline="", encoding="utf-8") as handle:
        for fields in csv.reader(handle):
            if fields:
                return len(fields)
    raise StreamParseError(f"{path} contains no samples")


def read_matrix(path: Path | str, completion: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Materialize a whole file as a p x n matrix and mask (multi-pass completion only)."""
    columns, masks = [], []
    for sample in ingest_stream(path, completion=completion):
        columns.append(sample.values)
        masks.append(sample.mask if sample.mask is not None else np.ones(sample.p, dtype=bool))
    if not columns:
        raise StreamParseError(f"{path} contains no samples")
    return np.column_stack(columns), np.column_stack(masks)
