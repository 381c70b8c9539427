"""Dataset container, covariate standardization, and delimited-table ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConstantColumn, TableFormatError

_STANDARD_TOL = 1e-9


@dataclass(frozen=True)
class Dataset:
    """An (n, p) covariate matrix with a length-n scalar response.

    Covariate indices are 1-based everywhere in the public API, matching the
    column numbering reported by the selection engines. ``column_means`` and
    ``column_sds`` record the standardization applied (None when raw).
    """

    x: np.ndarray
    y: np.ndarray
    standardized: bool = False
    column_means: np.ndarray | None = None
    column_sds: np.ndarray | None = None

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("x must be a 2-d array")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("y must be a 1-d array with one entry per row of x")
        if x.shape[0] < 2:
            raise ValueError("need at least 2 observations")
        if x.shape[1] < 1:
            raise ValueError("need at least 1 covariate column")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError("x and y must be finite (no missing values)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.standardized:
            means = x.mean(axis=0)
            sds = x.std(axis=0, ddof=1)
            if np.abs(means).max() > _STANDARD_TOL or np.abs(sds - 1.0).max() > _STANDARD_TOL:
                raise ValueError("standardized=True but columns are not mean 0 / sd 1")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def standardize(dataset: Dataset) -> Dataset:
    """Center and scale every covariate column to sample mean 0 and sd 1.

    The response is left untouched. Raises :class:`ConstantColumn` for the
    first (lowest-index) column with zero sample sd.
    """
    x = dataset.x
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    zero = np.flatnonzero(sds == 0.0)
    if zero.size:
        raise ConstantColumn(int(zero[0]) + 1)
    scaled = (x - means) / sds
    return Dataset(scaled, dataset.y, standardized=True,
                   column_means=means, column_sds=sds)


def _detect_delimiter(sample: str) -> str:
    # Auto-detection is deliberately limited to comma and tab.
    counts = {",": sample.count(","), "\t": sample.count("\t")}
    if counts[","] == 0 and counts["\t"] == 0:
        raise TableFormatError(
            "could not detect a comma or tab delimiter; pass --delimiter")
    return "," if counts[","] >= counts["\t"] else "\t"


def load_table(path: str, response: str, delimiter: str | None = None,
               ) -> tuple[Dataset, list[str], str]:
    """Read a delimited numeric table with a header row.

    ``response`` names the response column, either by header name or by
    1-based position. Every remaining column becomes a covariate, in file
    order. Returns ``(dataset, covariate_names, response_name)`` with the
    dataset unstandardized.

    Values are parsed with ``float`` so round-trippable decimal literals are
    preserved bit-exactly.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        head = fh.readline()
        if not head.strip():
            raise TableFormatError("input file is empty")
        if delimiter is None:
            delimiter = _detect_delimiter(head)
        fh.seek(0)
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        header = [h.strip() for h in header]
        if len(header) < 2:
            raise TableFormatError("need at least 2 columns (response + covariate)")

        if response in header:
            resp_idx = header.index(response)
        else:
            try:
                pos = int(response)
            except ValueError:
                raise TableFormatError(f"response column {response!r} not found")
            if not 1 <= pos <= len(header):
                raise TableFormatError(f"response column index {pos} out of range")
            resp_idx = pos - 1
        resp_name = header[resp_idx]
        cov_names = [h for i, h in enumerate(header) if i != resp_idx]

        rows = []
        for lineno, raw in enumerate(reader, start=1):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if len(raw) != len(header):
                raise TableFormatError(
                    f"expected {len(header)} fields, found {len(raw)}", row=lineno)
            parsed = []
            for cell, name in zip(raw, header):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise TableFormatError(
                        f"non-numeric value {cell.strip()!r}", row=lineno, column=name)
            rows.append(parsed)

    if len(rows) < 2:
        raise TableFormatError("need at least 2 data rows")
    table = np.asarray(rows, dtype=np.float64)
    y = table[:, resp_idx]
    x = np.delete(table, resp_idx, axis=1)
    return Dataset(x, y), cov_names, resp_name
