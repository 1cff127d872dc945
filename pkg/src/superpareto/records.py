"""Firm-year productivity records, CSV ingestion and aggregation levels.

Records are held column-wise in a :class:`Panel` so that synthetic panels
with millions of firm-periods stay cheap; iterating a panel yields
:class:`ProductivityRecord` objects.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DomainError, InsufficientDataError, SchemaError

logger = logging.getLogger(__name__)

__all__ = [
    "CSV_COLUMNS",
    "LEVELS",
    "ProductivityRecord",
    "Panel",
    "as_panel",
    "ingest_csv",
    "write_csv",
    "aggregate",
    "aggregate_weighted",
]

CSV_COLUMNS = ("firm_id", "year", "sector_id", "sales_yen", "employees")
LEVELS = ("worker", "firm", "sector")


@dataclass(frozen=True)
class ProductivityRecord:
    """One firm-year observation.  ``c`` is sales per employee (yen/person)."""

    firm_id: str
    year: int
    sector_id: str
    sales_yen: float
    employees: int
    c: float = field(init=False)

    def __post_init__(self):
        if int(self.employees) != self.employees or self.employees < 1:
            raise DomainError(f"employees must be a positive integer, got {self.employees!r}")
        if not self.sales_yen > 0 or not np.isfinite(self.sales_yen):
            raise DomainError(f"sales must be positive, got {self.sales_yen!r}")
        object.__setattr__(self, "employees", int(self.employees))
        object.__setattr__(self, "sales_yen", float(self.sales_yen))
        object.__setattr__(self, "c", self.sales_yen / self.employees)


class Panel:
    """Column store of productivity records.

    Behaves as a read-only sequence of :class:`ProductivityRecord`.
    Integer indexing returns a record; slices, index arrays and boolean
    masks return a new panel.
    """

    def __init__(self, firm_id, year, sector_id, sales_yen, employees, *, rejected=None):
        self.firm_id = np.asarray(firm_id, dtype=str)
        self.year = np.asarray(year, dtype=np.int64)
        self.sector_id = np.asarray(sector_id, dtype=str)
        self.sales_yen = np.asarray(sales_yen, dtype=float)
        self.employees = np.asarray(employees, dtype=np.int64)
        n = len(self.firm_id)
        if not all(len(col) == n for col in (self.year, self.sector_id, self.sales_yen, self.employees)):
            raise ValueError("panel columns must have equal length")
        if n and (np.any(self.employees < 1) or np.any(~(self.sales_yen > 0))):
            raise DomainError("panel rows need positive sales and at least one employee")
        self.rejected = list(rejected or [])

    @classmethod
    def from_records(cls, records):
        records = list(records)
        return cls(
            [r.firm_id for r in records],
            [r.year for r in records],
            [r.sector_id for r in records],
            [r.sales_yen for r in records],
            [r.employees for r in records],
        )

    @classmethod
    def empty(cls):
        return cls([], [], [], [], [])

    @property
    def c(self):
        return self.sales_yen / self.employees

    def __len__(self):
        return len(self.firm_id)

    def _record(self, i):
        return ProductivityRecord(
            str(self.firm_id[i]), int(self.year[i]), str(self.sector_id[i]),
            float(self.sales_yen[i]), int(self.employees[i]),
        )

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            n = len(self)
            if key < 0:
                key += n
            if not 0 <= key < n:
                raise IndexError("panel index out of range")
            return self._record(key)
        return Panel(
            self.firm_id[key], self.year[key], self.sector_id[key],
            self.sales_yen[key], self.employees[key],
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self._record(i)

    def __eq__(self, other):
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            len(self) == len(other)
            and np.array_equal(self.firm_id, other.firm_id)
            and np.array_equal(self.year, other.year)
            and np.array_equal(self.sector_id, other.sector_id)
            and np.array_equal(self.sales_yen, other.sales_yen)
            and np.array_equal(self.employees, other.employees)
        )

    def __repr__(self):
        return f"Panel(n_records={len(self)}, years={self.years()})"

    def years(self):
        return [int(y) for y in np.unique(self.year)]

    def for_year(self, year):
        return self[self.year == year]

    def by_year(self):
        """Mapping year -> panel, in increasing year order."""
        return {y: self.for_year(y) for y in self.years()}

    def canonical(self):
        """Rows sorted by (year, firm, sector, sales, employees).

        Downstream sums then do not depend on the input row order.
        """
        if not len(self):
            return self
        order = np.lexsort((
            self.employees, self.sales_yen,
            self.sector_id, self.firm_id, self.year,
        ))
        return self[order]

    @staticmethod
    def concat(panels):
        panels = list(panels)
        if not panels:
            return Panel.empty()
        return Panel(
            np.concatenate([p.firm_id for p in panels]),
            np.concatenate([p.year for p in panels]),
            np.concatenate([p.sector_id for p in panels]),
            np.concatenate([p.sales_yen for p in panels]),
            np.concatenate([p.employees for p in panels]),
        )


def as_panel(records):
    if isinstance(records, Panel):
        return records
    return Panel.from_records(records)


def ingest_csv(path):
    """Read a productivity CSV into a :class:`Panel`.

    Malformed rows are skipped and listed in ``panel.rejected`` as
    ``(line_number, message)``; a missing column raises
    :class:`SchemaError`.
    """
    path = Path(path)
    cols = {k: [] for k in CSV_COLUMNS}
    rejected = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        for row in reader:
            line = reader.line_num
            try:
                firm_id = row["firm_id"].strip()
                sector_id = row["sector_id"].strip()
                year = int(row["year"])
                sales = float(row["sales_yen"])
                employees_raw = float(row["employees"])
            except (TypeError, ValueError, AttributeError) as exc:
                rejected.append((line, f"unparseable field: {exc}"))
                continue
            if not firm_id:
                rejected.append((line, "empty firm_id"))
                continue
            if employees_raw == 0:
                rejected.append((line, "employees = 0, productivity undefined (division by zero)"))
                continue
            if not np.isfinite(employees_raw) or employees_raw < 0 or employees_raw != int(employees_raw):
                rejected.append((line, f"employees must be a positive integer, got {row['employees']!r}"))
                continue
            if not np.isfinite(sales) or sales <= 0:
                rejected.append((line, f"sales must be positive, got {row['sales_yen']!r}"))
                continue
            cols["firm_id"].append(firm_id)
            cols["year"].append(year)
            cols["sector_id"].append(sector_id)
            cols["sales_yen"].append(sales)
            cols["employees"].append(int(employees_raw))
    for line, msg in rejected:
        logger.warning("%s:%d: row rejected: %s", path, line, msg)
    return Panel(
        cols["firm_id"], cols["year"], cols["sector_id"],
        cols["sales_yen"], cols["employees"], rejected=rejected,
    )


def write_csv(records, path):
    """Write records with the ingestion header; floats use ``repr`` so they round-trip exactly."""
    panel = as_panel(records)
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        lines = (
            f"{f},{y},{s},{v!r},{e}\n"
            for f, y, s, v, e in zip(
                panel.firm_id, panel.year.tolist(), panel.sector_id,
                panel.sales_yen.tolist(), panel.employees.tolist(),
            )
        )
        fh.writelines(lines)
    return path


def _group_ratio(keys, sales, employees):
    uniq, inv = np.unique(keys, return_inverse=True)
    y = np.bincount(inv, weights=sales, minlength=len(uniq))
    l = np.bincount(inv, weights=employees.astype(float), minlength=len(uniq))
    return uniq, y / l, l


def aggregate_weighted(records, level):
    """Distinct productivity values with their multiplicities.

    ``worker`` gives each record's ``c`` weighted by its employees (equal
    values merged), ``firm`` one ratio-of-sums value per firm with unit
    weight, ``sector`` one ratio-of-sums value per sector with unit weight.
    """
    panel = as_panel(records)
    if not len(panel):
        raise InsufficientDataError("cannot aggregate an empty sample")
    if level == "worker":
        values, inv = np.unique(panel.c, return_inverse=True)
        weights = np.bincount(inv, weights=panel.employees.astype(float), minlength=len(values))
        return values, weights
    if level == "firm":
        _, values, _ = _group_ratio(panel.firm_id, panel.sales_yen, panel.employees)
    elif level == "sector":
        _, values, _ = _group_ratio(panel.sector_id, panel.sales_yen, panel.employees)
    else:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    return values, np.ones_like(values)


def aggregate(records, level):
    """Productivity sample at one aggregation level.

    ``worker`` replicates every record's ``c`` once per employee, ``firm``
    yields one value per firm and ``sector`` one value per sector, both as
    total sales over total employees.
    """
    panel = as_panel(records)
    if not len(panel):
        raise InsufficientDataError("cannot aggregate an empty sample")
    if level == "worker":
        return np.repeat(panel.c, panel.employees)
    values, _ = aggregate_weighted(panel, level)
    return values
