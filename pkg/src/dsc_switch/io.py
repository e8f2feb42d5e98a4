"""CSV tables with a leading ``#`` metadata block.

Layout of a written file::

    # <resolved run configuration, one TOML line per row>
    ## <free-form notes, e.g. conventions>
    col_a,col_b,...
    1.0,0.5,...

Floats are written with ``repr`` so that every value round-trips exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class SeriesTable:
    """Named columns over rows.

    When ``time_indexed`` is set the first column must be a strictly
    increasing time axis; long-format tables (one row per grid cell) clear it.
    """

    columns: tuple[str, ...]
    data: np.ndarray
    time_indexed: bool = True
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.size == 0:
            data = data.reshape(0, len(self.columns))
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise ValidationError(
                f"table data shape {data.shape} does not match {len(self.columns)} columns"
            )
        if self.time_indexed and data.shape[0] > 1 and np.any(np.diff(data[:, 0]) <= 0):
            raise ValidationError(f"column {self.columns[0]!r} is not strictly increasing")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def write_series_csv(
    table: SeriesTable,
    path: Union[str, Path],
    metadata: Optional[str] = None,
    notes: Sequence[str] = (),
) -> None:
    """Write ``table`` to ``path``.

    ``metadata`` is a TOML document (typically the resolved run config) whose
    lines are prefixed with ``# ``; ``notes`` and ``table.notes`` become
    ``## `` lines.
    """
    path = Path(path)
    lines = []
    if metadata:
        lines.extend(f"# {line}" if line else "#" for line in metadata.rstrip("\n").split("\n"))
    lines.extend(f"## {note}" for note in (*table.notes, *notes))
    lines.append(",".join(table.columns))
    lines.extend(",".join(repr(v) for v in row) for row in table.data.tolist())
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_series_csv(path: Union[str, Path]) -> tuple[SeriesTable, str]:
    """Inverse of :func:`write_series_csv`; returns the table and the metadata TOML."""
    meta, notes, header, rows = [], [], None, []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if header is None and line.startswith("##"):
                notes.append(line[3:])
            elif header is None and line.startswith("#"):
                meta.append(line[2:])
            elif header is None:
                header = tuple(line.split(","))
            elif line:
                rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise ValidationError(f"{path}: missing header line")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    time_indexed = header[0] == "t" and not (len(rows) > 1 and np.any(np.diff(data[:, 0]) <= 0))
    return SeriesTable(header, data, time_indexed, tuple(notes)), "\n".join(meta) + ("\n" if meta else "")
