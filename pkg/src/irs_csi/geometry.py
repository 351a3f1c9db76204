"""Panel geometry: reflecting-unit positions, RUS blocks and distances.

The IRS lies in the y-z plane with the lower-left unit at the origin.  Units
are numbered 1..N column-major: the index runs up the first column, then the
second, and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np


class Point3(NamedTuple):
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def of(cls, value) -> "Point3":
        arr = np.asarray(value, dtype=float).reshape(3)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"point has non-finite components: {value!r}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))


@dataclass(frozen=True)
class IrsLayout:
    n_rows: int = 64
    n_cols: int = 128
    row_spacing: float = 0.005
    col_spacing: float = 0.005

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("n_rows and n_cols must be positive")
        if not (self.row_spacing > 0 and self.col_spacing > 0):
            raise ValueError("row_spacing and col_spacing must be positive")

    @property
    def size(self) -> int:
        return self.n_rows * self.n_cols

    def row_col(self, n: int) -> tuple[int, int]:
        """Zero-based (row, col) of 1-based unit index ``n``."""
        if not 1 <= n <= self.size:
            raise IndexError(f"unit index {n} outside 1..{self.size}")
        return (n - 1) % self.n_rows, (n - 1) // self.n_rows

    def index_of(self, row: int, col: int) -> int:
        return col * self.n_rows + row + 1

    def positions(self) -> np.ndarray:
        """(N, 3) array of every unit position, in unit-index order (read-only)."""
        return self._positions

    @cached_property
    def _positions(self) -> np.ndarray:
        cols, rows = np.divmod(np.arange(self.size), self.n_rows)
        out = np.zeros((self.size, 3))
        out[:, 1] = cols * self.col_spacing
        out[:, 2] = rows * self.row_spacing
        out.flags.writeable = False
        return out


@dataclass(frozen=True)
class RusSpec:
    member_indices: tuple[int, ...]
    center: Point3
    rus_rows: int
    rus_cols: int
    origin: tuple[int, int]  # zero-based (row, col) of the lower-left member

    @property
    def size(self) -> int:
        return len(self.member_indices)


def unit_position(layout: IrsLayout, n: int) -> Point3:
    row, col = layout.row_col(n)
    return Point3(0.0, layout.col_spacing * col, layout.row_spacing * row)


def distance(a, b) -> float:
    return float(math.dist(tuple(a), tuple(b)))


def make_rus(layout: IrsLayout, row0: int, col0: int, rus_rows: int, rus_cols: int) -> RusSpec:
    """RUS block whose lower-left member sits at zero-based ``(row0, col0)``."""
    if rus_rows < 1 or rus_cols < 1:
        raise ValueError("RUS dimensions must be positive")
    if row0 < 0 or col0 < 0 or row0 + rus_rows > layout.n_rows or col0 + rus_cols > layout.n_cols:
        raise ValueError(
            f"RUS block {rus_rows}x{rus_cols} at (row={row0}, col={col0}) "
            f"does not fit a {layout.n_rows}x{layout.n_cols} panel"
        )
    # column-major member order, matching codeword element order
    members = tuple(
        layout.index_of(row0 + r, col0 + q) for q in range(rus_cols) for r in range(rus_rows)
    )
    pos = layout.positions()[np.asarray(members) - 1]
    return RusSpec(members, Point3.of(pos.mean(axis=0)), rus_rows, rus_cols, (row0, col0))


def _overlaps(a: tuple[int, int], b: tuple[int, int], rows: int, cols: int) -> bool:
    return abs(a[0] - b[0]) < rows and abs(a[1] - b[1]) < cols


def _default_origins(layout: IrsLayout, count: int, rows: int, cols: int) -> list[tuple[int, int]]:
    top = layout.n_rows - rows
    right = layout.n_cols - cols
    center = (top // 2, right // 2)
    if count == 1:
        return [center]
    # diagonal corners first: the first two are as far apart as possible and
    # the first three are never collinear
    corners = [(0, 0), (top, right), (top, 0), (0, right)]
    chosen = corners[: min(count, 4)]
    if count >= 5:
        chosen.append(center)
    if count > 5:
        cand_rows = sorted(set(range(0, top + 1, rows)) | {top, center[0]})
        cand_cols = sorted(set(range(0, right + 1, cols)) | {right, center[1]})
        candidates = [(r, q) for q in cand_cols for r in cand_rows]

        def centre_of(o):
            return np.array([o[1] * layout.col_spacing, o[0] * layout.row_spacing])

        while len(chosen) < count:
            best, best_score = None, -1.0
            for cand in candidates:
                if any(_overlaps(cand, c, rows, cols) for c in chosen):
                    continue
                score = min(np.linalg.norm(centre_of(cand) - centre_of(c)) for c in chosen)
                if score > best_score:
                    best, best_score = cand, score
            if best is None:
                raise ValueError(f"cannot place {count} non-overlapping {rows}x{cols} RUS blocks")
            chosen.append(best)
    return chosen


def place_rus(
    layout: IrsLayout,
    count: int = 5,
    rus_rows: int = 4,
    rus_cols: int = 4,
    origins: Sequence[Sequence[int]] | None = None,
) -> list[RusSpec]:
    """Place ``count`` non-overlapping RUS blocks on the panel.

    Without explicit ``origins`` the blocks go to the panel corners (diagonal
    pairs first), then the centre, then greedily to the free position farthest
    from those already chosen.  Raises ``ValueError`` when blocks do not fit
    or overlap.
    """
    if count < 1:
        raise ValueError("need at least one RUS")
    if rus_rows > layout.n_rows or rus_cols > layout.n_cols:
        raise ValueError(f"{rus_rows}x{rus_cols} RUS does not fit the panel")
    if origins is None:
        picked = _default_origins(layout, count, rus_rows, rus_cols)
    else:
        picked = [(int(o[0]), int(o[1])) for o in origins]
        if len(picked) != count:
            raise ValueError(f"got {len(picked)} RUS origins for count={count}")
    for i, a in enumerate(picked):
        for b in picked[:i]:
            if _overlaps(a, b, rus_rows, rus_cols):
                raise ValueError(f"RUS blocks at {b} and {a} overlap")
    return [make_rus(layout, r, q, rus_rows, rus_cols) for r, q in picked]
