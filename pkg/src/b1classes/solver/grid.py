"""Nodal grid fields on rectangles and their text / CSV formats.

Text format: a header line ``nx ny hx hy ox oy`` followed by the
``(ny+1)(nx+1)`` nodal values in row-major order (row ``j`` holds
``y = oy + j hy``), one value per line with 17 significant digits.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import InvariantViolation, UsageError
from ..io_util import atomic_write_text


@dataclass
class GridField:
    """Nodal values ``values[j, i] = u(ox + i hx, oy + j hy)``.

    ``times``/``snapshots`` hold the stored time levels of parabolic runs
    (``values`` is then the last one).
    """

    nx: int
    ny: int
    hx: float
    hy: float
    origin: Tuple[float, float] = (0.0, 0.0)
    values: np.ndarray = None
    times: List[float] = field(default_factory=list)
    snapshots: List[np.ndarray] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise UsageError("grid needs at least one cell per direction")
        if not (self.hx > 0 and self.hy > 0):
            raise UsageError("grid spacings must be positive")
        if self.values is None:
            self.values = np.zeros((self.ny + 1, self.nx + 1))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.ny + 1, self.nx + 1):
            if self.values.size != (self.ny + 1) * (self.nx + 1):
                raise InvariantViolation("value count does not match grid extents")
            self.values = self.values.reshape(self.ny + 1, self.nx + 1)
        if not np.all(np.isfinite(self.values)):
            raise InvariantViolation("grid field has non-finite values")

    @classmethod
    def unit_square(cls, n: int, values=None) -> "GridField":
        return cls(n, n, 1.0 / n, 1.0 / n, (0.0, 0.0), values)

    @property
    def shape(self):
        return self.values.shape

    def coords(self):
        """Meshgrid arrays ``(X, Y)`` of node coordinates."""
        x = self.origin[0] + self.hx * np.arange(self.nx + 1)
        y = self.origin[1] + self.hy * np.arange(self.ny + 1)
        return np.meshgrid(x, y)

    def points(self):
        """Node coordinates stacked on the last axis, shape ``(ny+1, nx+1, 2)``."""
        X, Y = self.coords()
        return np.stack([X, Y], axis=-1)

    def extent(self):
        ox, oy = self.origin
        return ox, ox + self.nx * self.hx, oy, oy + self.ny * self.hy

    def boundary_mask(self):
        m = np.zeros(self.shape, dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def with_values(self, values) -> "GridField":
        return GridField(self.nx, self.ny, self.hx, self.hy, self.origin, np.array(values, dtype=float))

    # ---------------------------------------------------------------- I/O
    def to_text(self) -> str:
        head = f"{self.nx} {self.ny} {self.hx!r} {self.hy!r} {self.origin[0]!r} {self.origin[1]!r}\n"
        body = "\n".join(format(v, ".17g") for v in self.values.ravel())
        return head + body + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GridField":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise UsageError("empty grid file")
        parts = lines[0].split()
        if len(parts) != 6:
            raise UsageError("grid header must be 'nx ny hx hy ox oy'")
        try:
            nx, ny = int(parts[0]), int(parts[1])
            hx, hy, ox, oy = (float(p) for p in parts[2:])
            vals = np.array([float(v) for v in lines[1:]])
        except ValueError as exc:
            raise UsageError(f"malformed grid file: {exc}") from exc
        return cls(nx, ny, hx, hy, (ox, oy), vals)

    def to_csv(self) -> str:
        X, Y = self.coords()
        rows = ["x,y,u"]
        for x, y, v in zip(X.ravel(), Y.ravel(), self.values.ravel()):
            rows.append(f"{x:.17g},{y:.17g},{v:.17g}")
        return "\n".join(rows) + "\n"

    def save(self, path: str) -> None:
        atomic_write_text(path, self.to_text())

    @classmethod
    def load(cls, path: str) -> "GridField":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def save_snapshots(self, directory: str, stem: str = "snapshot") -> List[str]:
        """Write each stored time level to ``<stem>_<index>.txt``; returns the paths."""
        os.makedirs(directory, exist_ok=True)
        out = []
        width = max(4, len(str(len(self.snapshots))))
        for idx, vals in enumerate(self.snapshots):
            p = os.path.join(directory, f"{stem}_{idx:0{width}d}.txt")
            self.with_values(vals).save(p)
            out.append(p)
        return out


def ball_mask(field: GridField, center, radius: float, tol: float = 1e-12):
    """Nodes with ``|x - center| <= radius`` (relative tolerance ``tol``)."""
    P = field.points()
    d = np.hypot(P[..., 0] - center[0], P[..., 1] - center[1])
    return d <= radius * (1 + tol) + 1e-15


def check_ball_inside(field: GridField, center, radius: float) -> None:
    x0, x1, y0, y1 = field.extent()
    eps = 1e-12 * max(1.0, abs(radius))
    if (center[0] - radius < x0 - eps or center[0] + radius > x1 + eps
            or center[1] - radius < y0 - eps or center[1] + radius > y1 + eps):
        raise UsageError(f"ball of radius {radius} at {tuple(center)} leaves the grid")
