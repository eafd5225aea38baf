"""Finite time scales and their jump operators, graininess and duals."""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .errors import BadGrid, EmptyTimeScale, NotInScale, TooSmall

TOL = 1e-12


class TimeScale:
    """A finite, strictly increasing set of real points.

    Instances are immutable. Points are compared with an absolute tolerance
    of ``TOL`` when looking up membership.
    """

    __slots__ = ("_points",)

    def __init__(self, points: Iterable[float]):
        pts = np.array(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise EmptyTimeScale("a time scale needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise BadGrid("time scale points must be finite")
        if pts.size > 1 and np.any(np.diff(pts) <= TOL):
            raise BadGrid("time scale points must be strictly increasing")
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    def __len__(self) -> int:
        return self._points.size

    def __iter__(self) -> Iterator[float]:
        return iter(self._points.tolist())

    def __contains__(self, t: float) -> bool:
        return self._find(t) is not None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeScale):
            return NotImplemented
        return np.array_equal(self._points, other._points)

    def __hash__(self) -> int:
        return hash(self._points.tobytes())

    def __repr__(self) -> str:
        if len(self) <= 8:
            return f"TimeScale({self._points.tolist()})"
        return f"TimeScale([{self.min}, ..., {self.max}], size={len(self)})"

    @property
    def min(self) -> float:
        return float(self._points[0])

    @property
    def max(self) -> float:
        return float(self._points[-1])

    def _find(self, t: float):
        pts = self._points
        i = int(np.searchsorted(pts, t))
        for j in (i - 1, i):
            if 0 <= j < pts.size and abs(pts[j] - t) <= TOL:
                return j
        return None

    def index(self, t: float) -> int:
        """Position of point ``t``; raises NotInScale if ``t`` is not a point."""
        j = self._find(t)
        if j is None:
            raise NotInScale(f"{t!r} is not a point of {self!r}")
        return j

    def sigma(self, t: float) -> float:
        i = self.index(t)
        return float(self._points[min(i + 1, len(self) - 1)])

    def rho(self, t: float) -> float:
        i = self.index(t)
        return float(self._points[max(i - 1, 0)])

    def mu(self, t: float) -> float:
        return self.sigma(t) - float(self._points[self.index(t)])

    def nu(self, t: float) -> float:
        return float(self._points[self.index(t)]) - self.rho(t)

    def kappa_up(self) -> "TimeScale":
        """The scale without its maximum (the domain of delta derivatives)."""
        if len(self) < 2:
            raise TooSmall("kappa restriction needs at least two points")
        return TimeScale(self._points[:-1])

    def kappa_down(self) -> "TimeScale":
        """The scale without its minimum (the domain of nabla derivatives)."""
        if len(self) < 2:
            raise TooSmall("kappa restriction needs at least two points")
        return TimeScale(self._points[1:])

    def dual(self) -> "TimeScale":
        return TimeScale(-self._points[::-1])

    def restrict(self, a: float, b: float) -> "TimeScale":
        i, j = self.index(a), self.index(b)
        if i > j:
            raise ValueError(f"restrict needs a <= b, got a={a!r}, b={b!r}")
        return TimeScale(self._points[i : j + 1])


def from_points(xs: Iterable[float]) -> TimeScale:
    """Sort ``xs`` and merge values closer than ``TOL``."""
    pts = np.sort(np.asarray(list(xs), dtype=float))
    if pts.size == 0:
        raise EmptyTimeScale("no points given")
    keep = np.concatenate(([True], np.diff(pts) > TOL))
    return TimeScale(pts[keep])


def uniform(a: float, b: float, h: float) -> TimeScale:
    """The grid ``{a, a+h, ..., b}``; ``(b - a) / h`` must be an integer."""
    if not h > 0:
        raise BadGrid(f"step must be positive, got {h!r}")
    if not a < b:
        raise BadGrid(f"uniform grid needs a < b, got a={a!r}, b={b!r}")
    ratio = (b - a) / h
    steps = round(ratio)
    if abs(ratio - steps) > 1e-9:
        raise BadGrid(f"(b - a) / h = {ratio!r} is not an integer")
    pts = a + h * np.arange(steps + 1, dtype=float)
    pts[-1] = b
    return TimeScale(pts)


def qscale(q: float, kmin: int, kmax: int) -> TimeScale:
    """The quantum scale ``{q**kmin, ..., q**kmax}`` for ``q > 1``."""
    if not q > 1:
        raise BadGrid(f"qscale needs q > 1, got {q!r}")
    if kmin > kmax:
        raise BadGrid(f"qscale needs kmin <= kmax, got {kmin}, {kmax}")
    return TimeScale([float(q) ** k for k in range(int(kmin), int(kmax) + 1)])
