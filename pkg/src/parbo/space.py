"""Box-bounded parameter domains, unit-cube rescaling, and edge detection.

Everything inside the optimizer lives in the unit hyper-cube ``[0, 1]^D``;
raw coordinates appear only at the objective-function boundary.  A
:class:`ParameterSpace` performs the affine conversion in both directions
and owns the notion of a point being "on the edge" of its range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ParameterSpace:
    """Axis-aligned search box with strictly ordered bounds per axis."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size == 0:
            raise ValueError("lower and upper must be equal-length 1-d vectors")
        bad = np.flatnonzero(~(lower < upper))
        if bad.size:
            raise ValueError(
                f"lower must be strictly below upper (violated at coordinate {int(bad[0])})"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def to_unit(self, x_raw) -> np.ndarray:
        """Map a point of the box onto the unit cube.

        Raises ``ValueError`` naming the first violating coordinate if the
        point lies outside the box.
        """
        x = np.asarray(x_raw, dtype=float)
        self._check_shape(x)
        bad = np.flatnonzero((x < self.lower) | (x > self.upper))
        if bad.size:
            k = int(bad[0])
            raise ValueError(
                f"coordinate {k} is outside the box: {x[k]!r} not in "
                f"[{self.lower[k]!r}, {self.upper[k]!r}]"
            )
        return (x - self.lower) / self.widths

    def from_unit(self, u) -> np.ndarray:
        """Inverse of :meth:`to_unit`; input must lie in ``[0, 1]^D``."""
        u = np.asarray(u, dtype=float)
        self._check_shape(u)
        bad = np.flatnonzero((u < 0.0) | (u > 1.0))
        if bad.size:
            k = int(bad[0])
            raise ValueError(f"coordinate {k} is outside the unit cube: {u[k]!r}")
        return self.lower + u * self.widths

    def _check_shape(self, x: np.ndarray) -> None:
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")


def is_edge_point(u, edge_tol: float) -> bool:
    """True iff any unit-cube coordinate lies within ``edge_tol`` of 0 or 1."""
    u = np.asarray(u, dtype=float)
    return bool(np.any(u <= edge_tol) or np.any(u >= 1.0 - edge_tol))
