"""Uniform symmetric momentum grids."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_N_POINTS = 2048
# half-width of the window in units of the probe's momentum standard deviation
DEFAULT_WIDTH_SIGMAS = 10.0
# grid points per period of cos(theta p)
POINTS_PER_PERIOD = 32


@dataclass(frozen=True)
class MomentumGrid:
    """n_points uniformly spaced momenta on [-p_max, p_max] with trapezoid weights."""

    p_max: float
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self):
        if not (np.isfinite(self.p_max) and self.p_max > 0):
            raise ValueError(f"p_max must be positive, got {self.p_max!r}")
        if int(self.n_points) != self.n_points or self.n_points < 64 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 64, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / (self.n_points - 1)

    @cached_property
    def points(self) -> np.ndarray:
        p = np.linspace(-self.p_max, self.p_max, self.n_points)
        p.setflags(write=False)
        return p

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.dp)
        w[0] = w[-1] = 0.5 * self.dp
        w.setflags(write=False)
        return w

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def refined(self) -> "MomentumGrid":
        """Same window, twice the points."""
        return MomentumGrid(self.p_max, 2 * self.n_points)

    @classmethod
    def for_probe(cls, probe, theta=0.0, n_points=None, width=DEFAULT_WIDTH_SIGMAS):
        """Window of ``width`` momentum standard deviations around zero.

        The point count is at least ``n_points`` (default 2048) and grows so
        that the oscillation of cos(theta p) keeps POINTS_PER_PERIOD samples.
        """
        p_max = width * math.sqrt(probe.momentum_variance)
        n = DEFAULT_N_POINTS if n_points is None else int(n_points)
        if theta:
            period = 2.0 * math.pi / abs(theta)
            needed = math.ceil(2.0 * p_max / period * POINTS_PER_PERIOD) + 1
            n = max(n, needed)
        n += n % 2
        return cls(p_max, n)
