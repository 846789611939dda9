"""Nonparametric representation of increment series.

Each series is projected onto two components that together lose no sample
information: a bijective rank vector (the joint-dependence part, invariant
under strictly increasing transforms) and a histogram of per-bin probability
masses on a grid shared by the whole panel (the marginal-distribution part).

Ranks break ties by arrival order: rank[i] counts the observations k with
X_k < X_i, or X_k == X_i and tie_order(k) <= tie_order(i). With the default
identity tie order, earlier observations win ties, so the rank vector is
always a permutation of {1,...,M}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BinningRangeError, ParameterError, ValidationError
from .ingestion import IncrementPanel

MASS_TOL = 1e-12  # allowed deviation of histogram masses from sum 1

# quotients this close (relative) to a bin's right edge count to the next bin,
# so the same data binned on an affinely remapped grid lands identically
EDGE_TOL = 16 * np.finfo(float).eps

BIN_RULES = ("count", "width", "fd")


@dataclass(frozen=True)
class BinningConfig:
    """Histogram smoothing rule for the shared grid.

    rule "count": bins of width span/bins over the pooled range (default).
    rule "width": fixed bin width.
    rule "fd": Freedman-Diaconis width from the pooled sample.
    """

    rule: str = "count"
    bins: int = 100
    width: float | None = None

    def __post_init__(self):
        if self.rule not in BIN_RULES:
            raise ParameterError(f"unknown bin rule {self.rule!r}; expected one of {BIN_RULES}")
        if self.rule == "count" and self.bins < 1:
            raise ParameterError(f"bin count must be >= 1, got {self.bins}")
        if self.rule == "width":
            if self.width is None or not self.width > 0:
                raise ParameterError(f"bin width must be > 0, got {self.width}")


@dataclass(frozen=True)
class RankVector:
    """A permutation of {1,...,M} ranking one series' observations."""

    ranks: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranks, dtype=np.int64)
        object.__setattr__(self, "ranks", r)
        m = r.shape[0]
        if r.ndim != 1 or m < 2:
            raise ValidationError("rank vector must be 1-d with at least 2 entries")
        if not np.array_equal(np.sort(r), np.arange(1, m + 1)):
            raise ValidationError("ranks must be a permutation of 1..M")
        r.setflags(write=False)

    def __len__(self) -> int:
        return self.ranks.shape[0]


@dataclass(frozen=True)
class BinnedDensity:
    """Per-bin probability masses on a uniform grid starting at `origin`."""

    origin: float
    width: float
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "masses", m)
        if not np.isfinite(self.origin):
            raise ValidationError("grid origin must be finite")
        if not self.width > 0:
            raise ValidationError(f"bin width must be > 0, got {self.width}")
        if m.ndim != 1 or m.shape[0] < 1:
            raise ValidationError("masses must be a nonempty 1-d array")
        if (m < 0).any():
            raise ValidationError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"masses must sum to 1 within {MASS_TOL}, got {m.sum()!r}")
        m.setflags(write=False)

    @property
    def bin_count(self) -> int:
        return self.masses.shape[0]

    def grid(self) -> tuple[float, float, int]:
        return (self.origin, self.width, self.bin_count)


@dataclass(frozen=True)
class SeriesRepresentation:
    """One series' (rank vector, binned density) pair."""

    id: str
    ranks: RankVector
    density: BinnedDensity


@dataclass(frozen=True)
class NonParamRepresentation:
    """Rank vectors plus binned densities for a whole panel, on one shared grid."""

    ids: tuple[str, ...]
    ranks: tuple[RankVector, ...]
    densities: tuple[BinnedDensity, ...]

    def __post_init__(self):
        n = len(self.ids)
        if not (len(self.ranks) == len(self.densities) == n) or n == 0:
            raise ValidationError("ids, ranks, and densities must have equal nonzero length")
        m = len(self.ranks[0])
        if any(len(r) != m for r in self.ranks):
            raise ValidationError("all rank vectors must share one length M")
        g = self.densities[0].grid()
        if any(d.grid() != g for d in self.densities):
            raise ValidationError("all densities must share one (origin, width, bin count) grid")

    @property
    def n_series(self) -> int:
        return len(self.ids)

    @property
    def m(self) -> int:
        return len(self.ranks[0])

    @property
    def grid(self) -> tuple[float, float, int]:
        return self.densities[0].grid()

    def series(self, i: int) -> SeriesRepresentation:
        return SeriesRepresentation(self.ids[i], self.ranks[i], self.densities[i])

    def rank_matrix(self) -> np.ndarray:
        return np.stack([r.ranks for r in self.ranks])

    def mass_matrix(self) -> np.ndarray:
        return np.stack([d.masses for d in self.densities])


def rank_function(observations, tie_order=None) -> RankVector:
    """Bijective ranks of one series, ties broken by arrival order.

    Parameters
    ----------
    observations : array_like, shape (M,)
        The raw values, M >= 2.
    tie_order : array_like of int, optional
        A permutation of {1,...,M}; equal values are ordered by it. Defaults
        to the identity, i.e. first arrival gets the lower rank.
    """
    x = np.asarray(observations, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ValidationError("observations must be 1-d with at least 2 entries")
    m = x.shape[0]
    if tie_order is None:
        sigma = np.arange(1, m + 1)
    else:
        sigma = np.asarray(tie_order, dtype=np.int64)
        if sigma.shape != (m,) or not np.array_equal(np.sort(sigma), np.arange(1, m + 1)):
            raise ValidationError("tie_order must be a permutation of 1..M")
    # sorting by (value, sigma) places index i at position rank[i]-1
    order = np.lexsort((sigma, x))
    ranks = np.empty(m, dtype=np.int64)
    ranks[order] = np.arange(1, m + 1)
    return RankVector(ranks=ranks)


def empirical_margin(observations, origin: float, width: float, bin_count: int) -> BinnedDensity:
    """Histogram masses of one series on the half-open grid [origin, origin + bin_count*width).

    masses[k] = #{i : origin + k*width <= X_i < origin + (k+1)*width} / M, with
    one float concession: a value whose bin quotient sits within EDGE_TOL
    (relative) below an edge counts to the bin right of that edge. Without the
    snap, rescaling data and grid together could move edge-sitting values (the
    pooled extremes in particular) across a bin boundary.
    Raises BinningRangeError if any observation falls off the grid; the caller
    owns the grid and must widen it.
    """
    x = np.asarray(observations, dtype=float)
    if x.ndim != 1 or x.shape[0] < 1:
        raise ValidationError("observations must be a nonempty 1-d array")
    if not width > 0:
        raise ParameterError(f"bin width must be > 0, got {width}")
    if bin_count < 1:
        raise ParameterError(f"bin count must be >= 1, got {bin_count}")
    hi = origin + bin_count * width
    inside = (x >= origin) & (x < hi)
    if not inside.all():
        bad = x[~inside][0]
        raise BinningRangeError(f"observation {bad!r} outside grid [{origin!r}, {hi!r})")
    q = (x - origin) / width
    idx = np.floor(q)
    snap = (1.0 - (q - idx)) <= EDGE_TOL * np.maximum(np.abs(q), 1.0)
    idx = idx.astype(np.int64) + snap
    # the snap (or the division itself) can nudge an in-range value onto the
    # right edge of the padded grid
    np.minimum(idx, bin_count - 1, out=idx)
    counts = np.bincount(idx, minlength=bin_count)
    return BinnedDensity(origin=origin, width=width, masses=counts / x.shape[0])


def shared_grid(values, config: BinningConfig) -> tuple[float, float, int]:
    """Build one (origin, width, bin_count) grid covering all pooled values.

    The grid starts at the pooled minimum and gains one extra bin past the
    pooled maximum so every observation lies inside the half-open range.
    Widths too small to advance the origin in floating point are widened to
    the smallest workable value; an fd width that would explode the bin count
    falls back to the count rule.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValidationError("cannot build a grid from no values")
    lo = float(v.min())
    hi = float(v.max())
    span = hi - lo

    if config.rule == "count":
        width = span / config.bins if span > 0.0 else 1.0
    elif config.rule == "fd":
        q75, q25 = np.quantile(v, [0.75, 0.25])
        width = 2.0 * float(q75 - q25) / v.size ** (1.0 / 3.0)
        if width <= 0.0 or (span > 0.0 and span / width > 1e6):
            return shared_grid(v, BinningConfig(rule="count", bins=config.bins))
    else:
        width = float(config.width)

    # float guard: the width must actually move the origin
    if width <= 0.0:
        width = float(np.finfo(float).tiny)
    while not lo + width > lo:
        width *= 2.0

    if span == 0.0:
        count = 1
    elif config.rule == "count":
        count = config.bins + 1
    else:
        count = int(np.floor(span / width)) + 1
    # the grid is half-open, so it must end strictly past the pooled max
    while not hi < lo + count * width:
        count += 1
    return (lo, width, count)


def represent(panel: IncrementPanel, binning: BinningConfig = BinningConfig()) -> NonParamRepresentation:
    """Project every series of a panel onto (ranks, shared-grid density)."""
    origin, width, nbins = shared_grid(panel.values, binning)
    ranks = tuple(rank_function(row) for row in panel.values)
    densities = tuple(
        empirical_margin(row, origin, width, nbins) for row in panel.values
    )
    return NonParamRepresentation(ids=panel.ids, ranks=ranks, densities=densities)
