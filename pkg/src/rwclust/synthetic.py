"""Ground-truth panel generation for validating the clustering pipeline.

Panels are built from a one-factor-per-block latent Gaussian field: block b
shares a factor F_b, series n in block b draws Z_n = sqrt(rho)*F_b +
sqrt(1-rho)*eps_n with i.i.d. standard normal eps. Each series' marginal is
then swapped to its distribution group's family through the probability
integral transform, standardized to unit variance and multiplied by the
group scale. Dependence structure (the copula) and marginal shape are
therefore controlled independently: rank-based clustering sees only the
blocks, histogram-based clustering only the families.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .clustering import ClusterAssignment, adjusted_rand
from .errors import ParameterError, ValidationError
from .ingestion import SeriesPanel

FAMILIES = ("gaussian", "student_t", "laplace")

RECOVERY_TARGETS = ("dependence", "distribution", "product")

# open-interval clamp for the uniform scores; keeps ppf finite in the far tails
_U_LO = np.nextafter(0.0, 1.0)
_U_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class CorrelationBlock:
    """A group of series sharing one latent factor with loading sqrt(rho)."""

    size: int
    rho: float

    def __post_init__(self):
        if self.size < 1:
            raise ValidationError(f"block size must be >= 1, got {self.size}")
        if not 0.0 <= self.rho < 1.0:
            raise ValidationError(f"intra-block correlation must lie in [0, 1), got {self.rho}")


@dataclass(frozen=True)
class DistributionGroup:
    """A marginal family (unit variance before scaling) and its scale."""

    family: str
    scale: float = 1.0
    df: float | None = None  # student_t only; needs df > 2 for finite variance

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.scale > 0:
            raise ValidationError(f"scale must be > 0, got {self.scale}")
        if self.family == "student_t":
            if self.df is None or not self.df > 2:
                raise ValidationError(f"student_t needs df > 2, got {self.df}")
        elif self.df is not None:
            raise ValidationError(f"family {self.family!r} takes no df")


@dataclass(frozen=True)
class SyntheticSpec:
    """Blueprint for a synthetic panel: blocks x distribution groups.

    Without explicit `distribution_labels`, groups are assigned by the
    cross-product rule: each block is split contiguously into near-equal
    parts, one per group, so every block subdivides into every family.
    """

    n_series: int
    m_obs: int
    blocks: tuple[CorrelationBlock, ...]
    groups: tuple[DistributionGroup, ...]
    seed: int = 0
    distribution_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.m_obs < 2:
            raise ValidationError(f"need at least 2 increments per series, got {self.m_obs}")
        if not self.blocks or not self.groups:
            raise ValidationError("need at least one block and one distribution group")
        if sum(b.size for b in self.blocks) != self.n_series:
            raise ValidationError(
                f"block sizes sum to {sum(b.size for b in self.blocks)}, expected {self.n_series}"
            )
        if self.seed < 0:
            raise ValidationError(f"seed must be nonnegative, got {self.seed}")
        if self.distribution_labels is not None:
            lab = self.distribution_labels
            if len(lab) != self.n_series:
                raise ValidationError("distribution_labels must cover every series")
            if any(not 0 <= g < len(self.groups) for g in lab):
                raise ValidationError("distribution_labels must index into groups")


@dataclass(frozen=True)
class GroundTruth:
    """Planted labels: block membership, family membership, and their product."""

    ids: tuple[str, ...]
    dependence_labels: np.ndarray
    distribution_labels: np.ndarray
    product_labels: np.ndarray

    def __post_init__(self):
        for name in ("dependence_labels", "distribution_labels", "product_labels"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != (len(self.ids),):
                raise ValidationError(f"{name} must align with ids")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _swap_margin(z: np.ndarray, group: DistributionGroup) -> np.ndarray:
    """Map a standard normal sample to the group's standardized family."""
    if group.family == "gaussian":
        x = z
    else:
        u = np.clip(stats.norm.cdf(z), _U_LO, _U_HI)
        if group.family == "student_t":
            x = stats.t.ppf(u, group.df) * np.sqrt((group.df - 2.0) / group.df)
        else:  # laplace: variance 2*b^2, so b = 1/sqrt(2)
            x = stats.laplace.ppf(u, scale=1.0 / np.sqrt(2.0))
    return x * group.scale


def _assign_groups(spec: SyntheticSpec) -> np.ndarray:
    if spec.distribution_labels is not None:
        return np.asarray(spec.distribution_labels, dtype=np.int64)
    labels = np.empty(spec.n_series, dtype=np.int64)
    start = 0
    for block in spec.blocks:
        members = np.arange(start, start + block.size)
        for g, chunk in enumerate(np.array_split(members, len(spec.groups))):
            labels[chunk] = g
        start += block.size
    return labels


def generate_panel(spec: SyntheticSpec) -> tuple[SeriesPanel, GroundTruth]:
    """Draw one panel of random walks matching the spec, plus its planted truth.

    Levels start at 0 and cumulate the generated increments. Identical spec
    and seed reproduce the panel bit for bit; the draw order is fixed
    (factors first, then every series in id order).
    """
    n, m = spec.n_series, spec.m_obs
    dep = np.repeat(np.arange(len(spec.blocks)), [b.size for b in spec.blocks])
    dist = _assign_groups(spec)
    _, product = np.unique(dep * len(spec.groups) + dist, return_inverse=True)

    rng = np.random.default_rng(spec.seed)
    factors = rng.standard_normal((len(spec.blocks), m))
    increments = np.empty((n, m))
    for i in range(n):
        rho = spec.blocks[dep[i]].rho
        z = np.sqrt(rho) * factors[dep[i]] + np.sqrt(1.0 - rho) * rng.standard_normal(m)
        increments[i] = _swap_margin(z, spec.groups[dist[i]])

    levels = np.concatenate([np.zeros((n, 1)), np.cumsum(increments, axis=1)], axis=1)
    id_width = len(str(n - 1)) if n > 1 else 1
    t_width = len(str(m))
    ids = tuple(f"s{i:0{id_width}d}" for i in range(n))
    index = tuple(f"t{j:0{t_width}d}" for j in range(m + 1))
    panel = SeriesPanel(ids=ids, index=index, values=levels)
    truth = GroundTruth(
        ids=ids,
        dependence_labels=dep,
        distribution_labels=dist,
        product_labels=product,
    )
    return panel, truth


def score_recovery(assignment: ClusterAssignment, truth: GroundTruth, which: str) -> float:
    """Adjusted Rand index of a clustering against one of the planted label sets."""
    if which not in RECOVERY_TARGETS:
        raise ParameterError(f"unknown target {which!r}; expected one of {RECOVERY_TARGETS}")
    pos = {sid: i for i, sid in enumerate(truth.ids)}
    missing = [sid for sid in assignment.ids if sid not in pos]
    if missing or len(assignment.ids) != len(truth.ids):
        raise ValidationError("assignment and truth must cover the same ids")
    wanted = getattr(truth, f"{which}_labels")
    aligned = wanted[[pos[sid] for sid in assignment.ids]]
    return adjusted_rand(assignment.labels, aligned)
