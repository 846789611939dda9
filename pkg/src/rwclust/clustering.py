"""Partitioning from a distance matrix, stability-based choice of K, summaries.

The distances define everything: hierarchical linkage (average or complete)
and a deterministic k-medoids work purely on the precomputed matrix. The
number of clusters is picked by resampling observations, reclustering each
subsample, and keeping the K whose partitions agree most (mean pairwise
adjusted Rand index by default, minimal-matching agreement as an option),
ties going to the smaller K.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import squareform

from .distance import DistanceMatrix, DistanceParams, distance_matrix
from .errors import DegenerateSampleError, DimensionError, ParameterError, ValidationError
from .ingestion import IncrementPanel
from .representation import BinningConfig, represent

CLUSTER_METHODS = ("average_linkage", "complete_linkage", "k_medoids")

AGREEMENT_METRICS = ("ari", "minimal_matching")

_LINKAGE_NAME = {"average_linkage": "average", "complete_linkage": "complete"}


@dataclass(frozen=True)
class ClusterAssignment:
    """A partition of the panel's series into k nonempty clusters.

    Labels are canonical: clusters are numbered by decreasing size, ties
    broken by the smallest member id, so equal partitions always carry
    identical label arrays.
    """

    ids: tuple[str, ...]
    labels: np.ndarray
    k: int
    method: str
    theta: float

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", lab)
        if lab.shape != (len(self.ids),):
            raise ValidationError("labels must align with ids")
        present = np.unique(lab)
        if not np.array_equal(present, np.arange(self.k)):
            raise ValidationError(f"labels must cover 0..{self.k - 1} with no empty cluster")
        if not np.array_equal(lab, _canonical_labels(self.ids, lab)):
            raise ValidationError("labels are not in canonical order")
        lab.setflags(write=False)

    @classmethod
    def from_labels(cls, ids, labels, method: str = "external", theta: float = 0.5) -> "ClusterAssignment":
        """Build an assignment from arbitrary labels, canonicalizing them first."""
        canon = _canonical_labels(tuple(ids), np.asarray(labels))
        return cls(ids=tuple(ids), labels=canon, k=int(canon.max()) + 1, method=method, theta=theta)

    def members(self, label: int) -> tuple[str, ...]:
        return tuple(i for i, l in zip(self.ids, self.labels) if l == label)


def _canonical_labels(ids, raw_labels) -> np.ndarray:
    groups: dict = {}
    for i, lab in enumerate(np.asarray(raw_labels).tolist()):
        groups.setdefault(lab, []).append(i)
    ordered = sorted(groups.values(), key=lambda m: (-len(m), min(ids[i] for i in m)))
    labels = np.empty(len(ids), dtype=np.int64)
    for new, members in enumerate(ordered):
        labels[members] = new
    return labels


def _hierarchical_tree(matrix_values: np.ndarray, method: str) -> np.ndarray:
    condensed = squareform(matrix_values, checks=False)
    return linkage(condensed, method=_LINKAGE_NAME[method])


def _kmedoids_labels(d: np.ndarray, k: int, max_iter: int = 200) -> np.ndarray:
    """Alternating k-medoids on a distance matrix, fully deterministic.

    Build: first medoid is the medoid of the whole set, the rest are added
    greedily farthest-first; all ties resolve to the smallest index.
    """
    n = d.shape[0]
    medoids = [int(np.argmin(d.sum(axis=0)))]
    while len(medoids) < k:
        nearest = d[:, medoids].min(axis=1)
        nearest[medoids] = -1.0  # never re-pick a medoid
        medoids.append(int(np.argmax(nearest)))

    labels = np.empty(n, dtype=np.int64)
    for _ in range(max_iter):
        labels = np.argmin(d[:, medoids], axis=1)
        labels[medoids] = np.arange(k)  # anchor each medoid to its own cluster
        new_medoids = []
        for j in range(k):
            members = np.where(labels == j)[0]
            within = d[np.ix_(members, members)].sum(axis=1)
            new_medoids.append(int(members[np.argmin(within)]))
        if new_medoids == medoids:
            break
        medoids = new_medoids
    labels = np.argmin(d[:, medoids], axis=1)
    labels[medoids] = np.arange(k)
    return labels


def cluster(
    matrix: DistanceMatrix,
    k: int,
    method: str = "average_linkage",
    seed: int = 0,
) -> ClusterAssignment:
    """Partition the panel into k clusters from its distance matrix.

    Every method is deterministic given its inputs; `seed` is accepted for
    interface stability but the k-medoids build step needs no randomness.
    """
    if method not in CLUSTER_METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {CLUSTER_METHODS}")
    n = matrix.n_series
    if not 2 <= k <= n:
        raise ParameterError(f"k must lie in [2, {n}], got {k}")
    if method == "k_medoids":
        raw = _kmedoids_labels(matrix.values, k)
    else:
        raw = cut_tree(_hierarchical_tree(matrix.values, method), n_clusters=k).ravel()
    return ClusterAssignment(
        ids=matrix.ids,
        labels=_canonical_labels(matrix.ids, raw),
        k=k,
        method=method,
        theta=matrix.theta,
    )


def _contingency(labels_a, labels_b) -> np.ndarray:
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"partitions differ in length: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] == 0:
        raise DimensionError("cannot compare empty partitions")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def adjusted_rand(labels_a, labels_b) -> float:
    """Chance-corrected Rand index; 1 iff the partitions agree up to relabeling."""
    table = _contingency(labels_a, labels_b)
    n = int(table.sum())

    def comb2(x):
        return x * (x - 1) // 2

    agree = int(comb2(table).sum())
    pairs_a = int(comb2(table.sum(axis=1)).sum())
    pairs_b = int(comb2(table.sum(axis=0)).sum())
    total = comb2(n)
    expected = pairs_a * pairs_b / total if total else 0.0
    top = (pairs_a + pairs_b) / 2.0
    if top == expected:  # both partitions degenerate and identical
        return 1.0
    return float((agree - expected) / (top - expected))


def minimal_matching(labels_a, labels_b) -> float:
    """Share of points left unexplained by the best cluster-to-cluster matching.

    Pairs up clusters across the two partitions so as to cover as many points
    as possible (rectangular assignment on the contingency table); the
    distance is the uncovered fraction. 0 iff the partitions agree up to
    relabeling. Unlike the adjusted Rand index it is not chance-corrected.
    """
    table = _contingency(labels_a, labels_b)
    rows, cols = linear_sum_assignment(table, maximize=True)
    matched = int(table[rows, cols].sum())
    n = int(table.sum())
    return float((n - matched) / n)


@dataclass(frozen=True)
class StabilityReport:
    """Per-K agreement scores from resampled clustering, with the selected K."""

    k_range: tuple[int, ...]
    scores: tuple[float, ...]
    dispersion: tuple[float, ...]
    selected_k: int
    runs: int
    seed: int
    subsample_fraction: float

    def __post_init__(self):
        if not (len(self.k_range) == len(self.scores) == len(self.dispersion)):
            raise ValidationError("k_range, scores, and dispersion must align")
        best = max(self.scores)
        winners = [k for k, s in zip(self.k_range, self.scores) if s == best]
        if self.selected_k != min(winners):
            raise ValidationError("selected_k must be the smallest maximizer of the scores")


def stability_select_k(
    panel: IncrementPanel,
    params: DistanceParams,
    binning: BinningConfig,
    k_range,
    runs: int = 20,
    subsample_fraction: float = 0.7,
    seed: int = 0,
    method: str = "average_linkage",
    threads: int = 1,
    agreement: str = "ari",
) -> StabilityReport:
    """Pick the cluster count whose partitions replicate best under resampling.

    Draws `runs` observation subsamples (over the time axis, the series set
    stays fixed), rebuilds representation, distances, and clustering on each,
    and scores every K by the mean pairwise agreement between the partitions
    of the runs: adjusted Rand index by default, or 1 - minimal_matching with
    agreement="minimal_matching". Each run's random stream derives from
    (seed, run index), so results do not depend on scheduling.
    """
    ks = sorted(int(k) for k in k_range)
    n, m = panel.n_series, panel.n_obs
    if runs < 2:
        raise ParameterError(f"runs must be >= 2, got {runs}")
    if not 0.5 <= subsample_fraction < 1.0:
        raise ParameterError(f"subsample fraction must lie in [0.5, 1), got {subsample_fraction}")
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")
    if not ks or ks[0] < 2 or ks[-1] > n - 1:
        raise ParameterError(f"k_range must be a nonempty subset of [2, {n - 1}], got {ks}")
    if method not in CLUSTER_METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {CLUSTER_METHODS}")
    if agreement not in AGREEMENT_METRICS:
        raise ParameterError(
            f"unknown agreement {agreement!r}; expected one of {AGREEMENT_METRICS}"
        )
    if agreement == "ari":
        score_pair = adjusted_rand
    else:
        def score_pair(pa, pb):
            return 1.0 - minimal_matching(pa, pb)
    m_sub = int(np.floor(subsample_fraction * m))
    if m_sub < 2:
        raise DegenerateSampleError(
            f"subsample of {m_sub} observations is too small to represent"
        )

    partitions: dict[int, list[np.ndarray]] = {k: [] for k in ks}
    for run in range(runs):
        rng = np.random.default_rng(np.random.SeedSequence([seed, run]))
        idx = np.sort(rng.choice(m, size=m_sub, replace=False))
        sub = IncrementPanel(ids=panel.ids, values=panel.values[:, idx])
        dm = distance_matrix(represent(sub, binning), params, threads=threads)
        if method == "k_medoids":
            for k in ks:
                partitions[k].append(_kmedoids_labels(dm.values, k))
        else:
            tree = _hierarchical_tree(dm.values, method)
            cuts = cut_tree(tree, n_clusters=ks)
            for col, k in enumerate(ks):
                partitions[k].append(cuts[:, col])

    scores, spreads = [], []
    for k in ks:
        agreements = [
            score_pair(pa, pb)
            for pa, pb in itertools.combinations(partitions[k], 2)
        ]
        scores.append(float(np.mean(agreements)))
        spreads.append(float(np.std(agreements)))
    best = max(scores)
    selected = min(k for k, s in zip(ks, scores) if s == best)
    return StabilityReport(
        k_range=tuple(ks),
        scores=tuple(scores),
        dispersion=tuple(spreads),
        selected_k=selected,
        runs=runs,
        seed=seed,
        subsample_fraction=subsample_fraction,
    )


@dataclass(frozen=True)
class ClusterSummaryRow:
    cluster: int
    mean: float
    quantile_10: float
    quantile_90: float
    size: int


@dataclass(frozen=True)
class ClusterSummary:
    """Per-cluster pooled-observation statistics, rows ordered by decreasing mean."""

    rows: tuple[ClusterSummaryRow, ...]

    def __post_init__(self):
        for row in self.rows:
            if row.quantile_10 > row.quantile_90:
                raise ValidationError(f"cluster {row.cluster}: quantile_10 > quantile_90")
        means = [row.mean for row in self.rows]
        if any(means[i] < means[i + 1] for i in range(len(means) - 1)):
            raise ValidationError("summary rows must be ordered by decreasing mean")

    @property
    def total_size(self) -> int:
        return sum(row.size for row in self.rows)


def cluster_summary(assignment: ClusterAssignment, panel) -> ClusterSummary:
    """Pool each cluster's member observations and report mean, 10%/90% quantiles, size.

    `panel` may hold levels or increments; quantiles use linear interpolation
    between order statistics. Size counts member series.
    """
    panel_ids = {sid: i for i, sid in enumerate(panel.ids)}
    missing = [sid for sid in assignment.ids if sid not in panel_ids]
    if missing:
        raise ValidationError(f"assignment ids not in panel: {', '.join(missing)}")
    rows = []
    for label in range(assignment.k):
        members = [panel_ids[sid] for sid in assignment.members(label)]
        pooled = panel.values[members].ravel()
        q10, q90 = np.quantile(pooled, [0.1, 0.9])
        rows.append(
            ClusterSummaryRow(
                cluster=label,
                mean=float(pooled.mean()),
                quantile_10=float(q10),
                quantile_90=float(q90),
                size=len(members),
            )
        )
    rows.sort(key=lambda r: (-r.mean, r.cluster))
    return ClusterSummary(rows=tuple(rows))
