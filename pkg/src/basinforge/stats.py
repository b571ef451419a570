"""Iteration-count statistics: histograms, N*, Laplace tail fits, entropy h."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

B_FLOOR = 1e-3


class NoConvergedNodes(ValueError):
    pass


class EmptyTail(ValueError):
    pass


@dataclass(frozen=True)
class IterationHistogram:
    counts: dict[int, int]
    total_nodes: int
    converged_nodes: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.converged_nodes:
            raise ValueError("counts must sum to converged_nodes")
        if self.converged_nodes > self.total_nodes:
            raise ValueError("converged_nodes exceeds total_nodes")

    @classmethod
    def from_iterations(cls, iterations, total_nodes: int | None = None) -> "IterationHistogram":
        """Build from the iteration counts of converged nodes only."""
        it = np.asarray(iterations, dtype=np.int64).ravel()
        if it.size and it.min() < 0:
            raise ValueError("iteration counts must be nonnegative")
        binc = np.bincount(it) if it.size else np.zeros(0, dtype=np.int64)
        counts = {int(n): int(c) for n, c in enumerate(binc) if c}
        total = it.size if total_nodes is None else int(total_nodes)
        return cls(counts, total, int(it.size))

    def probability(self, n: int) -> float:
        return self.counts.get(int(n), 0) / self.total_nodes if self.total_nodes else 0.0

    def support(self) -> list[int]:
        return sorted(self.counts)

    def dense(self) -> np.ndarray:
        """Counts as an array indexed by N."""
        size = max(self.counts) + 1 if self.counts else 0
        out = np.zeros(size, dtype=np.int64)
        for n, c in self.counts.items():
            out[n] = c
        return out


@dataclass(frozen=True)
class LaplaceFit:
    location_a: int
    diversity_b: float
    n_star: int

    def __post_init__(self):
        if not self.diversity_b > 0:
            raise ValueError("diversity must be positive")
        if self.location_a not in (self.n_star, self.n_star + 1):
            raise ValueError("location must be N* or N*+1")

    @property
    def a_offset(self) -> int:
        return self.location_a - self.n_star


def histogram(grid) -> IterationHistogram:
    mask = grid.converged_mask()
    return IterationHistogram.from_iterations(grid.iterations[mask], total_nodes=grid.tags.size)


def most_probable_n(h: IterationHistogram) -> int:
    if h.converged_nodes == 0:
        raise NoConvergedNodes("histogram has no converged nodes")
    best = max(h.counts.values())
    return min(n for n, c in h.counts.items() if c == best)


def laplace_pdf(x, a: float, b: float):
    return np.exp(-np.abs(np.asarray(x, dtype=float) - a) / b) / (2.0 * b)


def fit_laplace_tail(h: IterationHistogram) -> LaplaceFit:
    """Fit the x >= a branch of a Laplace density to the histogram tail.

    For each candidate a in {N*, N*+1}, b is the maximum-likelihood scale of
    the exponential branch (mean excess over a). The candidate whose density
    best matches the empirical P(N) over N >= N* in least squares wins.
    """
    n_star = most_probable_n(h)
    dense = h.dense()
    ns = np.arange(dense.size)
    tail = ns >= n_star
    if dense[tail].sum() == 0:
        raise EmptyTail("no converged node with N >= N*")
    prob = dense / h.total_nodes
    best = None
    for a in (n_star, n_star + 1):
        sel = ns >= a
        weight = dense[sel]
        if weight.sum() == 0:
            continue
        b = max(float((weight * (ns[sel] - a)).sum() / weight.sum()), B_FLOOR)
        sse = float(((laplace_pdf(ns[tail], a, b) - prob[tail]) ** 2).sum())
        if best is None or sse < best[0]:
            best = (sse, a, b)
    return LaplaceFit(best[1], best[2], n_star)


def fit_laplace_samples(samples, a: float | None = None) -> tuple[float, float]:
    """Exponential-branch MLE on raw samples: ``(a, b)`` with a = min(samples)
    unless given, and b = mean excess over a."""
    x = np.asarray(samples, dtype=float).ravel()
    if a is None:
        a = float(x.min())
    x = x[x >= a]
    if x.size == 0:
        raise EmptyTail("no sample at or above the location")
    return a, max(float(np.mean(x - a)), B_FLOOR)


def differential_entropy(fit: LaplaceFit | float) -> float:
    b = fit.diversity_b if isinstance(fit, LaplaceFit) else float(fit)
    if not b > 0:
        raise ValueError("diversity must be positive")
    return 1.0 + math.log(2.0 * b)


def convergence_cdf(h: IterationHistogram, n: int) -> float:
    if h.total_nodes == 0:
        return 0.0
    return sum(c for k, c in h.counts.items() if k <= n) / h.total_nodes


def write_histogram_csv(h: IterationHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "count", "P"])
        for n in h.support():
            w.writerow([n, h.counts[n], repr(h.probability(n))])


def stats_record(h: IterationHistogram) -> dict:
    """N*, a, b and h for a histogram; empty fields when nothing converged."""
    try:
        fit = fit_laplace_tail(h)
    except (NoConvergedNodes, EmptyTail):
        return {"n_star": None, "a": None, "a_offset": None, "b": None, "h": None}
    return {"n_star": fit.n_star, "a": fit.location_a, "a_offset": fit.a_offset,
            "b": fit.diversity_b, "h": differential_entropy(fit)}
