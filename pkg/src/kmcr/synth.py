"""Synthetic benchmark: cluster centres on a sphere, members in small balls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import DataMatrix


@dataclass(frozen=True)
class SyntheticSpec:
    d: int
    k_c: int
    n_c: int
    centroid_radius: float = 1.0
    member_radius: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.k_c < 1 or self.n_c < 1:
            raise ValueError("d, k_c and n_c must all be >= 1")
        if not self.centroid_radius > 0:
            raise ValueError("centroid_radius must be positive")
        if self.member_radius < 0 or self.member_radius >= self.centroid_radius:
            raise ValueError("member_radius must lie in [0, centroid_radius)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def n(self) -> int:
        return self.k_c * self.n_c


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    data: DataMatrix
    true_labels: np.ndarray
    true_centroids: DataMatrix
    spec: SyntheticSpec


def _unit_directions(rng, d, count):
    # normalized Gaussian draws are isotropic; redraw the (measure-zero) zero vector
    g = rng.standard_normal((d, count))
    norms = np.linalg.norm(g, axis=0)
    while np.any(norms == 0):
        bad = norms == 0
        g[:, bad] = rng.standard_normal((d, int(bad.sum())))
        norms = np.linalg.norm(g, axis=0)
    return g / norms


def sample_sphere_centroids(d: int, k_c: int, radius: float = 1.0, seed: int = 0) -> DataMatrix:
    rng = np.random.default_rng(seed)
    return DataMatrix(radius * _unit_directions(rng, d, k_c))


def generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Draw ``n_c`` points uniformly inside a ball around each sphere centroid.

    Columns are ordered cluster by cluster.
    """
    ss = np.random.SeedSequence(spec.seed)
    centroid_seed, member_seed = ss.spawn(2)
    centroids = sample_sphere_centroids(
        spec.d, spec.k_c, spec.centroid_radius, int(centroid_seed.generate_state(1)[0])
    )
    rng = np.random.default_rng(member_seed)
    n = spec.n
    directions = _unit_directions(rng, spec.d, n)
    # radius ~ r * U^(1/d) gives a uniform density inside the ball
    radii = spec.member_radius * rng.random(n) ** (1.0 / spec.d)
    labels = np.repeat(np.arange(spec.k_c), spec.n_c)
    data = centroids.values[:, labels] + directions * radii
    return SyntheticDataset(
        data=DataMatrix(data),
        true_labels=labels,
        true_centroids=centroids,
        spec=spec,
    )
