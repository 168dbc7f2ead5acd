"""Reproducible synthetic datasets for the discrimination and estimator experiments."""

from __future__ import annotations

import numpy as np

from .estimators import Dataset
from .srp import collision_probabilities

INNER, BORDER, OUTLIER = "inner", "border", "outlier"


def gaussian_clusters(
    n: int = 2000,
    dim: int = 10,
    n_clusters: int = 3,
    spread: float = 0.3,
    outlier_fraction: float = 0.0,
    seed: int = 0,
) -> Dataset:
    """Mixture of axis-aligned Gaussian clusters plus an optional uniform background.

    Cluster centres are drawn uniformly from ``[-3, 3]^dim``; each cluster has
    per-axis standard deviation ``spread``. Background points are uniform over
    ``[-4, 4]^dim`` and carry a positive label.
    """
    rng = np.random.default_rng(seed)
    n_out = int(round(n * outlier_fraction))
    n_in = n - n_out
    centres = rng.uniform(-3.0, 3.0, size=(n_clusters, dim))
    which = rng.integers(0, n_clusters, size=n_in)
    inliers = centres[which] + rng.normal(0.0, spread, size=(n_in, dim))
    background = rng.uniform(-4.0, 4.0, size=(n_out, dim))
    points = np.vstack([inliers, background])
    labels = np.r_[np.zeros(n_in, bool), np.ones(n_out, bool)]
    order = rng.permutation(n)
    return Dataset(points[order], labels[order], name=f"clusters{n_clusters}-n{n}-d{dim}")


def cluster_with_outliers(n_cluster: int = 200, n_outliers: int = 5, dim: int = 10, seed: int = 0) -> Dataset:
    """One tight cluster around a random direction plus outliers pointing elsewhere.

    Outliers are unit vectors orthogonal to the cluster direction and to each
    other (as far as ``dim`` allows), so their collision probability with the
    cluster is about 1/2 per bit.
    """
    if n_outliers > dim - 1:
        raise ValueError("need dim > n_outliers to place mutually orthogonal outliers")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    centre = basis[:, 0] * 5.0
    cluster = centre + rng.normal(0.0, 0.05, size=(n_cluster, dim))
    outliers = basis[:, 1 : n_outliers + 1].T * 5.0
    points = np.vstack([cluster, outliers])
    labels = np.r_[np.zeros(n_cluster, bool), np.ones(n_outliers, bool)]
    return Dataset(points, labels, name="cluster-plus-outliers")


def inner_border_outlier(
    n: int = 500,
    n_outliers: int = 5,
    centre=(4.0, 4.0),
    radius: float = 1.5,
    inner_quantile: float = 0.5,
    border_quantile: float = 0.9,
    seed: int = 0,
):
    """2-D disc of points plus a few outliers in other directions.

    Returns ``(dataset, classes)``, where ``classes`` holds ``"inner"`` for
    points within the ``inner_quantile`` of distance to the centre,
    ``"border"`` beyond ``border_quantile``, ``"outlier"`` for the outliers
    and ``""`` for the unlabeled middle ring.
    """
    rng = np.random.default_rng(seed)
    centre = np.asarray(centre, dtype=np.float64)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    phi = rng.uniform(0.0, 2 * np.pi, n)
    disc = centre + np.c_[r * np.cos(phi), r * np.sin(phi)]

    base = np.arctan2(centre[1], centre[0])
    angles = base + np.pi / 2 + np.linspace(0.0, np.pi, n_outliers + 2)[1:-1]
    outliers = np.linalg.norm(centre) * np.c_[np.cos(angles), np.sin(angles)]

    dist = np.linalg.norm(disc - centre, axis=1)
    classes = np.full(n + n_outliers, "", dtype=object)
    classes[:n][dist <= np.quantile(dist, inner_quantile)] = INNER
    classes[:n][dist >= np.quantile(dist, border_quantile)] = BORDER
    classes[n:] = OUTLIER
    points = np.vstack([disc, outliers])
    data = Dataset(points, classes == OUTLIER, name="inner-border-outlier")
    return data, classes


def normalized_score_curves(data: Dataset, classes, k_values) -> dict:
    """Mean of ``S(q, D) / n`` over each point class, for every K.

    Returns ``{"k": [...], "inner": [...], "border": [...], "outlier": [...]}``.
    """
    X = data.points
    classes = np.asarray(classes, dtype=object)
    # one pass of pairwise probabilities, then powers per K
    P = np.stack([collision_probabilities(x, X) for x in X])
    out = {"k": list(k_values), INNER: [], BORDER: [], OUTLIER: []}
    for k in k_values:
        per_point = (P**k).sum(axis=1) / data.n
        for name in (INNER, BORDER, OUTLIER):
            out[name].append(float(per_point[classes == name].mean()))
    return out

