"""Restarted k-means over word vectors, cluster ranking and gender tallies."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import GroupLabel
from .errors import MissingAssociation, TooFewWords, UnknownWord

_SSE_SLACK = 1e-9


@dataclass(frozen=True)
class ClusteringConfig:
    k_divisor: int = 50
    restarts: int = 50
    max_iters: int = 300
    seed: int = 0
    normalize_vectors: bool = True
    sse_normalization: str = "size"  # or "size_dim"
    k: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.sse_normalization not in ("size", "size_dim"):
            raise ValueError(f"unknown SSE normalization {self.sse_normalization!r}")


def choose_k(n_words: int, k_divisor: int = 50) -> int:
    return max(2, int(round(n_words / k_divisor)))


@dataclass
class Cluster:
    id: int
    members: tuple
    centroid: np.ndarray
    sse: float
    normalized_sse: float
    centroid_word: str | None = None
    f_count: int = 0
    m_count: int = 0

    @property
    def size(self):
        return len(self.members)

    @property
    def ratio(self):
        return f"{self.f_count}:{self.m_count}"


@dataclass
class ClusterModel:
    clusters: list
    total_sse: float
    k: int
    seed: int
    restart_sses: list = field(default_factory=list)
    best_restart: int = 0
    config: ClusteringConfig | None = None


# -- core Lloyd machinery on raw arrays ---------------------------------------

def _sq_dists(X, C):
    # ||x||^2 - 2 x.c + ||c||^2, clipped against round-off
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _exact_sse(X, labels, C):
    diff = X - C[labels]
    return float((diff * diff).sum())


def kmeans_pp_init(X, k, rng):
    n = len(X)
    idx = [int(rng.integers(n))]
    d2 = ((X - X[idx[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(remaining))
        else:
            nxt = int(np.searchsorted(np.cumsum(d2 / total), rng.random(), side="right"))
            nxt = min(nxt, n - 1)
        idx.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(1))
    return X[idx].copy()


def lloyd(X, centers, max_iters=300):
    """Lloyd iterations from ``centers``; returns labels, centers, sse, per-step sse history.

    An emptied cluster is re-seeded at the point farthest from its own centroid.
    """
    C = centers.copy()
    k = len(C)
    labels = _sq_dists(X, C).argmin(1)
    sse = _exact_sse(X, labels, C)
    history = [sse]
    for _ in range(max_iters):
        newC = np.empty_like(C)
        point_d2 = ((X - C[labels]) ** 2).sum(1)
        taken = set()
        for j in range(k):
            mask = labels == j
            if mask.any():
                newC[j] = X[mask].mean(0)
        for j in range(k):
            if not (labels == j).any():
                order = np.argsort(-point_d2, kind="stable")
                far = next(int(i) for i in order if int(i) not in taken)
                taken.add(far)
                newC[j] = X[far]
        new_labels = _sq_dists(X, newC).argmin(1)
        new_sse = _exact_sse(X, new_labels, newC)
        if new_sse > sse * (1 + _SSE_SLACK) + _SSE_SLACK:
            raise AssertionError(f"Lloyd step increased SSE: {sse} -> {new_sse}")
        C = newC
        history.append(new_sse)
        changed = not np.array_equal(new_labels, labels)
        labels, sse = new_labels, new_sse
        if not changed:
            break
    return labels, C, sse, history


def kmeans_points(X, k, restarts=50, max_iters=300, seed=0, workers=1):
    """Best-of-``restarts`` k-means++ / Lloyd; returns labels, centers, sse, all restart sses."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) < k:
        raise TooFewWords(f"need at least k={k} points, got {len(X)}")
    streams = np.random.SeedSequence(seed).spawn(restarts)

    def one(ss):
        rng = np.random.default_rng(ss)
        return lloyd(X, kmeans_pp_init(X, k, rng), max_iters)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, streams))
    else:
        runs = [one(ss) for ss in streams]
    sses = [r[2] for r in runs]
    best = min(range(restarts), key=lambda i: (sses[i], i))
    labels, C, sse, _ = runs[best]
    return labels, C, sse, sses, best


def _prepare(words, m, normalize):
    missing = sorted({w for w in words if w not in m})
    if missing:
        raise UnknownWord(missing)
    X = m.rows(list(words)).astype(np.float64)
    if normalize:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = X / np.where(norms > 0, norms, 1.0)
    return X


def nearest_member(members, X, centroid):
    """Member whose row of ``X`` is closest to ``centroid``; ties go to the smaller lemma."""
    d = ((X - centroid) ** 2).sum(1)
    return min(zip(d.tolist(), members))[1]


def kmeans(words, m, config: ClusteringConfig | None = None) -> ClusterModel:
    config = config or ClusteringConfig()
    words = sorted(set(words))
    k = config.k if config.k is not None else choose_k(len(words), config.k_divisor)
    if len(words) < k:
        raise TooFewWords(f"{len(words)} words cannot form k={k} clusters")
    X = _prepare(words, m, config.normalize_vectors)
    labels, C, total, sses, best = kmeans_points(
        X, k, config.restarts, config.max_iters, config.seed, config.workers)
    dim = X.shape[1]
    groups = []
    for j in range(k):
        idx = np.flatnonzero(labels == j)
        members = tuple(words[i] for i in idx)
        sse = float(((X[idx] - C[j]) ** 2).sum())
        norm = len(idx) * (dim if config.sse_normalization == "size_dim" else 1)
        cw = nearest_member(members, X[idx], C[j])
        groups.append((members, C[j].copy(), sse, sse / norm, cw))
    # ids follow the lexicographically first member, for deterministic output
    groups.sort(key=lambda g: g[0][0])
    clusters = [Cluster(i, *g) for i, g in enumerate(groups)]
    return ClusterModel(clusters, sum(c.sse for c in clusters), k, config.seed, sses, best, config)


def rank_clusters(model: ClusterModel):
    """Ascending normalized SSE; ties by smaller cluster, then first member."""
    return sorted(model.clusters, key=lambda c: (c.normalized_sse, c.size, c.members[0]))


def association_groups(assoc) -> dict:
    groups = {}
    for r in assoc:
        prev = groups.get(r.lemma)
        if prev is not None and prev != r.group:
            raise ValueError(f"{r.lemma!r} is associated with both groups")
        groups[r.lemma] = r.group
    return groups


def annotate_gender(model: ClusterModel, assoc, m=None) -> ClusterModel:
    """Fill F:M tallies (and the centroid word, when vectors are given or missing)."""
    groups = association_groups(assoc)
    normalize = model.config.normalize_vectors if model.config else True
    clusters = []
    for c in model.clusters:
        f = mcount = 0
        for w in c.members:
            g = groups.get(w)
            if g is None:
                raise MissingAssociation(w)
            if g == GroupLabel.F:
                f += 1
            else:
                mcount += 1
        cw = c.centroid_word
        if m is not None or cw is None:
            if m is None:
                raise ValueError("centroid word unknown and no embedding matrix given")
            X = _prepare(c.members, m, normalize)
            cw = nearest_member(list(c.members), X, c.centroid)
        clusters.append(replace(c, f_count=f, m_count=mcount, centroid_word=cw))
    return replace(model, clusters=clusters)


CLUSTER_COLUMNS = ("cluster_id", "rank", "normalized_sse", "f_m", "centroid_word", "members")


def report_rows(model: ClusterModel):
    for rank, c in enumerate(rank_clusters(model), 1):
        yield {
            "cluster_id": c.id,
            "rank": rank,
            "normalized_sse": repr(float(c.normalized_sse)),
            "f_m": c.ratio,
            "centroid_word": c.centroid_word or "",
            "members": ",".join(c.members),
        }
