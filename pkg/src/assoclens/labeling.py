"""Automatic cluster labels from the noun taxonomy, plus the centroid-word baseline.

Labeling runs in three steps: pick one sense per word so the chosen senses
are mutually close (sense disambiguation), collect every hypernym of the
chosen senses (candidate generation), and order candidates by their summed
path distance to the chosen senses (ranking).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Unlabelable, UnknownWord

DEFAULT_BUDGET = 100_000
MAX_SWEEPS = 20


@dataclass
class SenseAssignment:
    assignment: dict
    total_pairwise_distance: int
    method: str
    excluded: tuple = ()
    history: list = field(default_factory=list)

    @property
    def synsets(self):
        return list(self.assignment.values())


@dataclass(frozen=True)
class LabelCandidate:
    synset: object
    score: int
    rank: int = 0
    name: str = ""


def _distance_matrix(senses, db):
    """Block matrix of path distances between all senses; within-word blocks are zero."""
    offsets = np.cumsum([0] + [len(s) for s in senses])
    flat = [sid for s in senses for sid in s]
    owner = np.repeat(np.arange(len(senses)), [len(s) for s in senses])
    D = np.zeros((len(flat), len(flat)), dtype=np.int64)
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            if owner[a] != owner[b]:
                D[a, b] = D[b, a] = db.path_distance(flat[a], flat[b])
    return D, offsets


def _total(cols, D):
    return int(D[np.ix_(cols, cols)].sum() // 2)


def _exhaustive(senses, D, offsets):
    shape = tuple(len(s) for s in senses)
    size = math.prod(shape)
    idx = np.unravel_index(np.arange(size), shape)
    totals = np.zeros(size, dtype=np.int64)
    n = len(senses)
    for i in range(n):
        for j in range(i + 1, n):
            block = D[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]]
            totals += block[idx[i], idx[j]]
    best = int(np.argmin(totals))  # first minimum = earliest in sense order
    return [int(a[best]) for a in idx], int(totals[best])


def _descend(choice, D, offsets, max_sweeps=MAX_SWEEPS):
    """Coordinate descent in lexicographic word order; returns choice and per-sweep totals."""
    n = len(choice)
    cols = np.array([offsets[i] + c for i, c in enumerate(choice)])
    history = [_total(cols, D)]
    for _ in range(max_sweeps):
        changed = False
        for i in range(n):
            costs = D[offsets[i]:offsets[i + 1], cols].sum(1)
            cur = cols[i] - offsets[i]
            best = int(np.argmin(costs))
            if costs[best] < costs[cur]:
                cols[i] = offsets[i] + best
                changed = True
        history.append(_total(cols, D))
        if not changed:
            break
    return [int(c - offsets[i]) for i, c in enumerate(cols)], history


def _greedy(senses, D, offsets):
    """Descent from first-listed senses, then from every single-sense anchor.

    An anchored start pins one word to one of its senses and gives every
    other word its sense nearest that anchor.  The lowest total wins; ties
    keep the earliest start.
    """
    n = len(senses)
    choice, history = _descend([0] * n, D, offsets)
    best_choice, best_total = choice, history[-1]
    trace = list(history)
    for i in range(n):
        for s in range(len(senses[i])):
            anchor = offsets[i] + s
            start = []
            for j in range(n):
                if j == i:
                    start.append(s)
                else:
                    start.append(int(np.argmin(D[offsets[j]:offsets[j + 1], anchor])))
            ch, hist = _descend(start, D, offsets)
            if hist[-1] < best_total:
                best_choice, best_total = ch, hist[-1]
                trace.append(best_total)
    return best_choice, best_total, trace


def disambiguate(cluster, db, budget: int = DEFAULT_BUDGET, method: str | None = None):
    """Choose one noun sense per word minimising total pairwise path distance.

    Exhaustive over the sense product when it has at most ``budget``
    combinations, else greedy coordinate descent (see ``_greedy``).
    Words without noun senses are dropped and reported in ``excluded``.
    """
    words = sorted(set(cluster))
    senses = {w: db.synsets_for(w, "noun") for w in words}
    usable = [w for w in words if senses[w]]
    excluded = tuple(w for w in words if not senses[w])
    if len(usable) < 2:
        raise Unlabelable(f"fewer than two words with noun senses in {words}")
    sense_lists = [senses[w] for w in usable]
    D, offsets = _distance_matrix(sense_lists, db)
    if method is None:
        method = "exhaustive" if math.prod(len(s) for s in sense_lists) <= budget else "greedy"
    if method == "exhaustive":
        choice, total = _exhaustive(sense_lists, D, offsets)
        history = [total]
    elif method == "greedy":
        choice, total, history = _greedy(sense_lists, D, offsets)
    else:
        raise ValueError(f"unknown disambiguation method {method!r}")
    assignment = {w: sense_lists[i][c] for i, (w, c) in enumerate(zip(usable, choice))}
    return SenseAssignment(assignment, total, method, excluded, history)


def candidate_labels(assignment: SenseAssignment, db, max_depth=None) -> set:
    chosen = set(assignment.synsets)
    out = set()
    for s in chosen:
        out |= db.hypernym_closure(s, max_depth)
    return out - chosen


def rank_labels(candidates, assignment: SenseAssignment, db, top_n=None):
    """Ascending summed distance; ties prefer shallower synsets, then the first lemma."""
    chosen = assignment.synsets
    scored = []
    for c in candidates:
        score = sum(db.path_distance(c, s) for s in chosen)
        scored.append((score, db.depth(c), db.name(c), c))
    scored.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
    if top_n is not None:
        scored = scored[:top_n]
    return [LabelCandidate(c, score, rank, name)
            for rank, (score, _, name, c) in enumerate(scored, 1)]


def centroid_label(cluster, m, normalize=True) -> str:
    """Member nearest the mean of the members' vectors (ties lexicographic)."""
    members = sorted(cluster.members if hasattr(cluster, "members") else cluster)
    missing = [w for w in members if w not in m]
    if missing:
        raise UnknownWord(missing)
    X = m.rows(members).astype(np.float64)
    if normalize:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = X / np.where(norms > 0, norms, 1.0)
    centroid = X.mean(0)
    d = ((X - centroid) ** 2).sum(1)
    return min(zip(d.tolist(), members))[1]


@dataclass
class ClusterLabels:
    cluster_id: int
    centroid_word: str
    labels: list
    excluded: tuple
    assignment: SenseAssignment | None = None


def label_cluster(cluster, db, m=None, top_n=4, max_depth=None, budget=DEFAULT_BUDGET,
                  normalize=True) -> ClusterLabels:
    centroid = cluster.centroid_word
    if m is not None:
        centroid = centroid_label(cluster, m, normalize)
    try:
        sa = disambiguate(cluster.members, db, budget)
    except Unlabelable:
        excluded = tuple(w for w in sorted(cluster.members) if not db.synsets_for(w))
        return ClusterLabels(cluster.id, centroid, [], excluded, None)
    cands = candidate_labels(sa, db, max_depth)
    ranked = rank_labels(cands, sa, db, top_n) if cands else []
    return ClusterLabels(cluster.id, centroid, ranked, sa.excluded, sa)


def label_columns(top_n=4):
    cols = ["cluster_id", "centroid_word"]
    for i in range(1, top_n + 1):
        cols += [f"label_{i}", f"score_{i}"]
    return tuple(cols + ["excluded"])


def report_rows(labelings, top_n=4):
    for cl in labelings:
        row = {"cluster_id": cl.cluster_id, "centroid_word": cl.centroid_word or ""}
        for i in range(top_n):
            if i < len(cl.labels):
                row[f"label_{i + 1}"] = cl.labels[i].name
                row[f"score_{i + 1}"] = cl.labels[i].score
            else:
                row[f"label_{i + 1}"] = "N/A" if i == 0 and not cl.labels else ""
                row[f"score_{i + 1}"] = ""
        row["excluded"] = ",".join(cl.excluded)
        yield row
