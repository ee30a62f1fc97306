import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assoclens import labeling as L
from assoclens import wordnet
from assoclens.clustering import Cluster
from assoclens.embeddings import EmbeddingMatrix
from assoclens.errors import Unlabelable, UnknownWord


def brute_force(words, db):
    senses = [db.synsets_for(w) for w in sorted(words)]
    best = None
    for combo in itertools.product(*senses):
        total = sum(db.path_distance(a, b) for a, b in itertools.combinations(combo, 2))
        if best is None or total < best[0]:
            best = (total, combo)
    return best


def relabeled_toy(seed):
    """Toy taxonomy structure where each random word owns 1-5 random synsets."""
    base = wordnet.load(wordnet.toy_taxonomy_dir())
    ents = [(s.offset, [f"n{s.offset}"], [h.offset for h in syn.hypernyms], "")
            for s, syn in base.synsets.items()]
    offsets = [e[0] for e in ents]
    rng = np.random.default_rng(seed)
    n_words = int(rng.integers(2, 5))
    order = {f"word{i}": [int(o) for o in rng.choice(offsets, size=int(rng.integers(1, 6)),
                                                     replace=False)]
             for i in range(n_words)}
    return wordnet.TaxonomyDb.build(ents, sense_order=order), sorted(order)


def test_fixture_cluster_matches_brute_force(toy_db):
    sa = L.disambiguate(["gown", "skirt", "dress"], toy_db)
    assert sa.method == "exhaustive"
    total, combo = brute_force(["gown", "skirt", "dress"], toy_db)
    assert sa.total_pairwise_distance == total == 6
    # the garment sense of skirt beats the listed-first slang sense
    assert toy_db.name(sa.assignment["skirt"]) == "skirt"
    assert toy_db.synsets[sa.assignment["skirt"]].hypernyms == \
        toy_db.synsets[sa.assignment["gown"]].hypernyms


def test_bank_shore_picks_river_sense(toy_db):
    sa = L.disambiguate(["bank", "shore"], toy_db)
    bank = sa.assignment["bank"]
    assert "water" in toy_db.synsets[bank].gloss
    assert bank != toy_db.synsets_for("bank")[0]


def test_monosemous_words_forced(toy_db):
    sa = L.disambiguate(["gown", "blouse"], toy_db)
    assert sa.method == "exhaustive"
    assert sa.assignment == {"blouse": toy_db.synsets_for("blouse")[0],
                             "gown": toy_db.synsets_for("gown")[0]}


def test_unlabelable_and_exclusions(toy_db):
    with pytest.raises(Unlabelable):
        L.disambiguate(["gown", "red", "xyzzyq"], toy_db)
    sa = L.disambiguate(["gown", "dress", "red"], toy_db)
    assert sa.excluded == ("red",)


def test_rank_labels_toy(toy_db):
    sa = L.disambiguate(["gown", "skirt", "dress"], toy_db)
    cands = L.candidate_labels(sa, toy_db)
    names = {toy_db.name(c) for c in cands}
    assert {"clothing", "covering", "artifact"} <= names
    ranked = L.rank_labels(cands, sa, toy_db)
    # hand path sums: clothing 1+1+1, covering 2+2+2, artifact 3+3+3
    assert [(c.name, c.score) for c in ranked[:3]] == [("clothing", 3), ("covering", 6),
                                                       ("artifact", 9)]
    assert [c.rank for c in ranked] == list(range(1, len(ranked) + 1))


def test_candidate_edge_cases(toy_db):
    root = next(s for s in toy_db.roots)
    sa = L.SenseAssignment({"entity": root}, 0, "exhaustive")
    assert L.candidate_labels(sa, toy_db) == set()
    gown = toy_db.synsets_for("gown")[0]
    sa = L.SenseAssignment({"gown": gown}, 0, "exhaustive")
    one = L.rank_labels({toy_db.synsets[gown].hypernyms[0]}, sa, toy_db)
    assert len(one) == 1 and one[0].rank == 1
    assert L.candidate_labels(sa, toy_db, max_depth=1) == set(toy_db.synsets[gown].hypernyms)


def test_exhaustive_is_local_minimum(toy_db):
    words = ["bank", "skirt", "answer", "woman"]
    sa = L.disambiguate(words, toy_db)
    for w in words:
        for alt in toy_db.synsets_for(w):
            trial = dict(sa.assignment, **{w: alt})
            total = sum(toy_db.path_distance(a, b)
                        for a, b in itertools.combinations(trial.values(), 2))
            assert total >= sa.total_pairwise_distance


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_greedy_trace_non_increasing_and_valid(seed):
    db, words = relabeled_toy(seed)
    g = L.disambiguate(words, db, method="greedy")
    assert all(b <= a for a, b in zip(g.history, g.history[1:]))
    for w, s in g.assignment.items():
        assert s in db.synsets_for(w)
    total = sum(db.path_distance(a, b) for a, b in itertools.combinations(g.synsets, 2))
    assert total == g.total_pairwise_distance
    e = L.disambiguate(words, db, method="exhaustive")
    assert e.total_pairwise_distance == brute_force(words, db)[0]
    assert e.total_pairwise_distance <= g.total_pairwise_distance


def test_budget_switches_method(toy_db):
    assert L.disambiguate(["bank", "skirt"], toy_db, budget=3).method == "greedy"
    assert L.disambiguate(["bank", "skirt"], toy_db, budget=4).method == "exhaustive"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_rank_stability_under_added_candidate(seed, data):
    db, words = relabeled_toy(seed)
    sa = L.disambiguate(words, db)
    pool = sorted(db.synsets)
    cands = set(data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=8)))
    extra = data.draw(st.sampled_from(pool))
    before = [c.synset for c in L.rank_labels(cands, sa, db)]
    after = [c.synset for c in L.rank_labels(cands | {extra}, sa, db) if c.synset in cands]
    assert before == after
    scores = [c.score for c in L.rank_labels(cands, sa, db)]
    assert scores == sorted(scores) and all(isinstance(s, int) and s >= 0 for s in scores)


def test_centroid_label():
    m = EmbeddingMatrix({"a": 0, "b": 1, "c": 2, "z": 3},
                        np.array([[1.0, 0, 0], [0.8, 0.6, 0], [0.6, 0.8, 0], [0, 0, 1]]))
    c = Cluster(0, ("a", "b", "c"), np.zeros(3), 0, 0)
    # unit rows; centroid (0.8, 0.4667, 0) is nearest to b by hand
    assert L.centroid_label(c, m) == "b"
    assert L.centroid_label(["z"], m) == "z"
    with pytest.raises(UnknownWord):
        L.centroid_label(["a", "q"], m)


def test_label_cluster_and_report(toy_db):
    ok = L.label_cluster(Cluster(0, ("dress", "gown", "skirt"), np.zeros(1), 0, 0, "gown"), toy_db)
    bad = L.label_cluster(Cluster(1, ("red", "pink"), np.zeros(1), 0, 0, "red"), toy_db)
    rows = list(L.report_rows([ok, bad]))
    assert list(rows[0]) == list(L.label_columns(4))
    assert rows[0]["label_1"] == "clothing" and rows[0]["score_1"] == 3
    assert rows[1]["label_1"] == "N/A" and rows[1]["excluded"] == "pink,red"
