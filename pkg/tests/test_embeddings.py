import math
import os
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from assoclens import embeddings as E
from assoclens.corpus import Document
from assoclens.errors import EmptyVocabulary, FormatError, UnknownWord


def finite_difference_check(rng, vocab=12, dim=6, n_ctx=4, n_neg=5, eps=1e-6):
    w_in = rng.normal(scale=0.5, size=(vocab, dim))
    w_out = rng.normal(scale=0.5, size=(vocab, dim))
    context = rng.integers(0, vocab, size=n_ctx)
    target = int(rng.integers(vocab))
    negatives = rng.integers(0, vocab, size=n_neg)
    _, g_in, g_out = E.dense_gradients(w_in, w_out, context, target, negatives)
    num_in, num_out = np.zeros_like(w_in), np.zeros_like(w_out)
    for W, G in ((w_in, num_in), (w_out, num_out)):
        for idx in np.ndindex(W.shape):
            old = W[idx]
            W[idx] = old + eps
            up = E.example_loss(w_in, w_out, context, target, negatives)
            W[idx] = old - eps
            down = E.example_loss(w_in, w_out, context, target, negatives)
            W[idx] = old
            G[idx] = (up - down) / (2 * eps)
    analytic = np.concatenate([g_in.ravel(), g_out.ravel()])
    numeric = np.concatenate([num_in.ravel(), num_out.ravel()])
    return np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic) + np.linalg.norm(numeric),
                                                    1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gradients_match_finite_differences(seed):
    assert finite_difference_check(np.random.default_rng(seed)) < 1e-4


def test_repeated_context_word_gradient():
    # a word appearing twice in the context receives both shares
    rng = np.random.default_rng(3)
    w_in, w_out = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    _, g_in, _ = E.dense_gradients(w_in, w_out, [1, 1, 2], 0, [3])
    _, grad_h, _, _ = E.cbow_loss_and_grads(w_in, w_out, [1, 1, 2], 0, [3])
    assert np.allclose(g_in[1], 2 * grad_h / 3)


def two_topic_corpus(n=150):
    docs = [Document(f"a{i}", "red gown dress skirt.", meta={}) for i in range(n)]
    docs += [Document(f"b{i}", "film movie email answer.", meta={}) for i in range(n)]
    return docs


def cos(u, v):
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def test_co_occurring_words_are_closer():
    cfg = E.EmbeddingConfig(dimension=10, epochs=20, min_count=1, seed=5)
    m = E.train_cbow(two_topic_corpus(), cfg)
    same = cos(m.vector("gown"), m.vector("dress"))
    other = cos(m.vector("gown"), m.vector("film"))
    assert same > other


def test_loss_decreases_over_first_epochs():
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(30)]
    docs = []
    for i in range(100):
        topic = i % 3
        sent = rng.choice(words[topic * 10:(topic + 1) * 10], size=12)
        docs.append(Document(str(i), " ".join(sent) + "."))
    m = E.train_cbow(docs, E.EmbeddingConfig(dimension=16, epochs=5, min_count=1, seed=2))
    h = m.loss_history
    assert len(h) == 5
    assert all(a > b for a, b in zip(h, h[1:]))


def test_deterministic_runs_identical_and_seed_matters():
    cfg = E.EmbeddingConfig(dimension=8, epochs=2, min_count=1, seed=9)
    a = E.train_cbow(two_topic_corpus(30), cfg)
    b = E.train_cbow(two_topic_corpus(30), cfg)
    assert np.array_equal(a.vectors, b.vectors)
    c = E.train_cbow(two_topic_corpus(30), E.EmbeddingConfig(dimension=8, epochs=2, min_count=1,
                                                              seed=10))
    assert not np.array_equal(a.vectors, c.vectors)


def test_parallel_mode_is_finite():
    cfg = E.EmbeddingConfig(dimension=8, epochs=2, min_count=1, deterministic=False, workers=3)
    m = E.train_cbow(two_topic_corpus(30), cfg)
    assert np.isfinite(m.vectors).all()


def test_vocabulary_is_exactly_min_count_filter():
    sents = [["a", "b", "a"], ["c", "a", "b"], ["d"]]
    m = E.train_cbow(None, E.EmbeddingConfig(dimension=4, epochs=1, min_count=2),
                     sentences=sents)
    counts = Counter(w for s in sents for w in s)
    assert set(m.words) == {w for w, c in counts.items() if c >= 2}
    assert m.words == ["a", "b"]
    with pytest.raises(EmptyVocabulary):
        E.train_cbow(None, E.EmbeddingConfig(min_count=5), sentences=sents)


def test_initialisation_range():
    m = E.train_cbow(None, E.EmbeddingConfig(dimension=50, epochs=0, min_count=1),
                     sentences=[["a", "b", "c"]])
    assert np.abs(m.vectors).max() <= 0.5 / 50


def test_save_load_round_trip(tmp_path):
    m = E.train_cbow(two_topic_corpus(20), E.EmbeddingConfig(dimension=6, epochs=1, min_count=1))
    p = tmp_path / "v.txt"
    E.save_vectors(m, p)
    back = E.load_vectors(p)
    assert back.words == m.words
    assert np.abs(back.vectors - m.vectors).max() < 1e-8


@pytest.mark.parametrize("content", [
    "2 3\na 1 2 3\nb 1 2 3\nc 1 2 3\n",
    "2 3\na 1 2 3\n",
    "2 3\na 1 2 3\nb 1 2\n",
    "2 3\na 1 2 3\na 1 2 3\n",
    "2 3\na 1 2 3\nb 1 x 3\n",
    "two three\n",
    "2 3\na 1 2 3\nb 1 2 nan\n",
])
def test_load_rejects_malformed(tmp_path, content):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    with pytest.raises(FormatError):
        E.load_vectors(p)


def test_bad_line_number_reported(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3 2\na 1 2\nb 1\nc 1 2\n")
    with pytest.raises(FormatError) as exc:
        E.load_vectors(p)
    assert exc.value.line == 3


def test_external_fixture(fixtures_dir):
    path = os.path.join(fixtures_dir, "external_vectors.vec")
    # independent parse: header, then whitespace-split rows
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    count, dim = map(int, lines[0])
    assert len(lines) - 1 == count and all(len(r) == dim + 1 for r in lines[1:])
    m = E.load_vectors(path)
    assert len(m) == count and m.dimension == dim
    assert m.vector("skirt")[0] == pytest.approx(0.0987)


def test_nearest_neighbors():
    vocab = {w: i for i, w in enumerate("abcde")}
    X = np.array([[1, 0], [0, 1], [1, 1], [-1, 0], [3, 0.0]])
    m = E.EmbeddingMatrix(vocab, X)
    assert E.nearest_neighbors(m, "a", 0) == []
    nn = E.nearest_neighbors(m, "a", 4)
    # hand values: cos(a,e)=1, cos(a,c)=1/sqrt2, cos(a,b)=0, cos(a,d)=-1
    assert [w for w, _ in nn] == ["e", "c", "b", "d"]
    assert [s for _, s in nn] == pytest.approx([1.0, 1 / math.sqrt(2), 0.0, -1.0])
    two = E.EmbeddingMatrix({"x": 0, "y": 1}, np.array([[1.0, 0], [0, 2.0]]))
    assert E.nearest_neighbors(two, "x", 1) == [("y", 0.0)]
    with pytest.raises(UnknownWord):
        E.nearest_neighbors(m, "zz", 1)


def test_neighbor_ties_are_lexicographic():
    m = E.EmbeddingMatrix({"q": 0, "b": 1, "a": 2}, np.array([[1.0, 0], [2.0, 0], [5.0, 0]]))
    assert [w for w, _ in E.nearest_neighbors(m, "q", 2)] == ["a", "b"]
