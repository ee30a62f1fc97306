import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import betabinom

from assoclens import association as A
from assoclens import corpus
from assoclens.corpus import Document, GroupLabel
from assoclens.errors import DomainError

params = st.tuples(st.integers(0, 300), st.floats(0.05, 80), st.floats(0.05, 80))


def test_pmf_examples():
    assert A.beta_binomial_log_pmf(0, 0, 1.5, 2.5) == 0.0
    assert A.beta_binomial_log_pmf(0, 1, 2, 3) == pytest.approx(math.log(3 / 5), abs=1e-14)


def test_tail_examples():
    assert A.upper_tail(0, 10, 2, 8) == 1.0
    assert A.upper_tail(0, 0, 2, 8) == 1.0
    with pytest.raises(DomainError):
        A.upper_tail(11, 10, 2, 8)


def test_tail_monotone_across_path_switch():
    # the summation side flips near n/2 while the tail is still close to 1
    tails = [A.upper_tail(j, 172, 68.0, 4.0) for j in range(173)]
    assert all(x >= y for x, y in zip(tails, tails[1:]))


def test_domain_errors():
    for args in [(-1, 5, 1, 1), (0, -1, 1, 1), (0, 5, 0, 1), (0, 5, 1, -2), (0, 5, float("nan"), 1)]:
        with pytest.raises(DomainError):
            A.upper_tail(*args)
    with pytest.raises(DomainError):
        A.beta_binomial_log_pmf(6, 5, 1, 1)


@settings(max_examples=150, deadline=None)
@given(params)
def test_pmf_normalized_and_matches_scipy(p):
    n, a, b = p
    logs = np.array([A.beta_binomial_log_pmf(k, n, a, b) for k in range(n + 1)])
    assert abs(np.exp(logs).sum() - 1) < 1e-9
    ref = betabinom.logpmf(np.arange(n + 1), n, a, b)
    finite = ref > -600
    assert np.allclose(logs[finite], ref[finite], rtol=1e-8, atol=1e-10)


@settings(max_examples=150, deadline=None)
@given(params, st.data())
def test_tail_monotone_and_symmetric(p, data):
    n, a, b = p
    k = data.draw(st.integers(0, n))
    tails = [A.upper_tail(j, n, a, b) for j in range(n + 1)]
    assert all(x >= y - 1e-15 for x, y in zip(tails, tails[1:]))
    assert A.upper_tail(k, n, a, b) == pytest.approx(A.lower_tail(n - k, n, b, a), rel=1e-12)
    if k > 0:
        total = A.upper_tail(k, n, a, b) + A.lower_tail(k - 1, n, a, b)
        assert total == pytest.approx(1.0, abs=1e-9)
    ref = betabinom.sf(k - 1, n, a, b)
    if ref > 1e-12:
        assert A.upper_tail(k, n, a, b) == pytest.approx(ref, rel=1e-6)


def test_far_tail_accuracy():
    # scipy's sf loses relative precision this far out; compare with a plain pmf sum
    n, a, b = 400_000, 300.0, 399_700.0
    k = 600
    direct = sum(math.exp(A.beta_binomial_log_pmf(j, n, a, b)) for j in range(k, 2000))
    assert A.upper_tail(k, n, a, b) == pytest.approx(direct, rel=1e-9)
    assert 0 < A.upper_tail(k, n, a, b) < 1e-20


def test_correction_policy():
    assert A.CorrectionPolicy().threshold(10) == pytest.approx(0.005)
    assert A.CorrectionPolicy(m=4).threshold(10) == pytest.approx(0.0125)
    with pytest.raises(DomainError):
        A.CorrectionPolicy().threshold(0)
    with pytest.raises(DomainError):
        A.CorrectionPolicy(method="holm").threshold(5)


def _balanced(f_text, m_text, copies=20):
    docs = [Document(f"f{i}", f_text, GroupLabel.F) for i in range(copies)]
    docs += [Document(f"m{i}", m_text, GroupLabel.M) for i in range(copies)]
    return corpus.balance(docs, seed=0)


def test_identical_halves_never_significant():
    text = "alpha beta beta gamma gamma gamma delta " * 5
    b = _balanced(text, text)
    res = A.associated_terms(corpus.term_counts(b), b, A.CorrectionPolicy(m=1))
    assert res and not any(r.significant for r in res)


def test_pronouns_excluded_and_min_count():
    b = _balanced("she her gown gown gown rare", "he him gown gown gown", copies=12)
    res = A.associated_terms(corpus.term_counts(b), b)
    terms = {r.lemma for r in res}
    assert terms == {"gown", "rare"}
    res = A.associated_terms(corpus.term_counts(b), b, min_count=13)
    assert {r.lemma for r in res} == {"gown"}


def test_result_fields_and_order():
    b = _balanced("gown gown gown dress x x x x", "film film film dress x x x x")
    res = A.associated_terms(corpus.term_counts(b), b)
    assert [r.group for r in res] == sorted((r.group for r in res), key=lambda g: g != GroupLabel.F)
    gown = next(r for r in res if r.lemma == "gown")
    assert gown.group == GroupLabel.F and gown.significant
    assert gown.k_in_group == 60 and gown.n_group == b.N_f
    assert gown.alpha == 60 and gown.beta == b.N - 60
    assert gown.p_value == pytest.approx(A.upper_tail(60, b.N_f, 60, b.N - 60))
    film = next(r for r in res if r.lemma == "film")
    assert film.group == GroupLabel.M and film.significant
    rows = list(A.report_rows(res))
    assert list(rows[0]) == list(A.REPORT_COLUMNS)


def test_workers_do_not_change_results():
    b = _balanced("gown gown dress x y z z z", "film dress dress x y y z")
    c = corpus.term_counts(b)
    assert A.associated_terms(c, b, min_count=1) == A.associated_terms(c, b, min_count=1, workers=4)


small_corpus = st.lists(st.tuples(st.sampled_from([GroupLabel.F, GroupLabel.M]),
                                  st.lists(st.sampled_from("abcdef"), min_size=1, max_size=30)),
                        min_size=2, max_size=12)


@settings(max_examples=60, deadline=None)
@given(small_corpus)
def test_label_swap_swaps_pvalues(specs):
    docs = [Document(str(i), " ".join(w), g) for i, (g, w) in enumerate(specs)]
    if {d.group for d in docs} != {GroupLabel.F, GroupLabel.M}:
        return
    b = corpus.balance(docs, seed=0)
    swap = {GroupLabel.F: GroupLabel.M, GroupLabel.M: GroupLabel.F}
    flipped = corpus.BalancedCorpus(
        tuple(d.with_group(swap[d.group]) for d in b.docs_m),
        tuple(d.with_group(swap[d.group]) for d in b.docs_f),
        b.seed, b.mode, b.N, b.N_m, b.N_f, b.lexemes)
    for tc, tc2 in zip(corpus.term_counts(b), corpus.term_counts(flipped)):
        assert tc.lemma == tc2.lemma
        if not 0 < tc.k_i < b.N:
            continue
        p, q = A.term_pvalues(tc, b), A.term_pvalues(tc2, flipped)
        assert p[GroupLabel.F] == q[GroupLabel.M]
        assert p[GroupLabel.M] == q[GroupLabel.F]


@settings(max_examples=60, deadline=None)
@given(small_corpus, st.integers(1, 50), st.integers(0, 50))
def test_raising_m_never_adds_terms(specs, m, extra):
    docs = [Document(str(i), " ".join(w), g) for i, (g, w) in enumerate(specs)]
    if {d.group for d in docs} != {GroupLabel.F, GroupLabel.M}:
        return
    b = corpus.balance(docs, seed=0)
    counts = [tc for tc in corpus.term_counts(b) if 0 < tc.k_i < b.N]
    lo = A.associated_terms(counts, b, A.CorrectionPolicy(m=m), min_count=1)
    hi = A.associated_terms(counts, b, A.CorrectionPolicy(m=m + extra), min_count=1)
    assert {r.lemma for r in hi if r.significant} <= {r.lemma for r in lo if r.significant}
