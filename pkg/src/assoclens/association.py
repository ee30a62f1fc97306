"""Beta-Binomial association tests between terms and subject groups.

For a term seen ``k_i`` times in a balanced corpus of ``N`` tokens, its
frequency has posterior Beta(k_i, N - k_i).  Integrating that posterior
against a binomial draw of ``N_j`` tokens gives the Beta-Binomial null for
the count ``k_ij`` in group ``j``'s half; an unusually *large* count is
evidence of association, so the test statistic is the upper tail
P(X >= k_ij).  Verdicts are Bonferroni corrected.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

from .corpus import FEMALE_PRONOUNS, MALE_PRONOUNS, BalancedCorpus, GroupLabel, TermCounts
from .errors import DomainError

GROUP_DEFINING_TERMS = FEMALE_PRONOUNS | MALE_PRONOUNS

# below this, 1 - P(X < k) has lost too many digits; sum the upper tail instead
_COMPLEMENT_FLOOR = 1e-6
_CHUNK = 4096


def _check(k, n, alpha, beta):
    if not (isinstance(k, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise DomainError(f"k and n must be integers, got k={k!r}, n={n!r}")
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not (alpha > 0 and beta > 0 and math.isfinite(alpha) and math.isfinite(beta)):
        raise DomainError(f"need alpha, beta > 0, got alpha={alpha}, beta={beta}")


def _log_pmf(ks, n, alpha, beta):
    ks = np.asarray(ks, dtype=np.float64)
    return (gammaln(n + 1.0) - gammaln(ks + 1.0) - gammaln(n - ks + 1.0)
            + betaln(ks + alpha, n - ks + beta) - betaln(alpha, beta))


def beta_binomial_log_pmf(k: int, n: int, alpha: float, beta: float) -> float:
    """log C(n,k) B(k+alpha, n-k+beta) / B(alpha, beta)."""
    _check(k, n, alpha, beta)
    return float(_log_pmf(k, n, alpha, beta))


def _log_sum_range(lo, hi, n, alpha, beta):
    """log sum_{k=lo}^{hi-1} pmf(k)."""
    return float(logsumexp(_log_pmf(np.arange(lo, hi), n, alpha, beta)))


def _direct_upper(k, n, alpha, beta):
    acc = -np.inf
    lo = k
    while lo <= n:
        hi = min(lo + _CHUNK, n + 1)
        chunk = _log_pmf(np.arange(lo, hi), n, alpha, beta)
        acc = np.logaddexp(acc, logsumexp(chunk))
        # pmf is unimodal: once decreasing and negligible, the rest is too
        if chunk[-1] <= chunk[0] and chunk[-1] < acc - 40.0:
            break
        lo = hi
    return float(np.exp(acc))


def upper_tail(k: int, n: int, alpha: float, beta: float) -> float:
    """P(X >= k) for X ~ BetaBinomial(n, alpha, beta), summing the shorter tail."""
    _check(k, n, alpha, beta)
    if k == 0:
        return 1.0
    n_upper = n - k + 1
    if n_upper <= k:
        p = math.exp(_log_sum_range(k, n + 1, n, alpha, beta))
        # a tail near 1 is only accurate as the complement of the small side
        if p > 0.5:
            p = -math.expm1(_log_sum_range(0, k, n, alpha, beta))
    else:
        p = -math.expm1(_log_sum_range(0, k, n, alpha, beta))
        if p < _COMPLEMENT_FLOOR:
            p = _direct_upper(k, n, alpha, beta)
    return min(1.0, max(0.0, p))


def lower_tail(k: int, n: int, alpha: float, beta: float) -> float:
    """P(X <= k); the mirror image of the upper tail with the shapes swapped."""
    _check(k, n, alpha, beta)
    return upper_tail(n - k, n, beta, alpha)


@dataclass(frozen=True)
class CorrectionPolicy:
    base_alpha: float = 0.05
    method: str = "bonferroni"
    m: int | None = None

    def threshold(self, m=None) -> float:
        m = self.m if self.m is not None else m
        if m is None or m < 1:
            raise DomainError(f"number of hypotheses must be >= 1, got {m}")
        if self.method != "bonferroni":
            raise DomainError(f"unsupported correction {self.method!r}")
        return self.base_alpha / m


@dataclass(frozen=True)
class AssociationResult:
    lemma: str
    pos: str
    group: GroupLabel
    alpha: float
    beta: float
    k_in_group: int
    n_group: int
    p_value: float
    significant: bool

    @property
    def term(self):
        return (self.lemma, self.pos)

    @property
    def k_i(self):
        return int(self.alpha)


def term_pvalues(tc: TermCounts, balanced: BalancedCorpus) -> dict:
    """Upper-tail p-value of ``tc`` for each of F and M."""
    N = balanced.N
    if not 0 < tc.k_i < N:
        raise DomainError(f"term {tc.lemma!r}: k_i={tc.k_i} outside (0, N={N})")
    a, b = float(tc.k_i), float(N - tc.k_i)
    return {
        GroupLabel.F: upper_tail(tc.k_f, balanced.N_f, a, b),
        GroupLabel.M: upper_tail(tc.k_m, balanced.N_m, a, b),
    }


def tested_terms(counts, exclude=GROUP_DEFINING_TERMS, min_count=10):
    return [tc for tc in counts if tc.lemma not in exclude and tc.k_i >= min_count]


def associated_terms(counts, balanced: BalancedCorpus, policy: CorrectionPolicy | None = None,
                     exclude=GROUP_DEFINING_TERMS, min_count=10, workers=1):
    """Test every eligible term against both groups.

    Each term is reported once, for the group with the smaller p-value.  The
    Bonferroni denominator defaults to twice the number of tested terms.
    Results are ordered F then M, each by ascending (p, lemma).
    """
    policy = policy or CorrectionPolicy()
    tested = tested_terms(counts, exclude, min_count)
    if not tested:
        return []
    N = balanced.N
    for tc in tested:
        if not 0 < tc.k_i < N:
            raise DomainError(f"term {tc.lemma!r}: k_i={tc.k_i} outside (0, N={N})")
    threshold = policy.threshold(2 * len(tested))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pvals = list(pool.map(lambda tc: term_pvalues(tc, balanced), tested))
    else:
        pvals = [term_pvalues(tc, balanced) for tc in tested]

    results = []
    for tc, ps in zip(tested, pvals):
        group = GroupLabel.F if ps[GroupLabel.F] <= ps[GroupLabel.M] else GroupLabel.M
        p = ps[group]
        results.append(AssociationResult(
            tc.lemma, tc.pos, group, float(tc.k_i), float(N - tc.k_i),
            tc.k_for(group), balanced.N_f if group == GroupLabel.F else balanced.N_m,
            p, p <= threshold))
    order = {GroupLabel.F: 0, GroupLabel.M: 1}
    results.sort(key=lambda r: (order[r.group], r.p_value, r.lemma, r.pos))
    return results


REPORT_COLUMNS = ("term", "pos", "group", "k_i", "k_ij", "N_j", "p_value", "significant")


def report_rows(results):
    for r in results:
        yield {
            "term": r.lemma,
            "pos": r.pos,
            "group": r.group.value,
            "k_i": r.k_i,
            "k_ij": r.k_in_group,
            "N_j": r.n_group,
            "p_value": f"{r.p_value:.10g}",
            "significant": "true" if r.significant else "false",
        }
