"""Seeded two-group corpora with known over-represented terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, GroupLabel


@dataclass
class PlantedCorpus:
    documents: list
    planted_f: tuple
    planted_m: tuple
    background: tuple


def _background_words(n):
    return tuple(f"w{i:04d}" for i in range(n))


def planted_corpus(tokens_per_group: int = 200_000, background: int = 2000,
                   planted_f=20, planted_m=0, ratio: float = 3.0,
                   planted_rate: float = 1e-3, zipf: float = 0.7,
                   doc_tokens: int = 200, sentence_tokens: int = 20,
                   seed: int = 0) -> PlantedCorpus:
    """Multinomial documents for an F group and an M group.

    Background words share one Zipf-shaped distribution across both groups.
    Each planted word has rate ``planted_rate`` in one group and
    ``ratio * planted_rate`` in the group it is planted for.  ``planted_f``
    and ``planted_m`` are either counts (words are named ``pf00``...) or
    explicit word lists.
    """
    rng = np.random.default_rng(seed)
    pf = tuple(planted_f) if not isinstance(planted_f, int) else tuple(f"pf{i:02d}" for i in range(planted_f))
    pm = tuple(planted_m) if not isinstance(planted_m, int) else tuple(f"pm{i:02d}" for i in range(planted_m))
    bg = _background_words(background)
    vocab = bg + pf + pm
    weights = 1.0 / np.arange(1, background + 1) ** zipf
    weights /= weights.sum()

    def probs(boost_f, boost_m):
        planted = np.array([planted_rate * boost_f] * len(pf) + [planted_rate * boost_m] * len(pm))
        rest = 1.0 - planted.sum()
        if rest <= 0:
            raise ValueError("planted mass exceeds 1")
        return np.concatenate([weights * rest, planted])

    p_groups = {GroupLabel.F: probs(ratio, 1.0), GroupLabel.M: probs(1.0, ratio)}
    n_docs = max(1, tokens_per_group // doc_tokens)
    docs = []
    for group in (GroupLabel.F, GroupLabel.M):
        draws = rng.choice(len(vocab), size=(n_docs, doc_tokens), p=p_groups[group])
        for d in range(n_docs):
            words = [vocab[i] for i in draws[d]]
            sents = [" ".join(words[s:s + sentence_tokens])
                     for s in range(0, doc_tokens, sentence_tokens)]
            text = ". ".join(sents) + "."
            docs.append(Document(f"{group.value.lower()}{d:05d}", text, group, {}))
    return PlantedCorpus(docs, pf, pm, bg)
