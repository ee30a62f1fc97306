"""Documents, tokenization, group balancing and term counting."""

from __future__ import annotations

import enum
import json
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, MissingGroup

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
POS_CATEGORIES = ("noun", "verb", "adjective", "other")


class GroupLabel(str, enum.Enum):
    F = "F"
    M = "M"
    NeitherUnknown = "U"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        v = str(value).strip().upper()
        if v in ("U", "N", "NEITHER", "UNKNOWN", "NEITHERUNKNOWN"):
            return cls.NeitherUnknown
        return cls(v)


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    group: GroupLabel = GroupLabel.NeitherUnknown
    meta: Mapping[str, str] = field(default_factory=dict)
    # optional pre-tagged tokens: sequence of (lemma, pos) pairs
    tokens: tuple | None = None

    def with_group(self, group):
        return Document(self.id, self.text, GroupLabel.parse(group), dict(self.meta), self.tokens)


@dataclass(frozen=True)
class Lexeme:
    surface: str
    lemma: str
    pos_categories: frozenset = frozenset({"other"})


def _read_wordlist(name):
    with open(os.path.join(DATA_DIR, name), encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip() and not w.startswith("#"))


FEMALE_PRONOUNS = _read_wordlist("pronouns_female.txt")
MALE_PRONOUNS = _read_wordlist("pronouns_male.txt")
STOPWORDS = _read_wordlist("stopwords.txt")

TOKEN_PATTERN = r"[^\W_]+(?:['’\-][^\W_]+)*"
_SENTENCE_BREAK = re.compile(r"[.!?]+")
_POSSESSIVE = re.compile(r"['’]s$")


@dataclass
class TokenizerConfig:
    """``db`` is a loaded TaxonomyDb; without one, lemmas are just lowercased surfaces."""

    db: object | None = None
    lowercase: bool = True
    strip_possessive: bool = True
    drop_stopwords: bool = False
    stopwords: frozenset = STOPWORDS
    token_pattern: str = TOKEN_PATTERN

    def __post_init__(self):
        self._regex = re.compile(self.token_pattern)


def split_sentences(text: str) -> list[str]:
    """Split on runs of ``.``, ``!`` and ``?``; empty pieces are dropped."""
    return [s for s in _SENTENCE_BREAK.split(text) if s.strip()]


def _lemmatize(word, config):
    if config.db is None:
        return word
    return config.db.morphology.lemmatize(word)


def tokenize(text: str, config: TokenizerConfig | None = None) -> list[Lexeme]:
    config = config or TokenizerConfig()
    out = []
    for m in config._regex.finditer(text):
        surface = m.group(0)
        word = surface.lower() if config.lowercase else surface
        if config.strip_possessive:
            word = _POSSESSIVE.sub("", word)
        if not word:
            continue
        lemma = _lemmatize(word, config)
        if config.drop_stopwords and lemma in config.stopwords:
            continue
        out.append(assign_pos(Lexeme(surface, lemma), config.db))
    return out


def tokenize_sentences(text: str, config: TokenizerConfig | None = None) -> list[list[Lexeme]]:
    config = config or TokenizerConfig()
    sents = (tokenize(s, config) for s in split_sentences(text))
    return [s for s in sents if s]


_PUNCT_POS = {".", "punct", "PUNCT", ",", ":", "``", "''", "-LRB-", "-RRB-"}


def normalize_pos_tag(tag: str | None) -> str | None:
    """Map Penn, Universal or plain tag names onto noun/verb/adjective/other."""
    if tag is None:
        return None
    t = tag.strip()
    low = t.lower()
    if low in POS_CATEGORIES:
        return low
    if low in ("n", "propn") or t.startswith("NN"):
        return "noun"
    if low == "v" or t.startswith("VB") or low in ("verb", "aux"):
        return "verb"
    if low in ("a", "s", "adj") or t.startswith("JJ"):
        return "adjective"
    return "other"


def document_sentences(doc: Document, config: TokenizerConfig | None = None) -> list[list[Lexeme]]:
    """Sentences of lexemes for ``doc``, honouring pre-tagged tokens when present."""
    config = config or TokenizerConfig()
    if doc.tokens is None:
        return tokenize_sentences(doc.text, config)
    sents, cur = [], []
    for lemma, pos in doc.tokens:
        lemma = str(lemma).lower() if config.lowercase else str(lemma)
        if (pos in _PUNCT_POS) or not re.search(r"[^\W_]", lemma):
            if _SENTENCE_BREAK.fullmatch(lemma) and cur:
                sents.append(cur)
                cur = []
            continue
        if config.drop_stopwords and lemma in config.stopwords:
            continue
        cur.append(assign_pos(Lexeme(lemma, lemma), config.db, pos))
    if cur:
        sents.append(cur)
    return sents


def document_lexemes(doc: Document, config: TokenizerConfig | None = None) -> list[Lexeme]:
    return [lx for sent in document_sentences(doc, config) for lx in sent]


def assign_pos(lexeme: Lexeme, db, tagged_hint: str | None = None) -> Lexeme:
    hinted = normalize_pos_tag(tagged_hint)
    if hinted is not None:
        cats = frozenset({hinted})
    elif db is None:
        cats = frozenset({"other"})
    else:
        cats = frozenset(db.pos_categories(lexeme.lemma)) or frozenset({"other"})
    return Lexeme(lexeme.surface, lexeme.lemma, cats)


# -- balancing ----------------------------------------------------------------

@dataclass
class BalancedCorpus:
    docs_f: tuple
    docs_m: tuple
    seed: int
    mode: str
    N: int
    N_f: int
    N_m: int
    lexemes: Mapping[str, tuple] = field(repr=False, default_factory=dict)

    @property
    def documents(self):
        return self.docs_f + self.docs_m

    def ids(self):
        return sorted(d.id for d in self.documents)


def balance(corpus: Sequence[Document], seed: int = 0, mode: str = "documents",
            tokenizer: TokenizerConfig | None = None) -> BalancedCorpus:
    """Undersample the more prevalent group uniformly at random.

    ``mode="documents"`` equalises document counts.  ``mode="tokens"`` visits
    the prevalent group's documents in a random order and keeps each one that
    still fits under the minority group's token total.
    """
    tokenizer = tokenizer or TokenizerConfig()
    docs_f = [d for d in corpus if d.group == GroupLabel.F]
    docs_m = [d for d in corpus if d.group == GroupLabel.M]
    missing = [g for g, ds in (("F", docs_f), ("M", docs_m)) if not ds]
    if missing:
        raise MissingGroup(f"corpus has no documents for group(s) {', '.join(missing)}")

    lexemes = {d.id: tuple(document_lexemes(d, tokenizer)) for d in docs_f + docs_m}
    rng = np.random.default_rng(seed)

    if mode == "documents":
        if len(docs_f) != len(docs_m):
            big, small = (docs_f, docs_m) if len(docs_f) > len(docs_m) else (docs_m, docs_f)
            keep = np.sort(rng.choice(len(big), size=len(small), replace=False))
            subset = [big[i] for i in keep]
            if big is docs_f:
                docs_f = subset
            else:
                docs_m = subset
    elif mode == "tokens":
        tok_f = sum(len(lexemes[d.id]) for d in docs_f)
        tok_m = sum(len(lexemes[d.id]) for d in docs_m)
        if tok_f != tok_m:
            big, budget = (docs_f, tok_m) if tok_f > tok_m else (docs_m, tok_f)
            chosen, used = [], 0
            for i in rng.permutation(len(big)):
                n = len(lexemes[big[i].id])
                if used + n <= budget:
                    chosen.append(int(i))
                    used += n
            subset = [big[i] for i in sorted(chosen)]
            if big is docs_f:
                docs_f = subset
            else:
                docs_m = subset
    else:
        raise ValueError(f"unknown balancing mode {mode!r}")

    n_f = sum(len(lexemes[d.id]) for d in docs_f)
    n_m = sum(len(lexemes[d.id]) for d in docs_m)
    kept = {d.id for d in docs_f + docs_m}
    return BalancedCorpus(tuple(docs_f), tuple(docs_m), seed, mode, n_f + n_m, n_f, n_m,
                          {k: v for k, v in lexemes.items() if k in kept})


# -- term counts ----------------------------------------------------------------

@dataclass(frozen=True)
class TermCounts:
    lemma: str
    pos: str
    k_i: int
    k_f: int
    k_m: int

    @property
    def term(self):
        return (self.lemma, self.pos)

    def k_for(self, group):
        return self.k_f if GroupLabel.parse(group) == GroupLabel.F else self.k_m


def term_counts(balanced: BalancedCorpus, pos_category: str = "all",
                min_count: int = 1) -> list[TermCounts]:
    """Per-lemma pooled and per-group counts for one category ("all" counts every token)."""
    if pos_category != "all" and pos_category not in POS_CATEGORIES:
        raise ValueError(f"unknown part-of-speech category {pos_category!r}")
    counts = {GroupLabel.F: Counter(), GroupLabel.M: Counter()}
    for group, docs in ((GroupLabel.F, balanced.docs_f), (GroupLabel.M, balanced.docs_m)):
        c = counts[group]
        for d in docs:
            for lx in balanced.lexemes[d.id]:
                if pos_category == "all" or pos_category in lx.pos_categories:
                    c[lx.lemma] += 1
    cf, cm = counts[GroupLabel.F], counts[GroupLabel.M]
    out = []
    for lemma in sorted(set(cf) | set(cm)):
        k_f, k_m = cf[lemma], cm[lemma]
        if k_f + k_m >= min_count:
            out.append(TermCounts(lemma, pos_category, k_f + k_m, k_f, k_m))
    return out


# -- corpus files and statistics ----------------------------------------------------

def document_from_record(rec: Mapping) -> Document:
    tokens = rec.get("tokens")
    if tokens is not None:
        tokens = tuple((t["lemma"], t.get("pos")) for t in tokens)
    meta = {str(k): str(v) for k, v in (rec.get("meta") or {}).items()}
    return Document(str(rec["id"]), rec.get("text", ""), GroupLabel.parse(rec.get("group", "U")),
                    meta, tokens)


def document_to_record(doc: Document) -> dict:
    rec = {"id": doc.id, "text": doc.text, "group": doc.group.value, "meta": dict(doc.meta)}
    if doc.tokens is not None:
        rec["tokens"] = [{"lemma": l, "pos": p} for l, p in doc.tokens]
    return rec


def read_corpus(path) -> list[Document]:
    docs, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = document_from_record(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise FormatError(f"bad corpus record: {exc}", line=lineno, path=path) from None
            if doc.id in seen:
                raise FormatError(f"duplicate document id {doc.id!r}", line=lineno, path=path)
            seen.add(doc.id)
            docs.append(doc)
    return docs


def write_corpus(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(json.dumps(document_to_record(d), ensure_ascii=False, sort_keys=True) + "\n")


def corpus_stats(docs: Sequence[Document], tokenizer: TokenizerConfig | None = None) -> dict:
    """Text count, sentence count and F/M proportions (over F+M documents)."""
    n_sent = sum(len(document_sentences(d, tokenizer)) for d in docs)
    n_f = sum(d.group == GroupLabel.F for d in docs)
    n_m = sum(d.group == GroupLabel.M for d in docs)
    labeled = n_f + n_m
    return {
        "texts": len(docs),
        "sentences": n_sent,
        "female": n_f,
        "male": n_m,
        "unknown": len(docs) - labeled,
        "female_prop": n_f / labeled if labeled else 0.0,
        "male_prop": n_m / labeled if labeled else 0.0,
    }
