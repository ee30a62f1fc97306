"""Continuous-bag-of-words embeddings trained with negative sampling."""

from __future__ import annotations

import logging
import threading
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import TokenizerConfig, document_sentences
from .errors import EmptyVocabulary, FormatError, UnknownWord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingConfig:
    dimension: int = 100
    window: int = 5
    negative_samples: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_lr: float = 0.0001
    min_count: int = 10
    seed: int = 1
    deterministic: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.dimension < 1 or self.window < 1 or self.negative_samples < 1:
            raise ValueError("dimension, window and negative_samples must all be >= 1")


@dataclass
class EmbeddingMatrix:
    vocab: dict
    vectors: np.ndarray
    config: EmbeddingConfig | None = None
    counts: dict = field(default_factory=dict)
    loss_history: list = field(default_factory=list)

    def __post_init__(self):
        self.words = [None] * len(self.vocab)
        for w, i in self.vocab.items():
            self.words[i] = w

    def __contains__(self, word):
        return word in self.vocab

    def __len__(self):
        return len(self.vocab)

    @property
    def dimension(self):
        return self.vectors.shape[1]

    def vector(self, word):
        try:
            return self.vectors[self.vocab[word]]
        except KeyError:
            raise UnknownWord(word) from None

    def rows(self, words):
        missing = [w for w in words if w not in self.vocab]
        if missing:
            raise UnknownWord(missing)
        return self.vectors[[self.vocab[w] for w in words]]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def cbow_loss_and_grads(w_in, w_out, context, target, negatives):
    """Loss of one CBOW example and its gradients.

    ``h`` is the mean of the context input vectors.  The loss is
    ``-log s(u_t.h) - sum_n log s(-u_n.h)``.  Returns ``(loss, grad_h, rows,
    grad_rows)`` where ``grad_rows[j]`` is the gradient for output row
    ``rows[j]`` (rows may repeat) and each context row gets ``grad_h / C``.
    """
    context = np.asarray(context)
    rows = np.concatenate(([target], np.asarray(negatives, dtype=np.int64)))
    labels = np.zeros(len(rows))
    labels[0] = 1.0
    h = w_in[context].mean(axis=0)
    u = w_out[rows]
    scores = u @ h
    signs = 2.0 * labels - 1.0
    loss = -float(np.sum(_log_sigmoid(signs * scores)))
    coef = _sigmoid(scores) - labels
    grad_h = coef @ u
    grad_rows = np.outer(coef, h)
    return loss, grad_h, rows, grad_rows


def dense_gradients(w_in, w_out, context, target, negatives):
    """Full-size gradient arrays for one example (used for checking)."""
    loss, grad_h, rows, grad_rows = cbow_loss_and_grads(w_in, w_out, context, target, negatives)
    g_in = np.zeros_like(w_in)
    g_out = np.zeros_like(w_out)
    np.add.at(g_in, np.asarray(context), grad_h / len(context))
    np.add.at(g_out, rows, grad_rows)
    return loss, g_in, g_out


def example_loss(w_in, w_out, context, target, negatives):
    return cbow_loss_and_grads(w_in, w_out, context, target, negatives)[0]


def build_vocab(sentences, min_count):
    counts = Counter(w for s in sentences for w in s)
    kept = sorted((w for w, c in counts.items() if c >= min_count), key=lambda w: (-counts[w], w))
    return {w: i for i, w in enumerate(kept)}, {w: counts[w] for w in kept}


def corpus_sentences(corpus, tokenizer: TokenizerConfig | None = None):
    """Lemma lists per sentence; contexts never span sentence breaks."""
    return [[lx.lemma for lx in s] for d in corpus for s in document_sentences(d, tokenizer)]


class _Trainer:
    def __init__(self, sentences, vocab, counts, config):
        self.config = config
        self.vocab = vocab
        self.sents = [np.array([vocab[w] for w in s if w in vocab], dtype=np.int64)
                      for s in sentences]
        self.sents = [s for s in self.sents if len(s) > 1]
        freq = np.array([counts[w] for w in sorted(vocab, key=vocab.get)], dtype=np.float64)
        noise = freq ** 0.75
        self.noise_cdf = np.cumsum(noise / noise.sum())
        self.noise_cdf[-1] = 1.0
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        d = config.dimension
        self.w_in = (rng.random((len(vocab), d)) - 0.5) / d
        self.w_out = np.zeros((len(vocab), d))
        self.total_words = config.epochs * sum(len(s) for s in self.sents)
        self.words_done = 0

    def lr(self):
        c = self.config
        frac = min(1.0, self.words_done / max(1, self.total_words))
        return max(c.min_lr, c.initial_lr * (1.0 - frac))

    def train_sentence(self, sent, rng):
        c = self.config
        n = len(sent)
        shrink = rng.integers(0, c.window, size=n)
        draws = rng.random((n, c.negative_samples))
        negs_all = np.searchsorted(self.noise_cdf, draws, side="right")
        loss_sum, examples = 0.0, 0
        for i in range(n):
            b = c.window - shrink[i]
            lo, hi = max(0, i - b), min(n, i + b + 1)
            context = np.concatenate((sent[lo:i], sent[i + 1:hi]))
            if len(context) == 0:
                continue
            target = sent[i]
            negs = negs_all[i]
            negs = negs[negs != target]
            loss, grad_h, rows, grad_rows = cbow_loss_and_grads(
                self.w_in, self.w_out, context, target, negs)
            alpha = self.lr()
            np.add.at(self.w_out, rows, -alpha * grad_rows)
            np.add.at(self.w_in, context, -alpha * grad_h / len(context))
            loss_sum += loss
            examples += 1
        self.words_done += n
        return loss_sum, examples

    def run_epoch(self, epoch, seed_seq):
        c = self.config
        if c.deterministic or c.workers <= 1:
            rng = np.random.default_rng(seed_seq)
            total, count = 0.0, 0
            for idx in rng.permutation(len(self.sents)):
                l, e = self.train_sentence(self.sents[idx], rng)
                total += l
                count += e
            return total / max(1, count)
        # lock-free shared updates: reproducible only statistically
        shards = [list(range(w, len(self.sents), c.workers)) for w in range(c.workers)]
        rngs = [np.random.default_rng(s) for s in seed_seq.spawn(c.workers)]
        out = [(0.0, 0)] * c.workers

        def work(w):
            t, k = 0.0, 0
            for idx in shards[w]:
                l, e = self.train_sentence(self.sents[idx], rngs[w])
                t += l
                k += e
            out[w] = (t, k)

        threads = [threading.Thread(target=work, args=(w,)) for w in range(c.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        total = sum(t for t, _ in out)
        count = sum(k for _, k in out)
        return total / max(1, count)


def train_cbow(corpus, config: EmbeddingConfig | None = None,
               tokenizer: TokenizerConfig | None = None, sentences=None) -> EmbeddingMatrix:
    """Train CBOW vectors; pass ``sentences`` (lists of lemmas) to skip tokenization."""
    config = config or EmbeddingConfig()
    if sentences is None:
        sentences = corpus_sentences(corpus, tokenizer)
    vocab, counts = build_vocab(sentences, config.min_count)
    if not vocab:
        raise EmptyVocabulary(f"no lemma occurs at least min_count={config.min_count} times")
    trainer = _Trainer(sentences, vocab, counts, config)
    epoch_seeds = np.random.SeedSequence(config.seed).spawn(config.epochs + 1)[1:]
    history = []
    for epoch in range(config.epochs):
        loss = trainer.run_epoch(epoch, epoch_seeds[epoch])
        if not (np.isfinite(trainer.w_in).all() and np.isfinite(trainer.w_out).all()):
            raise FloatingPointError(f"non-finite parameters after epoch {epoch + 1}")
        history.append(loss)
        log.info("epoch %d/%d loss %.5f", epoch + 1, config.epochs, loss)
    return EmbeddingMatrix(vocab, trainer.w_in, config, counts, history)


# -- text vector files -------------------------------------------------------------

def save_vectors(m: EmbeddingMatrix, path) -> None:
    """Write the conventional text format: ``count dim`` header, one word per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(m.words)} {m.dimension}\n")
        for i, w in enumerate(m.words):
            fh.write(w + " " + " ".join(f"{x:.12g}" for x in m.vectors[i]) + "\n")


def load_vectors(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError("header must be 'count dimension'", line=1, path=path)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError("header must hold two integers", line=1, path=path) from None
        vocab, rows = {}, []
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            fields = line.rstrip().split(" ")
            if len(fields) != dim + 1:
                raise FormatError(f"expected {dim} values, found {len(fields) - 1}",
                                  line=lineno, path=path)
            word = fields[0]
            if word in vocab:
                raise FormatError(f"duplicate word {word!r}", line=lineno, path=path)
            try:
                rows.append([float(x) for x in fields[1:]])
            except ValueError:
                raise FormatError("non-numeric vector component", line=lineno, path=path) from None
            vocab[word] = len(vocab)
    if len(vocab) != count:
        raise FormatError(f"header declares {count} words, file holds {len(vocab)}", path=path)
    vectors = np.array(rows, dtype=np.float64).reshape(count, dim)
    if not np.isfinite(vectors).all():
        raise FormatError("non-finite vector component", path=path)
    return EmbeddingMatrix(vocab, vectors)


def nearest_neighbors(m: EmbeddingMatrix, lemma, k: int):
    """Top-``k`` words by cosine similarity (query excluded, ties lexicographic)."""
    q = m.vector(lemma)
    if k <= 0:
        return []
    norms = np.linalg.norm(m.vectors, axis=1)
    qn = np.linalg.norm(q)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = (m.vectors @ q) / (norms * qn)
    sims = np.nan_to_num(sims, nan=0.0)
    pairs = [(m.words[i], float(sims[i])) for i in range(len(m.words)) if m.words[i] != lemma]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:k]
