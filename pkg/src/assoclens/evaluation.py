"""Word-intrusion and concept-word annotation tasks, and their scoring."""

from __future__ import annotations

import csv
import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .clustering import rank_clusters
from .errors import ClusterTooSmall, DegenerateAgreement, FormatError, ShapeMismatch

log = logging.getLogger(__name__)

LABEL_TYPES = ("centroid", "pred_1", "pred_2", "pred_3", "pred_4")
INTRUSION_SLOTS = 5
YES, NO = "yes", "no"


@dataclass(frozen=True)
class IntrusionItem:
    item_id: str
    cluster_id: int
    shown_words: tuple
    intruder_index: int

    @property
    def intruder(self):
        return self.shown_words[self.intruder_index]

    def validate(self, members):
        members = set(members)
        if len(self.shown_words) != INTRUSION_SLOTS or len(set(self.shown_words)) != INTRUSION_SLOTS:
            raise ValueError(f"{self.item_id}: needs {INTRUSION_SLOTS} distinct words")
        if not 0 <= self.intruder_index < INTRUSION_SLOTS or self.intruder in members:
            raise ValueError(f"{self.item_id}: intruder must come from outside the cluster")
        inside = [w for i, w in enumerate(self.shown_words) if i != self.intruder_index]
        if not all(w in members for w in inside):
            raise ValueError(f"{self.item_id}: non-intruder words must be cluster members")


@dataclass(frozen=True)
class ConceptWordItem:
    item_id: str
    cluster_id: int
    label_type: str
    label: str
    word: str
    word_source: str  # "in_cluster" | "out_of_cluster"

    def validate(self, members):
        if self.word_source not in ("in_cluster", "out_of_cluster"):
            raise ValueError(f"{self.item_id}: unknown word source {self.word_source!r}")
        if (self.word in set(members)) != (self.word_source == "in_cluster"):
            raise ValueError(f"{self.item_id}: word source disagrees with cluster membership")


class ResponseMatrix:
    """Items x raters answers; missing cells are ``None``."""

    def __init__(self, answers, item_ids=None, rater_ids=None, categories=None):
        self.answers = dict(answers)
        self.item_ids = list(item_ids) if item_ids is not None else sorted({i for i, _ in self.answers})
        self.rater_ids = list(rater_ids) if rater_ids is not None else sorted({r for _, r in self.answers})
        seen = set(self.answers.values())
        self.categories = sorted(categories if categories is not None else seen, key=str)

    @classmethod
    def from_rows(cls, rows, categories=None):
        answers = {}
        for row in rows:
            key = (str(row["item_id"]), str(row["rater_id"]))
            ans = str(row["answer"]).strip()
            if key in answers and answers[key] != ans:
                raise FormatError(f"conflicting answers for item {key[0]} by rater {key[1]}")
            answers[key] = ans
        return cls(answers, categories=categories)

    @classmethod
    def from_table(cls, table, categories=None):
        """Build from a list of per-item answer lists (one column per rater)."""
        answers = {}
        for i, row in enumerate(table):
            for r, a in enumerate(row):
                if a is not None:
                    answers[(str(i), str(r))] = a
        return cls(answers, [str(i) for i in range(len(table))],
                   [str(r) for r in range(max((len(r) for r in table), default=0))], categories)

    def subset(self, item_ids):
        keep = set(item_ids)
        return ResponseMatrix({k: v for k, v in self.answers.items() if k[0] in keep},
                              [i for i in self.item_ids if i in keep], None, self.categories)

    def map_answers(self, fn):
        return ResponseMatrix({k: fn(k[0], v) for k, v in self.answers.items()},
                              self.item_ids, self.rater_ids)

    def item_answers(self, item_id):
        return [self.answers[(item_id, r)] for r in self.rater_ids if (item_id, r) in self.answers]

    def table(self):
        return [[self.answers.get((i, r)) for r in self.rater_ids] for i in self.item_ids]

    def is_rectangular(self):
        return all((i, r) in self.answers for i in self.item_ids for r in self.rater_ids)


def fleiss_kappa(matrix, categories=None) -> float:
    """Fleiss' kappa, (P_bar - P_e) / (1 - P_e), over a rectangular items x raters table."""
    if not isinstance(matrix, ResponseMatrix):
        matrix = ResponseMatrix.from_table(matrix, categories)
    if not matrix.item_ids:
        raise ShapeMismatch("kappa needs at least one item")
    if len(matrix.rater_ids) < 2:
        raise ShapeMismatch("kappa needs at least two raters")
    if not matrix.is_rectangular():
        missing = sum((i, r) not in matrix.answers for i in matrix.item_ids for r in matrix.rater_ids)
        raise ShapeMismatch(f"kappa needs every rater to answer every item ({missing} answers missing)")
    cats = sorted(set(categories or ()) | set(matrix.answers.values()), key=str)
    index = {c: j for j, c in enumerate(cats)}
    counts = np.zeros((len(matrix.item_ids), len(cats)), dtype=np.float64)
    for i, item in enumerate(matrix.item_ids):
        for r in matrix.rater_ids:
            counts[i, index[matrix.answers[(item, r)]]] += 1
    r = len(matrix.rater_ids)
    p_item = (counts * (counts - 1)).sum(1) / (r * (r - 1))
    p_bar = p_item.mean()
    p_cat = counts.sum(0) / counts.sum()
    p_e = float((p_cat ** 2).sum())
    if np.isclose(p_e, 1.0, rtol=0, atol=1e-15):
        if np.isclose(p_bar, 1.0, rtol=0, atol=1e-15):
            return 1.0
        raise DegenerateAgreement("expected agreement is 1 but observed agreement is not")
    return float((p_bar - p_e) / (1.0 - p_e))


# -- word intrusion --------------------------------------------------------------

def select_clusters(model, top_n=None, skip_small=False, min_size=4):
    ranked = rank_clusters(model)
    if skip_small:
        ranked = [c for c in ranked if c.size >= min_size]
    if top_n is not None:
        ranked = ranked[:top_n]
    return ranked


def gen_intrusion(model, vocab, per_cluster: int = 1, seed: int = 0, top_n=None,
                  skip_small=False):
    """Four cluster members plus one intruder from outside the cluster, shuffled.

    ``top_n`` restricts generation to the clusters with the lowest normalized SSE.
    """
    rng = np.random.default_rng(seed)
    vocab = sorted(set(vocab))
    items = []
    for c in select_clusters(model, top_n, skip_small):
        if c.size < INTRUSION_SLOTS - 1:
            raise ClusterTooSmall(f"cluster {c.id} has {c.size} members; intrusion needs 4")
        members = sorted(c.members)
        outside = [w for w in vocab if w not in set(members)]
        if not outside:
            raise ClusterTooSmall(f"vocabulary has no words outside cluster {c.id}")
        for j in range(per_cluster):
            inside = list(rng.choice(members, size=INTRUSION_SLOTS - 1, replace=False))
            intruder = outside[int(rng.integers(len(outside)))]
            shown = inside + [intruder]
            order = rng.permutation(INTRUSION_SLOTS)
            shown = tuple(str(shown[k]) for k in order)
            item = IntrusionItem(f"wi-{c.id:04d}-{j:03d}", c.id, shown, shown.index(intruder))
            item.validate(members)
            items.append(item)
    return items


def _intrusion_choice(item, answer):
    a = str(answer).strip()
    if a.lstrip("-").isdigit():
        idx = int(a)
        if not 0 <= idx < INTRUSION_SLOTS:
            raise FormatError(f"item {item.item_id}: answer index {idx} out of range")
        return idx
    if a in item.shown_words:
        return item.shown_words.index(a)
    raise FormatError(f"item {item.item_id}: answer {a!r} is neither a slot nor a shown word")


def _align(items, responses):
    ids = {it.item_id for it in items}
    stray = sorted({i for i, _ in responses.answers} - ids)
    if stray:
        raise ShapeMismatch(f"responses for unknown items: {', '.join(stray[:5])}")
    unanswered = sorted(ids - {i for i, _ in responses.answers})
    if unanswered:
        raise ShapeMismatch(f"items without responses: {', '.join(unanswered[:5])}")


def score_intrusion(items, responses: ResponseMatrix, top_cluster_ids=None) -> dict:
    """Precision over (item, rater) pairs and Fleiss' kappa over slot choices.

    Returns ``{"overall": {...}}`` plus a ``"top"`` entry when ``top_cluster_ids``
    is given.
    """
    _align(items, responses)
    by_id = {it.item_id: it for it in items}
    choices = responses.map_answers(lambda i, a: _intrusion_choice(by_id[i], a))
    scopes = {"overall": list(items)}
    if top_cluster_ids is not None:
        top = set(top_cluster_ids)
        scopes["top"] = [it for it in items if it.cluster_id in top]
    out = {}
    for name, subset in scopes.items():
        if not subset:
            continue
        sub = choices.subset([it.item_id for it in subset])
        hits = total = 0
        for it in subset:
            ans = sub.item_answers(it.item_id)
            hits += sum(a == it.intruder_index for a in ans)
            total += len(ans)
        out[name] = {
            "items": len(subset),
            "answers": total,
            "precision": hits / total,
            "kappa": fleiss_kappa(sub, categories=range(INTRUSION_SLOTS)),
        }
    return out


# -- concept-word task ---------------------------------------------------------------

def gen_concept_word(cluster, labels, vocab, in_n: int = 10, out_n: int = 3, seed: int = 0):
    """One item per (label, word); the sampled words are shared by every label.

    ``labels`` is a sequence of ``(label_type, label_text)`` pairs, normally the
    centroid word followed by the top four predicted labels.
    """
    rng = np.random.default_rng(seed)
    members = sorted(cluster.members)
    if len(members) < in_n:
        log.warning("cluster %s has %d members (< %d); using all of them",
                    cluster.id, len(members), in_n)
    n_in = min(in_n, len(members))
    inside = [str(w) for w in rng.choice(members, size=n_in, replace=False)] if n_in else []
    member_set = set(members)
    outside_pool = [w for w in sorted(set(vocab)) if w not in member_set]
    if out_n > len(outside_pool):
        raise ValueError(f"need {out_n} out-of-cluster words, vocabulary offers {len(outside_pool)}")
    outside = [str(w) for w in rng.choice(outside_pool, size=out_n, replace=False)] if out_n else []
    words = [(w, "in_cluster") for w in inside] + [(w, "out_of_cluster") for w in outside]
    items = []
    for li, (label_type, label) in enumerate(labels):
        for wi, (word, source) in enumerate(words):
            item = ConceptWordItem(f"cw-{cluster.id:04d}-{li}-{wi:03d}", cluster.id,
                                   label_type, label, word, source)
            item.validate(members)
            items.append(item)
    return items


def _yes_no(answer):
    a = str(answer).strip().lower()
    if a in ("yes", "y", "1", "true"):
        return YES
    if a in ("no", "n", "0", "false"):
        return NO
    raise FormatError(f"concept-word answer must be yes/no, got {answer!r}")


def score_concept_word(items, responses: ResponseMatrix) -> dict:
    """Per label type: rate of "yes" for in-cluster and out-of-cluster words, their gap, kappa."""
    _align(items, responses)
    yn = responses.map_answers(lambda i, a: _yes_no(a))
    types = [t for t in LABEL_TYPES if any(it.label_type == t for it in items)]
    types += sorted({it.label_type for it in items} - set(types))
    out = {}
    for t in types:
        subset = [it for it in items if it.label_type == t]
        tally = {"in_cluster": Counter(), "out_of_cluster": Counter()}
        for it in subset:
            tally[it.word_source].update(yn.item_answers(it.item_id))

        def rate(c):
            n = c[YES] + c[NO]
            return c[YES] / n if n else float("nan")

        in_rate = rate(tally["in_cluster"])
        out_rate = rate(tally["out_of_cluster"])
        out[t] = {
            "in_rate": in_rate,
            "out_rate": out_rate,
            "difference": in_rate - out_rate,
            "kappa": fleiss_kappa(yn.subset([it.item_id for it in subset]), categories=(YES, NO)),
        }
    return out


# -- CSV files -----------------------------------------------------------------

INTRUSION_COLUMNS = ("item_id", "type", "cluster_id", "word_1", "word_2", "word_3", "word_4",
                     "word_5", "intruder_index")
CONCEPT_COLUMNS = ("item_id", "type", "cluster_id", "label_type", "label", "word", "word_source")
RESPONSE_COLUMNS = ("item_id", "rater_id", "answer")


def intrusion_rows(items):
    for it in items:
        row = {"item_id": it.item_id, "type": "intrusion", "cluster_id": it.cluster_id,
               "intruder_index": it.intruder_index}
        for k, w in enumerate(it.shown_words, 1):
            row[f"word_{k}"] = w
        yield row


def concept_rows(items):
    for it in items:
        yield {"item_id": it.item_id, "type": "concept_word", "cluster_id": it.cluster_id,
               "label_type": it.label_type, "label": it.label, "word": it.word,
               "word_source": it.word_source}


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def _read_csv(path, required):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise FormatError(f"missing column(s) {', '.join(missing)}", path=path)
        return list(reader)


def read_intrusion_items(path):
    return [IntrusionItem(r["item_id"], int(r["cluster_id"]),
                          tuple(r[f"word_{k}"] for k in range(1, INTRUSION_SLOTS + 1)),
                          int(r["intruder_index"]))
            for r in _read_csv(path, INTRUSION_COLUMNS)]


def read_concept_items(path):
    return [ConceptWordItem(r["item_id"], int(r["cluster_id"]), r["label_type"], r["label"],
                            r["word"], r["word_source"])
            for r in _read_csv(path, CONCEPT_COLUMNS)]


def read_responses(paths) -> ResponseMatrix:
    """Merge response CSVs (append-only, one row per answer) deterministically."""
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    rows = []
    for p in paths:
        rows.extend(_read_csv(p, RESPONSE_COLUMNS))
    rows.sort(key=lambda r: (r["item_id"], r["rater_id"]))
    return ResponseMatrix.from_rows(rows)
