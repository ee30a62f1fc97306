"""Reader for WordNet database (WNDB 3.x) files and queries over the noun taxonomy.

Only the noun hierarchy is materialised: ``data.noun`` and ``index.noun`` are
parsed strictly, while ``index.verb`` / ``index.adj`` contribute lemma sets
(used for part-of-speech assignment and lemmatization) and the ``*.exc`` files
supply irregular inflections.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import MissingFile, ParseError

__all__ = [
    "SynsetId",
    "Synset",
    "Pointer",
    "Morphology",
    "TaxonomyDb",
    "load",
    "dump",
    "synsets",
    "path_distance",
    "hypernym_closure",
    "toy_taxonomy_dir",
    "VIRTUAL_ROOT",
]

POS_CATEGORIES = ("noun", "verb", "adjective")
_FILE_SUFFIX = {"noun": "noun", "verb": "verb", "adjective": "adj"}
_POS_LETTER = {"noun": "n", "verb": "v", "adjective": "a"}

HYPERNYM_SYMBOLS = frozenset({"@", "@i"})
HYPONYM_SYMBOLS = frozenset({"~", "~i"})
# Noun pointer symbols from wninput(5WN); anything else is kept but flagged.
KNOWN_NOUN_POINTERS = frozenset(
    {"!", "@", "@i", "~", "~i", "#m", "#s", "#p", "%m", "%s", "%p",
     "=", "+", ";c", "-c", ";r", "-r", ";u", "-u"}
)

DETACHMENT_RULES = {
    "noun": (("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"),
             ("ches", "ch"), ("shes", "sh"), ("men", "man"), ("ies", "y")),
    "verb": (("s", ""), ("ies", "y"), ("es", "e"), ("es", ""),
             ("ed", "e"), ("ed", ""), ("ing", "e"), ("ing", "")),
    "adjective": (("er", ""), ("est", ""), ("er", "e"), ("est", "e")),
}


@dataclass(frozen=True, order=True)
class SynsetId:
    offset: int
    pos: str = "n"

    def __str__(self):
        return f"{self.offset:08d}-{self.pos}"


VIRTUAL_ROOT = SynsetId(-1, "n")


@dataclass(frozen=True)
class Pointer:
    symbol: str
    target: SynsetId
    source_target: str = "0000"

    @property
    def known(self):
        return self.symbol in KNOWN_NOUN_POINTERS


@dataclass
class Synset:
    id: SynsetId
    lemmas: tuple
    gloss: str = ""
    lex_filenum: int = 3
    pointers: tuple = ()
    hypernyms: tuple = ()
    hyponyms: tuple = ()

    @property
    def name(self):
        """Display form: first lemma, underscores kept (``cloth_covering``)."""
        return self.lemmas[0]


class Morphology:
    """WordNet-style morphological normaliser (exception lists + detachment rules)."""

    def __init__(self, lemmas: Mapping[str, Iterable[str]],
                 exceptions: Mapping[str, Mapping[str, Sequence[str]]] | None = None):
        self.lemmas = {pos: frozenset(lemmas.get(pos, ())) for pos in POS_CATEGORIES}
        exceptions = exceptions or {}
        self.exceptions = {pos: {k: tuple(v) for k, v in exceptions.get(pos, {}).items()}
                           for pos in POS_CATEGORIES}

    def known(self, word, pos=None):
        if pos is None:
            return any(word in self.lemmas[p] for p in POS_CATEGORIES)
        return word in self.lemmas[pos]

    def base_forms(self, word, pos):
        """Candidate base forms of ``word`` that appear in the ``pos`` index, in order."""
        word = word.lower().replace(" ", "_")
        index = self.lemmas[pos]
        forms = []

        def add(form):
            if form in index and form not in forms:
                forms.append(form)

        add(word)
        for base in self.exceptions[pos].get(word, ()):
            add(base)
        for suffix, repl in DETACHMENT_RULES[pos]:
            if word.endswith(suffix) and len(word) > len(suffix):
                add(word[: -len(suffix)] + repl)
        return forms

    def _lemmatize_once(self, word):
        if self.known(word):
            return word
        for pos in POS_CATEGORIES:
            bases = self.exceptions[pos].get(word)
            if bases:
                return bases[0]
        for pos in POS_CATEGORIES:
            index = self.lemmas[pos]
            for suffix, repl in DETACHMENT_RULES[pos]:
                if word.endswith(suffix) and len(word) > len(suffix):
                    cand = word[: -len(suffix)] + repl
                    if cand in index:
                        return cand
        return word

    def lemmatize(self, word):
        """POS-agnostic lemma; iterated so the result is a fixed point."""
        word = word.lower()
        for _ in range(8):
            nxt = self._lemmatize_once(word)
            if nxt == word:
                break
            word = nxt
        return word


class TaxonomyDb:
    """Immutable, indexed noun taxonomy."""

    def __init__(self, synsets: Mapping[SynsetId, Synset],
                 lemma_index: Mapping[str, Sequence[SynsetId]],
                 morphology: Morphology,
                 pos_index: Mapping[str, Mapping[str, Sequence[int]]] | None = None):
        self.synsets = dict(synsets)
        self.lemma_index = {k: tuple(v) for k, v in lemma_index.items()}
        self.morphology = morphology
        self.pos_index = {pos: dict(v) for pos, v in (pos_index or {}).items()}
        self.roots = tuple(sorted(s.id for s in self.synsets.values() if not s.hypernyms))
        self._dist_cache: dict = {}
        self._depth_cache: dict = {}

    @classmethod
    def build(cls, entries, sense_order=None, lemmas=None, exceptions=None):
        """Assemble a database from ``(offset, lemmas, hypernym_offsets, gloss)`` tuples.

        ``sense_order`` maps a lemma to its synset offsets in sense-rank order;
        by default senses are ranked by the order the entries are given in.
        ``lemmas`` holds extra lemma sets keyed by "verb" / "adjective".
        """
        hypo: dict[SynsetId, list] = {}
        parsed = []
        for offset, words, hypers, gloss in entries:
            sid = SynsetId(int(offset))
            hyper_ids = tuple(SynsetId(int(h)) for h in hypers)
            parsed.append((sid, tuple(words), hyper_ids, gloss))
            for h in hyper_ids:
                hypo.setdefault(h, []).append(sid)
        table = {}
        for sid, words, hyper_ids, gloss in parsed:
            hypos = tuple(sorted(hypo.get(sid, ())))
            ptrs = tuple([Pointer("@", h) for h in hyper_ids] + [Pointer("~", h) for h in hypos])
            table[sid] = Synset(sid, words, gloss, 3, ptrs, hyper_ids, hypos)
        index: dict[str, list] = {}
        if sense_order is not None:
            for lemma, offs in sense_order.items():
                index[lemma] = [SynsetId(int(o)) for o in offs]
        for sid, words, _, _ in parsed:
            for w in words:
                key = w.lower()
                index.setdefault(key, [])
                if sid not in index[key]:
                    index[key].append(sid)
        lemma_sets = {"noun": set(index)}
        for pos, words in (lemmas or {}).items():
            lemma_sets[pos] = set(words)
        pos_index = {pos: {w: () for w in words} for pos, words in (lemmas or {}).items()}
        return cls(table, index, Morphology(lemma_sets, exceptions), pos_index)

    # -- lookups -----------------------------------------------------------

    def __len__(self):
        return len(self.synsets)

    def __getitem__(self, sid):
        return self.synsets[sid]

    def name(self, sid):
        return self.synsets[sid].name

    def synsets_for(self, lemma, pos="noun"):
        if pos != "noun":
            return []
        out = []
        for form in self.morphology.base_forms(lemma, "noun"):
            for sid in self.lemma_index.get(form, ()):
                if sid not in out:
                    out.append(sid)
        return out

    def _neighbors(self, sid):
        if sid == VIRTUAL_ROOT:
            return self.roots
        syn = self.synsets[sid]
        nbrs = syn.hypernyms + syn.hyponyms
        if not syn.hypernyms:
            nbrs = nbrs + (VIRTUAL_ROOT,)
        return nbrs

    def path_distance(self, a, b):
        """Shortest undirected hypernym/hyponym path length, via a virtual root."""
        if a == b:
            return 0
        key = (a, b) if a < b else (b, a)
        hit = self._dist_cache.get(key)
        if hit is not None:
            return hit
        d = self._bidirectional_bfs(a, b)
        self._dist_cache[key] = d
        return d

    def _bidirectional_bfs(self, a, b):
        dist_a = {a: 0}
        dist_b = {b: 0}
        front_a = [a]
        front_b = [b]
        best = None
        while front_a and front_b:
            # expand the smaller frontier by one full level
            if len(front_a) <= len(front_b):
                front, dist, other = front_a, dist_a, dist_b
            else:
                front, dist, other = front_b, dist_b, dist_a
            nxt = []
            for node in front:
                dn = dist[node] + 1
                for nb in self._neighbors(node):
                    if nb in dist:
                        continue
                    dist[nb] = dn
                    nxt.append(nb)
                    if nb in other:
                        cand = dn + other[nb]
                        if best is None or cand < best:
                            best = cand
            if front is front_a:
                front_a = nxt
            else:
                front_b = nxt
            # a meeting found while expanding a full level is already minimal
            if best is not None:
                return best
        if best is None:
            raise ValueError(f"no path between {a} and {b}")
        return best

    def hypernym_closure(self, sid, max_depth=None):
        """Synsets reachable upward within ``max_depth`` hypernym edges (``sid`` excluded)."""
        seen = {sid: 0}
        queue = deque([sid])
        out = set()
        while queue:
            node = queue.popleft()
            d = seen[node]
            if max_depth is not None and d >= max_depth:
                continue
            for h in self.synsets[node].hypernyms:
                if h not in seen:
                    seen[h] = d + 1
                    out.add(h)
                    queue.append(h)
        out.discard(sid)
        return out

    def depth(self, sid):
        """Edges from the virtual root along the shortest hypernym chain."""
        cached = self._depth_cache.get(sid)
        if cached is not None:
            return cached
        syn = self.synsets[sid]
        d = 1 if not syn.hypernyms else 1 + min(self.depth(h) for h in syn.hypernyms)
        self._depth_cache[sid] = d
        return d

    def pos_categories(self, lemma):
        out = set()
        if lemma in self.lemma_index:
            out.add("noun")
        for pos in ("verb", "adjective"):
            if lemma in self.pos_index.get(pos, ()) or self.morphology.known(lemma, pos):
                out.add(pos)
        return out

    def graph_signature(self):
        """Offsets-level description of the graph, for isomorphism checks."""
        return {
            sid.offset: (tuple(s.lemmas), tuple(h.offset for h in s.hypernyms))
            for sid, s in self.synsets.items()
        }


# -- module-level query API -------------------------------------------------

def synsets(db: TaxonomyDb, lemma: str, pos: str = "noun"):
    return db.synsets_for(lemma, pos)


def path_distance(db: TaxonomyDb, a: SynsetId, b: SynsetId) -> int:
    return db.path_distance(a, b)


def hypernym_closure(db: TaxonomyDb, s: SynsetId, max_depth=None):
    return db.hypernym_closure(s, max_depth)


def toy_taxonomy_dir():
    return os.path.join(os.path.dirname(__file__), "data", "toy_wordnet")


# -- parsing ----------------------------------------------------------------

def _iter_lines(path):
    with open(path, "rb") as fh:
        offset = 0
        for raw in fh:
            yield offset, raw.rstrip(b"\r\n").decode("utf-8")
            offset += len(raw)


def _parse_index(path, pos_letter):
    index = {}
    for offset, line in _iter_lines(path):
        if not line or line.startswith("  "):
            continue
        parts = line.split()
        try:
            lemma, pos = parts[0], parts[1]
            synset_cnt = int(parts[2])
            p_cnt = int(parts[3])
            rest = parts[4 + p_cnt:]
            int(rest[0]), int(rest[1])  # sense_cnt, tagsense_cnt
            offs = rest[2:]
        except (IndexError, ValueError) as exc:
            raise ParseError(path, offset, f"malformed index line ({exc})") from None
        if pos != pos_letter:
            raise ParseError(path, offset, f"pos {pos!r} in {pos_letter!r} index")
        if len(offs) != synset_cnt or not all(o.isdigit() and len(o) == 8 for o in offs):
            raise ParseError(path, offset, "synset offsets do not match synset_cnt")
        index[lemma] = tuple(int(o) for o in offs)
    return index


def _parse_data_noun(path):
    table = {}
    for offset, line in _iter_lines(path):
        if not line or line.startswith("  "):
            continue
        head, _, gloss = line.partition(" | ")
        parts = head.split()
        try:
            ss_offset = int(parts[0])
            lex_filenum = int(parts[1])
            ss_type = parts[2]
            w_cnt = int(parts[3], 16)
            words = []
            i = 4
            for _ in range(w_cnt):
                words.append(parts[i])
                int(parts[i + 1], 16)
                i += 2
            p_cnt = int(parts[i])
            i += 1
            pointers = []
            for _ in range(p_cnt):
                sym, target, tpos, st = parts[i:i + 4]
                if len(st) != 4:
                    raise ValueError(f"bad source/target field {st!r}")
                pointers.append(Pointer(sym, SynsetId(int(target), tpos), st))
                i += 4
        except (IndexError, ValueError) as exc:
            raise ParseError(path, offset, f"malformed data line ({exc})") from None
        if i != len(parts):
            raise ParseError(path, offset, "trailing fields before gloss")
        if ss_offset != offset:
            raise ParseError(path, offset, f"synset offset {ss_offset:08d} != byte offset")
        if ss_type != "n":
            raise ParseError(path, offset, f"unexpected ss_type {ss_type!r} in noun data")
        sid = SynsetId(ss_offset, "n")
        hypers = tuple(p.target for p in pointers if p.symbol in HYPERNYM_SYMBOLS)
        table[sid] = Synset(sid, tuple(words), gloss.strip(), lex_filenum, tuple(pointers), hypers)
    return table


def _parse_exc(path):
    out = {}
    for offset, line in _iter_lines(path):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ParseError(path, offset, "exception line needs inflected and base forms")
        out[parts[0]] = tuple(parts[1:])
    return out


def load(db_dir) -> TaxonomyDb:
    """Parse a WNDB directory; ``index.noun`` and ``data.noun`` are required."""
    if not os.path.isdir(db_dir):
        raise MissingFile(f"taxonomy directory not found: {db_dir}")
    required = [os.path.join(db_dir, f) for f in ("index.noun", "data.noun")]
    for path in required:
        if not os.path.exists(path):
            raise MissingFile(f"missing database file: {path}")

    table = _parse_data_noun(os.path.join(db_dir, "data.noun"))
    raw_index = _parse_index(os.path.join(db_dir, "index.noun"), "n")

    hypo: dict[SynsetId, set] = {sid: set() for sid in table}
    for sid, syn in table.items():
        for h in syn.hypernyms:
            if h not in table:
                raise ParseError(os.path.join(db_dir, "data.noun"), sid.offset,
                                 f"hypernym {h} does not resolve")
            hypo[h].add(sid)
    for sid, syn in table.items():
        syn.hyponyms = tuple(sorted(hypo[sid]))

    lemma_index = {}
    for lemma, offs in raw_index.items():
        ids = []
        for off in offs:
            sid = SynsetId(off, "n")
            if sid not in table:
                raise ParseError(os.path.join(db_dir, "index.noun"), off,
                                 f"index entry {lemma!r} points at missing synset")
            ids.append(sid)
        lemma_index[lemma] = tuple(ids)

    lemma_sets = {"noun": set(lemma_index)}
    pos_index = {}
    for pos in ("verb", "adjective"):
        path = os.path.join(db_dir, f"index.{_FILE_SUFFIX[pos]}")
        if os.path.exists(path):
            pos_index[pos] = _parse_index(path, _POS_LETTER[pos])
            lemma_sets[pos] = set(pos_index[pos])
    exceptions = {}
    for pos in POS_CATEGORIES:
        path = os.path.join(db_dir, f"{_FILE_SUFFIX[pos]}.exc")
        if os.path.exists(path):
            exceptions[pos] = _parse_exc(path)
    return TaxonomyDb(table, lemma_index, Morphology(lemma_sets, exceptions), pos_index)


# -- serialisation ----------------------------------------------------------

_HEADER = (
    "  1 assoclens taxonomy serialised in WNDB 3.0 layout.\n"
    "  2 Byte offsets below are authoritative synset identifiers.\n"
)


def _data_line(syn: Synset, remap) -> str:
    words = " ".join(f"{w} 0" for w in syn.lemmas)
    ptrs = " ".join(f"{p.symbol} {remap(p.target).offset:08d} {p.target.pos} {p.source_target}"
                    for p in syn.pointers)
    ptr_field = f"{len(syn.pointers):03d}" + (f" {ptrs}" if ptrs else "")
    return (f"{remap(syn.id).offset:08d} {syn.lex_filenum:02d} n {len(syn.lemmas):02x} "
            f"{words} {ptr_field} | {syn.gloss}\n")


def dump(db: TaxonomyDb, out_dir) -> dict:
    """Write ``db`` as WNDB files; returns the old->new offset mapping."""
    os.makedirs(out_dir, exist_ok=True)
    order = sorted(db.synsets)
    identity = lambda sid: sid  # noqa: E731
    # offsets are fixed-width, so line lengths do not depend on their values
    mapping = {}
    pos = len(_HEADER.encode("utf-8"))
    for sid in order:
        mapping[sid] = SynsetId(pos, sid.pos)
        pos += len(_data_line(db.synsets[sid], identity).encode("utf-8"))
    remap = lambda sid: mapping.get(sid, sid)  # noqa: E731

    with open(os.path.join(out_dir, "data.noun"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_HEADER)
        for sid in order:
            fh.write(_data_line(db.synsets[sid], remap))

    with open(os.path.join(out_dir, "index.noun"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_HEADER)
        for lemma in sorted(db.lemma_index):
            ids = db.lemma_index[lemma]
            symbols = sorted({p.symbol for sid in ids for p in db.synsets[sid].pointers})
            sym_field = " ".join([f"{len(symbols)}"] + symbols)
            offs = " ".join(f"{remap(sid).offset:08d}" for sid in ids)
            fh.write(f"{lemma} n {len(ids)} {sym_field} {len(ids)} 0 {offs}\n")

    for pos in ("verb", "adjective"):
        words = db.morphology.lemmas.get(pos)
        if not words:
            continue
        with open(os.path.join(out_dir, f"index.{_FILE_SUFFIX[pos]}"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(_HEADER)
            for w in sorted(words):
                offs = db.pos_index.get(pos, {}).get(w) or (0,)
                off_field = " ".join(f"{o:08d}" for o in offs)
                fh.write(f"{w} {_POS_LETTER[pos]} {len(offs)} 0 {len(offs)} 0 {off_field}\n")

    for pos in POS_CATEGORIES:
        exc = db.morphology.exceptions.get(pos)
        if not exc:
            continue
        with open(os.path.join(out_dir, f"{_FILE_SUFFIX[pos]}.exc"), "w",
                  encoding="utf-8", newline="\n") as fh:
            for k in sorted(exc):
                fh.write(f"{k} {' '.join(exc[k])}\n")
    return mapping
