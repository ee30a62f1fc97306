"""Subject-gender labeling for raw document collections.

Articles carry topic tags.  A tag names a person when the top encyclopedia
search hit has a birth entry in its infobox; that person's gender comes from
comparing female and male pronoun counts in the page's lead section.  An
article is Female when it tags at least one woman and no men (and vice
versa).  Reviews are labeled by the pronoun majority over every review of
the same subject.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from urllib.parse import urlparse

import requests

from .corpus import FEMALE_PRONOUNS, MALE_PRONOUNS, Document, GroupLabel
from .errors import NetworkError, PageNotFound

log = logging.getLogger(__name__)

WIKI_URL_ENV = "ASSOCLENS_WIKI_URL"
DEFAULT_WIKI_URL = "https://en.wikipedia.org/w/api.php"
# infobox parameters rendered under the "Born" row (underscores read as spaces)
BIRTH_PARAMS = frozenset({"born", "birth date", "birth place", "birth name", "birthdate",
                          "date of birth"})

_WORD = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*")
_HEADING = re.compile(r"^={2,}[^=\n].*?={2,}[ \t]*$", re.MULTILINE)


def count_gendered_pronouns(text: str, female=FEMALE_PRONOUNS, male=MALE_PRONOUNS):
    """Case-insensitive whole-token matches: returns ``(female, male)``."""
    f = m = 0
    for tok in _WORD.findall(text):
        t = tok.lower()
        if t in female:
            f += 1
        elif t in male:
            m += 1
    return f, m


def gender_from_counts(female: int, male: int) -> GroupLabel:
    if female > male:
        return GroupLabel.F
    if male > female:
        return GroupLabel.M
    return GroupLabel.NeitherUnknown


# -- wikitext helpers ------------------------------------------------------------

def _template_spans(text):
    """(start, end) of every outermost ``{{...}}`` template."""
    spans, depth, start, i = [], 0, 0, 0
    while i < len(text) - 1:
        pair = text[i:i + 2]
        if pair == "{{":
            if depth == 0:
                start = i
            depth += 1
            i += 2
        elif pair == "}}" and depth:
            depth -= 1
            i += 2
            if depth == 0:
                spans.append((start, i))
        else:
            i += 1
    return spans


def _split_top_level(body):
    parts, depth, cur, i = [], 0, [], 0
    while i < len(body):
        two = body[i:i + 2]
        if two in ("{{", "[["):
            depth += 1
            cur.append(two)
            i += 2
        elif two in ("}}", "]]") and depth:
            depth -= 1
            cur.append(two)
            i += 2
        elif body[i] == "|" and depth == 0:
            parts.append("".join(cur))
            cur = []
            i += 1
        else:
            cur.append(body[i])
            i += 1
    parts.append("".join(cur))
    return parts


def infobox_params(wikitext: str) -> dict | None:
    """Parameters of the first ``{{Infobox ...}}`` template, or None."""
    for a, b in _template_spans(wikitext):
        body = wikitext[a + 2:b - 2]
        parts = _split_top_level(body)
        if not parts[0].strip().lower().startswith("infobox"):
            continue
        params = {}
        for p in parts[1:]:
            if "=" in p:
                k, _, v = p.partition("=")
                params[k.strip().lower().replace("_", " ")] = v.strip()
        return params
    return None


def has_born_entry(wikitext: str) -> bool:
    params = infobox_params(wikitext)
    if not params:
        return False
    return any(k in BIRTH_PARAMS and v for k, v in params.items())


def lead_section(wikitext: str) -> str:
    """Everything before the first section heading."""
    m = _HEADING.search(wikitext)
    return wikitext[: m.start()] if m else wikitext


def strip_markup(wikitext: str) -> str:
    text = re.sub(r"<!--.*?-->", " ", wikitext, flags=re.DOTALL)
    text = re.sub(r"<ref[^>]*/>", " ", text)
    text = re.sub(r"<ref[^>]*>.*?</ref>", " ", text, flags=re.DOTALL)
    out, last = [], 0
    for a, b in _template_spans(text):
        out.append(text[last:a])
        last = b
    out.append(text[last:])
    text = " ".join(out)
    text = re.sub(r"\[\[(?:File|Image):[^\]]*\]\]", " ", text, flags=re.IGNORECASE)
    text = re.sub(r"\[\[(?:[^\]|]*\|)?([^\]]*)\]\]", r"\1", text)
    text = re.sub(r"<[^>]+>", " ", text)
    return text


# -- HTTP client with on-disk cache ---------------------------------------------------

class ResponseCache:
    """JSON responses stored under the SHA-256 of the request."""

    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self._lock = threading.Lock()

    @staticmethod
    def key(url, params):
        blob = json.dumps({"url": url, "params": sorted(params.items())}, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _path(self, key):
        return os.path.join(self.directory, key + ".json")

    def get(self, key):
        try:
            with open(self._path(key), encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None

    def put(self, key, value):
        with self._lock:
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(value, fh, sort_keys=True)
            os.replace(tmp, self._path(key))


class _HostThrottle:
    def __init__(self, min_interval):
        self.min_interval = min_interval
        self._last = {}
        self._lock = threading.Lock()

    def wait(self, host):
        if self.min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            ready = self._last.get(host, 0.0) + self.min_interval
            delay = max(0.0, ready - now)
            self._last[host] = max(now, ready)
        if delay:
            time.sleep(delay)


class EncyclopediaClient:
    """MediaWiki API client: search plus page wikitext, cached on disk."""

    def __init__(self, base_url=None, cache_dir=None, session=None, max_retries=3,
                 backoff=0.5, min_interval=0.0, max_in_flight=4, timeout=10.0):
        self.base_url = base_url or os.environ.get(WIKI_URL_ENV) or DEFAULT_WIKI_URL
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self.session = session or requests.Session()
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self._throttle = _HostThrottle(min_interval)
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self.network_calls = 0

    def _get(self, params, tag):
        params = {**params, "format": "json"}
        key = ResponseCache.key(self.base_url, params)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        host = urlparse(self.base_url).netloc
        last_exc = None
        for attempt in range(self.max_retries):
            try:
                with self._slots:
                    self._throttle.wait(host)
                    self.network_calls += 1
                    resp = self.session.get(self.base_url, params=params, timeout=self.timeout)
                resp.raise_for_status()
                data = resp.json()
                break
            except (requests.RequestException, ValueError) as exc:
                last_exc = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (2 ** attempt))
        else:
            raise NetworkError(tag, f"request failed after {self.max_retries} attempts: {last_exc}")
        if self.cache is not None:
            self.cache.put(key, data)
        return data

    def search(self, tag):
        """Title of the first search hit, or None."""
        data = self._get({"action": "query", "list": "search", "srsearch": tag, "srlimit": 1}, tag)
        hits = data.get("query", {}).get("search", [])
        return hits[0]["title"] if hits else None

    def page_source(self, title, tag=None):
        data = self._get({"action": "query", "prop": "revisions", "rvprop": "content",
                          "rvslots": "main", "titles": title, "formatversion": 2}, tag or title)
        pages = data.get("query", {}).get("pages", [])
        if isinstance(pages, dict):
            pages = list(pages.values())
        if not pages or pages[0].get("missing") not in (None, False):
            raise PageNotFound(title)
        revs = pages[0].get("revisions") or []
        if not revs:
            raise PageNotFound(title)
        rev = revs[0]
        if "slots" in rev:
            main = rev["slots"]["main"]
            return main.get("content", main.get("*", ""))
        return rev.get("content", rev.get("*", ""))


@dataclass
class TagResolution:
    tag: str
    is_person: bool
    gender: GroupLabel
    evidence: dict = field(default_factory=dict)
    title: str | None = None


def resolve_tag(tag: str, client: EncyclopediaClient) -> TagResolution:
    try:
        title = client.search(tag)
        if title is None:
            raise PageNotFound(tag)
        source = client.page_source(title, tag)
    except PageNotFound:
        return TagResolution(tag, False, GroupLabel.NeitherUnknown,
                             {"female_pronouns": 0, "male_pronouns": 0, "has_born_entry": False})
    born = has_born_entry(source)
    f, m = count_gendered_pronouns(strip_markup(lead_section(source)))
    evidence = {"female_pronouns": f, "male_pronouns": m, "has_born_entry": born}
    gender = gender_from_counts(f, m) if born else GroupLabel.NeitherUnknown
    return TagResolution(tag, born, gender, evidence, title)


def resolve_tags(tags, client: EncyclopediaClient, max_workers: int = 4) -> dict:
    unique = sorted(set(tags))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(lambda t: resolve_tag(t, client), unique))
    return dict(zip(unique, results))


def label_article(resolutions) -> GroupLabel:
    genders = {r.gender if isinstance(r, TagResolution) else GroupLabel.parse(r) for r in resolutions}
    has_f, has_m = GroupLabel.F in genders, GroupLabel.M in genders
    if has_f and not has_m:
        return GroupLabel.F
    if has_m and not has_f:
        return GroupLabel.M
    return GroupLabel.NeitherUnknown


def label_articles(records, client: EncyclopediaClient, max_workers: int = 4):
    """Raw article records ``{"id", "text", "tags", "meta"}`` -> labeled Documents."""
    records = list(records)
    table = resolve_tags([t for r in records for t in r.get("tags", [])], client, max_workers)
    docs = []
    for r in records:
        group = label_article([table[t] for t in r.get("tags", [])])
        meta = {str(k): str(v) for k, v in (r.get("meta") or {}).items()}
        docs.append(Document(str(r["id"]), r.get("text", ""), group, meta))
    return docs


@dataclass
class SubjectProfile:
    subject_id: str
    review_ids: tuple
    male_pronouns: int
    female_pronouns: int
    gender: GroupLabel


def label_subject(reviews, subject_key: str = "subject_id") -> SubjectProfile:
    reviews = list(reviews)
    subjects = {r.meta.get(subject_key) for r in reviews}
    if len(subjects) > 1:
        raise ValueError(f"reviews span several subjects: {sorted(map(str, subjects))}")
    f = m = 0
    for r in reviews:
        rf, rm = count_gendered_pronouns(r.text)
        f += rf
        m += rm
    sid = next(iter(subjects)) if subjects else None
    return SubjectProfile(str(sid), tuple(r.id for r in reviews), m, f, gender_from_counts(f, m))


def label_reviews(reviews, subject_key: str = "subject_id"):
    """Relabel every review with its subject's pronoun-majority gender."""
    by_subject = {}
    for r in reviews:
        by_subject.setdefault(r.meta.get(subject_key), []).append(r)
    gender = {s: label_subject(rs, subject_key).gender for s, rs in by_subject.items()}
    return [r.with_group(gender[r.meta.get(subject_key)]) for r in reviews]
