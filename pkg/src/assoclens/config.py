"""Flat pipeline configuration shared by the config file and the CLI flags."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields

# fields that locate inputs/outputs; excluded from the config hash
PATH_FIELDS = frozenset({"corpus", "out", "taxonomy", "vectors", "responses", "input",
                         "cache_dir", "wiki_url", "config"})


@dataclass
class PipelineConfig:
    # paths
    corpus: str = ""
    out: str = "assoclens-out"
    taxonomy: str = ""
    vectors: str = ""
    responses: str = ""
    input: str = ""
    cache_dir: str = ""
    wiki_url: str = ""
    # global
    seed: int = 0
    workers: int = 1
    deterministic: bool = True
    report_format: str = "tsv"
    # ingest
    ingest_mode: str = "articles"
    subject_key: str = "subject_id"
    # associate
    balance_mode: str = "documents"
    pos: str = "all"
    hypothesis_scope: str = "pooled"
    min_count: int = 10
    alpha: float = 0.05
    hypotheses: int = 0
    # embed
    dimension: int = 100
    window: int = 5
    negative: int = 5
    epochs: int = 5
    lr: float = 0.025
    embed_min_count: int = 10
    # cluster
    k: int = 0
    k_divisor: int = 50
    restarts: int = 50
    max_iters: int = 300
    normalize: bool = True
    sse_norm: str = "size"
    # label
    label_depth: int = 0
    top_labels: int = 4
    budget: int = 100_000
    # eval
    per_cluster: int = 1
    top_n: int = 8
    in_n: int = 10
    out_n: int = 3

    def to_text(self) -> str:
        lines = ["# assoclens pipeline configuration (key = value)"]
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        cfg = cls()
        cfg.update(parse_kv(text))
        return cfg

    def update(self, values: dict) -> None:
        types = {f.name: f.type for f in fields(self)}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown configuration key {key!r}")
            setattr(self, key, coerce(getattr(self, key), raw))

    def digest(self) -> str:
        body = "\n".join(line for line in self.to_text().splitlines()
                         if line and not line.startswith("#")
                         and line.split(" = ", 1)[0] not in PATH_FIELDS)
        return hashlib.sha256(body.encode("utf-8")).hexdigest()[:16]

    def stage_seed(self, stage: str) -> int:
        return stage_seed(self.seed, stage)

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


def stage_seed(master: int, stage: str) -> int:
    h = hashlib.sha256(f"{master}/{stage}".encode("utf-8")).hexdigest()
    return int(h[:8], 16)


def coerce(current, raw):
    if not isinstance(raw, str):
        return raw
    if isinstance(current, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw.strip()


def parse_kv(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip() if not line.lstrip().startswith("#") else ""
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        k, _, v = line.partition("=")
        out[k.strip()] = v.strip()
    return out


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return PipelineConfig.from_text(fh.read())
