"""Command-line entry point: one subcommand per stage, artifacts in one output directory."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from . import association, clustering, corpus, embeddings, evaluation, ingestion, labeling, wordnet
from .config import PipelineConfig, load_config
from .corpus import GroupLabel, TokenizerConfig
from .errors import AssocLensError, MissingFile
from .reports import provenance_line, read_report, write_report
from .synthetic import planted_corpus

log = logging.getLogger("assoclens")

STAGES = ("ingest", "stats", "associate", "embed", "cluster", "label", "eval-gen", "eval-score",
          "pipeline", "synth")
PIPELINE = ("associate", "embed", "cluster", "label")

# words from the bundled taxonomy, used by ``synth --toy-vocabulary``
TOY_F_WORDS = ("gown", "skirt", "dress", "blouse", "frock", "woman", "girlfriend", "clothing",
               "wear", "pink", "beautiful")
TOY_M_WORDS = ("man", "boyfriend", "bank", "shore", "slope", "movie", "email", "answer",
               "challenge", "building", "institution")

STATS_COLUMNS = ("texts", "sentences", "female", "male", "unknown", "female_prop", "male_prop")
EVAL_COLUMNS = ("task", "scope", "items", "answers", "precision", "in_rate", "out_rate",
                "difference", "kappa")


class StageFailure(Exception):
    def __init__(self, stage, exc):
        super().__init__(str(exc))
        self.stage = stage
        self.exc = exc


# -- shared helpers ------------------------------------------------------------------

def _ext(cfg):
    return "tsv" if cfg.report_format == "tsv" else "jsonl"


def artifact(cfg, name):
    """Path of a tabular artifact; the extension follows the report format."""
    return os.path.join(cfg.out, f"{name}.{_ext(cfg)}")


def _provenance(cfg, stage):
    return {"stage": stage, "seed": cfg.stage_seed(stage), "config": cfg.digest(),
            "version": __version__}


def _write(cfg, stage, name, columns, rows):
    path = artifact(cfg, name)
    write_report(path, columns, rows, cfg.report_format, _provenance(cfg, stage))
    return path


def _read(cfg, name):
    path = artifact(cfg, name)
    if not os.path.exists(path):
        raise MissingFile(f"{path} not found; run the stage that produces it first")
    return read_report(path, cfg.report_format)[1]


def _corpus_path(cfg):
    return cfg.corpus or os.path.join(cfg.out, "corpus.jsonl")


def _taxonomy(cfg):
    return wordnet.load(cfg.taxonomy or wordnet.toy_taxonomy_dir())


def _tokenizer(cfg, db=None):
    return TokenizerConfig(db=db if db is not None else _taxonomy(cfg))


def _vectors_path(cfg):
    return cfg.vectors or os.path.join(cfg.out, "vectors.txt")


def _load_corpus(cfg):
    path = _corpus_path(cfg)
    if not os.path.exists(path):
        raise MissingFile(f"corpus {path} not found")
    return corpus.read_corpus(path)


def _fmt(x):
    return "NA" if x is None or (isinstance(x, float) and np.isnan(x)) else repr(float(x))


# -- stages ------------------------------------------------------------------------

def stage_synth(cfg, args):
    if args.toy_vocabulary:
        kw = {"planted_f": TOY_F_WORDS, "planted_m": TOY_M_WORDS}
    else:
        kw = {"planted_f": args.planted_f, "planted_m": args.planted_m}
    pc = planted_corpus(tokens_per_group=args.tokens, background=args.background,
                        ratio=args.ratio, planted_rate=args.planted_rate, seed=cfg.stage_seed("synth"), **kw)
    path = _corpus_path(cfg)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    corpus.write_corpus(pc.documents, path)
    return [path]


def stage_ingest(cfg, args):
    if not cfg.input:
        raise MissingFile("ingest needs --input (raw JSON-lines records)")
    with open(cfg.input, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    if cfg.ingest_mode == "articles":
        client = ingestion.EncyclopediaClient(base_url=cfg.wiki_url or None,
                                              cache_dir=cfg.cache_dir or None)
        docs = ingestion.label_articles(records, client, max_workers=max(1, cfg.workers))
    elif cfg.ingest_mode == "reviews":
        docs = ingestion.label_reviews([corpus.document_from_record(r) for r in records],
                                       cfg.subject_key)
    else:
        raise ValueError(f"unknown ingest mode {cfg.ingest_mode!r}")
    path = _corpus_path(cfg)
    corpus.write_corpus(docs, path)
    return [path]


def stage_stats(cfg, args):
    s = corpus.corpus_stats(_load_corpus(cfg), _tokenizer(cfg))
    row = {k: (f"{s[k]:.6g}" if k.endswith("_prop") else s[k]) for k in STATS_COLUMNS}
    return [_write(cfg, "stats", "stats", STATS_COLUMNS, [row])]


def _categories(cfg):
    if cfg.pos == "all":
        return ["all"]
    return [p.strip() for p in cfg.pos.split(",") if p.strip()]


def stage_associate(cfg, args):
    db = _taxonomy(cfg)
    balanced = corpus.balance(_load_corpus(cfg), cfg.stage_seed("associate"), cfg.balance_mode,
                              _tokenizer(cfg, db))
    per_cat = {c: corpus.term_counts(balanced, c) for c in _categories(cfg)}
    tested = {c: association.tested_terms(tc, min_count=cfg.min_count) for c, tc in per_cat.items()}
    pooled = 2 * sum(len(t) for t in tested.values())
    results = []
    for cat, counts in per_cat.items():
        if cfg.hypotheses > 0:
            m = cfg.hypotheses
        elif cfg.hypothesis_scope == "pooled":
            m = pooled or None
        elif cfg.hypothesis_scope == "per-category":
            m = None
        else:
            raise ValueError(f"unknown hypothesis scope {cfg.hypothesis_scope!r}")
        policy = association.CorrectionPolicy(cfg.alpha, m=m)
        results += association.associated_terms(counts, balanced, policy,
                                                min_count=cfg.min_count, workers=cfg.workers)
    return [_write(cfg, "associate", "associations", association.REPORT_COLUMNS,
                   association.report_rows(results))]


def stage_embed(cfg, args):
    ecfg = embeddings.EmbeddingConfig(
        dimension=cfg.dimension, window=cfg.window, negative_samples=cfg.negative,
        epochs=cfg.epochs, initial_lr=cfg.lr, min_count=cfg.embed_min_count,
        seed=cfg.stage_seed("embed"), deterministic=cfg.deterministic, workers=cfg.workers)
    m = embeddings.train_cbow(_load_corpus(cfg), ecfg, _tokenizer(cfg))
    path = os.path.join(cfg.out, "vectors.txt")
    embeddings.save_vectors(m, path)
    side = os.path.join(cfg.out, "vectors.provenance")
    with open(side, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(provenance_line(_provenance(cfg, "embed")) + "\n")
        fh.write("loss " + " ".join(f"{x:.12g}" for x in m.loss_history) + "\n")
    return [path, side]


def _significant(cfg):
    """Significant lemmas with their group; a lemma tested under several categories keeps its smallest p."""
    best = {}
    for r in _read(cfg, "associations"):
        if r["significant"] != "true":
            continue
        p = float(r["p_value"])
        if r["term"] not in best or p < best[r["term"]][0]:
            best[r["term"]] = (p, GroupLabel.parse(r["group"]))
    return {w: g for w, (_, g) in best.items()}


@dataclasses.dataclass
class _Assoc:
    lemma: str
    group: GroupLabel


def stage_cluster(cfg, args):
    sig = _significant(cfg)
    m = embeddings.load_vectors(_vectors_path(cfg))
    words = sorted(w for w in sig if w in m)
    dropped = len(sig) - len(words)
    if dropped:
        log.warning("%d significant terms have no vector and are not clustered", dropped)
    ccfg = clustering.ClusteringConfig(
        k_divisor=cfg.k_divisor, restarts=cfg.restarts, max_iters=cfg.max_iters,
        seed=cfg.stage_seed("cluster"), normalize_vectors=cfg.normalize,
        sse_normalization=cfg.sse_norm, k=cfg.k or None, workers=cfg.workers)
    model = clustering.kmeans(words, m, ccfg)
    model = clustering.annotate_gender(model, [_Assoc(w, sig[w]) for w in words])
    return [_write(cfg, "cluster", "clusters", clustering.CLUSTER_COLUMNS,
                   clustering.report_rows(model))]


def _load_clusters(cfg):
    clusters = []
    for r in _read(cfg, "clusters"):
        f, m = (int(x) for x in r["f_m"].split(":"))
        members = tuple(r["members"].split(",")) if r["members"] else ()
        clusters.append(clustering.Cluster(int(r["cluster_id"]), members, np.zeros(0), float("nan"),
                                           float(r["normalized_sse"]), r["centroid_word"] or None,
                                           f, m))
    clusters.sort(key=lambda c: c.id)
    return clustering.ClusterModel(clusters, float("nan"), len(clusters), cfg.stage_seed("cluster"))


def stage_label(cfg, args):
    db = _taxonomy(cfg)
    model = _load_clusters(cfg)
    depth = cfg.label_depth or None
    labelings = [labeling.label_cluster(c, db, None, cfg.top_labels, depth, cfg.budget)
                 for c in model.clusters]
    return [_write(cfg, "label", "labels", labeling.label_columns(cfg.top_labels),
                   labeling.report_rows(labelings, cfg.top_labels))]


def _label_pairs(row, top):
    pairs = [("centroid", row["centroid_word"])]
    for i in range(1, top + 1):
        lab = row.get(f"label_{i}", "")
        if lab and lab != "N/A":
            pairs.append((f"pred_{i}", lab))
    return pairs


def stage_eval_gen(cfg, args):
    model = _load_clusters(cfg)
    vocab = sorted({w for c in model.clusters for w in c.members})
    seed = cfg.stage_seed("eval-gen")
    intr = evaluation.gen_intrusion(model, vocab, cfg.per_cluster, seed, None, skip_small=True)
    labels = {int(r["cluster_id"]): r for r in _read(cfg, "labels")}
    concept = []
    for c in evaluation.select_clusters(model, cfg.top_n, skip_small=True):
        pairs = _label_pairs(labels[c.id], cfg.top_labels) if c.id in labels else [
            ("centroid", c.centroid_word)]
        concept += evaluation.gen_concept_word(c, pairs, vocab, cfg.in_n, cfg.out_n, [seed, c.id])
    p1 = os.path.join(cfg.out, "intrusion_items.csv")
    p2 = os.path.join(cfg.out, "concept_items.csv")
    evaluation.write_csv(p1, evaluation.INTRUSION_COLUMNS, evaluation.intrusion_rows(intr))
    evaluation.write_csv(p2, evaluation.CONCEPT_COLUMNS, evaluation.concept_rows(concept))
    return [p1, p2]


def stage_eval_score(cfg, args):
    paths = [p.strip() for p in cfg.responses.split(",") if p.strip()]
    if not paths:
        raise MissingFile("eval-score needs --responses (one or more CSV files)")
    responses = evaluation.read_responses(paths)
    answered = {i for i, _ in responses.answers}
    rows = []
    p1 = os.path.join(cfg.out, "intrusion_items.csv")
    if os.path.exists(p1):
        items = evaluation.read_intrusion_items(p1)
        ids = [it.item_id for it in items]
        if answered & set(ids):
            top = [c.id for c in evaluation.select_clusters(_load_clusters(cfg), cfg.top_n,
                                                            skip_small=True)]
            scores = evaluation.score_intrusion(items, responses.subset(ids), top)
            for scope, s in scores.items():
                rows.append({"task": "intrusion", "scope": scope, "items": s["items"],
                             "answers": s["answers"], "precision": _fmt(s["precision"]),
                             "kappa": _fmt(s["kappa"])})
    p2 = os.path.join(cfg.out, "concept_items.csv")
    if os.path.exists(p2):
        items = evaluation.read_concept_items(p2)
        ids = [it.item_id for it in items]
        if answered & set(ids):
            scores = evaluation.score_concept_word(items, responses.subset(ids))
            for t, s in scores.items():
                rows.append({"task": "concept_word", "scope": t,
                             "items": sum(it.label_type == t for it in items),
                             "in_rate": _fmt(s["in_rate"]), "out_rate": _fmt(s["out_rate"]),
                             "difference": _fmt(s["difference"]), "kappa": _fmt(s["kappa"])})
    if not rows:
        raise MissingFile("no responses match the generated evaluation items")
    return [_write(cfg, "eval-score", "eval_scores", EVAL_COLUMNS, rows)]


def stage_pipeline(cfg, args):
    out = []
    for name in PIPELINE:
        out += _run_stage(name, cfg, args)
    return out


HANDLERS = {
    "synth": stage_synth, "ingest": stage_ingest, "stats": stage_stats,
    "associate": stage_associate, "embed": stage_embed, "cluster": stage_cluster,
    "label": stage_label, "eval-gen": stage_eval_gen, "eval-score": stage_eval_score,
    "pipeline": stage_pipeline,
}


def _run_stage(name, cfg, args):
    if name == "pipeline":
        return stage_pipeline(cfg, args)
    try:
        return HANDLERS[name](cfg, args)
    except StageFailure:
        raise
    except (AssocLensError, ValueError, OSError, KeyError) as exc:
        raise StageFailure(name, exc) from exc


# -- argument parsing -----------------------------------------------------------------

def _add_config_flags(p):
    for f in dataclasses.fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        default = f.default
        if isinstance(default, bool):
            p.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction,
                           default=argparse.SUPPRESS)
        else:
            p.add_argument(flag, dest=f.name, type=type(default), default=argparse.SUPPRESS,
                           metavar=f.name.upper())
    p.add_argument("--format", dest="report_format", choices=("tsv", "jsonl"),
                   default=argparse.SUPPRESS, help="alias of --report-format")
    p.add_argument("--config", dest="config_file", default=None,
                   help="key = value configuration file; flags override it")
    p.add_argument("--write-config", default=None, help="write the effective configuration here")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="assoclens")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name)
        _add_config_flags(p)
        if name == "synth":
            p.add_argument("--tokens", type=int, default=200_000, help="tokens per group")
            p.add_argument("--background", type=int, default=2000)
            p.add_argument("--planted-f", type=int, default=20)
            p.add_argument("--planted-m", type=int, default=0)
            p.add_argument("--ratio", type=float, default=3.0)
            p.add_argument("--planted-rate", type=float, default=1e-3,
                           help="per-token rate of a planted word in the other group")
            p.add_argument("--toy-vocabulary", action="store_true",
                           help="plant words from the bundled taxonomy instead of placeholders")
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config_file) if args.config_file else PipelineConfig()
    names = {f.name for f in dataclasses.fields(PipelineConfig)}
    cfg.update({k: v for k, v in vars(args).items() if k in names})
    return cfg


def _error_line(stage, exc):
    msg = json.dumps(str(exc))
    return f"assoclens: error stage={stage} type={type(exc).__name__} message={msg}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError) as exc:
        print(_error_line("config", exc), file=sys.stderr)
        return 2
    os.makedirs(cfg.out, exist_ok=True)
    if args.write_config:
        with open(args.write_config, "w", encoding="utf-8") as fh:
            fh.write(cfg.to_text())
    try:
        written = _run_stage(args.command, cfg, args)
    except StageFailure as failure:
        print(_error_line(failure.stage, failure.exc), file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
