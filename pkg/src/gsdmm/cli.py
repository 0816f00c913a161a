"""Command-line surface: preprocess, cluster, eval, topwords, synth.

Commands compose into a pipeline over plain-text artifacts: a corpus
archive directory (vocabulary.tsv, documents.txt, stats.json), an
assignments CSV, and JSON reports. Exit codes: 0 success, 2 malformed
input or invalid generator spec, 3 configuration violations, 4 unmatched
document ids, 5 missing model artifacts. Set DMM_LOG to control log
verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .corpus import (
    Corpus,
    CorpusStats,
    Document,
    TokenRules,
    Vocabulary,
    build_corpus,
    default_stopwords,
    load_stopwords,
    read_dataset,
)
from .errors import ConfigError, GsdmmError, KMaxExceedsCorpus, MalformedRecord
from .evaluation import LabeledPartitionPair, evaluate
from .model import ModelState, top_words
from .sampler import GSDMM, GSDMM_PLUS, RunConfig, run_gsdmm, run_gsdmm_plus
from .synth import GenSpec, generate_corpus, write_jsonl

log = logging.getLogger("gsdmm")

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BAD_CONFIG = 3
EXIT_UNMATCHED_IDS = 4
EXIT_MISSING_ARTIFACTS = 5

MISSING_LABEL = "-"

# every key a config file may define; anything else is rejected
CONFIG_KEYS = {
    "algorithm", "alpha", "beta", "kmax", "kreal", "iters", "seed",
    "entropy_refreshes", "entropy_eps", "entropy_norm", "trace",
    "format", "stopwords", "stem", "min_df", "min_len", "max_len",
}


def _parse_config_value(raw: str):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config_file(path: str | Path) -> dict:
    """Flat key = value file; blank lines and # comments allowed."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_config_value(raw)
    return values


def _resolve(args: argparse.Namespace, config: dict, key: str, default):
    """Flag wins over config file, config file wins over the default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


# ---------------------------------------------------------------------------
# corpus archive

def write_archive(corpus: Corpus, outdir: str | Path) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    vocab = corpus.vocabulary
    with open(out / "vocabulary.tsv", "w", encoding="utf-8") as fh:
        for wid, word in enumerate(vocab.id_to_word):
            fh.write(f"{wid}\t{word}\t{vocab.doc_freq[wid]}\n")
    with open(out / "documents.txt", "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            label = doc.gold_label if doc.gold_label is not None else MISSING_LABEL
            for value in (doc.doc_id, label):
                if any(c in value for c in "\t\n "):
                    raise ConfigError(
                        f"doc id or label {value!r} contains whitespace; "
                        "archives need whitespace-free fields"
                    )
            pairs = " ".join(f"{w}:{c}" for w, c in sorted(doc.counts.items()))
            fh.write(f"{doc.doc_id}\t{label}\t{pairs}\n")
    stats = {
        "D": corpus.stats.D,
        "V": corpus.stats.V,
        "mean_len": corpus.stats.mean_len,
        "max_len": corpus.stats.max_len,
        "dropped_doc_ids": list(corpus.dropped_doc_ids),
    }
    with open(out / "stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_archive(indir: str | Path) -> Corpus:
    src = Path(indir)
    for name in ("vocabulary.tsv", "documents.txt", "stats.json"):
        if not (src / name).exists():
            raise FileNotFoundError(src / name)
    id_to_word: list[str] = []
    doc_freq: list[int] = []
    with open(src / "vocabulary.tsv", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 3:
                raise MalformedRecord("expected id<TAB>word<TAB>df", lineno)
            if int(cols[0]) != len(id_to_word):
                raise MalformedRecord("vocabulary ids out of order", lineno)
            id_to_word.append(cols[1])
            doc_freq.append(int(cols[2]))
    documents: list[Document] = []
    with open(src / "documents.txt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 3:
                raise MalformedRecord("expected doc_id<TAB>label<TAB>counts", lineno)
            doc_id, label, blob = cols
            counts: dict[int, int] = {}
            for pair in blob.split():
                w, c = pair.split(":")
                counts[int(w)] = int(c)
            if not counts:
                raise MalformedRecord("empty document in archive", lineno)
            documents.append(Document(
                doc_id=doc_id,
                counts=counts,
                total_len=sum(counts.values()),
                gold_label=None if label == MISSING_LABEL else label,
            ))
    with open(src / "stats.json", encoding="utf-8") as fh:
        stats = json.load(fh)
    vocab = Vocabulary(
        word_to_id={w: i for i, w in enumerate(id_to_word)},
        id_to_word=tuple(id_to_word),
        doc_freq=tuple(doc_freq),
    )
    return Corpus(
        documents=tuple(documents),
        vocabulary=vocab,
        stats=CorpusStats(D=stats["D"], V=stats["V"],
                          mean_len=stats["mean_len"], max_len=stats["max_len"]),
        dropped_doc_ids=tuple(stats.get("dropped_doc_ids", [])),
    )


# ---------------------------------------------------------------------------
# commands

def cmd_preprocess(args: argparse.Namespace) -> int:
    config = load_config_file(args.config) if args.config else {}
    fmt = _resolve(args, config, "format", "jsonl")
    stopword_path = _resolve(args, config, "stopwords", None)
    stopwords = load_stopwords(stopword_path) if stopword_path \
        else default_stopwords()
    rules = TokenRules(
        stopword_list=stopwords,
        stemming=bool(_resolve(args, config, "stem", False)),
        min_word_len=int(_resolve(args, config, "min_len", 2)),
        max_word_len=int(_resolve(args, config, "max_len", 15)),
        min_df=int(_resolve(args, config, "min_df", 2)),
    )
    records = read_dataset(args.input, fmt)
    corpus = build_corpus(records, rules)
    write_archive(corpus, args.output)
    if corpus.dropped_doc_ids:
        log.info("dropped %d emptied documents", len(corpus.dropped_doc_ids))
    s = corpus.stats
    print(f"D={s.D} V={s.V} mean_len={s.mean_len:.2f} max_len={s.max_len}")
    return EXIT_OK


def cmd_cluster(args: argparse.Namespace) -> int:
    config = load_config_file(args.config) if args.config else {}
    algorithm = _resolve(args, config, "algorithm", GSDMM)
    default_beta = 0.1 if algorithm == GSDMM else 0.01
    cfg = RunConfig(
        algorithm=algorithm,
        k_max=int(_resolve(args, config, "kmax", 500)),
        k_real=_maybe_int(_resolve(args, config, "kreal", None)),
        alpha=float(_resolve(args, config, "alpha", 0.1)),
        beta=float(_resolve(args, config, "beta", default_beta)),
        iterations=int(_resolve(args, config, "iters", 20)),
        seed=int(_resolve(args, config, "seed", 0)),
        entropy_refreshes_per_sweep=int(
            _resolve(args, config, "entropy_refreshes", 15)),
        entropy_epsilon=float(_resolve(args, config, "entropy_eps", 1e-9)),
        entropy_normalized=bool(_resolve(args, config, "entropy_norm", True)),
    )
    corpus = read_archive(args.archive)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    if cfg.algorithm == GSDMM:
        assignments, state, trace = run_gsdmm(corpus, cfg)
        k_final = state.nonempty_count()
    else:
        assignments, state, trace = run_gsdmm_plus(corpus, cfg)
        k_final = state.k_active
    wall_ms = int(round((time.perf_counter() - t0) * 1000))

    with open(out / "assignments.csv", "w", encoding="utf-8") as fh:
        fh.write("doc_id,cluster\n")
        for doc, z in zip(corpus.documents, assignments):
            fh.write(f"{doc.doc_id},{int(z)}\n")
    summary = {
        "algorithm": cfg.algorithm,
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "k_max": cfg.k_max,
        "k_real": cfg.k_real,
        "k_final": k_final,
        "iterations": cfg.iterations,
        "seed": cfg.seed,
        "wall_time_ms": wall_ms,
        "notes": trace.notes,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    if _resolve(args, config, "trace", False):
        (out / "trace.csv").write_text(trace.to_csv(), encoding="utf-8")
    if cfg.algorithm == GSDMM_PLUS:
        lines = ["step,cluster_a,cluster_b,similarity"]
        for step, (a, b, sim) in enumerate(trace.merge_log or [], start=1):
            lines.append(f"{step},{a},{b},{sim:.6f}")
        (out / "mergelog.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"k_final={k_final} wall_time_ms={wall_ms}")
    return EXIT_OK


def _maybe_int(value):
    return None if value is None else int(value)


def _read_assignments(path: str | Path) -> list[tuple[str, int]]:
    rows: list[tuple[str, int]] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "doc_id,cluster":
            raise MalformedRecord("expected header 'doc_id,cluster'", 1)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split(",")
            if len(cols) != 2:
                raise MalformedRecord("expected doc_id,cluster", lineno)
            rows.append((cols[0], int(cols[1])))
    return rows


def _gold_labels(source: str, fmt: str) -> dict[str, str]:
    """Labels by doc id, from either a corpus archive or a raw dataset."""
    path = Path(source)
    labels: dict[str, str] = {}
    if path.is_dir():
        corpus = read_archive(path)
        for doc in corpus.documents:
            if doc.gold_label is not None:
                labels[doc.doc_id] = doc.gold_label
    else:
        for doc_id, _, label in read_dataset(path, fmt):
            if label is not None:
                labels[doc_id] = label
    return labels


def cmd_eval(args: argparse.Namespace) -> int:
    rows = _read_assignments(args.assignments)
    gold_map = _gold_labels(args.gold, args.format or "jsonl")
    missing = [doc_id for doc_id, _ in rows if doc_id not in gold_map]
    if missing:
        print(f"error: no gold label for doc id {missing[0]!r} "
              f"({len(missing)} unmatched)", file=sys.stderr)
        return EXIT_UNMATCHED_IDS
    pred = [z for _, z in rows]
    gold = [gold_map[doc_id] for doc_id, _ in rows]
    report = evaluate(LabeledPartitionPair.from_labels(pred, gold))
    payload = json.dumps(report.to_json_dict(), sort_keys=True)
    print(payload)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_topwords(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    assignments_path = run_dir / "assignments.csv"
    summary_path = run_dir / "summary.json"
    if not assignments_path.exists() or not summary_path.exists():
        print(f"error: missing model artifacts under {run_dir}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACTS
    corpus = read_archive(args.archive)
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    rows = _read_assignments(assignments_path)
    by_id = {doc.doc_id: i for i, doc in enumerate(corpus.documents)}
    missing = [doc_id for doc_id, _ in rows if doc_id not in by_id]
    if missing:
        print(f"error: assignment id {missing[0]!r} not in archive",
              file=sys.stderr)
        return EXIT_UNMATCHED_IDS

    k = max(z for _, z in rows) + 1
    state = ModelState(len(corpus), corpus.vocabulary.size, k,
                       alpha=summary.get("alpha", 0.1))
    views = corpus.token_views
    for doc_id, z in rows:
        d = by_id[doc_id]
        words, counts, _, _, total = views[d]
        state.add_doc(d, words, counts, total, z)
    state.D = len(rows)

    beta = float(summary.get("beta", 0.1))
    lines = ["cluster\trank\tword\tphi"]
    for z in range(k):
        if state.m[z] == 0:
            continue
        for rank, (word, phi) in enumerate(
                top_words(state, corpus.vocabulary, z, args.n, beta), start=1):
            lines.append(f"{z}\t{rank}\t{word}\t{phi:.6f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = GenSpec(
        k=args.k, v=args.v, d=args.d,
        doc_len=args.doc_len, length_dist=args.len_dist,
        alpha_gen=args.alpha_gen, beta_gen=args.beta_gen,
        seed=args.seed,
    )
    corpus, _, theta, _ = generate_corpus(spec)
    write_jsonl(corpus, args.output)
    print(f"wrote {corpus.stats.D} documents, {spec.k} clusters")
    print("theta: " + " ".join(f"{t:.4f}" for t in theta))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsdmm",
        description="Short text clustering with Dirichlet multinomial mixtures.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="tokenize a dataset into a corpus archive")
    p.add_argument("input")
    p.add_argument("output", help="archive directory to create")
    p.add_argument("--format", choices=["jsonl", "tsv"])
    p.add_argument("--stopwords", help="stopword file (default: built-in list)")
    p.add_argument("--stem", action="store_const", const=True)
    p.add_argument("--min-df", type=int, dest="min_df")
    p.add_argument("--min-len", type=int, dest="min_len")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--config")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("cluster", help="run a sampler over a corpus archive")
    p.add_argument("archive")
    p.add_argument("output", help="run directory to create")
    p.add_argument("--algorithm", choices=[GSDMM, GSDMM_PLUS])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--kmax", type=int)
    p.add_argument("--kreal", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--entropy-refreshes", type=int, dest="entropy_refreshes")
    p.add_argument("--entropy-eps", type=float, dest="entropy_eps")
    p.add_argument("--no-entropy-norm", action="store_const", const=False,
                   dest="entropy_norm")
    p.add_argument("--trace", action="store_const", const=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="score assignments against gold labels")
    p.add_argument("assignments")
    p.add_argument("gold", help="corpus archive directory or labeled dataset")
    p.add_argument("--format", choices=["jsonl", "tsv"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("topwords", help="representative words per cluster")
    p.add_argument("archive")
    p.add_argument("run", help="run directory from the cluster command")
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_topwords)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("output")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--doc-len", type=float, default=8, dest="doc_len")
    p.add_argument("--len-dist", choices=["fixed", "poisson"], default="fixed",
                   dest="len_dist")
    p.add_argument("--alpha-gen", type=float, default=10.0, dest="alpha_gen")
    p.add_argument("--beta-gen", type=float, default=0.05, dest="beta_gen")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("DMM_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, KMaxExceedsCorpus) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except FileNotFoundError as exc:
        print(f"error: missing file {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACTS if args.command == "topwords" \
            else EXIT_BAD_INPUT
    except (MalformedRecord, ValueError, GsdmmError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
