"""One executable, one subcommand per pipeline stage.

Every run prints a single machine-parsable ``key=value`` summary line to
stdout and writes its artifacts under the output directory. Exit codes:
0 success, 1 module error, 2 usage, 3 config validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .abx import Condition, abx_error, extract_items, write_item_file
from .config import ConfigError, RunConfig, apply_overrides, load_config, validate
from .corpus import (
    FilterRules,
    filter_corpus,
    frame_targets,
    load_alignments,
    speaker_disjoint_split,
    write_alignments,
)
from .errors import ToolkitError
from .inventory import (
    f1_optimal_threshold,
    feature_vector_frequencies,
    evaluate_inventory,
    predict_inventory,
    read_gold_inventory,
    vectors_to_phones,
)
from .labeler import (
    LabelSequence,
    assign_feature_codebook_batch,
    assign_kmeans,
    minibatch_kmeans,
    observed_phone_set,
    read_labels,
    restrict_phone_set,
    top_frequent_phones,
    top_frequent_vectors,
    write_codebook,
    write_labels,
)
from .matrixio import RepresentationMatrix, read_matrix, write_matrix
from .metrics import collapse_frames, feature_accuracy, per, phone_accuracy, phones_to_features
from .phoneset import (
    Rules,
    collapse_table,
    load_feature_table,
    load_rules,
    vector_to_string,
)
from .sampler import cap_language_hours, language_weights, length_buckets


class MatrixDirectory:
    """Lazy utterance-id -> RepresentationMatrix mapping over a directory
    of <utt_id>.maub files."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self._cache: dict[str, RepresentationMatrix] = {}

    def __getitem__(self, utt_id: str) -> RepresentationMatrix:
        if utt_id not in self._cache:
            path = self.directory / f"{utt_id}.maub"
            if not path.exists():
                raise KeyError(utt_id)
            self._cache[utt_id] = read_matrix(path)
        return self._cache[utt_id]


def _summary(**kv) -> None:
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


def _load_phoneset(cfg: RunConfig):
    table = collapse_table(load_feature_table(cfg.table))
    rules = load_rules(cfg.rules) if cfg.rules else Rules()
    return table, rules

def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus",))
    corpus = load_alignments(cfg.corpus)
    out = _outdir(cfg) / "corpus.tsv"
    write_alignments(corpus, out)
    _summary(
        utterances=len(corpus),
        speakers=len(corpus.by_speaker),
        languages=len(corpus.by_language),
        total_s=f"{corpus.total_duration:.2f}",
        out=out,
    )
    return 0


def cmd_filter(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus",))
    corpus = load_alignments(cfg.corpus)
    rules = FilterRules(
        drop_label=args.drop_label,
        max_phone_s=args.max_phone_s,
        min_utt_s=args.min_utt_s,
        max_utt_s=args.max_utt_s,
    )
    kept = filter_corpus(corpus, rules)
    out = _outdir(cfg) / "filtered.tsv"
    write_alignments(kept, out)
    _summary(kept=len(kept), dropped=len(corpus) - len(kept), total_s=f"{kept.total_duration:.2f}", out=out)
    return 0


def cmd_split(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus",))
    corpus = load_alignments(cfg.corpus)
    budgets = (args.train_s, args.valid_s, args.test_s)
    seed = args.seed if args.seed is not None else cfg.seed("split")
    train, valid, test, report = speaker_disjoint_split(
        corpus, budgets, seed=seed, strict=not args.best_effort
    )
    out = _outdir(cfg)
    for name, split in (("train", train), ("valid", valid), ("test", test)):
        write_alignments(split, out / f"{name}.tsv")
    _summary(
        train_s=f"{report['realized']['train']:.2f}",
        valid_s=f"{report['realized']['valid']:.2f}",
        test_s=f"{report['realized']['test']:.2f}",
        shortfall_s=f"{sum(report['shortfall'].values()):.2f}",
        out=out,
    )
    return 0


def cmd_targets(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus", "table"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    out = _outdir(cfg)
    n_frames = 0
    with open(out / "targets_phone.tsv", "w", encoding="utf-8") as fp, \
         open(out / "targets_feat.tsv", "w", encoding="utf-8") as ff, \
         open(out / "targets_mask.tsv", "w", encoding="utf-8") as fm:
        for utt in corpus.utterances:
            targets = frame_targets(utt, cfg.frame_rate, table, rules)
            n_frames += len(targets)
            fp.write(utt.id + "\t" + " ".join(str(int(c)) for c in targets.phone_class) + "\n")
            ff.write(utt.id + "\t" + " ".join(vector_to_string(v) for v in targets.feature) + "\n")
            fm.write(utt.id + "\t" + " ".join("1" if m else "0" for m in targets.silence_mask) + "\n")
    _summary(utterances=len(corpus), frames=n_frames, classes=table.n_classes, out=out)
    return 0


def cmd_items(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus", "table"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    items = extract_items(corpus, table, rules, cfg.frame_rate)
    out = _outdir(cfg) / f"items_{cfg.span}.item"
    write_item_file(items, out, cfg.frame_rate, cfg.span)
    _summary(items=len(items), span=cfg.span, out=out)
    return 0


def cmd_abx(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus", "table", "matrix_dir"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    condition = Condition(cfg.speaker, cfg.context, cfg.span)
    score = abx_error(
        corpus,
        MatrixDirectory(cfg.matrix_dir),
        condition,
        table,
        rules,
        frame_rate=cfg.frame_rate,
        metric=cfg.metric,
        jobs=cfg.jobs,
    )
    out = _outdir(cfg) / f"abx_{condition.label}.tsv"
    _write_abx_report(score, out)
    _summary(
        condition=condition.label,
        error=f"{score.error:.6f}",
        triples=score.n_triples,
        cells=score.n_cells,
        skipped=score.n_skipped,
        out=out,
    )
    return 0


def _fmt_key(key: tuple) -> str:
    parts = []
    for component in key:
        if isinstance(component, tuple):
            parts.append(",".join(component))
        else:
            parts.append(str(component))
    return "|".join(parts) if parts else "all"


def _write_abx_report(score, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("condition\tlevel\tkey\terror\tn_triples\n")
        f.write(f"{score.condition_label}\toverall\tall\t{score.error:.6f}\t{score.n_triples}\n")
        for level in ("pair", "speaker", "context"):
            for key, (err, n) in score.levels.get(level, {}).items():
                f.write(f"{score.condition_label}\t{level}\t{_fmt_key(key)}\t{err:.6f}\t{n}\n")


def _stack_corpus_frames(corpus, matrices):
    arrays, index = [], []
    for utt in corpus.utterances:
        data = matrices[utt.id].data.astype(np.float64)
        arrays.append(data)
        index.append((utt.id, len(data)))
    return np.concatenate(arrays, axis=0), index


def cmd_labeler(cfg: RunConfig, args) -> int:
    out = _outdir(cfg)
    if args.method == "kmeans":
        validate(cfg, ("corpus", "matrix_dir"))
        corpus = load_alignments(cfg.corpus)
        matrices = MatrixDirectory(cfg.matrix_dir)
        try:
            frames, index = _stack_corpus_frames(corpus, matrices)
        except KeyError as e:
            raise ToolkitError(f"no representation matrix for utterance {e.args[0]!r}") from None
        seed = args.seed if args.seed is not None else cfg.seed("kmeans")
        model = minibatch_kmeans(frames, args.k, args.batch, args.epochs, seed)
        sequences, lo = [], 0
        for utt_id, n in index:
            sequences.append(LabelSequence(utt_id, assign_kmeans(model, frames[lo:lo + n]), args.k))
            lo += n
        write_labels(sequences, out / "labels_kmeans.tsv")
        write_matrix(RepresentationMatrix(model.centroids.astype(np.float32), cfg.frame_rate),
                     out / "kmeans_model.maub")
        with open(out / "kmeans_model.meta", "w", encoding="utf-8") as f:
            f.write(
                f"k={model.k} d={model.d} seed={seed} batch={args.batch} "
                f"epochs={args.epochs} inertia={model.inertia_history[-1]:.6f}\n"
            )
        _summary(method="kmeans", k=model.k, frames=len(frames),
                 inertia=f"{model.inertia_history[-1]:.6f}", out=out)
        return 0

    validate(cfg, ("corpus", "table"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    per_utt = [(utt.id, frame_targets(utt, cfg.frame_rate, table, rules)) for utt in corpus.utterances]

    if args.method == "feat-freq":
        voiced = [t.feature[~t.silence_mask] for _, t in per_utt]
        codebook = top_frequent_vectors(np.concatenate(voiced, axis=0), args.k)
        write_codebook(codebook, out / "codebook.tsv")
        sequences = [
            LabelSequence(utt_id, assign_feature_codebook_batch(codebook, t.feature), len(codebook))
            for utt_id, t in per_utt
        ]
        write_labels(sequences, out / "labels_featfreq.tsv")
        _summary(method="feat-freq", k=len(codebook), truncated=codebook.truncated, out=out)
        return 0

    all_labels = np.concatenate([t.phone_class for _, t in per_utt])
    if args.method == "phone-freq":
        allowed = top_frequent_phones(all_labels, args.k)
        stem = "phonefreq"
    else:  # all-phones
        train_path = args.train_corpus or cfg.corpus
        if Path(train_path) != Path(cfg.corpus):
            train = load_alignments(train_path)
            train_labels = np.concatenate(
                [frame_targets(u, cfg.frame_rate, table, rules).phone_class for u in train.utterances]
            )
        else:
            train_labels = all_labels
        allowed = observed_phone_set(train_labels)
        stem = "allphones"
    sequences = [
        LabelSequence(utt_id, restrict_phone_set(t.phone_class, allowed, table), len(allowed))
        for utt_id, t in per_utt
    ]
    write_labels(sequences, out / f"labels_{stem}.tsv")
    with open(out / f"phone_space_{stem}.tsv", "w", encoding="utf-8") as f:
        for label, cls in enumerate(allowed):
            f.write(f"{label}\t{table.representatives[cls]}\n")
    _summary(method=args.method, space=len(allowed), out=out)
    return 0


def cmd_inventory(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus", "table", "gold_inventory"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    vectors = []
    for utt in corpus.utterances:
        targets = frame_targets(utt, cfg.frame_rate, table, rules)
        vectors.append(targets.feature[~targets.silence_mask])
    dist = feature_vector_frequencies(np.concatenate(vectors, axis=0))
    gold = read_gold_inventory(cfg.gold_inventory)

    rule_kind, _, rule_value = args.rule.partition(":")
    if rule_kind == "topk":
        prediction = predict_inventory(dist, table, {"top_k": int(rule_value)})
        threshold = f"topk:{rule_value}"
        prf = evaluate_inventory(prediction.phones, gold)
        kept = prediction.vector_phones
    elif rule_kind == "min-count":
        if rule_value == "auto":
            threshold_count, prf = f1_optimal_threshold(dist, table, gold)
        else:
            threshold_count = int(rule_value)
            prf = None
        prediction = predict_inventory(dist, table, {"min_count": threshold_count})
        if prf is None:
            prf = evaluate_inventory(prediction.phones, gold)
        threshold = f"min-count:{threshold_count}"
        kept = prediction.vector_phones
    else:
        raise ConfigError(f"--rule must be topk:K or min-count:{{C,auto}}, got {args.rule!r}")

    out = _outdir(cfg) / "inventory_report.tsv"
    phone_counts: dict[str, int] = {}
    for vec, (phone, _) in kept.items():
        phone_counts[phone] = phone_counts.get(phone, 0) + dist.counts[vec]
    with open(out, "w", encoding="utf-8") as f:
        f.write("phone\tcount\tin_gold\n")
        for phone in sorted(phone_counts):
            f.write(f"{phone}\t{phone_counts[phone]}\t{int(phone in gold)}\n")
        f.write(
            f"#summary\ttp={prf.tp} fp={prf.fp} fn={prf.fn} "
            f"precision={prf.precision:.6f} recall={prf.recall:.6f} f1={prf.f1:.6f} "
            f"threshold={threshold}\n"
        )
    _summary(
        rule=threshold,
        phones=len(prediction.phones),
        precision=f"{prf.precision:.6f}",
        recall=f"{prf.recall:.6f}",
        f1=f"{prf.f1:.6f}",
        out=out,
    )
    return 0


def cmd_metrics(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus", "table"))
    table, rules = _load_phoneset(cfg)
    corpus = load_alignments(cfg.corpus)
    pred_seqs = {seq.utt_id: seq.labels for seq in read_labels(args.pred)}
    feat_num = feat_den = acc_num = acc_den = 0
    per_num = per_den = 0
    for utt in corpus.utterances:
        gold = frame_targets(utt, cfg.frame_rate, table, rules)
        if utt.id not in pred_seqs:
            raise ToolkitError(f"prediction file has no labels for {utt.id!r}")
        pred = pred_seqs[utt.id]
        if len(pred) != len(gold):
            raise ToolkitError(f"{utt.id!r}: {len(pred)} predicted frames vs {len(gold)} gold")
        mask = gold.silence_mask
        acc = phone_accuracy(pred, gold.phone_class, mask)
        acc_num, acc_den = acc_num + acc.numerator, acc_den + acc.denominator
        pred_voiced = np.clip(pred[~mask], 0, table.n_classes - 1)
        feats = feature_accuracy(phones_to_features(pred_voiced, table), gold.feature[~mask])
        feat_num, feat_den = feat_num + feats.numerator, feat_den + feats.denominator
        hyp = collapse_frames(pred, mask)
        ref = collapse_frames(gold.phone_class, mask)
        rate = per(hyp, ref)
        per_num, per_den = per_num + rate.numerator, per_den + rate.denominator
    out = _outdir(cfg) / "metrics_report.tsv"
    rows = [
        ("feature_accuracy", feat_num / feat_den, feat_num, feat_den),
        ("phone_accuracy", acc_num / acc_den, acc_num, acc_den),
        ("per", per_num / per_den, per_num, per_den),
    ]
    with open(out, "w", encoding="utf-8") as f:
        f.write("metric\tsplit\tlanguage\tvalue\tnumerator\tdenominator\n")
        for name, value, num, den in rows:
            f.write(f"{name}\tall\tall\t{value:.6f}\t{num}\t{den}\n")
    _summary(
        feature_acc=f"{rows[0][1]:.6f}",
        phone_acc=f"{rows[1][1]:.6f}",
        per=f"{rows[2][1]:.6f}",
        out=out,
    )
    return 0


def cmd_sample_plan(cfg: RunConfig, args) -> int:
    validate(cfg, ("corpus",))
    corpus = load_alignments(cfg.corpus)
    if args.cap_s is not None:
        corpus = cap_language_hours(corpus, args.cap_s, args.seed if args.seed is not None else cfg.seed("cap"))
    if args.unit == "seconds":
        counts = {lang: sum(u.duration for u in utts) for lang, utts in corpus.by_language.items()}
    else:
        counts = {lang: len(utts) for lang, utts in corpus.by_language.items()}
    weights = language_weights(counts, args.alpha)
    out = _outdir(cfg)
    with open(out / "sampling_plan.tsv", "w", encoding="utf-8") as f:
        f.write("language\tcount\tweight\n")
        for lang, p in zip(weights.languages, weights.probs):
            f.write(f"{lang}\t{counts[lang]:g}\t{p:.12f}\n")
    assignment = length_buckets(corpus.utterances, args.buckets)
    with open(out / "buckets.tsv", "w", encoding="utf-8") as f:
        f.write("utt_id\tbucket\n")
        for b, members in enumerate(assignment.buckets):
            for utt_id in members:
                f.write(f"{utt_id}\t{b}\n")
    _summary(languages=len(weights.languages), alpha=args.alpha, buckets=args.buckets, out=out)
    return 0


def cmd_convert_matrix(cfg: RunConfig, args) -> int:
    src, dst = Path(args.src), Path(args.dst)
    if not src.exists():
        raise ConfigError(f"src does not exist: {src}")
    if args.to == "npy":
        matrix = read_matrix(src)
        np.save(dst, matrix.data)
        rows, cols = matrix.rows, matrix.cols
    else:
        data = np.load(src)
        matrix = RepresentationMatrix(data, args.frame_rate or cfg.frame_rate)
        write_matrix(matrix, dst)
        rows, cols = matrix.rows, matrix.cols
    _summary(rows=rows, cols=cols, out=dst)
    return 0


def _table_checksum(cfg: RunConfig) -> str:
    if cfg.table and Path(cfg.table).exists():
        return hashlib.sha256(Path(cfg.table).read_bytes()).hexdigest()
    return "none"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phoneval",
        description="Zero-resource phonetics toolkit over precomputed frame representations.",
    )
    parser.add_argument("--config", help="run configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--corpus", help="alignment TSV (overrides config)")
        p.add_argument("--table", help="feature table CSV")
        p.add_argument("--rules", help="rewrite/split rules file")
        p.add_argument("--matrix-dir", dest="matrix_dir", help="directory of .maub matrices")
        p.add_argument("--gold-inventory", dest="gold_inventory", help="gold inventory file")
        p.add_argument("--out", dest="output_dir", help="output directory")
        p.add_argument("--frame-rate", dest="frame_rate", type=float, help="frames per second")
        return p

    add("ingest", cmd_ingest, help="load and validate alignments")
    p = add("filter", cmd_filter, help="apply corpus filtering rules")
    p.add_argument("--drop-label", default="spn")
    p.add_argument("--max-phone-s", type=float, default=0.5)
    p.add_argument("--min-utt-s", type=float, default=2.0)
    p.add_argument("--max-utt-s", type=float, default=20.0)

    p = add("split", cmd_split, help="speaker-disjoint train/valid/test split")
    p.add_argument("--train-s", type=float, required=True)
    p.add_argument("--valid-s", type=float, required=True)
    p.add_argument("--test-s", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--best-effort", action="store_true", help="report shortfall instead of failing")

    add("targets", cmd_targets, help="frame-level phone/feature targets")

    p = add("items", cmd_items, help="write the ABX item file")
    p.add_argument("--span", choices=("triphone", "phoneme"), dest="span")

    p = add("abx", cmd_abx, help="ABX discriminability error")
    p.add_argument("--speaker", choices=("within", "across"), dest="speaker")
    p.add_argument("--context", choices=("within", "any"), dest="context")
    p.add_argument("--span", choices=("triphone", "phoneme"), dest="span")
    p.add_argument("--metric", choices=("angular", "cosine", "euclidean"), dest="metric")
    p.add_argument("--jobs", type=int, dest="jobs")

    p = add("labeler", cmd_labeler, help="generate frame pseudo-labels")
    p.add_argument("method", choices=("kmeans", "feat-freq", "phone-freq", "all-phones"))
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--batch", type=int, default=10000)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--train-corpus", dest="train_corpus", help="corpus defining the phone inventory")

    p = add("inventory", cmd_inventory, help="discover and score a phone inventory")
    p.add_argument("action", nargs="?", default="discover", choices=("discover",))
    p.add_argument("--rule", default="topk:100", help="topk:K or min-count:{C,auto}")

    p = add("metrics", cmd_metrics, help="frame accuracies and PER against gold targets")
    p.add_argument("--pred", required=True, help="predicted labels TSV (collapsed class ids)")

    p = add("sample-plan", cmd_sample_plan, help="language weights and length buckets")
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--unit", choices=("utts", "seconds"), default="utts")
    p.add_argument("--cap-s", type=float, dest="cap_s")
    p.add_argument("--seed", type=int)
    p.add_argument("--buckets", type=int, default=1)

    p = add("convert-matrix", cmd_convert_matrix, help="convert between .maub and .npy")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--to", choices=("maub", "npy"), required=True)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--version" in argv:
        cfg = RunConfig()
        if "--config" in argv:
            idx = argv.index("--config")
            try:
                cfg = load_config(argv[idx + 1])
            except (IndexError, ConfigError):
                pass
        print(f"phoneval {__version__} table_sha256={_table_checksum(cfg)}")
        return 0
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, args)
        return args.func(cfg, args)
    except ConfigError as e:
        print(f"phoneval: config error: {e}", file=sys.stderr)
        return 3
    except ToolkitError as e:
        print(f"phoneval: error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
