"""Command-line surface for the embedding classifier pipeline.

Subcommands: manifest, fit, classify, eval, audit, ablate-eps, ablate-n,
bench, inject.  Exit codes: 0 success, 2 input error, 3 numerical
failure, 4 shape mismatch.  Errors go to stderr; results to stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import archive as ar
from . import mixture, normality
from .errors import (
    EmptyInput,
    GdcError,
    InputError,
    NumericalError,
    ShapeError,
    TruncatedFile,
)
from .gaussian import LOG_2PI, fit_class

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_SHAPE = 4


def _fit_archive(archive: ar.EmbeddingArchive, eps: float) -> mixture.GdcModel:
    components = [
        fit_class(np.asarray(block, dtype=np.float64), eps, class_id=i,
                  label=label)
        for i, (label, block) in enumerate(archive.classes)
    ]
    return mixture.assemble(components)


def _accuracy(model: mixture.GdcModel, test: ar.EmbeddingArchive) -> float:
    correct = 0
    total = 0
    for label, block in test.classes:
        posts = mixture.classify_batch(model, np.asarray(block, np.float64))
        correct += sum(1 for p in posts if model.labels[p.predicted] == label)
        total += block.shape[0]
    if total == 0:
        raise EmptyInput("held-out archive contains no embeddings")
    return correct / total


# -- subcommands -------------------------------------------------------------

def cmd_manifest(args) -> int:
    with open(args.labels, "r", encoding="utf-8") as fh:
        labels = [line.strip() for line in fh if line.strip()]
    templates = None
    if args.templates:
        with open(args.templates, "r", encoding="utf-8") as fh:
            templates = [line.rstrip("\n") for line in fh if line.strip()]
    manifest = ar.expand_manifest(labels, templates,
                                  per_template=args.per_template,
                                  seed=args.seed)
    ar.write_manifest(manifest, args.out)
    total = sum(e.count for e in manifest.entries)
    print(f"manifest: {len(manifest.entries)} records, "
          f"{len(labels)} classes, {manifest.per_class_total} images/class, "
          f"{total} images total -> {args.out}")
    return 0


def cmd_fit(args) -> int:
    archive = ar.read_embeddings(args.embeddings)
    model = _fit_archive(archive, args.eps)
    ar.write_model(model, args.out)
    print(f"model: k={model.k} d={model.d} eps={args.eps:g} -> {args.out}")
    for label, block in archive.classes:
        print(f"  {label}: N={block.shape[0]}")
    return 0


def cmd_classify(args) -> int:
    model = ar.read_model(args.model)
    archive = ar.read_embeddings(args.embeddings)
    if archive.d != model.d:
        raise ShapeError(
            f"archive dimension {archive.d} != model dimension {model.d}")
    top_k = min(args.top_k, model.k)
    n = 0
    with open(args.out, "w", encoding="utf-8") as out:
        for label, block in archive.classes:
            for post in mixture.classify_batch(model,
                                               np.asarray(block, np.float64)):
                record = {
                    "label": label,
                    "pred": model.labels[post.predicted],
                    "top": [[model.labels[i], prob]
                            for i, prob in post.top_k[:top_k]],
                }
                out.write(json.dumps(record) + "\n")
                n += 1
    print(f"classified {n} embeddings with k={model.k} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    total = 0
    top1 = 0
    top5 = 0
    per_class = {}
    confusion = {}
    with open(args.predictions, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            label, pred = rec["label"], rec["pred"]
            total += 1
            hit = pred == label
            ok, cnt = per_class.get(label, (0, 0))
            per_class[label] = (ok + hit, cnt + 1)
            if hit:
                top1 += 1
            else:
                pair = (label, pred)
                confusion[pair] = confusion.get(pair, 0) + 1
            if label in [t[0] for t in rec.get("top", [])[:5]]:
                top5 += 1
    if total == 0:
        raise EmptyInput(f"{args.predictions}: no prediction records")
    print(f"total: {total}")
    print(f"top-1 accuracy: {top1 / total:.4f}")
    print(f"top-5 accuracy: {top5 / total:.4f}")
    print("per-class accuracy:")
    for label in sorted(per_class):
        ok, cnt = per_class[label]
        print(f"  {label}: {ok / cnt:.4f} ({ok}/{cnt})")
    if confusion:
        print("most confused (true -> predicted):")
        ranked = sorted(confusion.items(), key=lambda kv: (-kv[1], kv[0]))
        for (true, pred), count in ranked[:10]:
            print(f"  {true} -> {pred}: {count}")
    return 0


def cmd_audit(args) -> int:
    archive = ar.read_embeddings(args.embeddings)
    report = normality.audit(archive, c=args.components, alpha=args.alpha)
    print(f"normality audit: {args.components} components/class, "
          f"alpha={args.alpha:g}")
    for cls in report.classes:
        print(f"  {cls.label}: pass fraction {cls.pass_fraction:.3f}")
    print(f"pooled pass fraction: {report.pass_fraction:.3f}")
    return 0


def cmd_ablate_eps(args) -> int:
    refs = ar.read_embeddings(args.embeddings)
    test = ar.read_embeddings(args.test)
    print("eps\taccuracy")
    for eps in args.eps:
        try:
            model = _fit_archive(refs, eps)
        except NumericalError as exc:
            print(f"{eps:g}\tFAILED({type(exc).__name__})")
            continue
        print(f"{eps:g}\t{_accuracy(model, test):.4f}")
    return 0


def cmd_ablate_n(args) -> int:
    refs = ar.read_embeddings(args.embeddings)
    test = ar.read_embeddings(args.test)
    print("n\taccuracy")
    for n in args.n:
        classes = []
        for label, block in refs.classes:
            if n > block.shape[0]:
                raise InputError(
                    f"class {label!r} has only {block.shape[0]} rows, "
                    f"cannot subsample {n}")
            rng = np.random.default_rng([args.seed, n])
            idx = rng.choice(block.shape[0], size=n, replace=False)
            classes.append((label, block[np.sort(idx)]))
        sub = ar.EmbeddingArchive(d=refs.d, classes=classes)
        model = _fit_archive(sub, args.eps)
        print(f"{n}\t{_accuracy(model, test):.4f}")
    return 0


def cmd_bench(args) -> int:
    if args.repetitions < 1:
        raise InputError(
            f"repetitions must be >= 1, got {args.repetitions}")
    header, refs = ar.scan_model(args.model)
    test = ar.read_embeddings(args.embeddings)
    if test.d != header.d:
        raise ShapeError(
            f"archive dimension {test.d} != model dimension {header.d}")
    rows = np.concatenate([np.asarray(b, np.float64)
                           for _, b in test.classes])
    if rows.shape[0] == 0:
        raise EmptyInput("no embeddings to score")
    d, k = header.d, header.k
    batch = max(1, args.batch_size)
    psize = d * (d + 1) // 2
    tri = np.tril_indices(d)
    lower_mask = np.zeros(d * d, dtype=bool)
    lower_mask[tri[0] * d + tri[1]] = True
    w_dense = np.zeros((d, d))
    record_buf = bytearray(8 * (d + psize))
    blob = np.frombuffer(record_buf, dtype="<f8")
    log_priors = np.log(np.array([r.prior for r in refs]))
    log_dets = np.array([r.log_det_cov for r in refs])

    def score_pass(E):
        # Streams class records from disk so models larger than memory
        # (e.g. k=1000 at d=1536) still bench; the batch amortizes I/O.
        n = E.shape[0]
        log_joint = np.empty((k, n))
        diff_t = np.empty((d, n))
        z = np.empty((d, n))
        with open(args.model, "rb", buffering=0) as fh:
            for i, ref in enumerate(refs):
                fh.seek(ref.mean_offset)
                got = fh.readinto(record_buf)
                if got != len(record_buf):
                    raise TruncatedFile(
                        f"model record for class {ref.label!r} is truncated",
                        offset=ref.mean_offset + got)
                np.subtract(E.T, blob[:d, None], out=diff_t)
                w_dense.ravel()[lower_mask] = blob[d:]
                np.matmul(w_dense, diff_t, out=z)
                quad = np.einsum("ij,ij->j", z, z)
                log_joint[i] = (log_priors[i]
                                - 0.5 * (d * LOG_2PI + log_dets[i] + quad))
        m = log_joint.max(axis=0)
        probs = np.exp(log_joint - m)
        probs /= probs.sum(axis=0)
        return probs

    latencies = []
    start_all = time.perf_counter()
    for rep in range(args.repetitions):
        take = np.arange(rep * batch, (rep + 1) * batch) % rows.shape[0]
        E = rows[take]
        t0 = time.perf_counter()
        score_pass(E)
        latencies.append((time.perf_counter() - t0) / batch)
    total = time.perf_counter() - start_all
    lat = np.array(latencies)
    print(f"bench: k={k} d={d} batch={batch} repetitions={args.repetitions}")
    print(f"per-embedding latency mean: {lat.mean():.6f} s")
    print(f"per-embedding latency p50:  {np.percentile(lat, 50):.6f} s")
    print(f"per-embedding latency p99:  {np.percentile(lat, 99):.6f} s")
    print(f"throughput: {args.repetitions * batch / total:.1f} embeddings/s")
    print("note: encoder time is excluded; this measures posterior "
          "computation only")
    return 0


def cmd_inject(args) -> int:
    refs = ar.read_embeddings(args.refs)
    real = ar.read_embeddings(args.real)
    out = mixture.inject_real(refs, real, per_class=args.per_class,
                              seed=args.seed)
    ar.write_embeddings(out, args.out)
    print(f"injected {args.per_class} real rows per class into "
          f"{len(out.classes)} classes -> {args.out}")
    return 0


# -- argument parsing --------------------------------------------------------

def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdc",
        description="Gaussian classifier over image embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("manifest", help="expand labels through prompt "
                                        "templates into a generation manifest")
    p.add_argument("--labels", required=True)
    p.add_argument("--templates", default=None)
    p.add_argument("--per-template", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_manifest)

    p = sub.add_parser("fit", help="fit one Gaussian per class from an "
                                   "embedding archive")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("classify", help="score an embedding archive "
                                        "against a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="summarize a predictions file")
    p.add_argument("--predictions", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("audit", help="per-class PCA + Shapiro-Wilk "
                                     "normality audit")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--components", type=int, default=30)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("ablate-eps", help="accuracy across regularization "
                                          "values")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--eps", type=_float_list, required=True)
    p.set_defaults(func=cmd_ablate_eps)

    p = sub.add_parser("ablate-n", help="accuracy across reference counts")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ablate_n)

    p = sub.add_parser("bench", help="measure posterior-scoring latency")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=64)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inject", help="replace reference rows with real "
                                      "embeddings (one-shot setting)")
    p.add_argument("--refs", required=True)
    p.add_argument("--real", required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_inject)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        hint = ""
        from .errors import NotPositiveDefinite
        if isinstance(exc, NotPositiveDefinite):
            hint = "; try raising --eps"
        print(f"error: {type(exc).__name__}: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ShapeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (GdcError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
