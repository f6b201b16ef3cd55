"""``vidsum`` command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 infeasible
selection, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .akm import akm_align, akm_score_matrix, matcher_kind
from .beam import BeamConfig, beam_select, choices_from_candidates, hash_scorer, table_scorer
from .caption_eval import aggregate, evaluate_summary, load_external_scores
from .core import (
    atomic_write_text,
    dumps_dataset,
    dumps_jsonl,
    load_candidates,
    load_dataset,
    load_predictions,
    prediction_to_dict,
)
from .errors import FormatError, InfeasibleError, ValidationError, VidsumError
from .features import FeatureStore
from .filtering import FilterConfig, filter_dataset
from .pseudo import PseudoConfig, gen_dataset
from .selector import SelectorConfig, select_summary
from .stats import compute_stats

logger = logging.getLogger("vidsum")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=1) + "\n"


def _digest(path) -> str:
    h = hashlib.sha256()
    p = Path(path)
    if p.is_dir():
        for f in sorted(p.rglob("*")):
            if f.is_file():
                h.update(str(f.relative_to(p)).encode())
                h.update(f.read_bytes())
    else:
        h.update(p.read_bytes())
    return h.hexdigest()


def _emit(text: str, out) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _pmap(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _records_by_id(path):
    return {r.video_id: r for r in load_dataset(path)}


def _lookup(records, vid):
    try:
        return records[vid]
    except KeyError:
        raise ValidationError(f"video {vid!r} not found in dataset") from None


# ---------------------------------------------------------------------------
# subcommands; each returns (config snapshot, extra manifest fields)
# ---------------------------------------------------------------------------


def cmd_akm(args):
    kind = matcher_kind(args.matcher)
    records = _records_by_id(args.dataset)
    preds = load_predictions(args.pred)
    store = FeatureStore(args.features) if args.features else None
    if kind == "cosine" and store is None:
        raise ValidationError("--features is required for the cosine matcher")

    def one(pred):
        rec = _lookup(records, pred.video_id)
        fm = store[pred.video_id] if kind == "cosine" else None
        al = akm_align(akm_score_matrix(pred, rec, kind, fm))
        return {"video_id": pred.video_id, "akm": al.score, "assign": list(al.assign)}

    rows = _pmap(one, preds, args.jobs)
    corpus = {
        "matcher": kind,
        "num_videos": len(rows),
        "akm": math.fsum(r["akm"] for r in rows) / len(rows) if rows else None,
    }
    _emit(_dump({"videos": rows, "corpus": corpus}), args.out)
    return {"matcher": kind}, {}


def cmd_eval(args):
    records = _records_by_id(args.dataset)
    preds = load_predictions(args.pred)
    store = FeatureStore(args.features)
    external = load_external_scores(args.external) if args.external else None

    def one(pred):
        return evaluate_summary(pred, _lookup(records, pred.video_id), store[pred.video_id], external)

    reports = _pmap(one, preds, args.jobs)
    out = {"videos": [r.to_dict() for r in reports], "corpus": aggregate(reports).to_dict()}
    _emit(_dump(out), args.out)
    return {"external": bool(external)}, {}


def cmd_select(args):
    cfg = SelectorConfig(
        n=args.n,
        max_segment_fraction=args.max_segment_fraction,
        mode=args.mode,
        overlap_penalty_per_s=args.overlap_penalty,
        segment_weight=args.segment_weight,
        caption_weight=args.caption_weight,
    )
    records = _records_by_id(args.dataset)
    groups = load_candidates(args.candidates)

    def one(item):
        vid, cands = item
        return vid, select_summary(cands, _lookup(records, vid).duration_s, cfg)

    results = _pmap(one, groups.items(), args.jobs)
    _emit(dumps_jsonl(prediction_to_dict(sel.to_prediction()) for _, sel in results), args.out)
    info = [
        {"video_id": vid, "objective": sel.objective, "mode": sel.mode, "fell_back": sel.fell_back}
        for vid, sel in results
    ]
    return vars_of(cfg), {"results": info}


def _make_scorer(scorer_arg: str, choices, vid):
    kind, _, arg = scorer_arg.partition(":")
    if kind == "hash":
        return hash_scorer(int(arg or 0))
    if kind == "table":
        return table_scorer(arg, choices, vid)
    raise ValidationError(f"unknown scorer {scorer_arg!r}; use table:PATH or hash:SEED")


def cmd_beam(args):
    cfg = BeamConfig(n=args.n, width=args.width, alpha=args.alpha, norm_pool=args.norm_pool)
    groups = load_candidates(args.candidates)

    def one(item):
        vid, cands = item
        choices = choices_from_candidates(cands)
        return beam_select(choices, _make_scorer(args.scorer, choices, vid), cfg, video_id=vid)

    results = _pmap(one, groups.items(), args.jobs)
    _emit(dumps_jsonl(prediction_to_dict(p) for p, _ in results), args.out)
    snap = vars_of(cfg)
    snap["scorer"] = args.scorer
    return snap, {"results": [{"video_id": p.video_id, "score": s} for p, s in results]}


def cmd_filter(args):
    cfg = FilterConfig(k_sigma=args.k_sigma, min_keep=args.min_keep)
    records = load_dataset(args.dataset)
    filtered, report = filter_dataset(records, FeatureStore(args.features), cfg)
    atomic_write_text(args.out, dumps_dataset(filtered))
    if args.report:
        atomic_write_text(args.report, _dump(report.to_dict()))
    return vars_of(cfg), {"corpus": report.to_dict()["corpus"]}


def cmd_pseudo_gen(args):
    cfg = PseudoConfig(
        n=args.n, encoder_len=args.encoder_len, beta=args.beta, seed=args.seed, noise=args.noise
    )
    gen_dataset(args.source, args.count, cfg, args.out_dir, sampling=args.sampling)
    snap = vars_of(cfg)
    snap.update(count=args.count, sampling=args.sampling)
    return snap, {}


def cmd_stats(args):
    stats = compute_stats(load_dataset(args.dataset))
    if args.out:
        atomic_write_text(args.out, _dump(stats.to_dict()))
    sys.stdout.write(stats.table())
    return {}, {}


def vars_of(cfg) -> dict:
    return dict(vars(cfg))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    jobs_default = int(os.environ.get("VIDSUM_JOBS", "1") or 1)
    p = _Parser(prog="vidsum", description="Multi-keyframe video summarization: evaluation and selection tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def common(sp, out_help="output file (default: stdout)"):
        sp.add_argument("--jobs", type=int, default=jobs_default,
                        help="concurrent per-video tasks (default: $VIDSUM_JOBS or 1)")
        sp.add_argument("--out", help=out_help)

    sp = sub.add_parser("akm", help="aligned keyframe matching scores")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--pred", required=True, help="prediction JSONL")
    sp.add_argument("--features", help="feature directory or sidecar JSON (cosine matcher)")
    sp.add_argument("--matcher", default="exact", choices=["exact", "ex", "cosine", "cos"])
    common(sp)
    sp.set_defaults(func=cmd_akm)

    sp = sub.add_parser("eval", help="full evaluation: AKM, aligned METEOR, external scores")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--external", help="external score JSONL (e.g. BLEURT)")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("select", help="choose N candidates per video by dynamic programming")
    sp.add_argument("--candidates", required=True)
    sp.add_argument("--dataset", required=True, help="dataset JSON supplying video durations")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mode", choices=["hard", "soft"], default="hard")
    sp.add_argument("--max-segment-fraction", type=float, default=0.75)
    sp.add_argument("--overlap-penalty", type=float, default=1.0, help="soft mode, per second")
    sp.add_argument("--segment-weight", type=float, default=1.0)
    sp.add_argument("--caption-weight", type=float, default=1.0)
    common(sp, "prediction JSONL (default: stdout)")
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("beam", help="beam search over frame/caption candidates")
    sp.add_argument("--candidates", required=True)
    sp.add_argument("--scorer", required=True, help="table:PATH or hash:SEED")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--width", type=int, default=8)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--norm-pool", choices=["step_global", "per_beam"], default="per_beam")
    common(sp, "prediction JSONL (default: stdout)")
    sp.set_defaults(func=cmd_beam)

    sp = sub.add_parser("filter", help="drop annotated keyframes far from their slot centroid")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--k-sigma", type=float, default=1.0)
    sp.add_argument("--min-keep", type=int, default=1)
    sp.add_argument("--out", required=True, help="filtered dataset JSON")
    sp.add_argument("--report", help="variance report JSON")
    sp.set_defaults(func=cmd_filter, jobs=1)

    sp = sub.add_parser("pseudo-gen", help="generate pseudo video instances")
    sp.add_argument("--source", required=True, help="image-caption collection JSONL")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--encoder-len", type=int, required=True)
    sp.add_argument("--beta", type=float, default=0.05)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sampling", choices=["coco", "story"], default="coco")
    sp.add_argument("--noise", choices=["per_frame", "per_element"], default="per_frame")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_pseudo_gen, jobs=1, out=None)

    sp = sub.add_parser("stats", help="dataset statistics")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--out", help="statistics JSON")
    sp.set_defaults(func=cmd_stats, jobs=1)
    return p


def _input_paths(args):
    for name in ("dataset", "pred", "features", "external", "candidates", "source"):
        v = getattr(args, name, None)
        if v:
            yield name, v
    if getattr(args, "scorer", "").startswith("table:"):
        yield "scorer", args.scorer[len("table:"):]


def _manifest_path(args):
    if getattr(args, "out_dir", None):
        return Path(args.out_dir) / "run_manifest.json"
    if args.out:
        return Path(f"{args.out}.manifest.json")
    return None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    t0 = time.perf_counter()
    try:
        config, extra = args.func(args)
        digests = {name: _digest(p) for name, p in _input_paths(args)}
    except (ValidationError, FormatError, KeyError, ValueError) as exc:
        print(f"vidsum {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleError as exc:
        print(f"vidsum {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"vidsum {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VidsumError as exc:
        print(f"vidsum {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID

    manifest = {
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "config": config,
        "input_digests": digests,
        "tool_version": __version__,
        **extra,
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    path = _manifest_path(args)
    try:
        if path is None:
            sys.stderr.write(_dump(manifest))
        else:
            atomic_write_text(path, _dump(manifest))
    except OSError as exc:
        print(f"vidsum {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
