"""Command line interface.

Exit codes: 0 ok, 1 user error (bad input, failed validation), 2 internal error.
Every subcommand accepts ``--config FILE`` (JSON); explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AttnError, FormatError, SchemaViolation

log = logging.getLogger("attnswap")


class UserError(AttnError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _d_arg(value: str):
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("d must be an integer or 'auto'") from None


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    from .ingest import filter_fixations, load_corpus, map_fixations_to_elements, Modality

    corpus = load_corpus(args.root)
    kept = filter_fixations(corpus.fixations, args.min_fixation_ms)
    events = map_fixations_to_elements(kept, corpus.elements, corpus.viewports())
    _emit({
        "pages": len(corpus.pages),
        "elements": len(corpus.elements),
        "text_elements": len(corpus.elements_of(Modality.TEXT)),
        "image_elements": len(corpus.elements_of(Modality.IMAGE)),
        "fixations": len(corpus.fixations),
        "fixations_kept": len(kept),
        "hits": len(events),
        "misses": len(kept) - len(events),
    }, args.output)
    return 0


def cmd_features(args) -> int:
    from .features.corpus import corpus_features
    from .features.manifest import load_manifest
    from .ingest import load_corpus

    table = corpus_features(load_corpus(args.root), load_manifest(args.manifest))
    table.save(args.output, {"tool_version": __version__})
    log.info("wrote %d text and %d image feature rows to %s", len(table.text_ids), len(table.image_ids),
             args.output)
    return 0


def _pairs_for(root, min_ms, dedup):
    from .ingest import attended_events, load_corpus
    from .pairing import Dedup, assign_fixation_indices, build_pairs

    corpus = load_corpus(root)
    return corpus, build_pairs(assign_fixation_indices(attended_events(corpus, min_ms), Dedup(dedup)))


def cmd_pair(args) -> int:
    from .pairing import save_pairs

    _, pairs = _pairs_for(args.root, args.min_fixation_ms, args.dedup)
    if args.output:
        save_pairs(pairs, args.output)
    else:
        _emit([asdict(p) for p in pairs], None)
    return 0


def _load_training(args):
    """Aligned (T, I, text refs) from --pairs (+ --features) or a paired matrix file."""
    from .matio import read_matrices
    from .pairing import load_pairs
    from .retrieval import TextRef

    if str(args.pairs).endswith(".json"):
        if not args.features:
            raise UserError("--pairs given as JSON rows also needs --features")
        from .features.corpus import FeatureTable

        pairs = load_pairs(args.pairs)
        T, I = FeatureTable.load(args.features).join(pairs)
        refs = [TextRef(p.text_element_id, p.page_id, p.participant_id, p.fixation_index) for p in pairs]
        return T, I, refs
    mats = read_matrices(args.pairs)
    if len(mats) != 2 or mats[0].shape[0] != mats[1].shape[0]:
        raise FormatError(f"{args.pairs}: expected two row-aligned matrix blocks (T then I)")
    T, I = mats
    return T, I, [TextRef(f"row{j}") for j in range(T.shape[0])]


def cmd_fit(args) -> int:
    from .evaluate import Protocol, fit_model
    from .retrieval import RetrievalIndex

    T, I, refs = _load_training(args)
    model = fit_model(T, I, Protocol(d=args.d, lam=args.lam, cross_map=args.cross_map,
                                     auto_threshold=args.auto_threshold))
    meta = {"tool_version": __version__}
    model.save(args.output, meta)
    if args.index_out:
        RetrievalIndex.build(model, T, refs).save(args.index_out, meta)
    _emit(model.summary(), None)
    return 0


def _read_query(path) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("features")
    arr = np.asarray(data, dtype=float)
    if arr.ndim not in (1, 2):
        raise SchemaViolation(f"{path}: expected a feature vector or a list of vectors")
    return arr


def cmd_query(args) -> int:
    from .cca import load_model
    from .retrieval import RetrievalIndex, nearest_text_batch, ranked_to_json

    model = load_model(args.model)
    index = RetrievalIndex.load(args.index)
    q = _read_query(args.image_features)
    results = nearest_text_batch(model, index, np.atleast_2d(q), args.k, args.space)
    out = [ranked_to_json(r) for r in results]
    _emit(out[0] if q.ndim == 1 else out, args.output)
    return 0


def cmd_evaluate(args) -> int:
    from .costs import PUBLISHED
    from .evaluate import Protocol, cross_validate
    from .features.corpus import corpus_features
    from .features.manifest import load_manifest

    corpus, pairs = _pairs_for(args.root, args.min_fixation_ms, args.dedup)
    T, I = corpus_features(corpus, load_manifest(args.manifest)).join(pairs)
    protocol = Protocol(d=args.d, lam=args.lam, folds=args.folds, scheme=args.scheme, space=args.space,
                        same_page_only=args.same_page_only, cross_map=args.cross_map, seed=args.seed)
    report = cross_validate(T, I, pairs, protocol)
    _emit({"tool_version": __version__, "config": asdict(protocol), "evaluation": report.to_dict(),
           "reference": PUBLISHED}, args.output)
    return 0


def cmd_cost(args) -> int:
    from .costs import PUBLISHED, CostParams, corpus_image_costs, cost_report, published_cost_report
    from .ingest import Viewport, load_corpus

    params = CostParams(viewport=Viewport(args.width, args.height), font_px=args.font_px,
                        bytes_per_char=args.bytes_per_char, bandwidth_kbps=args.bandwidth)
    if args.published:
        out = {"cost": published_cost_report(params).to_dict(), "inputs": "published"}
    else:
        if not args.root:
            raise UserError("cost needs --root or --published")
        img = corpus_image_costs(load_corpus(args.root))
        out = {"image_costs": asdict(img),
               "cost": cost_report(img.mean_per_image_kB, img.mean_per_page_kB, args.micro_f1, params).to_dict()}
    out["reference"] = PUBLISHED
    out["tool_version"] = __version__
    _emit(out, args.output)
    return 0


def cmd_synth(args) -> int:
    from .matio import write_matrices
    from .synth import SynthSpec, gen_attention_corpus, gen_correlated_pairs

    spec = SynthSpec.from_dict(json.loads(Path(args.spec).read_text())) if args.spec else SynthSpec()
    if args.pairs_only:
        T, I, _ = gen_correlated_pairs(spec)
        write_matrices(args.output, [T, I])
        return 0
    sc = gen_attention_corpus(spec, args.output)
    _emit({"root": str(args.output), "pages": len(sc.corpus.pages), "elements": len(sc.corpus.elements),
           "fixations": len(sc.corpus.fixations), "ground_truth_pairs": len(sc.ground_truth)}, None)
    return 0


def cmd_pipeline(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline

    cfg = PipelineConfig.from_dict(args.pipeline_config)
    res = run_pipeline(cfg)
    _emit({"output_dir": str(res.output_dir), "config_hash": res.config_hash, "reused_stages": res.reused,
           "micro_f1": res.report["evaluation"]["micro_f1"],
           "achieved_saving_pct": res.cost["cost"]["achieved_saving_pct"]}, None)
    return 0


# -- parser --------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="JSON file supplying defaults for this command's options")


def _corpus_opts(p):
    p.add_argument("--min-fixation-ms", dest="min_fixation_ms", type=int, default=100)
    p.add_argument("--dedup", choices=["first", "visit"], default="first")


def _model_opts(p):
    p.add_argument("-d", "--d", dest="d", type=_d_arg, default=28, help="subspace dimension or 'auto'")
    p.add_argument("--auto-d", dest="d", action="store_const", const="auto",
                   help="use the largest d whose canonical correlation is at least 0.1 (fit: --auto-threshold)")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4, help="trace-scaled ridge weight")
    p.add_argument("--cross-map", dest="cross_map", choices=["identity", "rho"], default="identity")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="attnswap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def validate_opts(p):
        _common(p)
        p.add_argument("root")
        p.add_argument("--min-fixation-ms", dest="min_fixation_ms", type=int, default=100)
        p.add_argument("-o", "--output")
        p.set_defaults(func=cmd_validate)

    validate_opts(sub.add_parser("validate", help="validate a corpus and report hit counts"))
    ingest = sub.add_parser("ingest", help="corpus ingestion commands")
    ingest_sub = ingest.add_subparsers(dest="ingest_command", required=True, parser_class=_Parser)
    validate_opts(ingest_sub.add_parser("validate", help="same as the top-level validate"))

    p = sub.add_parser("features", help="extract text and image feature matrices")
    _common(p)
    p.add_argument("root")
    p.add_argument("--manifest", help="text feature manifest (default: packaged 70-entry manifest)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("pair", help="build the fixation-index paired dataset")
    _common(p)
    p.add_argument("root")
    _corpus_opts(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("fit", help="fit the CCA model")
    _common(p)
    p.add_argument("--pairs", required=True, help="pairs.json (with --features) or a paired matrix file")
    p.add_argument("--features", help="feature matrix file from the features command")
    _model_opts(p)
    p.add_argument("--auto-threshold", dest="auto_threshold", type=float, default=0.1)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--index-out", dest="index_out", help="also write a retrieval index of the training texts")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("query", help="retrieve attentionally equivalent text for an image")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--image-features", dest="image_features", required=True)
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--space", choices=["text", "subspace"], default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("evaluate", help="cross-validated micro-F1 on a corpus")
    _common(p)
    p.add_argument("--root", required=True)
    p.add_argument("--manifest")
    _corpus_opts(p)
    _model_opts(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--scheme", choices=["stratified", "leave-one-page-out"], default="stratified")
    p.add_argument("--space", choices=["text", "subspace"], default="text")
    p.add_argument("--same-page-only", dest="same_page_only", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cost", help="memory cost and render time of replacing images with text")
    _common(p)
    p.add_argument("--root")
    p.add_argument("--published", action="store_true", help="use the published image costs instead of a corpus")
    p.add_argument("--bandwidth", type=float, default=53.0, help="kbps")
    p.add_argument("--micro-f1", dest="micro_f1", type=float, default=1.0)
    p.add_argument("--width", type=int, default=1680)
    p.add_argument("--height", type=int, default=1050)
    p.add_argument("--font-px", dest="font_px", type=int, default=16)
    p.add_argument("--bytes-per-char", dest="bytes_per_char", type=int, default=4)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    _common(p)
    p.add_argument("--spec", help="JSON synth spec (default: built-in)")
    p.add_argument("--pairs-only", dest="pairs_only", action="store_true",
                   help="write correlated T/I matrices instead of a corpus")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage from one config")
    _common(p)
    p.add_argument("--corpus-root", dest="corpus_root")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--manifest", dest="manifest_path")
    p.add_argument("-d", "--d", dest="d", type=_d_arg)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--space", dest="retrieval_space", choices=["text", "subspace"])
    p.add_argument("--bandwidth", dest="bandwidth_kbps", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_pipeline)
    return ap


_PIPELINE_FLAGS = ("corpus_root", "output_dir", "manifest_path", "d", "lam", "folds", "retrieval_space",
                   "bandwidth_kbps", "seed")


def _apply_config(ap: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if args.command == "pipeline":
        cfg = {}
        if args.config:
            cfg = json.loads(Path(args.config).read_text())
        for name in _PIPELINE_FLAGS:
            val = getattr(args, name)
            if val is not None:
                cfg[name] = val
        if "corpus_root" not in cfg:
            raise UserError("pipeline needs corpus_root (in --config or --corpus-root)")
        args.pipeline_config = cfg
        return args
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        cfg = {("lam" if k == "lambda" else k): v for k, v in cfg.items()}
        # re-parse so explicit flags win over config values
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in known})
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except AttnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        from .pipeline import StageError

        if isinstance(exc, StageError):
            print(f"error: {exc}", file=sys.stderr)
            return 1 if exc.user_error else 2
        if isinstance(exc, (FileNotFoundError, json.JSONDecodeError)):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
