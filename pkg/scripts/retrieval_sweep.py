"""Cross-validated micro-F1 on synthetic corpora across subspace sizes and signal strengths.

    python scripts/retrieval_sweep.py --out sweep.json
"""

import argparse
import json
import tempfile
from pathlib import Path

from attnswap.evaluate import Protocol, cross_validate
from attnswap.features.corpus import corpus_features
from attnswap.ingest import attended_events
from attnswap.pairing import assign_fixation_indices, build_pairs
from attnswap.synth import SynthSpec, gen_attention_corpus


def run(strength: float, ds, spaces, seed: int, n_pages: int, n_participants: int) -> list[dict]:
    with tempfile.TemporaryDirectory() as tmp:
        spec = SynthSpec(n_pages=n_pages, n_participants=n_participants, fi_signal_strength=strength, seed=seed)
        sc = gen_attention_corpus(spec, Path(tmp))
        pairs = build_pairs(assign_fixation_indices(attended_events(sc.corpus)))
        T, I = corpus_features(sc.corpus).join(pairs)
    out = []
    for space in spaces:
        for d in ds:
            rep = cross_validate(T, I, pairs, Protocol(d=d, space=space, seed=seed))
            out.append({"strength": strength, "space": space, "d": d, "fitted_d": rep.d,
                        "micro_f1": rep.micro_f1, "chance": rep.chance_f1, "n_queries": rep.n_queries})
            print(f"strength={strength:5.1f} space={space:<8} d={str(d):>4} (fit {rep.d:>2}) "
                  f"micro-F1={rep.micro_f1:.3f} chance={rep.chance_f1:.3f}")
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--strengths", type=float, nargs="+", default=[0.0, 0.5, 2.0, 10.0])
    ap.add_argument("--d", nargs="+", default=["1", "3", "28", "auto"])
    ap.add_argument("--spaces", nargs="+", default=["text", "subspace"])
    ap.add_argument("--pages", type=int, default=30)
    ap.add_argument("--participants", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    ds = [d if d == "auto" else int(d) for d in args.d]
    rows = []
    for s in args.strengths:
        rows += run(s, ds, args.spaces, args.seed, args.pages, args.participants)
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=1) + "\n")


if __name__ == "__main__":
    main()
