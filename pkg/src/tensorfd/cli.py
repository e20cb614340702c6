"""Command-line entry point: ``tensorfd {synth,sketch,bench,certify,classify}``."""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .datagen import ExtremeSpec, SyntheticSpec, gen_extreme, gen_synthetic
from .experiment import ALGORITHMS, ExperimentConfig, classify_scenes, run_experiment, run_sketch
from .io import StreamReader, write_tensor
from .metrics import certify_bounds
from .tfd import tfd_stream


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _dims(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.lower().split("x"))


def cmd_synth(args) -> int:
    if args.alpha is not None:
        a = gen_extreme(ExtremeSpec(args.dims, args.alpha, seed=args.seed))
    else:
        a = gen_synthetic(SyntheticSpec(args.dims, args.k, eta=args.eta,
                                        decay=args.decay, seed=args.seed))
    write_tensor(args.out, a)
    print(f"wrote {'x'.join(map(str, a.shape))} tensor to {args.out}", file=sys.stderr)
    return 0


def cmd_sketch(args) -> int:
    reader = StreamReader(args.input)
    sketch, c = run_sketch(args.alg, reader, args.ell, args.seed)
    write_tensor(args.out, sketch)
    info = {"algorithm": args.alg, "ell": args.ell, "dims": list(reader.dims), "c_value": c}
    print(json.dumps(info))
    return 0


def cmd_bench(args) -> int:
    if args.input:
        source = args.input
    elif args.alpha is not None:
        source = ExtremeSpec(args.dims, args.alpha, seed=args.seed)
    else:
        source = SyntheticSpec(args.dims, max(args.k), eta=args.eta, seed=args.seed)
    cfg = ExperimentConfig(
        input=source, algorithms=args.alg, ells=args.ell, ks=args.k,
        repeats=args.repeats, seed=args.seed, out=args.out, n_jobs=args.jobs,
    )
    rows = run_experiment(cfg)
    if not args.out:
        from .experiment import write_csv
        write_csv(rows, sys.stdout)
    return 0


def cmd_certify(args) -> int:
    reader = StreamReader(args.input)
    a = reader.read_all()
    w = csv.writer(sys.stdout, lineterminator="\r\n")
    w.writerow(["ell", "k", "c", "status", "cov_err", "cov_bound", "proj_err", "proj_bound"])
    failed = False
    for ell in args.ell:
        result = tfd_stream(reader, ell, trailing_dims=reader.slice_dims)
        for k in args.k:
            cert = certify_bounds(a, result, k)
            failed |= cert.status == "fail"
            w.writerow([ell, k, repr(cert.c), cert.status, repr(cert.cov_err),
                        repr(cert.cov_bound), repr(cert.proj_err), repr(cert.proj_bound)])
    return 1 if failed else 0


def cmd_classify(args) -> int:
    if args.frame_mode != 3:
        print("error: frames must lie along mode 3; re-orient the stream first",
              file=sys.stderr)
        return 2
    labels = classify_scenes(args.input, args.ell, n_clusters=args.clusters,
                             seed=args.seed, k=args.k)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(["frame", "label"])
        for i, lab in enumerate(np.asarray(labels)):
            w.writerow([i, int(lab)])
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensorfd", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic or extreme-case tensor")
    s.add_argument("--dims", type=_dims, required=True, help="e.g. 300x40x8")
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--eta", type=float, default=10.0)
    s.add_argument("--decay", choices=["linear", "polynomial", "exponential"])
    s.add_argument("--alpha", type=float, help="extreme case B + alpha*U instead")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("sketch", help="stream a tensor file into a sketch file")
    s.add_argument("input")
    s.add_argument("--alg", choices=ALGORITHMS, default="tfd")
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sketch)

    s = sub.add_parser("bench", help="run an experiment sweep, emit CSV")
    s.add_argument("--input", help="stream file; otherwise a synthetic tensor")
    s.add_argument("--dims", type=_dims, default=(300, 40, 8))
    s.add_argument("--eta", type=float, default=10.0)
    s.add_argument("--alpha", type=float)
    s.add_argument("--alg", type=lambda t: t.split(","), default=list(ALGORITHMS))
    s.add_argument("--ell", type=_int_list, default=[10, 20])
    s.add_argument("--k", type=_int_list, default=[5])
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("certify", help="check the t-FD error bounds on a file")
    s.add_argument("input")
    s.add_argument("--ell", type=_int_list, required=True)
    s.add_argument("--k", type=_int_list, required=True)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("classify", help="cluster frames of an n1 x n2 x frames stream")
    s.add_argument("input")
    s.add_argument("--ell", type=int, default=10)
    s.add_argument("--k", type=int, help="subspace rank (default ell // 2)")
    s.add_argument("--clusters", type=int, default=2)
    s.add_argument("--frame-mode", type=int, default=3,
                   help="mode holding frames; only 3 is accepted")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
