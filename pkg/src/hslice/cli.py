"""Command-line entry point: ``hslice <subcommand> ...``.

Exit codes: 0 success, 1 a Fail verdict (or a failed verification), 2 usage
or input error, 3 a dimension cap was exceeded.  Defaults for the shared
flags can be set through HSLICE_SEED, HSLICE_WORKERS, HSLICE_CAP,
HSLICE_BUDGET, HSLICE_TRIALS, HSLICE_PARAMS and HSLICE_CONSTANTS.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from importlib import resources

import numpy as np

from . import cube, decompose as dec, io as hio, lab, rng as rngmod, scales, stats, witness

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
GEN_KINDS = ("levels", "random-gaussian", "random-unit")


class UsageError(ValueError):
    pass


def _env(name: str, default, kind=str):
    raw = os.environ.get(f"HSLICE_{name}")
    if raw is None:
        return default
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"HSLICE_{name}={raw!r} is not a valid {kind.__name__}") from None


def _seed(text: str) -> int:
    try:
        return rngmod.check_seed(int(text, 0))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=_env("SEED", 0, lambda s: _seed(s)))
    common.add_argument("--workers", type=_positive, default=_env("WORKERS", 1, int))
    common.add_argument("--cap", type=_positive, default=_env("CAP", cube.DEFAULT_CAP, int),
                        help="largest dimension accepted for exact enumeration")
    common.add_argument("--output", "-o", help="output file (default: standard output)")

    p = argparse.ArgumentParser(prog="hslice", description="Hypercube edge slicing toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", parents=[common], help="check that a collection slices every edge")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--unsliced", help="write unsliced edges as CSV to this file")

    s = sub.add_parser("witness", parents=[common], help="search for an edge no hyperplane slices")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--budget", type=_positive, default=_env("BUDGET", 10_000, int))
    s.add_argument("--params", default=_env("PARAMS", "paper"))
    s.add_argument("--constants", default=_env("CONSTANTS", "paper"))
    s.add_argument("--trials", type=int, default=_env("TRIALS", 0, int),
                   help="if positive, also run the close-index breakdown with this many trials")
    s.add_argument("--breakdown", help="CSV file for the breakdown report")

    s = sub.add_parser("decompose", parents=[common], help="row rescaling and partition of a collection")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--constants", default=_env("CONSTANTS", "paper"))

    s = sub.add_parser("scales", parents=[common], help="count scales of a vector")
    s.add_argument("--input", "-i", required=True)
    s.add_argument("--delta", type=Fraction, required=True)
    s.add_argument("--brute", action="store_true", help="also run the exhaustive search (length <= 12)")

    s = sub.add_parser("lab", parents=[common], help="run inequality checks from a case file")
    s.add_argument("--input", "-i", help="case file (default: bundled cases)")
    s.add_argument("--trials", type=int, default=_env("TRIALS", 0, int),
                   help="override the trial count of every Monte Carlo check")

    s = sub.add_parser("gen", parents=[common], help="generate a collection")
    s.add_argument("--kind", required=True, choices=GEN_KINDS)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, default=0)
    return p


# --- generation ----------------------------------------------------------------


def gen(kind: str, n: int, k: int, seed: int) -> list[cube.Hyperplane]:
    if kind not in GEN_KINDS:
        raise UsageError(f"unknown kind {kind!r}")
    if n < 2 or k < 0:
        raise UsageError("need n >= 2 and k >= 0")
    if kind == "levels":
        return cube.levels_cover(n)
    g = rngmod.stream(seed, f"gen:{kind}", 0)
    A = g.standard_normal((k, n))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    b = g.standard_normal(k) if kind == "random-gaussian" else g.uniform(-1.0, 1.0, k)
    return [cube.Hyperplane.float_of(A[i], b[i]) for i in range(k)]


# --- subcommands ----------------------------------------------------------------


def _manifest(args, **extra) -> dict:
    d = {"command": args.command, "seed": args.seed, "workers": args.workers}
    for key in ("params", "constants", "budget", "trials", "input", "cap"):
        if getattr(args, key, None) is not None:
            d[key] = getattr(args, key)
    d.update(extra)
    return d


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(args, csv_text: str, manifest: dict) -> None:
    """CSV goes to --output (or stdout); the run manifest sits beside it (or on stderr)."""
    _emit(args, csv_text)
    if args.output:
        with open(args.output + ".manifest.json", "w") as f:
            f.write(hio.dumps(manifest))
    else:
        sys.stderr.write(hio.dumps(manifest))


def cmd_verify(args) -> int:
    n, hs = hio.load_collection(args.input)
    rep = cube.verify_cover(hs, n, cap=args.cap, workers=args.workers)
    print(rep.summary())
    if args.output:
        _emit(args, hio.dumps({**_manifest(args), "report": rep.to_dict()}))
    if args.unsliced:
        with open(args.unsliced, "w", newline="") as f:
            f.write(hio.edges_to_csv(rep.unsliced))
    return EXIT_OK


def cmd_witness(args) -> int:
    n, hs = hio.load_collection(args.input)
    cfg = witness.WitnessConfig(budget=args.budget, constants=args.constants, params=args.params,
                                cap=args.cap, workers=args.workers)
    res = witness.end_to_end_witness(hs, cfg, seed=args.seed, n=n)
    out = {**_manifest(args), "result": res.to_dict()}
    code = EXIT_OK
    if args.trials > 0 and hs:
        V, lam, params = witness.pipeline_instance(hs, cfg, seed=args.seed, n=n)
        br = witness.close_type_breakdown(V, lam, params, args.trials, seed=args.seed,
                                          workers=args.workers)
        out["breakdown"] = {"untyped_close": br.untyped_close, "bad_not_near_bad": br.bad_not_near_bad,
                            "rows": [r.row() for r in br.reports]}
        if args.breakdown:
            with open(args.breakdown, "w", newline="") as f:
                f.write(br.to_csv())
        if stats.any_failed(br.reports):
            code = EXIT_FAIL
    _emit(args, hio.dumps(out))
    return code


def cmd_decompose(args) -> int:
    n, hs = hio.load_collection(args.input)
    if not hs:
        raise UsageError("decomposition needs at least one hyperplane")
    A = np.array([[float(c) for c in h.a] for h in hs])
    consts = dec.DecompConstants.parse(args.constants, len(hs), n)
    res = dec.decompose(A, consts)
    ver = dec.verify_decomposition(A, res, consts)
    _emit(args, hio.dumps({**_manifest(args), "result": res.to_dict(), "verification": ver.to_dict()}))
    return EXIT_OK if ver.ok else EXIT_FAIL


def cmd_scales(args) -> int:
    v = hio.load_vector(args.input)
    if args.delta <= 0:
        raise UsageError("delta must be positive")
    count, cert = scales.greedy_scales(v, float(args.delta))
    out = {**_manifest(args), "delta": str(args.delta), "greedy_scales": count,
           "certificate": cert.to_dict(), "verified": scales.verify_certificate(v, cert)}
    if args.brute:
        if len(v) > scales.BRUTE_CAP:
            raise cube.CapExceeded(f"exhaustive search limited to length {scales.BRUTE_CAP}")
        out["max_scales"] = scales.brute_max_scales(v, float(args.delta))
    _emit(args, hio.dumps(out))
    return EXIT_OK


def _vector_spec(spec):
    if isinstance(spec, dict) and "geometric" in spec:
        g = spec["geometric"]
        return lab.geometric_vector(int(g["s"]), Fraction(str(g.get("delta", 1))))
    return [Fraction(x) if isinstance(x, str) else x for x in spec]


def _intervals_spec(spec):
    if isinstance(spec, dict):
        return [(Fraction(str(spec["a"])), Fraction(str(spec["b"])))] * int(spec["count"])
    return [(Fraction(str(a)), Fraction(str(b))) for a, b in spec]


def run_lab(cases: dict, seed: int, trials_override: int = 0, workers: int = 1) -> list[stats.EstimateReport]:
    reports = []
    for c, check in enumerate(cases.get("checks", [])):
        kind = check.get("kind")
        trials = trials_override or int(check.get("trials", 10**4))
        sub = rngmod.stream(seed, "lab", c).integers(0, 2**63)
        if kind == "lo":
            cs = [{**case, "v": _vector_spec(case["v"])} for case in check["cases"]]
            reports += lab.check_lo_bound(cs, trials, sub)
        elif kind == "many_scales":
            v = _vector_spec(check["v"])
            reports.append(lab.check_many_scales(v, Fraction(str(check.get("b", 0))),
                                                 Fraction(str(check["delta"])), int(check["s"]),
                                                 trials, sub, workers=workers))
        elif kind == "continuous":
            iv = _intervals_spec(check["intervals"])
            for method in check.get("methods", ["auto"]):
                reports.append(lab.check_continuous_lo(iv, Fraction(str(check["b"])),
                                                       Fraction(str(check["t"])), method=method,
                                                       trials=trials, seed=sub))
        elif kind == "chernoff":
            reports += lab.check_chernoff(_intervals_spec(check["intervals"]), check["ts"], trials, sub)
        else:
            raise UsageError(f"check {c}: unknown kind {kind!r}")
    return reports


def cmd_lab(args) -> int:
    if args.input:
        cases = hio.read_json(args.input)
    else:
        cases = hio.json.loads(resources.files("hslice").joinpath("data/lab_cases.json").read_text())
    reports = run_lab(cases, args.seed, args.trials, args.workers)
    _emit_csv(args, stats.reports_to_csv(reports), _manifest(args, rows=len(reports)))
    return EXIT_FAIL if stats.any_failed(reports) else EXIT_OK


def cmd_gen(args) -> int:
    hs = gen(args.kind, args.n, args.k, args.seed)
    d = hio.collection_to_dict(args.n, hs)
    d["generator"] = {"kind": args.kind, "n": args.n, "k": len(hs), "seed": args.seed}
    _emit(args, hio.dumps(d))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "witness": cmd_witness, "decompose": cmd_decompose,
            "scales": cmd_scales, "lab": cmd_lab, "gen": cmd_gen}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"hslice: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except cube.CapExceeded as exc:
        print(f"hslice: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (hio.InputError, UsageError, cube.DimensionError, lab.PreconditionError,
            dec.DecompositionError, ValueError, TypeError, KeyError) as exc:
        print(f"hslice: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
