"""Command-line front end: ``htl <subcommand> ...``.

Vertices are 0-based everywhere. Exit codes: 0 success, 1 I/O failure,
2 invalid parameters, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .exact import EnumerationCapExceeded
from .experiments import (
    SweepConfig, bell_number, exact_prob_top_nonzero, lm_sweep, moment_report, sweep,
)
from .homology import CoefficientSpec, homology_report
from .model import (
    RNG_FAMILY, ComplexFormatError, ModelParams, choose_sampler, load_complex,
    parse_complex, parse_probability, sample, save_complex,
)
from .rho import (
    RhoQuery, RimQuery, chain_boundary, random_constellation, rho_bound, rho_estimate,
    rho_exact, rho_tilde_estimate, rho_tilde_exact, rim_count, rim_member, sigma_member,
)
from .simplex import rank_simplex


class ParamError(ValueError):
    pass


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    seed: Optional[int]
    version: str = __version__
    rng: str = RNG_FAMILY
    sampler: Optional[str] = None
    started: str = ""
    finished: str = ""
    extra: dict = field(default_factory=dict)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _prob(text: str):
    try:
        return parse_probability(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad probability {text!r}") from None


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _emit(args, text: str, manifest: RunManifest) -> None:
    manifest.finished = _now()
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
        mpath = args.manifest or args.out + ".manifest.json"
    else:
        sys.stdout.write(text)
        mpath = args.manifest
    if mpath:
        Path(mpath).write_text(json.dumps(asdict(manifest), indent=2, default=str) + "\n",
                               encoding="utf-8")


def _manifest(args, seed=None, sampler=None) -> RunManifest:
    params = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in vars(args).items()
              if k not in ("func", "out", "manifest", "started", "command")}
    return RunManifest(args.command, params, seed, sampler=sampler, started=args.started)


def _as_text(d: dict) -> str:
    return "".join(f"{k} {v}\n" for k, v in d.items())


# ---------------------------------------------------------------- subcommands


def cmd_sample(args) -> None:
    params = ModelParams(args.n, args.d, args.p)
    cs = sample(params, args.seed, args.trial, args.sampler)
    _emit(args, save_complex(cs), _manifest(args, args.seed, cs.sampler))


def cmd_betti(args) -> None:
    cs = load_complex(_read(args.input))
    rep = homology_report(cs, CoefficientSpec.parse(args.coeff))
    doc = {"n": cs.params.n, "d": cs.params.d, **rep.to_dict()}
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = {"beta_top": rep.beta_top, "beta_codim1": rep.beta_codim1}
        if rep.torsion_codim1 is not None:
            lines["torsion_codim1"] = "[" + ", ".join(map(str, rep.torsion_codim1)) + "]"
        text = _as_text(lines)
    _emit(args, text, _manifest(args))


def cmd_sweep(args) -> None:
    if (args.w is None) == (args.c is None):
        raise ParamError("give exactly one of --w (threshold sweep) or --c (p = (d log n + c)/n)")
    if args.c is not None:
        res = lm_sweep(args.n, args.d, args.c, args.trials, args.seed, args.threads)
    else:
        target = {"top": "top", "codim1": "codim1"}[args.target]
        cfg = SweepConfig(args.n, args.d, args.w, args.trials, args.seed, args.coeff, target, args.sampler)
        res = sweep(cfg, args.threads)
    text = res.to_csv(args.timing) if args.format == "csv" else res.to_json(args.timing)
    man = _manifest(args, args.seed, ",".join(pt.sampler for pt in res.points))
    man.extra["seconds"] = [pt.seconds for pt in res.points]
    _emit(args, text, man)


def cmd_exact(args) -> None:
    rows = []
    for ptext in args.p:
        p = Fraction(ptext)
        val = exact_prob_top_nonzero(args.n, args.d, p)
        rows.append({"n": args.n, "d": args.d, "p": str(p), "probability": str(val),
                     "decimal": float(val)})
    if args.format == "json":
        text = json.dumps({"metadata": {"kind": "exact", "n": args.n, "d": args.d,
                                        "version": __version__}, "data": rows}, indent=2) + "\n"
    elif args.format == "csv":
        text = "p,probability,decimal\n" + "".join(
            f"{r['p']},{r['probability']},{r['decimal']!r}\n" for r in rows)
    else:
        text = "".join(f"p={r['p']} probability={r['probability']} decimal={r['decimal']!r}\n" for r in rows)
    _emit(args, text, _manifest(args))


def cmd_moment(args) -> None:
    ms = moment_report(args.n, args.d, args.p, args.trials, args.seed, not args.no_witness)
    doc = ms.to_dict()
    if args.format == "json":
        text = json.dumps({"metadata": {"kind": "moment", "version": __version__, "rng": RNG_FAMILY,
                                        "sampler": choose_sampler(args.p)},
                           "data": [doc]}, indent=2, default=float) + "\n"
    else:
        text = _as_text(doc)
    _emit(args, text, _manifest(args, args.seed, choose_sampler(args.p)))


def _load_ranks(path: str, dim: int, n: int) -> frozenset:
    n2, d2, simplices = parse_complex(_read(path), expected_dim=dim)
    if n2 != n:
        raise ParamError(f"{path}: vertex count {n2} differs from {n}")
    return frozenset(rank_simplex(s, n) for s in simplices)


def cmd_rho(args) -> None:
    if (args.sigma is None) == (args.T is None):
        raise ParamError("give exactly one of --sigma or --T")
    if args.sigma is not None:
        n, dm1, simplices = parse_complex(_read(args.sigma))
        d = dm1 + 1
        sigma = frozenset(rank_simplex(s, n) for s in simplices)
    else:
        n, d, simplices = parse_complex(_read(args.T))
        T = frozenset(rank_simplex(s, n) for s in simplices)
    params = ModelParams(n, d, args.p)
    S = _load_ranks(args.S, d, n) if args.S else frozenset()
    doc = {"n": n, "d": d, "p": str(args.p), "lambda": args.lam, "mode": args.mode}
    notes = []
    if args.sigma is not None:
        q = RhoQuery(params, sigma, S, args.lam)
        doc["member"] = sigma_member(q)
        if sigma and not q.sigma_is_cycle:
            notes.append("sigma has nonzero boundary, so it is never a boundary: rho = 0")
        if args.mode == "exact":
            val = rho_exact(q)
            doc["rho"] = str(val) if isinstance(val, Fraction) else val
        else:
            est = rho_estimate(q, args.trials, args.seed)
            doc.update(est.to_dict())
    else:
        q = RimQuery(params, T, S, args.lam)
        doc["rim"] = rim_count(T, n, d)
        doc["member"] = rim_member(q)
        if args.mode == "exact":
            val = rho_tilde_exact(q)
            doc["rho"] = str(val) if isinstance(val, Fraction) else val
        else:
            doc.update(rho_tilde_estimate(q, args.trials, args.seed).to_dict())
    w = params.w
    if d >= 2 and w < 1 and doc["member"]:
        b = rho_bound(d, args.lam, params.p, w)
        doc["bound"] = str(b) if isinstance(b, Fraction) else b
    doc["notes"] = notes
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = _as_text({k: v for k, v in doc.items() if k != "notes"}) + "".join(f"note {x}\n" for x in notes)
    _emit(args, text, _manifest(args, args.seed if args.mode == "mc" else None))


def cmd_rim(args) -> None:
    if args.input:
        n, d, simplices = parse_complex(_read(args.input))
        text = f"rim {rim_count([rank_simplex(s, n) for s in simplices], n, d)}\n"
        _emit(args, text, _manifest(args))
        return
    if args.seed is None:
        raise ParamError("--constellations requires --seed")
    rng = np.random.default_rng(args.seed)
    bad_formula = bad_support = bad_rim = 0
    for _ in range(args.constellations):
        c = random_constellation(rng, args.n, args.d)
        supp = c.boundary_support()
        floor = (c.m - 2) * (args.d + 1)
        bad_formula += supp != c.predicted_support()
        bad_support += not supp > floor
        bad_rim += not c.rim() > floor
    text = _as_text({"constellations": args.constellations, "formula_violations": bad_formula,
                     "support_violations": bad_support, "rim_violations": bad_rim})
    _emit(args, text, _manifest(args, args.seed))


def cmd_bell(args) -> None:
    _emit(args, f"{bell_number(args.k, max_bits=None)}\n", _manifest(args))


def cmd_bench(args) -> None:
    from math import comb

    from .linalg import boundary_matrix, rank, stream_rank_gf2
    from .model import ComplexSample

    N = comb(args.n, args.d + 1)
    full = ComplexSample(ModelParams(args.n, args.d, 1.0), np.ones(N, dtype=bool))
    lines = {"matrix": f"{comb(args.n, args.d)}x{N}"}
    best_s = best_d = float("inf")
    for _ in range(args.repeat):
        t = time.perf_counter()
        r1 = stream_rank_gf2(args.n, args.d, full.ranks)
        best_s = min(best_s, time.perf_counter() - t)
        if not args.no_dense:
            t = time.perf_counter()
            r2 = rank(boundary_matrix(full, args.d, "gf2"))
            best_d = min(best_d, time.perf_counter() - t)
            if r1 != r2:
                raise RuntimeError(f"rank mismatch: streamed {r1}, dense {r2}")
    lines["rank"] = r1
    lines["streamed_seconds"] = f"{best_s:.4f}"
    lines["streamed_columns_per_second"] = f"{N / best_s:.0f}"
    if not args.no_dense:
        lines["dense_seconds"] = f"{best_d:.4f}"
        lines["dense_columns_per_second"] = f"{N / best_d:.0f}"
    _emit(args, _as_text(lines), _manifest(args))


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="htl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=None):
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--manifest", help="run manifest path (default OUT.manifest.json)")
        if fmt:
            p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("sample", help="draw one complex from Y(n,p,d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=_prob, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--sampler", choices=["auto", "bernoulli", "geometric"], default="auto")
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("betti", help="Betti numbers of a complex file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--coeff", default="gf2", help="gf2 | gfp:Q | int")
    common(p, ["text", "json"])
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over w = pn (or over c)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--w", type=_grid, help="comma-separated w grid, p = w/n")
    p.add_argument("--c", type=_grid, help="comma-separated c grid, p = (d log n + c)/n; GF(2), H_{d-1} = 0")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--coeff", default="gf2")
    p.add_argument("--target", choices=["top", "codim1"], default="top")
    p.add_argument("--sampler", choices=["auto", "bernoulli", "geometric"], default="auto")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--timing", action="store_true", help="fill the seconds column (not reproducible)")
    common(p, ["csv", "json"])
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exact", help="exact Prob(beta_d > 0) by enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", nargs="+", required=True, help="decimals or fractions a/b")
    common(p, ["text", "csv", "json"])
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("moment", help="second-moment statistics of empty (d+1)-simplex boundaries")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=_prob, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-witness", action="store_true", help="skip the beta_d check per trial")
    common(p, ["text", "json"])
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("rho", help="rho for a (d-1)-chain, or the rim variant for a d-simplex set")
    p.add_argument("--sigma", help="file of (d-1)-simplices, header 'n d-1'")
    p.add_argument("--T", help="file of d-simplices for the rim variant")
    p.add_argument("--S", help="file of forbidden d-simplices")
    p.add_argument("--p", type=_prob, required=True)
    p.add_argument("--lambda", dest="lam", type=int, default=0)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int)
    common(p, ["text", "json"])
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("rim", help="rim count of a d-simplex file, or check random constellations")
    p.add_argument("--in", dest="input")
    p.add_argument("--constellations", type=int, default=0)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_rim)

    p = sub.add_parser("bell", help="number of set partitions of a k-set")
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("bench", help="GF(2) rank throughput on a full-skeleton boundary matrix")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--no-dense", action="store_true")
    common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.started = _now()
    if args.command == "rho" and args.mode == "mc" and args.seed is None:
        ap.error("--mode mc requires --seed")
    try:
        args.func(args)
    except EnumerationCapExceeded as exc:
        print(f"htl: {exc}", file=sys.stderr)
        return 3
    except (ParamError, ComplexFormatError, ValueError, ZeroDivisionError) as exc:
        print(f"htl: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"htl: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
