"""Command-line interface: build, verify, lk, word, mesh.

Exit codes: 0 = verdict pass, 1 = verdict fail or check error, 2 = usage or
configuration error.  LINKLAB_THREADS caps worker and BLAS threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _cap_threads():
    cap = os.environ.get("LINKLAB_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_cap_threads()

import numpy as np  # noqa: E402  (after thread caps)

from .config import ALL_CHECKS, ConfigError, SuiteConfig, load_config, merge_config  # noqa: E402


def _family_args(p: argparse.ArgumentParser):
    p.add_argument("--i", type=int, default=None, help="ellipsoid block index")
    p.add_argument("--j", type=int, default=None, help="trailing block index (0 = main family)")
    p.add_argument("--n", type=int, default=None, help="ambient dimension")
    p.add_argument("--eps", type=float, default=None,
                   help="near-round coefficients (1+eps, 1+2eps, 1, 1+3eps)")
    p.add_argument("--coeffs", type=str, default=None,
                   help="explicit coefficients c1,c2,c3,c4")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="linklab",
        description="Constructions and numerical certificates for convex "
                    "Brunnian links in R^n",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="print the link description as JSON")
    _family_args(b)
    b.add_argument("--out", type=str, default=None, help="write JSON here")

    v = sub.add_parser("verify", help="run the verification suite")
    _family_args(v)
    v.add_argument("--config", type=str, default=None,
                   help="dotted-key config file")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--samples", type=int, default=None,
                   help="Monte Carlo sample budget (0 = automatic)")
    v.add_argument("--starts", type=int, default=None,
                   help="multistart count for preimage counting")
    v.add_argument("--budget", type=int, default=None,
                   help="multistart count for distance optimization")
    v.add_argument("--checks", type=str, default=None,
                   help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
    v.add_argument("--height", type=float, default=None,
                   help="bump membrane height for the word check")
    v.add_argument("--out", type=str, default=None,
                   help="directory for report.json, checks.csv and figures")
    v.add_argument("--figures", dest="figures", action="store_true",
                   default=None, help="render figures alongside the report")
    v.add_argument("--no-figures", dest="figures", action="store_false")
    v.add_argument("--parallel", action="store_true", default=None,
                   help="run checks in a thread pool (deterministic)")

    lk = sub.add_parser("lk", help="linking number of a single pair")
    _family_args(lk)
    lk.add_argument("--pair", type=str, default="capped,c2",
                    help="pair from {c1,c2,c3,capped}, e.g. capped,c2")
    lk.add_argument("--samples", type=int, default=None)
    lk.add_argument("--seed", type=int, default=None)
    lk.add_argument("--starts", type=int, default=None)

    w = sub.add_parser("word", help="crossing word of a single loop")
    _family_args(w)
    w.add_argument("--loop", type=str, default="ellipse",
                   choices=("ellipse", "alpha", "beta"))
    w.add_argument("--height", type=float, default=None)
    w.add_argument("--seed", type=int, default=None)

    m = sub.add_parser("mesh", help="export n=3 meshes for external viewing")
    _family_args(m)
    m.add_argument("--resolution", type=int, default=64)
    m.add_argument("--out", type=str, required=True)
    return ap


def _config_from_args(args) -> SuiteConfig:
    base = load_config(args.config) if getattr(args, "config", None) else SuiteConfig()
    coeffs = None
    if getattr(args, "coeffs", None):
        coeffs = tuple(float(x) for x in args.coeffs.split(","))
    checks = None
    if getattr(args, "checks", None):
        names = tuple(x.strip() for x in args.checks.split(",") if x.strip())
        bad = [x for x in names if x not in ALL_CHECKS]
        if bad:
            raise ConfigError(f"unknown checks {bad}")
        checks = names
    return merge_config(
        base,
        i=args.i,
        j=args.j,
        n=args.n,
        eps=args.eps,
        coeffs=coeffs,
        seed=getattr(args, "seed", None),
        mc_samples=getattr(args, "samples", None),
        preimage_starts=getattr(args, "starts", None),
        dist_budget=getattr(args, "budget", None),
        checks=checks,
        word_height=getattr(args, "height", None),
        figures=getattr(args, "figures", None),
        parallel=getattr(args, "parallel", None),
    )


def _cmd_build(args) -> int:
    from .catalog import build_family

    cfg = _config_from_args(args)
    link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
    text = json.dumps(link.to_json_dict(), indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args) -> int:
    from .catalog import build_family
    from .suite import report_csv, run_suite

    cfg = _config_from_args(args)
    report = run_suite(cfg)
    sys.stdout.write(report.to_json())
    sys.stderr.write(f"timings (s): {json.dumps(report.timings)}\n")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(report.to_json())
        with open(os.path.join(args.out, "checks.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write(report_csv(report))
        if cfg.figures:
            from .figures import render_report_figures

            link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
            render_report_figures(report, link, args.out)
    return 0 if report.passed else 1


def _cmd_lk(args) -> int:
    from .catalog import build_family, cap_upper_half
    from .invariants import linking_number_mc, linking_number_preimage

    cfg = _config_from_args(args)
    link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
    pieces = {
        "c1": link.component(1),
        "c2": link.component(2),
        "c3": link.component(3),
    }
    if cfg.j == 0:
        pieces["capped"] = cap_upper_half(link)[0]
    try:
        name_a, name_b = (x.strip() for x in args.pair.split(","))
        A, B = pieces[name_a], pieces[name_b]
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad --pair {args.pair!r}: {exc}") from exc
    est = linking_number_mc(A, B, samples=cfg.resolved_samples(), seed=cfg.seed)
    deg = linking_number_preimage(A, B, starts=cfg.preimage_starts,
                                  seed=cfg.seed)
    doc = {
        "pair": [name_a, name_b],
        "lk_mc": est.value,
        "std_error": est.std_error,
        "rounded": est.rounded,
        "lk_preimage": deg,
        "samples": est.samples,
        "seed": est.seed,
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0 if est.rounded == deg and est.consistent else 1


def _cmd_word(args) -> int:
    from .catalog import build_family, ellipsoid_loop, generator_loops
    from .words import (
        commutator_class_check,
        crossing_word,
        default_membrane_system,
        reduce_word,
        validate_membrane_system,
    )

    cfg = _config_from_args(args)
    link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
    sys_ = default_membrane_system(link, height=cfg.word_height,
                                   radii=(cfg.word_rho_in, cfg.word_rho_out))
    validity = validate_membrane_system(sys_, seed=cfg.seed)
    loops = generator_loops(cfg.n, c1=link.coeffs[0], c2=link.coeffs[1])
    loop = {
        "ellipse": lambda: ellipsoid_loop(link),
        "alpha": lambda: loops.axis_meridian,
        "beta": lambda: loops.equator_meridian,
    }[args.loop]()
    raw = crossing_word(loop, sys_, validity=validity, seed=cfg.seed)
    reduced = reduce_word(raw)
    cc = commutator_class_check(reduced)
    doc = {
        "loop": args.loop,
        "word": str(raw),
        "reduced": str(reduced),
        "commutator": cc.is_commutator,
        "normal_form": cc.normal_form if cc.is_commutator else None,
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_mesh(args) -> int:
    from .catalog import build_family
    from .meshes import export_meshes

    cfg = _config_from_args(args)
    link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
    files = export_meshes(link, args.resolution, args.out)
    for path in files:
        sys.stdout.write(path + "\n")
    return 0


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    handlers = {
        "build": _cmd_build,
        "verify": _cmd_verify,
        "lk": _cmd_lk,
        "word": _cmd_word,
        "mesh": _cmd_mesh,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"file error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
