"""Verification suite: ordered checks, JSON report, deterministic output.

The suite runs, in order: component disjointness, the three split
certificates, the capped-sphere construction audit, the two single-point
transversal intersection checks, the stereographic lift / great-sphere /
separation-parity block, the Hopf linking number by both methods, and (for
i = 1) the commutator word check.  Checks that do not apply to a family
(j > 0, or i != 1 for words) are recorded as skipped.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .catalog import (
    bounding_balls,
    build_family,
    cap_upper_half,
    ellipsoid_loop,
    generator_loops,
    great_spheres,
)
from .config import SuiteConfig
from .distance import min_distance
from .geometry import sample_param, stereographic_lift
from .invariants import (
    lift_capped,
    linking_number_mc,
    linking_number_preimage,
    separation_parity,
    split_certificate,
    transversal_intersections,
)
from .words import (
    commutator_class_check,
    crossing_word,
    default_membrane_system,
    reduce_word,
    validate_membrane_system,
)

SCHEMA_VERSION = 1


@dataclass
class CheckRecord:
    check: str
    module: str
    operation: str
    status: str          # pass | fail | skip | error
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "module": self.module,
            "operation": self.operation,
            "status": self.status,
            "detail": self.detail,
        }


@dataclass
class Report:
    config: dict
    checks: list
    verdict: str
    timings: dict

    def to_dict(self, include_timings: bool = False) -> dict:
        doc = {
            "artifact": {"name": "linklab", "version": __version__,
                         "schema": SCHEMA_VERSION},
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": self.verdict,
        }
        if include_timings:
            doc["timings"] = self.timings
        return doc

    def to_json(self, include_timings: bool = False) -> str:
        # timings stay out of the canonical report so identical configs
        # serialize byte-identically
        return json.dumps(self.to_dict(include_timings), indent=2) + "\n"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _round_list(x, digits=12):
    return [round(float(v), digits) for v in np.asarray(x).ravel()]


# ---------------------------------------------------------------------------
# individual checks


def _check_disjoint(cfg: SuiteConfig, link) -> CheckRecord:
    expected_dims = {
        "component_1": cfg.n - cfg.j - 2,
        "component_2": cfg.n - cfg.i - 1,
        "component_3": cfg.i + cfg.j,
    }
    actual_dims = {
        f"component_{m}": link.component(m).sphere_dim for m in (1, 2, 3)
    }
    detail = {"dimensions": actual_dims, "expected_dimensions": expected_dims,
              "pairs": {}}
    ok = actual_dims == expected_dims
    for a, b in ((1, 2), (1, 3), (2, 3)):
        res = min_distance(link.component(a), link.component(b),
                           budget=cfg.dist_budget, seed=cfg.seed)
        detail["pairs"][f"{a}-{b}"] = {
            "distance": res.distance,
            "converged": res.converged,
        }
        ok = ok and res.distance > 1e-6
    return CheckRecord("disjoint", "core-geometry", "min_distance",
                       "pass" if ok else "fail", detail)


def _check_split(cfg: SuiteConfig, link) -> CheckRecord:
    detail = {}
    ok = True
    for pair in ((1, 2), (2, 3), (3, 1)):
        cert = split_certificate(link, pair, budget=cfg.dist_budget,
                                 seed=cfg.seed)
        detail[f"{pair[0]}-{pair[1]}"] = {
            "ball": cert.ball_index,
            "against": cert.sphere_index,
            "distance": cert.distance,
            "witness": [_round_list(w) for w in cert.witness],
            "granted": cert.granted,
        }
        ok = ok and cert.granted
    return CheckRecord("split", "invariants", "split_certificate",
                       "pass" if ok else "fail", detail)


def _check_capped(cfg: SuiteConfig, link) -> CheckRecord:
    if cfg.j != 0:
        return CheckRecord("capped", "catalog", "cap_upper_half", "skip",
                           {"reason": "capping is defined only for j = 0"})
    capped, half = cap_upper_half(link)
    rim_u = sample_param(cfg.seed + 11, capped.sphere_dim - 1, 400)
    top_pts, cap_pts = capped.rim_points(rim_u)
    rim_gap = float(np.max(np.linalg.norm(top_pts - cap_pts, axis=1)))
    c4 = link.coeffs[3]
    top = np.zeros(cfg.n)
    top[-1] = c4
    top_res = float(capped.hemisphere.implicit_residual(top[None, :])[0])
    center_inside = bool(capped.cap.contains(np.zeros((1, cfg.n)))[0])
    ok = rim_gap < 1e-12 and top_res < 1e-10 and center_inside
    return CheckRecord(
        "capped", "catalog", "cap_upper_half",
        "pass" if ok else "fail",
        {"rim_gap": rim_gap, "top_point_residual": top_res,
         "cap_center_inside": center_inside},
    )


def _check_transversal(cfg: SuiteConfig, link) -> CheckRecord:
    if cfg.j != 0:
        return CheckRecord("transversal", "invariants",
                           "transversal_intersections", "skip",
                           {"reason": "capped-sphere checks need j = 0"})
    capped, half = cap_upper_half(link)
    balls = bounding_balls(link)
    c2 = link.coeffs[1]
    expected_top = np.zeros(cfg.n)
    expected_top[-1] = c2

    rep1 = transversal_intersections(capped, balls[1], seed=cfg.seed)
    rep2 = transversal_intersections(link.component(2), half, seed=cfg.seed)
    det1 = {
        "count": rep1.count,
        "points": [_round_list(p) for p in rep1.points],
        "margin": list(rep1.margins),
        "residuals": list(rep1.residuals),
    }
    det2 = {
        "count": rep2.count,
        "points": [_round_list(p) for p in rep2.points],
        "margin": list(rep2.margins),
        "residuals": list(rep2.residuals),
    }
    ok1 = (
        rep1.count == 1
        and float(np.linalg.norm(rep1.points[0])) < 1e-8
        and rep1.margins[0] > 0.1
        and rep1.residuals[0] < 1e-8
    )
    ok2 = (
        rep2.count == 1
        and float(np.linalg.norm(rep2.points[0] - expected_top)) < 1e-8
        and rep2.margins[0] > 0.1
        and rep2.residuals[0] < 1e-8
    )
    return CheckRecord(
        "transversal", "invariants", "transversal_intersections",
        "pass" if (ok1 and ok2) else "fail",
        {"capped_vs_ball2": det1, "component2_vs_half_ball3": det2},
    )


def _check_lift(cfg: SuiteConfig, link) -> CheckRecord:
    if cfg.j != 0:
        return CheckRecord("lift", "invariants", "separation_parity", "skip",
                           {"reason": "lifted picture needs j = 0"})
    capped, _ = cap_upper_half(link)
    radius = link.coeffs[1]
    gs = great_spheres(cfg.i, cfg.n, radius=radius)

    U = sample_param(cfg.seed + 13, link.component(2).sphere_dim, 10_000)
    X = link.component(2).points(U)
    lifted = stereographic_lift(X, radius)
    fix_disp = float(
        max(np.max(np.abs(lifted[:, :-1] - X)), np.max(np.abs(lifted[:, -1])))
    )
    axis_res = float(np.max(gs.axis.implicit_residual(lifted)))

    lifted_capped = lift_capped(capped, radius)
    pts = lifted_capped.sample_points(seed=cfg.seed + 17, m=4000)
    sep_res = float(np.max(gs.separation.implicit_residual(pts)))

    pole_norm = float(abs(np.linalg.norm(gs.poles[0]) - radius))
    frames_orth = float(np.max(np.abs(gs.axis.frame @ gs.complement.frame.T)))

    parity_complement = separation_parity(
        gs.complement, gs.poles[0], gs.poles[1], gs.separation, seed=cfg.seed
    )
    parity_lifted = separation_parity(
        lifted_capped, gs.poles[0], gs.poles[1], gs.separation, seed=cfg.seed
    )
    ok = (
        fix_disp < 1e-10
        and axis_res < 1e-10
        and sep_res < 1e-8
        and pole_norm < 1e-12
        and frames_orth < 1e-12
        and parity_complement == 1
        and parity_lifted == 1
    )
    return CheckRecord(
        "lift", "invariants", "stereographic_lift+separation_parity",
        "pass" if ok else "fail",
        {
            "axis_fixed_displacement": fix_disp,
            "axis_sphere_residual": axis_res,
            "lifted_capped_in_separation_sphere": sep_res,
            "pole_norm_error": pole_norm,
            "axis_complement_orthogonality": frames_orth,
            "parity": {"complement": parity_complement,
                       "lifted_capped": parity_lifted},
        },
    )


def _check_linking(cfg: SuiteConfig, link) -> CheckRecord:
    if cfg.j != 0:
        return CheckRecord("linking", "invariants", "linking_number_mc", "skip",
                           {"reason": "Hopf sublink checks need j = 0"})
    capped, _ = cap_upper_half(link)
    axis_sphere = link.component(2)
    samples = cfg.resolved_samples()
    est = linking_number_mc(capped, axis_sphere, samples=samples, seed=cfg.seed)
    deg = linking_number_preimage(capped, axis_sphere,
                                  starts=cfg.preimage_starts, seed=cfg.seed)
    ok = (
        abs(est.rounded) == 1
        and abs(deg) == 1
        and est.rounded == deg
        and est.std_error < 0.05
        and abs(est.value - est.rounded) <= 0.1
        and est.consistent
    )
    return CheckRecord(
        "linking", "invariants", "linking_number_mc+linking_number_preimage",
        "pass" if ok else "fail",
        {
            "lk_mc": est.value,
            "std_error": est.std_error,
            "rounded": est.rounded,
            "lk_preimage": deg,
            "samples": est.samples,
            "methods_agree": bool(est.rounded == deg),
        },
    )


def _check_word(cfg: SuiteConfig, link) -> CheckRecord:
    if cfg.j != 0 or cfg.i != 1:
        return CheckRecord("word", "homotopy-words", "crossing_word", "skip",
                           {"reason": "the commutator check runs for i = 1, j = 0"})
    sys = default_membrane_system(
        link, height=cfg.word_height, radii=(cfg.word_rho_in, cfg.word_rho_out)
    )
    validity = validate_membrane_system(sys, budget=cfg.dist_budget,
                                        seed=cfg.seed)
    detail = {
        "membrane_margins": {
            "membranes_disjoint": validity.membranes_disjoint,
            "a_avoids_component2": validity.a_avoids_component2,
            "b_avoids_component1": validity.b_avoids_component1,
            "a_rim_only": validity.a_rim_only,
            "b_rim_only": validity.b_rim_only,
        },
        "valid": validity.valid,
    }
    if not validity.valid:
        return CheckRecord("word", "homotopy-words", "validate_membrane_system",
                           "fail", detail)
    loops = generator_loops(cfg.n, c1=link.coeffs[0], c2=link.coeffs[1])
    named = [
        ("ellipse", ellipsoid_loop(link)),
        ("axis_meridian", loops.axis_meridian),
        ("equator_meridian", loops.equator_meridian),
    ]
    ok = True
    for name, loop in named:
        w = reduce_word(crossing_word(loop, sys, validity=validity,
                                      seed=cfg.seed))
        lk1 = linking_number_preimage(loop, link.component(1),
                                      starts=cfg.preimage_starts, seed=cfg.seed)
        lk2 = linking_number_preimage(loop, link.component(2),
                                      starts=cfg.preimage_starts, seed=cfg.seed)
        sums = (w.exponent_sum("a"), w.exponent_sum("b"))
        entry = {
            "word": str(w),
            "exponent_sums": list(sums),
            "lk": [lk1, lk2],
            "sums_match_lk": bool(sums == (lk1, lk2)),
        }
        if name == "ellipse":
            cc = commutator_class_check(w)
            entry["commutator"] = cc.is_commutator
            entry["normal_form"] = cc.normal_form
            ok = ok and cc.is_commutator and len(w) == 4
        else:
            entry["single_letter"] = len(w) == 1
            ok = ok and len(w) == 1
        ok = ok and entry["sums_match_lk"]
        detail[name] = entry
    return CheckRecord("word", "homotopy-words",
                       "crossing_word+commutator_class_check",
                       "pass" if ok else "fail", detail)


_CHECK_FUNCS = {
    "disjoint": _check_disjoint,
    "split": _check_split,
    "capped": _check_capped,
    "transversal": _check_transversal,
    "lift": _check_lift,
    "linking": _check_linking,
    "word": _check_word,
}


def run_suite(cfg: SuiteConfig) -> Report:
    """Run the selected checks on the configured family; deterministic."""
    link = build_family(cfg.i, cfg.j, cfg.n, cfg.resolved_coeffs())
    selected = [c for c in _CHECK_FUNCS if c in cfg.checks]

    def run_one(name):
        t0 = time.perf_counter()
        try:
            record = _CHECK_FUNCS[name](cfg, link)
        except Exception as exc:  # surfaced in the report, fails the run
            record = CheckRecord(name, "cli-report", "run_suite", "error",
                                 {"exception": f"{type(exc).__name__}: {exc}"})
        return record, time.perf_counter() - t0

    results = {}
    if cfg.parallel:
        workers = int(os.environ.get("LINKLAB_THREADS", "0")) or min(
            len(selected), os.cpu_count() or 1
        )
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {name: pool.submit(run_one, name) for name in selected}
            for name in selected:
                results[name] = futures[name].result()
    else:
        for name in selected:
            results[name] = run_one(name)

    checks = [results[name][0] for name in selected]
    timings = {name: round(results[name][1], 3) for name in selected}
    verdict = "pass" if all(c.status in ("pass", "skip") for c in checks) else "fail"
    return Report(config=cfg.echo(), checks=checks, verdict=verdict,
                  timings=timings)


def report_csv(report: Report) -> str:
    """Flat delimited view of the check records (one metric per row)."""
    lines = ["check,module,operation,status,metric,value"]

    def emit(check, module, op, status, prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                emit(check, module, op, status, f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(value, (list, tuple)):
            flat = ";".join(str(x) for x in value)
            lines.append(f"{check},{module},{op},{status},{prefix},{flat}")
        else:
            lines.append(f"{check},{module},{op},{status},{prefix},{value}")

    for rec in report.checks:
        if not rec.detail:
            lines.append(f"{rec.check},{rec.module},{rec.operation},{rec.status},,")
        else:
            emit(rec.check, rec.module, rec.operation, rec.status, "", rec.detail)
    return "\n".join(lines) + "\n"
