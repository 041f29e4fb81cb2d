"""Verification suites over fixtures and the JSON/CSV report format."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .conformal_einstein import (
    case1_solution,
    case1_split,
    conformal_ricci,
    einstein_check,
    mixed_ricci_residual,
    system_sy_residual,
)
from .errors import GeometryError
from .fixtures import CONE_R, CYL_T, FixtureEntry, get_fixture
from .gray_hervella import CLASSES, classify_type, gh_decompose
from .metric_builders import (
    conformal_rescale,
    product_cylinder,
    sample_points,
    scale_metric,
)
from .special_holonomy import (
    conformal_cylinder_residual,
    cone_product_isometry,
    cylinder_w1w4,
    g2_check,
    g2_from_su3,
    kahler_cone,
    nk_from_g2,
    se_verify,
    su3_check,
    vaisman_cylinder,
)
from .tensor_core import curvature, curvature_symmetry_residuals


class UsageError(ValueError):
    """A suite cannot be applied to the requested fixture."""


@dataclass
class Check:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)


@dataclass
class SuiteResult:
    suite: str
    fixture: str
    checks: list
    info: dict = field(default_factory=dict)
    tolerance_override: Optional[float] = None
    wall_time_ms: int = 0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "suite": self.suite,
            "fixture": self.fixture,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "max_residual": c.max_residual, "tolerance": c.tolerance,
                 "passed": c.passed}
                for c in self.checks
            ],
            "info": self.info,
            "tolerance_override": self.tolerance_override,
            "wall_time_ms": self.wall_time_ms,
        }


class _Checks:
    """Collects checks; a stage that raises becomes an infinite residual."""

    def __init__(self):
        self.items = []

    def add(self, name, residual, tol):
        self.items.append(Check(name, float(residual), float(tol)))

    def guard(self, name, tol, fn: Callable[[], float]):
        try:
            self.add(name, fn(), tol)
        except GeometryError:
            self.add(name, math.inf, tol)


def _maxabs(a):
    return float(np.max(np.abs(a), initial=0.0))


def _type_mismatch(found, expected):
    return len(set(found) ^ set(expected))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_curvature_core(entry: FixtureEntry, pts, seed):
    ch = _Checks()
    g = entry.metric
    sym = anti = bianchi = ein = 0.0
    lam = entry.expected.get("einstein")
    scal = []
    for p in pts:
        G = g.value(p)
        sym = max(sym, _maxabs(G - G.T))
        if np.linalg.eigvalsh(0.5 * (G + G.T))[0] <= 0:
            sym = math.inf
        pk = curvature(g, p)
        r = curvature_symmetry_residuals(pk)
        anti = max(anti, r["antisym_12"], r["antisym_34"], r["pair_sym"], r["ricci_sym"])
        bianchi = max(bianchi, r["bianchi"])
        scal.append(pk.scalar)
        if lam is not None:
            ein = max(ein, _maxabs(pk.ricci - lam * pk.g))
    ch.add("metric_invariants", sym, 1e-12)
    ch.add("riemann_symmetries", anti, 1e-9)
    ch.add("first_bianchi", bianchi, 1e-9)
    if lam is not None:
        ch.add("ricci_equals_lambda_g", ein, 1e-7)
    return ch.items, {"scalar_mean": float(np.mean(scal))}


def suite_conformal_cylinder(entry: FixtureEntry, pts, seed):
    ch = _Checks()
    rep = einstein_check(entry.metric, pts, tol=1e-6)
    ch.add("einstein_check", rep.max_residual, 1e-6)
    lam = entry.expected.get("einstein")
    if lam is not None:
        ch.add("lambda", abs(rep.lambda_fit - lam), 1e-6)
    info = {"lambda_fit": rep.lambda_fit}
    data = entry.data
    if "profile" in data:
        prof, base, cyl, f, r = data["profile"], data["base"], data["cylinder"], data["f"], data["r"]
        ts = pts[:, -1]
        ch.add("ode_residual", prof.ode_residual(ts), 1e-12)
        split = case1_split(prof, base)
        res = [system_sy_residual(split, base, r, p[:-1], p[-1]) for p in pts]
        ch.add("system_sy_scalar", max(abs(x.scalar) for x in res), 1e-7)
        ch.add("system_sy_matrix", max(x.matrix_norm for x in res), 1e-7)
        ch.add("mixed_ricci", max(_maxabs(mixed_ricci_residual(f, p)) for p in pts), 1e-9)
        rescaled = conformal_rescale(cyl, f)
        two = max(_maxabs(conformal_ricci(cyl, f, p) - curvature(rescaled, p).ricci) for p in pts)
        ch.add("conformal_ricci_two_path", two, 1e-6)
        si = conformal_cylinder_residual(base, math.sqrt(prof.alpha_sq), prof.beta, prof.gamma, pts)
        ch.add("sine_cone_isometry", si, 1e-9)
        info["alpha_sq"] = prof.alpha_sq
    return ch.items, info


def _require(entry, attr, suite):
    if getattr(entry, attr) is None:
        raise UsageError(f"suite {suite!r} needs a fixture carrying a {attr} (got {entry.name!r})")


def suite_gh_classify(entry: FixtureEntry, pts, seed):
    _require(entry, "structure", "gh-classify")
    ch = _Checks()
    s = entry.structure
    inv = max(max(s.invariant_residuals(p)) for p in pts)
    ch.add("structure_invariants", inv, 1e-9)
    if inv > 1e-9:
        return ch.items, {}
    comps = [gh_decompose(s, p) for p in pts]
    norms = np.max([c.norms for c in comps], axis=0)
    found = [c for c, w in zip(CLASSES, norms) if w > 1e-6]
    ch.add("orthogonality", max(c.orthogonality_residual for c in comps), 1e-6)
    ch.add("n1_skew", max(_maxabs(c.n1 + np.swapaxes(c.n1, 1, 2)) for c in comps), 1e-9)
    ch.add(
        "n2_cyclic",
        max(_maxabs(c.n2 + np.einsum("bza->abz", c.n2) + np.einsum("zab->abz", c.n2)) for c in comps),
        1e-9,
    )
    exp_type = entry.expected.get("gh_type")
    if exp_type is not None:
        ch.add("gh_type", _type_mismatch(found, exp_type), 0)
    target = entry.expected.get("nabla_omega_sq")
    if target is not None:
        ch.add("nabla_omega_sq", max(abs(c.nabla_norm_sq - target) for c in comps), 1e-4)
    lam = entry.expected.get("einstein")
    if lam is not None:
        ein = max(_maxabs(curvature(s.metric, p).ricci - lam * curvature(s.metric, p).g) for p in pts)
        ch.add("ricci_equals_lambda_g", ein, 1e-7)
    info = {"gh_type": found, "max_norms": {c: float(w) for c, w in zip(CLASSES, norms)}}
    return ch.items, info


def suite_cone_chain(entry: FixtureEntry, pts, seed):
    _require(entry, "sasaki", "cone-chain")
    ch = _Checks()
    s = entry.sasaki
    se = se_verify(s, pts, tol=1e-7)
    for k, v in se.residuals.items():
        ch.add(f"sasaki_{k}", v, 1e-6 if k in ("algebra", "volume") else 1e-7)
    cone = kahler_cone(s, verify=False)
    cpts = np.column_stack([pts, sample_points([CONE_R], len(pts), seed + 1)])
    su3 = su3_check(cone, cpts)
    for k, v in su3.residuals.items():
        ch.add(f"cone_{k}", v, 1e-6)
    g2 = g2_from_su3(cone)
    gpts = np.column_stack([cpts, sample_points([CYL_T], len(pts), seed + 2)])
    for k, v in g2_check(g2, gpts).residuals.items():
        ch.add(f"g2_{k}", v, 1e-6)
    ppts = np.column_stack([pts, sample_points([(0.1, np.pi / 2 - 0.1), CONE_R], len(pts), seed + 3)])
    ch.add("cone_product_isometry", cone_product_isometry(s.base, None, ppts), 1e-9)
    info = {}
    nk = nk_from_g2(g2, s.base)
    spts = np.column_stack([pts, sample_points([(0.3, np.pi - 0.3)], len(pts), seed + 4)])
    try:
        found = classify_type(nk, spts)
        ch.add("nk_gh_type", _type_mismatch(found, ["W1"]), 0)
        info["nk_gh_type"] = list(found)
    except GeometryError:
        ch.add("nk_gh_type", math.inf, 0)
    rep = einstein_check(nk.metric, spts, tol=1e-5)
    ch.add("nk_einstein", rep.max_residual, 1e-5)
    ch.add("nk_lambda", abs(rep.lambda_fit - 5.0), 1e-5)
    info["nk_lambda_fit"] = rep.lambda_fit
    return ch.items, info


def suite_cylinder_structures(entry: FixtureEntry, pts, seed):
    _require(entry, "sasaki", "theorem4")
    ch = _Checks()
    s = entry.sasaki
    base_pts = pts[:, : s.base.dim]
    cpts = np.column_stack([base_pts, sample_points([CYL_T], len(pts), seed + 1)])
    info = {}
    w = cylinder_w1w4(s, 1.0, 0.0, nk=nk_from_g2(g2_from_su3(kahler_cone(s, verify=False)), s.base))
    try:
        comps = [gh_decompose(w, p) for p in cpts]
        norms = np.max([c.norms for c in comps], axis=0)
        found = [c for c, x in zip(CLASSES, norms) if x > 1e-6]
        info["w1w4_gh_type"] = found
        ch.add("w1w4_gh_type", _type_mismatch(found, ["W1", "W4"]), 0)
        ch.add("w1w4_w2_w3", max(norms[1], norms[2]), 1e-6)
        ch.add("w1w4_orthogonality", max(c.orthogonality_residual for c in comps), 1e-6)
        ch.add("w1w4_dlee", max(c.dlee_norm for c in comps), 1e-6)
        lee_err = 0.0
        for c, p in zip(comps, cpts):
            target = np.zeros_like(c.lee)
            target[-1] = math.tanh(p[-1])
            lee_err = max(lee_err, _maxabs(c.lee - target))
        ch.add("w1w4_lee_exact", lee_err, 1e-8)
    except GeometryError:
        ch.add("w1w4_gh_type", math.inf, 0)
    v = vaisman_cylinder(s, kahler_cone(s, verify=False))
    try:
        comps = [gh_decompose(v, p) for p in cpts]
        norms = np.max([c.norms for c in comps], axis=0)
        found = [c for c, x in zip(CLASSES, norms) if x > 1e-6]
        info["vaisman_gh_type"] = found
        ch.add("vaisman_gh_type", _type_mismatch(found, ["W4"]), 0)
        ch.add("vaisman_nabla_lee", max(c.nabla_lee_norm for c in comps), 1e-6)
        ch.add("vaisman_dlee", max(c.dlee_norm for c in comps), 1e-7)
        ch.add("vaisman_nijenhuis", max(_maxabs(c.n1) + _maxabs(c.n2) for c in comps), 1e-8)
    except GeometryError:
        ch.add("vaisman_gh_type", math.inf, 0)
    for beta, gamma in ((1.0, 0.0), (2.0, 0.3)):
        ch.add(f"sine_cone_isometry(beta={beta:g},gamma={gamma:g})",
               conformal_cylinder_residual(s.base, 1.0, beta, gamma, cpts), 1e-9)
    return ch.items, info


SUITES = {
    "curvature-core": suite_curvature_core,
    "theorem1": suite_conformal_cylinder,
    "gh-classify": suite_gh_classify,
    "cone-chain": suite_cone_chain,
    "theorem4": suite_cylinder_structures,
}

SUITE_HELP = {
    "curvature-core": "metric invariants, Riemann symmetries, Bianchi, Ric = lambda g when expected",
    "theorem1": "Einstein check; for case1_cylinder also the ODE, reduced system, mixed Ricci, two-path and sine-cone isometry",
    "gh-classify": "four-part splitting of nabla Omega, Nijenhuis split and type against expectations",
    "cone-chain": "Sasaki structure equations, Kaehler cone, G2 cylinder and nearly Kaehler sine-cone",
    "theorem4": "W1+W4 and Vaisman structures on the cylinder over a Sasaki-Einstein base",
}


def run_suite(suite: str, fixture: str, samples=20, seed=0, tol=None, timing=False) -> SuiteResult:
    """Run one suite on one fixture; unknown names raise ``UsageError``/``KeyError``."""
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; known: {', '.join(SUITES)}")
    if samples < 10:
        raise UsageError("at least 10 samples are required")
    entry = get_fixture(fixture)
    pts = entry.points(samples, seed)
    start = time.perf_counter()
    checks, info = SUITES[suite](entry, pts, seed)
    if tol is not None:
        checks = [Check(c.name, c.max_residual, tol) for c in checks]
    ms = int(round(1000 * (time.perf_counter() - start))) if timing else 0
    return SuiteResult(suite, fixture, checks, info, tol, ms)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


SWEEP_HEADER = ("beta", "gamma", "r", "lambda_fit", "max_residual")


def sweep_case1_family(fixture, betas, gammas, rs, samples=20, seed=0, base_scale=None):
    """Case-1 rescaled cylinders over a scaled Einstein base.

    The base metric is multiplied by ``base_scale``; by default the factor
    that makes ``Ric = (n-1) beta^2 g``.
    """
    entry = get_fixture(fixture)
    lam0 = entry.expected.get("einstein")
    if lam0 is None or lam0 <= 0:
        raise UsageError(f"sweep needs a positive Einstein base fixture (got {fixture!r})")
    betas, gammas, rs = list(betas), list(gammas), list(rs)
    if not (betas and gammas and rs):
        raise UsageError("empty sweep grid")
    if any(b == 0 for b in betas) or any(r <= 0 for r in rs):
        raise UsageError("sweep needs beta != 0 and r > 0")
    g = entry.metric
    n = g.dim
    rows = []
    for beta in betas:
        c = base_scale if base_scale is not None else lam0 / ((n - 1) * beta**2)
        base = scale_metric(g, math.sqrt(c))
        cyl = product_cylinder(base)
        for gamma in gammas:
            for r in rs:
                _, f = case1_solution(r, n, beta, gamma)
                box = entry.sample_box + [CYL_T]
                pts = sample_points(box, samples, seed)
                rep = einstein_check(conformal_rescale(cyl, f), pts)
                rows.append((float(beta), float(gamma), float(r), rep.lambda_fit, rep.max_residual))
    return rows


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _clean(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def report_json(results, seed) -> str:
    doc = {"version": __version__, "seed": int(seed), "suites": [r.to_dict() for r in results]}
    return json.dumps(_clean(doc), indent=2) + "\n"


def report_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "fixture", "check", "max_residual", "tolerance", "passed"])
    for r in results:
        for c in r.checks:
            w.writerow([r.suite, r.fixture, c.name, f"{c.max_residual:.12g}", f"{c.tolerance:.12g}",
                        int(c.passed)])
    return buf.getvalue()


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([f"{v:.12g}" for v in row])
    return buf.getvalue()
