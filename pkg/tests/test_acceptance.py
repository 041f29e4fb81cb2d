"""The ten primary acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line (collected again in the session summary)
and then asserts.
"""

import math
import subprocess
import sys

import numpy as np

from nkgeom import jets
from nkgeom.conformal_einstein import (
    case1_split,
    case2_obstruction,
    conformal_ricci,
    einstein_check,
    obata_residual,
    system_sy_residual,
)
from nkgeom.fixtures import get_fixture, octonion_s6_structure
from nkgeom.gray_hervella import classify_type, conformal_transform, gh_decompose
from nkgeom.metric_builders import (
    ambient_coordinate,
    angular_grid,
    angular_sphere,
    conformal_rescale,
    euclidean,
    round_sphere,
    sample_points,
    scale_metric,
)
from nkgeom.special_holonomy import (
    cone_product_isometry,
    conformal_cylinder_residual,
    cylinder_w1w4,
    g2_check,
    g2_from_su3,
    kahler_cone,
    nk_from_g2,
    round_s5_sasaki,
    se_verify,
    su3_check,
    vaisman_cylinder,
)
from nkgeom.suites import sweep_case1_family
from nkgeom.tensor_core import ScalarField, curvature, curvature_symmetry_residuals

from conftest import random_conformal_factor, record_criterion

BALL5 = [(-1.0, 1.0)] * 5
BALL6 = [(-1.0, 1.0)] * 6
CYL = BALL5 + [(-1.5, 1.5)]


def test_criterion_01_curvature_core():
    ric = sym = 0.0
    for n in range(2, 7):
        g = round_sphere(n)
        for p in sample_points([(-1.0, 1.0)] * n, 100, seed=n):
            pk = curvature(g, p)
            ric = max(ric, float(np.max(np.abs(pk.ricci - (n - 1) * pk.g))))
            sym = max(sym, max(curvature_symmetry_residuals(pk).values()))
    ok = ric <= 1e-7 and sym <= 1e-9
    record_criterion(1, "round spheres n=2..6", ok, f"|Ric-(n-1)g|={ric:.2e} symmetries={sym:.2e}")
    assert ok


def test_criterion_02_conformal_ricci_two_paths():
    worst = 0.0
    for name in ("euclidean_3", "cylinder_s5", "round_sphere_6"):
        e = get_fixture(name)
        pts = e.points(100, seed=5)
        for seed in range(5):
            f = random_conformal_factor(e.metric.dim, 100 + seed)
            h = conformal_rescale(e.metric, f)
            for p in pts:
                diff = conformal_ricci(e.metric, f, p) - curvature(h, p).ricci
                worst = max(worst, float(np.max(np.abs(diff))))
    ok = worst <= 1e-6
    record_criterion(2, "conformal Ricci closed form vs direct (3 fixtures x 5 factors x 100 points)",
                     ok, f"max diff={worst:.2e}")
    assert ok


def test_criterion_03_case1_end_to_end():
    e = get_fixture("case1_cylinder")
    pts = e.points(100, seed=3)
    rep = einstein_check(e.metric, pts)
    prof, base = e.data["profile"], e.data["base"]
    split = case1_split(prof, base)
    sy = [system_sy_residual(split, base, 5.0, p[:5], p[5]) for p in pts]
    s_res = max(abs(r.scalar) for r in sy)
    m_res = max(r.matrix_norm for r in sy)
    ode = prof.ode_residual(pts[:, 5])
    ok = abs(rep.lambda_fit - 5.0) <= 1e-6 and rep.max_residual <= 1e-6 and max(s_res, m_res) <= 1e-7 and ode <= 1e-12
    record_criterion(3, "case 1 cylinder", ok,
                     f"lambda={rep.lambda_fit:.12f} einstein={rep.max_residual:.2e} "
                     f"sy=({s_res:.2e},{m_res:.2e}) ode={ode:.2e}")
    assert ok


def test_criterion_04_isometries():
    pts = sample_points(CYL, 200, seed=4)
    si = 0.0
    for beta, gamma in ((1.0, 0.0), (2.0, 0.3)):
        base = scale_metric(round_sphere(5), 1.0 / beta)
        alpha = math.sqrt(5 * beta**2 / 5.0)
        si = max(si, conformal_cylinder_residual(base, alpha, beta, gamma, pts))
    box = lambda n, m: [(-1.0, 1.0)] * n + [(0.0, 2 * math.pi)] * m + [(0.1, 1.47), (0.5, 2.0)]  # noqa: E731
    cp_point = cone_product_isometry(round_sphere(5), None, sample_points(box(5, 0), 200, 1))
    cp_circle = cone_product_isometry(euclidean(1), euclidean(1), sample_points(box(1, 1), 200, 2))
    ok = si <= 1e-9 and max(cp_point, cp_circle) <= 1e-9
    record_criterion(4, "cylinder/sine-cone and cone-product isometries", ok,
                     f"sine-cone={si:.2e} cone-product(point)={cp_point:.2e} (circles)={cp_circle:.2e}")
    assert ok


def test_criterion_05_case2_and_case3():
    g = angular_sphere(5)
    q = case2_obstruction(g, ambient_coordinate(g), 5.0, 5, angular_grid(5, 12))
    rel = abs(q.value - 10 * math.pi**3) / (10 * math.pi**3)
    S5 = round_sphere(5)
    b = ambient_coordinate(S5)
    pts = sample_points(BALL5, 50, seed=5)
    h, e = obata_residual(b, S5, 1.0, pts)
    hc, _ = obata_residual(ScalarField(5, lambda x: b(x) ** 2), S5, 1.0, pts)
    lap_res = 0.0
    from nkgeom.conformal_einstein import laplacian_of

    for p in pts:
        lap_res = max(lap_res, abs(laplacian_of(b, S5, p) - 5.0 * float(b.value(p))))
    ok = q.value > 0 and rel <= 0.01 and max(h, lap_res) <= 1e-7 and e <= 1e-7 and hc > 0.5
    record_criterion(5, "case 2 integral and case 3 Obata identities", ok,
                     f"integral={q.value:.4f} (rel err {rel:.2e}) hessian={h:.2e} laplacian={lap_res:.2e} "
                     f"control={hc:.2f}")
    assert ok


def test_criterion_06_gray_hervella():
    pts6 = sample_points(BALL6, 20, seed=6)
    flat = get_fixture("flat_c3_kahler").structure
    oct_ = octonion_s6_structure()
    t_flat = classify_type(flat, pts6)
    t_oct = classify_type(oct_, pts6)
    nabla = max(abs(gh_decompose(oct_, p).nabla_norm_sq - 24.0) for p in pts6)
    ric = 0.0
    for p in pts6:
        pk = curvature(oct_.metric, p)
        ric = max(ric, float(np.max(np.abs(pk.ricci - 5.0 * pk.g))))
    f = ScalarField(6, lambda x: x[..., 0] + 0.2 * jets.sin(x[..., 3]))
    conf = conformal_transform(flat, f)
    t_conf = classify_type(conf, pts6)
    lee = 0.0
    orth = 0.0
    for s in (flat, oct_, conf):
        for p in pts6:
            c = gh_decompose(s, p)
            orth = max(orth, c.orthogonality_residual)
            if s is conf:
                lee = max(lee, float(np.max(np.abs(c.lee - f.jet(p).grad))))
    ok = (t_flat == () and t_oct == ("W1",) and nabla <= 1e-4 and ric <= 1e-7
          and t_conf == ("W4",) and lee <= 1e-8 and orth <= 1e-6)
    record_criterion(6, "Gray-Hervella classification", ok,
                     f"flat={list(t_flat)} S6={list(t_oct)} |nablaOmega|^2-24={nabla:.2e} Ric-5g={ric:.2e} "
                     f"conformal={list(t_conf)} theta-df={lee:.2e} orthogonality={orth:.2e}")
    assert ok


def test_criterion_07_cone_chain():
    s = round_s5_sasaki()
    se = se_verify(s, sample_points(BALL5, 50, seed=7))
    cone = kahler_cone(s)
    su3 = su3_check(cone, sample_points(BALL5 + [(0.5, 2.0)], 30, seed=7))
    g2 = g2_from_su3(cone)
    g2r = g2_check(g2, sample_points(BALL5 + [(0.5, 2.0), (-1.5, 1.5)], 30, seed=7))
    nk = nk_from_g2(g2, s.base)
    pts = sample_points(BALL5 + [(0.3, math.pi - 0.3)], 20, seed=7)
    t = classify_type(nk, pts)
    rep = einstein_check(nk.metric, pts)
    se_max = max(se.residuals.values())
    su3_max = max(su3.residuals[k] for k in ("d_omega", "d_psi_re", "d_psi_im", "ricci"))
    g2_max = max(g2r.residuals["d_phi"], g2r.residuals["d_star_phi"])
    ok = (se_max <= 1e-7 and su3_max <= 1e-6 and g2_max <= 1e-6 and t == ("W1",)
          and abs(rep.lambda_fit - 5.0) <= 1e-5 and rep.max_residual <= 1e-5)
    record_criterion(7, "Sasaki -> Kaehler cone -> G2 -> nearly Kaehler", ok,
                     f"sasaki={se_max:.2e} cone={su3_max:.2e} g2={g2_max:.2e} type={list(t)} "
                     f"lambda={rep.lambda_fit:.9f}")
    assert ok


def test_criterion_08_cylinder_structures():
    s = round_s5_sasaki()
    pts = sample_points(CYL, 20, seed=8)
    w = cylinder_w1w4(s, 1.0, 0.0)
    t_w = classify_type(w, pts)
    dlee = lee_err = 0.0
    for p in pts:
        c = gh_decompose(w, p)
        dlee = max(dlee, c.dlee_norm)
        target = np.zeros(6)
        target[5] = math.tanh(p[5])  # d ln cosh t, coefficient one
        lee_err = max(lee_err, float(np.max(np.abs(c.lee - target))))
    v = vaisman_cylinder(s)
    t_v = classify_type(v, pts)
    nabla = nij = 0.0
    for p in pts:
        c = gh_decompose(v, p)
        nabla = max(nabla, c.nabla_lee_norm)
        nij = max(nij, float(np.max(np.abs(c.n1 + c.n2))))
    ok = (t_w == ("W1", "W4") and dlee <= 1e-6 and lee_err <= 1e-8
          and t_v == ("W4",) and nabla <= 1e-6 and nij <= 1e-8)
    record_criterion(8, "W1+W4 and Vaisman cylinders over S5", ok,
                     f"w1w4={list(t_w)} dtheta={dlee:.2e} theta-dln(cosh t)={lee_err:.2e} "
                     f"vaisman={list(t_v)} nabla theta={nabla:.2e} N={nij:.2e}")
    assert ok


def test_criterion_09_negative_controls():
    sq = get_fixture("squashed_s5")
    r1 = einstein_check(sq.metric, sq.points(20, seed=9)).max_residual
    sc = get_fixture("squashed_s5_sine_cone")
    r2 = einstein_check(sc.metric, sc.points(20, seed=9)).max_residual
    row = sweep_case1_family("round_sphere_5", [1.0], [0.0], [5.0], samples=20, seed=9, base_scale=4.0)[0]
    ok = r1 > 0.05 and r2 > 0.05 and row[4] > 0.01
    record_criterion(9, "negative controls", ok,
                     f"squashed={r1:.3g} squashed sine-cone={r2:.3g} mismatched sweep={row[4]:.3g}")
    assert ok


def test_criterion_10_determinism(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"report{k}.json"
        cmd = [sys.executable, "-m", "nkgeom", "report", "--format", "json", "--out", str(path),
               "--seed", "11", "--samples", "10",
               "--run", "curvature-core:round_sphere_5", "--run", "theorem1:case1_cylinder",
               "--run", "gh-classify:s6_octonion_nk"]
        subprocess.run(cmd, check=True, capture_output=True)
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    record_criterion(10, "byte-identical reports under a fixed seed", ok, f"{len(outs[0])} bytes, identical={ok}")
    assert ok
