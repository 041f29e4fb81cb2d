"""Named fixtures: metrics with optional structures, sample boxes and expectations.

Sample boxes keep a margin from every singular locus: stereographic charts
use ``[-1, 1]`` per axis, cylinders ``t in [-1.5, 1.5]``, cones
``r in [0.5, 2]`` and sine-cones ``s in [0.3, pi - 0.3]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import jets
from .conformal_einstein import case1_solution
from .errors import UnknownFixtureError
from .gray_hervella import AlmostHermitianField, structure_from_form
from .metric_builders import (
    angular_sphere,
    conformal_rescale,
    euclidean,
    product_cylinder,
    round_sphere,
    sample_points,
    sine_cone_metric,
)
from .octonions import phi0
from .special_holonomy import (
    cone_complex_structure,
    cylinder_w1w4,
    g2_from_su3,
    kahler_cone,
    nk_from_g2,
    round_s5_sasaki,
    squashed_s5,
    squashed_s5_sasaki,
    vaisman_cylinder,
)
from .tensor_core import MetricField

STEREO = (-1.0, 1.0)
CYL_T = (-1.5, 1.5)
CONE_R = (0.5, 2.0)
SINE_S = (0.3, np.pi - 0.3)


@dataclass
class FixtureEntry:
    name: str
    metric: MetricField
    sample_box: list
    expected: dict = field(default_factory=dict)
    structure: Optional[AlmostHermitianField] = None
    sasaki: object = None
    data: dict = field(default_factory=dict)
    description: str = ""

    def points(self, count, seed=0):
        return sample_points(self.sample_box, count, seed)


def _flat_c3() -> FixtureEntry:
    J0 = np.zeros((6, 6))
    for k in range(3):
        J0[2 * k + 1, 2 * k] = 1.0
        J0[2 * k, 2 * k + 1] = -1.0
    g = euclidean(6)

    def J(x):
        return jets.const_like(np.broadcast_to(J0, x.shape[:-1] + (6, 6)), x)

    return FixtureEntry(
        "flat_c3_kahler", g, [STEREO] * 6,
        {"einstein": 0.0, "gh_type": []},
        structure=AlmostHermitianField(g, J, name="flat_c3_kahler"),
        description="flat C^3 with its constant complex structure",
    )


def octonion_s6_structure() -> AlmostHermitianField:
    """``Omega(u, v) = phi0(X, u, v)`` pulled into the stereographic chart of S^6."""
    g = round_sphere(6)
    emb = g.embedding
    P = phi0()

    def omega(x):
        X = emb(x)
        D = emb.jacobian(x)
        return jets.einsum("abc,...a,...bi,...cj->...ij", P, X, D, D)

    return structure_from_form(g, omega, name="s6_octonion_nk")


def _s6_octonion() -> FixtureEntry:
    s = octonion_s6_structure()
    return FixtureEntry(
        "s6_octonion_nk", s.metric, [STEREO] * 6,
        {"einstein": 5.0, "gh_type": ["W1"], "nabla_omega_sq": 24.0},
        structure=s,
        description="round S^6 with the octonionic almost complex structure",
    )


def _s5_sasaki() -> FixtureEntry:
    s = round_s5_sasaki()
    return FixtureEntry(
        "s5_sasaki", s.base, [STEREO] * 5,
        {"einstein": 4.0, "sasaki_einstein": True},
        sasaki=s,
        description="round S^5 with the Hopf contact form and transverse SU(2)-structure",
    )


def _squashed() -> FixtureEntry:
    return FixtureEntry(
        "squashed_s5", squashed_s5(), [STEREO] * 5,
        {"einstein": None, "sasaki_einstein": False},
        sasaki=squashed_s5_sasaki(),
        description="S^5 with the Hopf fibre stretched by 2 (g + 3 eta^2), not Einstein",
    )


def _squashed_sine_cone() -> FixtureEntry:
    return FixtureEntry(
        "squashed_s5_sine_cone", sine_cone_metric(squashed_s5()), [STEREO] * 5 + [SINE_S],
        {"einstein": None},
        description="sine-cone over the squashed S^5, not Einstein",
    )


def _case1() -> FixtureEntry:
    S5 = round_sphere(5)
    cyl = product_cylinder(S5)
    profile, f = case1_solution(5.0, 5, 1.0, 0.0)
    return FixtureEntry(
        "case1_cylinder", conformal_rescale(cyl, f), [STEREO] * 5 + [CYL_T],
        {"einstein": 5.0},
        data={"base": S5, "cylinder": cyl, "profile": profile, "f": f, "r": 5.0},
        description="cosh^-2 t (g_S5 + dt^2)",
    )


def _cylinder_s5() -> FixtureEntry:
    return FixtureEntry(
        "cylinder_s5", product_cylinder(round_sphere(5)), [STEREO] * 5 + [CYL_T],
        {"einstein": None, "scalar": 20.0},
        description="Riemannian cylinder over the unit S^5",
    )


def _sine_cone_nk() -> FixtureEntry:
    s = round_s5_sasaki()
    nk = nk_from_g2(g2_from_su3(kahler_cone(s)), s.base)
    return FixtureEntry(
        "s6_sine_cone_nk", nk.metric, [STEREO] * 5 + [SINE_S],
        {"einstein": 5.0, "gh_type": ["W1"], "nabla_omega_sq": 24.0},
        structure=nk,
        description="sine-cone over S^5 with the nearly Kaehler structure induced by the G2 form",
    )


def _kahler_cone() -> FixtureEntry:
    c = kahler_cone(round_s5_sasaki())
    return FixtureEntry(
        "s5_kahler_cone", c.cone_metric, [STEREO] * 5 + [CONE_R],
        {"einstein": 0.0, "gh_type": []},
        structure=cone_complex_structure(c),
        description="Kaehler cone over the round S^5 (flat C^3 minus the origin)",
    )


def _w1w4() -> FixtureEntry:
    s = round_s5_sasaki()
    st = cylinder_w1w4(s, 1.0, 0.0)
    return FixtureEntry(
        "cylinder_w1w4_s5", st.metric, [STEREO] * 5 + [CYL_T],
        {"gh_type": ["W1", "W4"], "lee": "d ln cosh t"},
        structure=st, sasaki=s,
        description="cylinder over S^5 with the W1+W4 structure from the sine-cone",
    )


def _vaisman() -> FixtureEntry:
    s = round_s5_sasaki()
    st = vaisman_cylinder(s)
    return FixtureEntry(
        "cylinder_vaisman_s5", st.metric, [STEREO] * 5 + [CYL_T],
        {"gh_type": ["W4"], "lee": "-dt"},
        structure=st, sasaki=s,
        description="cylinder over S^5 with the Vaisman structure from the Kaehler cone",
    )


def _euclidean(n) -> FixtureEntry:
    return FixtureEntry(
        f"euclidean_{n}", euclidean(n), [STEREO] * n, {"einstein": 0.0},
        description=f"flat R^{n}",
    )


def _sphere(n) -> FixtureEntry:
    return FixtureEntry(
        f"round_sphere_{n}", round_sphere(n), [STEREO] * n, {"einstein": float(n - 1)},
        description=f"unit S^{n}, stereographic chart",
    )


def _angular(n) -> FixtureEntry:
    box = [SINE_S] * (n - 1) + [(0.0, 2.0 * np.pi)]
    return FixtureEntry(
        f"angular_sphere_{n}", angular_sphere(n), box, {"einstein": float(n - 1)},
        description=f"unit S^{n}, iterated angular chart",
    )


_BUILDERS: dict[str, Callable[[], FixtureEntry]] = {}
for _n in range(2, 8):
    _BUILDERS[f"euclidean_{_n}"] = (lambda n: lambda: _euclidean(n))(_n)
for _n in range(2, 7):
    _BUILDERS[f"round_sphere_{_n}"] = (lambda n: lambda: _sphere(n))(_n)
for _n in (2, 5):
    _BUILDERS[f"angular_sphere_{_n}"] = (lambda n: lambda: _angular(n))(_n)
_BUILDERS.update(
    {
        "cylinder_s5": _cylinder_s5,
        "flat_c3_kahler": _flat_c3,
        "s6_octonion_nk": _s6_octonion,
        "s5_sasaki": _s5_sasaki,
        "squashed_s5": _squashed,
        "squashed_s5_sine_cone": _squashed_sine_cone,
        "case1_cylinder": _case1,
        "s6_sine_cone_nk": _sine_cone_nk,
        "s5_kahler_cone": _kahler_cone,
        "cylinder_w1w4_s5": _w1w4,
        "cylinder_vaisman_s5": _vaisman,
    }
)


def fixture_names():
    return list(_BUILDERS)


@lru_cache(maxsize=None)
def get_fixture(name: str) -> FixtureEntry:
    """Look up a fixture by name; ``euclidean_<n>`` works for any ``n >= 1``."""
    if name in _BUILDERS:
        return _BUILDERS[name]()
    m = re.fullmatch(r"euclidean_(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return _euclidean(int(m.group(1)))
    raise UnknownFixtureError(f"unknown fixture {name!r}")


def fixture_registry():
    return [get_fixture(n) for n in _BUILDERS]
