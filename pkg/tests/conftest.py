import numpy as np
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def fd_grad(f, p, h=1e-5):
    """Central-difference gradient of a scalar or array valued function."""
    p = np.asarray(p, dtype=float)
    cols = []
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        cols.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_hess(f, p, h=1e-4):
    """Central-difference Hessian (last two axes) of a scalar or array valued function."""
    p = np.asarray(p, dtype=float)
    d = p.size
    f0 = np.asarray(f(p))
    H = np.zeros(f0.shape + (d, d))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = h
            ej[j] = h
            H[..., i, j] = (
                np.asarray(f(p + ei + ej)) - np.asarray(f(p + ei - ej))
                - np.asarray(f(p - ei + ej)) + np.asarray(f(p - ei - ej))
            ) / (4 * h * h)
    return H


def random_conformal_factor(dim, seed):
    """Seeded smooth bounded function: a few random plane waves plus a quadratic."""
    from nkgeom import jets
    from nkgeom.tensor_core import ScalarField

    rng = np.random.default_rng(seed)
    K = rng.normal(scale=0.8, size=(3, dim))
    phase = rng.uniform(0, 2 * np.pi, size=3)
    amp = rng.uniform(0.05, 0.3, size=3)
    Q = rng.normal(scale=0.05, size=(dim, dim))
    Q = Q + Q.T

    def fn(x):
        out = 0.0
        for k in range(3):
            out = out + amp[k] * jets.sin(jets.einsum("i,...i->...", K[k], x) + phase[k])
        return out + jets.einsum("ij,...i,...j->...", Q, x, x)

    return ScalarField(dim, fn, name=f"wave{seed}")


ACCEPTANCE = {}


def record_criterion(number, title, ok, detail):
    """Store one acceptance line; printed at the end of the session."""
    ACCEPTANCE[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(ACCEPTANCE[number])
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
