import numpy as np
import pytest

from hypdecay.cli import load_bundled_system
from hypdecay.structure import SystemDef


@pytest.fixture(scope="session")
def damped_wave():
    return load_bundled_system("damped_wave")


@pytest.fixture(scope="session")
def goldstein_kac():
    return load_bundled_system("goldstein_kac")


@pytest.fixture(scope="session")
def nonsymmetric():
    return load_bundled_system("nonsymmetric")


@pytest.fixture(scope="session")
def multibranch():
    """3x3 system with a 2-dimensional kernel and distinct reduced speeds."""
    a = [[1.0, 0.0, 1.0], [0.0, -1.0, 1.0], [1.0, 1.0, 0.0]]
    b = np.diag([0.0, 0.0, 1.0])
    return SystemDef(name="multibranch", A=a, B=b)


@pytest.fixture(scope="session")
def equal_speeds():
    """4x4 system whose two kernel speeds coincide: C holds, C' fails."""
    return SystemDef(name="equal_speeds", A=np.eye(4), B=np.diag([0.0, 0.0, 1.0, 1.0]))


def planted_zero_system(rng, n=None, m=None, max_cond=50.0):
    """Random matrix with a planted semi-simple zero eigenvalue.

    Returns (matrix, m, P_true, S_true, cond(V)).
    """
    if n is None:
        n = int(rng.integers(2, 7))
    if m is None:
        m = int(rng.integers(1, n + 1))
    while True:
        v = rng.standard_normal((n, n))
        cond = float(np.linalg.cond(v))
        if cond <= max_cond:
            break
    lam = rng.uniform(0.5, 3.0, size=n - m) * rng.choice([-1.0, 1.0], size=n - m)
    vals = np.concatenate([np.zeros(m), lam])
    vinv = np.linalg.inv(v)
    a = v @ np.diag(vals) @ vinv
    p_true = v @ np.diag(np.concatenate([np.ones(m), np.zeros(n - m)])) @ vinv
    s_vals = np.concatenate([np.zeros(m), 1.0 / lam])
    s_true = v @ np.diag(s_vals) @ vinv
    return a, m, p_true, s_true, cond
