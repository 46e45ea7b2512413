import pathlib
import sys

import numpy as np

SRC = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from medli import validate_ensemble, validate_projective  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parent / "fixtures"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"


def pure_pair(theta, priors=(0.5, 0.5)):
    """Real qubit pair |0> and cos(theta)|0> + sin(theta)|1> (overlap cos theta)."""
    psi1 = np.array([1.0, 0.0])
    psi2 = np.array([np.cos(theta), np.sin(theta)])
    return validate_ensemble(list(priors), [np.outer(psi1, psi1), np.outer(psi2, psi2)])


def angle_measurement(phi):
    """Projective qubit pair {P(phi), Id - P(phi)} with P onto (cos phi, sin phi)."""
    v = np.array([np.cos(phi), np.sin(phi)])
    proj = np.outer(v, v)
    return validate_projective([proj, np.eye(2) - proj])


def qubit_angle_oracle(ensemble, grid=4001, refine_iters=120):
    """Independent brute-force maximization over one real measurement angle.

    Only valid for real-entry qubit pairs, where the optimal projective pair
    lies on the real circle. Grid scan plus golden-section refinement; shares
    no code with the package solvers.
    """
    p1, p2 = ensemble.priors
    rho1, rho2 = ensemble.states
    eye = np.eye(2)

    def value(phi):
        v = np.array([np.cos(phi), np.sin(phi)])
        proj = np.outer(v, v)
        return float(
            p1 * np.trace(rho1 @ proj).real + p2 * np.trace(rho2 @ (eye - proj)).real
        )

    phis = np.linspace(0.0, np.pi, grid)
    values = [value(phi) for phi in phis]
    best = int(np.argmax(values))
    a = phis[max(best - 1, 0)]
    b = phis[min(best + 1, grid - 1)]
    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = value(c), value(d)
    for _ in range(refine_iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = value(d)
    phi = (a + b) / 2.0
    return value(phi), phi
