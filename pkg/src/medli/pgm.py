"""The pretty good measurement and its projective form for LI ensembles."""

from __future__ import annotations

import numpy as np

from .ensembles import Ensemble, GeneralPOVM, ProjectiveMeasurement, average_state, validate_projective
from .errors import MEDError, NotProjectiveAfterPGM, SigmaSingular
from .linalg import DEFAULT_TOL, Tolerances, herm, psd_inv_sqrt

# Beyond this condition number of the average state, near-dependent ensembles
# are outside the stable regime and the inverse square root returns garbage.
COND_LIMIT = 1e12


def pgm_general(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOL) -> GeneralPOVM:
    """POVM with elements sigma^{-1/2} (p_i rho_i) sigma^{-1/2}.

    sigma is the ensemble average state and must be PD with condition number
    below COND_LIMIT, else SigmaSingular.
    """
    sigma = average_state(ensemble)
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= tol.tol_psd:
        raise SigmaSingular(f"average state has smallest eigenvalue {w[0]:.3e}")
    if w[-1] / w[0] > COND_LIMIT:
        raise SigmaSingular(f"average state condition number {w[-1] / w[0]:.3e} too large")
    t = psd_inv_sqrt(sigma, tol)
    elements = tuple(
        herm(t @ (p * rho) @ t) for p, rho in zip(ensemble.priors, ensemble.states)
    )
    return GeneralPOVM(dim=ensemble.dim, elements=elements)


def pgm(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOL) -> ProjectiveMeasurement:
    """Pretty good measurement of an LI ensemble, promoted to projectors.

    For LI input every element is idempotent with the state's rank; each
    projector's range basis is re-orthonormalized (project, orthonormalize,
    rebuild) before returning, because downstream block decompositions need
    crisp projectors and drift compounds through the conditioning of the
    inverse square root.
    """
    povm = pgm_general(ensemble, tol)
    projectors = []
    for idx, (element, r) in enumerate(zip(povm.elements, ensemble.rank_signature)):
        defect = float(np.linalg.norm(element @ element - element))
        if defect > tol.tol_recon:
            raise NotProjectiveAfterPGM(
                f"element {idx} fails idempotency by {defect:.3e}; "
                "tolerances too tight for this instance's conditioning"
            )
        _, v = np.linalg.eigh(element)
        basis = v[:, ensemble.dim - r :]
        projectors.append(herm(basis @ basis.conj().T))
    try:
        meas = validate_projective(projectors, tol)
    except MEDError as exc:
        raise NotProjectiveAfterPGM(f"rebuilt projectors fail validation: {exc}") from exc
    if meas.rank_signature != ensemble.rank_signature:
        raise NotProjectiveAfterPGM(
            f"projector ranks {meas.rank_signature} != state ranks {ensemble.rank_signature}"
        )
    return meas
