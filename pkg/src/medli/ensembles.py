"""Prior-weighted state ensembles, measurements, and their validators.

An ensemble is linearly independent (LI) when the union of all states'
eigenvectors (above the rank cutoff) is a linearly independent set spanning
the space; this forces the state ranks to sum to the dimension. Validators
always recompute the rank signature rather than trusting the input, since
everything downstream keys on exact ranks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSignature,
    NotComplete,
    NotLinearlyIndependent,
    NotOrthogonal,
    NotProjector,
    NotPSD,
    PriorsInvalid,
    RankSumMismatch,
    StateNotDensity,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_square,
    check_hermitian,
    expi_herm,
    haar_unitary,
    herm,
    random_hermitian,
    rank_eps,
)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Ensemble:
    """Prior-weighted list of density matrices with its rank signature."""

    dim: int
    priors: np.ndarray
    states: tuple[np.ndarray, ...]
    rank_signature: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.states)

    def weighted_states(self) -> tuple[np.ndarray, ...]:
        """The products p_i * rho_i."""
        return tuple(p * rho for p, rho in zip(self.priors, self.states))


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Mutually orthogonal projectors summing to the identity."""

    dim: int
    projectors: tuple[np.ndarray, ...]
    rank_signature: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True)
class GeneralPOVM:
    """PSD elements summing to the identity; pre-validation input type."""

    dim: int
    elements: tuple[np.ndarray, ...]

    @property
    def m(self) -> int:
        return len(self.elements)


def measurement_elements(measurement) -> tuple[np.ndarray, ...]:
    if isinstance(measurement, ProjectiveMeasurement):
        return measurement.projectors
    if isinstance(measurement, GeneralPOVM):
        return measurement.elements
    raise TypeError(f"not a measurement: {type(measurement).__name__}")


def _eigvec_blocks(states, tol: Tolerances):
    """Per-state ranks and the eigenvectors above the rank cutoff."""
    ranks = []
    blocks = []
    for mat in states:
        w, v = np.linalg.eigh(herm(mat))
        amax = float(np.abs(w).max()) if w.size else 0.0
        scale = amax if amax > 0.0 else 1.0
        keep = np.abs(w) > tol.tol_rank * scale
        ranks.append(int(keep.sum()))
        blocks.append(v[:, keep])
    return ranks, blocks


def _linearly_independent(states, dim: int, tol: Tolerances) -> bool:
    ranks, blocks = _eigvec_blocks(states, tol)
    if sum(ranks) != dim:
        return False
    svals = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return bool(svals[-1] > tol.tol_rank * svals[0])


def validate_ensemble(priors, states, tol: Tolerances = DEFAULT_TOL) -> Ensemble:
    """Check membership in the LI ensemble class and build the Ensemble.

    Raises PriorsInvalid, StateNotDensity, RankSumMismatch, or
    NotLinearlyIndependent naming the first violated invariant.
    """
    pr = np.asarray(priors, dtype=float).reshape(-1)
    mats = [as_square(s) for s in states]
    m = len(mats)
    if m < 2:
        raise DimensionMismatch(f"an ensemble needs at least 2 states, got {m}")
    if pr.shape[0] != m:
        raise DimensionMismatch(f"{pr.shape[0]} priors for {m} states")
    dim = mats[0].shape[0]
    for idx, mat in enumerate(mats):
        if mat.shape != (dim, dim):
            raise DimensionMismatch(f"state {idx} has shape {mat.shape}, expected {(dim, dim)}")
    if np.any(pr <= 0.0):
        raise PriorsInvalid(f"priors must be strictly positive, got {pr.tolist()}")
    if abs(pr.sum() - 1.0) > tol.tol_recon:
        raise PriorsInvalid(f"priors sum to {pr.sum()!r}, not 1")
    for idx, mat in enumerate(mats):
        try:
            check_hermitian(mat, tol)
        except ValueError as exc:
            raise StateNotDensity(f"state {idx}: {exc}") from exc
        w = np.linalg.eigvalsh(herm(mat))
        if w[0] < -tol.tol_psd:
            raise StateNotDensity(f"state {idx} has eigenvalue {w[0]:.3e}")
        trace = float(np.trace(mat).real)
        if abs(trace - 1.0) > tol.tol_recon:
            raise StateNotDensity(f"state {idx} has trace {trace!r}, not 1")
    ranks, blocks = _eigvec_blocks(mats, tol)
    if sum(ranks) != dim:
        raise RankSumMismatch(f"state ranks {tuple(ranks)} sum to {sum(ranks)}, dim is {dim}")
    svals = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    if svals[-1] <= tol.tol_rank * svals[0]:
        raise NotLinearlyIndependent(
            f"stacked eigenvectors have singular value ratio {svals[-1] / svals[0]:.3e}"
        )
    return Ensemble(
        dim=dim,
        priors=_frozen(pr),
        states=tuple(_frozen(mat) for mat in mats),
        rank_signature=tuple(ranks),
    )


def validate_projective(projectors, tol: Tolerances = DEFAULT_TOL) -> ProjectiveMeasurement:
    """Check mutual orthogonality and completeness of a projector family."""
    mats = [as_square(p) for p in projectors]
    if not mats:
        raise DimensionMismatch("a measurement needs at least one element")
    dim = mats[0].shape[0]
    for idx, p in enumerate(mats):
        if p.shape != (dim, dim):
            raise DimensionMismatch(f"element {idx} has shape {p.shape}, expected {(dim, dim)}")
        defect = float(np.linalg.norm(p @ p - p)) + float(np.linalg.norm(p - p.conj().T))
        if defect > tol.tol_recon:
            raise NotProjector(f"element {idx} has projector defect {defect:.3e}")
    total = sum(mats)
    defect = float(np.linalg.norm(total - np.eye(dim)))
    if defect > tol.tol_recon:
        raise NotComplete(f"elements sum to identity only within {defect:.3e}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            cross = float(np.linalg.norm(mats[i] @ mats[j]))
            if cross > tol.tol_recon:
                raise NotOrthogonal(f"elements {i} and {j} overlap by {cross:.3e}")
    return ProjectiveMeasurement(
        dim=dim,
        projectors=tuple(_frozen(p) for p in mats),
        rank_signature=tuple(rank_eps(p, tol) for p in mats),
    )


def validate_povm(elements, tol: Tolerances = DEFAULT_TOL) -> GeneralPOVM:
    """Check PSD-ness and completeness of general POVM elements."""
    mats = [as_square(e) for e in elements]
    if not mats:
        raise DimensionMismatch("a POVM needs at least one element")
    dim = mats[0].shape[0]
    for idx, e in enumerate(mats):
        if e.shape != (dim, dim):
            raise DimensionMismatch(f"element {idx} has shape {e.shape}, expected {(dim, dim)}")
        try:
            check_hermitian(e, tol)
        except ValueError as exc:
            raise NotPSD(f"element {idx}: {exc}") from exc
        w = np.linalg.eigvalsh(herm(e))
        if w[0] < -tol.tol_psd:
            raise NotPSD(f"element {idx} has eigenvalue {w[0]:.3e}")
    defect = float(np.linalg.norm(sum(mats) - np.eye(dim)))
    if defect > tol.tol_recon:
        raise NotComplete(f"elements sum to identity only within {defect:.3e}")
    return GeneralPOVM(dim=dim, elements=tuple(_frozen(e) for e in mats))


def success_probability(ensemble: Ensemble, measurement, tol: Tolerances = DEFAULT_TOL) -> float:
    """Average probability sum_i p_i Tr(rho_i E_i) of identifying the state.

    Clamped to [0, 1] only when within tol_recon of the boundary.
    """
    elements = measurement_elements(measurement)
    if len(elements) != ensemble.m:
        raise DimensionMismatch(f"{len(elements)} outcomes for {ensemble.m} states")
    if elements[0].shape[0] != ensemble.dim:
        raise DimensionMismatch(
            f"measurement dim {elements[0].shape[0]} != ensemble dim {ensemble.dim}"
        )
    value = float(
        sum(
            p * np.trace(rho @ e).real
            for p, rho, e in zip(ensemble.priors, ensemble.states, elements)
        )
    )
    if 1.0 < value <= 1.0 + tol.tol_recon:
        return 1.0
    if -tol.tol_recon <= value < 0.0:
        return 0.0
    return value


def average_state(ensemble: Ensemble) -> np.ndarray:
    """The prior-weighted average sum_i p_i rho_i; PD for LI ensembles."""
    acc = np.zeros((ensemble.dim, ensemble.dim), dtype=complex)
    for p, rho in zip(ensemble.priors, ensemble.states):
        acc += p * rho
    return herm(acc)


def random_ensemble(
    dim: int,
    rank_signature,
    seed: int,
    tol: Tolerances = DEFAULT_TOL,
    perturbation: float = 0.1,
) -> Ensemble:
    """Seed-deterministic LI ensemble with the requested rank signature.

    Columns of a Haar unitary are partitioned into per-state eigenbases, each
    state gets random positive eigenvalues normalized to unit trace, then each
    state is conjugated by a small random unitary (kept only when linear
    independence survives). Priors are a flat simplex sample.
    """
    sig = tuple(int(r) for r in rank_signature)
    if len(sig) < 2 or any(r < 1 for r in sig) or sum(sig) != dim:
        raise InvalidSignature(f"signature {sig} is invalid for dim {dim}")
    rng = np.random.default_rng(seed)
    u = haar_unitary(dim, rng)
    states = []
    start = 0
    for r in sig:
        cols = u[:, start : start + r]
        start += r
        lam = rng.uniform(0.25, 1.0, size=r)
        lam /= lam.sum()
        states.append(herm((cols * lam) @ cols.conj().T))
    for i in range(len(sig)):
        gen = random_hermitian(dim, rng)
        gen /= max(1.0, float(np.linalg.norm(gen)))
        w = expi_herm(gen, perturbation)
        cand = herm(w @ states[i] @ w.conj().T)
        trial = states[:i] + [cand] + states[i + 1 :]
        if _linearly_independent(trial, dim, tol):
            states[i] = cand
    priors = rng.dirichlet(np.ones(len(sig)))
    return validate_ensemble(priors, states, tol)
