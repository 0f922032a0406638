"""Truncated Fock-space linear algebra for a single bosonic mode

States and operators live on levels 0..dim-1. Constructors report the
probability weight cut off by the truncation (tail mass) and refuse cutoffs
that lose more than the configured tolerance.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammainc, gammaln

from .config import get_settings
from .errors import InvalidParameterError, TruncationError
from .models import DensityOperator, FockOperator, PureState

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[complex]]
FockValue = Union[PureState, DensityOperator, FockOperator]

# upper limit for the cutoff search in coherent_cutoff
MAX_CUTOFF = 5000


def _check_dim(dim: int) -> None:
    if int(dim) != dim or dim < 1:
        raise InvalidParameterError(
            f"Fock cutoff must be a positive integer, got {dim}"
        )


def _tail_tolerance(tol: Optional[float]) -> float:
    return get_settings().tail_tol if tol is None else tol


# --- Cutoff policy -----------------------------------------------------------


def coherent_tail(alpha: complex, dim: int) -> float:
    """Poisson weight of |alpha> on levels >= dim"""
    x = abs(alpha) ** 2
    if x == 0.0:
        return 0.0
    return float(gammainc(dim, x))


def thermal_tail(nbar: float, dim: int) -> float:
    """Geometric weight of a thermal state on levels >= dim"""
    return (nbar / (nbar + 1.0)) ** dim


def coherent_cutoff(alpha: complex, tol: Optional[float] = None) -> int:
    """Smallest cutoff whose coherent-state tail mass is below tol"""
    tol = _tail_tolerance(tol)
    dim = max(1, int(abs(alpha) ** 2))
    while coherent_tail(alpha, dim) >= tol:
        dim += 1
        if dim > MAX_CUTOFF:
            raise TruncationError(f"no cutoff below {MAX_CUTOFF} fits |{alpha}>")
    return dim


def thermal_cutoff(nbar: float, tol: Optional[float] = None) -> int:
    """Smallest cutoff whose thermal-state tail mass is below tol"""
    if nbar < 0:
        raise InvalidParameterError(f"mean photon number must be >= 0, got {nbar}")
    tol = _tail_tolerance(tol)
    if nbar == 0:
        return 1
    ratio = nbar / (nbar + 1.0)
    dim = max(1, math.ceil(math.log(tol) / math.log(ratio)))
    while thermal_tail(nbar, dim) >= tol:
        dim += 1
    return dim


# --- States ------------------------------------------------------------------


def coherent_amplitudes(mu: ArrayLike, dim: int) -> np.ndarray:
    """Untruncated Fock amplitudes of |mu> for every mu, shape (len(mu), dim)"""
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    levels = np.arange(dim)
    radius = np.abs(mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_radius = np.log(radius)
        log_mag = (
            -0.5 * radius[:, None] ** 2
            + levels[None, :] * log_radius[:, None]
            - 0.5 * gammaln(levels + 1)[None, :]
        )
    # 0 * log(0) for the vacuum component
    log_mag[:, 0] = -0.5 * radius**2
    phase = np.exp(1j * np.angle(mu)[:, None] * levels[None, :])
    return np.exp(log_mag) * phase


def coherent_state(alpha: complex, dim: int, tol: Optional[float] = None) -> PureState:
    """Coherent state |alpha> truncated to dim levels"""
    _check_dim(dim)
    tol = _tail_tolerance(tol)
    tail = coherent_tail(alpha, dim)
    if tail > tol:
        raise TruncationError(
            f"cutoff {dim} leaves tail mass {tail:.3e} for |{alpha}> "
            f"(tolerance {tol:g})"
        )

    amplitudes = coherent_amplitudes([alpha], dim)[0]
    amplitudes = amplitudes / np.linalg.norm(amplitudes)
    return PureState(dim=dim, amplitudes=amplitudes, tail_mass=tail)


def thermal_state(
    nbar: float, dim: int, tol: Optional[float] = None
) -> DensityOperator:
    """Thermal state with mean photon number nbar truncated to dim levels"""
    _check_dim(dim)
    if nbar < 0:
        raise InvalidParameterError(f"mean photon number must be >= 0, got {nbar}")
    tol = _tail_tolerance(tol)
    tail = thermal_tail(nbar, dim)
    if tail > tol:
        raise TruncationError(
            f"cutoff {dim} leaves tail mass {tail:.3e} for thermal({nbar}) "
            f"(tolerance {tol:g})"
        )

    populations = (nbar / (nbar + 1.0)) ** np.arange(dim) / (nbar + 1.0)
    populations = populations / populations.sum()
    return DensityOperator(dim=dim, matrix=np.diag(populations), tail_mass=tail)


def fock_state(m: int, dim: int) -> PureState:
    """Number state |m>"""
    _check_dim(dim)
    if not 0 <= m < dim:
        raise InvalidParameterError(f"level {m} outside cutoff {dim}")
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[m] = 1.0
    return PureState(dim=dim, amplitudes=amplitudes)


def pure_state(amplitudes: ArrayLike, dim: Optional[int] = None) -> PureState:
    """Normalize amplitudes on levels 0..len-1 and pad them to dim"""
    amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(amplitudes)
    if amplitudes.size == 0 or norm == 0.0:
        raise InvalidParameterError("amplitude vector must be non-zero")
    dim = amplitudes.size if dim is None else dim
    _check_dim(dim)
    if dim < amplitudes.size:
        raise InvalidParameterError(
            f"{amplitudes.size} amplitudes do not fit cutoff {dim}"
        )
    padded = np.zeros(dim, dtype=complex)
    padded[: amplitudes.size] = amplitudes / norm
    return PureState(dim=dim, amplitudes=padded)


def random_pure_state(
    support: int, dim: int, rng: Union[np.random.Generator, int, None] = None
) -> PureState:
    """Haar-random pure state supported on levels 0..support-1"""
    if not 1 <= support <= dim:
        raise InvalidParameterError(f"support {support} must lie in [1, {dim}]")
    rng = np.random.default_rng(rng)
    raw = rng.standard_normal(support) + 1j * rng.standard_normal(support)
    return pure_state(raw, dim)


def density_from_pure(psi: PureState) -> DensityOperator:
    matrix = np.outer(psi.amplitudes, psi.amplitudes.conj())
    matrix = matrix / np.trace(matrix).real
    return DensityOperator(dim=psi.dim, matrix=matrix, tail_mass=psi.tail_mass)


def support_dim(value: Union[PureState, DensityOperator], eps: float = 1e-12) -> int:
    """One plus the highest level whose population exceeds eps"""
    if isinstance(value, PureState):
        populations = np.abs(value.amplitudes) ** 2
    else:
        populations = np.real(np.diag(value.matrix))
    occupied = np.nonzero(populations > eps)[0]
    return int(occupied[-1]) + 1 if occupied.size else 1


def embed(value: FockValue, dim: int, eps: float = 1e-12) -> FockValue:
    """Zero-pad to a larger cutoff or crop levels that carry no weight"""
    _check_dim(dim)
    if dim == value.dim:
        return value

    if isinstance(value, PureState):
        if dim < value.dim:
            dropped = float(np.sum(np.abs(value.amplitudes[dim:]) ** 2))
            if dropped > eps:
                raise TruncationError(f"cropping to {dim} drops weight {dropped:.3e}")
            kept = value.amplitudes[:dim]
            return PureState(
                dim=dim,
                amplitudes=kept / np.linalg.norm(kept),
                tail_mass=value.tail_mass + dropped,
            )
        padded = np.zeros(dim, dtype=complex)
        padded[: value.dim] = value.amplitudes
        return PureState(dim=dim, amplitudes=padded, tail_mass=value.tail_mass)

    if dim < value.dim:
        if isinstance(value, DensityOperator):
            dropped = float(np.sum(np.real(np.diag(value.matrix))[dim:]))
        else:
            rows = np.abs(value.matrix[dim:, :])
            cols = np.abs(value.matrix[:, dim:])
            dropped = float(max(np.max(rows, initial=0.0), np.max(cols, initial=0.0)))
        if dropped > eps:
            raise TruncationError(f"cropping to {dim} drops weight {dropped:.3e}")
        matrix = value.matrix[:dim, :dim]
    else:
        matrix = np.zeros((dim, dim), dtype=complex)
        matrix[: value.dim, : value.dim] = value.matrix

    if isinstance(value, DensityOperator):
        trace = np.trace(matrix).real
        return DensityOperator(
            dim=dim,
            matrix=matrix / trace,
            tail_mass=value.tail_mass + max(0.0, 1.0 - trace),
        )
    return FockOperator(dim=dim, matrix=matrix)


# --- Operators ---------------------------------------------------------------


def annihilation(dim: int) -> np.ndarray:
    _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def expectation(rho: DensityOperator, op: Union[FockOperator, np.ndarray]) -> complex:
    """Tr[rho op]"""
    matrix = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
    if matrix.shape != rho.matrix.shape:
        raise InvalidParameterError(
            f"operator shape {matrix.shape} does not match state cutoff {rho.dim}"
        )
    return complex(np.einsum("ij,ji->", rho.matrix, matrix))


def displacement_block(mu: ArrayLike, dim: int) -> np.ndarray:
    """Matrices <m|D(mu)|n> for every mu, shape (len(mu), dim, dim)

    Each element is sqrt(n!/m!) mu^(m-n) exp(-|mu|^2/2) L_n^(m-n)(|mu|^2) for
    m >= n, and follows from D(mu)^dag = D(-mu) otherwise. The Laguerre
    recurrence runs on the normalized products so that no factorial or power
    is ever formed explicitly.
    """
    _check_dim(dim)
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    x = np.abs(mu) ** 2
    phase = np.exp(1j * np.angle(mu))
    with np.errstate(divide="ignore"):
        log_x = np.log(x)

    out = np.zeros((mu.size, dim, dim), dtype=complex)
    for delta in range(dim):
        with np.errstate(invalid="ignore"):
            log_f = (0.5 * delta * log_x if delta else 0.0) - 0.5 * x
        f = np.exp(log_f - 0.5 * gammaln(delta + 1))
        f_prev = np.zeros_like(x)
        lower = phase**delta
        upper = (-phase.conj()) ** delta
        for j in range(dim - delta):
            out[:, j + delta, j] = lower * f
            if delta:
                out[:, j, j + delta] = upper * f
            f_next = (
                (2 * j + 1 + delta - x) * f - math.sqrt(j * (j + delta)) * f_prev
            ) / math.sqrt((j + 1) * (j + 1 + delta))
            f_prev, f = f, f_next
    return out


def displacement_matrix(mu: complex, dim: int) -> FockOperator:
    """D(mu) = exp(mu a^dag - mu* a) on the truncated space

    Elements are the exact infinite-space ones cut to dim levels, so the
    result is not unitary. Only the block of levels well below dim behaves
    like the true operator: D(mu) D(-mu) matches the identity there and drifts
    away from it near the cutoff.
    """
    return FockOperator(dim=dim, matrix=displacement_block([mu], dim)[0])


# --- Two-mode plumbing -------------------------------------------------------


def tensor(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Kronecker product with mode a as the slow index"""
    dim = a.dim * b.dim
    limit = get_settings().max_product_dim
    if dim > limit:
        raise TruncationError(f"product dimension {dim} exceeds the limit {limit}")
    return DensityOperator(
        dim=dim,
        matrix=np.kron(a.matrix, b.matrix),
        tail_mass=1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass),
    )


def partial_trace(
    ab: DensityOperator, keep: int, dims: Tuple[int, int]
) -> DensityOperator:
    """Trace out one mode of a two-mode operator; keep selects mode 0 or 1"""
    da, db = dims
    if da * db != ab.dim:
        raise InvalidParameterError(f"dims {dims} do not factor cutoff {ab.dim}")
    if keep not in (0, 1):
        raise InvalidParameterError(f"keep must be 0 or 1, got {keep}")

    blocks = ab.matrix.reshape(da, db, da, db)
    if keep == 0:
        reduced = np.einsum("ijkj->ik", blocks)
    else:
        reduced = np.einsum("ijil->jl", blocks)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityOperator(
        dim=reduced.shape[0],
        matrix=reduced / np.trace(reduced).real,
        tail_mass=ab.tail_mass,
    )
