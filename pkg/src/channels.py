"""Classical-noise and thermal-noise channels on truncated Fock states

The classical-noise map averages D(mu) rho D(mu)^dag over an isotropic
Gaussian of variance n. The thermal-noise map mixes the signal with a
thermal environment on a beam splitter of transmissivity eta and discards
the environment. Gaussian inputs are propagated exactly through their
first and second moments.
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import roots_laguerre

from .config import get_settings
from .errors import ConvergenceError, InvalidParameterError, TruncationError
from .fock_core import (
    annihilation,
    displacement_block,
    embed,
    expectation,
    support_dim,
    thermal_cutoff,
    thermal_state,
)
from .models import (
    ChannelSpec,
    ClassicalNoiseSpec,
    DensityOperator,
    GaussianState,
    QuadratureRule,
    ThermalNoiseSpec,
)

logger = logging.getLogger(__name__)

DEFAULT_RADIAL_ORDER = 40
DEFAULT_ANGULAR_COUNT = 64
CONVERGENCE_TOL = 1e-8
MAX_OUTPUT_DIM = 400


def classical_quadrature(
    n: float,
    radial_order: int = DEFAULT_RADIAL_ORDER,
    angular_count: int = DEFAULT_ANGULAR_COUNT,
) -> QuadratureRule:
    """Polar rule for the kernel P_n(mu) = exp(-|mu|^2/n)/(pi n)"""
    if n < 0:
        raise InvalidParameterError(f"noise must be >= 0, got {n}")
    return QuadratureRule.build(n, radial_order, angular_count)


def working_dim(support: int, n: float) -> int:
    """Cutoff needed by an input supported below `support` under noise n"""
    return support + math.ceil(10 * (n + 1))


@lru_cache(maxsize=32)
def _cached_radial_rule(n: float, radial_order: int) -> Tuple[np.ndarray, np.ndarray]:
    s, lam = roots_laguerre(radial_order)
    a = n / (n + 1.0)
    radii = np.sqrt(a * s)
    with np.errstate(divide="ignore"):
        weights = np.exp(np.log(lam) + a * s) / (n + 1.0)
    radii.flags.writeable = False
    weights.flags.writeable = False
    return radii, weights


def radial_rule(quad: QuadratureRule) -> Tuple[np.ndarray, np.ndarray]:
    """Radii and weights for the radial integral of D(mu) X D(mu)^dag

    After the angular average every matrix element is P_n(r) e^{-r^2} times a
    polynomial in r^2. Gauss-Laguerre in s = (n+1) r^2 / n, with e^{s n/(n+1)}
    moved into the weights, leaves only that polynomial, so entries up to
    degree 2 radial_order - 1 come out exact.
    """
    return _cached_radial_rule(float(quad.n), int(quad.radial_order))


def output_cutoff(
    support: int,
    n: float,
    tol: Optional[float] = None,
    quad: Optional[QuadratureRule] = None,
) -> int:
    """Smallest cutoff, at least working_dim, losing < tol for any input

    The weight pushed past the cutoff is diagonal in the input Fock basis
    after the angular average, so checking each input level is enough.
    """
    if n == 0:
        return support
    tol = get_settings().tail_tol if tol is None else tol
    quad = quad or classical_quadrature(n)
    radii, radial_weights = radial_rule(quad)
    step = math.ceil(5 * (n + 1))
    dim = working_dim(support, n)
    while True:
        radial = displacement_block(radii, dim)[:, :, :support].real
        kept = np.einsum("k,kpm->m", radial_weights, radial**2)
        lost = float(np.max(1.0 - kept))
        if lost < tol:
            return dim
        dim += step
        if dim > MAX_OUTPUT_DIM:
            raise TruncationError(
                f"no cutoff below {MAX_OUTPUT_DIM} holds support {support} at n={n}"
            )


# --- Classical noise ---------------------------------------------------------


def _angular_average(delta: np.ndarray, quad: QuadratureRule) -> np.ndarray:
    """Mean of exp(i theta delta) over the angular nodes"""
    return np.mean(np.exp(1j * np.multiply.outer(delta, quad.angles)), axis=-1)


def _spread(block: np.ndarray, quad: QuadratureRule, dim: int) -> np.ndarray:
    """Sum of w D(mu) block D(mu)^dag over the nodes, on dim levels

    D(r e^{i theta}) = P D(r) P^dag with P = diag(e^{i theta p}), so the
    radial matrices are built once and rotated per angle.
    """
    support = block.shape[0]
    radii, radial_weights = radial_rule(quad)
    radial = displacement_block(radii, dim)[:, :, :support].real
    radial_t = radial.transpose(0, 2, 1)
    weights = radial_weights / quad.angular_count
    levels = np.arange(dim)

    out = np.zeros((dim, dim), dtype=complex)
    for j, theta in enumerate(quad.angles):
        phase = np.exp(1j * theta * levels)
        rotated = phase[:support].conj()[:, None] * block * phase[None, :support]
        spread = np.tensordot(weights, radial @ rotated @ radial_t, axes=1)
        out += phase[:, None] * spread * phase.conj()[None, :]
    return out


def apply_classical_noise(
    rho: DensityOperator,
    spec: ClassicalNoiseSpec,
    quad: Optional[QuadratureRule] = None,
    check_convergence: bool = False,
    tol: float = CONVERGENCE_TOL,
) -> DensityOperator:
    """Apply the classical-noise map to rho, keeping its cutoff"""
    if spec.n == 0:
        return rho

    if quad is None:
        quad = classical_quadrature(spec.n)
    elif abs(quad.n - spec.n) > 1e-15:
        raise InvalidParameterError(
            f"quadrature built for n={quad.n}, channel has n={spec.n}"
        )

    support = support_dim(rho)
    needed = working_dim(support, spec.n)
    if rho.dim < needed:
        raise TruncationError(
            f"cutoff {rho.dim} lacks headroom for support {support} at n={spec.n} "
            f"(need {needed})"
        )

    block = np.array(rho.matrix[:support, :support])
    out = _spread(block, quad, rho.dim)
    if check_convergence:
        refined = _spread(block, quad.doubled(), rho.dim)
        change = float(np.max(np.abs(refined - out)))
        logger.debug("quadrature doubling changed the output by %.3e", change)
        if change > tol:
            raise ConvergenceError(
                f"output changed by {change:.3e} when quadrature orders doubled"
            )

    return _finish(out, rho.tail_mass, "classical noise")


def _finish(matrix: np.ndarray, tail_mass: float, label: str) -> DensityOperator:
    matrix = 0.5 * (matrix + matrix.conj().T)
    trace = float(np.trace(matrix).real)
    lost = max(0.0, 1.0 - trace)
    max_tail = get_settings().max_tail
    if lost > max_tail:
        raise TruncationError(
            f"{label} output lost weight {lost:.3e} beyond the cutoff"
        )
    if lost > get_settings().tail_tol:
        logger.debug("%s output renormalized after losing %.3e", label, lost)
    return DensityOperator(
        dim=matrix.shape[0], matrix=matrix / trace, tail_mass=tail_mass + lost
    )


def classical_noise_superoperator(
    n: float,
    support: int,
    dim: Optional[int] = None,
    quad: Optional[QuadratureRule] = None,
) -> np.ndarray:
    """Classical-noise map on inputs below `support` as a (dim, dim, s, s) tensor"""
    if n == 0:
        dim = support if dim is None else dim
        eye = np.eye(dim, support)
        return np.einsum("pm,qn->pqmn", eye, eye).astype(complex)

    quad = quad or classical_quadrature(n)
    dim = output_cutoff(support, n, quad=quad) if dim is None else dim
    radii, radial_weights = radial_rule(quad)
    radial = displacement_block(radii, dim)[:, :, :support].real
    kernel = np.einsum("k,kpm,kqn->pqmn", radial_weights, radial, radial)

    p = np.arange(dim)[:, None, None, None]
    q = np.arange(dim)[None, :, None, None]
    m = np.arange(support)[None, None, :, None]
    n_idx = np.arange(support)[None, None, None, :]
    offset = dim + support
    table = _angular_average(np.arange(-offset, offset + 1), quad)
    return kernel * table[(p - m) - (q - n_idx) + offset]


def apply_superoperator(superop: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Contract a (d, d, s, s) channel tensor with an s x s input block"""
    support = superop.shape[2]
    return np.tensordot(superop, block[:support, :support], axes=([2, 3], [0, 1]))


# --- Thermal noise -----------------------------------------------------------


def _sector_generator(ps: np.ndarray, total: int) -> np.ndarray:
    """a^dag b - a b^dag on the sector with `total` photons, rows indexed by ps"""
    generator = np.zeros((ps.size, ps.size))
    for i, p in enumerate(ps[:-1]):
        # a^dag b moves a photon from mode b into mode a
        generator[i + 1, i] = math.sqrt((p + 1) * (total - p))
        generator[i, i + 1] = -generator[i + 1, i]
    return generator


@lru_cache(maxsize=16)
def _beam_splitter(eta: float, dim_a: int, dim_b: int) -> np.ndarray:
    theta = math.acos(math.sqrt(eta))
    unitary = np.zeros((dim_a * dim_b, dim_a * dim_b))
    for total in range(dim_a + dim_b - 1):
        ps = np.arange(max(0, total - dim_b + 1), min(total, dim_a - 1) + 1)
        idx = ps * dim_b + (total - ps)
        unitary[np.ix_(idx, idx)] = expm(theta * _sector_generator(ps, total))
    unitary.flags.writeable = False
    logger.debug("built beam splitter eta=%g on %dx%d levels", eta, dim_a, dim_b)
    return unitary


def beam_splitter_unitary(eta: float, dim_a: int, dim_b: int) -> np.ndarray:
    """exp(theta (a^dag b - a b^dag)) with cos(theta)^2 = eta

    Exact on every total-photon-number sector that fits both cutoffs, so
    a -> sqrt(eta) a + sqrt(1 - eta) b for states in those sectors.
    """
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta}")
    limit = get_settings().max_product_dim
    if dim_a * dim_b > limit:
        raise TruncationError(
            f"product dimension {dim_a * dim_b} exceeds the limit {limit}"
        )
    return _beam_splitter(float(eta), int(dim_a), int(dim_b))


def environment_dim(N: float) -> int:
    return thermal_cutoff(N)


@lru_cache(maxsize=4)
def _dilation_kraus(eta: float, support: int, env_dim: int) -> np.ndarray:
    """<p, q|U|m, k> for m < support and k < env_dim, shape (D, D, support, env_dim)

    D = support + env_dim - 1 holds every sector the inputs reach, and each
    sector is exponentiated on its own, so the two-mode space is never formed.
    """
    theta = math.acos(math.sqrt(eta))
    dim = support + env_dim - 1
    kraus = np.zeros((dim, dim, support, env_dim))
    for total in range(dim):
        ps = np.arange(total + 1)
        sector = expm(theta * _sector_generator(ps, total))
        for m in range(max(0, total - env_dim + 1), min(total, support - 1) + 1):
            kraus[ps, total - ps, m, total - m] = sector[:, m]
    kraus.flags.writeable = False
    logger.debug(
        "built dilation eta=%g for support %d and environment %d",
        eta,
        support,
        env_dim,
    )
    return kraus


def apply_thermal_noise(
    rho: DensityOperator, spec: ThermalNoiseSpec, env_dim: Optional[int] = None
) -> DensityOperator:
    """Apply the thermal-noise map through its beam-splitter dilation

    Only the photon-number sectors reachable from the input and a thermal
    environment on env_dim levels are built.
    """
    if spec.eta == 1.0:
        return rho

    env_dim = environment_dim(spec.N) if env_dim is None else env_dim
    environment = thermal_state(spec.N, env_dim)
    populations = np.real(np.diag(environment.matrix))
    support = support_dim(rho)
    kraus = _dilation_kraus(float(spec.eta), support, env_dim)
    block = rho.matrix[:support, :support]
    out = np.einsum(
        "pqmk,k,mn,rqnk->pr", kraus, populations, block, kraus, optimize=True
    )
    logger.debug(
        "thermal noise eta=%g N=%g on %d output levels",
        spec.eta,
        spec.N,
        out.shape[0],
    )

    tail = 1.0 - (1.0 - rho.tail_mass) * (1.0 - environment.tail_mass)
    result = _finish(out, tail, "thermal noise")
    return embed(result, max(rho.dim, result.dim))


def thermal_noise_superoperator(
    spec: ThermalNoiseSpec, support: int, env_dim: Optional[int] = None
) -> np.ndarray:
    """Thermal-noise map on inputs below `support` as a (D, D, s, s) tensor"""
    env_dim = environment_dim(spec.N) if env_dim is None else env_dim
    populations = np.real(np.diag(thermal_state(spec.N, env_dim).matrix))
    kraus = _dilation_kraus(float(spec.eta), support, env_dim)
    return np.einsum(
        "pqmk,k,rqnk->prmn", kraus, populations, kraus, optimize=True
    ).astype(complex)


def verify_composition(
    rho: DensityOperator, spec: ThermalNoiseSpec, quad: Optional[QuadratureRule] = None
) -> float:
    """Max deviation between E_eta^N(rho) and N_{(1-eta)N}(E_eta^0(rho))"""
    direct = apply_thermal_noise(rho, spec)

    lossy = apply_thermal_noise(rho, ThermalNoiseSpec(eta=spec.eta, N=0.0))
    noise = spec.effective_noise
    if noise > 0:
        support = support_dim(lossy)
        dim = max(lossy.dim, output_cutoff(support, noise, quad=quad))
        composed = apply_classical_noise(
            embed(lossy, dim), ClassicalNoiseSpec(n=noise), quad
        )
    else:
        composed = lossy

    dim = max(direct.dim, composed.dim)
    deviation = float(
        np.max(np.abs(embed(direct, dim).matrix - embed(composed, dim).matrix))
    )
    logger.debug(
        "composition deviation %.3e for eta=%g N=%g", deviation, spec.eta, spec.N
    )
    return deviation


def apply_channel(
    rho: DensityOperator,
    channel: ChannelSpec,
    quad: Optional[QuadratureRule] = None,
) -> DensityOperator:
    """Apply either channel, padding rho with the headroom it needs"""
    if isinstance(channel, ClassicalNoiseSpec):
        if channel.n == 0:
            return rho
        dim = max(rho.dim, output_cutoff(support_dim(rho), channel.n, quad=quad))
        return apply_classical_noise(embed(rho, dim), channel, quad)
    return apply_thermal_noise(rho, channel)


def channel_superoperator(channel: ChannelSpec, support: int) -> np.ndarray:
    if isinstance(channel, ClassicalNoiseSpec):
        return classical_noise_superoperator(channel.n, support)
    return thermal_noise_superoperator(channel, support)


# --- Gaussian states ---------------------------------------------------------


def squeezed_gaussian(s: float, phi: float = 0.0, mean: complex = 0j) -> GaussianState:
    """Pure Gaussian state with quadrature variances s/2 and 1/(2s) rotated by phi"""
    if s <= 0:
        raise InvalidParameterError(f"squeeze parameter must be > 0, got {s}")
    cos_phi, sin_phi = math.cos(phi), math.sin(phi)
    rotation = np.array([[cos_phi, -sin_phi], [sin_phi, cos_phi]])
    cov = rotation @ np.diag([s / 2.0, 1.0 / (2.0 * s)]) @ rotation.T
    return GaussianState(mean=mean, cov=0.5 * (cov + cov.T))


def gaussian_moments(rho: DensityOperator) -> GaussianState:
    """Mean <a> and quadrature covariance of rho"""
    a = annihilation(rho.dim)
    mean = expectation(rho, a)
    second = expectation(rho, a @ a) - mean**2
    number = expectation(rho, a.conj().T @ a).real - abs(mean) ** 2
    cov = np.array(
        [
            [second.real + number + 0.5, second.imag],
            [second.imag, -second.real + number + 0.5],
        ]
    )
    return GaussianState(mean=mean, cov=cov)


def propagate_gaussian(g: GaussianState, channel: ChannelSpec) -> GaussianState:
    """Exact channel action on mean and covariance"""
    if isinstance(channel, ClassicalNoiseSpec):
        return GaussianState(mean=g.mean, cov=g.cov + channel.n * np.eye(2))
    eta = channel.eta
    return GaussianState(
        mean=math.sqrt(eta) * g.mean,
        cov=eta * g.cov + (1.0 - eta) * (channel.N + 0.5) * np.eye(2),
    )


def effective_thermal_photon(g: Union[GaussianState, np.ndarray]) -> float:
    """n' = sqrt(det cov) - 1/2, the thermal photon number of the Williamson form"""
    cov = g.cov if isinstance(g, GaussianState) else np.asarray(g, dtype=float)
    det = float(np.linalg.det(cov))
    if det < 0.25 - 1e-12:
        raise InvalidParameterError(
            f"covariance determinant {det:.6g} violates the 1/4 bound"
        )
    return max(0.0, math.sqrt(det) - 0.5)
