"""Circulant-matrix machinery behind the integer-order purity bound

The k-purity of a classical-noise output is a Gaussian average over k
displacements. Its quadratic form is built from two commuting circulant
matrices A and G that the discrete Fourier unitary diagonalizes, which
splits the averaged operator into one thermal-like factor per Fourier mode.

Fourier modes are indexed from 0; mode 0 has the common eigenvector
(1, ..., 1) and always gives the identity factor. Eigenvalues follow
Y[m, j] = exp(2 pi i j m / k) / sqrt(k), so Y^dag A Y = diag(a_j).
"""

import logging
import math
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import circulant
from scipy.optimize import linear_sum_assignment

from .channels import (
    apply_classical_noise,
    apply_superoperator,
    classical_noise_superoperator,
    classical_quadrature,
    output_cutoff,
)
from .errors import ConvergenceError, IdentityViolationError, InvalidParameterError
from .fock_core import (
    density_from_pure,
    displacement_block,
    embed,
    random_pure_state,
    support_dim,
)
from .models import (
    CirculantSystem,
    ClassicalNoiseSpec,
    PureState,
    QuadratureRule,
    ThetaFactor,
    ThetaVerification,
)

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10
DET_TOL = 1e-10
CHAR_TOL = 1e-8
MAX_SERIES_TERMS = 20000
# ratios this close to the unit circle make the Laguerre series useless
RATIO_LIMIT = 1.0 - 1e-6
EXPECTATION_RADIAL_ORDER = 24
EXPECTATION_ANGULAR_COUNT = 48
CHUNK = 50000


def _check_order(k: int, n: float) -> None:
    if int(k) != k or k < 2:
        raise InvalidParameterError(f"k must be an integer >= 2, got {k}")
    if not n > 0:
        raise InvalidParameterError(f"noise must be > 0, got {n}")


def circulant_matrices(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Stencils A (antisymmetric, zero for k = 2) and G"""
    row_a = np.zeros(k)
    row_a[1] -= 1.0
    row_a[k - 1] += 1.0
    row_g = np.zeros(k)
    row_g[0] = -1.0
    row_g[1] += 1.0
    # scipy builds circulants from the first column
    return circulant(row_a).T, circulant(row_g).T


def dft_matrix(k: int) -> np.ndarray:
    idx = np.arange(k)
    return np.exp(2j * np.pi * np.outer(idx, idx) / k) / math.sqrt(k)


def multiset_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Largest mismatch between two eigenvalue lists under the best pairing"""
    cost = np.abs(np.subtract.outer(a, b))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max(initial=0.0))


def _eigen_data(k: int, n: float) -> Tuple[CirculantSystem, float]:
    A, G = circulant_matrices(k)
    j = np.arange(k)
    a_eigs = -2j * np.sin(2 * np.pi * j / k)
    g_eigs = np.exp(2j * np.pi * j / k) - 1.0
    deviation = max(
        multiset_deviation(np.linalg.eigvals(A), a_eigs),
        multiset_deviation(np.linalg.eigvals(G), g_eigs),
    )

    Y = dft_matrix(k)
    for matrix, eigs in ((A, a_eigs), (G, g_eigs)):
        residual = Y.conj().T @ matrix @ Y - np.diag(eigs)
        deviation = max(deviation, float(np.max(np.abs(residual))))

    system = CirculantSystem(
        k=k, n=n, a_eigs=a_eigs, g_eigs=g_eigs, c_eigs=1.0 / n + a_eigs / 2.0, dft=Y
    )
    return system, deviation


def build_circulant_system(k: int, n: float) -> CirculantSystem:
    """Eigen-data of A, G and C = I/n + A/2, cross-checked against a solver"""
    _check_order(k, n)
    system, deviation = _eigen_data(k, n)
    if deviation > EIGEN_TOL:
        raise IdentityViolationError(
            f"closed-form eigenvalues for k={k} disagree with the solver by "
            f"{deviation:.3e}"
        )
    return system


def theta_factor(system: CirculantSystem, j: int) -> ThetaFactor:
    if not 0 <= j < system.k:
        raise InvalidParameterError(f"mode index {j} outside 0..{system.k - 1}")
    d = complex(system.c_eigs[j])
    e2 = abs(complex(system.g_eigs[j])) ** 2
    return ThetaFactor(
        index=j,
        prefactor=(2.0 / system.n) / (2.0 * d + e2),
        ratio=(2.0 * d - e2) / (2.0 * d + e2),
        is_identity=e2 < EIGEN_TOL,
    )


def theta_factor_table(system: CirculantSystem) -> List[ThetaFactor]:
    return [theta_factor(system, j) for j in range(system.k)]


def theta_char_closed(system: CirculantSystem, j: int, nu: complex) -> complex:
    """Symmetric characteristic function exp(-d|nu|^2/|e|^2)/(n|e|^2)"""
    e2 = abs(complex(system.g_eigs[j])) ** 2
    if e2 < EIGEN_TOL:
        raise InvalidParameterError(f"mode {j} has a zero G eigenvalue")
    d = complex(system.c_eigs[j])
    return complex(np.exp(-d * abs(nu) ** 2 / e2) / (system.n * e2))


def series_terms(ratio: complex, tol: float = 1e-12) -> int:
    r = abs(ratio)
    if r >= RATIO_LIMIT:
        raise ConvergenceError(f"|ratio| = {r:.8f} is too close to 1 for the series")
    if r < 1e-300:
        return 21
    terms = math.ceil(math.log(tol * (1.0 - r)) / math.log(r)) + 20
    return min(max(terms, 21), MAX_SERIES_TERMS)


def theta_char_laguerre(
    factor: ThetaFactor, nu: complex, terms: Optional[int] = None
) -> complex:
    """prefactor * sum_m ratio^m exp(-|nu|^2/2) L_m(|nu|^2)"""
    terms = series_terms(factor.ratio) if terms is None else terms
    x = abs(nu) ** 2
    weight = math.exp(-0.5 * x)
    lag_prev, lag = 0.0, 1.0
    power = 1.0 + 0j
    total = 0j
    for m in range(terms):
        total += power * lag * weight
        lag_prev, lag = lag, ((2 * m + 1 - x) * lag - m * lag_prev) / (m + 1)
        power *= factor.ratio
    return complex(factor.prefactor * total)


def default_nu_grid() -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, 5)
    return (axis[:, None] + 1j * axis[None, :]).ravel()


def char_deviation(
    system: CirculantSystem, nu_grid: Optional[Iterable[complex]] = None
) -> float:
    """Largest closed-form vs series mismatch over non-identity factors"""
    grid = default_nu_grid() if nu_grid is None else np.asarray(list(nu_grid))
    worst = 0.0
    for factor in theta_factor_table(system):
        if factor.is_identity:
            continue
        for nu in grid:
            closed = theta_char_closed(system, factor.index, nu)
            series = theta_char_laguerre(factor, nu)
            worst = max(worst, abs(closed - series))
    return worst


def determinant_product(system: CirculantSystem) -> complex:
    """prod_j n (2 d_j + |e_j|^2) / 2"""
    n = system.n
    terms = n * (2.0 * system.c_eigs + np.abs(system.g_eigs) ** 2) / 2.0
    return complex(np.prod(terms))


def purity_bound(k: int, n: float) -> float:
    return 1.0 / ((n + 1.0) ** k - n**k)


def croma_bound(k: int, n: float) -> float:
    """1/((n+1)^k - n^k), after checking it against the circulant eigen-data"""
    system = build_circulant_system(k, n)
    target = (n + 1.0) ** k - n**k
    product = determinant_product(system)
    residual = abs(product - target) / target
    if residual > DET_TOL:
        raise IdentityViolationError(
            f"determinant identity off by {residual:.3e} (relative) at k={k}, n={n}"
        )
    return 1.0 / target


def verify_theta(
    k: int, n: float, nu_grid: Optional[Iterable[complex]] = None
) -> ThetaVerification:
    """Run every eigen-data, determinant and characteristic-function check"""
    _check_order(k, n)
    system, eigen_deviation = _eigen_data(k, n)
    target = (n + 1.0) ** k - n**k
    product = determinant_product(system)
    report = ThetaVerification(
        k=k,
        n=n,
        system=system,
        factors=theta_factor_table(system),
        eigen_deviation=eigen_deviation,
        det_product=product.real,
        det_target=target,
        det_residual=abs(product - target) / target,
        char_max_deviation=char_deviation(system, nu_grid),
        tolerance_det=DET_TOL,
        tolerance_char=CHAR_TOL,
    )
    if eigen_deviation > EIGEN_TOL:
        raise IdentityViolationError(
            f"closed-form eigenvalues for k={k} disagree by {eigen_deviation:.3e}"
        )
    logger.info(
        "theta checks k=%d n=%g: det residual %.2e, char deviation %.2e",
        k,
        n,
        report.det_residual,
        report.char_max_deviation,
    )
    return report


# --- Independent k-purity evaluations ----------------------------------------


def k_purity_direct(
    psi: PureState, n: float, k: int, quad: Optional[QuadratureRule] = None
) -> float:
    """Tr[N_n(|psi><psi|)^k] from the channel output"""
    rho = density_from_pure(psi)
    dim = max(psi.dim, output_cutoff(support_dim(psi), n, quad=quad))
    output = apply_classical_noise(embed(rho, dim), ClassicalNoiseSpec(n=n), quad)
    return float(np.trace(np.linalg.matrix_power(output.matrix, k)).real)


def displacement_overlaps(amplitudes: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """<psi|D(xi)|psi> for every xi, using only the occupied block"""
    support = amplitudes.size
    out = np.empty(xi.size, dtype=complex)
    for start in range(0, xi.size, CHUNK):
        block = displacement_block(xi[start : start + CHUNK], support)
        out[start : start + CHUNK] = np.einsum(
            "m,xmn,n->x", amplitudes.conj(), block, amplitudes
        )
    return out


def k_purity_via_expectation(
    psi: PureState, n: float, k: int, quad: Optional[QuadratureRule] = None
) -> float:
    """k-purity as a k-fold Gaussian average of displacement overlaps

    Uses D(-mu) D(nu) = exp(-i Im(mu nu*)) D(nu - mu), so the cyclic product
    of overlaps is the trace of the k-th power of a node-by-node matrix.
    """
    if k not in (2, 3):
        raise InvalidParameterError(f"expectation path supports k = 2 or 3, got {k}")
    if n == 0:
        return 1.0
    quad = quad or classical_quadrature(
        n, EXPECTATION_RADIAL_ORDER, EXPECTATION_ANGULAR_COUNT
    )
    amplitudes = np.array(psi.amplitudes[: support_dim(psi)])
    mu = quad.nodes

    xi = (mu[None, :] - mu[:, None]).ravel()
    overlaps = displacement_overlaps(amplitudes, xi).reshape(mu.size, mu.size)
    weyl = np.exp(-1j * np.imag(mu[:, None] * mu[None, :].conj()))
    kernel = quad.weights[:, None] * weyl * overlaps

    if k == 2:
        return float(np.real(np.sum(kernel * kernel.T)))
    return float(np.real(np.sum((kernel @ kernel) * kernel.T)))


def purity_sweep(
    n: float,
    k: int,
    count: int = 200,
    support: int = 6,
    seed: Union[int, np.random.Generator, None] = 0,
) -> np.ndarray:
    """k-purities of the outputs of `count` random pure inputs"""
    rng = np.random.default_rng(seed)
    superop = classical_noise_superoperator(n, support)
    purities = np.empty(count)
    for i in range(count):
        psi = random_pure_state(support, support, rng).amplitudes
        output = apply_superoperator(superop, np.outer(psi, psi.conj()))
        purities[i] = np.trace(np.linalg.matrix_power(output, k)).real
    return purities
