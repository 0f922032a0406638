"""Numerical searches for inputs with smaller output entropy than coherent states

Inputs are unit vectors on Fock levels 0..support_dim-1, parameterized by
2 * support_dim real numbers and normalized inside the objective. Each start
runs scipy's Nelder-Mead; starts are independent and run on a thread pool.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .bounds import min_renyi_coherent, wehrl_min
from .channels import (
    DEFAULT_ANGULAR_COUNT,
    DEFAULT_RADIAL_ORDER,
    apply_superoperator,
    classical_noise_superoperator,
    classical_quadrature,
    effective_thermal_photon,
    environment_dim,
    output_cutoff,
    propagate_gaussian,
    squeezed_gaussian,
    thermal_noise_superoperator,
)
from .config import get_settings
from .entropies import (
    husimi,
    renyi_from_spectrum,
    wehrl,
    wehrl_converged,
)
from .errors import InvalidParameterError
from .models import (
    ChannelSpec,
    ClassicalNoiseSpec,
    DensityOperator,
    GaussianMinimum,
    HusimiRule,
    Objective,
    PureState,
    SearchReport,
)

logger = logging.getLogger(__name__)

MAX_SUPPORT = 8
MAX_ITER = 2000
OBJECTIVE_TOL = 1e-9
SIMPLEX_TOL = 1e-7
# gaps above -TOL_OPT are optimizer noise, never a violation
TOL_OPT = 1e-5
VIOLATION_FACTOR = 10.0
SEARCH_RADIAL_ORDER = 40
SEARCH_ANGULAR_COUNT = 64
LOG_SQUEEZE_BOUND = 4.0
GAUSSIAN_TOL = 1e-10


def _check_search(support_dim: int, starts: int) -> None:
    if not 1 <= support_dim <= MAX_SUPPORT:
        raise InvalidParameterError(
            f"support_dim must lie in 1..{MAX_SUPPORT}, got {support_dim}"
        )
    if starts < 1:
        raise InvalidParameterError(f"starts must be >= 1, got {starts}")


def _amplitudes(x: np.ndarray) -> Optional[np.ndarray]:
    support = x.size // 2
    psi = x[:support] + 1j * x[support:]
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        return None
    return psi / norm


def _output_matrix(superop: np.ndarray, psi: np.ndarray) -> np.ndarray:
    out = apply_superoperator(superop, np.outer(psi, psi.conj()))
    out = 0.5 * (out + out.conj().T)
    return out / np.trace(out).real


def _superoperator(
    channel: ChannelSpec, support: int, refined: bool = False
) -> np.ndarray:
    """Channel tensor at default settings, or with enlarged cutoffs and quadrature"""
    if isinstance(channel, ClassicalNoiseSpec):
        if channel.n == 0 or not refined:
            return classical_noise_superoperator(channel.n, support)
        quad = classical_quadrature(channel.n).doubled()
        dim = output_cutoff(support, channel.n, quad=quad)
        dim += math.ceil(5 * (channel.n + 1))
        return classical_noise_superoperator(channel.n, support, dim, quad)
    env_dim = environment_dim(channel.N)
    if refined:
        env_dim += math.ceil(5 * (channel.N + 1))
    return thermal_noise_superoperator(channel, support, env_dim)


def renyi_objective(superop: np.ndarray, z: float) -> Callable[[np.ndarray], float]:
    def objective(x: np.ndarray) -> float:
        psi = _amplitudes(x)
        if psi is None:
            return math.inf
        eigs = np.clip(np.linalg.eigvalsh(_output_matrix(superop, psi)), 0.0, None)
        return renyi_from_spectrum(eigs / eigs.sum(), z)

    return objective


def wehrl_objective(superop: np.ndarray, noise: float) -> Callable[[np.ndarray], float]:
    """Wehrl entropy on a fixed 40 x 64 polar grid wide enough for every input"""
    support = superop.shape[2]
    rule = HusimiRule(
        radial_order=SEARCH_RADIAL_ORDER,
        angular_count=SEARCH_ANGULAR_COUNT,
        scale=math.sqrt(noise + support),
    )

    def objective(x: np.ndarray) -> float:
        psi = _amplitudes(x)
        if psi is None:
            return math.inf
        matrix = _output_matrix(superop, psi)
        rho = DensityOperator(dim=matrix.shape[0], matrix=matrix)
        return wehrl(husimi(rho, rule, check=False))

    return objective


def seeded_starts(
    support_dim: int, starts: int, seed: int, inject_coherent: bool = False
) -> List[np.ndarray]:
    """Points uniform on the unit sphere of C^support_dim, as real vectors"""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(starts):
        x = rng.standard_normal(2 * support_dim)
        points.append(x / np.linalg.norm(x))
    if inject_coherent:
        # the vacuum is the coherent state at the origin
        vacuum = np.zeros(2 * support_dim)
        vacuum[0] = 1.0
        points[0] = vacuum
    return points


def _run_start(
    objective: Callable[[np.ndarray], float], index: int, x0: np.ndarray
) -> Tuple[float, int, np.ndarray, bool]:
    result = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": MAX_ITER,
            "maxfev": 2 * MAX_ITER,
            "xatol": SIMPLEX_TOL,
            "fatol": OBJECTIVE_TOL,
            "adaptive": True,
        },
    )
    logger.debug(
        "start %d: value %.10f after %d iterations (%s)",
        index,
        result.fun,
        result.nit,
        "converged" if result.success else result.message,
    )
    return float(result.fun), index, np.asarray(result.x), bool(result.success)


def _search(
    objective: Callable[[np.ndarray], float],
    points: List[np.ndarray],
    threads: Optional[int],
) -> List[Tuple[float, int, np.ndarray, bool]]:
    threads = threads or get_settings().threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(
            pool.map(lambda item: _run_start(objective, *item), enumerate(points))
        )
    return sorted(results, key=lambda r: (r[0], r[1]))


def _is_violation(gap: float, truncation_error: float) -> bool:
    threshold = max(VIOLATION_FACTOR * truncation_error, TOL_OPT)
    if gap < -threshold:
        logger.warning(
            "gap %.3e is below -%.3e: candidate conjecture violation", gap, threshold
        )
        return True
    if gap < 0:
        logger.info("gap %.3e is within numerical noise", gap)
    return False


def _report(
    channel: ChannelSpec,
    objective: Objective,
    z: Optional[float],
    results: List[Tuple[float, int, np.ndarray, bool]],
    best_value: float,
    coherent_value: float,
    truncation_error: float,
    seed: int,
    config: dict,
) -> SearchReport:
    _, index, x, converged = results[0]
    psi = _amplitudes(x)
    gap = best_value - coherent_value
    logger.info(
        "%s search: best %.10f (start %d), coherent %.10f, gap %.3e",
        objective.value,
        best_value,
        index,
        coherent_value,
        gap,
    )
    return SearchReport(
        channel=channel,
        objective=objective,
        z=z,
        best_value=best_value,
        coherent_value=coherent_value,
        gap=gap,
        best_state=PureState(dim=psi.size, amplitudes=psi),
        starts=len(results),
        seed=seed,
        converged=converged,
        violation=_is_violation(gap, truncation_error),
        truncation_error=truncation_error,
        config=config,
    )


def _config(support_dim: int, inject_coherent: bool, output_dim: int) -> dict:
    return {
        "support_dim": support_dim,
        "inject_coherent": inject_coherent,
        "output_dim": output_dim,
        "method": "Nelder-Mead",
        "maxiter": MAX_ITER,
        "fatol": OBJECTIVE_TOL,
        "xatol": SIMPLEX_TOL,
    }


def minimize_output_renyi(
    channel: ChannelSpec,
    z: float,
    support_dim: int = 4,
    starts: int = 20,
    seed: int = 0,
    inject_coherent: bool = False,
    threads: Optional[int] = None,
) -> SearchReport:
    """Smallest output Renyi entropy over pure inputs below support_dim"""
    _check_search(support_dim, starts)
    if not z > 0:
        raise InvalidParameterError(f"Renyi order must be > 0, got {z}")

    superop = _superoperator(channel, support_dim)
    objective = renyi_objective(superop, z)
    points = seeded_starts(support_dim, starts, seed, inject_coherent)
    results = _search(objective, points, threads)

    best_value, _, best_x, _ = results[0]
    refined = renyi_objective(_superoperator(channel, support_dim, refined=True), z)
    truncation_error = abs(refined(best_x) - best_value)

    config = _config(support_dim, inject_coherent, superop.shape[0])
    if isinstance(channel, ClassicalNoiseSpec):
        config["quadrature"] = [DEFAULT_RADIAL_ORDER, DEFAULT_ANGULAR_COUNT]
    return _report(
        channel,
        Objective.RENYI,
        z,
        results,
        best_value,
        min_renyi_coherent(channel.effective_noise, z),
        truncation_error,
        seed,
        config,
    )


def minimize_output_wehrl(
    channel: ChannelSpec,
    support_dim: int = 4,
    starts: int = 20,
    seed: int = 0,
    inject_coherent: bool = False,
    threads: Optional[int] = None,
) -> SearchReport:
    """Smallest output Wehrl entropy; the winner is re-evaluated on converged grids"""
    _check_search(support_dim, starts)
    superop = _superoperator(channel, support_dim)
    noise = channel.effective_noise
    objective = wehrl_objective(superop, noise)
    points = seeded_starts(support_dim, starts, seed, inject_coherent)
    results = _search(objective, points, threads)

    psi = _amplitudes(results[0][2])
    matrix = _output_matrix(superop, psi)
    value, error = wehrl_converged(DensityOperator(dim=matrix.shape[0], matrix=matrix))

    config = _config(support_dim, inject_coherent, superop.shape[0])
    config["husimi_grid"] = [SEARCH_RADIAL_ORDER, SEARCH_ANGULAR_COUNT]
    return _report(
        channel,
        Objective.WEHRL,
        None,
        results,
        value,
        wehrl_min(noise),
        error,
        seed,
        config,
    )


# --- Gaussian inputs ---------------------------------------------------------


def gaussian_output_entropy(
    channel: ChannelSpec, z: float, s: float, phi: float = 0.0
) -> float:
    """S_z of the output of a pure squeezed input, through its thermal form"""
    output = propagate_gaussian(squeezed_gaussian(s, phi), channel)
    return min_renyi_coherent(effective_thermal_photon(output), z)


def minimize_gaussian(channel: ChannelSpec, z: float) -> GaussianMinimum:
    """Closed-form minimum over pure Gaussian inputs

    Both channels add a multiple of the identity to a scaled input
    covariance, so det(cov') = A + B (s + 1/s) with B >= 0. The thermal
    photon number sqrt(det) - 1/2 is therefore smallest at s = 1, and the
    output entropy increases with it.

    A bounded search over ln s confirms the value; it only replaces s = 1
    if it finds something strictly lower.
    """
    if not z > 0:
        raise InvalidParameterError(f"Renyi order must be > 0, got {z}")
    squeeze = 1.0
    searched = minimize_scalar(
        lambda log_s: gaussian_output_entropy(channel, z, math.exp(log_s)),
        bounds=(-LOG_SQUEEZE_BOUND, LOG_SQUEEZE_BOUND),
        method="bounded",
    )
    if searched.fun < gaussian_output_entropy(channel, z, 1.0) - GAUSSIAN_TOL:
        squeeze = math.exp(float(searched.x))
    logger.debug("squeeze search settled at s=%.6f", math.exp(float(searched.x)))
    state = squeezed_gaussian(squeeze)
    output = propagate_gaussian(state, channel)
    photons = effective_thermal_photon(output)
    return GaussianMinimum(
        value=min_renyi_coherent(photons, z),
        squeeze=squeeze,
        input_state=state,
        output_state=output,
        output_thermal_photons=photons,
    )
