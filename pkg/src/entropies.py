"""Entropy functionals of density operators and Husimi fields"""

import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import entr, logsumexp, roots_laguerre

from .errors import ConvergenceError, InvalidParameterError
from .fock_core import (
    annihilation,
    coherent_amplitudes,
    density_from_pure,
    expectation,
)
from .models import (
    NEGATIVITY_TOL,
    DensityOperator,
    HusimiField,
    HusimiRule,
    PureState,
)

logger = logging.getLogger(__name__)

# |z - 1| below which Renyi quantities switch to their z -> 1 limit
UNIT_ORDER_TOL = 1e-6
HUSIMI_NORM_TOL = 1e-6
WEHRL_TOL = 1e-4
# widens the Husimi grid so anisotropic states still decay against e^{-t}
HUSIMI_SCALE_FACTOR = math.sqrt(2.0)

State = Union[PureState, DensityOperator]


def _as_density(state: State) -> DensityOperator:
    return density_from_pure(state) if isinstance(state, PureState) else state


def _check_order(z: float) -> None:
    if not z > 0:
        raise InvalidParameterError(f"Renyi order must be > 0, got {z}")


# --- Spectra -----------------------------------------------------------------


def spectrum(matrix: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density matrix with truncation noise clipped to 0"""
    eigs = np.linalg.eigvalsh(matrix)
    if eigs[0] < -NEGATIVITY_TOL:
        raise InvalidParameterError(f"density matrix has eigenvalue {eigs[0]:.3e}")
    return np.clip(eigs, 0.0, None)


def renyi_from_spectrum(eigs: np.ndarray, z: float) -> float:
    if abs(z - 1.0) < UNIT_ORDER_TOL:
        return float(np.sum(entr(eigs)))
    positive = eigs[eigs > 0]
    return float(-logsumexp(z * np.log(positive)) / (z - 1.0))


def max_eigenvalue(rho: State) -> float:
    return float(spectrum(_as_density(rho).matrix)[-1])


def z_purity(rho: State, z: float, method: str = "eigen") -> float:
    """Tr[rho^z]; method "power" uses repeated products for integer z"""
    _check_order(z)
    matrix = _as_density(rho).matrix
    if method == "power":
        if int(z) != z or z < 1:
            raise InvalidParameterError(f"matrix-power path needs integer z, got {z}")
        return float(np.trace(np.linalg.matrix_power(matrix, int(z))).real)
    if method != "eigen":
        raise InvalidParameterError(f"unknown z-purity method {method!r}")
    eigs = spectrum(matrix)
    return float(np.sum(eigs[eigs > 0] ** z))


def renyi_entropy(rho: State, z: float) -> float:
    """S_z = -ln Tr[rho^z] / (z - 1), von Neumann entropy as z -> 1"""
    _check_order(z)
    return renyi_from_spectrum(spectrum(_as_density(rho).matrix), z)


def von_neumann(rho: State) -> float:
    return float(np.sum(entr(spectrum(_as_density(rho).matrix))))


def linear_entropy(rho: State) -> float:
    matrix = _as_density(rho).matrix
    return float(1.0 - np.real(np.einsum("ij,ji->", matrix, matrix)))


def min_entropy(rho: State) -> float:
    """-ln of the largest eigenvalue, the z -> infinity Renyi limit"""
    return -math.log(max_eigenvalue(rho))


# --- Husimi fields -----------------------------------------------------------


def default_husimi_rule(
    rho: State, radial_order: int = 80, angular_count: int = 128
) -> HusimiRule:
    """Grid centred on <a> with width set by <Delta a Delta a^dag>"""
    rho = _as_density(rho)
    a = annihilation(rho.dim)
    mean = expectation(rho, a)
    number = expectation(rho, a.conj().T @ a).real
    spread = max(number - abs(mean) ** 2, 0.0) + 1.0
    return HusimiRule(
        radial_order=radial_order,
        angular_count=angular_count,
        center=mean,
        scale=HUSIMI_SCALE_FACTOR * math.sqrt(spread),
    )


def husimi_grid(rule: HusimiRule) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and d^2 mu weights of a polar rule

    With mu = c + s sqrt(t) e^{i theta}, d^2 mu = (s^2 / 2) dt dtheta, so a
    Gauss-Laguerre rule in t needs the factor e^{t} restored.
    """
    t, lam = roots_laguerre(rule.radial_order)
    theta = 2.0 * np.pi * np.arange(rule.angular_count) / rule.angular_count
    nodes = rule.center + rule.scale * np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
    with np.errstate(divide="ignore", under="ignore"):
        radial = np.pi * rule.scale**2 * np.exp(np.log(lam) + t) / rule.angular_count
    weights = np.repeat(radial[:, None], rule.angular_count, axis=1)
    return nodes.ravel(), weights.ravel()


def husimi(
    rho: State, rule: Optional[HusimiRule] = None, check: bool = True
) -> HusimiField:
    """Q(mu) = <mu|rho|mu>/pi sampled on a polar rule"""
    rho = _as_density(rho)
    rule = rule or default_husimi_rule(rho)
    nodes, weights = husimi_grid(rule)

    vectors = coherent_amplitudes(nodes, rho.dim)
    values = np.real(np.sum((vectors.conj() @ rho.matrix) * vectors, axis=1))
    values = np.clip(values, 0.0, None) / np.pi

    field = HusimiField(rule=rule, nodes=nodes, weights=weights, values=values)
    if check:
        deviation = abs(field.normalization - 1.0)
        if deviation > HUSIMI_NORM_TOL:
            raise ConvergenceError(
                f"Husimi grid integrates to {field.normalization:.8f}; grid too small"
            )
    return field


def gaussian_field(variance: float, rule: Optional[HusimiRule] = None) -> HusimiField:
    """Isotropic density exp(-|mu|^2/v)/(pi v) sampled on a polar rule"""
    if variance <= 0:
        raise InvalidParameterError(f"variance must be > 0, got {variance}")
    rule = rule or HusimiRule(scale=math.sqrt(variance))
    nodes, weights = husimi_grid(rule)
    values = np.exp(-np.abs(nodes) ** 2 / variance) / (np.pi * variance)
    return HusimiField(rule=rule, nodes=nodes, weights=weights, values=values)


def wehrl(field: HusimiField) -> float:
    """-integral of Q ln(pi Q)"""
    return float(np.dot(field.weights, entr(np.pi * field.values)) / np.pi)


def wehrl_moment(field: HusimiField, z: float) -> float:
    """m_z = integral of (pi Q)^z / pi"""
    _check_order(z)
    return float(np.dot(field.weights, (np.pi * field.values) ** z) / np.pi)


def renyi_wehrl(field: HusimiField, z: float) -> float:
    if z < 1:
        raise InvalidParameterError(f"Renyi-Wehrl order must be >= 1, got {z}")
    if abs(z - 1.0) < UNIT_ORDER_TOL:
        return wehrl(field)
    return -math.log(wehrl_moment(field, z)) / (z - 1.0)


def _converged(rho: State, evaluate, tol: float, label: str) -> Tuple[float, float]:
    rho = _as_density(rho)
    rule = default_husimi_rule(rho)
    value = evaluate(husimi(rho, rule))
    refined = evaluate(husimi(rho, rule.doubled()))
    error = abs(refined - value)
    logger.debug("%s %.10f, grid-doubling change %.3e", label, refined, error)
    if error > tol:
        raise ConvergenceError(f"{label} changed by {error:.3e} when the grid doubled")
    return refined, error


def wehrl_converged(rho: State, tol: float = WEHRL_TOL) -> Tuple[float, float]:
    """Wehrl entropy on the doubled grid and its change from the default grid"""
    return _converged(rho, wehrl, tol, "Wehrl entropy")


def renyi_wehrl_converged(
    rho: State, z: float, tol: float = WEHRL_TOL
) -> Tuple[float, float]:
    return _converged(rho, lambda f: renyi_wehrl(f, z), tol, f"Renyi-Wehrl(z={z})")
