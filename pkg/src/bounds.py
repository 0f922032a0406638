"""Closed-form minimum output entropies and lower bounds for noisy channels

Every function takes the classical-noise parameter n; thermal-noise
channels are handled through thermal_transfer with n = (1 - eta) N.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.optimize import bisect
from scipy.special import xlogy

from .errors import IdentityViolationError, InvalidParameterError
from .models import BoundCurve, BoundId, ThermalNoiseSpec

logger = logging.getLogger(__name__)

UNIT_ORDER_TOL = 1e-6
K_MAX = 12
BRACKET = (1e-15, 1.0)
BISECT_XTOL = 1e-12
BISECT_MAXITER = 200


def _check(n: float, z: Optional[float] = None) -> None:
    if n < 0:
        raise InvalidParameterError(f"noise must be >= 0, got {n}")
    if z is not None and not z > 0:
        raise InvalidParameterError(f"Renyi order must be > 0, got {z}")


def _near_one(z: float) -> bool:
    return abs(z - 1.0) < UNIT_ORDER_TOL


# --- Exact minima ------------------------------------------------------------


def thermal_von_neumann(n: float) -> float:
    """(n+1) ln(n+1) - n ln n, the entropy of a thermal state"""
    _check(n)
    return float(xlogy(n + 1.0, n + 1.0) - xlogy(n, n))


def min_renyi_coherent(n: float, z: float) -> float:
    """ln[(n+1)^z - n^z]/(z-1), the output entropy of any coherent input"""
    _check(n, z)
    if n == 0:
        return 0.0
    if _near_one(z):
        return thermal_von_neumann(n)
    ratio = (n / (n + 1.0)) ** z
    return (z * math.log(n + 1.0) + math.log1p(-ratio)) / (z - 1.0)


def integer_min(n: float, k: int) -> float:
    """Proven minimum output Renyi entropy at integer order k >= 2"""
    if int(k) != k or k < 2:
        raise InvalidParameterError(f"integer order must be >= 2, got {k}")
    return min_renyi_coherent(n, k)


def min_entropy_limit(n: float) -> float:
    _check(n)
    return math.log(n + 1.0)


def wehrl_min(n: float) -> float:
    _check(n)
    return 1.0 + math.log(n + 1.0)


def renyi_wehrl_min(n: float, z: float) -> float:
    """ln z/(z-1) + ln(n+1)"""
    _check(n, z)
    if z < 1:
        raise InvalidParameterError(f"Renyi-Wehrl order must be >= 1, got {z}")
    if _near_one(z):
        return wehrl_min(n)
    return math.log(z) / (z - 1.0) + math.log(n + 1.0)


def renyi_wehrl_purity_cap(n: float, z: float) -> float:
    """Largest Husimi moment m_z an output of the classical-noise map can have"""
    _check(n, z)
    if z < 1:
        raise InvalidParameterError(f"order must be >= 1, got {z}")
    return 1.0 / (z * (n + 1.0) ** (z - 1.0))


def young_constant(x: float) -> float:
    """Sharp Young constant sqrt(x^(1/x) / x'^(1/x')) with 1/x + 1/x' = 1"""
    if x < 1:
        raise InvalidParameterError(f"Young exponent must be >= 1, got {x}")
    if x == 1:
        return 1.0
    conjugate = x / (x - 1.0)
    return math.sqrt(x ** (1.0 / x) / conjugate ** (1.0 / conjugate))


def young_chain_bound(n: float, z: float, p: Optional[float] = None) -> float:
    """Right-hand side of the sharp Young inequality for m_z of an output

    The input Husimi moment is replaced by its coherent-state value 1/p and
    the kernel norm is exact. p defaults to (n+1)z/(nz+1), where the chain
    equals renyi_wehrl_purity_cap.
    """
    _check(n, z)
    if n == 0:
        return 1.0 / z
    p = (n + 1.0) * z / (n * z + 1.0) if p is None else p
    inv_q = 1.0 + 1.0 / z - 1.0 / p
    if not (1.0 <= p <= z) or inv_q <= 0:
        raise InvalidParameterError(f"p={p} is not admissible for z={z}")
    q = 1.0 / inv_q

    constants = young_constant(p) * young_constant(q) / young_constant(z)
    signal = (1.0 / p) ** (z / p)
    kernel = (n ** (1.0 - q) / q) ** (z / q)
    return constants ** (2.0 * z) * signal * kernel


def wehrl_convolution_bound(n: float, lam: float) -> float:
    """lam ln n + 1 - lam ln lam - (1 - lam) ln(1 - lam), maximal at n/(n+1)"""
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError(f"lambda must lie in [0, 1], got {lam}")
    if n <= 0:
        raise InvalidParameterError(f"noise must be > 0, got {n}")
    mixing = xlogy(lam, lam) + xlogy(1.0 - lam, 1.0 - lam)
    return float(lam * math.log(n) + 1.0 - mixing)


# --- h_z and v ---------------------------------------------------------------


def _split(x: float):
    if not 0.0 < x <= 1.0:
        raise InvalidParameterError(f"argument must lie in (0, 1], got {x}")
    q = math.floor(1.0 / x)
    return max(0.0, 1.0 - q * x), q


def h_fun(x: float, z: float) -> float:
    """(1 - q x)^z + q x^z with q = floor(1/x)"""
    rest, q = _split(x)
    return rest**z + q * x**z


def v_fun(x: float) -> float:
    """Entropy of the spectrum {1 - q x, x (q times)}"""
    rest, q = _split(x)
    return float(-xlogy(rest, rest) - q * xlogy(x, x))


def _invert(func, target: float, label: str) -> float:
    lo, hi = BRACKET
    f_lo, f_hi = func(lo) - target, func(hi) - target
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise InvalidParameterError(f"{label} value {target} is outside its range")
    root = bisect(
        lambda x: func(x) - target, lo, hi, xtol=BISECT_XTOL, maxiter=BISECT_MAXITER
    )
    return float(root)


def h_inv(c: float, z: float) -> float:
    """Inverse of h_z on (0, 1]; h_z increases for z > 1 and decreases for z < 1"""
    _check(0.0, z)
    if _near_one(z):
        raise InvalidParameterError("h_1 is constant and has no inverse")
    return _invert(lambda x: h_fun(x, z), c, f"h_{z:g}")


def v_inv(y: float) -> float:
    if y < 0:
        raise InvalidParameterError(f"entropy must be >= 0, got {y}")
    return _invert(v_fun, y, "v")


def _renyi_of_split(x: float, z: float) -> float:
    """S_z of the spectrum {1 - q x, x (q times)}"""
    if _near_one(z):
        return v_fun(x)
    return -math.log(h_fun(x, z)) / (z - 1.0)


# --- Lower bounds ------------------------------------------------------------


def _validated_vn(n: float, vn_bound: Optional[float]) -> Optional[float]:
    if vn_bound is None:
        return None
    ceiling = thermal_von_neumann(n)
    if vn_bound < 0 or vn_bound > ceiling + 1e-12:
        raise InvalidParameterError(
            f"von Neumann bound {vn_bound} must lie in [0, {ceiling:.6f}] for n={n}"
        )
    return vn_bound


def lower_bound_1(n: float, z: float, vn_bound: Optional[float] = None) -> float:
    """Staircase from the integer-order minima, S_z being decreasing in z

    For z <= 1 the supplied von Neumann minimum is used when given.
    """
    _check(n, z)
    vn_bound = _validated_vn(n, vn_bound)
    if z > 1:
        return integer_min(n, max(2, math.ceil(z)))
    return integer_min(n, 2) if vn_bound is None else vn_bound


def lower_bound_2(n: float, z: float, k_max: int = K_MAX) -> float:
    """(z/(z-1)) ln((n+1)^k - n^k)/k maximized over integers 2 <= k <= min(z, k_max)

    Orders above k_max are not tried, so for z > k_max the value can sit below
    the full maximum over k <= z.
    """
    _check(n, z)
    top = min(math.floor(z), k_max)
    if z < 2 or top < 2:
        return 0.0
    factor = z / (z - 1.0)
    return max(
        factor * math.log((n + 1.0) ** k - n**k) / k for k in range(2, top + 1)
    )


def lower_bound_3_term(n: float, z: float, k: int) -> float:
    """h-path bound from the proven k-purity maximum; requires z <= k"""
    _check(n, z)
    if z > k:
        raise InvalidParameterError(f"h-path needs z <= k, got z={z}, k={k}")
    largest = h_inv(1.0 / ((n + 1.0) ** k - n**k), k)
    return _renyi_of_split(largest, z)


def lower_bound_3(
    n: float, z: float, k_max: int = K_MAX, vn_bound: Optional[float] = None
) -> float:
    """Best h-path bound over k, and the v-path bound for z <= 1"""
    _check(n, z)
    vn_bound = _validated_vn(n, vn_bound)
    candidates = [
        lower_bound_3_term(n, z, k) for k in range(max(2, math.ceil(z)), k_max + 1)
    ]
    if z <= 1 + UNIT_ORDER_TOL and vn_bound is not None:
        candidates.append(_renyi_of_split(v_inv(vn_bound), z))
    return max(candidates, default=0.0)


def lower_bound_4(n: float, z: float) -> float:
    """ln z/(z-1) + ln n, from convexity of x^z"""
    _check(n, z)
    if n == 0:
        return -math.inf
    if _near_one(z):
        return 1.0 + math.log(n)
    return math.log(z) / (z - 1.0) + math.log(n)


# --- Thermal transfer and curves ---------------------------------------------


def thermal_transfer(
    spec: ThermalNoiseSpec,
    which: BoundId,
    z: float,
    vn_bound: Optional[float] = None,
    k_max: int = K_MAX,
) -> float:
    """A classical-noise formula evaluated at the equivalent noise (1 - eta) N"""
    n = spec.effective_noise
    which = BoundId(which)
    if which is BoundId.UPPER:
        return min_renyi_coherent(n, z)
    if which is BoundId.INTEGER_MIN:
        if int(z) != z:
            raise InvalidParameterError(f"integer minimum needs integer z, got {z}")
        return integer_min(n, int(z))
    if which is BoundId.LB1:
        return lower_bound_1(n, z, vn_bound)
    if which is BoundId.LB2:
        return lower_bound_2(n, z, k_max)
    if which is BoundId.LB3:
        return lower_bound_3(n, z, k_max, vn_bound)
    if which is BoundId.LB4:
        return lower_bound_4(n, z)
    if which is BoundId.WEHRL:
        return wehrl_min(n)
    return renyi_wehrl_min(n, z)


def default_z_grid(points: int = 200) -> np.ndarray:
    return np.linspace(0.2, 12.0, points)


def figure_data(
    n: float,
    z_grid: Optional[Sequence[float]] = None,
    vn_bound: Optional[float] = None,
    k_max: int = K_MAX,
) -> BoundCurve:
    """Upper bound and lower bounds 1-4 tabulated over z"""
    if not n > 0:
        raise InvalidParameterError(f"noise must be > 0, got {n}")
    grid = default_z_grid() if z_grid is None else np.asarray(z_grid, dtype=float)
    vn_bound = _validated_vn(n, vn_bound)

    logger.debug("tabulating bounds for n=%g on %d orders", n, grid.size)
    try:
        return BoundCurve(
            n=n,
            k_max=k_max,
            z_grid=grid,
            upper=[min_renyi_coherent(n, z) for z in grid],
            lb1=[lower_bound_1(n, z, vn_bound) for z in grid],
            lb2=[lower_bound_2(n, z, k_max) for z in grid],
            lb3=[lower_bound_3(n, z, k_max, vn_bound) for z in grid],
            lb4=[lower_bound_4(n, z) for z in grid],
            s_inf=min_entropy_limit(n),
            vn_bound_used=vn_bound,
        )
    except ValidationError as e:
        raise IdentityViolationError(f"bound curves for n={n} are inconsistent: {e}")
