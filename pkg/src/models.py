from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)
from scipy.special import roots_laguerre

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-9
NORM_TOL = 1e-12
# eigenvalue positivity is only checked up to this size
POSITIVITY_CHECK_MAX_DIM = 1024


def _frozen_array(value: Any, dtype=complex) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.flags.writeable = False
    return arr


def _complex_pairs(arr: np.ndarray) -> List[List[float]]:
    return [[float(c.real), float(c.imag)] for c in np.ravel(arr)]


class ArrayModel(BaseModel):
    """Immutable model holding numpy arrays"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# --- Fock-space values -------------------------------------------------------


class PureState(ArrayModel):
    """Normalized amplitude vector on Fock levels 0..dim-1"""

    dim: int = Field(..., ge=1)
    amplitudes: np.ndarray
    tail_mass: float = Field(0.0, ge=0)

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check(self) -> "PureState":
        if self.amplitudes.shape != (self.dim,):
            raise ValueError(f"amplitudes must have shape ({self.dim},)")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm:.15f} differs from 1")
        return self

    @field_serializer("amplitudes")
    def _dump_amplitudes(self, v: np.ndarray) -> List[List[float]]:
        return _complex_pairs(v)


class DensityOperator(ArrayModel):
    """Unit-trace positive Hermitian matrix on a truncated Fock space"""

    dim: int = Field(..., ge=1)
    matrix: np.ndarray
    tail_mass: float = Field(0.0, ge=0)

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check(self) -> "DensityOperator":
        m = self.matrix
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"matrix must have shape ({self.dim}, {self.dim})")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian")
        trace = np.trace(m)
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {trace.real:.12f} differs from 1")
        if self.dim <= POSITIVITY_CHECK_MAX_DIM:
            lowest = float(np.linalg.eigvalsh(m)[0])
            if lowest < -NEGATIVITY_TOL:
                raise ValueError(f"negative eigenvalue {lowest:.3e}")
        return self

    @field_serializer("matrix")
    def _dump_matrix(self, v: np.ndarray) -> List[List[List[float]]]:
        return [_complex_pairs(row) for row in v]


class FockOperator(ArrayModel):
    """General operator on a truncated Fock space"""

    dim: int = Field(..., ge=1)
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check(self) -> "FockOperator":
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError(f"matrix must have shape ({self.dim}, {self.dim})")
        return self


# --- Channels ----------------------------------------------------------------


class ClassicalNoiseSpec(BaseModel):
    """Random Gaussian displacement channel adding n mean photons"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["classical"] = "classical"
    n: float = Field(..., ge=0)

    @property
    def effective_noise(self) -> float:
        return self.n


class ThermalNoiseSpec(BaseModel):
    """Beam-splitter coupling to a thermal environment"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["thermal"] = "thermal"
    eta: float = Field(..., ge=0, le=1)
    N: float = Field(..., ge=0)

    @property
    def effective_noise(self) -> float:
        """Classical noise of the equivalent composition (1-eta)N"""
        return (1.0 - self.eta) * self.N


ChannelSpec = Union[ClassicalNoiseSpec, ThermalNoiseSpec]


class QuadratureRule(ArrayModel):
    """Polar nodes and weights discretizing the Gaussian kernel P_n"""

    n: float = Field(..., ge=0)
    radial_order: int = Field(..., ge=1)
    angular_count: int = Field(..., ge=1)
    nodes: np.ndarray
    weights: np.ndarray

    @field_validator("nodes", mode="before")
    @classmethod
    def _nodes(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @field_validator("weights", mode="before")
    @classmethod
    def _weights(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "QuadratureRule":
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in shape")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise ValueError("quadrature weights do not integrate P_n to 1")
        return self

    @classmethod
    def build(
        cls, n: float, radial_order: int = 40, angular_count: int = 64
    ) -> "QuadratureRule":
        """Gauss-Laguerre in t = r^2/n times a uniform angular grid"""
        t, lam = roots_laguerre(radial_order)
        theta = 2.0 * np.pi * np.arange(angular_count) / angular_count
        nodes = np.sqrt(n * t)[:, None] * np.exp(1j * theta)[None, :]
        weights = np.repeat(lam[:, None] / angular_count, angular_count, axis=1)
        return cls(
            n=n,
            radial_order=radial_order,
            angular_count=angular_count,
            nodes=nodes.ravel(),
            weights=weights.ravel(),
        )

    def doubled(self) -> "QuadratureRule":
        return self.build(self.n, 2 * self.radial_order, 2 * self.angular_count)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def _grid(self, values: np.ndarray) -> np.ndarray:
        return values.reshape(self.radial_order, self.angular_count)

    @property
    def radii(self) -> np.ndarray:
        return np.abs(self._grid(self.nodes)[:, 0])

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular_count) / self.angular_count

    @property
    def grid_weights(self) -> np.ndarray:
        """Weights as a (radial, angular) array"""
        return self._grid(self.weights)


class GaussianState(ArrayModel):
    """Single-mode Gaussian state: mean <a> and (Re, Im) covariance matrix"""

    mean: complex = 0j
    cov: np.ndarray

    @field_validator("mean", mode="before")
    @classmethod
    def _mean(cls, v: Any) -> complex:
        return complex(v)

    @field_validator("cov", mode="before")
    @classmethod
    def _cov(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "GaussianState":
        c = self.cov
        if c.shape != (2, 2):
            raise ValueError("covariance must be 2x2")
        if abs(c[0, 1] - c[1, 0]) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if c[0, 0] <= 0 or np.linalg.det(c) <= 0:
            raise ValueError("covariance must be positive definite")
        if np.linalg.det(c) < 0.25 - 1e-12:
            raise ValueError("covariance violates the uncertainty principle")
        return self

    @field_serializer("mean")
    def _dump_mean(self, v: complex) -> List[float]:
        return [v.real, v.imag]

    @field_serializer("cov")
    def _dump_cov(self, v: np.ndarray) -> List[List[float]]:
        return v.tolist()


# --- Entropy fields ----------------------------------------------------------


class HusimiRule(BaseModel):
    """Polar grid: Gauss-Laguerre in r^2 against e^{-r^2}, uniform angles"""

    model_config = ConfigDict(frozen=True)

    radial_order: int = Field(80, ge=1)
    angular_count: int = Field(128, ge=1)
    center: complex = 0j
    scale: float = Field(1.0, gt=0)

    @field_validator("center", mode="before")
    @classmethod
    def _center(cls, v: Any) -> complex:
        return complex(v)

    @field_serializer("center")
    def _dump_center(self, v: complex) -> List[float]:
        return [v.real, v.imag]

    def doubled(self) -> "HusimiRule":
        return self.model_copy(
            update={
                "radial_order": 2 * self.radial_order,
                "angular_count": 2 * self.angular_count,
            }
        )


class HusimiField(ArrayModel):
    """Density values sampled on a HusimiRule; weights integrate d^2 mu"""

    rule: HusimiRule
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    @field_validator("nodes", mode="before")
    @classmethod
    def _nodes(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @field_validator("weights", "values", mode="before")
    @classmethod
    def _real(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "HusimiField":
        if not (self.nodes.shape == self.weights.shape == self.values.shape):
            raise ValueError("nodes, weights and values differ in shape")
        if np.any(self.values < 0):
            raise ValueError("density values must be non-negative")
        return self

    @property
    def normalization(self) -> float:
        return float(np.dot(self.weights, self.values))


# --- Circulant machinery -----------------------------------------------------


class CirculantSystem(ArrayModel):
    """Eigen-data of the circulant matrices A, G and C = I/n + A/2"""

    k: int = Field(..., ge=2)
    n: float = Field(..., gt=0)
    a_eigs: np.ndarray
    g_eigs: np.ndarray
    c_eigs: np.ndarray
    dft: np.ndarray

    @field_validator("a_eigs", "g_eigs", "c_eigs", "dft", mode="before")
    @classmethod
    def _arrays(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check(self) -> "CirculantSystem":
        k = self.k
        for name in ("a_eigs", "g_eigs", "c_eigs"):
            if getattr(self, name).shape != (k,):
                raise ValueError(f"{name} must have length {k}")
        if self.dft.shape != (k, k):
            raise ValueError("dft must be k x k")
        if np.max(np.abs(self.c_eigs.real - 1.0 / self.n)) > 1e-10:
            raise ValueError("C eigenvalues must have real part 1/n")
        if np.max(np.abs(self.dft.conj().T @ self.dft - np.eye(k))) > 1e-12:
            raise ValueError("dft matrix is not unitary")
        return self

    @field_serializer("a_eigs", "g_eigs", "c_eigs")
    def _dump_eigs(self, v: np.ndarray) -> List[List[float]]:
        return _complex_pairs(v)

    @field_serializer("dft")
    def _dump_dft(self, v: np.ndarray) -> List[List[List[float]]]:
        return [_complex_pairs(row) for row in v]


class ThetaFactor(BaseModel):
    """Thermal-like factor prefactor * ratio^{b^dag b} of one DFT mode"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    index: int = Field(..., ge=0)
    prefactor: complex
    ratio: complex
    is_identity: bool = False

    @field_validator("prefactor", "ratio", mode="before")
    @classmethod
    def _complex(cls, v: Any) -> complex:
        return complex(v)

    @field_serializer("prefactor", "ratio")
    def _dump(self, v: complex) -> List[float]:
        return [v.real, v.imag]


class ThetaVerification(BaseModel):
    """Outcome of the circulant/factor cross-checks for one (k, n)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int
    n: float
    system: CirculantSystem
    factors: List[ThetaFactor]
    eigen_deviation: float
    det_product: float
    det_target: float
    det_residual: float
    char_max_deviation: float
    tolerance_det: float
    tolerance_char: float

    @property
    def passed(self) -> bool:
        return (
            self.det_residual <= self.tolerance_det
            and self.char_max_deviation <= self.tolerance_char
        )


# --- Bounds ------------------------------------------------------------------


class BoundId(str, Enum):
    UPPER = "upper"
    INTEGER_MIN = "integer_min"
    LB1 = "lb1"
    LB2 = "lb2"
    LB3 = "lb3"
    LB4 = "lb4"
    WEHRL = "wehrl"
    RENYI_WEHRL = "renyi_wehrl"


class BoundCurve(ArrayModel):
    """Upper bound and lower bounds 1-4 tabulated over Renyi orders"""

    n: float = Field(..., gt=0)
    k_max: int = Field(12, ge=2)
    z_grid: np.ndarray
    upper: np.ndarray
    lb1: np.ndarray
    lb2: np.ndarray
    lb3: np.ndarray
    lb4: np.ndarray
    s_inf: float
    vn_bound_used: Optional[float] = None

    @field_validator("z_grid", "upper", "lb1", "lb2", "lb3", "lb4", mode="before")
    @classmethod
    def _arrays(cls, v: Any) -> np.ndarray:
        return _frozen_array(v, dtype=float)

    @model_validator(mode="after")
    def _check(self) -> "BoundCurve":
        shape = self.z_grid.shape
        for name in ("upper", "lb1", "lb2", "lb3", "lb4"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} does not match the z grid")
        excess = self.lb_max - self.upper
        if np.any(excess > 1e-9):
            worst = int(np.argmax(excess))
            raise ValueError(
                f"lower bound exceeds upper bound at z={self.z_grid[worst]:.6g}"
            )
        return self

    @property
    def lb_max(self) -> np.ndarray:
        return np.max(np.vstack([self.lb1, self.lb2, self.lb3, self.lb4]), axis=0)

    @field_serializer("z_grid", "upper", "lb1", "lb2", "lb3", "lb4")
    def _dump(self, v: np.ndarray) -> List[float]:
        return v.tolist()


# --- Searches ----------------------------------------------------------------


class Objective(str, Enum):
    RENYI = "renyi"
    WEHRL = "wehrl"


class SearchReport(BaseModel):
    """Best output entropy found by a multi-start search"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    channel: ChannelSpec = Field(..., discriminator="kind")
    objective: Objective
    z: Optional[float] = None
    best_value: float
    coherent_value: float
    gap: float
    best_state: PureState
    starts: int = Field(..., ge=1)
    seed: int
    converged: bool
    violation: bool = False
    truncation_error: float = Field(0.0, ge=0)
    config: Dict[str, Any] = Field(default_factory=dict)


class GaussianMinimum(BaseModel):
    """Minimum output entropy over pure Gaussian inputs"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: float
    squeeze: float = Field(..., gt=0)
    input_state: GaussianState
    output_state: GaussianState
    output_thermal_photons: float = Field(..., ge=0)
