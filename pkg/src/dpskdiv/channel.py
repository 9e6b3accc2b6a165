"""Diversity-branch parameterization and Doppler-derived fading correlation.

The detectors and all closed-form results depend on the channel only through
the per-branch pair (rho_i, gamma_i).  This module holds those types, their
validation, and the map from a Doppler spectrum to rho: the normalized
covariance r(tau) of the fading process, averaged by the rectangular
matched filter over two bit windows offset by j bits,

    R(j) = int_0^1 int_0^1 r(u - v + j) du dv,    rho = R(1) / R(0),

with all lags expressed in bit durations.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ConvergenceError
from .special import _j0_array

_LN2 = math.log(2.0)

RHO_QUAD_TOL = 1e-10
RHO_ORDER_CAP = 512
DEFAULT_QUAD_ORDER = 16


class Detector(enum.Enum):
    OPTIMUM = "optimum"
    SUBOPTIMUM = "suboptimum"


class SpectrumKind(enum.Enum):
    JAKES = "jakes"
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class BranchParams:
    """One diversity branch: fading correlation rho and mean SNR per bit gamma.

    gamma is linear, not dB.
    """

    rho: float
    gamma: float


@dataclass(frozen=True)
class DiversityConfig:
    """Ordered branches plus the detector that combines them."""

    branches: Tuple[BranchParams, ...]
    detector: Detector

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))


@dataclass(frozen=True)
class DopplerSpec:
    """Doppler spectrum family plus normalized bandwidth fdT.

    table: for TABULATED only, (lag, covariance) pairs with lags in bit
    durations, starting at 0 and reaching at least 2; linear interpolation
    between entries; the covariance is treated as even in the lag.
    """

    kind: SpectrumKind
    fdt: float
    table: Optional[Tuple[Tuple[float, float], ...]] = None


def validate_branches(branches: Sequence[BranchParams]) -> Tuple[BranchParams, ...]:
    branches = tuple(branches)
    if len(branches) == 0:
        raise ConfigError("L >= 1 required: branch list is empty")
    for i, br in enumerate(branches):
        rho = br.rho
        gamma = br.gamma
        if not (math.isfinite(rho) and math.isfinite(gamma)):
            raise ConfigError(f"branch {i}: non-finite parameter (rho={rho}, gamma={gamma})")
        if not 0.0 <= rho <= 1.0:
            raise ConfigError(f"branch {i}: rho={rho} outside [0, 1]")
        if gamma < 0.0:
            raise ConfigError(f"branch {i}: gamma={gamma} is negative")
    return branches


def validate_config(cfg: DiversityConfig) -> DiversityConfig:
    """Return cfg unchanged if every invariant holds, else raise ConfigError."""
    validate_branches(cfg.branches)
    if not isinstance(cfg.detector, Detector):
        raise ConfigError(f"unknown detector {cfg.detector!r}")
    return cfg


def _validate_spec(spec: DopplerSpec) -> None:
    if not isinstance(spec.kind, SpectrumKind):
        raise ConfigError(f"unknown spectrum kind {spec.kind!r}")
    if not math.isfinite(spec.fdt) or spec.fdt < 0.0:
        raise ConfigError(f"fdT={spec.fdt} must be finite and >= 0")
    if (spec.kind is SpectrumKind.TABULATED) != (spec.table is not None):
        raise ConfigError("a covariance table is required for (and only for) the tabulated spectrum")
    if spec.table is None:
        return
    if len(spec.table) < 2:
        raise ConfigError("tabulated covariance needs at least two points")
    lags = [float(p[0]) for p in spec.table]
    vals = [float(p[1]) for p in spec.table]
    if any(not (math.isfinite(l) and math.isfinite(v)) for l, v in zip(lags, vals)):
        raise ConfigError("tabulated covariance contains non-finite entries")
    if any(b <= a for a, b in zip(lags, lags[1:])):
        raise ConfigError("tabulated lags must be strictly increasing")
    if lags[0] != 0.0 or lags[-1] < 2.0:
        raise ConfigError("tabulated lags must cover [0, 2] starting at lag 0")
    if abs(vals[0] - 1.0) > 1e-12:
        raise ConfigError(f"tabulated covariance must have r(0) = 1, got {vals[0]}")
    if max(abs(v) for v in vals) > 1.0 + 1e-12:
        raise ConfigError("tabulated covariance must satisfy |r| <= 1")


def _covariance(spec: DopplerSpec):
    """Normalized covariance r(tau) as a vectorized callable of |lag in bits|."""
    fdt = spec.fdt
    if spec.kind is SpectrumKind.JAKES:
        return lambda x: _j0_array(2.0 * np.pi * fdt * x)
    if spec.kind is SpectrumKind.GAUSSIAN:
        # Gaussian spectrum with fdT read as the half-power half-width, so
        # r(tau) = exp(-(pi*fdT*tau)^2 / ln 2).
        c = (np.pi * fdt) ** 2 / _LN2
        return lambda x: np.exp(-c * np.square(x))
    if spec.kind is SpectrumKind.RECTANGULAR:
        # np.sinc includes the pi factor: r(tau) = sin(2 pi fdT tau)/(2 pi fdT tau)
        return lambda x: np.sinc(2.0 * fdt * x)
    lags = np.array([p[0] for p in spec.table], dtype=float)
    vals = np.array([p[1] for p in spec.table], dtype=float)
    return lambda x: np.interp(np.abs(x), lags, vals)


def _rho_at_order(cov, order: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    diff = u[:, None] - u[None, :]
    r0 = w @ cov(np.abs(diff)) @ w
    r1 = w @ cov(np.abs(diff + 1.0)) @ w
    return float(r1 / r0)


def rho_from_doppler(spec: DopplerSpec, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """Fading correlation coefficient rho = R(1)/R(0) for a Doppler spectrum.

    Tensor-product Gauss-Legendre quadrature on the unit square at the given
    starting order, with order doubling until successive estimates differ by
    less than 1e-10, capped at order 512.

    Parameters
    ----------
    spec : DopplerSpec
    quad_order : int
        Starting quadrature order, >= 2.

    Returns
    -------
    float
        rho, clipped to [-1, 1].

    Raises
    ------
    ConfigError
        Invalid spectrum description or quad_order < 2.
    ConvergenceError
        Tolerance not reached by the order cap; carries the last two
        estimates as .last and .previous.
    """
    _validate_spec(spec)
    quad_order = int(quad_order)
    if quad_order < 2:
        raise ConfigError(f"quad_order={quad_order} must be >= 2")
    if quad_order > RHO_ORDER_CAP:
        raise ConfigError(f"quad_order={quad_order} exceeds the order cap {RHO_ORDER_CAP}")
    cov = _covariance(spec)
    prev = _rho_at_order(cov, quad_order)
    order = quad_order
    while True:
        order *= 2
        if order > RHO_ORDER_CAP:
            raise ConvergenceError(
                f"rho quadrature not converged to {RHO_QUAD_TOL} by order {RHO_ORDER_CAP}",
                last=prev,
                previous=None,
            )
        cur = _rho_at_order(cov, order)
        if abs(cur - prev) < RHO_QUAD_TOL:
            return min(1.0, max(-1.0, cur))
        if 2 * order > RHO_ORDER_CAP:
            raise ConvergenceError(
                f"rho quadrature not converged to {RHO_QUAD_TOL} by order {RHO_ORDER_CAP}",
                last=cur,
                previous=prev,
            )
        prev = cur
