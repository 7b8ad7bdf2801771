#!/usr/bin/env python3
"""
Brute-force reference engine.

Integrals of densities are computed by adaptive Gauss-Kronrod quadrature on
transformed finite domains: scipy.integrate.quad on the line, and the
vectorized tensor-product scipy.integrate.cubature in whitened coordinates
on R^d. Lattice sums sweep outward from the mode. Only log-densities from
the core are used here, never a closed-form measure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from expfam import LATTICE, Density, FamilyMismatch, Support, Vector
from scipy import integrate, linalg

logger = logging.getLogger(__name__)

SUFFICIENT_STAT = "sufficient_stat"
EXP_CARRIER = "exp_carrier"
CARRIER = "carrier"
MOMENT_KINDS = (SUFFICIENT_STAT, EXP_CARRIER, CARRIER)

ACCEPT_FACTOR = 100.0
CUBATURE_RULE = "gk21"


class Transform(str, Enum):
    """Map used to bring a half-infinite support onto a finite interval."""

    LOG_SUBSTITUTION = "log_substitution"
    RATIONAL_MAP = "rational_map"


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Oracle tolerances and limits.

    A result that missed the requested tolerance is still returned (flagged
    ``converged=False``) while its error stays below the larger of
    ``accept_rel * |value|`` and ACCEPT_FACTOR times the requested
    tolerance; beyond that NotConverged is raised.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    transform: Transform = Transform.LOG_SUBSTITUTION
    series_term_ratio_cutoff: float = 1e-15
    series_max_terms: int = 10**6
    accept_rel: float = 1e-8
    max_dimension: int = 3

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "series_term_ratio_cutoff", "accept_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Quadrature setting '{name}' must be positive")
        for name in ("max_subdivisions", "series_max_terms", "max_dimension"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"Quadrature setting '{name}' must be at least 1")
        object.__setattr__(self, "transform", Transform(self.transform))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class OracleResult:
    """
    A brute-force value with its error estimate.

    ``value`` is a tuple only for sufficient-statistic means.
    """

    value: Union[float, Tuple[float, ...]]
    error_estimate: float
    evaluations: int
    converged: bool


class NotConverged(RuntimeError):
    """Quadrature or summation failed to reach an acceptable error."""

    def __init__(self, message: str, best_estimate: float, error_estimate: float):
        super().__init__(
            f"{message} (best estimate {best_estimate!r}, "
            f"error estimate {error_estimate!r})"
        )
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


# Takes a point (float, lattice index or R^d vector) or an (n, d) array of
# points on multivariate supports, and returns a float or an array of n.
Integrand = Callable[[Any], Any]
Frame = Tuple[Vector, np.ndarray]


def _target(value: float, cfg: QuadratureConfig) -> float:
    return max(cfg.abs_tol, cfg.rel_tol * abs(value))


def _ceiling(value: float, cfg: QuadratureConfig) -> float:
    return max(cfg.accept_rel * abs(value), ACCEPT_FACTOR * _target(value, cfg))


def _finish(
    label: str, value: float, error: float, evaluations: int, cfg: QuadratureConfig
) -> OracleResult:
    if not math.isfinite(value) or error > _ceiling(value, cfg):
        raise NotConverged(f"{label} did not converge", value, error)
    converged = error <= _target(value, cfg)
    if not converged:
        logger.warning(
            "%s reached error %.3g above the requested tolerance", label, error
        )
    return OracleResult(float(value), float(error), int(evaluations), converged)


def _real_line(s: float) -> Tuple[float, float]:
    """x = s / (1 - s^2) on (-1, 1); returns (x, dx/ds)."""
    denom = 1.0 - s * s
    return s / denom, (1.0 + s * s) / (denom * denom)


def _real_line_inverse(x: float) -> float:
    if x == 0:
        return 0.0
    return 2.0 * x / (1.0 + math.sqrt(1.0 + 4.0 * x * x))


def _line_map(
    support: Support, transform: Transform
) -> Tuple[float, float, Callable[[float], Tuple[float, float]], Callable[[float], float]]:
    """
    Return (a, b, phi, phi_inverse) with phi(s) = (x, dx/ds) on (a, b).

    (-inf, inf) always uses the rational map; [lower, inf) uses either a log
    substitution x = lower + exp(u) followed by the rational map on u, or the
    rational map x = lower + s / (1 - s).
    """
    lower, upper = support.lower, support.upper
    if math.isinf(lower) and math.isinf(upper):
        return -1.0, 1.0, _real_line, _real_line_inverse
    if math.isfinite(lower) and math.isfinite(upper):
        return lower, upper, lambda s: (s, 1.0), lambda x: x
    if math.isinf(lower):
        raise ValueError("Supports unbounded below only are not supported")

    if transform is Transform.RATIONAL_MAP:

        def half_line(s: float) -> Tuple[float, float]:
            return lower + s / (1.0 - s), 1.0 / (1.0 - s) ** 2

        return 0.0, 1.0, half_line, lambda x: (x - lower) / (1.0 + x - lower)

    def log_line(s: float) -> Tuple[float, float]:
        u, du = _real_line(s)
        if u > 700.0:
            return math.inf, math.inf
        offset = math.exp(u)
        return lower + offset, offset * du

    def log_line_inverse(x: float) -> float:
        return _real_line_inverse(math.log(x - lower))

    return -1.0, 1.0, log_line, log_line_inverse


def _quad_line(
    label: str,
    integrand: Integrand,
    support: Support,
    cfg: QuadratureConfig,
    hints: Sequence[float],
) -> OracleResult:
    a, b, phi, phi_inverse = _line_map(support, cfg.transform)

    def mapped(s: float) -> float:
        if s <= a or s >= b:
            return 0.0
        x, jac = phi(s)
        if not math.isfinite(x) or not math.isfinite(jac):
            return 0.0
        value = float(integrand(x))
        if value == 0.0:
            return 0.0
        return value * jac

    points: List[float] = []
    for hint in hints:
        if support.lower < hint < support.upper:
            s = phi_inverse(float(hint))
            if a < s < b:
                points.append(s)
    result = integrate.quad(
        mapped,
        a,
        b,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        points=sorted(set(points)) or None,
        full_output=1,
    )
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3:
        logger.debug("%s: %s", label, result[3])
    return _finish(label, value, error, info["neval"], cfg)


def _frame(densities: Sequence[Density]) -> Frame:
    """
    Center and lower Cholesky factor of the equal-weight mixture of the
    densities' first two moments; the identity frame when unavailable.
    """
    family = densities[0].family
    dim = family.support.dimension
    if family.mean_covariance is None:
        return np.zeros(dim), np.eye(dim)
    moments = [family.mean_covariance(p.vector) for p in densities]
    center = np.mean([mean for mean, _ in moments], axis=0)
    spread = np.mean(
        [cov + np.outer(mean - center, mean - center) for mean, cov in moments],
        axis=0,
    )
    return center, linalg.cholesky(0.5 * (spread + spread.T), lower=True)


def _cubature(
    label: str,
    integrand: Integrand,
    support: Support,
    cfg: QuadratureConfig,
    frame: Frame,
) -> OracleResult:
    """
    Tensor-product adaptive cubature over R^d, d <= max_dimension.

    Points are x = center + L z with z_i = s_i / (1 - s_i^2) on (-1, 1)^d,
    so a Gaussian-like integrand is near-isotropic in s.
    """
    dim = support.dimension
    if dim > cfg.max_dimension:
        raise ValueError(
            f"Oracle quadrature is limited to dimension {cfg.max_dimension}, got {dim}"
        )
    if math.isfinite(support.lower) or math.isfinite(support.upper):
        raise ValueError("Multivariate supports must be all of R^d")
    center, factor = frame
    volume = float(np.prod(np.diag(factor)))
    evaluations = 0

    def mapped(s: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        evaluations += len(s)
        square = s * s
        denom = 1.0 - square
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            jacobian = volume * np.prod((1.0 + square) / (denom * denom), axis=1)
            points = center + (s / denom) @ factor.T
            values = np.asarray(integrand(points), dtype=float) * jacobian
        return np.where(np.isfinite(values), values, 0.0)

    result = integrate.cubature(
        mapped,
        np.full(dim, -1.0),
        np.full(dim, 1.0),
        rule=CUBATURE_RULE,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_subdivisions=cfg.max_subdivisions,
    )
    if result.status != "converged":
        logger.debug("%s: cubature stopped with status %s", label, result.status)
    return _finish(
        label, float(result.estimate), float(result.error), evaluations, cfg
    )


def _lattice_sum(label: str, term: Integrand, cfg: QuadratureConfig) -> OracleResult:
    """Sum term(i) over i >= 0, sweeping outward from the mode of |term|."""
    evaluations = 0

    def magnitude(i: int) -> float:
        nonlocal evaluations
        evaluations += 1
        return abs(term(i))

    mode = 0
    current = magnitude(0)
    while mode + 1 < cfg.series_max_terms:
        following = magnitude(mode + 1)
        if following < current:
            break
        mode, current = mode + 1, following
    else:
        raise NotConverged(f"{label}: mode search hit the term cap", math.nan, math.inf)

    center = term(mode)
    partial = abs(center)

    downward = 0.0
    last_down = 0.0
    i = mode - 1
    while i >= 0:
        value = term(i)
        evaluations += 1
        downward += value
        partial += abs(value)
        last_down = abs(value)
        if last_down < cfg.series_term_ratio_cutoff * partial:
            break
        i -= 1
    remaining_down = max(i, 0)

    upward = 0.0
    previous = abs(center)
    last_up = abs(center)
    capped = True
    i = mode + 1
    while i < cfg.series_max_terms:
        value = term(i)
        evaluations += 1
        upward += value
        partial += abs(value)
        previous, last_up = last_up, abs(value)
        if last_up < cfg.series_term_ratio_cutoff * partial:
            capped = False
            break
        i += 1

    total = center + downward + upward
    ratio = last_up / previous if previous > 0 else 0.0
    tail = last_up * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
    error = tail + last_down * remaining_down
    if capped:
        raise NotConverged(f"{label}: series hit the term cap", total, error)
    return _finish(label, total, error, evaluations, cfg)


def _integrate(
    label: str,
    densities: Sequence[Density],
    integrand: Integrand,
    cfg: QuadratureConfig,
) -> OracleResult:
    family = densities[0].family
    support = family.support
    if support.kind == LATTICE:
        return _lattice_sum(label, lambda i: float(integrand(i)), cfg)
    if support.dimension > 1:
        return _cubature(label, integrand, support, cfg, _frame(densities))
    return _quad_line(
        label, integrand, support, cfg, [float(h) for h in family.omega_points]
    )


def _require_same_support(p: Density, q: Density) -> None:
    if p.family.support != q.family.support:
        raise FamilyMismatch(
            f"Densities of '{p.family.family_id}' and '{q.family.family_id}' "
            "do not share a support"
        )


def normalization(p: Density, cfg: QuadratureConfig = DEFAULT_CONFIG) -> OracleResult:
    """Integral (or sum) of p over its support."""
    return _integrate("normalization", [p], lambda x: np.exp(p.log_pdf(x)), cfg)


def integrate_product(
    p: Density, q: Density, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> OracleResult:
    """Cross informational energy: integral of p(x) q(x)."""
    _require_same_support(p, q)
    return _integrate(
        "integral of p*q",
        [p, q],
        lambda x: np.exp(p.log_pdf(x) + q.log_pdf(x)),
        cfg,
    )


def integrate_mixture_square(
    weights: Sequence[float],
    components: Sequence[Density],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> OracleResult:
    """Informational energy of sum_i w_i p_i: integral of its square."""
    if not components:
        raise ValueError("A mixture needs at least one component")
    for component in components[1:]:
        _require_same_support(components[0], component)

    def integrand(x):
        total = 0.0
        for weight, component in zip(weights, components):
            if weight:
                total = total + weight * np.exp(component.log_pdf(x))
        return total * total

    return _integrate("integral of m^2", components, integrand, cfg)


def squared_difference(
    p: Density, q: Density, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> OracleResult:
    """Integral of (p(x) - q(x))^2."""
    _require_same_support(p, q)

    def integrand(x):
        diff = np.exp(p.log_pdf(x)) - np.exp(q.log_pdf(x))
        return diff * diff

    return _integrate("integral of (p-q)^2", [p, q], integrand, cfg)


def _neg_p_log_q(p: Density, q: Density) -> Integrand:
    def integrand(x):
        log_p = np.asarray(p.log_pdf(x), dtype=float)
        inside = log_p > -np.inf
        log_q = np.where(inside, q.log_pdf(x), 0.0)
        return np.where(inside, -np.exp(log_p) * log_q, 0.0)

    return integrand


def entropy_integral(p: Density, cfg: QuadratureConfig = DEFAULT_CONFIG) -> OracleResult:
    """Shannon entropy -integral of p log p, with 0 log 0 = 0."""
    return _integrate("entropy integral", [p], _neg_p_log_q(p, p), cfg)


def cross_entropy_integral(
    p: Density, q: Density, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> OracleResult:
    """Cross-entropy -integral of p log q."""
    _require_same_support(p, q)
    return _integrate("cross-entropy integral", [p, q], _neg_p_log_q(p, q), cfg)


def power_integral(
    p: Density, exponent: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> OracleResult:
    """Integral of p(x)^exponent."""
    return _integrate(
        "integral of p^gamma",
        [p],
        lambda x: np.exp(exponent * np.asarray(p.log_pdf(x), dtype=float)),
        cfg,
    )


def holder_integral(
    p: Density,
    q: Density,
    alpha: float,
    gamma: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> OracleResult:
    """
    Holder divergence from its defining integrals:

        -log( int p^(g/a) q^(g/b) / ((int p^g)^(1/a) (int q^g)^(1/b)) )

    with conjugate exponent b = a / (a - 1).
    """
    if not alpha > 1.0 or not gamma > 0.0:
        raise ValueError(f"Holder needs alpha > 1 and gamma > 0, got {alpha}, {gamma}")
    _require_same_support(p, q)
    beta = alpha / (alpha - 1.0)
    joint = _integrate(
        "integral of p^(g/a) q^(g/b)",
        [p, q],
        lambda x: np.exp(
            gamma / alpha * np.asarray(p.log_pdf(x), dtype=float)
            + gamma / beta * np.asarray(q.log_pdf(x), dtype=float)
        ),
        cfg,
    )
    power_p = power_integral(p, gamma, cfg)
    power_q = power_integral(q, gamma, cfg)
    value = -(
        math.log(joint.value)  # type: ignore[arg-type]
        - math.log(power_p.value) / alpha  # type: ignore[arg-type]
        - math.log(power_q.value) / beta  # type: ignore[arg-type]
    )
    error = (
        joint.error_estimate / joint.value  # type: ignore[operator]
        + power_p.error_estimate / (alpha * power_p.value)  # type: ignore[operator]
        + power_q.error_estimate / (beta * power_q.value)  # type: ignore[operator]
    )
    return OracleResult(
        value,
        error,
        joint.evaluations + power_p.evaluations + power_q.evaluations,
        joint.converged and power_p.converged and power_q.converged,
    )


def moment_expectation(
    p: Density, which: str, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> OracleResult:
    """
    Expectation under p of t(x) (``sufficient_stat``), exp(k(x))
    (``exp_carrier``) or k(x) (``carrier``).
    """
    family = p.family
    if which == EXP_CARRIER:
        return _integrate(
            "E[exp(k)]",
            [p],
            lambda x: np.exp(p.log_pdf(x) + family.log_carrier(x)),
            cfg,
        )
    if which == CARRIER:
        return _integrate(
            "E[k]", [p], lambda x: np.exp(p.log_pdf(x)) * family.log_carrier(x), cfg
        )
    if which != SUFFICIENT_STAT:
        raise ValueError(f"Unknown moment '{which}'; expected one of {MOMENT_KINDS}")

    values: List[float] = []
    error = 0.0
    evaluations = 0
    converged = True
    for index in range(family.natural_dim):
        result = _integrate(f"E[t_{index}]", [p], _stat_integrand(p, index), cfg)
        values.append(result.value)  # type: ignore[arg-type]
        error = max(error, result.error_estimate)
        evaluations += result.evaluations
        converged = converged and result.converged
    return OracleResult(tuple(values), error, evaluations, converged)


def _stat_integrand(p: Density, index: int) -> Integrand:
    family = p.family

    def integrand(x):
        log_p = p.log_pdf(x)
        if np.ndim(log_p) == 0:
            if log_p == -math.inf:
                return 0.0
            return math.exp(log_p) * float(family.sufficient_statistic(x)[index])
        stats = family.statistics_of_rows(x)[:, index]
        return np.where(log_p > -np.inf, np.exp(log_p) * stats, 0.0)

    return integrand


def with_overrides(cfg: Optional[QuadratureConfig], **overrides) -> QuadratureConfig:
    """Copy of cfg (or the defaults) with the given fields replaced."""
    base = cfg or DEFAULT_CONFIG
    values = {name: getattr(base, name) for name in base.__dataclass_fields__}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return QuadratureConfig(**values)
