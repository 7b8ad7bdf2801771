#!/usr/bin/env python3
"""
Family catalog: the eight exponential families with their canonical
decompositions, the printed energy/entropy expressions kept apart from the
generic theorem path, and per-family default parameters and grids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from expfam import (
    INTERVAL,
    LATTICE,
    CatalogError,
    EnergyUndefined,
    FamilyDescriptor,
    InvalidSourceParam,
    NotPositiveDefinite,
    SeriesSum,
    Support,
    Vector,
)
from scipy import linalg
from special import SPECIAL

logger = logging.getLogger(__name__)

FAMILY_NAMES = (
    "exponential",
    "normal",
    "mvn",
    "lognormal",
    "pareto",
    "gamma",
    "beta",
    "poisson",
)

SERIES_TERM_RATIO_CUTOFF = 1e-15
SERIES_MAX_TERMS = 10**6

LOG_PI = math.log(math.pi)
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CatalogEntry:
    """A family descriptor plus its printed closed forms and documentation."""

    descriptor: FamilyDescriptor
    source_space_doc: str
    closed_form_energy: Optional[Callable[[Vector], float]] = None
    closed_form_entropy: Optional[Callable[[Vector], float]] = None
    literal_table_energy: Optional[Callable[[Vector], float]] = None
    default_source: Tuple[float, ...] = ()
    default_grid: Tuple[Tuple[float, ...], ...] = ()

    @property
    def name(self) -> str:
        """Stable catalog identifier."""
        return self.descriptor.name


def lattice_series(
    log_term: Callable[[int], float],
    cutoff: float = SERIES_TERM_RATIO_CUTOFF,
    max_terms: int = SERIES_MAX_TERMS,
) -> SeriesSum:
    """
    Sum exp(log_term(i)) for i = 0, 1, ... in the log domain.

    Terms are assumed unimodal. Summation stops once the terms are
    decreasing and the current term falls below ``cutoff`` times the
    partial sum; a hard cap of ``max_terms`` is flagged in the result.
    """
    log_sum = -math.inf
    previous = -math.inf
    truncation_bound = 0.0
    for i in range(max_terms):
        current = log_term(i)
        log_sum = float(np.logaddexp(log_sum, current))
        decreasing = current < previous
        if decreasing and current < math.log(cutoff) + log_sum:
            ratio = math.exp(current - previous)
            truncation_bound = math.exp(current) * ratio / (1.0 - ratio)
            return SeriesSum(math.exp(log_sum), i + 1, truncation_bound, False)
        previous = current
    logger.warning(
        "Series stopped at the %d-term cap; result is a lower bound", max_terms
    )
    return SeriesSum(math.exp(log_sum), max_terms, math.inf, True)


def log_mean_gap(a: float, b: float) -> float:
    """log((a + b)/2) - (log a + log b)/2 for a, b > 0, exactly 0 at a == b."""
    root_a, root_b = math.sqrt(a), math.sqrt(b)
    return math.log1p((root_a - root_b) ** 2 / (2.0 * root_a * root_b))


def _require_positive(family: str, names: Sequence[str], values: Vector) -> None:
    for name, value in zip(names, values):
        if not value > 0:
            raise InvalidSourceParam(
                f"Family '{family}' requires {name} > 0, got {value}"
            )


def _require_size(family: str, values: Vector, size: int) -> None:
    if values.size != size:
        raise InvalidSourceParam(
            f"Family '{family}' expects {size} source coordinates, got {values.size}"
        )


def _scalar_in_domain(predicate: Callable[[Vector], bool]) -> Callable[[Vector], bool]:
    def in_domain(theta: Vector) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(np.isfinite(theta)) and predicate(theta))

    return in_domain


def make_exponential() -> CatalogEntry:
    """Exponential(lambda): t(x) = -x, theta = lambda, F(theta) = -log theta."""

    def validate(lam: Vector) -> None:
        _require_size("exponential", lam, 1)
        _require_positive("exponential", ("lambda",), lam)

    def source_log_density(lam: Vector, x) -> float:
        if not x >= 0:
            return -math.inf
        return math.log(lam[0]) - lam[0] * x

    descriptor = FamilyDescriptor(
        name="exponential",
        family_id="exponential",
        natural_dim=1,
        block_shapes=((1,),),
        source_names=("lambda",),
        log_normalizer=lambda theta: -math.log(theta[0]),
        grad_log_normalizer=lambda theta: np.array([-1.0 / theta[0]]),
        to_natural_map=lambda lam: np.array([lam[0]]),
        from_natural_map=lambda theta: np.array([theta[0]]),
        validate_source=validate,
        in_domain=_scalar_in_domain(lambda theta: theta[0] > 0),
        support=Support(INTERVAL, 0.0, math.inf),
        sufficient_statistic=lambda x: np.array([-float(x)]),
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(0.0, 1.0, 2.0),
        jensen_gap=lambda first, second: log_mean_gap(first[0], second[0]),
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="lambda > 0 (rate)",
        closed_form_energy=lambda lam: lam[0] / 2.0,
        closed_form_entropy=lambda lam: 1.0 - math.log(lam[0]),
        default_source=(2.0,),
        default_grid=((0.5,), (1.0,), (2.0,), (3.0,), (5.0,)),
    )


def _gaussian_log_normalizer(theta: Vector) -> float:
    return -theta[0] ** 2 / (4.0 * theta[1]) + 0.5 * math.log(-math.pi / theta[1])


def _gaussian_grad(theta: Vector) -> Vector:
    return np.array(
        [
            -theta[0] / (2.0 * theta[1]),
            theta[0] ** 2 / (4.0 * theta[1] ** 2) - 1.0 / (2.0 * theta[1]),
        ]
    )


def _gaussian_jensen_gap(first: Vector, second: Vector) -> float:
    """
    Jensen gap of the Gaussian log-normalizer in (x, y) = (theta_1, -theta_2):
    (x1 y2 - x2 y1)^2 / (8 y1 y2 (y1 + y2)) plus half the log-mean gap of y.
    """
    x1, y1 = first[0], -first[1]
    x2, y2 = second[0], -second[1]
    cross = x1 * y2 - x2 * y1
    return cross * cross / (8.0 * y1 * y2 * (y1 + y2)) + 0.5 * log_mean_gap(y1, y2)


def _validate_location_scale(family: str) -> Callable[[Vector], None]:
    def validate(lam: Vector) -> None:
        _require_size(family, lam, 2)
        _require_positive(family, ("sigma",), lam[1:])

    return validate


def make_normal() -> CatalogEntry:
    """Normal(mu, sigma): t(x) = (x, x^2), theta = (mu/sigma^2, -1/(2 sigma^2))."""

    def to_natural_map(lam: Vector) -> Vector:
        mu, sigma = lam
        return np.array([mu / sigma**2, -1.0 / (2.0 * sigma**2)])

    def from_natural_map(theta: Vector) -> Vector:
        variance = -1.0 / (2.0 * theta[1])
        return np.array([theta[0] * variance, math.sqrt(variance)])

    def source_log_density(lam: Vector, x) -> float:
        mu, sigma = lam
        return -0.5 * ((x - mu) / sigma) ** 2 - math.log(sigma) - 0.5 * LOG_2PI

    descriptor = FamilyDescriptor(
        name="normal",
        family_id="normal",
        natural_dim=2,
        block_shapes=((2,),),
        source_names=("mu", "sigma"),
        log_normalizer=_gaussian_log_normalizer,
        grad_log_normalizer=_gaussian_grad,
        to_natural_map=to_natural_map,
        from_natural_map=from_natural_map,
        validate_source=_validate_location_scale("normal"),
        in_domain=_scalar_in_domain(lambda theta: theta[1] < 0),
        support=Support(INTERVAL),
        sufficient_statistic=lambda x: np.array([float(x), float(x) ** 2]),
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(0.0, 1.0, -1.0),
        jensen_gap=_gaussian_jensen_gap,
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="mu real, sigma > 0 (standard deviation)",
        closed_form_energy=lambda lam: 1.0 / (2.0 * lam[1] * math.sqrt(math.pi)),
        closed_form_entropy=lambda lam: 0.5 * math.log(2.0 * math.pi * math.e * lam[1] ** 2),
        default_source=(0.0, 1.0),
        default_grid=((0.0, 1.0), (1.0, 0.5), (-2.0, 2.0), (0.5, 1.5), (3.0, 0.8)),
    )


def _cholesky(matrix: np.ndarray) -> Optional[np.ndarray]:
    """Lower Cholesky factor of the symmetric part of matrix, or None."""
    symmetric = 0.5 * (matrix + matrix.T)
    try:
        return linalg.cholesky(symmetric, lower=True)
    except linalg.LinAlgError:
        return None


def _log_det_from_cholesky(factor: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def make_mvn(d: int) -> CatalogEntry:
    """
    Multivariate normal in dimension d.

    Natural parameter theta = (Sigma^-1 mu, Sigma^-1) with t(x) = (x, -x x^T / 2);
    the precision block is stored flattened row-major.
    """
    if d < 1:
        raise CatalogError(f"MVN dimension must be >= 1, got {d}")
    family_id = f"mvn(d={d})"
    shapes = ((d,), (d, d))

    def split(theta: Vector) -> Tuple[Vector, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        precision = theta[d:].reshape(d, d)
        return theta[:d], 0.5 * (precision + precision.T)

    def split_source(lam: Vector) -> Tuple[Vector, np.ndarray]:
        return lam[:d], lam[d:].reshape(d, d)

    def validate(lam: Vector) -> None:
        _require_size(family_id, lam, d + d * d)
        _, cov = split_source(lam)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise NotPositiveDefinite(f"Covariance of '{family_id}' must be symmetric")
        if _cholesky(cov) is None:
            raise NotPositiveDefinite(
                f"Covariance of '{family_id}' is not positive-definite: "
                f"{cov.tolist()}"
            )

    def in_domain(theta: Vector) -> bool:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (d + d * d,) or not np.all(np.isfinite(theta)):
            return False
        return _cholesky(split(theta)[1]) is not None

    def log_normalizer(theta: Vector) -> float:
        linear, precision = split(theta)
        factor = _cholesky(precision)
        if factor is None:
            raise NotPositiveDefinite(
                f"Precision block of '{family_id}' is not positive-definite"
            )
        mean = linalg.cho_solve((factor, True), linear)
        return (
            0.5 * float(linear @ mean)
            - 0.5 * _log_det_from_cholesky(factor)
            + 0.5 * d * LOG_2PI
        )

    def mean_covariance(theta: Vector) -> Tuple[Vector, np.ndarray]:
        linear, precision = split(theta)
        factor = _cholesky(precision)
        if factor is None:
            raise NotPositiveDefinite(
                f"Precision block of '{family_id}' is not positive-definite"
            )
        cov = linalg.cho_solve((factor, True), np.eye(d))
        cov = 0.5 * (cov + cov.T)
        return cov @ linear, cov

    def grad_log_normalizer(theta: Vector) -> Vector:
        mean, cov = mean_covariance(theta)
        return np.concatenate([mean, (-0.5 * (cov + np.outer(mean, mean))).ravel()])

    def log_det(matrix: np.ndarray) -> float:
        factor = _cholesky(matrix)
        if factor is None:
            raise NotPositiveDefinite(f"Matrix of '{family_id}' is not positive-definite")
        return _log_det_from_cholesky(factor)

    def jensen_gap(first: Vector, second: Vector) -> float:
        # d^T (Sigma1 + Sigma2)^-1 d / 4 plus the log-det gap of the precisions
        mean1, cov1 = mean_covariance(first)
        mean2, cov2 = mean_covariance(second)
        factor = _cholesky(cov1 + cov2)
        solved = linalg.solve_triangular(factor, mean1 - mean2, lower=True)
        precision1, precision2 = split(first)[1], split(second)[1]
        return (
            0.25 * float(solved @ solved)
            + 0.5 * log_det(0.5 * (precision1 + precision2))
            - 0.25 * (log_det(precision1) + log_det(precision2))
        )

    def row_statistics(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        outer = -0.5 * points[:, :, None] * points[:, None, :]
        return np.concatenate([points, outer.reshape(len(points), d * d)], axis=1)

    def to_natural_map(lam: Vector) -> Vector:
        mu, cov = split_source(lam)
        factor = _cholesky(cov)
        precision = linalg.cho_solve((factor, True), np.eye(d))
        precision = 0.5 * (precision + precision.T)
        return np.concatenate([precision @ mu, precision.ravel()])

    def from_natural_map(theta: Vector) -> Vector:
        linear, precision = split(theta)
        factor = _cholesky(precision)
        cov = linalg.cho_solve((factor, True), np.eye(d))
        cov = 0.5 * (cov + cov.T)
        return np.concatenate([cov @ linear, cov.ravel()])

    def sufficient_statistic(x) -> Vector:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.concatenate([x, (-0.5 * np.outer(x, x)).ravel()])

    def source_log_density(lam: Vector, x) -> float:
        mu, cov = split_source(lam)
        factor = _cholesky(cov)
        residual = linalg.solve_triangular(
            factor, np.atleast_1d(x) - mu, lower=True
        )
        return (
            -0.5 * float(residual @ residual)
            - 0.5 * _log_det_from_cholesky(factor)
            - 0.5 * d * LOG_2PI
        )

    def log_det_cov(lam: Vector) -> float:
        return _log_det_from_cholesky(_cholesky(split_source(lam)[1]))

    unit = np.zeros(d)
    unit[0] = 1.0
    descriptor = FamilyDescriptor(
        name="mvn",
        family_id=family_id,
        natural_dim=d + d * d,
        block_shapes=shapes,
        source_names=("mu", "cov"),
        log_normalizer=log_normalizer,
        grad_log_normalizer=grad_log_normalizer,
        to_natural_map=to_natural_map,
        from_natural_map=from_natural_map,
        validate_source=validate,
        in_domain=in_domain,
        support=Support(INTERVAL, dimension=d),
        sufficient_statistic=sufficient_statistic,
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(np.zeros(d), unit, -unit),
        row_statistics=row_statistics,
        mean_covariance=mean_covariance,
        jensen_gap=jensen_gap,
    )
    identity = tuple(np.zeros(d)) + tuple(np.eye(d).ravel())
    grid = [identity]
    for scale, shift, corr in ((0.5, 1.0, 0.3), (2.0, -0.5, -0.2), (1.5, 0.2, 0.6)):
        cov = scale * (np.eye(d) + corr * (np.ones((d, d)) - np.eye(d)))
        grid.append(tuple(shift * np.arange(1, d + 1)) + tuple(cov.ravel()))
    grid.append(tuple(np.ones(d)) + tuple(np.diag(np.arange(1.0, d + 1.0)).ravel()))
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc=f"mu in R^{d}, cov {d}x{d} symmetric positive-definite",
        closed_form_energy=lambda lam: math.exp(
            -0.5 * d * LOG_PI - d * math.log(2.0) - 0.5 * log_det_cov(lam)
        ),
        closed_form_entropy=lambda lam: 0.5 * (d * (LOG_2PI + 1.0) + log_det_cov(lam)),
        default_source=identity,
        default_grid=tuple(tuple(float(v) for v in point) for point in grid),
    )


def make_lognormal() -> CatalogEntry:
    """
    LogNormal(mu, sigma) with t(x) = (ln x, ln^2 x).

    The -ln x carrier is folded into the linear coefficient, so
    theta = (mu/sigma^2 - 1, -1/(2 sigma^2)) and k == 0.
    """

    def to_natural_map(lam: Vector) -> Vector:
        mu, sigma = lam
        return np.array([mu / sigma**2 - 1.0, -1.0 / (2.0 * sigma**2)])

    def from_natural_map(theta: Vector) -> Vector:
        variance = -1.0 / (2.0 * theta[1])
        return np.array([(theta[0] + 1.0) * variance, math.sqrt(variance)])

    def shifted(theta: Vector) -> Vector:
        return np.array([theta[0] + 1.0, theta[1]])

    def grad(theta: Vector) -> Vector:
        return _gaussian_grad(shifted(theta))

    def sufficient_statistic(x) -> Vector:
        log_x = math.log(x)
        return np.array([log_x, log_x**2])

    def source_log_density(lam: Vector, x) -> float:
        if not x > 0:
            return -math.inf
        mu, sigma = lam
        log_x = math.log(x)
        return (
            -0.5 * ((log_x - mu) / sigma) ** 2
            - log_x
            - math.log(sigma)
            - 0.5 * LOG_2PI
        )

    descriptor = FamilyDescriptor(
        name="lognormal",
        family_id="lognormal",
        natural_dim=2,
        block_shapes=((2,),),
        source_names=("mu", "sigma"),
        log_normalizer=lambda theta: _gaussian_log_normalizer(shifted(theta)),
        grad_log_normalizer=grad,
        to_natural_map=to_natural_map,
        from_natural_map=from_natural_map,
        validate_source=_validate_location_scale("lognormal"),
        in_domain=_scalar_in_domain(lambda theta: theta[1] < 0),
        support=Support(INTERVAL, 0.0, math.inf, open_lower=True),
        sufficient_statistic=sufficient_statistic,
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(1.0, 2.0, 0.5),
        jensen_gap=lambda first, second: _gaussian_jensen_gap(
            shifted(first), shifted(second)
        ),
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="mu real, sigma > 0 (parameters of ln x)",
        closed_form_energy=lambda lam: math.exp(lam[1] ** 2 / 4.0 - lam[0])
        / (2.0 * lam[1] * math.sqrt(math.pi)),
        closed_form_entropy=lambda lam: lam[0]
        + 0.5
        + math.log(lam[1] * math.sqrt(2.0 * math.pi)),
        default_source=(0.0, 1.0),
        default_grid=((0.0, 1.0), (1.0, 0.5), (-0.5, 0.8), (0.3, 1.2), (0.5, 0.3)),
    )


def make_pareto(k: float) -> CatalogEntry:
    """
    Pareto_k(a) with fixed scale k: t(x) = -log x, theta = a + 1.

    F(theta) = -log(theta - 1) - (theta - 1) log k on Theta = (1, inf).
    """
    if not k > 0 or not math.isfinite(k):
        raise CatalogError(f"Pareto scale k must be a positive number, got {k}")
    family_id = f"pareto(k={k!r})"
    log_k = math.log(k)

    def validate(lam: Vector) -> None:
        _require_size(family_id, lam, 1)
        _require_positive(family_id, ("a",), lam)

    def source_log_density(lam: Vector, x) -> float:
        if not x >= k:
            return -math.inf
        a = lam[0]
        return math.log(a) + a * log_k - (a + 1.0) * math.log(x)

    descriptor = FamilyDescriptor(
        name="pareto",
        family_id=family_id,
        natural_dim=1,
        block_shapes=((1,),),
        source_names=("a",),
        log_normalizer=lambda theta: -math.log(theta[0] - 1.0)
        - (theta[0] - 1.0) * log_k,
        grad_log_normalizer=lambda theta: np.array([-1.0 / (theta[0] - 1.0) - log_k]),
        to_natural_map=lambda lam: np.array([lam[0] + 1.0]),
        from_natural_map=lambda theta: np.array([theta[0] - 1.0]),
        validate_source=validate,
        in_domain=_scalar_in_domain(lambda theta: theta[0] > 1.0),
        support=Support(INTERVAL, k, math.inf),
        sufficient_statistic=lambda x: np.array([-math.log(x)]),
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(k, 2.0 * k, 3.0 * k),
        jensen_gap=lambda first, second: log_mean_gap(first[0] - 1.0, second[0] - 1.0),
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc=f"a > 0 (shape); scale fixed at k={k!r}",
        closed_form_energy=lambda lam: lam[0] ** 2 / (k * (2.0 * lam[0] + 1.0)),
        closed_form_entropy=lambda lam: 1.0 + 1.0 / lam[0] + math.log(k / lam[0]),
        default_source=(1.0,),
        default_grid=((0.5,), (1.0,), (2.5,), (4.0,), (0.8,)),
    )


def make_gamma() -> CatalogEntry:
    """
    Gamma(alpha, beta) with beta a scale parameter.

    t(x) = (ln x, x), theta = (alpha - 1, -1/beta),
    F(theta) = log Gamma(theta_1 + 1) - (theta_1 + 1) log(-theta_2).
    """

    def validate(lam: Vector) -> None:
        _require_size("gamma", lam, 2)
        _require_positive("gamma", ("alpha", "beta"), lam)

    def log_normalizer(theta: Vector) -> float:
        shape = theta[0] + 1.0
        return float(SPECIAL.log_gamma(shape)) - shape * math.log(-theta[1])

    def grad(theta: Vector) -> Vector:
        shape = theta[0] + 1.0
        return np.array(
            [float(SPECIAL.digamma(shape)) - math.log(-theta[1]), -shape / theta[1]]
        )

    def jensen_gap(first: Vector, second: Vector) -> float:
        shape1, shape2 = first[0] + 1.0, second[0] + 1.0
        rate1, rate2 = -first[1], -second[1]
        log_gamma_gap = 0.5 * (
            float(SPECIAL.log_gamma(shape1)) + float(SPECIAL.log_gamma(shape2))
        ) - float(SPECIAL.log_gamma(0.5 * (shape1 + shape2)))
        rate_gap = 0.5 * shape1 * math.log1p((rate2 - rate1) / (2.0 * rate1)) + (
            0.5 * shape2 * math.log1p((rate1 - rate2) / (2.0 * rate2))
        )
        return log_gamma_gap + rate_gap

    def source_log_density(lam: Vector, x) -> float:
        if not x > 0:
            return -math.inf
        alpha, beta = lam
        return (
            (alpha - 1.0) * math.log(x)
            - x / beta
            - float(SPECIAL.log_gamma(alpha))
            - alpha * math.log(beta)
        )

    def energy(lam: Vector) -> float:
        alpha, beta = lam
        if not alpha > 0.5:
            raise EnergyUndefined(
                f"Gamma energy requires alpha > 1/2 (2*theta in Theta), got alpha={alpha}"
            )
        return math.exp(
            -math.log(beta)
            - math.log(2.0 * alpha - 1.0)
            - SPECIAL.log_beta(alpha, 0.5)
        )

    def entropy(lam: Vector) -> float:
        alpha, beta = lam
        return (
            alpha
            + math.log(beta)
            + float(SPECIAL.log_gamma(alpha))
            + (1.0 - alpha) * float(SPECIAL.digamma(alpha))
        )

    descriptor = FamilyDescriptor(
        name="gamma",
        family_id="gamma",
        natural_dim=2,
        block_shapes=((2,),),
        source_names=("alpha", "beta"),
        log_normalizer=log_normalizer,
        grad_log_normalizer=grad,
        to_natural_map=lambda lam: np.array([lam[0] - 1.0, -1.0 / lam[1]]),
        from_natural_map=lambda theta: np.array([theta[0] + 1.0, -1.0 / theta[1]]),
        validate_source=validate,
        in_domain=_scalar_in_domain(lambda theta: theta[0] > -1.0 and theta[1] < 0),
        support=Support(INTERVAL, 0.0, math.inf, open_lower=True),
        sufficient_statistic=lambda x: np.array([math.log(x), float(x)]),
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(1.0, 2.0, 0.5),
        jensen_gap=jensen_gap,
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="alpha > 0 (shape), beta > 0 (scale); energy needs alpha > 1/2",
        closed_form_energy=energy,
        closed_form_entropy=entropy,
        default_source=(2.0, 1.0),
        default_grid=((1.0, 1.0), (2.0, 1.0), (0.75, 2.0), (3.5, 0.5), (5.0, 1.5)),
    )


def make_beta() -> CatalogEntry:
    """Beta(alpha, beta): t(x) = (ln x, ln(1-x)), theta = (alpha - 1, beta - 1)."""

    def validate(lam: Vector) -> None:
        _require_size("beta", lam, 2)
        _require_positive("beta", ("alpha", "beta"), lam)

    def grad(theta: Vector) -> Vector:
        a, b = theta[0] + 1.0, theta[1] + 1.0
        total = float(SPECIAL.digamma(a + b))
        return np.array(
            [float(SPECIAL.digamma(a)) - total, float(SPECIAL.digamma(b)) - total]
        )

    def source_log_density(lam: Vector, x) -> float:
        if not 0 < x < 1:
            return -math.inf
        alpha, beta = lam
        return (
            (alpha - 1.0) * math.log(x)
            + (beta - 1.0) * math.log1p(-x)
            - SPECIAL.log_beta(alpha, beta)
        )

    def require_energy_domain(lam: Vector) -> None:
        alpha, beta = lam
        if not (alpha > 0.5 and beta > 0.5):
            raise EnergyUndefined(
                "Beta energy requires alpha > 1/2 and beta > 1/2 "
                f"(2*theta in Theta), got alpha={alpha}, beta={beta}"
            )

    def energy(lam: Vector) -> float:
        require_energy_domain(lam)
        alpha, beta = lam
        return math.exp(
            SPECIAL.log_beta(2.0 * alpha - 1.0, 2.0 * beta - 1.0)
            - 2.0 * SPECIAL.log_beta(alpha, beta)
        )

    def literal_energy(lam: Vector) -> float:
        # Printed form B^2(a,b) Gamma(2a-1) Gamma(2b-1) / Gamma(2a+2b-2).
        require_energy_domain(lam)
        alpha, beta = lam
        return math.exp(
            2.0 * SPECIAL.log_beta(alpha, beta)
            + float(SPECIAL.log_gamma(2.0 * alpha - 1.0))
            + float(SPECIAL.log_gamma(2.0 * beta - 1.0))
            - float(SPECIAL.log_gamma(2.0 * alpha + 2.0 * beta - 2.0))
        )

    def entropy(lam: Vector) -> float:
        alpha, beta = lam
        return (
            SPECIAL.log_beta(alpha, beta)
            - (alpha - 1.0) * float(SPECIAL.digamma(alpha))
            - (beta - 1.0) * float(SPECIAL.digamma(beta))
            + (alpha + beta - 2.0) * float(SPECIAL.digamma(alpha + beta))
        )

    descriptor = FamilyDescriptor(
        name="beta",
        family_id="beta",
        natural_dim=2,
        block_shapes=((2,),),
        source_names=("alpha", "beta"),
        log_normalizer=lambda theta: SPECIAL.log_beta(theta[0] + 1.0, theta[1] + 1.0),
        grad_log_normalizer=grad,
        to_natural_map=lambda lam: np.array([lam[0] - 1.0, lam[1] - 1.0]),
        from_natural_map=lambda theta: np.array([theta[0] + 1.0, theta[1] + 1.0]),
        validate_source=validate,
        in_domain=_scalar_in_domain(lambda theta: theta[0] > -1.0 and theta[1] > -1.0),
        support=Support(INTERVAL, 0.0, 1.0, open_lower=True, open_upper=True),
        sufficient_statistic=lambda x: np.array([math.log(x), math.log1p(-x)]),
        log_carrier=lambda x: 0.0,
        source_log_density=source_log_density,
        omega_points=(0.5, 0.25, 0.75),
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="alpha > 0, beta > 0; energy needs alpha, beta > 1/2",
        closed_form_energy=energy,
        closed_form_entropy=entropy,
        literal_table_energy=literal_energy,
        default_source=(1.0, 1.0),
        default_grid=((1.0, 1.0), (2.0, 2.0), (0.8, 3.0), (2.5, 1.5), (5.0, 5.0)),
    )


def _log_factorial(i: int) -> float:
    return float(SPECIAL.log_gamma(i + 1.0))


def poisson_carrier_moment(theta: Vector) -> SeriesSum:
    """E_{p_theta}[exp(k(x))] = E[1/x!] = exp(-lambda) sum lambda^i / (i!)^2."""
    lam = math.exp(theta[0])
    return lattice_series(lambda i: i * theta[0] - lam - 2.0 * _log_factorial(i))


def poisson_carrier_mean(theta: Vector) -> SeriesSum:
    """
    E_{p_theta}[k(x)] = -exp(-lambda) sum lambda^i log(i!) / i!.

    The sign is carried outside the (nonnegative) series.
    """
    lam = math.exp(theta[0])

    def log_term(i: int) -> float:
        log_fact = _log_factorial(i)
        if log_fact <= 0.0:
            return -math.inf
        return i * theta[0] - lam - log_fact + math.log(log_fact)

    series = lattice_series(log_term)
    return SeriesSum(-series.value, series.terms, series.truncation_bound, series.capped)


def make_poisson() -> CatalogEntry:
    """Poisson(lambda): t(x) = x, theta = log lambda, F = exp(theta), k(x) = -log x!."""

    def validate(lam: Vector) -> None:
        _require_size("poisson", lam, 1)
        _require_positive("poisson", ("lambda",), lam)

    def source_log_density(lam: Vector, x) -> float:
        if x < 0 or x != math.floor(x):
            return -math.inf
        return x * math.log(lam[0]) - lam[0] - _log_factorial(int(x))

    def energy(lam: Vector) -> float:
        log_lam = math.log(lam[0])
        series = lattice_series(
            lambda i: 2.0 * i * log_lam - 2.0 * lam[0] - 2.0 * _log_factorial(i)
        )
        return series.value

    def entropy(lam: Vector) -> float:
        theta = np.array([math.log(lam[0])])
        return lam[0] * (1.0 - math.log(lam[0])) - poisson_carrier_mean(theta).value

    def jensen_gap(first: Vector, second: Vector) -> float:
        # (e^a + e^b)/2 - e^((a+b)/2) = (e^(a/2) - e^(b/2))^2 / 2
        half = math.exp(0.5 * first[0]) * math.expm1(0.5 * (second[0] - first[0]))
        return 0.5 * half * half

    descriptor = FamilyDescriptor(
        name="poisson",
        family_id="poisson",
        natural_dim=1,
        block_shapes=((1,),),
        source_names=("lambda",),
        log_normalizer=lambda theta: math.exp(theta[0]),
        grad_log_normalizer=lambda theta: np.array([math.exp(theta[0])]),
        to_natural_map=lambda lam: np.array([math.log(lam[0])]),
        from_natural_map=lambda theta: np.array([math.exp(theta[0])]),
        validate_source=validate,
        in_domain=_scalar_in_domain(lambda theta: True),
        support=Support(LATTICE, 0.0, math.inf),
        sufficient_statistic=lambda x: np.array([float(x)]),
        log_carrier=lambda x: -_log_factorial(int(x)),
        source_log_density=source_log_density,
        omega_points=(0.0, 1.0, 2.0),
        has_zero_carrier=False,
        carrier_moment=poisson_carrier_moment,
        carrier_mean=poisson_carrier_mean,
        jensen_gap=jensen_gap,
    )
    return CatalogEntry(
        descriptor=descriptor,
        source_space_doc="lambda > 0 (rate)",
        closed_form_energy=energy,
        closed_form_entropy=entropy,
        default_source=(1.0,),
        default_grid=((0.5,), (1.0,), (2.0,), (4.0,), (7.5,)),
    )


def make_entry(name: str, *, d: int = 2, k: float = 1.0) -> CatalogEntry:
    """
    Build the catalog entry for a family name.

    Args:
        name: One of FAMILY_NAMES.
        d: MVN dimension.
        k: Pareto scale.

    Raises:
        CatalogError: If the name is unknown.
    """
    builders: Dict[str, Callable[[], CatalogEntry]] = {
        "exponential": make_exponential,
        "normal": make_normal,
        "mvn": lambda: make_mvn(d),
        "lognormal": make_lognormal,
        "pareto": lambda: make_pareto(k),
        "gamma": make_gamma,
        "beta": make_beta,
        "poisson": make_poisson,
    }
    if name not in builders:
        raise CatalogError(
            f"Unknown family '{name}'; expected one of {', '.join(FAMILY_NAMES)}"
        )
    return builders[name]()


def resolve_entry(
    name: str, params: Dict[str, List[float]]
) -> Tuple[CatalogEntry, Tuple[float, ...]]:
    """
    Resolve a family and its source coordinates from named parameters.

    Pareto takes its scale from ``k`` and MVN its dimension from ``mu``;
    ``cov`` defaults to the identity.

    Returns:
        The catalog entry and the flat source coordinates in declared order.

    Raises:
        CatalogError: If the family is unknown.
        InvalidSourceParam: If parameters are missing, unknown or malformed.
    """
    params = dict(params)
    options: Dict[str, float] = {}
    if name == "pareto":
        scale = params.pop("k", [1.0])
        if len(scale) != 1:
            raise InvalidSourceParam("Pareto scale 'k' must be a single number")
        options["k"] = scale[0]
    if name == "mvn":
        if "mu" not in params:
            raise InvalidSourceParam("Family 'mvn' requires parameter 'mu'")
        dim = len(params["mu"])
        params.setdefault("cov", list(np.eye(dim).ravel()))
        options["d"] = dim
    entry = make_entry(name, **options)  # type: ignore[arg-type]

    names = entry.descriptor.source_names
    unknown = sorted(set(params) - set(names))
    if unknown:
        raise InvalidSourceParam(
            f"Unknown parameter(s) {unknown} for family '{name}'; "
            f"expected {list(names)}"
        )
    coords: List[float] = []
    for param_name in names:
        if param_name not in params:
            raise InvalidSourceParam(
                f"Missing parameter '{param_name}' for family '{name}'"
            )
        coords.extend(params[param_name])
    return entry, tuple(coords)


def describe_source(entry: CatalogEntry, coords: Sequence[float]) -> Dict[str, object]:
    """Named view of source coordinates (vectors for MVN, scalars otherwise)."""
    descriptor = entry.descriptor
    if descriptor.name == "mvn":
        d = descriptor.block_shapes[0][0]
        return {"mu": list(coords[:d]), "cov": list(coords[d:])}
    described: Dict[str, object] = dict(zip(descriptor.source_names, coords))
    if descriptor.name == "pareto":
        described["k"] = descriptor.support.lower
    return described
