#!/usr/bin/env python3
"""
Exponential-family core for the Onicescu toolkit.

Densities are handled in their canonical decomposition

    p_theta(x) = exp(theta^T t(x) - F(theta) + k(x))

with the natural-parameter space represented by a domain predicate. Every
other module (catalog, measures, oracle) consumes the types defined here.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np

INTERVAL = "interval"
LATTICE = "lattice"

Vector = np.ndarray
Point = object  # float for scalar supports, ndarray for MVN


class ExpFamError(ValueError):
    """Base class for every error raised on bad families or parameters."""


class InvalidSourceParam(ExpFamError):
    """A source parameter lies outside the family's source space."""


class NotPositiveDefinite(InvalidSourceParam):
    """A covariance (or precision) matrix failed its Cholesky factorization."""


class FamilyMismatch(ExpFamError):
    """Parameters or densities from different families were combined."""


class DomainViolation(ExpFamError):
    """A combined natural parameter required by a closed form is outside Theta."""


class EnergyUndefined(DomainViolation):
    """The informational energy diverges because 2*theta is outside Theta."""


class CarrierNotZero(ExpFamError):
    """An omega-trick formula was requested for a family with k(x) != 0."""


class CatalogError(ExpFamError):
    """Unknown family name or invalid family hyperparameter."""


class InvalidOmega(ExpFamError):
    """The omega-trick evaluation point is not in the family's support."""


class NumericOverflow(ExpFamError):
    """A log-normalizer or carrier term does not fit in double precision."""


@contextmanager
def representable(family_id: str, quantity: str) -> Iterator[None]:
    """Turn an OverflowError raised inside the block into NumericOverflow."""
    try:
        yield
    except OverflowError as exc:
        raise NumericOverflow(
            f"{quantity} of family '{family_id}' overflows double precision"
        ) from exc


@dataclass(frozen=True)
class Support:
    """Support of a family: a (product of) interval(s) or the lattice {0, 1, ...}."""

    kind: str = INTERVAL
    lower: float = -math.inf
    upper: float = math.inf
    dimension: int = 1
    open_lower: bool = False
    open_upper: bool = False

    def contains(self, x: Point) -> bool:
        """Return True when x lies in the support."""
        values = np.atleast_1d(np.asarray(x, dtype=float))
        if values.shape != (self.dimension,):
            return False
        if not np.all(np.isfinite(values)):
            return False
        if self.kind == LATTICE:
            return bool(np.all(values >= 0) and np.all(values == np.floor(values)))
        above = values > self.lower if self.open_lower else values >= self.lower
        below = values < self.upper if self.open_upper else values <= self.upper
        return bool(np.all(above) and np.all(below))

    def contains_rows(self, points: np.ndarray) -> np.ndarray:
        """Row-wise membership for an (n, dimension) array of points."""
        points = np.asarray(points, dtype=float)
        inside = np.all(np.isfinite(points), axis=1)
        if self.kind == LATTICE:
            return inside & np.all((points >= 0) & (points == np.floor(points)), axis=1)
        above = points > self.lower if self.open_lower else points >= self.lower
        below = points < self.upper if self.open_upper else points <= self.upper
        return inside & np.all(above & below, axis=1)


@dataclass(frozen=True)
class SeriesSum:
    """Result of a truncated lattice series."""

    value: float
    terms: int
    truncation_bound: float
    capped: bool


@dataclass(frozen=True)
class SourceParam:
    """Parameter vector in the family's source coordinates lambda."""

    family_id: str
    coords: Tuple[float, ...]

    @property
    def vector(self) -> Vector:
        """Coordinates as a float array."""
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class NaturalParam:
    """
    Parameter vector in natural coordinates theta.

    Matrix-valued components (MVN precision) are stored flattened row-major;
    ``block_shapes`` records how to unflatten them.
    """

    family_id: str
    coords: Tuple[float, ...]
    block_shapes: Tuple[Tuple[int, ...], ...]

    @property
    def vector(self) -> Vector:
        """Coordinates as a float array."""
        return np.asarray(self.coords, dtype=float)

    def blocks(self) -> Tuple[Vector, ...]:
        """Split the flat coordinates into their declared blocks."""
        return split_blocks(self.vector, self.block_shapes)


def split_blocks(
    vector: Vector, block_shapes: Sequence[Tuple[int, ...]]
) -> Tuple[Vector, ...]:
    """Unflatten a natural-parameter vector according to block shapes."""
    blocks = []
    offset = 0
    for shape in block_shapes:
        size = int(np.prod(shape))
        blocks.append(vector[offset : offset + size].reshape(shape))
        offset += size
    return tuple(blocks)


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True, eq=False)
class FamilyDescriptor:
    """
    Immutable definition of one exponential family.

    ``name`` is the stable catalog identifier ("normal", "pareto", ...);
    ``family_id`` also encodes fixed hyperparameters (Pareto scale, MVN
    dimension) so that parameters of, say, Pareto_1 and Pareto_2 never mix.

    Multivariate families may also provide ``row_statistics`` (t(x) for an
    (n, d) array of points) and ``mean_covariance`` (first two moments of
    p_theta), which the oracle uses to integrate in whitened coordinates.
    ``jensen_gap`` evaluates (F(a) + F(b))/2 - F((a + b)/2) without the
    cancellation of the three-term difference.
    """

    name: str
    family_id: str
    natural_dim: int
    block_shapes: Tuple[Tuple[int, ...], ...]
    source_names: Tuple[str, ...]
    log_normalizer: Callable[[Vector], float]
    grad_log_normalizer: Callable[[Vector], Vector]
    to_natural_map: Callable[[Vector], Vector]
    from_natural_map: Callable[[Vector], Vector]
    validate_source: Callable[[Vector], None]
    in_domain: Callable[[Vector], bool]
    support: Support
    sufficient_statistic: Callable[[Point], Vector]
    log_carrier: Callable[[Point], float]
    source_log_density: Callable[[Vector, Point], float]
    omega_points: Tuple[Point, ...]
    has_zero_carrier: bool = True
    carrier_moment: Optional[Callable[[Vector], SeriesSum]] = None
    carrier_mean: Optional[Callable[[Vector], SeriesSum]] = None
    row_statistics: Optional[Callable[[np.ndarray], np.ndarray]] = None
    mean_covariance: Optional[Callable[[Vector], Tuple[Vector, np.ndarray]]] = None
    jensen_gap: Optional[Callable[[Vector, Vector], float]] = None

    def carrier_expectation(self, theta: Vector) -> float:
        """E_{p_theta}[exp(k(x))]; identically 1 when k == 0."""
        if self.has_zero_carrier or self.carrier_moment is None:
            return 1.0
        return self.carrier_moment(theta).value

    def carrier_entropy_term(self, theta: Vector) -> float:
        """E_{p_theta}[k(x)]; identically 0 when k == 0."""
        if self.has_zero_carrier or self.carrier_mean is None:
            return 0.0
        return self.carrier_mean(theta).value

    def log_density(self, theta: Vector, x: Point) -> float:
        """log p_theta(x), or -inf outside the support."""
        return self.log_density_given(theta, log_normalizer_at(self, theta), x)

    def log_density_given(self, theta: Vector, log_norm: float, x: Point) -> float:
        """
        log p_theta(x) with a precomputed log-normalizer.

        On a multivariate support an (n, d) array is evaluated row by row and
        an array of n log-densities is returned.
        """
        if self.support.dimension > 1 and np.ndim(x) == 2:
            return self._log_density_rows(theta, log_norm, np.asarray(x, dtype=float))
        if not self.support.contains(x):
            return -math.inf
        stat = self.sufficient_statistic(x)
        return float(np.dot(theta, stat)) - log_norm + self.log_carrier(x)

    def statistics_of_rows(self, points: np.ndarray) -> np.ndarray:
        """t(x) for each row of an (n, d) array, as an (n, natural_dim) array."""
        if self.row_statistics is not None:
            return self.row_statistics(points)
        return np.array([self.sufficient_statistic(row) for row in points])

    def _log_density_rows(self, theta: Vector, log_norm: float, points: np.ndarray):
        inside = self.support.contains_rows(points)
        with np.errstate(invalid="ignore", over="ignore"):
            values = self.statistics_of_rows(points) @ theta - log_norm
        if not self.has_zero_carrier:
            values = values + np.array([self.log_carrier(row) for row in points])
        return np.where(inside, values, -np.inf)


@dataclass(frozen=True, eq=False)
class Density:
    """A density p_theta of a family; the unit every measure operates on."""

    family: FamilyDescriptor
    theta: NaturalParam

    def __post_init__(self):
        if self.theta.family_id != self.family.family_id:
            raise FamilyMismatch(
                f"Natural parameter of family '{self.theta.family_id}' cannot "
                f"define a density of family '{self.family.family_id}'"
            )

    @property
    def vector(self) -> Vector:
        """Natural parameter as a float array."""
        return self.theta.vector

    @cached_property
    def log_norm(self) -> float:
        """F(theta), evaluated once per density."""
        return log_normalizer_at(self.family, self.vector)

    def log_pdf(self, x: Point) -> float:
        """log p_theta(x)."""
        return self.family.log_density_given(self.vector, self.log_norm, x)

    def __repr__(self) -> str:
        return f"Density({self.family.family_id}, theta={self.theta.coords})"


def log_normalizer_at(family: FamilyDescriptor, theta: Vector) -> float:
    """
    F(theta) as a finite float.

    Raises:
        NumericOverflow: If F(theta) is not representable.
    """
    with representable(family.family_id, "Log-normalizer"):
        value = float(family.log_normalizer(theta))
    if not math.isfinite(value):
        raise NumericOverflow(
            f"Log-normalizer of family '{family.family_id}' is not finite at "
            f"theta={tuple(float(v) for v in theta)}"
        )
    return value


def source_param(family: FamilyDescriptor, coords: Sequence[float]) -> SourceParam:
    """
    Build a validated source parameter.

    Raises:
        InvalidSourceParam: If the coordinates are outside the source space.
    """
    values = np.asarray(coords, dtype=float).ravel()
    if not np.all(np.isfinite(values)):
        raise InvalidSourceParam(
            f"Source parameters of family '{family.family_id}' must be finite: "
            f"{tuple(values)}"
        )
    family.validate_source(values)
    return SourceParam(family.family_id, tuple(float(v) for v in values))


def natural_param(family: FamilyDescriptor, vector: Sequence[float]) -> NaturalParam:
    """
    Build a natural parameter, checking dimension and domain membership.

    Raises:
        DomainViolation: If the vector has the wrong length or lies outside Theta.
    """
    values = np.asarray(vector, dtype=float).ravel()
    if values.shape != (family.natural_dim,):
        raise DomainViolation(
            f"Family '{family.family_id}' expects {family.natural_dim} natural "
            f"coordinates, got {values.size}"
        )
    if not family.in_domain(values):
        raise DomainViolation(
            f"theta={tuple(values)} is outside the natural parameter space of "
            f"family '{family.family_id}'"
        )
    return NaturalParam(
        family.family_id, tuple(float(v) for v in values), family.block_shapes
    )


def to_natural(family: FamilyDescriptor, lam: SourceParam) -> NaturalParam:
    """
    Map a source parameter lambda to its natural parameter theta(lambda).

    Raises:
        FamilyMismatch: If lambda belongs to another family.
        InvalidSourceParam: If lambda is outside the source space, or its
            natural parameter cannot be represented in double precision.
    """
    if lam.family_id != family.family_id:
        raise FamilyMismatch(
            f"Source parameter of family '{lam.family_id}' given to "
            f"family '{family.family_id}'"
        )
    family.validate_source(lam.vector)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        with representable(family.family_id, "Natural parameter"):
            vector = np.asarray(family.to_natural_map(lam.vector), dtype=float)
    if not np.all(np.isfinite(vector)):
        raise InvalidSourceParam(
            f"Source parameter {lam.coords} of family '{family.family_id}' maps to "
            f"theta={tuple(float(v) for v in vector)}, which cannot be represented "
            "in double precision"
        )
    return natural_param(family, vector)


def from_natural(family: FamilyDescriptor, theta: NaturalParam) -> SourceParam:
    """Inverse of to_natural."""
    if theta.family_id != family.family_id:
        raise FamilyMismatch(
            f"Natural parameter of family '{theta.family_id}' given to "
            f"family '{family.family_id}'"
        )
    return source_param(family, family.from_natural_map(theta.vector))


def density(family: FamilyDescriptor, coords: Sequence[float]) -> Density:
    """Convenience constructor: density from source coordinates."""
    return Density(family, to_natural(family, source_param(family, coords)))


def density_at(family: FamilyDescriptor, vector: Sequence[float]) -> Density:
    """Density at a raw natural-parameter vector (domain checked)."""
    return Density(family, natural_param(family, vector))


def combine(thetas: Sequence[NaturalParam], coeffs: Sequence[float]) -> Vector:
    """
    Return sum_i coeffs[i] * thetas[i] as a raw vector.

    Raises:
        FamilyMismatch: If the parameters come from different families.
        ValueError: If the coefficient count does not match.
    """
    if len(thetas) != len(coeffs):
        raise ValueError(
            f"Got {len(thetas)} parameters but {len(coeffs)} coefficients"
        )
    if not thetas:
        raise ValueError("At least one natural parameter is required")
    family_ids = {theta.family_id for theta in thetas}
    if len(family_ids) > 1:
        raise FamilyMismatch(
            f"Cannot combine parameters of families {sorted(family_ids)}"
        )
    total = np.zeros_like(thetas[0].vector)
    for theta, coeff in zip(thetas, coeffs):
        total = total + float(coeff) * theta.vector
    return total


def check_combination(
    family: FamilyDescriptor,
    thetas: Sequence[NaturalParam],
    coeffs: Sequence[float],
) -> bool:
    """Return whether sum_i coeffs[i] * thetas[i] lies in Theta."""
    for theta in thetas:
        if theta.family_id != family.family_id:
            raise FamilyMismatch(
                f"Parameter of family '{theta.family_id}' checked against "
                f"family '{family.family_id}'"
            )
    return bool(family.in_domain(combine(thetas, coeffs)))


def finite_difference_gradient(
    func: Callable[[Vector], float], theta: Vector, relative_step: float = 1e-5
) -> Vector:
    """Central-difference gradient with step relative_step * max(1, |theta_i|)."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i, value in enumerate(theta):
        step = relative_step * max(1.0, abs(value))
        forward = theta.copy()
        backward = theta.copy()
        forward[i] += step
        backward[i] -= step
        grad[i] = (func(forward) - func(backward)) / (2.0 * step)
    return grad
