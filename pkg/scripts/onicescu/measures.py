#!/usr/bin/env python3
"""
Closed-form information measures on exponential families.

Every measure is evaluated in the log domain from the log-normalizer F and
the carrier expectations, and exponentiated last. The omega-trick variants
evaluate the same quantities as likelihood ratios at a support point, which
is valid only when the carrier term k vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import oracle
from expfam import (
    CarrierNotZero,
    Density,
    DomainViolation,
    EnergyUndefined,
    FamilyDescriptor,
    FamilyMismatch,
    InvalidOmega,
    NaturalParam,
    SourceParam,
    Vector,
    from_natural,
    log_normalizer_at,
    natural_param,
    representable,
    to_natural,
)

SIMPLEX_ATOL = 1e-12
LOG_TWO = math.log(2.0)


class Method(str, Enum):
    """How a measure value was obtained."""

    CLOSED_FORM = "closed_form"
    OMEGA_TRICK = "omega_trick"
    ORACLE = "oracle"


@dataclass(frozen=True)
class MeasureReport:
    """A named scalar result with the method used and its diagnostics."""

    name: str
    value: float
    method: Method
    valid: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view of the report."""
        return {
            "name": self.name,
            "value": self.value,
            "method": self.method.value,
            "valid": self.valid,
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True, eq=False)
class Mixture:
    """Finite mixture sum_i w_i p_i of densities from one family."""

    weights: Tuple[float, ...]
    components: Tuple[Density, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("A mixture needs at least one component")
        if len(weights) != len(self.components):
            raise ValueError(
                f"Got {len(weights)} weights for {len(self.components)} components"
            )
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > SIMPLEX_ATOL:
            raise ValueError(
                f"Mixture weights must be nonnegative and sum to 1, got {weights}"
            )
        family_ids = {component.family.family_id for component in self.components}
        if len(family_ids) > 1:
            raise FamilyMismatch(
                f"Mixture components must share one family, got {sorted(family_ids)}"
            )

    @property
    def family(self) -> FamilyDescriptor:
        """Family shared by every component."""
        return self.components[0].family


@dataclass(frozen=True)
class BoundReport:
    """Margins of the entropy/energy inequalities (all expected >= 0)."""

    entropy: float
    energy: float
    entropy_energy_margin: float
    cross_entropy: float
    cross_entropy_bound: float
    cross_entropy_margin: float
    support_energy_margin: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view of the report."""
        return dict(self.__dict__)


def _require_same_family(p: Density, q: Density) -> None:
    if p.family.family_id != q.family.family_id:
        raise FamilyMismatch(
            f"Measures need densities of one family, got '{p.family.family_id}' "
            f"and '{q.family.family_id}'"
        )


def _require_in_domain(
    family: FamilyDescriptor, vector: Vector, label: str, error=DomainViolation
) -> None:
    if not family.in_domain(vector):
        raise error(
            f"{label} = {tuple(float(v) for v in vector)} is outside the natural "
            f"parameter space of family '{family.family_id}'"
        )


def _require_zero_carrier(family: FamilyDescriptor, measure: str) -> None:
    if not family.has_zero_carrier:
        raise CarrierNotZero(
            f"{measure} uses the omega-trick, which needs k(x) = 0; family "
            f"'{family.family_id}' has a carrier term"
        )


def _ordered(p: Density, q: Density) -> Tuple[Density, Density]:
    """Canonical argument order (lexicographic on coords) for exact symmetry."""
    return (p, q) if p.theta.coords <= q.theta.coords else (q, p)


def _log_carrier(
    family: FamilyDescriptor, theta: Vector, diagnostics: Dict[str, Any], key: str
) -> float:
    if family.has_zero_carrier or family.carrier_moment is None:
        return 0.0
    with representable(family.family_id, "Carrier expectation"):
        series = family.carrier_moment(theta)
    diagnostics[f"{key}_series_terms"] = series.terms
    diagnostics[f"{key}_truncation_bound"] = series.truncation_bound
    if series.capped:
        diagnostics[f"{key}_series_capped"] = True
    return math.log(series.value)


def _log_normalizer(family: FamilyDescriptor, theta: Vector) -> float:
    return log_normalizer_at(family, theta)


def _gap(family: FamilyDescriptor, first: Vector, second: Vector) -> float:
    if family.jensen_gap is None:
        return 0.5 * (
            _log_normalizer(family, first) + _log_normalizer(family, second)
        ) - _log_normalizer(family, 0.5 * (first + second))
    with representable(family.family_id, "Jensen gap"):
        return float(family.jensen_gap(first, second))


def log_energy(p: Density, diagnostics: Optional[Dict[str, Any]] = None) -> float:
    """log I(p) = F(2 theta) - 2 F(theta) + log E_{p_2theta}[exp(k)]."""
    diagnostics = {} if diagnostics is None else diagnostics
    family = p.family
    doubled = 2.0 * p.vector
    _require_in_domain(family, doubled, "2*theta", EnergyUndefined)
    return (
        _log_normalizer(family, doubled)
        - 2.0 * p.log_norm
        + _log_carrier(family, doubled, diagnostics, "carrier")
    )


def log_cross_energy(
    p: Density, q: Density, diagnostics: Optional[Dict[str, Any]] = None
) -> float:
    """log I(p, q) = F(theta1 + theta2) - F(theta1) - F(theta2) + log carrier."""
    diagnostics = {} if diagnostics is None else diagnostics
    _require_same_family(p, q)
    first, second = _ordered(p, q)
    family = first.family
    total = first.vector + second.vector
    _require_in_domain(family, total, "theta1+theta2")
    return (
        _log_normalizer(family, total)
        - first.log_norm
        - second.log_norm
        + _log_carrier(family, total, diagnostics, "carrier")
    )


def energy(p: Density) -> MeasureReport:
    """
    Onicescu's informational energy I(p) = integral of p^2.

    Raises:
        EnergyUndefined: If 2*theta is outside Theta (a DomainViolation).
    """
    diagnostics: Dict[str, Any] = {}
    value = math.exp(log_energy(p, diagnostics))
    return MeasureReport("energy", value, Method.CLOSED_FORM, True, diagnostics)


def cross_energy(p: Density, q: Density) -> MeasureReport:
    """Cross informational energy I(p, q) = integral of p q."""
    diagnostics: Dict[str, Any] = {}
    value = math.exp(log_cross_energy(p, q, diagnostics))
    return MeasureReport("cross_energy", value, Method.CLOSED_FORM, True, diagnostics)


def jensen_gap(family: FamilyDescriptor, first: Vector, second: Vector) -> float:
    """
    J_F(a, b) = (F(a) + F(b))/2 - F((a + b)/2) on raw vectors.

    Families with a ``jensen_gap`` hook keep full relative precision for
    nearby parameters at large |theta|; for the others (Beta) the absolute
    error is about machine epsilon times |F|.
    """
    for label, vector in (("theta1", first), ("theta2", second)):
        _require_in_domain(family, vector, label)
    _require_in_domain(family, 0.5 * (first + second), "(theta1+theta2)/2")
    return _gap(family, first, second)


def jensen_F(
    family: FamilyDescriptor, theta1: NaturalParam, theta2: NaturalParam
) -> float:
    """Jensen divergence of the log-normalizer between two natural parameters."""
    for theta in (theta1, theta2):
        if theta.family_id != family.family_id:
            raise FamilyMismatch(
                f"Parameter of family '{theta.family_id}' given to "
                f"family '{family.family_id}'"
            )
    return jensen_gap(family, theta1.vector, theta2.vector)


def _log_correlation(p: Density, q: Density, diagnostics: Dict[str, Any]) -> float:
    _require_same_family(p, q)
    first, second = _ordered(p, q)
    family = first.family
    doubled1, doubled2 = 2.0 * first.vector, 2.0 * second.vector
    total = first.vector + second.vector
    _require_in_domain(family, doubled1, "2*theta1")
    _require_in_domain(family, doubled2, "2*theta2")
    _require_in_domain(family, total, "theta1+theta2")
    gap = _gap(family, doubled1, doubled2)
    carrier = _log_carrier(family, total, diagnostics, "carrier_sum") - 0.5 * (
        _log_carrier(family, doubled1, diagnostics, "carrier_first")
        + _log_carrier(family, doubled2, diagnostics, "carrier_second")
    )
    diagnostics["jensen_gap"] = gap
    return carrier - gap


def correlation(p: Density, q: Density) -> MeasureReport:
    """
    Onicescu's correlation coefficient rho(p, q) = I(p, q) / sqrt(I(p) I(q)),
    as exp(-J_F(2 theta1 : 2 theta2)) times the carrier ratio.
    """
    diagnostics: Dict[str, Any] = {}
    value = math.exp(_log_correlation(p, q, diagnostics))
    return MeasureReport("correlation", value, Method.CLOSED_FORM, True, diagnostics)


def cauchy_schwarz(p: Density, q: Density) -> MeasureReport:
    """Cauchy-Schwarz divergence D_CS(p, q) = -log rho(p, q)."""
    diagnostics: Dict[str, Any] = {}
    value = 0.0 - _log_correlation(p, q, diagnostics)
    return MeasureReport(
        "cauchy_schwarz", value, Method.CLOSED_FORM, True, diagnostics
    )


def _omega_log_density(family: FamilyDescriptor, theta: Vector, omega) -> float:
    return family.log_density(theta, omega)


def _require_omega(family: FamilyDescriptor, omega) -> None:
    if not family.support.contains(omega):
        raise InvalidOmega(
            f"omega={omega!r} is not in the support of family '{family.family_id}'"
        )


def _default_omega(family: FamilyDescriptor, omega):
    return family.omega_points[0] if omega is None else omega


def energy_omega(p: Density, omega=None) -> float:
    """I(p) = p_theta(omega)^2 / p_2theta(omega), for k = 0."""
    family = p.family
    _require_zero_carrier(family, "energy_omega")
    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    doubled = 2.0 * p.vector
    _require_in_domain(family, doubled, "2*theta", EnergyUndefined)
    return math.exp(
        2.0 * p.log_pdf(omega) - _omega_log_density(family, doubled, omega)
    )


def cross_energy_omega(p: Density, q: Density, omega=None) -> float:
    """I(p, q) = p_theta1(omega) p_theta2(omega) / p_(theta1+theta2)(omega), for k = 0."""
    _require_same_family(p, q)
    first, second = _ordered(p, q)
    family = first.family
    _require_zero_carrier(family, "cross_energy_omega")
    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    total = first.vector + second.vector
    _require_in_domain(family, total, "theta1+theta2")
    return math.exp(
        first.log_pdf(omega)
        + second.log_pdf(omega)
        - _omega_log_density(family, total, omega)
    )


def cauchy_schwarz_omega(p: Density, q: Density, omega=None) -> float:
    """D_CS = l_(theta1+theta2)(omega) - (l_2theta1(omega) + l_2theta2(omega)) / 2."""
    _require_same_family(p, q)
    first, second = _ordered(p, q)
    family = first.family
    _require_zero_carrier(family, "cauchy_schwarz_omega")
    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    doubled1, doubled2 = 2.0 * first.vector, 2.0 * second.vector
    total = first.vector + second.vector
    _require_in_domain(family, doubled1, "2*theta1")
    _require_in_domain(family, doubled2, "2*theta2")
    _require_in_domain(family, total, "theta1+theta2")
    return _omega_log_density(family, total, omega) - 0.5 * (
        _omega_log_density(family, doubled1, omega)
        + _omega_log_density(family, doubled2, omega)
    )


def correlation_omega(p: Density, q: Density, omega=None) -> float:
    """rho = sqrt(p_2theta1(omega) p_2theta2(omega)) / p_(theta1+theta2)(omega)."""
    return math.exp(-cauchy_schwarz_omega(p, q, omega))


def energy_source_omega(family: FamilyDescriptor, lam: SourceParam, omega=None) -> float:
    """
    Energy computed from source parameters only: p_lam(omega)^2 / p_lam2(omega)
    with lam2 the source parameter of 2*theta(lam).
    """
    _require_zero_carrier(family, "energy_source_omega")
    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    doubled = 2.0 * to_natural(family, lam).vector
    _require_in_domain(family, doubled, "2*theta", EnergyUndefined)
    lam2 = from_natural(family, natural_param(family, doubled))
    return math.exp(
        2.0 * family.source_log_density(lam.vector, omega)
        - family.source_log_density(lam2.vector, omega)
    )


def cauchy_schwarz_source_omega(
    family: FamilyDescriptor, lam1: SourceParam, lam2: SourceParam, omega=None
) -> float:
    """
    D_CS = log( p_lam12(omega) / sqrt(p_lam11(omega) p_lam22(omega)) ) where
    lam11, lam22, lam12 are the source parameters of 2 theta1, 2 theta2 and
    theta1 + theta2.
    """
    _require_zero_carrier(family, "cauchy_schwarz_source_omega")
    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    theta1 = to_natural(family, lam1).vector
    theta2 = to_natural(family, lam2).vector

    def source_at(vector: Vector, label: str) -> Vector:
        _require_in_domain(family, vector, label)
        return from_natural(family, natural_param(family, vector)).vector

    lam11 = source_at(2.0 * theta1, "2*theta1")
    lam22 = source_at(2.0 * theta2, "2*theta2")
    lam12 = source_at(theta1 + theta2, "theta1+theta2")
    return family.source_log_density(lam12, omega) - 0.5 * (
        family.source_log_density(lam11, omega)
        + family.source_log_density(lam22, omega)
    )


def _holder_parameters(
    p: Density, q: Density, alpha: float, gamma: float
) -> Tuple[float, Vector, Vector, Vector]:
    _require_same_family(p, q)
    if not alpha > 1.0:
        raise DomainViolation(f"Holder divergence needs alpha > 1, got {alpha}")
    if not gamma > 0.0:
        raise DomainViolation(f"Holder divergence needs gamma > 0, got {gamma}")
    family = p.family
    beta = alpha / (alpha - 1.0)
    scaled1 = gamma * p.vector
    scaled2 = gamma * q.vector
    mixed = (gamma / alpha) * p.vector + (gamma / beta) * q.vector
    _require_in_domain(family, scaled1, "gamma*theta1")
    _require_in_domain(family, scaled2, "gamma*theta2")
    _require_in_domain(family, mixed, "(gamma/alpha)*theta1+(gamma/beta)*theta2")
    return beta, scaled1, scaled2, mixed


def holder(
    p: Density,
    q: Density,
    alpha: float,
    gamma: float,
    omega=None,
    use_omega: bool = True,
) -> MeasureReport:
    """
    Holder divergence with conjugate exponents 1/alpha + 1/beta = 1:

        D = l_mixed(omega) - l_(gamma theta1)(omega) / alpha
            - l_(gamma theta2)(omega) / beta

    with mixed = (gamma/alpha) theta1 + (gamma/beta) theta2. With
    ``use_omega=False`` the equivalent log-normalizer form
    F(gamma theta1)/alpha + F(gamma theta2)/beta - F(mixed) is used.
    Restricted to families with k = 0.
    """
    family = p.family
    _require_zero_carrier(family, "holder")
    beta, scaled1, scaled2, mixed = _holder_parameters(p, q, alpha, gamma)
    diagnostics: Dict[str, Any] = {"alpha": alpha, "beta": beta, "gamma": gamma}
    if not use_omega:
        value = (
            _log_normalizer(family, scaled1) / alpha
            + _log_normalizer(family, scaled2) / beta
            - _log_normalizer(family, mixed)
        )
        return MeasureReport("holder", value, Method.CLOSED_FORM, True, diagnostics)

    omega = _default_omega(family, omega)
    _require_omega(family, omega)
    diagnostics["omega"] = _jsonable_point(omega)
    value = (
        _omega_log_density(family, mixed, omega)
        - _omega_log_density(family, scaled1, omega) / alpha
        - _omega_log_density(family, scaled2, omega) / beta
    )
    return MeasureReport("holder", value, Method.OMEGA_TRICK, True, diagnostics)


def _jsonable_point(point) -> Any:
    values = np.atleast_1d(np.asarray(point, dtype=float))
    return float(values[0]) if values.size == 1 else [float(v) for v in values]


def shannon_entropy(p: Density) -> MeasureReport:
    """H(p) = F(theta) - theta^T grad F(theta) - E_p[k(x)]."""
    family = p.family
    theta = p.vector
    diagnostics: Dict[str, Any] = {}
    carrier = 0.0
    if not family.has_zero_carrier and family.carrier_mean is not None:
        with representable(family.family_id, "Carrier mean"):
            series = family.carrier_mean(theta)
        carrier = series.value
        diagnostics["carrier_series_terms"] = series.terms
        diagnostics["carrier_truncation_bound"] = series.truncation_bound
        if series.capped:
            diagnostics["carrier_series_capped"] = True
    eta = np.asarray(family.grad_log_normalizer(theta), dtype=float)
    value = p.log_norm - float(np.dot(theta, eta)) - carrier
    return MeasureReport("entropy", value, Method.CLOSED_FORM, True, diagnostics)


def legendre_entropy(p: Density) -> float:
    """H(p) = -F*(eta) - E_p[k] with F*(eta) = theta^T eta - F(theta), eta = grad F."""
    family = p.family
    theta = p.vector
    eta = np.asarray(family.grad_log_normalizer(theta), dtype=float)
    conjugate = float(np.dot(theta, eta)) - p.log_norm
    with representable(family.family_id, "Carrier mean"):
        carrier = family.carrier_entropy_term(theta)
    return -conjugate - carrier


def renyi2(p: Density) -> float:
    """Renyi entropy of order 2: -log I(p)."""
    return -log_energy(p)


def vajda2(p: Density) -> float:
    """Vajda's quadratic entropy: 1 - I(p)."""
    return 1.0 - energy(p).value


def energy_jensen_divergence(p: Density, q: Density) -> MeasureReport:
    """
    J_I(p, q) = (I(p) + I(q))/2 - I((p + q)/2) = (I(p) + I(q) - 2 I(p, q)) / 4.
    """
    _require_same_family(p, q)
    energy_p = energy(p).value
    energy_q = energy(q).value
    cross = cross_energy(p, q).value
    value = 0.25 * (energy_p + energy_q - 2.0 * cross)
    diagnostics = {"energy_p": energy_p, "energy_q": energy_q, "cross_energy": cross}
    return MeasureReport(
        "energy_jensen_divergence", value, Method.CLOSED_FORM, True, diagnostics
    )


def mixture_energy(m: Mixture) -> MeasureReport:
    """I(m) = sum_i sum_j w_i w_j I(p_i, p_j), summed in index order."""
    size = len(m.components)
    cross = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            try:
                cross[i, j] = math.exp(log_cross_energy(m.components[i], m.components[j]))
            except DomainViolation as exc:
                raise DomainViolation(f"Mixture components ({i}, {j}): {exc}") from exc
            cross[j, i] = cross[i, j]
    value = 0.0
    for i in range(size):
        for j in range(size):
            value += m.weights[i] * m.weights[j] * cross[i, j]
    return MeasureReport(
        "mixture_energy", value, Method.CLOSED_FORM, True, {"components": size}
    )


def convex_energy(p: Density, q: Density, alpha: float) -> float:
    """I((1 - alpha) p + alpha q) via the mixture double sum."""
    return mixture_energy(Mixture((1.0 - alpha, alpha), (p, q))).value


def bound_checks(
    p: Density, q: Density, cfg: oracle.QuadratureConfig = oracle.DEFAULT_CONFIG
) -> BoundReport:
    """
    Evaluate H(p) + I(p)/2 >= 1 - log 2 and H_x(p:q) >= 1 - sqrt(I(p) I(q)),
    with the cross-entropy from the oracle. On a bounded support [a, b] the
    margin of I(p) >= 1/(b - a) is also reported.
    """
    _require_same_family(p, q)
    entropy_p = shannon_entropy(p).value
    energy_p = energy(p).value
    energy_q = energy(q).value
    cross_entropy = oracle.cross_entropy_integral(p, q, cfg).value
    cross_bound = 1.0 - math.sqrt(energy_p * energy_q)
    support = p.family.support
    support_margin = None
    if math.isfinite(support.lower) and math.isfinite(support.upper):
        support_margin = energy_p - 1.0 / (support.upper - support.lower)
    return BoundReport(
        entropy=entropy_p,
        energy=energy_p,
        entropy_energy_margin=entropy_p + 0.5 * energy_p - (1.0 - LOG_TWO),
        cross_entropy=float(cross_entropy),  # type: ignore[arg-type]
        cross_entropy_bound=cross_bound,
        cross_entropy_margin=float(cross_entropy) - cross_bound,  # type: ignore[arg-type]
        support_energy_margin=support_margin,
    )


def oracle_report(name: str, result: oracle.OracleResult) -> MeasureReport:
    """Wrap an oracle result as a measure report."""
    return MeasureReport(
        name,
        float(result.value),  # type: ignore[arg-type]
        Method.ORACLE,
        True,
        {
            "error_estimate": result.error_estimate,
            "evaluations": result.evaluations,
            "converged": result.converged,
        },
    )


def first_family(densities: Sequence[Density]) -> FamilyDescriptor:
    """Family of the first density, after checking all share it."""
    for other in densities[1:]:
        _require_same_family(densities[0], other)
    return densities[0].family
