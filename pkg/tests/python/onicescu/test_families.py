#!/usr/bin/env python3
"""Tests for the family catalog (families.py) and special functions."""

import logging
import math

import measures
import numpy as np
import pytest
from expfam import CatalogError, EnergyUndefined, InvalidSourceParam, density
from families import (
    FAMILY_NAMES,
    describe_source,
    lattice_series,
    make_entry,
    make_mvn,
    make_pareto,
    poisson_carrier_moment,
    resolve_entry,
)
from special import SPECIAL
from utils import TOLERANCES

# pylint: disable=missing-function-docstring,too-few-public-methods


def _energy(name, coords, **options):
    entry = make_entry(name, **options)
    return entry.closed_form_energy(np.asarray(coords, dtype=float))


def _grid_cases():
    cases = []
    for name in FAMILY_NAMES:
        entry = make_entry(name)
        for index, coords in enumerate(entry.default_grid):
            cases.append(pytest.param(entry, coords, id=f"{name}-{index}"))
    return cases


class TestSpecialFunctions:
    """log-gamma, digamma and log-beta."""

    @pytest.mark.parametrize("n", range(21))
    def test_log_gamma_matches_log_factorial(self, n):
        expected = math.log(math.factorial(n))
        assert SPECIAL.log_gamma(n + 1.0) == pytest.approx(expected, rel=1e-13, abs=1e-15)

    def test_log_beta_identity(self):
        for a, b in ((0.5, 0.5), (1.0, 2.0), (3.5, 7.25)):
            expected = SPECIAL.log_gamma(a) + SPECIAL.log_gamma(b) - SPECIAL.log_gamma(a + b)
            assert SPECIAL.log_beta(a, b) == pytest.approx(expected, rel=1e-15, abs=1e-15)

    def test_digamma_matches_finite_differences(self):
        for x in (0.3, 1.0, 2.5, 10.0, 40.0):
            step = 1e-5 * max(1.0, x)
            numeric = (SPECIAL.log_gamma(x + step) - SPECIAL.log_gamma(x - step)) / (2 * step)
            assert SPECIAL.digamma(x) == pytest.approx(numeric, rel=1e-6)

    def test_duplication_formula(self):
        for z in np.linspace(0.3, 15.0, 20):
            left = SPECIAL.log_gamma(2 * z)
            right = (
                (2 * z - 1) * math.log(2.0)
                - 0.5 * math.log(math.pi)
                + SPECIAL.log_gamma(z)
                + SPECIAL.log_gamma(z + 0.5)
            )
            assert left == pytest.approx(right, rel=1e-12, abs=1e-12)


class TestPrintedExpressions:
    """Energy and entropy expressions of each family at documented points."""

    def test_exponential(self):
        assert _energy("exponential", [2.0]) == 1.0
        entry = make_entry("exponential")
        assert entry.closed_form_entropy(np.array([1.0])) == pytest.approx(1.0)

    def test_normal(self):
        entry = make_entry("normal")
        lam = np.array([0.0, 1.0])
        assert entry.closed_form_energy(lam) == pytest.approx(0.2820947918, rel=1e-10)
        assert entry.closed_form_entropy(lam) == pytest.approx(1.4189385332, rel=1e-10)

    def test_mvn_identity_covariance(self):
        coords = [0.5, -1.0, 1.0, 0.0, 0.0, 1.0]
        assert _energy("mvn", coords) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("sigma", [0.3, 0.8, 1.0, 2.5])
    def test_mvn_in_one_dimension_matches_normal(self, sigma):
        mvn = _energy("mvn", [0.7, sigma**2], d=1)
        assert mvn == pytest.approx(_energy("normal", [0.7, sigma]), rel=1e-12)

    def test_lognormal(self):
        assert _energy("lognormal", [0.0, 1.0]) == pytest.approx(0.3622168826, rel=1e-9)
        sigma = 0.7
        assert _energy("lognormal", [sigma**2 / 4.0, sigma]) == pytest.approx(
            1.0 / (2.0 * sigma * math.sqrt(math.pi)), rel=1e-12
        )

    def test_pareto(self):
        assert _energy("pareto", [1.0], k=1.0) == pytest.approx(1.0 / 3.0)
        assert _energy("pareto", [1.0], k=2.0) == pytest.approx(1.0 / 6.0)
        entry = make_entry("pareto", k=1.0)
        assert entry.closed_form_entropy(np.array([1.0])) == pytest.approx(2.0)

    def test_gamma(self):
        assert _energy("gamma", [1.0, 1.0]) == pytest.approx(0.5, rel=1e-12)
        assert _energy("gamma", [2.0, 1.0]) == pytest.approx(0.25, rel=1e-12)
        with pytest.raises(EnergyUndefined, match="alpha > 1/2"):
            _energy("gamma", [0.5, 1.0])

    def test_beta(self):
        assert _energy("beta", [1.0, 1.0]) == pytest.approx(1.0, rel=1e-12)
        assert _energy("beta", [2.0, 2.0]) == pytest.approx(1.2, rel=1e-12)
        with pytest.raises(EnergyUndefined):
            _energy("beta", [0.5, 2.0])
        with pytest.raises(EnergyUndefined):
            _energy("beta", [2.0, 0.4])

    def test_beta_energy_is_at_least_one(self):
        for alpha in np.linspace(0.6, 6.0, 7):
            for beta in np.linspace(0.6, 6.0, 7):
                assert _energy("beta", [alpha, beta]) >= 1.0

    def test_beta_literal_printing_disagrees_at_two_two(self):
        entry = make_entry("beta")
        literal = entry.literal_table_energy(np.array([2.0, 2.0]))
        assert literal == pytest.approx(1.0 / 1080.0, rel=1e-12)
        assert literal != pytest.approx(1.2, rel=1e-3)
        assert entry.literal_table_energy(np.array([1.0, 1.0])) == pytest.approx(1.0)

    def test_poisson(self):
        assert _energy("poisson", [1.0]) == pytest.approx(0.3085083225, rel=1e-9)


class TestAgainstGenericPath:
    """Printed expressions against the log-normalizer evaluation."""

    @pytest.mark.parametrize("entry,coords", _grid_cases())
    def test_energy(self, entry, coords):
        p = density(entry.descriptor, coords)
        closed = entry.closed_form_energy(np.asarray(coords, dtype=float))
        assert closed == pytest.approx(
            measures.energy(p).value, rel=TOLERANCES.closed_form_rtol
        )

    @pytest.mark.parametrize("entry,coords", _grid_cases())
    def test_entropy(self, entry, coords):
        p = density(entry.descriptor, coords)
        closed = entry.closed_form_entropy(np.asarray(coords, dtype=float))
        assert closed == pytest.approx(
            measures.shannon_entropy(p).value,
            rel=TOLERANCES.closed_form_rtol,
            abs=1e-12,
        )

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_poisson_energy_equals_carrier_form(self, lam):
        entry = make_entry("poisson")
        theta = np.array([math.log(lam)])
        carrier = poisson_carrier_moment(2.0 * theta).value
        generic = math.exp(lam**2 - 2.0 * lam) * carrier
        assert entry.closed_form_energy(np.array([lam])) == pytest.approx(generic, rel=1e-10)
        p = density(entry.descriptor, [lam])
        assert measures.energy(p).value == pytest.approx(generic, rel=1e-10)


class TestPoissonSeries:
    """Truncated lattice series."""

    def test_carrier_expectation_in_the_degenerate_limit(self):
        family = make_entry("poisson").descriptor
        theta = np.array([math.log(1e-8)])
        assert family.carrier_expectation(theta) == pytest.approx(1.0, abs=1e-6)

    def test_series_reports_terms_and_bound(self):
        series = poisson_carrier_moment(np.array([0.0]))
        assert series.value == pytest.approx(0.8386, abs=5e-5)
        assert not series.capped
        assert 0 < series.terms < 50
        assert series.truncation_bound < 1e-14

    def test_cap_is_flagged(self, caplog):
        with caplog.at_level(logging.WARNING):
            series = lattice_series(lambda i: 0.0, max_terms=10)
        assert series.capped
        assert series.terms == 10
        assert series.value == pytest.approx(10.0)
        assert series.truncation_bound == math.inf
        assert "cap" in caplog.text


class TestCatalog:
    """Construction and name resolution."""

    def test_unknown_family(self):
        with pytest.raises(CatalogError, match="Unknown family 'wishart'"):
            make_entry("wishart")

    def test_invalid_hyperparameters(self):
        with pytest.raises(CatalogError):
            make_mvn(0)
        with pytest.raises(CatalogError):
            make_pareto(-1.0)

    def test_family_ids_carry_hyperparameters(self):
        assert make_entry("pareto", k=2.0).descriptor.family_id == "pareto(k=2.0)"
        assert make_entry("mvn", d=3).descriptor.family_id == "mvn(d=3)"
        assert make_entry("mvn", d=3).descriptor.natural_dim == 12

    def test_resolve_pareto_scale(self):
        entry, coords = resolve_entry("pareto", {"a": [1.5], "k": [2.0]})
        assert entry.descriptor.support.lower == 2.0
        assert coords == (1.5,)
        assert describe_source(entry, coords) == {"a": 1.5, "k": 2.0}

    def test_resolve_mvn_defaults_to_identity_covariance(self):
        entry, coords = resolve_entry("mvn", {"mu": [1.0, 2.0, 3.0]})
        assert entry.descriptor.family_id == "mvn(d=3)"
        assert coords[3:] == tuple(np.eye(3).ravel())
        assert describe_source(entry, coords)["mu"] == [1.0, 2.0, 3.0]

    def test_resolve_rejects_unknown_and_missing_parameters(self):
        with pytest.raises(InvalidSourceParam, match="Unknown parameter"):
            resolve_entry("normal", {"mu": [0.0], "sigma": [1.0], "tau": [1.0]})
        with pytest.raises(InvalidSourceParam, match="Missing parameter 'sigma'"):
            resolve_entry("normal", {"mu": [0.0]})
        with pytest.raises(InvalidSourceParam, match="requires parameter 'mu'"):
            resolve_entry("mvn", {"cov": [1.0]})

    @pytest.mark.parametrize("name", FAMILY_NAMES)
    def test_default_grids_have_five_valid_points(self, name):
        entry = make_entry(name)
        assert len(entry.default_grid) >= 5
        for coords in (entry.default_source, *entry.default_grid):
            density(entry.descriptor, coords)
