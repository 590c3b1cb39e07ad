import math

import numpy as np
import pytest

from diracsim.experiments import (
    KleinParameters,
    commutator_check,
    convergence_study,
    gaussian_pair_initial,
    honeycomb_dynamics,
    honeycomb_setup,
    klein_initial,
    klein_run,
    klein_sweep,
    klein_transmission_analytic,
    td1d_setup,
    transmitted_fraction,
)
from diracsim.fields import SpinorField, error_norms, mass
from diracsim.grid import PeriodicGrid
from diracsim.integrators import builtin_plan, evolve, freeze_time_offsets, step
from diracsim.potentials import ATOMIC_UNITS, PhysicalConstants

TD1D_LADDER = [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128]
HONEYCOMB_LADDER = [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256]


# --- initial data and setups


def test_gaussian_pair_peaks():
    grid = PeriodicGrid.from_spacing(2, -4.0, 4.0, 1 / 4)
    field = gaussian_pair_initial(grid)
    assert field.data[16, 16, 0] == 1.0
    assert field.data[20, 16, 1] == pytest.approx(1.0)
    assert abs(field.data[16, 16, 1]) == pytest.approx(math.exp(-0.5))


def test_four_component_setup_embeds_the_pair():
    four = td1d_setup(h=1 / 4, ncomp=4).initial
    two = td1d_setup(h=1 / 4).initial
    np.testing.assert_array_equal(four.data[:, [0, 3]], two.data)
    assert not np.any(four.data[:, [1, 2]])


def test_setup_fingerprints_identify_the_problem():
    assert td1d_setup().fingerprint() == td1d_setup().fingerprint()
    assert honeycomb_setup(1).fingerprint() != honeycomb_setup(2).fingerprint()


# --- Klein step


def test_klein_packet():
    grid = PeriodicGrid.from_spacing(1, -20.0, 20.0, 1 / 64)
    params = KleinParameters()
    field = klein_initial(params, grid)
    c = ATOMIC_UNITS.c
    expected = 106 * c / (c * c + c * math.sqrt(106 ** 2 + c * c))
    assert params.spinor_ratio == pytest.approx(expected, rel=1e-14)
    peak = np.argmin(np.abs(grid.coordinates[0] - params.x0))
    assert abs(field.data[peak, 0]) == pytest.approx(1.0)
    np.testing.assert_allclose(field.data[:, 1], expected * field.data[:, 0])


def test_klein_packet_at_rest_has_no_lower_component():
    grid = PeriodicGrid.from_spacing(1, -20.0, 20.0, 1 / 8)
    field = klein_initial(KleinParameters(k0=0.0), grid)
    assert not np.any(field.data[:, 1])


def test_analytic_transmission_at_the_reference_step():
    result = klein_transmission_analytic(106.0, 6.13e4, 1e-4, ATOMIC_UNITS)
    assert result.in_region
    assert 0.54 < result.value < 0.56
    assert result.k_prime == pytest.approx(-106.0)
    c = ATOMIC_UNITS.c
    sharp_limit = 4 * result.k * abs(result.k_prime) / (
        (6.13e4 / c + result.k + result.k_prime) * (6.13e4 / c - result.k - result.k_prime)
    )
    assert result.value == pytest.approx(sharp_limit, rel=2e-3)


def test_analytic_transmission_decreases_with_width():
    values = [klein_transmission_analytic(106.0, 6.13e4, L).value for L in (0.5e-4, 1e-4, 2e-4, 4e-4)]
    assert values == sorted(values, reverse=True)


def test_analytic_transmission_vanishes_at_the_region_edge():
    edge = klein_transmission_analytic(106.0, 0.0, 1e-4).E_k + ATOMIC_UNITS.rest_energy
    assert 0.0 < klein_transmission_analytic(106.0, edge + 1.0, 1e-4).value < 1e-2
    outside = klein_transmission_analytic(106.0, 2e4, 1e-4)
    assert not outside.in_region
    assert outside.value == 0.0


def test_transmitted_fraction_splits_the_grid():
    grid = PeriodicGrid.uniform(1, -1.0, 1.0, 8)
    field = SpinorField.from_components(grid, [np.where(grid.coordinates[0] >= 0, 1.0, 0.0), 0.0])
    assert transmitted_fraction(field) == 1.0
    assert transmitted_fraction(SpinorField.zeros(grid)) == 0.0


def test_free_packet_crosses_the_origin():
    report = klein_run(KleinParameters(V0=0.0), h=1 / 128, tau=0.0022)
    assert not report.in_region
    assert report.rel_err is None
    assert report.T_num > 0.9
    assert report.T_num + report.reflected == pytest.approx(1.0, abs=1e-12)


def test_klein_transmission_matches_the_analytic_value():
    report = klein_run(KleinParameters(), h=1 / 1024, tau=1e-5)
    assert report.in_region
    assert report.rel_err <= 0.02


def test_klein_low_step_barely_transmits():
    (report,) = klein_sweep([2e4], h=1 / 512, tau=2e-5)
    assert not report.in_region
    assert report.T_num <= 1e-2


# --- closed-form commutator against brute force


def test_commutator_check_passes_every_case():
    results = commutator_check(samples=50, seed=1)
    assert [r.case for r in results] == ["1d-2c", "1d-4c", "2d-2c", "2d-4c", "3d-4c"]
    for result in results:
        assert result.passed, result
        assert result.max_relative_error <= 1e-9


def test_commutator_check_in_atomic_units():
    results = commutator_check(ATOMIC_UNITS, samples=5, seed=2)
    assert all(r.passed for r in results)


def test_commutator_check_on_zero_potential():
    results = commutator_check(samples=3, zero=True)
    assert all(r.max_relative_error == 0.0 for r in results)


# --- convergence


@pytest.fixture(scope="module")
def td1d_reports():
    setup = td1d_setup()
    schemes = ["s1", "s2", "s4", "s4c", "s4rk", freeze_time_offsets(builtin_plan("s4c"))]
    reports = convergence_study(setup, schemes, TD1D_LADDER, reference_tau=TD1D_LADDER[-1] / 32)
    return {report.scheme: report for report in reports}


@pytest.mark.parametrize(
    "scheme, low, high",
    [
        ("s1", 0.85, 1.15),
        ("s2", 1.9, 2.1),
        ("s4", 3.7, 4.3),
        ("s4c", 3.7, 4.3),
        ("s4rk", 3.7, 4.3),
    ],
)
def test_observed_orders_in_1d(td1d_reports, scheme, low, high):
    report = td1d_reports[scheme]
    for norm in ("phi", "rho", "j"):
        assert low <= report.mean_rate(norm) <= high, (norm, report.rates(norm))


def test_frozen_potentials_lose_fourth_order(td1d_reports):
    assert td1d_reports["s4c-frozen"].mean_rate("phi") <= 2.2


def test_s4c_beats_forest_ruth_at_equal_steps(td1d_reports):
    s4 = td1d_reports["s4"].cells[-1].e_phi
    s4c = td1d_reports["s4c"].cells[-1].e_phi
    assert s4c < s4


def test_first_rung_has_no_rate(td1d_reports):
    first = td1d_reports["s2"].cells[0]
    assert first.rate_phi is None
    assert first.tau == 1 / 8


def test_matching_reference_gives_zero_error(clean_cache):
    setup = td1d_setup(h=1 / 4, t_max=1.0)
    (report,) = convergence_study(setup, ["s4c"], [1 / 8], reference_tau=1 / 8)
    cell = report.cells[0]
    assert (cell.e_phi, cell.e_rho, cell.e_j) == (0.0, 0.0, 0.0)


def test_reference_is_cached_between_studies(clean_cache):
    setup = td1d_setup(h=1 / 4, t_max=1.0)
    convergence_study(setup, ["s2"], [1 / 8, 1 / 16], reference_tau=1 / 64)
    convergence_study(setup, ["s4c"], [1 / 8], reference_tau=1 / 64)
    assert len(clean_cache) == 1


def test_several_observation_times(clean_cache):
    setup = td1d_setup(h=1 / 4, t_max=1.0)
    (report,) = convergence_study(setup, ["s4c"], [1 / 8, 1 / 16], reference_tau=1 / 128, observe_times=[0.5, 1.0])
    assert report.observe_times() == [0.5, 1.0]
    assert len(report.at_time(0.5)) == 2
    assert report.at_time(0.5)[0].e_phi < report.at_time(1.0)[0].e_phi


def test_local_error_is_fifth_order():
    setup = td1d_setup(h=1 / 8)
    plan = builtin_plan("s4c")
    errors = []
    for tau in (1 / 32, 1 / 64):
        one = step(setup.initial, 1.0, tau, plan, setup.model)
        reference = evolve(setup.initial, 1.0, 1.0 + tau, tau / 64, plan, setup.model)
        errors.append(error_norms(one, reference).phi)
    assert 24.0 <= errors[0] / errors[1] <= 40.0


@pytest.mark.parametrize("case", [1, 2, 3])
def test_observed_order_for_honeycomb_potentials(case):
    setup = honeycomb_setup(case)
    (report,) = convergence_study(setup, ["s4c"], HONEYCOMB_LADDER, reference_tau=1 / 2560)
    for norm in ("phi", "rho", "j"):
        assert 3.7 <= report.mean_rate(norm) <= 4.3, (norm, report.rates(norm))


# --- honeycomb dynamics


def test_honeycomb_dynamics_snapshots():
    setup = honeycomb_setup(1, a=-4.0, b=4.0, h=1 / 4, t_max=0.5)
    snapshots = honeycomb_dynamics(1, 1 / 16, [0.0, 0.25, 0.5], setup=setup)
    assert [s.t for s in snapshots] == [0.0, 0.25, 0.5]
    first = snapshots[0]
    assert first.rho1[16, 16] == 1.0
    assert first.rho2[20, 16] == pytest.approx(1.0)
    np.testing.assert_allclose(first.rho, first.rho1 + first.rho2)
    for snapshot in snapshots:
        assert snapshot.mass == pytest.approx(mass(setup.initial), rel=1e-12)


def test_rotating_potential_changes_the_dynamics():
    fixed = honeycomb_setup(1, a=-4.0, b=4.0, h=1 / 4, t_max=0.5)
    rotating = honeycomb_setup(2, a=-4.0, b=4.0, h=1 / 4, t_max=0.5)
    last_fixed = honeycomb_dynamics(1, 1 / 16, [0.5], setup=fixed)[-1].spinor
    last_rotating = honeycomb_dynamics(2, 1 / 16, [0.5], setup=rotating)[-1].spinor
    assert error_norms(last_fixed, last_rotating).phi > 1e-3


# --- full-scale runs


@pytest.mark.long
def test_klein_fine_grid_accuracy():
    report = klein_run(KleinParameters(), h=1 / 2048, tau=5e-6)
    assert report.rel_err <= 0.005


@pytest.mark.long
def test_table_scale_1d_error():
    setup = td1d_setup(a=-64.0, b=64.0, h=1 / 64, t_max=5.0)
    (report,) = convergence_study(setup, ["s4c"], [1 / 64, 1 / 128], reference_tau=1 / 4096)
    assert 5.94e-10 / 3 <= report.cells[-1].e_phi <= 5.94e-10 * 3


@pytest.mark.long
def test_table_scale_honeycomb_error():
    setup = honeycomb_setup(1, a=-25.0, b=25.0, h=1 / 16, t_max=3.0)
    (report,) = convergence_study(setup, ["s4c"], [1 / 128], reference_tau=1 / 1280)
    assert 3.41e-9 / 3 <= report.cells[-1].e_phi <= 3.41e-9 * 3


def test_custom_constants_flow_into_klein_parameters():
    params = KleinParameters(constants=PhysicalConstants(c=10.0))
    assert params.spinor_ratio == pytest.approx(10 * 106 / (100 + math.sqrt(100 ** 2 + 100 * 106 ** 2)))
