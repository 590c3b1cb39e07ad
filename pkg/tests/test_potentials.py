import math

import numpy as np
import pytest

from diracsim.errors import PotentialError
from diracsim.potentials import (
    ATOMIC_UNITS,
    HONEYCOMB_WAVENUMBER,
    CustomPotential,
    Honeycomb2D,
    KleinStep,
    PhysicalConstants,
    TimeDependent1D,
    ZeroPotential,
    build_potential,
    honeycomb_theta,
    random_trig_potential,
)


def central_difference(model, t, point, axis, h=1e-6):
    forward = list(point)
    backward = list(point)
    forward[axis] += h
    backward[axis] -= h
    plus = model.evaluate(t, tuple(forward))
    minus = model.evaluate(t, tuple(backward))
    return (plus.V - minus.V) / (2 * h), (plus.A - minus.A) / (2 * h)


def test_constants():
    assert PhysicalConstants().rest_energy == 1.0
    assert ATOMIC_UNITS.rest_energy == pytest.approx(137.0359895 ** 2)


def test_td1d_values():
    model = TimeDependent1D()
    values = model.evaluate(0.0, np.array([-1.0, 0.0, 2.0]))
    np.testing.assert_allclose(values.V, 1.0)
    np.testing.assert_allclose(values.A[0], 1.0)
    values = model.evaluate(1.0, 1.0)
    assert float(values.V) == 0.0
    assert float(values.A[0]) == 2.0


@pytest.mark.parametrize("t, x", [(0.5, 0.3), (1.7, -2.0), (2.0, 4.5)])
def test_td1d_gradients(t, x):
    model = TimeDependent1D()
    gradients = model.evaluate_gradients(t, x)
    dV, dA = central_difference(model, t, (x,), 0)
    assert float(gradients.dV[0]) == pytest.approx(float(dV), rel=1e-7, abs=1e-9)
    assert float(gradients.dA[0, 0]) == pytest.approx(float(dA[0]), rel=1e-7, abs=1e-9)


def test_klein_step_profile():
    model = KleinStep(V0=10.0, L=0.5)
    values = model.evaluate(0.0, np.array([-100.0, 0.0, 100.0]))
    np.testing.assert_allclose(values.V, [0.0, 5.0, 10.0])
    assert not np.any(values.A)
    assert model.time_independent
    with pytest.raises(PotentialError):
        KleinStep(V0=1.0, L=0.0)


def test_honeycomb_theta_cases():
    assert honeycomb_theta(1, 0.7) == math.pi
    assert honeycomb_theta(2, 0.5) == pytest.approx(1.5 * math.pi)
    assert honeycomb_theta(3, 1.0) == pytest.approx(0.0)
    with pytest.raises(PotentialError):
        honeycomb_theta(4, 0.0)


def test_honeycomb_period_of_rotating_case():
    model = Honeycomb2D(2)
    x = np.linspace(-1.0, 1.0, 7)
    points = np.meshgrid(x, x, indexing="ij")
    np.testing.assert_allclose(model.evaluate(0.2, points).V, model.evaluate(0.2 + 1 / 3, points).V, atol=1e-12)


def test_honeycomb_values_and_gradients():
    model = Honeycomb2D(1)
    assert float(model.evaluate(0.0, (0.0, 0.0)).V) == pytest.approx(3.0)
    gradients = model.evaluate_gradients(0.3, (0.2, -0.1))
    for axis in range(2):
        dV, _ = central_difference(model, 0.3, (0.2, -0.1), axis)
        assert float(gradients.dV[axis]) == pytest.approx(float(dV), rel=1e-6, abs=1e-7)
    assert HONEYCOMB_WAVENUMBER == pytest.approx(4 * math.pi / math.sqrt(3))


def test_custom_potential_symbolic_gradients():
    model = CustomPotential(2, "x*x*y + t", ["sin(y)", "x*t"])
    assert not model.time_independent
    gradients = model.evaluate_gradients(2.0, (1.5, 0.5))
    np.testing.assert_allclose(gradients.dV[:, ...], [2 * 1.5 * 0.5, 1.5 ** 2])
    assert float(gradients.dA[1, 0]) == pytest.approx(math.cos(0.5))
    assert float(gradients.dA[0, 1]) == pytest.approx(2.0)
    assert float(gradients.dA[0, 0]) == 0.0


def test_custom_potential_checks_variables():
    with pytest.raises(PotentialError, match="not available"):
        CustomPotential(1, "y", ["0"])
    with pytest.raises(PotentialError):
        CustomPotential(1, "x +", ["0"])
    with pytest.raises(PotentialError):
        CustomPotential(2, "x", ["0"])


def test_custom_potential_evaluation_errors_surface():
    model = CustomPotential(1, "1 / x", ["0"])
    with pytest.raises(PotentialError):
        model.evaluate(0.0, np.array([0.0, 1.0]))


def test_constant_expressions_broadcast():
    model = CustomPotential(2, "2", ["0", "1"])
    values = model.evaluate(0.0, np.meshgrid(np.arange(3.0), np.arange(4.0), indexing="ij"))
    assert values.V.shape == (3, 4)
    assert values.A.shape == (2, 3, 4)
    assert model.time_independent


def test_dimension_mismatch():
    with pytest.raises(PotentialError):
        ZeroPotential(2).evaluate(0.0, (np.zeros(3),))
    with pytest.raises(PotentialError):
        ZeroPotential(4)


def test_random_potential_is_reproducible():
    first = random_trig_potential(2, np.random.default_rng(5))
    second = random_trig_potential(2, np.random.default_rng(5))
    assert first.describe() == second.describe()
    electric_only = random_trig_potential(2, np.random.default_rng(5), magnetic=False)
    assert not np.any(electric_only.evaluate(0.3, (np.linspace(-1, 1, 5), np.zeros(5))).A)


@pytest.mark.parametrize(
    "kind, dimension, params, expected",
    [
        ("zero", 3, {}, ZeroPotential),
        ("td1d", 1, {}, TimeDependent1D),
        ("klein", 1, {"V0": 2.0, "L": 0.1}, KleinStep),
        ("honeycomb", 2, {"theta_case": 3}, Honeycomb2D),
        ("custom", 1, {"V_expr": "x", "A1_expr": None}, CustomPotential),
        ("random", 3, {"seed": 3}, CustomPotential),
    ],
)
def test_build_potential(kind, dimension, params, expected):
    assert isinstance(build_potential(kind, dimension, **params), expected)


def test_build_potential_rejects_bad_requests():
    with pytest.raises(PotentialError):
        build_potential("td1d", 2)
    with pytest.raises(PotentialError):
        build_potential("coulomb", 1)


def test_honeycomb_oscillating_case_has_period_two():
    model = Honeycomb2D(3)
    x = np.linspace(-1.0, 1.0, 7)
    points = np.meshgrid(x, x, indexing="ij")
    for t in (0.0, 0.3, 1.1):
        np.testing.assert_allclose(model.evaluate(t, points).V, model.evaluate(t + 2.0, points).V, atol=1e-12)
