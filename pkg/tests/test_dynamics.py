import math

import numpy as np
import pytest
import sympy as sp

from conftest import make_rng, random_admissible, random_states
from pidp import (
    control_h,
    delta,
    drift_f,
    energies,
    hamiltonian,
    hamiltonian_from_momenta,
    mass_matrix,
    momenta,
    rhs,
    velocities,
    wrap_state,
)
from pidp.dynamics import as_state, wrap_angle
from pidp.errors import NonFiniteState

EQUILIBRIA = [
    (0.0, 0.0),
    (0.0, math.pi),
    (math.pi, 0.0),
    (math.pi, math.pi),
]


def test_drift_matches_euler_lagrange_symbolically(oracle):
    diff = (oracle["f_el"] - oracle["f_printed"]).applyfunc(sp.simplify)
    assert diff == sp.zeros(4, 1)


def test_control_matches_scaled_euler_lagrange_symbolically(oracle):
    sym = oracle["symbols"]
    scale = sym["m2"] * sym["r1"] * sym["r2"]
    diff = (scale * oracle["h_el"] - oracle["h_printed"]).applyfunc(sp.simplify)
    assert diff == sp.zeros(4, 1)


def test_drift_matches_oracle_numerically(oracle):
    rng = make_rng(11)
    for _ in range(20):
        p = random_admissible(rng)
        z = random_states(rng, 1)[0]
        np.testing.assert_allclose(drift_f(p, z), oracle["el_f"](p, z), rtol=1e-12, atol=1e-13)


def test_control_matches_oracle_numerically(oracle):
    rng = make_rng(12)
    for _ in range(20):
        p = random_admissible(rng)
        z = random_states(rng, 1)[0]
        scale = p.m2 * p.r1 * p.r2
        np.testing.assert_allclose(
            control_h(p, z), scale * np.asarray(oracle["el_h"](p, z)), rtol=1e-12, atol=1e-13
        )


def test_drift_spot_value(unit_params):
    f = drift_f(unit_params, np.array([math.pi / 2, 0.0, 0.0, 0.0]))
    np.testing.assert_allclose(f, [0.0, 0.0, 10.0, 0.0], atol=1e-12)


def test_control_spot_value(unit_params):
    h = control_h(unit_params, np.zeros(4))
    np.testing.assert_allclose(h, [0.0, 0.0, 0.0, -1.0], atol=1e-15)


def test_equilibria_have_tiny_residual():
    rng = make_rng(13)
    for _ in range(10):
        p = random_admissible(rng)
        for th1, th2 in EQUILIBRIA:
            f = drift_f(p, np.array([th1, th2, 0.0, 0.0]))
            assert np.max(np.abs(f)) <= 1e-15


def test_structural_zeros(unit_params):
    rng = make_rng(14)
    for z in random_states(rng, 200):
        f = drift_f(unit_params, z)
        h = control_h(unit_params, z)
        assert f[0] == z[2] and f[1] == z[3]
        assert h[0] == 0.0 and h[1] == 0.0


def test_rhs_is_affine_in_control(unit_params):
    rng = make_rng(15)
    z = random_states(rng, 1)[0]
    f = drift_f(unit_params, z)
    h = control_h(unit_params, z)
    np.testing.assert_allclose(rhs(unit_params, z, 0.0), f, rtol=0, atol=0)
    np.testing.assert_allclose(rhs(unit_params, z, 2.5), f + 2.5 * h, rtol=1e-15, atol=1e-15)


def test_delta_spot_values(unit_params):
    assert delta(unit_params, 0.0, 0.0) == 1.0
    assert np.isclose(delta(unit_params, math.pi / 2, 0.0), 2.0, rtol=1e-15)


def test_delta_positive_and_bounded_below():
    rng = make_rng(16)
    for _ in range(20):
        p = random_admissible(rng)
        lo = p.r1 * p.r2 * p.m1
        for z in random_states(rng, 500):
            d = delta(p, z[0], z[1])
            assert d > 0.0
            assert d >= lo * (1.0 - 1e-15)


def test_mass_matrix_spot(unit_params):
    M = mass_matrix(unit_params, 0.3, 0.3)
    np.testing.assert_allclose(M, [[2.0, 1.0], [1.0, 1.0]], rtol=1e-15)
    M2 = mass_matrix(unit_params, math.pi / 2, 0.0)
    assert abs(M2[0, 1]) < 1e-15


def test_mass_matrix_determinant_identity():
    rng = make_rng(17)
    for _ in range(20):
        p = random_admissible(rng)
        for z in random_states(rng, 500):
            M = mass_matrix(p, z[0], z[1])
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            expected = p.m2 * p.r1 * p.r2 * delta(p, z[0], z[1])
            assert abs(det - expected) <= 1e-12 * abs(expected)


def test_energies_spot_values(unit_params):
    e = energies(unit_params, np.zeros(4))
    assert e.kinetic == 0.0
    assert np.isclose(e.potential, 30.0, rtol=1e-15)
    assert np.isclose(e.hamiltonian, 30.0, rtol=1e-15)
    assert np.isclose(e.lagrangian, -30.0, rtol=1e-15)

    down = energies(unit_params, np.array([math.pi, math.pi, 0.0, 0.0]))
    assert np.isclose(down.potential, -30.0, rtol=1e-15)


def test_energy_decomposition():
    rng = make_rng(18)
    for _ in range(10):
        p = random_admissible(rng)
        for z in random_states(rng, 100):
            e = energies(p, z)
            assert e.kinetic >= 0.0
            assert np.isclose(e.hamiltonian, e.kinetic + e.potential, rtol=1e-12, atol=1e-12)
            assert np.isclose(e.lagrangian, e.kinetic - e.potential, rtol=1e-12, atol=1e-12)
            omega = z[2:4]
            quad = 0.5 * omega @ mass_matrix(p, z[0], z[1]) @ omega
            assert np.isclose(e.kinetic, quad, rtol=1e-12, atol=1e-12)


def test_kinetic_energy_matches_oracle(oracle):
    rng = make_rng(19)
    kin = oracle["kinetic"]
    pot = oracle["potential"]
    for _ in range(10):
        p = random_admissible(rng)
        z = random_states(rng, 1)[0]
        e = energies(p, z)
        assert np.isclose(e.kinetic, kin(p, z), rtol=1e-12)
        assert np.isclose(e.potential, pot(p, z), rtol=1e-12)


def test_hamiltonian_vectorized(unit_params):
    rng = make_rng(20)
    states = random_states(rng, 50)
    hs = hamiltonian(unit_params, states)
    assert hs.shape == (50,)
    for z, hval in zip(states, hs):
        assert hval == energies(unit_params, z).hamiltonian
    single = hamiltonian(unit_params, states[0])
    assert np.isscalar(single) or np.ndim(single) == 0


def test_momenta_and_velocities_roundtrip():
    rng = make_rng(21)
    for _ in range(10):
        p = random_admissible(rng)
        for z in random_states(rng, 100):
            pm = momenta(p, z)
            om = velocities(p, z[0], z[1], pm)
            np.testing.assert_allclose(om, z[2:4], rtol=1e-12, atol=1e-12)


def test_momenta_spot(unit_params):
    pm = momenta(unit_params, np.array([0.3, 0.3, 1.0, 0.0]))
    np.testing.assert_allclose(pm, [2.0, 1.0], rtol=1e-15)
    assert np.all(momenta(unit_params, np.array([0.5, -0.2, 0.0, 0.0])) == 0.0)


def test_hamiltonian_from_momenta_consistent():
    rng = make_rng(22)
    for _ in range(10):
        p = random_admissible(rng)
        for z in random_states(rng, 100):
            pm = momenta(p, z)
            h_legendre = hamiltonian_from_momenta(p, z[0], z[1], pm)
            h_direct = energies(p, z).hamiltonian
            assert np.isclose(h_legendre, h_direct, rtol=1e-12, atol=1e-12)


def test_wrap_angle_values():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(-math.pi) == -math.pi
    assert wrap_angle(math.pi) == -math.pi
    assert np.isclose(wrap_angle(3 * math.pi / 2), -math.pi / 2, rtol=1e-15)
    assert np.isclose(wrap_angle(-3 * math.pi / 2), math.pi / 2, rtol=1e-15)
    # canonical values pass through bitwise unchanged
    for x in [0.1, -3.1, 1.5, -math.pi, 3.14159]:
        assert wrap_angle(x) == x


def test_wrap_state_preserves_velocities(unit_params):
    z = np.array([3 * math.pi / 2, -5.0, 2.0, -3.0])
    w = wrap_state(z)
    assert w[2] == 2.0 and w[3] == -3.0
    assert -math.pi <= w[0] < math.pi
    assert -math.pi <= w[1] < math.pi


def test_dynamics_invariant_under_wrap(unit_params):
    rng = make_rng(23)
    for z in random_states(rng, 50):
        shifted = z + np.array([2 * math.pi, -2 * math.pi, 0.0, 0.0])
        np.testing.assert_allclose(
            drift_f(unit_params, shifted), drift_f(unit_params, z), rtol=1e-10, atol=1e-10
        )
        np.testing.assert_allclose(
            control_h(unit_params, shifted), control_h(unit_params, z), rtol=1e-10, atol=1e-10
        )
        assert np.isclose(
            energies(unit_params, shifted).hamiltonian,
            energies(unit_params, z).hamiltonian,
            rtol=1e-10,
        )


def test_as_state_rejects_bad_input():
    with pytest.raises(NonFiniteState):
        as_state([math.nan, 0.0, 0.0, 0.0])
    with pytest.raises(NonFiniteState):
        as_state([math.inf, 0.0, 0.0, 0.0])
    with pytest.raises(NonFiniteState):
        as_state([1.0, 2.0, 3.0])
