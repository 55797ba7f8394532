import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hilbundle.galilei import (
    GroupWord,
    boost,
    boosted,
    rotate,
    rotation,
    section_word,
    space,
    space_translate,
    time,
    time_translate,
    transport,
)
from hilbundle.grid import AdmissibilityError, DimensionError, Op, Rep, StateVector, expectation, fidelity, gaussian, make_grid, moments, norm
from hilbundle.propagator import free_gaussian_width2


def test_zero_parameters_are_identity(grid1, grid2):
    psi = gaussian(grid1, 0.5, 0.3)
    for out in (time_translate(psi, 0.0), space_translate(psi, 0.0), boost(psi, 0.0), transport(psi, GroupWord())):
        assert np.abs(out.amplitudes - psi.amplitudes).max() <= 1e-15
    q = gaussian(grid2, (1.0, 0.5))
    assert rotate(q, 0.0) is q


def test_plane_wave_time_phase(grid1):
    k0 = 4 * grid1.dk
    psi = StateVector(np.exp(1j * k0 * grid1.x), Rep.POSITION, grid1)
    out = time_translate(psi, 0.8)
    assert np.abs(out.amplitudes - np.exp(-1j * k0**2 * 0.8 / 2) * psi.amplitudes).max() <= 1e-12


def test_free_spreading(grid1):
    out = time_translate(gaussian(grid1, 0.0, 0.0, 1.0), 1.0)
    m = moments(out)
    assert m["x2"][0] - m["x"][0] ** 2 == pytest.approx(free_gaussian_width2(1.0, 1.0, 1.0), abs=1e-6)
    assert free_gaussian_width2(1.0, 1.0, 1.0) == 1.0


def test_space_translation_moves_by_minus_zeta(grid1):
    out = space_translate(gaussian(grid1), 1.0)
    assert expectation(Op.X, out).real == pytest.approx(-1.0, abs=1e-8)
    assert norm(out) == pytest.approx(1.0, abs=1e-12)


def test_boost_shift(grid1):
    out = boost(gaussian(grid1, 0.0, 2.0), 0.5)
    assert expectation(Op.P, out).real == pytest.approx(1.5, abs=1e-10)


def test_boost_composition(grid1):
    psi = gaussian(grid1, 0.5, 0.2)
    assert fidelity(boost(boost(psi, 0.3), -0.8), boost(psi, -0.5)) >= 1 - 1e-12


def test_boost_edge_detected():
    sp = make_grid(1, 64, 20.0)
    with pytest.raises(AdmissibilityError):
        boost(gaussian(sp, 0.0, 0.0), 8.0)


def test_weyl_phase(grid1):
    m, eta, zeta = 1.0, 0.7, 1.3
    psi = gaussian(grid1, 0.2, 0.1)
    lhs = boost(space_translate(psi, zeta), eta)
    rhs = space_translate(boost(psi, eta), zeta)
    assert np.abs(lhs.amplitudes - np.exp(1j * m * eta * zeta) * rhs.amplitudes).max() <= 1e-10


def test_rotation_quarter_turn(grid2):
    out = rotate(gaussian(grid2, (3.0, 0.0)), np.pi / 2)
    m = moments(out)
    assert m["x"] == pytest.approx([0.0, 3.0], abs=1e-6)


def test_full_turn(grid2):
    psi = gaussian(grid2, (2.0, -1.0), (0.5, 0.3))
    assert fidelity(rotate(psi, 2 * np.pi), psi) >= 1 - 1e-8


def test_rotation_matches_rotated_gaussian(grid2):
    th = 0.9
    out = rotate(gaussian(grid2, (2.0, 0.5), (0.4, -0.2)), th)
    c, s = np.cos(th), np.sin(th)
    expect = gaussian(grid2, (2.0 * c - 0.5 * s, 2.0 * s + 0.5 * c), (0.4 * c + 0.2 * s, 0.4 * s - 0.2 * c))
    assert np.abs(out.amplitudes - expect.amplitudes).max() <= 1e-8


def test_rotation_needs_2d(grid1):
    with pytest.raises(DimensionError):
        rotate(gaussian(grid1), 0.3)


def test_rotation_disk_precondition(grid2):
    with pytest.raises(AdmissibilityError):
        rotate(gaussian(grid2, (4.5, 4.5), 0.0, 0.8), 0.3)


def test_inverse_word(grid1):
    psi = gaussian(grid1, 0.4, -0.3)
    w = section_word(0.7, 0.3, 0.2)
    assert fidelity(transport(transport(psi, w), w.inverse()), psi) >= 1 - 1e-10


def test_time_translations_compose(grid1):
    psi = gaussian(grid1, -0.5, 0.5)
    two = transport(psi, GroupWord.of(time(0.4), time(0.3)))
    assert fidelity(two, time_translate(psi, 0.7)) >= 1 - 1e-12


def test_word_applies_right_to_left(grid1):
    psi = gaussian(grid1)
    w = GroupWord.of(boosted(0.5), space(-2.0))
    out = transport(psi, w)
    direct = boost(space_translate(psi, -2.0), 0.5)
    assert np.abs(out.amplitudes - direct.amplitudes).max() <= 1e-15
    assert len(w @ w.inverse()) == 4


def test_unknown_factor_rejected():
    from hilbundle.galilei import Factor

    with pytest.raises(ValueError):
        GroupWord.of(Factor("scale", 1.0))


def test_rotation_factor_inverse(grid2):
    psi = gaussian(grid2, (1.0, 0.0))
    w = GroupWord.of(rotation(0.4), space((0.5, -0.5)))
    assert fidelity(transport(transport(psi, w), w.inverse()), psi) >= 1 - 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(-1, 1))
def test_unitarity(tau, zeta, eta):
    sp = make_grid(1, 256, 40.0)
    psi = gaussian(sp, 0.5, 0.2)
    for out in (time_translate(psi, tau), space_translate(psi, zeta), boost(psi, eta)):
        assert abs(norm(out) - 1) <= 1e-12
