import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsim import aht
from spinsim.aht import CouplingMatrix3, average_coupling


def _frac_matrix(m):
    return [[Fraction(v) for v in row] for row in m]


def test_single_delay_frame():
    seq = aht.PulseSequence((aht.Delay(Fraction(3)),))
    fr = aht.toggling_frames(seq)
    assert len(fr) == 1
    assert np.array_equal(fr.frames[0].R_I, np.eye(3))
    assert fr.frames[0].duration == 3


def test_wahuha_frames():
    fr = aht.toggling_frames(aht.wahuha())
    assert len(fr) == 5
    assert fr.cyclic
    assert np.allclose(fr.net_I, np.eye(3), atol=1e-12)
    assert fr.exact


def test_mrev8_frames():
    fr = aht.toggling_frames(aht.mrev8())
    assert len(fr) == 10
    assert fr.cyclic


def test_non_cyclic_flagged():
    seq = aht.PulseSequence((aht.Delay(1), aht.Pulse("x"), aht.Delay(1)))
    fr = aht.toggling_frames(seq)
    assert not fr.cyclic
    # averaging is still performed
    avg = average_coupling(CouplingMatrix3.ising(1), seq)
    assert np.isfinite(avg.matrix).all()


def test_rotation_convention():
    # P = exp(-i pi/2 I_x) maps I_z -> -I_y ... expressed by R with P^dag I_a P = R_ab I_b
    r = aht.rotation_matrix("x", math.pi / 2)
    assert np.allclose(r @ r.T, np.eye(3))
    assert np.linalg.det(r) == pytest.approx(1)


def test_wahuha_ising_is_heisenberg_exact():
    avg = average_coupling(CouplingMatrix3.ising(1), aht.wahuha(Fraction(1)), "IS")
    third = Fraction(1, 3)
    assert avg.exact.tolist() == [[third, 0, 0], [0, third, 0], [0, 0, third]]
    assert np.allclose(avg.matrix, np.eye(3) / 3, atol=1e-15)


def test_wahuha_eliminates_secular():
    avg = average_coupling(CouplingMatrix3.secular(1), aht.wahuha(Fraction(1)), "II")
    assert np.max(np.abs(avg.matrix)) < 1e-12
    assert all(v == 0 for v in avg.exact.ravel())


@pytest.mark.parametrize("tau1, tau2", [(Fraction(1), Fraction(1, 3)), (Fraction(2), Fraction(0)),
                                        (Fraction(1, 5), Fraction(3, 7))])
def test_modified_wahuha_exact(tau1, tau2):
    seq = aht.modified_wahuha(tau1, tau2)
    tc = 2 * tau1 + 4 * tau2
    assert seq.cycle_time == tc
    ising = average_coupling(CouplingMatrix3.ising(1), seq, "IS").exact
    expected = [2 * tau2 / tc, 2 * tau2 / tc, 2 * tau1 / tc]
    assert [ising[k, k] for k in range(3)] == expected
    assert all(ising[a, b] == 0 for a in range(3) for b in range(3) if a != b)
    sec = average_coupling(CouplingMatrix3.secular(1), seq, "II").exact
    scale = 2 * (tau1 - tau2) / tc
    assert [sec[k, k] for k in range(3)] == [-scale / 2, -scale / 2, scale]
    # operator form sum_{i,j} u_ij (...) carries half of the matrix scale
    assert scale / 2 == (tau1 - tau2) / tc


def test_mrev8_ising_matches_wahuha():
    a = average_coupling(CouplingMatrix3.ising(1), aht.mrev8(Fraction(1)), "IS")
    assert a.exact.tolist() == average_coupling(CouplingMatrix3.ising(1), aht.wahuha(Fraction(1)),
                                                "IS").exact.tolist()
    sec = average_coupling(CouplingMatrix3.secular(1), aht.mrev8(Fraction(1)), "II")
    assert np.max(np.abs(sec.matrix)) < 1e-12


def test_isotropic_fixed_point():
    for seq in (aht.wahuha(), aht.mrev8(), aht.theta_wahuha(0.7)):
        avg = average_coupling(CouplingMatrix3.heisenberg(2.5), seq, "IS")
        assert np.allclose(avg.matrix, 2.5 * np.eye(3), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.fractions(Fraction(1, 10), 1))
def test_splitting_a_delay(k, frac):
    seq = aht.wahuha(Fraction(1))
    ev = list(seq.events)
    idx = [i for i, e in enumerate(ev) if isinstance(e, aht.Delay)][k]
    d = ev[idx].duration
    ev[idx:idx + 1] = [aht.Delay(d * frac), aht.Delay(d * (1 - frac))]
    split = aht.PulseSequence(tuple(ev))
    c = CouplingMatrix3(np.array([[0.3, 0.1, -0.2], [0.1, 0.5, 0.4], [-0.2, 0.4, 1.0]]))
    assert np.allclose(average_coupling(c, split).matrix, average_coupling(c, seq).matrix, atol=1e-14)


def test_interpolation_path():
    path = aht.interpolation_path(1.0, steps=7)
    first, last = path[0], path[-1]
    assert first.tau2 == 0 and first.tau1 == pytest.approx(0.5)
    assert first.ising_diag == pytest.approx((0, 0, 1))
    assert first.secular_scale == pytest.approx(1.0)
    assert last.tau1 == pytest.approx(last.tau2)
    assert last.ising_diag == pytest.approx((1 / 3,) * 3)
    assert last.secular_scale == pytest.approx(0.0, abs=1e-15)
    # affine in tau2
    t2 = np.array([p.tau2 for p in path])
    for series in (np.array([p.secular_scale for p in path]), np.array([p.ising_diag[2] for p in path])):
        fit = np.polyfit(t2, series, 1)
        assert np.allclose(np.polyval(fit, t2), series, atol=1e-14)
    with pytest.raises(ValueError):
        aht.interpolation_path(1.0, 1)


def test_theta_endpoints():
    c = CouplingMatrix3.ising(1)
    assert np.allclose(aht.theta_pulse_average(c, 0.0).matrix, c.matrix, atol=1e-15)
    assert np.allclose(aht.theta_pulse_average(c, math.pi / 2).matrix, np.eye(3) / 3, atol=1e-15)
    s = CouplingMatrix3.secular(1)
    assert np.allclose(aht.theta_pulse_average(s, math.pi / 2, "II").matrix, 0, atol=1e-15)


def test_parse_sequence():
    assert aht.parse_sequence("wahuha").name == "wahuha"
    assert aht.parse_sequence("MREV8").name == "mrev8"
    seq = aht.parse_sequence("modified:1,1/3")
    assert seq.cycle_time == Fraction(2) + Fraction(4, 3)
    assert aht.parse_sequence("theta:0.5").pulses[0].angle == 0.5
    with pytest.raises(ValueError):
        aht.parse_sequence("cpmg")


def test_pulse_validation():
    with pytest.raises(ValueError):
        aht.Pulse("w")
    with pytest.raises(ValueError):
        aht.Pulse("x", species="K")
    with pytest.raises(ValueError):
        aht.Delay(-1)


def test_species_selective_pulses():
    # pulses on I only: I^z visits the z, y and x frames while S^z stays put
    seq = aht.wahuha(Fraction(1), species="I")
    avg = average_coupling(CouplingMatrix3.ising(1), seq, "IS")
    third = Fraction(1, 3)
    assert avg.exact[:, 2].tolist() == [third, third, third]
    assert all(v == 0 for v in avg.exact[:, :2].ravel())
