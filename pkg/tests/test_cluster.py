import math

import numpy as np
import pytest
import scipy.linalg as sla

from spinsim import aht, cluster, semiinv
from spinsim.lattice import SpeciesSpec


def _pair(u=1.0, j=0.5):
    return cluster.uniform_cluster(np.array([[0, u], [u, 0]]), j)


def test_single_spin_eigenvalues():
    spec = cluster.uniform_cluster(np.zeros((1, 1)), 0.5, delta=0.8)
    assert np.allclose(np.linalg.eigvalsh(cluster.build_hamiltonian(spec)), [-0.4, 0.4])


def test_pair_eigenvalues():
    # u (3 IzIz - I.I) / 2: triplet m = +-1 -> u/4, triplet m = 0 -> -u/2, singlet -> 0
    u = 1.3
    ev = np.linalg.eigvalsh(cluster.build_hamiltonian(_pair(u)))
    assert np.allclose(ev, np.sort([u / 4, u / 4, -u / 2, 0.0]), atol=1e-14)


def test_hermitian_and_secular():
    spec = cluster.fcc_tetrahedron(j=0.5, delta=0.3)
    h = cluster.build_hamiltonian(spec)
    assert np.allclose(h, h.conj().T, atol=1e-12)
    mz = sum(cluster.Operators(spec).z)
    assert np.max(np.abs(h @ mz - mz @ h)) < 1e-12


def test_dimension_cap():
    sp = SpeciesSpec("I", 4.5)
    sites = [cluster.ClusterSite((0, 0, float(k)), sp) for k in range(4)]
    with pytest.raises(ValueError):
        cluster.ClusterSpec(sites)


def test_coupling_validation():
    with pytest.raises(ValueError):
        cluster.uniform_cluster(np.array([[0, 1.0], [0.5, 0]]))
    with pytest.raises(ValueError):
        cluster.uniform_cluster(np.array([[1.0, 0], [0, 0]]))


def test_infinite_temperature_entropy():
    spec = cluster.fcc_tetrahedron(j=1.0)
    ex = cluster.exact_thermal(spec, 0.0)
    assert ex.entropy * spec.n_sites == pytest.approx(math.log(spec.dim))


def test_single_spin_polarization():
    spec = cluster.uniform_cluster(np.zeros((1, 1)), 1.5, delta=1.0)
    ex = cluster.exact_thermal(spec, 0.7, beta0=0.7)
    assert ex.polarization == pytest.approx(semiinv.t_n(-0.7, 1.5, 1), rel=1e-12)


@pytest.mark.parametrize("beta, beta0", [(0.3, 0.3), (0.5, -0.2), (1.0, 0.0)])
def test_entropy_matches_von_neumann(beta, beta0):
    spec = cluster.fcc_tetrahedron(j=0.5, delta=1.0)
    ex = cluster.exact_thermal(spec, beta, beta0)
    assert ex.entropy == pytest.approx(cluster.von_neumann_entropy(spec, beta, beta0), abs=1e-10)


def test_no_pulse_propagation():
    spec = cluster.heteronuclear_cluster(1, 1, delta_i=0.4)
    seq = aht.PulseSequence((aht.Delay(0.3),))
    u = cluster.propagate(spec, seq)
    assert np.allclose(u, sla.expm(-0.3j * cluster.build_hamiltonian(spec)), atol=1e-12)


def test_unitarity_after_many_cycles():
    spec = cluster.heteronuclear_cluster(2, 1, 1.0, 0.5, delta_i=0.2, delta_s=-0.1)
    u = cluster.propagate(spec, aht.wahuha(0.01), n_cycles=10_000)
    assert np.linalg.norm(u.conj().T @ u - np.eye(spec.dim)) < 1e-10


def test_energy_conserved_within_delay():
    spec = cluster.fcc_tetrahedron(j=0.5, delta=0.3)
    h = cluster.build_hamiltonian(spec)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=spec.dim) + 1j * rng.normal(size=spec.dim)
    psi /= np.linalg.norm(psi)
    e0 = np.vdot(psi, h @ psi).real
    phi = cluster.propagate(spec, aht.PulseSequence((aht.Delay(2.7),))) @ psi
    assert np.vdot(phi, h @ phi).real == pytest.approx(e0, abs=1e-10)


def test_average_hamiltonian_matches_aht():
    # toggling-frame average equals the AHT coupling matrices placed on the operators
    spec = cluster.heteronuclear_cluster(1, 1)
    hbar = cluster.average_hamiltonian(spec, aht.wahuha())
    ops = cluster.Operators(spec)
    w = spec.couplings[0, 1]
    expected = w / 3 * sum(a @ b for a, b in zip(ops.vector(0), ops.vector(1)))
    assert np.allclose(hbar, expected, atol=1e-14)


def test_stroboscopic_limit_reproduces_average():
    # the exact propagator sign conventions agree with the aht toggling frames
    spec = cluster.heteronuclear_cluster(1, 1, 1.5, 0.5)
    cmp = cluster.compare_propagators(spec, aht.wahuha(), 1.0, 5)
    assert cmp.rows[-1][2] < 0.01
    assert cmp.order >= 1.0


def test_theta_average_against_propagation():
    # theta = pi/4 cycles are not cyclic: U(t_c) = P_net exp(-i Hbar t_c) + O(t_c^2)
    spec = cluster.heteronuclear_cluster(1, 1, 1.5, 0.5)
    ops = cluster.Operators(spec)
    seq = aht.theta_wahuha(math.pi / 4)
    p_net = np.eye(spec.dim)
    for pulse in seq.pulses:
        p_net = cluster.pulse_unitary(spec, pulse, ops) @ p_net
    hbar = cluster.average_hamiltonian(spec, seq, ops)
    tcs, errs = [], []
    for k in range(5):
        tc = 0.2 / 2 ** k
        u = cluster.propagate(spec, seq.scaled(tc / float(seq.cycle_time)), 1, ops)
        errs.append(np.linalg.norm(p_net.conj().T @ u - sla.expm(-1j * tc * hbar), 2))
        tcs.append(tc)
    slope = np.polyfit(np.log(tcs), np.log(errs), 1)[0]
    assert slope >= 1.9


def test_zero_hamiltonian_is_exact():
    spec = cluster.heteronuclear_cluster(1, 1, field_dir=(1, 0, 0))
    spec.couplings[:] = 0
    cmp = cluster.compare_propagators(spec, aht.wahuha(), 1.0, 4)
    assert cmp.exact and cmp.order_label == "exact"


def test_bare_cycle_commuting_ising_is_exact():
    spec = cluster.heteronuclear_cluster(1, 1)
    seq = aht.modified_wahuha(0.5, 0.0)
    cmp = cluster.compare_propagators(spec, seq, 1.0, 4)
    assert cmp.exact


def test_homonuclear_pair_decoupled():
    spec = _pair(1.0)
    cmp = cluster.compare_propagators(spec, aht.wahuha(), 1.0, 4)
    assert max(r[2] for r in cmp.rows) < 1e-10
    # three like spins: the toggled terms no longer commute but still average to zero
    u = np.array([[0, 1.0, -0.5], [1.0, 0, 0.7], [-0.5, 0.7, 0]])
    cmp = cluster.compare_propagators(cluster.uniform_cluster(u), aht.wahuha(), 1.0, 4)
    errs = [r[2] for r in cmp.rows]
    assert errs[-1] < errs[0] / 50


def test_ladder_too_short():
    with pytest.raises(ValueError):
        cluster.compare_propagators(_pair(), aht.wahuha(), 1.0, 3)
