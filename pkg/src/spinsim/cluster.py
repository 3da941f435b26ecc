"""Exact dense-matrix treatment of small spin clusters.

Used as the oracle for the high-temperature series (exact traces) and for
average Hamiltonian theory (stroboscopic propagation under ideal pulses).

Same-species pairs couple through the secular form
``u (I^z I^z - 1/2 (I^x I^x + I^y I^y))``; unlike species couple through the
Ising form ``w I^z S^z``. The Zeeman part is ``sum_i delta_s(i) I^z_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla
from scipy.special import logsumexp

from . import aht
from .lattice import SeriesSums, SpeciesSpec, geometric_factor
from .semiinv import spin_matrices

DEFAULT_MAX_DIM = 4096


@dataclass(frozen=True)
class ClusterSite:
    position: tuple
    species: SpeciesSpec


@dataclass
class ClusterSpec:
    """Explicit spin cluster.

    ``couplings`` is a symmetric matrix of pair strengths (``u`` for like
    spins, ``w`` for unlike spins); when omitted it is built from the site
    positions as ``gamma_a gamma_b (1 - 3 cos^2) / r^3``. ``detuning`` maps a
    species name to its rotating-frame offset.
    """

    sites: list
    couplings: np.ndarray | None = None
    detuning: dict = field(default_factory=dict)
    field_dir: tuple = (0.0, 0.0, 1.0)
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        n = len(self.sites)
        if n == 0:
            raise ValueError("cluster needs at least one site")
        if self.couplings is None:
            c = np.zeros((n, n))
            for a in range(n):
                for b in range(a + 1, n):
                    r = np.subtract(self.sites[b].position, self.sites[a].position)
                    sa, sb = self.sites[a].species, self.sites[b].species
                    c[a, b] = c[b, a] = sa.gamma * sb.gamma * geometric_factor(r, self.field_dir)
            self.couplings = c
        self.couplings = np.asarray(self.couplings, dtype=float)
        if self.couplings.shape != (n, n):
            raise ValueError("couplings must be an N x N matrix")
        if not np.allclose(self.couplings, self.couplings.T, atol=1e-14):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(self.couplings) != 0):
            raise ValueError("self-couplings must be zero")
        if self.dim > self.max_dim:
            raise ValueError(f"Hilbert dimension {self.dim} exceeds the cap {self.max_dim}")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dims(self) -> list:
        return [int(round(2 * s.species.j + 1)) for s in self.sites]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def same_species(self, a, b) -> bool:
        return self.sites[a].species.name == self.sites[b].species.name


def uniform_cluster(couplings, j=0.5, delta=0.0, name="I", max_dim=DEFAULT_MAX_DIM) -> ClusterSpec:
    """Cluster of identical spins with an explicit coupling matrix."""
    couplings = np.asarray(couplings, dtype=float)
    sp = SpeciesSpec(name, j)
    sites = [ClusterSite((0.0, 0.0, float(k)), sp) for k in range(len(couplings))]
    return ClusterSpec(sites, couplings=couplings, detuning={name: delta}, max_dim=max_dim)


def fcc_tetrahedron(j=0.5, field_dir=(1.0, 0.0, 0.0), delta=0.0) -> ClusterSpec:
    """Regular tetrahedron of nearest-neighbour fcc sites (units of a).

    With the field along a cube axis every site has ``sum_j u_ij = 0``, which
    is the condition the lattice series relies on.
    """
    sp = SpeciesSpec("I", j)
    pos = [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    sites = [ClusterSite(tuple(float(x) for x in p), sp) for p in pos]
    return ClusterSpec(sites, detuning={"I": delta}, field_dir=field_dir)


def heteronuclear_cluster(n_i=1, n_s=1, j_i=0.5, j_s=0.5, gamma_i=1.0, gamma_s=1.0,
                          field_dir=(1.0, 1.0, 1.0), delta_i=0.0, delta_s=0.0) -> ClusterSpec:
    """``n_i`` I spins and ``n_s`` S spins on a zincblende fragment around the origin."""
    sp_i = SpeciesSpec("I", j_i, gamma_i, 0)
    sp_s = SpeciesSpec("S", j_s, gamma_s, 1)
    i_pos = [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]
    s_pos = [(0.5, 0.5, 0.5), (0.5, 1.5, 1.5), (1.5, 0.5, 1.5), (1.5, 1.5, 0.5)]
    if n_i > len(i_pos) or n_s > len(s_pos):
        raise ValueError("at most 4 spins per species")
    sites = [ClusterSite(tuple(map(float, p)), sp_i) for p in i_pos[:n_i]]
    sites += [ClusterSite(tuple(map(float, p)), sp_s) for p in s_pos[:n_s]]
    h = np.asarray(field_dir, float)
    return ClusterSpec(sites, detuning={"I": delta_i, "S": delta_s},
                       field_dir=tuple(h / np.linalg.norm(h)))


class Operators:
    """Embedded single-site spin operators of a cluster."""

    def __init__(self, spec: ClusterSpec):
        self.spec = spec
        dims = spec.dims
        self.x, self.y, self.z = [], [], []
        for k, site in enumerate(spec.sites):
            iz, ip, im = spin_matrices(site.species.j)
            ix = 0.5 * (ip + im)
            iy = -0.5j * (ip - im)
            for store, op in ((self.x, ix), (self.y, iy), (self.z, iz)):
                store.append(self._embed(op, k, dims))

    @staticmethod
    def _embed(op, k, dims):
        mats = [op if i == k else np.eye(d) for i, d in enumerate(dims)]
        return reduce(np.kron, mats).astype(complex)

    def vector(self, k):
        return (self.x[k], self.y[k], self.z[k])


def hamiltonian_parts(spec: ClusterSpec, ops: Operators | None = None):
    """``(H_Z, H_D)``: Zeeman offsets and secular/Ising couplings."""
    ops = ops or Operators(spec)
    dim = spec.dim
    hz = np.zeros((dim, dim), dtype=complex)
    hd = np.zeros((dim, dim), dtype=complex)
    for k, site in enumerate(spec.sites):
        hz += spec.detuning.get(site.species.name, 0.0) * ops.z[k]
    n = spec.n_sites
    for a in range(n):
        for b in range(a + 1, n):
            c = spec.couplings[a, b]
            if c == 0:
                continue
            if spec.same_species(a, b):
                hd += c * (ops.z[a] @ ops.z[b]
                           - 0.5 * (ops.x[a] @ ops.x[b] + ops.y[a] @ ops.y[b]))
            else:
                hd += c * (ops.z[a] @ ops.z[b])
    return hz, hd


def build_hamiltonian(spec: ClusterSpec) -> np.ndarray:
    hz, hd = hamiltonian_parts(spec)
    return hz + hd


@dataclass
class ExactThermal:
    energy: float
    log_partition: float
    entropy: float
    polarization: float


def exact_thermal(spec: ClusterSpec, beta, beta0=None, ops=None) -> ExactThermal:
    """Per-spin averages for ``rho ~ exp(-beta0 H_Z - beta H_D)``.

    ``energy`` is ``<H_D>/N``, ``polarization`` is ``<sum I^z>/N``.
    """
    beta0 = beta if beta0 is None else beta0
    ops = ops or Operators(spec)
    hz, hd = hamiltonian_parts(spec, ops)
    n = spec.n_sites
    evals, evecs = np.linalg.eigh(beta0 * hz + beta * hd)
    lnz = logsumexp(-evals)
    p = np.exp(-evals - lnz)

    def avg(op):
        return float(np.real(np.einsum("k,ik,ij,jk->", p, evecs.conj(), op, evecs)))

    s = lnz + float(np.dot(p, evals))
    return ExactThermal(avg(hd) / n, lnz / n, s / n, avg(sum(ops.z)) / n)


def von_neumann_entropy(spec: ClusterSpec, beta, beta0=None) -> float:
    """``-Tr(rho ln rho) / N`` with ``rho`` built by a matrix exponential."""
    beta0 = beta if beta0 is None else beta0
    hz, hd = hamiltonian_parts(spec)
    rho = sla.expm(-(beta0 * hz + beta * hd))
    rho /= np.trace(rho).real
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log(w))) / spec.n_sites


def dipolar_cumulants(spec: ClusterSpec, eta) -> tuple:
    """First three cumulants of ``H_D`` under ``exp(eta sum I^z)``, per spin."""
    ops = Operators(spec)
    _, hd = hamiltonian_parts(spec, ops)
    mz = np.real(np.diag(sum(ops.z)))
    w = np.exp(eta * mz - np.max(eta * mz))
    w /= w.sum()
    h2 = hd @ hd
    m1 = float(np.real(np.sum(w * np.diag(hd))))
    m2 = float(np.real(np.sum(w * np.diag(h2))))
    m3 = float(np.real(np.sum(w * np.diag(h2 @ hd))))
    n = spec.n_sites
    return m1 / n, (m2 - m1 ** 2) / n, (m3 - 3 * m2 * m1 + 2 * m1 ** 3) / n


def series_sums(spec: ClusterSpec) -> SeriesSums:
    """Per-site averages of ``sum u^2``, ``sum u^3`` and the triangle sum."""
    u = spec.couplings
    n = spec.n_sites
    return SeriesSums(
        I2=float(np.sum(u ** 2)) / n,
        I3=float(np.sum(u ** 3)) / n,
        K3=float(np.einsum("ij,jk,ki->", u, u, u)) / n,
    )


# --- stroboscopic propagation --------------------------------------------------

def _species_mask(spec: ClusterSpec, mask: str) -> list:
    if mask == "both":
        return list(range(spec.n_sites))
    sub = {"I": 0, "S": 1}[mask]
    return [k for k, s in enumerate(spec.sites) if s.species.sublattice == sub]


def pulse_unitary(spec: ClusterSpec, pulse: aht.Pulse, ops: Operators | None = None):
    """``exp(-i angle n . I)`` acting on the spins selected by the pulse mask."""
    ops = ops or Operators(spec)
    n = aht.AXES[pulse.axis]
    gen = np.zeros((spec.dim, spec.dim), dtype=complex)
    for k in _species_mask(spec, pulse.species):
        x, y, z = ops.vector(k)
        gen += n[0] * x + n[1] * y + n[2] * z
    return sla.expm(-1j * pulse.angle_rad * gen)


def propagate(spec: ClusterSpec, seq: aht.PulseSequence, n_cycles=1, ops=None) -> np.ndarray:
    """``U(n t_c)`` from exact delay exponentials and ideal pulse rotations."""
    ops = ops or Operators(spec)
    h = sum(hamiltonian_parts(spec, ops))
    u = np.eye(spec.dim, dtype=complex)
    for ev in seq.events:
        if isinstance(ev, aht.Delay):
            step = sla.expm(-1j * float(ev.duration) * h)
        else:
            step = pulse_unitary(spec, ev, ops)
        u = step @ u
    if n_cycles == 1:
        return u
    return np.linalg.matrix_power(u, n_cycles)


def average_hamiltonian(spec: ClusterSpec, seq: aht.PulseSequence, ops=None) -> np.ndarray:
    """Zeroth-order (cycle-averaged) Hamiltonian built from :mod:`spinsim.aht`."""
    ops = ops or Operators(spec)
    frames = aht.toggling_frames(seq)
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for k, site in enumerate(spec.sites):
        mask = "I" if site.species.sublattice == 0 else "S"
        d = spec.detuning.get(site.species.name, 0.0)
        if d:
            v = aht.average_vector(np.array([0.0, 0.0, d]), frames, mask)
            x, y, z = ops.vector(k)
            h += v[0] * x + v[1] * y + v[2] * z
    n = spec.n_sites
    for a in range(n):
        for b in range(a + 1, n):
            c = spec.couplings[a, b]
            if c == 0:
                continue
            ma = "I" if spec.sites[a].species.sublattice == 0 else "S"
            mb = "I" if spec.sites[b].species.sublattice == 0 else "S"
            if spec.same_species(a, b):
                cm = aht.CouplingMatrix3.secular(c)
            else:
                cm = aht.CouplingMatrix3.ising(c)
            cbar = aht.average_matrix(cm.matrix, frames, ma, mb)
            va, vb = ops.vector(a), ops.vector(b)
            for p in range(3):
                for q in range(3):
                    if cbar[p, q] != 0:
                        h += cbar[p, q] * (va[p] @ vb[q])
    return h


@dataclass
class PropagatorComparison:
    rows: list
    order: float | None
    exact: bool

    @property
    def order_label(self) -> str:
        return "exact" if self.exact else f"{self.order:.4f}"


ERROR_FLOOR = 1e-12


def compare_propagators(spec: ClusterSpec, seq: aht.PulseSequence, total_time=1.0,
                        n_halvings=4) -> PropagatorComparison:
    """Stroboscopic vs. averaged propagation over a fixed total time.

    The cycle time is halved ``n_halvings`` times starting from ``total_time``
    (one cycle); each row is ``(t_c, n_cycles, ||U_strobo - U_avg||_2)``. The
    order is the least-squares slope of ``log error`` against ``log t_c``.
    """
    if n_halvings < 4:
        raise ValueError("need a ladder of at least 4 halvings")
    ops = Operators(spec)
    t0 = float(seq.cycle_time)
    hbar = average_hamiltonian(spec, seq, ops)
    u_avg = sla.expm(-1j * total_time * hbar)
    rows = []
    for k in range(n_halvings + 1):
        n_cycles = 2 ** k
        tc = total_time / n_cycles
        scaled = seq.scaled(tc / t0)
        u = propagate(spec, scaled, n_cycles, ops)
        err = float(np.linalg.norm(u - u_avg, 2))
        rows.append((tc, n_cycles, err))
    errs = np.array([r[2] for r in rows])
    if np.max(errs) < ERROR_FLOOR:
        return PropagatorComparison(rows, None, True)
    tcs = np.array([r[0] for r in rows])
    slope = np.polyfit(np.log(tcs), np.log(np.maximum(errs, 1e-300)), 1)[0]
    return PropagatorComparison(rows, float(slope), False)
