"""Weiss mean-field analysis of the heteronuclear (zincblende) coupling.

``A(k) = sum_delta g(delta) exp(i k . delta)`` runs over the S neighbours of an
I site, with ``g`` the bare geometric factor in units of ``a^-3``. The ordering
wavevector maximises ``|A(k)|``; the transition temperature, the entropy of the
critical state and the critical initial polarizations follow from ``|A(k0)|``
and ``sum_k A_ik^2``.

Couplings are in the reduced unit of :mod:`spinsim.lattice`. With that unit the
constant ``c = (1/3)(mu0/4pi) hbar^2`` reads ``c = 1/3`` and gyromagnetic
ratios are relative numbers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .lattice import CouplingTable, LatticeSpec, build_sites, coupling_table, sum_A_squared
from .semiinv import brillouin

C_REDUCED = 1.0 / 3.0
FOURIER_TOL = 1e-2
TIE_RTOL = 1e-9
PUMPING = ("common-beta", "optical")
CLASSICAL_CAVEAT = (
    "mean-field result; the ordered structure and critical values assume classical "
    "spins within the Weiss approximation"
)


def _source(source):
    """``(offsets, weights, shell_index)`` from a spec, a table or an explicit pair."""
    if isinstance(source, LatticeSpec):
        if source.structure != "zincblende":
            raise ValueError("the Fourier analysis needs the zincblende structure")
        source = coupling_table(source, "IS")
    if isinstance(source, CouplingTable):
        return source.offsets, source.g, source.shell_index
    offsets, weights = source
    offsets = np.asarray(offsets, dtype=float).reshape(-1, 3)
    weights = np.asarray(weights, dtype=float)
    return offsets, weights, np.zeros(len(weights), dtype=int)


@dataclass
class FourierValue:
    k: np.ndarray
    value: complex
    last_shell: float
    converged: bool

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def fourier_A(source, k, tol=FOURIER_TOL) -> FourierValue:
    """``A(k)`` with the phase origin on an I site.

    ``converged`` compares the magnitude of the outermost shell's contribution
    with ``tol * |A(k)|``. The sum is only conditionally convergent, so the
    tolerance is loose.
    """
    offsets, weights, shells = _source(source)
    k = np.asarray(k, dtype=float).reshape(3)
    phase = np.exp(1j * offsets @ k)
    terms = weights * phase
    total = complex(terms.sum())
    outer = shells == shells.max() if len(shells) else shells
    last = abs(terms[outer].sum()) if len(shells) else 0.0
    conv = last <= tol * abs(total) if abs(total) > 0 else last < 1e-12
    return FourierValue(k, total, float(last), bool(conv))


def abs_A(source, kpts) -> np.ndarray:
    """``|A(k)|`` for each row of ``kpts``."""
    offsets, weights, _ = _source(source)
    return np.abs(kernels.fourier_sum(kpts, offsets, weights))


def bz_grid(n: int) -> np.ndarray:
    """``n^3`` points of the cube ``[-pi, pi)^3``, which covers the fcc zone twice."""
    k1 = -math.pi + 2 * math.pi * np.arange(n) / n
    return np.stack(np.meshgrid(k1, k1, k1, indexing="ij"), -1).reshape(-1, 3)


def reduce_to_bz(k) -> np.ndarray:
    """Fold ``k`` into the first zone of the fcc sublattice.

    The reciprocal lattice is ``pi (h, k, l)`` with ``h, k, l`` all even or all odd
    (units ``a^-1``); the nearest such vector is subtracted. On the zone
    boundary the lexicographically largest image is kept.
    """
    k = np.asarray(k, dtype=float)
    base = np.round(k / (2 * math.pi)) * 2
    best, best_d = None, math.inf
    for shift in itertools.product((-2, 0, 2), repeat=3):
        for odd in (0, 1):
            for sgn in itertools.product((-1, 1), repeat=3) if odd else [(0, 0, 0)]:
                q = k - (base + np.array(shift) + odd * np.array(sgn)) * math.pi
                d = float(q @ q)
                if d < best_d - 1e-6 or (abs(d - best_d) <= 1e-6 and tuple(q) > tuple(best)):
                    best, best_d = q, min(d, best_d)
    return best


def star(k) -> np.ndarray:
    """Images of ``k`` under coordinate permutations and inversion, folded and deduplicated.

    Permutations of the axes (with or without a swap) form the point group that
    leaves a (1,1,1) field invariant; inversion adds ``k -> -k``.
    """
    k = np.asarray(k, dtype=float)
    out = []
    for perm in itertools.permutations(range(3)):
        for s in (1.0, -1.0):
            q = reduce_to_bz(s * k[list(perm)])
            if not any(np.allclose(q, p, atol=1e-9) for p in out):
                out.append(q)
    return np.array(out)


def equivalent(k1, k2, atol=1e-6) -> bool:
    """Whether ``k1 - k2`` is a reciprocal lattice vector."""
    n = (np.asarray(k1, dtype=float) - np.asarray(k2, dtype=float)) / math.pi
    r = np.round(n)
    return bool(np.allclose(n, r, atol=atol)) and len(set(r.astype(int) % 2)) == 1


def in_star(k, ref, atol=1e-6) -> bool:
    """Whether ``k`` equals an image of ``ref`` up to a reciprocal lattice vector."""
    return any(equivalent(k, p, atol) for p in star(ref))


def _golden_refine(f, k, step, sweeps=4, xtol=1e-10):
    """Coordinate-wise golden-section maximisation of ``f`` inside ``k +- step``."""
    k = np.array(k, dtype=float)
    trace = [(k.copy(), f(k))]
    for _ in range(sweeps):
        before = k.copy()
        for axis in range(3):
            def neg(x, axis=axis):
                q = k.copy()
                q[axis] = x
                return -f(q)

            lo, mid, hi = k[axis] - step, k[axis], k[axis] + step
            fm = neg(mid)
            if neg(lo) < fm or neg(hi) < fm:
                res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                                      options={"xatol": xtol})
            else:
                res = minimize_scalar(neg, bracket=(lo, mid, hi), method="golden",
                                      tol=xtol)
            if -res.fun >= -fm:
                k[axis] = res.x
        trace.append((k.copy(), f(k)))
        if np.max(np.abs(k - before)) < xtol:
            break
    return k, trace


@dataclass
class FourierScan:
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    k0: np.ndarray
    A0: float
    ties: np.ndarray
    trace: list = field(repr=False)
    converged: bool
    small_k: bool

    def rows(self):
        """``(kx, ky, kz, reA, imA, absA)`` per grid point."""
        for k, v in zip(self.grid, self.values):
            yield float(k[0]), float(k[1]), float(k[2]), float(v.real), float(v.imag), float(abs(v))

    def summary(self) -> dict:
        return {
            "k0": [float(x) for x in self.k0],
            "k0_over_pi": [float(x / math.pi) for x in self.k0],
            "A0": float(self.A0),
            "ties": [[float(x) for x in t] for t in self.ties],
            "converged": bool(self.converged),
            "small_k": bool(self.small_k),
            "units": "a^-3 (k in a^-1)",
        }


def scan_bz(source, grid_density=24, sweeps=4, tol=FOURIER_TOL) -> FourierScan:
    """Locate the maximum of ``|A(k)|`` over the Brillouin zone.

    A uniform ``grid_density^3`` sample of ``[-pi, pi)^3`` is followed by
    golden-section refinement along each axis around every grid point that
    ties the maximum within ``TIE_RTOL``. Refined maxima equivalent under the
    reciprocal lattice are merged. ``small_k`` flags a maximum within one grid
    step of the zone centre, where the mean-field ordering is ferromagnetic
    with domains rather than a modulated structure.
    """
    if grid_density < 2:
        raise ValueError("grid_density must be at least 2")
    offsets, weights, _ = _source(source)
    grid = bz_grid(grid_density)
    values = kernels.fourier_sum(grid, offsets, weights)
    mags = np.abs(values)
    top = mags.max()
    cand = np.flatnonzero(mags >= top * (1 - TIE_RTOL))
    step = 2 * math.pi / grid_density

    def f(k):
        return float(np.abs(kernels.fourier_sum(k[None, :], offsets, weights))[0])

    refined = []
    traces = []
    for idx in cand:
        k, trace = _golden_refine(f, grid[idx], step, sweeps=sweeps)
        traces.append(trace)
        kr = reduce_to_bz(k)
        refined.append((kr, f(kr)))
    best_val = max(v for _, v in refined)
    ties = []
    for kr, v in refined:
        if v >= best_val * (1 - 1e-7) and not any(equivalent(kr, t) for t in ties):
            ties.append(kr)
    ties.sort(key=lambda q: tuple(np.round(-q, 9)))
    k0 = ties[0]
    conv = _fourier_converged(source, k0, tol)
    return FourierScan(grid, values, k0, best_val, np.array(ties), traces[0], conv,
                       bool(np.linalg.norm(k0) < step))


def _fourier_converged(source, k, tol):
    if isinstance(source, (LatticeSpec, CouplingTable)):
        return fourier_A(source, k, tol).converged
    return True


def transition_temperature(I, S, gamma_I=1.0, gamma_S=1.0, A0=0.0, c=C_REDUCED) -> float:
    """``k_B T_c = sqrt(I(I+1) S(S+1)) / 3 * c gamma_I gamma_S A0``."""
    if A0 < 0:
        raise ValueError("A0 is a magnitude")
    return math.sqrt(I * (I + 1) * S * (S + 1)) / 3.0 * c * gamma_I * gamma_S * A0


def critical_entropy(I, S, gamma_I, gamma_S, A0, sumA2, c=C_REDUCED) -> tuple:
    """``(S_c, deficit)`` per I-S site pair at the mean-field transition."""
    kTc = transition_temperature(I, S, gamma_I, gamma_S, A0, c)
    if kTc <= 0:
        raise ValueError("A0 must be positive")
    beta_c = 1.0 / kTc
    deficit = (0.5 * beta_c ** 2 * (I * (I + 1) / 3.0) * (S * (S + 1) / 3.0)
               * 3.0 * (c * gamma_I * gamma_S) ** 2 * sumA2)
    s_max = math.log(2 * I + 1) + math.log(2 * S + 1)
    return s_max - deficit, deficit


def pre_adrf_entropy(I, S, kappa_I, kappa_S) -> float:
    """High-temperature Zeeman entropy of an I-S pair, ``kappa_s = beta_s gamma_s hbar B0``."""
    return (math.log(2 * I + 1) + math.log(2 * S + 1)
            - I * (I + 1) / 6.0 * kappa_I ** 2 - S * (S + 1) / 6.0 * kappa_S ** 2)


@dataclass
class MeanFieldResult:
    I: float
    S: float
    gamma_I: float
    gamma_S: float
    A0: float
    sumA2: float
    pumping: str
    kBTc: float
    lambda_I: float
    lambda_S: float
    critical_entropy: float
    entropy_deficit: float
    kappa_I: float
    kappa_S: float
    p_c_I: float
    p_c_S: float
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "I", "S", "gamma_I", "gamma_S", "A0", "sumA2", "pumping", "kBTc", "lambda_I",
            "lambda_S", "critical_entropy", "entropy_deficit", "kappa_I", "kappa_S",
            "p_c_I", "p_c_S")}
        out = {k: (float(v) if not isinstance(v, str) else v) for k, v in out.items()}
        out["metadata"] = dict(self.metadata)
        return out


def critical_polarization(I, S, sumA2, A0, pumping="optical", gamma_I=1.0, gamma_S=1.0,
                          c=C_REDUCED) -> MeanFieldResult:
    """Initial polarizations whose Zeeman entropy equals the critical entropy.

    ``common-beta`` uses one spin temperature, so ``kappa_s`` scales with
    ``gamma_s``; ``optical`` uses ``beta_I gamma_I = beta_S gamma_S``, a shared
    ``kappa``. The entropy deficit of the critical state,
    ``1.5 sumA2 / A0^2``, depends on neither the spins nor the ratios, so under
    optical pumping the result is independent of ``gamma_I / gamma_S``.
    Polarizations come from the exact single-spin magnetisation.
    """
    if pumping not in PUMPING:
        raise ValueError(f"pumping must be one of {PUMPING}")
    if sumA2 < 0:
        raise ValueError("sumA2 must be non-negative")
    s_c, deficit = critical_entropy(I, S, gamma_I, gamma_S, A0, sumA2, c)
    if s_c <= 0:
        raise ValueError("already ordered at infinite temperature: critical entropy <= 0")
    xi, xs = I * (I + 1), S * (S + 1)
    if pumping == "common-beta":
        y = math.sqrt(6.0 * deficit / (gamma_I ** 2 * xi + gamma_S ** 2 * xs))
        k_i, k_s = y * gamma_I, y * gamma_S
    else:
        k_i = k_s = math.sqrt(6.0 * deficit / (xi + xs))
    kTc = transition_temperature(I, S, gamma_I, gamma_S, A0, c)
    return MeanFieldResult(
        I=I, S=S, gamma_I=gamma_I, gamma_S=gamma_S, A0=A0, sumA2=sumA2, pumping=pumping,
        kBTc=kTc,
        lambda_I=3.0 / (xi / kTc),
        lambda_S=3.0 / (xs / kTc),
        critical_entropy=s_c,
        entropy_deficit=deficit,
        kappa_I=k_i,
        kappa_S=k_s,
        p_c_I=brillouin(k_i, I) / I,
        p_c_S=brillouin(k_s, S) / S,
        metadata={"caveat": CLASSICAL_CAVEAT, "units": "eps", "c": c,
                  "entropy": "high-temperature Zeeman form; exact single-spin polarization"},
    )


def polarization_entropy_roundtrip(res: MeanFieldResult) -> float:
    """Pre-ADRF entropy at ``p_c`` minus the critical entropy (should vanish)."""
    from .semiinv import eta_from_polarization

    k_i = eta_from_polarization(res.p_c_I, res.I)
    k_s = eta_from_polarization(res.p_c_S, res.S)
    return pre_adrf_entropy(res.I, res.S, k_i, k_s) - res.critical_entropy


@dataclass
class EquilibrationCheck:
    ratio: float
    beta_prime_I: float
    beta_prime_S: float
    matched: bool
    mismatch: float


def equilibration_check(beta_I, beta_S, gamma_I, gamma_S, omega_I, omega_S, B0,
                        rtol=1e-6) -> EquilibrationCheck:
    """Compare the spin temperatures reached by each species after its own sweep.

    Each species keeps its entropy while its effective field drops from ``B0``
    to ``sqrt(2) (B0 - omega_s / gamma_s)``, so
    ``beta'_s = beta_s B0 / (sqrt(2) (B0 - omega_s / gamma_s))``. With matched
    detunings ``gamma_I (B0 - omega_I/gamma_I) = gamma_S (B0 - omega_S/gamma_S)``
    the ratio reduces to ``beta_I gamma_I / (beta_S gamma_S)``.
    """
    det_i = B0 - omega_I / gamma_I
    det_s = B0 - omega_S / gamma_S
    if det_i == 0 or det_s == 0:
        raise ValueError("on-resonance sweep end point: effective field vanishes")
    bp_i = beta_I * B0 / (det_i * math.sqrt(2.0))
    bp_s = beta_S * B0 / (det_s * math.sqrt(2.0))
    lhs, rhs = gamma_I * det_i, gamma_S * det_s
    mismatch = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return EquilibrationCheck(bp_i / bp_s, bp_i, bp_s, mismatch <= rtol, mismatch)


@dataclass
class MeanFieldReport:
    scan: FourierScan
    sumA2: float
    sumA2_converged: bool
    result: MeanFieldResult


def analyse(spec: LatticeSpec, I=4.5, S=0.5, gamma_I=1.0, gamma_S=1.0, pumping="optical",
            grid_density=24) -> MeanFieldReport:
    """Full pipeline on a zincblende spec: scan, sums, critical polarizations."""
    sites = build_sites(spec)
    table = coupling_table(spec, "IS", sites=sites)
    scan = scan_bz(table, grid_density)
    a2 = sum_A_squared(spec, sites)
    res = critical_polarization(I, S, a2.value, scan.A0, pumping, gamma_I, gamma_S)
    res.metadata.update({"k0": scan.summary()["k0"], "r_max": spec.r_max,
                         "fourier_converged": scan.converged})
    return MeanFieldReport(scan, a2.value, a2.converged, res)
