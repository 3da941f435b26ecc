"""Single-spin Zeeman averages and the semi-invariants built from them.

For a spin ``j`` with weights ``exp(eta * m)``, ``f_j(eta) = tr exp(eta I^z)``
and ``t^(n) = f^-1 d^n f / d eta^n`` is the n-th raw moment of ``m``. The
semi-invariants are cumulant-like combinations of the ``t^(n)``; the
transverse ones are ordered (the blocks of a partition keep the operator
order of the word).

Derivatives in ``eta`` follow from ``d t^(n) / d eta = t^(n+1) - t^(1) t^(n)``
and are propagated through every formula with :class:`Dual`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SERIES_THRESHOLD = 1e-4


def _check_j(j):
    twice = 2 * j
    if j <= 0 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"j must be a positive half-integer, got {j}")


def _levels(j):
    return np.arange(-j, j + 0.5, 1.0)


def _power_sums(j):
    # sum_m m^k for k = 0, 2, 4, 6 (odd sums vanish)
    x = j * (j + 1)
    n = 2 * j + 1
    return (
        n,
        n * x / 3.0,
        n * x * (3 * x - 1) / 15.0,
        n * x * (3 * x * x - 3 * x + 1) / 21.0,
    )


def log_f_j(eta, j):
    """``ln f_j(eta)``, finite for any finite ``eta``."""
    _check_j(j)
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise ValueError("eta must be finite")
    a = np.abs(eta)
    small = a < SERIES_THRESHOLD
    safe = np.where(small, 1.0, a)
    big = safe * j + np.log1p(-np.exp(-(2 * j + 1) * safe)) - np.log1p(-np.exp(-safe))
    s0, s2, s4, s6 = _power_sums(j)
    e2 = eta * eta
    series = np.log(s0 + e2 / 2 * s2 + e2 * e2 / 24 * s4 + e2 ** 3 / 720 * s6)
    out = np.where(small, series, big)
    return float(out) if out.ndim == 0 else out


def f_j(eta, j):
    """``sinh[eta (j + 1/2)] / sinh(eta / 2)``; equals ``2j + 1`` at ``eta = 0``."""
    eta = np.asarray(eta, dtype=float)
    small = np.abs(eta) < SERIES_THRESHOLD
    if np.all(small):
        s0, s2, s4, s6 = _power_sums(j)
        e2 = eta * eta
        out = s0 + e2 / 2 * s2 + e2 * e2 / 24 * s4 + e2 ** 3 / 720 * s6
        return float(out) if out.ndim == 0 else out
    return np.exp(log_f_j(eta, j))


def t_moments(eta, j, n_max):
    """``[t^(1), ..., t^(n_max)]`` stacked along the first axis.

    Evaluated as normalised moment sums over the ``2j + 1`` levels with weights
    shifted by the largest exponent, so large ``|eta| * j`` cannot overflow.
    """
    _check_j(j)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise ValueError("eta must be finite")
    m = _levels(j)
    expo = eta[..., None] * m
    w = np.exp(expo - expo.max(axis=-1, keepdims=True))
    w /= w.sum(axis=-1, keepdims=True)
    powers = m[None, :] ** np.arange(1, n_max + 1)[:, None]
    return np.einsum("...m,km->k...", w, powers)


def t_n(eta, j, n):
    """``t^(n)(eta)`` for a single order ``n >= 1``."""
    out = t_moments(eta, j, n)[n - 1]
    return float(out) if np.ndim(out) == 0 else out


def brillouin(eta, j):
    """Single-spin magnetisation ``t^(1)``; ``t^(1) / j`` is the polarization."""
    return t_n(eta, j, 1)


def eta_from_polarization(p, j):
    """Invert ``t^(1)(eta) / j = p`` for ``0 <= p < 1``."""
    from scipy.optimize import brentq

    if not 0 <= p < 1:
        raise ValueError("polarization must lie in [0, 1)")
    if p == 0:
        return 0.0
    hi = 1.0
    while brillouin(hi, j) / j < p:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("polarization too close to 1")
    return brentq(lambda e: brillouin(e, j) / j - p, 0.0, hi, xtol=1e-15, rtol=1e-15)


class Dual:
    """Value and first derivative, closed under +, -, * and integer powers."""

    __slots__ = ("val", "der")

    def __init__(self, val, der=0.0):
        self.val = val
        self.der = der

    @staticmethod
    def _lift(x):
        return x if isinstance(x, Dual) else Dual(x, 0.0)

    def __add__(self, other):
        o = self._lift(other)
        return Dual(self.val + o.val, self.der + o.der)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Dual(self.val - o.val, self.der - o.der)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __mul__(self, other):
        o = self._lift(other)
        return Dual(self.val * o.val, self.der * o.val + self.val * o.der)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            raise TypeError("division by a Dual is not needed here")
        return Dual(self.val / other, self.der / other)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise TypeError("only non-negative integer powers")
        return Dual(self.val ** n, n * self.val ** (n - 1) * self.der if n else 0.0 * self.der)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.der!r})"


def t_duals(eta, j, n_max):
    """``t^(1..n_max)`` as :class:`Dual` numbers carrying ``d/d eta``."""
    t = t_moments(eta, j, n_max + 1)
    return [Dual(t[k], t[k + 1] - t[0] * t[k]) for k in range(n_max)]


def longitudinal_from_t(t1, t2, t3):
    m1 = t1
    m2 = t2 - t1 ** 2
    m3 = t3 - 3 * t2 * t1 + 2 * t1 ** 3
    return m1, m2, m3


@dataclass
class Transverse:
    """Ordered transverse semi-invariants.

    ``pm2`` and ``mp2`` are M2(+-) and M2(-+); ``zpm3`` is M3(z+-) = M3(+-z),
    ``zmp3`` is M3(z-+) = M3(-+z); ``pzm3_comb`` and ``mzp3_comb`` are the
    combinations M3(+z-) + M1 M2(+-) and M3(-z+) + M1 M2(-+).
    """

    pm2: object
    mp2: object
    zpm3: object
    zmp3: object
    pzm3_comb: object
    mzp3_comb: object
    m1: object

    @property
    def pzm3(self):
        return self.pzm3_comb - self.m1 * self.pm2

    @property
    def mzp3(self):
        return self.mzp3_comb - self.m1 * self.mp2


def transverse_from_t(t1, t2, t3, j):
    jj = j * (j + 1)
    return Transverse(
        pm2=jj + t1 - t2,
        mp2=jj - t1 - t2,
        zpm3=-(t1 ** 2) + t2 * (1 + t1) - t3,
        zmp3=t1 ** 2 - t2 * (1 - t1) - t3,
        pzm3_comb=-jj + (jj - 1) * t1 + 2 * t2 - t3,
        mzp3_comb=jj + (jj - 1) * t1 - 2 * t2 - t3,
        m1=t1,
    )


def longitudinal_M(eta, j):
    """``(M1, M2, M3)`` at ``eta``."""
    return longitudinal_from_t(*t_moments(eta, j, 3))


def transverse_M(eta, j):
    return transverse_from_t(*t_moments(eta, j, 3), j)


@dataclass
class SemiInvariantSet:
    eta: float
    j: float
    t: tuple
    M_long: tuple
    M_trans: Transverse

    def as_dict(self) -> dict:
        tr = self.M_trans
        return {
            "eta": float(self.eta),
            "j": float(self.j),
            "t1": float(self.t[0]),
            "t2": float(self.t[1]),
            "t3": float(self.t[2]),
            "M1": float(self.M_long[0]),
            "M2": float(self.M_long[1]),
            "M3": float(self.M_long[2]),
            "M2_pm": float(tr.pm2),
            "M2_mp": float(tr.mp2),
            "M3_zpm": float(tr.zpm3),
            "M3_zmp": float(tr.zmp3),
            "M3_pzm_comb": float(tr.pzm3_comb),
            "M3_mzp_comb": float(tr.mzp3_comb),
        }


def semi_invariants(eta, j) -> SemiInvariantSet:
    t = t_moments(eta, j, 3)
    return SemiInvariantSet(eta, j, tuple(t), longitudinal_from_t(*t), transverse_from_t(*t, j))


# --- trace oracle -------------------------------------------------------------

@lru_cache(maxsize=None)
def spin_matrices(j):
    """``(I^z, I^+, I^-)`` for spin ``j`` in the basis ``m = j, j-1, ..., -j``."""
    _check_j(j)
    m = np.arange(j, -j - 0.5, -1.0)
    d = len(m)
    iz = np.diag(m)
    ip = np.zeros((d, d))
    for k in range(1, d):
        ip[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    return iz, ip, ip.T.copy()


def oracle_moments(eta, j, n_max=3) -> dict:
    """Thermal averages ``<O_1 ... O_k>_0`` for every word over ``z, +, -``.

    Computed as dense matrix traces against ``exp(eta I^z) / f_j``; keys are
    strings such as ``"z+-"``.
    """
    iz, ip, im = spin_matrices(j)
    ops = {"z": iz, "+": ip, "-": im}
    m = np.diag(iz)
    w = np.exp(eta * m - np.max(eta * m))
    rho = np.diag(w / w.sum())
    out = {}
    for k in range(1, n_max + 1):
        for word in itertools.product("z+-", repeat=k):
            prod = rho
            for letter in word:
                prod = prod @ ops[letter]
            out["".join(word)] = float(np.trace(prod))
    return out


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def ordered_cumulant(word, moments) -> float:
    """Ordered semi-invariant of ``word`` from raw moments.

    Moments are split over all set partitions of the operator positions, each
    block keeping the original operator order.
    """
    @lru_cache(maxsize=None)
    def kappa(w):
        total = moments[w]
        idx = list(range(len(w)))
        for part in _set_partitions(idx):
            if len(part) == 1:
                continue
            prod = 1.0
            for block in part:
                prod *= kappa("".join(w[i] for i in sorted(block)))
            total -= prod
        return total

    return kappa(word)


def oracle_semi_invariants(eta, j) -> dict:
    """Semi-invariants reconstructed purely from :func:`oracle_moments`."""
    mom = oracle_moments(eta, j, 3)

    def k(w):
        return ordered_cumulant(w, mom)

    return {
        "M1": k("z"),
        "M2": k("zz"),
        "M3": k("zzz"),
        "M2_pm": k("+-"),
        "M2_mp": k("-+"),
        "M3_zpm": k("z+-"),
        "M3_pmz": k("+-z"),
        "M3_zmp": k("z-+"),
        "M3_mpz": k("-+z"),
        "M3_pzm_comb": k("+z-") + k("z") * k("+-"),
        "M3_mzp_comb": k("-z+") + k("z") * k("-+"),
    }
