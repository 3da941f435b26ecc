"""High-temperature expansion of a homonuclear secular dipolar lattice.

The Zeeman part enters to all orders through the single-spin functions of
:mod:`spinsim.semiinv`; the dipolar part is expanded in the dipolar inverse
temperature ``beta`` up to second order:

    <H'_D> / N = beta * G1 + beta^2 * G2

``G1`` and ``G2`` use the lattice constants ``I2, I3, K3`` and assume
``v_ij = -u_ij / 2``. Signs were checked against exact cluster cumulants:
``G1 = -kappa_2(H'_D) / N`` and ``G2 = +kappa_3(H'_D) / (2N)``, so the
expansion is used with the plus signs shown above. The expansion also assumes
``sum_j u_ij = 0`` (true shell by shell on the cubic lattices used here).

Energies are in the reduced unit ``eps`` of :mod:`spinsim.lattice`; the
detuning ``delta`` plays the role of ``hbar*omega_0`` and ``eta = -beta0*delta``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .lattice import local_field_BL, sums_values
from .semiinv import (
    log_f_j,
    longitudinal_from_t,
    t_duals,
    t_moments,
    transverse_from_t,
)


class Order(str, Enum):
    HIGH_T = "highT"
    G1 = "G1"
    G1G2 = "G1+G2"

    @classmethod
    def parse(cls, value) -> "Order":
        if isinstance(value, cls):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown order {value!r}; expected one of {[m.value for m in cls]}")


def _g_functions(t1, t2, t3, j, I2, I3, K3):
    m1, m2, m3 = longitudinal_from_t(t1, t2, t3)
    tr = transverse_from_t(t1, t2, t3, j)
    pm_mp = tr.pm2 * tr.mp2
    g1 = -0.5 * (m2 * m2 * I2 + pm_mp * I2 / 8.0)
    g2 = 0.5 * (
        0.5 * m3 * m3 * I3
        + tr.zpm3 * tr.zmp3 * I3 / 16.0
        + m2 ** 3 * K3
        + (tr.pzm3 * tr.mzp3 + tr.zpm3 * tr.zmp3) * I3 / 16.0
        - pm_mp * (tr.pm2 + tr.mp2) * K3 / 64.0
    )
    return g1, g2


def G1(eta, j, sums):
    I2, I3, K3 = sums_values(sums)
    t = t_moments(eta, j, 3)
    return _g_functions(*t, j, I2, I3, K3)[0]


def G2(eta, j, sums):
    I2, I3, K3 = sums_values(sums)
    t = t_moments(eta, j, 3)
    return _g_functions(*t, j, I2, I3, K3)[1]


def g_with_derivatives(eta, j, sums):
    """``(G1, G2, dG1/deta, dG2/deta)`` from the ``t`` recurrence."""
    I2, I3, K3 = sums_values(sums)
    t1, t2, t3 = t_duals(eta, j, 3)
    g1, g2 = _g_functions(t1, t2, t3, j, I2, I3, K3)
    return g1.val, g2.val, g1.der, g2.der


def dG_deta(eta, j, sums):
    """``(dG1/deta, dG2/deta)``."""
    _, _, d1, d2 = g_with_derivatives(eta, j, sums)
    return d1, d2


def _series_terms(beta, eta, j, sums, order):
    """Coefficients that the truncated series needs, zeroed beyond ``order``."""
    g1, g2, d1, d2 = g_with_derivatives(eta, j, sums)
    if order is Order.G1:
        g2 = d2 = 0.0 * g2
    return g1, g2, d1, d2


@dataclass
class ThermoState:
    beta: float
    beta0: float
    delta: float
    eta: float
    j: float
    order: str
    entropy_per_spin: float
    polarization_per_spin: float
    energy_per_spin: float
    log_partition_per_spin: float

    def as_dict(self) -> dict:
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                for k, v in asdict(self).items()}


def _high_t(beta, eta, j, sums):
    I2, _, _ = sums_values(sums)
    m = j * (j + 1) / 3.0
    bl2 = local_field_BL(I2, j) ** 2
    lnz = math.log(2 * j + 1) + 0.5 * m * (eta * eta + beta * beta * bl2)
    pol = m * eta
    energy = -beta * m * bl2
    return lnz, pol, energy


def log_partition(beta, eta, j, sums, order=Order.G1G2):
    """``ln Z / N = ln f_j(eta) - sum_n beta^(n+1) / (n+1) G_n``."""
    order = Order.parse(order)
    if order is Order.HIGH_T:
        return _high_t(beta, eta, j, sums)[0]
    g1, g2, _, _ = _series_terms(beta, eta, j, sums, order)
    return log_f_j(eta, j) - beta ** 2 / 2 * g1 - beta ** 3 / 3 * g2


def dipolar_energy(beta, eta, j, sums, order=Order.G1G2):
    """``<H'_D> / N = beta G1 + beta^2 G2`` (``G2`` dropped at first order)."""
    order = Order.parse(order)
    if order is Order.HIGH_T:
        return _high_t(beta, eta, j, sums)[2]
    g1, g2, _, _ = _series_terms(beta, eta, j, sums, order)
    return beta * g1 + beta ** 2 * g2


def polarization(beta, eta, j, sums, order=Order.G1G2):
    """``<I^z> / N = t1 - sum_n beta^(n+1) / (n+1) dG_n/deta`` (signed, follows ``eta``)."""
    order = Order.parse(order)
    if order is Order.HIGH_T:
        return _high_t(beta, eta, j, sums)[1]
    _, _, d1, d2 = _series_terms(beta, eta, j, sums, order)
    t1 = t_moments(eta, j, 1)[0]
    return t1 - beta ** 2 / 2 * d1 - beta ** 3 / 3 * d2


def entropy(beta, eta, j, sums, order=Order.G1G2):
    """Entropy per spin in units of ``k_B``.

    Series orders: ``-eta t1 + ln f + sum_n beta^(n+1)/(n+1) (n G_n + eta dG_n/deta)``.
    ``highT`` is the quadratic form
    ``ln(2j+1) - j(j+1)/6 * (eta^2 + beta^2 (hbar gamma B_L)^2)``, which with
    ``beta0 = beta`` reads ``ln(2j+1) - beta^2 j(j+1)/6 [delta^2 + (hbar gamma B_L)^2]``.
    """
    order = Order.parse(order)
    if order is Order.HIGH_T:
        I2, _, _ = sums_values(sums)
        bl2 = local_field_BL(I2, j) ** 2
        return math.log(2 * j + 1) - j * (j + 1) / 6.0 * (eta * eta + beta * beta * bl2)
    g1, g2, d1, d2 = _series_terms(beta, eta, j, sums, order)
    t1 = t_moments(eta, j, 1)[0]
    return (
        -eta * t1
        + log_f_j(eta, j)
        + beta ** 2 / 2 * (g1 + eta * d1)
        + beta ** 3 / 3 * (2 * g2 + eta * d2)
    )


def thermo_state(j, sums, beta, beta0=None, delta=0.0, order=Order.G1G2) -> ThermoState:
    """Evaluate every quantity at one point; ``beta0`` defaults to ``beta``."""
    order = Order.parse(order)
    beta0 = beta if beta0 is None else beta0
    eta = -beta0 * delta
    return ThermoState(
        beta=float(beta),
        beta0=float(beta0),
        delta=float(delta),
        eta=float(eta),
        j=float(j),
        order=order.value,
        entropy_per_spin=float(entropy(beta, eta, j, sums, order)),
        polarization_per_spin=float(polarization(beta, eta, j, sums, order)),
        energy_per_spin=float(dipolar_energy(beta, eta, j, sums, order)),
        log_partition_per_spin=float(log_partition(beta, eta, j, sums, order)),
    )


def susceptibility_factor(j, beta, b_local):
    """Linear response ``<I^z>/N ~ -(beta delta) * susceptibility_factor``.

    ``j(j+1)/540 * [180 - (33 + 56 j + 56 j^2) beta^2 (hbar gamma B_L)^2]``.
    """
    return j * (j + 1) / 540.0 * (180.0 - (33 + 56 * j + 56 * j * j) * beta * beta * b_local ** 2)


def tc_from_susceptibility(j, b_local):
    """``k_B T_c`` where the linear susceptibility vanishes.

    ``b_local`` is the local field as an energy, ``hbar*gamma*B_L``.
    """
    if b_local <= 0:
        raise ValueError("local field must be positive")
    return b_local * math.sqrt((33 + 56 * j + 56 * j * j) / 180.0)


__all__ = [
    "Order",
    "ThermoState",
    "G1",
    "G2",
    "dG_deta",
    "g_with_derivatives",
    "log_partition",
    "dipolar_energy",
    "polarization",
    "entropy",
    "thermo_state",
    "susceptibility_factor",
    "tc_from_susceptibility",
]
