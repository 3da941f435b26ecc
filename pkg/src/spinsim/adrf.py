"""Constant-entropy ADRF sweeps.

The initial entropy is the exact single-spin Zeeman entropy of the starting
polarization. At each detuning the spin temperature is the root of
``S(beta, beta0=beta, delta) = S_target``. The truncated series entropy is
only trusted on the interval where it decreases monotonically from
``beta = 0``; when the target lies beyond the first minimum the point is
reported as not converged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import hte
from .hte import Order
from .lattice import local_field_BL, sums_values
from .semiinv import brillouin, eta_from_polarization, log_f_j

MAX_STEPS = 4000
GROWTH = 1.05


def initial_entropy(p, j, mode="exact"):
    """Zeeman entropy per spin of a spin-``j`` paramagnet with polarization ``p``.

    ``mode="highT"`` returns the quadratic form ``ln(2j+1) - kappa^2 j(j+1)/6``
    with ``kappa`` still taken from the exact inversion of the polarization.
    """
    if not 0 <= p < 1:
        raise ValueError("polarization must lie in [0, 1); p = 1 has zero entropy")
    eta = eta_from_polarization(p, j)
    if mode == "highT":
        return math.log(2 * j + 1) - eta * eta * j * (j + 1) / 6.0
    if mode != "exact":
        raise ValueError("mode must be 'exact' or 'highT'")
    return -eta * brillouin(eta, j) + log_f_j(eta, j)


def entropy_at(beta, delta, j, sums, order):
    """Entropy per spin with a single spin temperature (``beta0 = beta``)."""
    return hte.entropy(beta, -beta * delta, j, sums, order)


def high_t_beta(s_target, delta, j, sums):
    """Closed-form inverse temperature of the quadratic high-temperature entropy."""
    I2, _, _ = sums_values(sums)
    bl2 = local_field_BL(I2, j) ** 2
    deficit = math.log(2 * j + 1) - s_target
    return math.sqrt(2 * deficit / (j * (j + 1) / 3.0 * (delta * delta + bl2)))


@dataclass
class BetaSolution:
    beta: float
    converged: bool
    reason: str = ""


def solve_beta(s_target, delta, j, sums, order=Order.G1G2, hint=None) -> BetaSolution:
    """Spin temperature at detuning ``delta`` for a fixed entropy.

    Marches out from ``beta = 0`` with geometrically growing steps (initial
    step from the high-temperature closed form or ``hint``), brackets the
    first crossing of ``s_target`` and polishes it with Brent's method. If the
    entropy turns upward first, the minimum is located; a minimum above the
    target means the series has no physical root and ``converged=False``.
    """
    order = Order.parse(order)
    s_max = math.log(2 * j + 1)
    if s_target > s_max + 1e-15:
        raise ValueError("target entropy exceeds ln(2j+1)")
    if s_target <= 0:
        raise ValueError("target entropy must be positive")
    if s_target >= s_max:
        return BetaSolution(0.0, True)

    def excess(b):
        return float(entropy_at(b, delta, j, sums, order)) - s_target

    scale = hint if hint else high_t_beta(s_target, delta, j, sums)
    step = scale / 16.0
    b_prev, s_prev = 0.0, excess(0.0)
    for _ in range(MAX_STEPS):
        b = b_prev + step
        s = excess(b)
        if s <= 0:
            root = brentq(excess, b_prev, b, xtol=1e-15 * max(b, 1.0), rtol=1e-15, maxiter=200)
            return BetaSolution(root, True)
        if s >= s_prev:
            lo = max(b_prev - step / GROWTH, 0.0)
            res = minimize_scalar(excess, bounds=(lo, b), method="bounded",
                                  options={"xatol": 1e-12 * b})
            if res.fun <= 0:
                root = brentq(excess, lo, res.x, xtol=1e-15 * max(b, 1.0), rtol=1e-15)
                return BetaSolution(root, True)
            return BetaSolution(
                math.nan, False,
                f"series entropy has a minimum {res.fun + s_target:.6g} above the target "
                f"at beta={res.x:.6g}",
            )
        b_prev, s_prev = b, s
        step *= GROWTH
    return BetaSolution(math.nan, False, "no root within the search range")


@dataclass
class AdrfPoint:
    delta_over_BL: float
    T_over_Tc: float
    beta: float
    converged: bool
    order: str


@dataclass
class AdrfCurve:
    points: list
    initial_polarization: float
    j: float
    order: str
    s_target: float
    b_local: float
    kTc: float
    metadata: dict = field(default_factory=dict)

    @property
    def all_converged(self) -> bool:
        return all(p.converged for p in self.points)

    def rows(self):
        for p in self.points:
            yield p.delta_over_BL, p.T_over_Tc, p.beta, p.converged


def default_delta_grid(n=200):
    """``n - 1`` log-spaced detunings from ``10 B_L`` to ``1e-3 B_L``, then 0 (units of B_L)."""
    return np.concatenate([np.logspace(1, -3, n - 1), [0.0]])


def sweep(p, j, sums, delta_grid=None, order=Order.G1G2, metadata=None) -> AdrfCurve:
    """Solve the spin temperature along a descending detuning grid.

    ``delta_grid`` is in units of the local field ``hbar gamma B_L``;
    temperatures are reported relative to the susceptibility-zero ``T_c``.
    Each point starts from the previous converged ``beta`` as a step scale only,
    so results do not depend on the warm start beyond solver tolerance.
    """
    order = Order.parse(order)
    I2, _, _ = sums_values(sums)
    b_local = local_field_BL(I2, j)
    kTc = hte.tc_from_susceptibility(j, b_local)
    grid = default_delta_grid() if delta_grid is None else np.asarray(delta_grid, dtype=float)
    s_target = initial_entropy(p, j)
    points = []
    hint = None
    for x in grid:
        sol = solve_beta(s_target, x * b_local, j, sums, order, hint=hint)
        if sol.converged and sol.beta > 0:
            hint = sol.beta
        t_ratio = 1.0 / (sol.beta * kTc) if sol.converged and sol.beta > 0 else (
            math.inf if sol.converged else math.nan)
        points.append(AdrfPoint(float(x), t_ratio, sol.beta, sol.converged, order.value))
    return AdrfCurve(points, p, j, order.value, s_target, b_local, kTc, metadata or {})
