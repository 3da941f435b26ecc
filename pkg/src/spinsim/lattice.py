"""Lattice geometry and dipolar lattice sums.

Positions are in units of the half cell edge ``a`` (the conventional cubic cell
has edge ``2a``). Site coordinates are generated on an integer grid of spacing
``a/2`` so that shells (all sites with equal ``|r|``) are identified exactly.

Energies are reduced: ``(mu0/4pi) hbar^2 / a^3 = 1``, so a coupling between
species with gyromagnetic ratios ``g1, g2`` is ``g1 * g2 * (1 - 3 cos^2) / r^3``.
All sums are returned in powers of that unit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

STRUCTURES = ("fcc", "zincblende")
DEFAULT_FIELD = (1.0, 1.0, 1.0)
DEFAULT_R_MAX = 12.0
DEFAULT_TOL = 1e-4


class ConvergenceWarning(UserWarning):
    """A lattice sum did not meet its last-shell tolerance."""


@dataclass(frozen=True)
class SpeciesSpec:
    name: str
    j: float
    gamma: float = 1.0
    sublattice: int = 0

    def __post_init__(self):
        twice = 2 * self.j
        if self.j <= 0 or abs(twice - round(twice)) > 1e-12:
            raise ValueError(f"spin of {self.name!r} must be a positive half-integer, got {self.j}")
        if self.gamma <= 0:
            raise ValueError(f"gamma of {self.name!r} must be positive, got {self.gamma}")
        if self.sublattice not in (0, 1):
            raise ValueError("sublattice index must be 0 or 1")


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry and truncation.

    ``field_dir`` is normalised on construction. ``r_max`` is in units of ``a``.
    """

    structure: str = "fcc"
    half_edge: float = 1.0
    field_dir: tuple = DEFAULT_FIELD
    r_max: float = DEFAULT_R_MAX
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}; expected one of {STRUCTURES}")
        h = np.asarray(self.field_dir, dtype=float)
        norm = np.linalg.norm(h)
        if h.shape != (3,) or norm == 0:
            raise ValueError("field_dir must be a non-zero 3-vector")
        object.__setattr__(self, "field_dir", tuple(h / norm))
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.half_edge <= 0:
            raise ValueError("half_edge must be positive")

    @property
    def field(self) -> np.ndarray:
        return np.array(self.field_dir)

    @property
    def pairs(self) -> tuple:
        return ("II",) if self.structure == "fcc" else ("II", "IS")


@dataclass(frozen=True)
class Shell:
    index: int
    radius: float
    offsets: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class SiteSet:
    """All neighbour offsets of one species pair, grouped into shells."""

    pair: str
    r_max: float
    shells: tuple

    @property
    def offsets(self) -> np.ndarray:
        if not self.shells:
            return np.zeros((0, 3))
        return np.concatenate([s.offsets for s in self.shells])

    @property
    def shell_index(self) -> np.ndarray:
        if not self.shells:
            return np.zeros(0, dtype=int)
        return np.concatenate([np.full(s.count, s.index) for s in self.shells])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.radius for s in self.shells])

    @property
    def counts(self) -> np.ndarray:
        return np.array([s.count for s in self.shells])


def _half_grid(r_max: float, shifted: bool) -> np.ndarray:
    # fcc sites in units of a/2: even coordinates with coordinate sum divisible by 4;
    # the zincblende partner sublattice adds (1, 1, 1)
    n = 2 * int(math.ceil(r_max)) + 2
    axis = np.arange(-n, n + 1, 2)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), -1).reshape(-1, 3)
    grid = grid[grid.sum(axis=1) % 4 == 0]
    if shifted:
        grid = grid + 1
    return grid


def _shells_from_grid(grid: np.ndarray, r_max: float, pair: str) -> SiteSet:
    n2 = np.einsum("ij,ij->i", grid, grid)
    limit = 4.0 * r_max * r_max * (1 + 1e-12)
    keep = (n2 > 0) & (n2 <= limit)
    grid, n2 = grid[keep], n2[keep]
    order = np.lexsort((grid[:, 2], grid[:, 1], grid[:, 0], n2))
    grid, n2 = grid[order], n2[order]
    keys, starts = np.unique(n2, return_index=True)
    bounds = list(starts) + [len(n2)]
    shells = tuple(
        Shell(index=k, radius=math.sqrt(key) / 2.0, offsets=grid[bounds[k]:bounds[k + 1]] / 2.0)
        for k, key in enumerate(keys)
    )
    return SiteSet(pair=pair, r_max=r_max, shells=shells)


def build_sites(spec: LatticeSpec) -> dict:
    """Neighbour offsets within ``spec.r_max`` for every species pair of the structure.

    Returns a mapping ``{"II": SiteSet}`` for fcc and ``{"II": ..., "IS": ...}``
    for zincblende, where ``IS`` holds the offsets from an I site to the S
    sublattice. Shells are complete by construction and ordered by radius, then
    lexicographically by coordinates.
    """
    out = {"II": _shells_from_grid(_half_grid(spec.r_max, False), spec.r_max, "II")}
    if spec.structure == "zincblende":
        out["IS"] = _shells_from_grid(_half_grid(spec.r_max, True), spec.r_max, "IS")
    # zincblende may have an empty II set while the nearer IS shell exists
    needed = ("II",) if spec.structure == "fcc" else ("IS",)
    for pair in needed:
        if not out[pair].shells:
            raise ValueError(
                f"r_max={spec.r_max} a contains no complete {pair} shell "
                "(nearest-neighbour distance not reached)"
            )
    return out


def geometric_factor(r, field_dir) -> np.ndarray | float:
    """``(1 - 3 cos^2 theta) / |r|^3`` for one vector or an ``(N, 3)`` array."""
    r = np.asarray(r, dtype=float)
    h = np.asarray(field_dir, dtype=float)
    h = h / np.linalg.norm(h)
    d2 = np.sum(r * r, axis=-1)
    if np.any(d2 == 0):
        raise ValueError("geometric factor undefined for a zero separation")
    d = np.sqrt(d2)
    c = (r @ h) / d
    g = (1.0 - 3.0 * c * c) / (d2 * d)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class CouplingTable:
    """Pair couplings ``prefactor * g(r)`` over one site set."""

    pair: str
    offsets: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    shell_index: np.ndarray = field(repr=False)
    prefactor: float = 1.0

    @property
    def values(self) -> np.ndarray:
        return self.prefactor * self.g

    def rows(self):
        """``(shell_index, rx, ry, rz, g, value)`` tuples in table order."""
        vals = self.values
        for k in range(len(self.g)):
            x, y, z = self.offsets[k]
            yield int(self.shell_index[k]), x, y, z, self.g[k], vals[k]


def coupling_table(spec: LatticeSpec, pair: str = "II", gamma_a: float = 1.0,
                   gamma_b: float = 1.0, sites: dict | None = None) -> CouplingTable:
    """Couplings ``u`` (homonuclear), ``w`` (heteronuclear) or, with unit gammas, ``A``."""
    sites = sites or build_sites(spec)
    s = sites[pair]
    offsets = s.offsets
    return CouplingTable(
        pair=pair,
        offsets=offsets,
        g=geometric_factor(offsets, spec.field),
        shell_index=s.shell_index,
        prefactor=gamma_a * gamma_b,
    )


@dataclass
class SumResult:
    """A shell-truncated lattice sum with its convergence record."""

    name: str
    value: float
    units: str
    r_max: float
    last_increment: float
    converged: bool
    radii: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)

    def __float__(self):
        return float(self.value)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "units": self.units,
            "r_max": float(self.r_max),
            "last_increment": float(self.last_increment),
            "converged": bool(self.converged),
        }

    def shell_rows(self):
        for k in range(len(self.radii)):
            yield k, float(self.radii[k]), int(self.counts[k]), float(self.partial_sums[k])


def _shell_result(name, units, per_site, shell_index, radii, counts, r_max, tol,
                  check=True) -> SumResult:
    per_shell = np.zeros(len(radii))
    np.add.at(per_shell, shell_index, per_site)
    partial = np.cumsum(per_shell)
    value = float(partial[-1]) if len(partial) else 0.0
    last = float(per_shell[-1]) if len(per_shell) else 0.0
    if value != 0.0:
        converged = abs(last) < tol * abs(value)
    else:
        converged = last == 0.0
    if check and not converged:
        warnings.warn(
            f"{name} not converged at r_max={r_max}: last-shell increment {last:.3e}",
            ConvergenceWarning,
            stacklevel=3,
        )
    return SumResult(name, value, units, r_max, last, converged, radii, counts, partial)


def power_sum(offsets, field_dir, n: int) -> float:
    """``sum_i g(r_i)^n`` over explicit offsets."""
    offsets = np.asarray(offsets, dtype=float)
    if len(offsets) == 0:
        return 0.0
    return float(np.sum(geometric_factor(offsets, field_dir) ** n))


def triangle_sum(offsets, field_dir) -> float:
    """``sum_{i != j} g(r_i) g(r_j - r_i) g(r_j)`` over explicit offsets."""
    offsets = np.asarray(offsets, dtype=float)
    if len(offsets) == 0:
        return 0.0
    g = geometric_factor(offsets, field_dir)
    return float(np.sum(kernels.k3_contributions(offsets, g, field_dir)))


def lattice_sum_In(spec: LatticeSpec, n: int, sites: dict | None = None) -> SumResult:
    """``I_n = sum_i u_1i^n`` over the homonuclear (fcc) site set, ``n`` in {2, 3}."""
    if n not in (2, 3):
        raise ValueError("only I_2 and I_3 are defined")
    s = (sites or build_sites(spec))["II"]
    g = geometric_factor(s.offsets, spec.field)
    return _shell_result(f"I{n}", f"eps^{n}", g ** n, s.shell_index, s.radii, s.counts,
                         spec.r_max, spec.tol)


def lattice_sum_K3(spec: LatticeSpec, sites: dict | None = None) -> SumResult:
    """``K_3 = sum_{i,j} u_1i u_ij u_j1`` with both sites inside the truncation sphere.

    Shell partial sums are accumulated over the shell of the first neighbour ``i``.
    """
    s = (sites or build_sites(spec))["II"]
    offsets = s.offsets
    g = geometric_factor(offsets, spec.field)
    per_site = kernels.k3_contributions(offsets, g, spec.field)
    return _shell_result("K3", "eps^3", per_site, s.shell_index, s.radii, s.counts,
                         spec.r_max, spec.tol)


def sum_A_squared(spec: LatticeSpec, sites: dict | None = None) -> SumResult:
    """``sum_k A_ik^2`` over the heteronuclear neighbours of an I site (units a^-6)."""
    if spec.structure != "zincblende":
        raise ValueError("sum_A_squared needs the two-species zincblende structure")
    s = (sites or build_sites(spec))["IS"]
    g = geometric_factor(s.offsets, spec.field)
    return _shell_result("sumA2", "a^-6", g * g, s.shell_index, s.radii, s.counts,
                         spec.r_max, spec.tol)


def plain_sum(spec: LatticeSpec, pair: str = "II", sites: dict | None = None) -> SumResult:
    """Per-shell ``sum_i g(r_i)``. Conditionally convergent; reported, never used."""
    s = (sites or build_sites(spec))[pair]
    g = geometric_factor(s.offsets, spec.field)
    res = _shell_result(f"plain_{pair}", "eps", g, s.shell_index, s.radii, s.counts,
                        spec.r_max, spec.tol, check=False)
    res.converged = False
    return res


def local_field_BL(I2, j: float) -> float:
    """Local field as an energy, ``hbar*gamma*B_L``, in units of eps.

    ``B_L^2 = (3/4) j(j+1) / (3 hbar^2 gamma^2) * sum_i u_1i^2``, i.e.
    ``(hbar gamma B_L)^2 = j(j+1) I_2 / 4``.
    """
    if isinstance(I2, SumResult):
        if not I2.converged:
            warnings.warn("local field computed from a non-converged I2", ConvergenceWarning,
                          stacklevel=2)
        I2 = I2.value
    if I2 < 0:
        raise ValueError("I2 must be non-negative")
    return math.sqrt(0.75 * j * (j + 1) / 3.0 * I2)


@dataclass
class LatticeSums:
    spec: LatticeSpec
    I2: SumResult
    I3: SumResult
    K3: SumResult
    sumA2: SumResult | None = None
    plain: SumResult | None = None

    @property
    def converged(self) -> bool:
        parts = [self.I2, self.I3, self.K3] + ([self.sumA2] if self.sumA2 else [])
        return all(p.converged for p in parts)

    def values(self) -> dict:
        out = {"I2": self.I2.value, "I3": self.I3.value, "K3": self.K3.value}
        if self.sumA2 is not None:
            out["sumA2"] = self.sumA2.value
        return out

    def results(self) -> list:
        return [r for r in (self.I2, self.I3, self.K3, self.sumA2) if r is not None]


def compute_lattice_sums(spec: LatticeSpec) -> LatticeSums:
    sites = build_sites(spec)
    return LatticeSums(
        spec=spec,
        I2=lattice_sum_In(spec, 2, sites),
        I3=lattice_sum_In(spec, 3, sites),
        K3=lattice_sum_K3(spec, sites),
        sumA2=sum_A_squared(spec, sites) if spec.structure == "zincblende" else None,
        plain=plain_sum(spec, "II", sites),
    )


@dataclass(frozen=True)
class SeriesSums:
    """Bare ``I_2, I_3, K_3`` values, e.g. for synthetic clusters."""

    I2: float
    I3: float
    K3: float


def sums_values(sums) -> tuple:
    """``(I2, I3, K3)`` floats from a ``LatticeSums``, ``SeriesSums`` or 3-sequence."""
    if isinstance(sums, (LatticeSums, SeriesSums)):
        return float(sums.I2), float(sums.I3), float(sums.K3)
    if isinstance(sums, Sequence) and len(sums) == 3:
        return tuple(float(x) for x in sums)
    raise TypeError("expected LatticeSums, SeriesSums or an (I2, I3, K3) triple")
