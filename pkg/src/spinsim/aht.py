"""Average Hamiltonian theory for ideal (delta) pulse cycles.

Conventions: a pulse about unit axis ``n`` by angle ``theta`` is the unitary
``P = exp(-i theta n . I)``, under which ``P^dag I_a P = sum_b R_ab I_b`` with
``R`` the right-handed rotation matrix about ``n`` by ``theta``. After pulses
``P_1 .. P_k`` the toggling frame is ``T_k = R_k ... R_1`` and a bilinear term
``sum C_ab I_a S_b`` becomes ``T_k(I)^T C T_k(S)``. The exact propagation in
:mod:`spinsim.cluster` uses the same unitaries, so the two agree by
construction and are checked against each other in the tests.

When every pulse is a quarter turn the rotations are signed permutation
matrices and the cycle average is also returned in exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

AXES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
    "-x": (-1.0, 0.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
    "-z": (0.0, 0.0, -1.0),
}
MASKS = ("I", "S", "both")


@dataclass(frozen=True)
class Delay:
    duration: object

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("delay durations must be non-negative")


@dataclass(frozen=True)
class Pulse:
    """Ideal pulse; ``angle`` is in radians (default pi/2)."""

    axis: str
    angle: float = math.pi / 2
    species: str = "both"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown pulse axis {self.axis!r}")
        if self.species not in MASKS:
            raise ValueError(f"species mask must be one of {MASKS}")

    @property
    def angle_rad(self) -> float:
        return float(self.angle)

    @property
    def quarter_turns(self) -> int | None:
        q = self.angle_rad / (math.pi / 2)
        k = round(q)
        return int(k) if abs(q - k) < 1e-12 else None

    def acts_on(self, mask: str) -> bool:
        return self.species == "both" or self.species == mask


@dataclass(frozen=True)
class PulseSequence:
    events: tuple
    name: str = "custom"

    @property
    def cycle_time(self):
        return sum((ev.duration for ev in self.events if isinstance(ev, Delay)), 0)

    @property
    def pulses(self) -> list:
        return [ev for ev in self.events if isinstance(ev, Pulse)]

    def scaled(self, factor) -> "PulseSequence":
        events = tuple(Delay(ev.duration * factor) if isinstance(ev, Delay) else ev
                       for ev in self.events)
        return PulseSequence(events, self.name)


def _cycle(delays, axes, angle, name, species="both"):
    events = [Delay(delays[0])]
    for ax, d in zip(axes, delays[1:]):
        events.append(Pulse(ax, angle, species))
        events.append(Delay(d))
    return PulseSequence(tuple(events), name)


def wahuha(tau=1, angle=math.pi / 2, species="both") -> PulseSequence:
    """``tau - P_x - tau - P_-y - 2tau - P_y - tau - P_-x - tau``."""
    return _cycle((tau, tau, 2 * tau, tau, tau), ("x", "-y", "y", "-x"), angle, "wahuha", species)


def modified_wahuha(tau1, tau2, species="both") -> PulseSequence:
    """Delays ``(tau1, tau2, 2 tau2, tau2, tau1)``; ``t_c = 2 tau1 + 4 tau2``."""
    return _cycle((tau1, tau2, 2 * tau2, tau2, tau1), ("x", "-y", "y", "-x"), math.pi / 2,
                  "modified-wahuha", species)


def mrev8(tau=1, species="both") -> PulseSequence:
    """Two four-pulse cycles, ``(x, -y, y, -x)`` then ``(-x, -y, y, x)``."""
    first = wahuha(tau, species=species).events
    second = _cycle((tau, tau, 2 * tau, tau, tau), ("-x", "-y", "y", "x"), math.pi / 2,
                    "", species).events
    return PulseSequence(first + second, "mrev8")


def theta_wahuha(theta, tau=1, species="both") -> PulseSequence:
    """WAHUHA timing with every pulse turning by ``theta``."""
    seq = wahuha(tau, angle=theta, species=species)
    return PulseSequence(seq.events, "theta")


def rotation_matrix(axis, angle) -> np.ndarray:
    n = np.asarray(AXES[axis] if isinstance(axis, str) else axis, dtype=float)
    n = n / np.linalg.norm(n)
    c, s = math.cos(angle), math.sin(angle)
    cross = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return c * np.eye(3) + s * cross + (1 - c) * np.outer(n, n)


def _exact_rotation(pulse: Pulse) -> np.ndarray:
    r = np.rint(rotation_matrix(pulse.axis, pulse.quarter_turns * math.pi / 2)).astype(int)
    return np.array([[Fraction(int(v)) for v in row] for row in r], dtype=object)


@dataclass
class Frame:
    duration: object
    R_I: np.ndarray
    R_S: np.ndarray
    exact_I: np.ndarray | None = field(default=None, repr=False)
    exact_S: np.ndarray | None = field(default=None, repr=False)

    def rotation(self, mask: str) -> np.ndarray:
        return self.R_I if mask == "I" else self.R_S

    def exact(self, mask: str):
        return self.exact_I if mask == "I" else self.exact_S


@dataclass
class TogglingFrames:
    frames: list
    net_I: np.ndarray
    net_S: np.ndarray
    exact: bool

    @property
    def cyclic(self) -> bool:
        return (np.allclose(self.net_I, np.eye(3), atol=1e-12)
                and np.allclose(self.net_S, np.eye(3), atol=1e-12))

    @property
    def cycle_time(self):
        return sum((f.duration for f in self.frames), 0)

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


def toggling_frames(seq: PulseSequence) -> TogglingFrames:
    """One frame per delay, carrying the cumulative pulse rotation per species."""
    exact = all(p.quarter_turns is not None for p in seq.pulses)
    t = {"I": np.eye(3), "S": np.eye(3)}
    te = {m: np.array([[Fraction(int(a == b)) for b in range(3)] for a in range(3)], dtype=object)
          for m in ("I", "S")} if exact else None
    frames = []
    for ev in seq.events:
        if isinstance(ev, Delay):
            frames.append(Frame(ev.duration, t["I"].copy(), t["S"].copy(),
                                te["I"].copy() if exact else None,
                                te["S"].copy() if exact else None))
            continue
        r = rotation_matrix(ev.axis, ev.angle_rad)
        re = _exact_rotation(ev) if exact else None
        for mask in ("I", "S"):
            if ev.acts_on(mask):
                t[mask] = r @ t[mask]
                if exact:
                    te[mask] = re.dot(te[mask])
    return TogglingFrames(frames, t["I"], t["S"], exact)


def average_matrix(c, frames: TogglingFrames, mask_a="I", mask_b="S") -> np.ndarray:
    """``(1/t_c) sum_k tau_k T_k(a)^T C T_k(b)`` in floating point."""
    c = np.asarray(c, dtype=float)
    total = float(frames.cycle_time)
    if total <= 0:
        raise ValueError("cycle time must be positive")
    acc = np.zeros((3, 3))
    for f in frames:
        acc += float(f.duration) * f.rotation(mask_a).T @ c @ f.rotation(mask_b)
    return acc / total


def average_matrix_exact(c, frames: TogglingFrames, mask_a="I", mask_b="S") -> np.ndarray:
    """Rational-arithmetic version of :func:`average_matrix` (object array of Fractions)."""
    if not frames.exact:
        raise ValueError("exact averaging needs quarter-turn pulses")
    c = np.array([[Fraction(v) for v in row] for row in np.asarray(c, dtype=object)], dtype=object)
    total = Fraction(frames.cycle_time)
    acc = np.array([[Fraction(0)] * 3 for _ in range(3)], dtype=object)
    for f in frames:
        acc = acc + Fraction(f.duration) * f.exact(mask_a).T.dot(c).dot(f.exact(mask_b))
    return acc / total


def average_vector(v, frames: TogglingFrames, mask="I") -> np.ndarray:
    """Cycle average of a linear term ``sum_a v_a I_a``."""
    v = np.asarray(v, dtype=float)
    total = float(frames.cycle_time)
    acc = np.zeros(3)
    for f in frames:
        acc += float(f.duration) * f.rotation(mask).T @ v
    return acc / total


@dataclass
class CouplingMatrix3:
    """Bilinear coupling ``sum_ab C_ab I_a S_b`` (or the like-spin analogue per pair)."""

    matrix: np.ndarray
    tag: str = "general"
    exact: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def secular(cls, u=1.0):
        d = [Fraction(-1, 2), Fraction(-1, 2), Fraction(1)]
        return cls(float(u) * np.diag([-0.5, -0.5, 1.0]), "homonuclear-secular",
                   _exact_diag([x * Fraction(u) for x in d]))

    @classmethod
    def ising(cls, w=1.0):
        return cls(float(w) * np.diag([0.0, 0.0, 1.0]), "heteronuclear-Ising",
                   _exact_diag([Fraction(0), Fraction(0), Fraction(w)]))

    @classmethod
    def heisenberg(cls, j=1.0):
        return cls(float(j) * np.eye(3), "general", _exact_diag([Fraction(j)] * 3))

    def coefficients(self) -> dict:
        m = self.matrix
        out = {f"{a}{b}": float(m[i, k]) for i, a in enumerate("xyz") for k, b in enumerate("xyz")}
        out["isotropic"] = float(np.trace(m) / 3)
        return out

    def exact_strings(self):
        if self.exact is None:
            return None
        return [[str(v) for v in row] for row in self.exact]


def _exact_diag(values):
    m = np.array([[Fraction(0)] * 3 for _ in range(3)], dtype=object)
    for k, v in enumerate(values):
        m[k, k] = v
    return m


def average_coupling(c: CouplingMatrix3, seq: PulseSequence, pair: str = "IS") -> CouplingMatrix3:
    """Zeroth-order average of a coupling over one cycle.

    ``pair="IS"`` rotates the two sides with the I and S frames respectively;
    ``pair="II"`` uses the I frames on both sides (like spins).
    """
    if pair not in ("IS", "II", "SS"):
        raise ValueError("pair must be 'IS', 'II' or 'SS'")
    ma, mb = {"IS": ("I", "S"), "II": ("I", "I"), "SS": ("S", "S")}[pair]
    frames = toggling_frames(seq)
    mat = average_matrix(c.matrix, frames, ma, mb)
    exact = None
    if frames.exact and c.exact is not None:
        exact = average_matrix_exact(c.exact, frames, ma, mb)
    return CouplingMatrix3(mat, "general", exact)


@dataclass
class PathPoint:
    tau1: float
    tau2: float
    ising_diag: tuple
    secular_scale: float

    @property
    def operator_coefficient(self) -> float:
        """Coefficient ``(tau1 - tau2)/t_c`` multiplying ``sum_{i,j} u_ij (...)``."""
        return self.secular_scale / 2


def interpolation_path(t_c=1.0, steps=7) -> list:
    """Modified-WAHUHA averages with ``t_c`` fixed and ``tau2`` from 0 to ``t_c/6``.

    ``secular_scale`` is the factor multiplying the like-spin coupling matrix
    (``1`` at ``tau2 = 0``, ``0`` at WAHUHA); ``ising_diag`` is the diagonal of
    the averaged unlike-spin Ising matrix for unit coupling.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    out = []
    for k in range(steps):
        tau2 = Fraction(t_c) / 6 * Fraction(k, steps - 1)
        tau1 = (Fraction(t_c) - 4 * tau2) / 2
        seq = modified_wahuha(tau1, tau2)
        ising = average_coupling(CouplingMatrix3.ising(1), seq, "IS").matrix
        sec = average_coupling(CouplingMatrix3.secular(1), seq, "II").matrix
        out.append(PathPoint(float(tau1), float(tau2), tuple(np.diag(ising)), float(sec[2, 2])))
    return out


def theta_pulse_average(c: CouplingMatrix3, theta, pair="IS", tau=1.0) -> CouplingMatrix3:
    """Cycle average with WAHUHA timing and every pulse turning by ``theta``."""
    return average_coupling(c, theta_wahuha(theta, tau), pair)


def parse_sequence(text: str) -> PulseSequence:
    """``wahuha``, ``mrev8``, ``modified:tau1,tau2`` or ``theta:angle`` (radians)."""
    text = text.strip().lower()
    if text == "wahuha":
        return wahuha(Fraction(1))
    if text == "mrev8":
        return mrev8(Fraction(1))
    if text.startswith("modified:"):
        t1, t2 = (Fraction(x) for x in text.split(":", 1)[1].split(","))
        return modified_wahuha(t1, t2)
    if text.startswith("theta:"):
        return theta_wahuha(float(text.split(":", 1)[1]), Fraction(1))
    raise ValueError(f"unknown sequence {text!r}")
