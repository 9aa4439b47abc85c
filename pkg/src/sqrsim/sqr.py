"""STIRAP-based qubit rotation (SQR): gates, pulses and the bare 4-level Hamiltonian.

The qubit lives in the ground states |1>, |2> of a 4-level Lambda system;
|3> is an auxiliary ground state and |4> the excited state. Two consecutive
STIRAP sequences realize the rotation: the first transfers the bright
component of the qubit to |3>, the second returns it with an extra phase.

Pulse geometry. Each drive channel is a sum of two Gaussian lobes, one per
STIRAP sequence (sequence centers c1 = -3T/2 and c2 = -T/2). Within a
sequence the Stokes-role channel leads the pump-role channel by 2*t0:

* sequence 1: channel 3 (Stokes) peaks at c1 - t0, channels 1/2 (pump)
  at c1 + t0;
* sequence 2: the roles swap, channels 1/2 peak at c2 - t0 and channel 3
  at c2 + t0.

The rotation phase exp(i*delta) multiplies only the sequence-2 lobe of
channel 3, so sequence 1 runs phase-free and sequence 2 returns the bright
component with the rotation phase attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


class ConfigurationError(ValueError):
    """A parameter set violates one of its invariants."""


@dataclass(frozen=True)
class GateSpec:
    """Rotation parameters: angle ``delta`` about the axis set by (chi, eta).

    The unit rotation axis is
    ``(sin 2chi cos eta, sin 2chi sin eta, cos 2chi)``.
    """

    chi: float
    eta: float
    delta: float
    axis: tuple[float, float, float]
    label: Optional[str] = None


def make_gate(chi: float, eta: float, delta: float, label: Optional[str] = None) -> GateSpec:
    """Build a GateSpec; angles are reduced mod 2*pi internally."""
    chi = chi % TWO_PI
    eta = eta % TWO_PI
    delta = delta % TWO_PI
    axis = (
        math.sin(2 * chi) * math.cos(eta),
        math.sin(2 * chi) * math.sin(eta),
        math.cos(2 * chi),
    )
    return GateSpec(chi=chi, eta=eta, delta=delta, axis=axis, label=label)


@dataclass(frozen=True)
class PulseConfig:
    """Drive amplitudes, detuning and timing of the two STIRAP sequences.

    ``delta_cap`` is the one-photon detuning of the excited level(s).
    The evolution window [t_min, t_max] must contain both sequence
    centers -3T/2 and -T/2.
    """

    omega0: float
    delta_cap: float
    T: float = 20.0
    t0: float = 1.6
    sigma: float = 2.0
    t_min: Optional[float] = None
    t_max: float = 0.0
    rtol: float = 1e-9
    atol: float = 1e-12
    n_out: int = 2000

    def __post_init__(self):
        if self.t_min is None:
            object.__setattr__(self, "t_min", -2.0 * self.T)
        if self.omega0 <= 0:
            raise ConfigurationError("omega0 must be positive")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be positive")
        if not self.t_min < self.t_max:
            raise ConfigurationError("require t_min < t_max")
        c1, c2 = self.centers
        if not (self.t_min <= c1 and c2 <= self.t_max):
            raise ConfigurationError(
                f"window [{self.t_min}, {self.t_max}] must contain the sequence "
                f"centers {c1} and {c2}"
            )

    @property
    def centers(self) -> tuple[float, float]:
        """Centers of the two STIRAP sequences."""
        return (-1.5 * self.T, -0.5 * self.T)


@dataclass(frozen=True)
class QubitState:
    """Qubit amplitudes on the ground states |1> and |2>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        n = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ConfigurationError(f"qubit norm^2 = {n:.15f} differs from 1")

    @classmethod
    def ground(cls) -> "QubitState":
        return cls(1.0 + 0.0j, 0.0j)

    def embed(self, dim: int) -> np.ndarray:
        """Embed into an n-level register: amplitudes on levels 1-2, zeros above."""
        psi = np.zeros(dim, dtype=np.complex128)
        psi[0] = self.alpha
        psi[1] = self.beta
        return psi

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=np.complex128)


def pulse_lobes(channel: int, cfg: PulseConfig, gate: GateSpec) -> list[tuple[float, complex]]:
    """Gaussian lobes of one drive channel as (center, complex prefactor) pairs."""
    if channel not in (1, 2, 3):
        raise ValueError(f"channel must be 1, 2 or 3, got {channel}")
    c1, c2 = cfg.centers
    if channel == 1:
        a = cfg.omega0 * math.cos(gate.chi)
        return [(c1 + cfg.t0, complex(a)), (c2 - cfg.t0, complex(a))]
    if channel == 2:
        a = cfg.omega0 * math.sin(gate.chi) * np.exp(1j * gate.eta)
        return [(c1 + cfg.t0, a), (c2 - cfg.t0, a)]
    return [
        (c1 - cfg.t0, complex(cfg.omega0)),
        (c2 + cfg.t0, cfg.omega0 * np.exp(1j * gate.delta)),
    ]


def pulse_value(channel: int, t, cfg: PulseConfig, gate: GateSpec):
    """Complex drive amplitude of one channel; `t` may be a scalar or array."""
    t = np.asarray(t, dtype=np.float64)
    inv = 1.0 / (2.0 * cfg.sigma**2)
    out = np.zeros(t.shape, dtype=np.complex128)
    for center, pref in pulse_lobes(channel, cfg, gate):
        x = t - center
        out += pref * np.exp(-x * x * inv)
    return out[()] if out.ndim == 0 else out


def pulse_derivative(channel: int, t, cfg: PulseConfig, gate: GateSpec):
    """Analytic time derivative of `pulse_value` (Gaussian-lobe chain rule)."""
    t = np.asarray(t, dtype=np.float64)
    inv = 1.0 / (2.0 * cfg.sigma**2)
    out = np.zeros(t.shape, dtype=np.complex128)
    for center, pref in pulse_lobes(channel, cfg, gate):
        x = t - center
        out += pref * (-2.0 * x * inv) * np.exp(-x * x * inv)
    return out[()] if out.ndim == 0 else out


def _couplings_to_hamiltonian(omegas, delta_cap: float) -> np.ndarray:
    H = np.zeros((4, 4), dtype=np.complex128)
    H[3, 3] = delta_cap
    for i in range(3):
        H[i, 3] = 0.5 * omegas[i]
        H[3, i] = 0.5 * np.conj(omegas[i])
    return H


def h_sqr(t: float, cfg: PulseConfig, gate: GateSpec) -> np.ndarray:
    """Bare 4-level SQR Hamiltonian at time ``t`` (hbar = 1).

    H = delta_cap |4><4| + (1/2) sum_i (Omega_i(t) |i><4| + h.c.)
    """
    omegas = [pulse_value(i, t, cfg, gate) for i in (1, 2, 3)]
    return _couplings_to_hamiltonian(omegas, cfg.delta_cap)


def h_sqr_dt(t: float, cfg: PulseConfig, gate: GateSpec) -> np.ndarray:
    """Analytic time derivative of `h_sqr` (static detuning drops out)."""
    domegas = [pulse_derivative(i, t, cfg, gate) for i in (1, 2, 3)]
    return _couplings_to_hamiltonian(domegas, 0.0)


def dark_bright(gate: GateSpec) -> tuple[QubitState, QubitState]:
    """Dark and bright qubit superpositions of the pump channels.

    dark = (-sin chi, e^{i eta} cos chi) decouples from the drive;
    bright = (cos chi, e^{i eta} sin chi) carries the full pump coupling.
    """
    phase = np.exp(1j * gate.eta)
    dark = QubitState(-math.sin(gate.chi) + 0j, phase * math.cos(gate.chi))
    bright = QubitState(math.cos(gate.chi) + 0j, phase * math.sin(gate.chi))
    return dark, bright


def rotation_matrix(gate: GateSpec) -> np.ndarray:
    """Ideal qubit rotation U_n(delta) = cos(delta/2) I - i sin(delta/2) n.sigma.

    The global phase exp(-i delta/2) of the physical evolution is omitted;
    the fidelity is insensitive to it.
    """
    nx, ny, nz = gate.axis
    n_dot_sigma = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
    half = 0.5 * gate.delta
    return math.cos(half) * np.eye(2, dtype=np.complex128) - 1j * math.sin(half) * n_dot_sigma


def target_state(gate: GateSpec, psi0: QubitState) -> QubitState:
    """Apply the ideal rotation to a qubit state."""
    out = rotation_matrix(gate) @ psi0.as_array()
    return QubitState(out[0], out[1])
