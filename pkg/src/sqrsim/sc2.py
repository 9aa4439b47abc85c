"""Raman-synthesized shortcut (SC2): modified pulses on a 5-level system.

The counterdiabatic correction is folded into the drives of a 5-level
Lambda system (three ground states, two far-detuned excited states).
Working in the adiabatically eliminated ground space, the synthesized
couplings must reproduce

    target(i,j) = Omega_i Omega_j^* / 4 + delta_cap * <i|H_cd_eff|j>,

the sum of the eliminated SQR couplings and the counterdiabatic generator
of the eliminated Hamiltonian. The products of the five modified drives
match these targets; the three detunings balance the diagonal.

The (1,2) and (1,3) constraints are under-constrained, so amplitude and
phase are split equally between the paired drives. The third drive carries
a ratio R13/sqrt(R12) whose tails are ill-behaved where all pulses are
small; a steep logistic window (the envelope) pins it to zero outside the
two sequence windows.

Sign conventions follow physical adiabatic elimination throughout: a
ground-space matrix entry (i, j) is X_i X_j^* / denominator, so the
realized effective couplings equal the targets rather than their complex
conjugates. Getting this orientation wrong flips the sign of the purely
imaginary counterdiabatic part and makes the scheme amplify, rather than
suppress, diabatic transitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cd import CdOptions, cd_generator
from .sqr import ConfigurationError, GateSpec, PulseConfig, pulse_derivative, pulse_value

# Relative floor below which a real/imaginary part of a coupling target is
# structurally zero. Pinning these parts stops the half-angle phase factors
# from flipping branch on eigensolver noise.
SNAP_REL = 1e-12

# Half-width of each envelope window, in pulse widths. Must not extend past
# the point where the (1,2)-pair amplitude has died while the correction
# target is still alive: beyond ~3 sigma from a sequence center the ratio
# drive grows past 10x the base amplitude.
ENVELOPE_HALF_WIDTH_SIGMAS = 3.0


@dataclass(frozen=True)
class EffectiveTargets:
    """Polar form of the three ground-space coupling targets.

    Magnitudes are nonnegative; phases are wrapped to (-pi, pi]. The
    complex target for the (i, j) ground couple is R_ij * exp(i phi_ij).
    """

    r12: float
    r13: float
    r23: float
    phi12: float
    phi13: float
    phi23: float

    @property
    def t12(self) -> complex:
        return self.r12 * np.exp(1j * self.phi12)

    @property
    def t13(self) -> complex:
        return self.r13 * np.exp(1j * self.phi13)

    @property
    def t23(self) -> complex:
        return self.r23 * np.exp(1j * self.phi23)


@dataclass(frozen=True)
class Sc2Controls:
    """The five synthesized drive amplitudes and three ground detunings."""

    omega_t1: complex
    omega_t2: complex
    omega_t3: complex
    omega_t4: complex
    omega_t5: complex
    d1: float
    d2: float
    d3: float

    def drives(self) -> np.ndarray:
        return np.array(
            [self.omega_t1, self.omega_t2, self.omega_t3, self.omega_t4, self.omega_t5],
            dtype=np.complex128,
        )

    def detunings(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3], dtype=np.float64)


def _require_positive_detuning(cfg: PulseConfig) -> None:
    if cfg.delta_cap <= 0:
        raise ConfigurationError("the eliminated-space construction requires delta_cap > 0")


def _pulse_vector(t: float, cfg: PulseConfig, gate: GateSpec) -> np.ndarray:
    return np.array([pulse_value(i, t, cfg, gate) for i in (1, 2, 3)], dtype=np.complex128)


def h_eff_sqr(t: float, cfg: PulseConfig, gate: GateSpec) -> np.ndarray:
    """Adiabatically eliminated 3x3 ground Hamiltonian, entry (i,j) = O_i O_j^*/(4 Delta).

    Rank <= 1 and positive semidefinite by construction.
    """
    _require_positive_detuning(cfg)
    v = _pulse_vector(t, cfg, gate)
    return np.outer(v, v.conj()) / (4.0 * cfg.delta_cap)


def h_eff_sqr_dt(t: float, cfg: PulseConfig, gate: GateSpec) -> np.ndarray:
    """Analytic time derivative of `h_eff_sqr`."""
    _require_positive_detuning(cfg)
    v = _pulse_vector(t, cfg, gate)
    dv = np.array([pulse_derivative(i, t, cfg, gate) for i in (1, 2, 3)], dtype=np.complex128)
    return (np.outer(dv, v.conj()) + np.outer(v, dv.conj())) / (4.0 * cfg.delta_cap)


def h_eff_cd(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> np.ndarray:
    """Counterdiabatic generator of the eliminated ground Hamiltonian.

    The rank-1 structure leaves a two-fold degenerate zero eigenvalue; the
    degeneracy exclusion of the generator handles it.
    """
    if opts.derivative == "central":
        step = opts.h if opts.h is not None else 1e-6 * cfg.T
        local = CdOptions(
            eps_deg=opts.eps_deg,
            derivative="central",
            h=step,
            residual_rel=opts.residual_rel,
            r_floor_rel=opts.r_floor_rel,
        )
        return cd_generator(lambda s: h_eff_sqr(s, cfg, gate), None, t, local)
    return cd_generator(
        lambda s: h_eff_sqr(s, cfg, gate), lambda s: h_eff_sqr_dt(s, cfg, gate), t, opts
    )


def _snap(z: complex, floor: float) -> complex:
    re = z.real if abs(z.real) > floor else 0.0
    im = z.imag if abs(z.imag) > floor else 0.0
    return complex(re, im)


def _polar(z: complex) -> tuple[float, float]:
    r = abs(z)
    return r, (float(np.angle(z)) if r > 0.0 else 0.0)


def coupling_targets(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> EffectiveTargets:
    """Ground-space coupling targets O_i O_j^*/4 + Delta * <i|H_cd_eff|j>.

    Real/imaginary parts smaller than SNAP_REL times the largest target are
    pinned to zero so the extracted phases are deterministic.
    """
    v = _pulse_vector(t, cfg, gate)
    Hcd = h_eff_cd(t, cfg, gate, opts)
    Tm = np.outer(v, v.conj()) / 4.0 + cfg.delta_cap * Hcd
    raw = [complex(Tm[0, 1]), complex(Tm[0, 2]), complex(Tm[1, 2])]
    floor = SNAP_REL * max(abs(z) for z in raw)
    t12, t13, t23 = (_snap(z, floor) for z in raw)
    r12, p12 = _polar(t12)
    r13, p13 = _polar(t13)
    r23, p23 = _polar(t23)
    return EffectiveTargets(r12=r12, r13=r13, r23=r23, phi12=p12, phi13=p13, phi23=p23)


def envelope(t, cfg: PulseConfig):
    """Logistic window forcing the ratio drive to zero outside pulse activity.

    A product of logistic rise/fall factors of steepness omega0 per sequence
    window, with edges ENVELOPE_HALF_WIDTH_SIGMAS pulse widths either side
    of the window center. Evaluates to 1 deep inside either window and to 0
    outside both; `t` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=np.float64)
    half = ENVELOPE_HALF_WIDTH_SIGMAS * cfg.sigma
    total = np.zeros(t.shape, dtype=np.float64)
    for c in cfg.centers:
        rise = _sigmoid(cfg.omega0 * (t - (c - half)))
        fall = _sigmoid(-cfg.omega0 * (t - (c + half)))
        total += rise * fall
    return total[()] if total.ndim == 0 else total


def _sigmoid(x):
    # overflow-safe 1/(1+e^-x)
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def solve_from_targets(
    targets: EffectiveTargets,
    pulse_abs2: np.ndarray,
    f_env: float,
    delta_cap: float,
    r_floor: float,
) -> Sc2Controls:
    """Closed-form under-constrained solve for the five drives and detunings.

    ``pulse_abs2`` holds |Omega_i|^2 of the three bare pulses. The (1,2)
    constraint splits amplitude and phase equally; the ratio drive gets the
    envelope ``f_env``; the remainder of the (2,3) target is split equally
    between the two drives of the second Raman arm. Magnitudes below
    ``r_floor`` zero the first three drives before proceeding.
    """
    if targets.r12 < r_floor:
        o1 = o2 = o3 = 0.0 + 0.0j
    else:
        root = math.sqrt(targets.r12)
        o1 = np.exp(+0.5j * targets.phi12) * root
        o2 = np.exp(-0.5j * targets.phi12) * root
        o3 = (targets.r13 * f_env / root) * np.exp(1j * (0.5 * targets.phi12 - targets.phi13))
    remainder = complex(targets.t23 - o2 * np.conj(o3))
    # the difference cancels exactly for tan(chi) = 1 inside the envelope;
    # pin rounding leftovers so the half-angle phase stays deterministic
    remainder = _snap(remainder, SNAP_REL * max(targets.r23, abs(o2) * abs(o3)))
    r, phi = _polar(remainder)
    root = math.sqrt(r)
    o4 = np.exp(+0.5j * phi) * root
    o5 = np.exp(-0.5j * phi) * root
    quarter = 1.0 / (4.0 * delta_cap)
    return Sc2Controls(
        omega_t1=complex(o1),
        omega_t2=complex(o2),
        omega_t3=complex(o3),
        omega_t4=complex(o4),
        omega_t5=complex(o5),
        d1=(4.0 * abs(o1) ** 2 - pulse_abs2[0]) * quarter,
        d2=(4.0 * (abs(o2) ** 2 + abs(o4) ** 2) - pulse_abs2[1]) * quarter,
        d3=(4.0 * (abs(o5) ** 2 + abs(o3) ** 2) - pulse_abs2[2]) * quarter,
    )


def solve_controls(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> Sc2Controls:
    """Synthesized 5-level drives and detunings at time ``t``."""
    _require_positive_detuning(cfg)
    targets = coupling_targets(t, cfg, gate, opts)
    v = _pulse_vector(t, cfg, gate)
    return solve_from_targets(
        targets,
        np.abs(v) ** 2,
        float(envelope(t, cfg)),
        cfg.delta_cap,
        opts.r_floor_rel * cfg.omega0**2,
    )


def h_sc2(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> np.ndarray:
    """5-level shortcut Hamiltonian with the overall minus sign.

    Diagonal (-d1, -d2, -d3, -Delta, -Delta); drives 1..3 couple the ground
    states to level 4, drives 4..5 couple levels 2..3 to level 5. The stated
    values fill the upper triangle, conjugates sit below.
    """
    c = solve_controls(t, cfg, gate, opts)
    H = np.zeros((5, 5), dtype=np.complex128)
    H[0, 0], H[1, 1], H[2, 2] = -c.d1, -c.d2, -c.d3
    H[3, 3] = H[4, 4] = -cfg.delta_cap
    H[0, 3], H[1, 3], H[2, 3] = -c.omega_t1, -c.omega_t2, -c.omega_t3
    H[1, 4], H[2, 4] = -c.omega_t4, -c.omega_t5
    H[3, 0], H[3, 1], H[3, 2] = -np.conj(c.omega_t1), -np.conj(c.omega_t2), -np.conj(c.omega_t3)
    H[4, 1], H[4, 2] = -np.conj(c.omega_t4), -np.conj(c.omega_t5)
    return H


def h_eff_sc2(controls: Sc2Controls, cfg: PulseConfig) -> np.ndarray:
    """Eliminated ground Hamiltonian realized by a set of 5-level controls.

    (1/Delta) * (v v^dag + w w^dag) - diag(d1, d2, d3) with v the drives
    through level 4 and w = (0, drive4, drive5) through level 5.
    """
    _require_positive_detuning(cfg)
    v = controls.drives()[:3]
    w = np.array([0.0, controls.omega_t4, controls.omega_t5], dtype=np.complex128)
    G = np.outer(v, v.conj()) + np.outer(w, w.conj())
    return G / cfg.delta_cap - np.diag(controls.detunings())


def feasibility_residual(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> float:
    """Violation (radians) of the phase constraint a 4-level synthesis needs.

    Three drives through a single excited level can only produce coupling
    phases of the form xi_1 = p2 - p1, xi_2 = p3 - p1, xi_3 = p3 - p2, which
    obey xi_2 - xi_1 = xi_3. Returns |wrap(phi13 - phi12 - phi23)|, the
    amount by which the synthesized targets break that relation; zero means
    a 4-level scheme could realize them at this time. By convention the
    residual is zero whenever any target magnitude sits below the floor.
    """
    targets = coupling_targets(t, cfg, gate, opts)
    r_floor = opts.r_floor_rel * cfg.omega0**2
    if min(targets.r12, targets.r13, targets.r23) < r_floor:
        return 0.0
    mismatch = targets.phi13 - targets.phi12 - targets.phi23
    wrapped = math.remainder(mismatch, 2.0 * math.pi)
    return abs(wrapped)
