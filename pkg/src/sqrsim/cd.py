"""Counterdiabatic (transitionless-driving) generator and the SC1 scheme.

The generator is the projector sum

    H_cd(t) = i * sum_{m != n} P_m (dH/dt) P_n / (E_n - E_m),

restricted to pairs of instantaneous eigenstates whose gap exceeds a
relative degeneracy threshold. Skipping near-degenerate pairs keeps the
formula finite on the two-fold degenerate dark subspace of the SQR
Hamiltonian; cross terms between a degenerate subspace and other levels
are retained and are basis-invariant under remixing of the subspace.

SC1 adds this generator directly to the bare SQR Hamiltonian, realizing
the correction as direct couplings among the three ground states.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from . import numerics
from .sqr import GateSpec, PulseConfig, h_sqr, h_sqr_dt


class StructuralResidualError(RuntimeError):
    """The computed generator does not fit the pure ground-coupling ansatz."""

    def __init__(self, kind: str, entry: tuple[int, int], value: float, tol: float):
        self.kind = kind
        self.entry = entry
        self.value = value
        self.tol = tol
        super().__init__(
            f"{kind} residual at entry {entry}: |value| = {value:.3e} "
            f"exceeds tolerance {tol:.3e}"
        )


@dataclass(frozen=True)
class CdOptions:
    """Knobs of the counterdiabatic computation.

    eps_deg
        Degeneracy threshold, relative to max(1, spectral range); eigenpairs
        closer than this are excluded from the sum.
    derivative
        'analytic' uses the exact Gaussian-lobe derivatives; 'central' uses a
        central difference of step ``h`` (cross-check path).
    h
        Central-difference step; defaults to 1e-6 * T of the pulse config.
    residual_rel
        Tolerance (relative to omega0) for how far the SQR generator may
        deviate from the pure imaginary ground-coupling ansatz. The exact
        generator carries a bright/excited coupling of order
        dOmega/dt * Delta / (Delta^2 + Omega^2), so this cannot be pushed
        to machine precision.
    r_floor_rel
        Floor (relative to omega0^2) below which a Raman coupling magnitude
        is treated as zero by the 5-level synthesis.
    """

    eps_deg: float = 1e-8
    derivative: Literal["analytic", "central"] = "analytic"
    h: Optional[float] = None
    residual_rel: float = 1e-3
    r_floor_rel: float = 1e-12

    def __post_init__(self):
        if self.eps_deg <= 0:
            raise ValueError("eps_deg must be positive")
        if self.derivative not in ("analytic", "central"):
            raise ValueError(f"unknown derivative mode {self.derivative!r}")
        if self.h is not None and self.h <= 0:
            raise ValueError("central-difference step h must be positive")


@dataclass(frozen=True)
class CdCouplings:
    """Real ground-state coupling amplitudes extracted from the generator."""

    omega1: float
    omega2: float
    omega3: float

    def as_matrix(self, dim: int = 4) -> np.ndarray:
        """Reconstruct i*(w1 |2><1| + w2 |3><1| + w3 |3><2|) + h.c."""
        H = np.zeros((dim, dim), dtype=np.complex128)
        H[1, 0] = 1j * self.omega1
        H[2, 0] = 1j * self.omega2
        H[2, 1] = 1j * self.omega3
        return H + H.conj().T


def cd_from_decomposition(
    eigenvalues: np.ndarray,
    eigenvectors: np.ndarray,
    dH: np.ndarray,
    eps_deg: float,
    warn_band: float = 10.0,
) -> np.ndarray:
    """Pair-summed generator from a precomputed eigendecomposition.

    Exposed separately so tests can remix degenerate eigenvectors and check
    basis invariance of the result.
    """
    w = np.asarray(eigenvalues, dtype=np.float64)
    V = np.asarray(eigenvectors, dtype=np.complex128)
    n = w.shape[0]
    threshold = eps_deg * max(1.0, float(w[-1] - w[0]))
    M = V.conj().T @ dH @ V  # dH in the eigenbasis
    out = np.zeros((n, n), dtype=np.complex128)
    warned = False
    for m in range(n):
        for k in range(n):
            if m == k:
                continue
            gap = w[k] - w[m]
            if abs(gap) <= threshold:
                continue
            if not warned and abs(gap) <= warn_band * threshold:
                warnings.warn(
                    f"near-degenerate eigenvalue pair with gap {abs(gap):.3e} "
                    f"(threshold {threshold:.3e}); generator may be ill-conditioned",
                    RuntimeWarning,
                    stacklevel=2,
                )
                warned = True
            out += np.outer(V[:, m], (1j * M[m, k] / gap) * V[:, k].conj())
    return out


def cd_generator(
    H: Callable[[float], np.ndarray],
    dH: Optional[Callable[[float], np.ndarray]],
    t: float,
    opts: CdOptions = CdOptions(),
    h_step: float = 1e-5,
) -> np.ndarray:
    """Counterdiabatic generator of a time-dependent Hermitian family at ``t``.

    ``dH`` supplies the analytic derivative; pass None (or select the
    'central' mode) to fall back to a central difference of ``H`` with step
    ``opts.h`` or ``h_step``.
    """
    Ht = numerics.check_hermitian(H(t))
    if opts.derivative == "central" or dH is None:
        step = opts.h if opts.h is not None else h_step
        dHt = (np.asarray(H(t + step)) - np.asarray(H(t - step))) / (2.0 * step)
    else:
        dHt = np.asarray(dH(t))
    if not np.all(np.isfinite(dHt)):
        raise ValueError(f"non-finite generator derivative at t = {t:.6g}")
    dec = numerics.eigh(Ht)
    return cd_from_decomposition(dec.eigenvalues, dec.eigenvectors, dHt, opts.eps_deg)


def sqr_cd_matrix(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> np.ndarray:
    """Full 4x4 counterdiabatic generator of the bare SQR Hamiltonian."""
    if opts.derivative == "central":
        step = opts.h if opts.h is not None else 1e-6 * cfg.T
        local = CdOptions(
            eps_deg=opts.eps_deg,
            derivative="central",
            h=step,
            residual_rel=opts.residual_rel,
            r_floor_rel=opts.r_floor_rel,
        )
        return cd_generator(lambda s: h_sqr(s, cfg, gate), None, t, local)
    return cd_generator(
        lambda s: h_sqr(s, cfg, gate), lambda s: h_sqr_dt(s, cfg, gate), t, opts
    )


def sqr_cd_couplings(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> CdCouplings:
    """Ground-state coupling amplitudes of the SQR counterdiabatic generator.

    Verifies that the generator fits the ansatz of purely imaginary couplings
    among the three ground states: the fourth row/column and the real parts
    of the ground block must stay below residual_rel * omega0. Returns the
    imaginary parts of entries (2,1), (3,1), (3,2).
    """
    Hcd = sqr_cd_matrix(t, cfg, gate, opts)
    tol = opts.residual_rel * cfg.omega0

    col4 = np.abs(Hcd[:3, 3])
    k = int(np.argmax(col4))
    if col4[k] > tol:
        raise StructuralResidualError("excited-coupling", (k + 1, 4), float(col4[k]), tol)

    ground = Hcd[:3, :3]
    re = np.abs(ground.real)
    k = int(np.argmax(re))
    i, j = divmod(k, 3)
    if re[i, j] > tol:
        raise StructuralResidualError("real-part", (i + 1, j + 1), float(re[i, j]), tol)

    return CdCouplings(
        omega1=float(Hcd[1, 0].imag),
        omega2=float(Hcd[2, 0].imag),
        omega3=float(Hcd[2, 1].imag),
    )


def h_sc1(
    t: float, cfg: PulseConfig, gate: GateSpec, opts: CdOptions = CdOptions()
) -> np.ndarray:
    """SC1 Hamiltonian: bare SQR plus the counterdiabatic generator."""
    return h_sqr(t, cfg, gate) + sqr_cd_matrix(t, cfg, gate, opts)
