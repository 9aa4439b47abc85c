"""Small dense Hermitian linear algebra and Schrodinger-equation integration.

Everything here works on plain complex numpy arrays of dimension <= 8.
Conventions used throughout the package:

* hbar = 1, so the equation of motion is i d|psi>/dt = H(t) |psi>.
* States are unit-norm complex vectors; no renormalization is performed
  during integration, so the norm drift is a free accuracy diagnostic.
* Eigenvectors are phase-fixed (largest-magnitude component real and
  nonnegative) to make eigendecompositions reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

# Unit-norm tolerance for vectors that represent quantum states.
NORM_TOL = 1e-9

# Relative Hermiticity tolerance (fraction of the max absolute entry).
HERMITICITY_RTOL = 1e-12

MAX_DIM = 8


class NonHermitianError(ValueError):
    """Input matrix violates the Hermiticity invariant."""

    def __init__(self, i: int, j: int, asymmetry: float, tol: float):
        self.entry = (i, j)
        super().__init__(
            f"matrix entry ({i}, {j}) differs from the conjugate of "
            f"({j}, {i}) by {asymmetry:.3e} (tolerance {tol:.3e})"
        )


class IntegrationError(RuntimeError):
    """Time integration aborted; `t_fail` reports the failing time."""

    def __init__(self, message: str, t_fail: float):
        self.t_fail = t_fail
        super().__init__(f"{message} (t = {t_fail:.6g})")


def check_hermitian(H: np.ndarray) -> np.ndarray:
    """Validate the Hermiticity invariant and return H as a complex array.

    Raises NonHermitianError naming the worst offending entry when the
    asymmetry exceeds ``HERMITICITY_RTOL`` times the max absolute entry.
    """
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if H.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {H.shape[0]} exceeds supported maximum {MAX_DIM}")
    scale = np.max(np.abs(H)) if H.size else 0.0
    tol = HERMITICITY_RTOL * max(scale, np.finfo(float).tiny)
    asym = np.abs(H - H.conj().T)
    k = int(np.argmax(asym))
    i, j = divmod(k, H.shape[0])
    if asym[i, j] > tol:
        raise NonHermitianError(i, j, float(asym[i, j]), tol)
    return H


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in ascending order and phase-fixed orthonormal eigenvectors.

    ``eigenvectors[:, k]`` is the eigenvector belonging to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


def _fix_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real >= 0."""
    V = V.copy()
    idx = np.argmax(np.abs(V), axis=0)
    for k, i in enumerate(idx):
        pivot = V[i, k]
        if abs(pivot) > 0.0:
            V[:, k] *= np.conj(pivot) / abs(pivot)
    return V


def eigh(H: np.ndarray) -> EigenDecomposition:
    """Hermitian eigendecomposition with a deterministic phase convention.

    The input is validated against the Hermiticity invariant first; a
    violation raises NonHermitianError with the offending entry.
    """
    H = check_hermitian(H)
    w, V = np.linalg.eigh(H)
    return EigenDecomposition(eigenvalues=w, eigenvectors=_fix_phases(V))


@dataclass(frozen=True)
class IntegrationResult:
    """Solution of i d|psi>/dt = H(t)|psi> sampled on a uniform grid.

    ``states[k]`` is the state at ``times[k]``; ``final_state`` equals
    ``states[-1]``. ``norm_drift`` is max over the grid of | ||psi|| - 1 |.
    """

    times: np.ndarray
    states: np.ndarray
    final_state: np.ndarray
    norm_drift: float


def integrate(
    generator: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    t_start: float,
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    n_out: int = 2000,
) -> IntegrationResult:
    """Integrate the time-dependent Schrodinger equation (hbar = 1).

    Parameters
    ----------
    generator : callable
        Maps a time ``t`` to the Hermitian generator ``H(t)`` as an
        ``(n, n)`` complex array.
    psi0 : array
        Normalized initial state of dimension ``n``.
    t_start, t_end : float
        Integration window, ``t_start < t_end``.
    rtol, atol : float
        Tolerances of the adaptive DOP853 stepper.
    n_out : int
        Number of uniform output grid points covering the window.

    Raises
    ------
    IntegrationError
        On step-size underflow or non-finite generator output, reporting
        the failing time.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    if abs(np.linalg.norm(psi0) - 1.0) > NORM_TOL:
        raise ValueError(f"initial state norm {np.linalg.norm(psi0):.12f} is not 1")
    if not t_start < t_end:
        raise ValueError("require t_start < t_end")

    dim = psi0.shape[0]

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        H = np.asarray(generator(t), dtype=np.complex128)
        if not np.all(np.isfinite(H)):
            raise IntegrationError("non-finite generator output", t)
        return -1j * (H @ y)

    times = np.linspace(t_start, t_end, n_out)
    sol = solve_ivp(
        rhs,
        (t_start, t_end),
        psi0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=times,
        dense_output=False,
    )
    if not sol.success:
        t_fail = float(sol.t[-1]) if sol.t.size else t_start
        raise IntegrationError(f"integration failed: {sol.message}", t_fail)

    states = np.ascontiguousarray(sol.y.T)
    norms = np.linalg.norm(states, axis=1)
    return IntegrationResult(
        times=times,
        states=states,
        final_state=states[-1],
        norm_drift=float(np.max(np.abs(norms - 1.0))),
    )
