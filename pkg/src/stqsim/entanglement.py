"""Concurrence and spin-flip entanglement diagnostics for two-qubit states.

The spin-flipped state is rho_tilde = (sy x sy) rho* (sy x sy), conjugation
taken in the standard product basis.  With lambda_1 >= ... >= lambda_4 the
eigenvalues of rho rho_tilde,

    concurrence C(rho) = max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)).

The unclamped difference of the descending sorted eigenvalues (DDSE) is
reported alongside: negative values are a diagnostic signature (a common
dephasing bath never produces them, independent baths do after the
entanglement dies), so they must not be silently clamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .qlinalg import SIGMA_Y, general_eigvals, kron

_SYY = kron(SIGMA_Y, SIGMA_Y)

IMAG_TOL = 1e-8   # eigenvalues of rho rho_tilde must be real to this level
NEG_TOL = 1e-10   # and non-negative: anything in [-NEG_TOL, 0) clamps to 0


def spin_flip(rho) -> np.ndarray:
    """Spin-flipped (time-reversed) density operator (sy x sy) rho* (sy x sy)."""
    r = np.asarray(rho, dtype=complex)
    return _SYY @ r.conj() @ _SYY


def flip_spectrum(rho) -> np.ndarray:
    """Eigenvalues of rho rho_tilde, verified real, clamped, sorted descending.

    An eigenvalue with |Im| >= 1e-8 or real part below -1e-10 signals a
    corrupted state upstream and raises NumericalFailure.
    """
    r = np.asarray(rho, dtype=complex)
    lam = general_eigvals(r @ spin_flip(r))
    if np.max(np.abs(lam.imag)) >= IMAG_TOL:
        raise NumericalFailure(
            f"eigenvalues of rho*rho_tilde not real (max |Im| "
            f"{np.max(np.abs(lam.imag)):.3e}); state looks invalid"
        )
    real = lam.real
    if real.min() < -NEG_TOL:
        raise NumericalFailure(
            f"eigenvalue of rho*rho_tilde below -{NEG_TOL:g} "
            f"({real.min():.3e}); state looks invalid"
        )
    return np.sort(np.clip(real, 0.0, None))[::-1]


def ddse(rho, unrooted: bool = False) -> float:
    """sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4), unclamped.

    ``unrooted=True`` drops the square roots (comparison variant; equals the
    rooted form only on rank-one spectra such as pure states).
    """
    lam = flip_spectrum(rho)
    vals = lam if unrooted else np.sqrt(lam)
    return float(vals[0] - vals[1] - vals[2] - vals[3])


def concurrence(rho) -> float:
    """Wootters concurrence max(0, ddse(rho)), in [0, 1]."""
    return max(0.0, ddse(rho))


@dataclass(frozen=True)
class EntanglementSample:
    """One trajectory sample: time (ns), DDSE, concurrence, and the sorted
    clamped spectrum of rho rho_tilde."""

    time: float
    ddse: float
    concurrence: float
    lambdas: tuple[float, float, float, float]

    @classmethod
    def from_state(cls, time: float, rho, unrooted: bool = False) -> "EntanglementSample":
        lam = flip_spectrum(rho)
        vals = lam if unrooted else np.sqrt(lam)
        d = float(vals[0] - vals[1] - vals[2] - vals[3])
        return cls(time=float(time), ddse=d, concurrence=max(0.0, d),
                   lambdas=tuple(float(x) for x in lam))
