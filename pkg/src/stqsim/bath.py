"""Ohmic dephasing baths: spectral density, thermal correlation function,
tabulated memory kernels, and the exact pure-dephasing envelope used to
cross-check the integrator.

The bath couples through sigma_z on each qubit, either one shared bath
(common topology) or one bath per qubit (independent topology).  A thermal
oscillator bath with spectral density J(w) = eta * w * exp(-w/w_c) has the
two-time correlation function

    C(tau) = int_0^inf dw J(w) [coth(hbar w / 2 kB T) cos(w tau) - i sin(w tau)]

with C(-tau) = C(tau)* and, at T = 0, the closed form
C(tau) = eta * w_c^2 / (1 + i w_c tau)^2.

Units: frequencies rad/ns, times ns, temperatures mK.  The conversion
constant is k_B/hbar = 1.380649e-23 J/K / 1.054571817e-34 J s
= 1.30920e11 rad/s/K = 0.13092034 rad/ns per mK, i.e. 1 mK corresponds to
an angular thermal frequency of 0.1309 rad/ns (20.84 GHz/K over 2 pi).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import loggamma

from .errors import ConfigError, DomainError, NumericalFailure
from .model import SZ1, SZ2

K_B_OVER_HBAR = 0.13092034  # rad/ns per mK (see module docstring)

FREQ_CUTOFF_FACTOR = 28.0   # integrate w in [0, 28 w_c]; exp(-28) ~ 7e-13
QUAD_LIMIT = 2000           # QUADPACK subdivision cap
KERNEL_HARD_CAP = 1.0e4     # ns; kernels that have not decayed by here are rejected
KERNEL_CONFIRM = 10         # consecutive below-threshold samples ending tabulation


class Topology(enum.Enum):
    COMMON = "common"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class BathSpec:
    """Bath topology plus (eta, omega_c, temperature).

    eta is the dimensionless system-bath coupling (weak coupling means
    eta well below 1e-3), omega_c the cutoff in rad/ns, temperature in mK.
    """

    topology: Topology = Topology.INDEPENDENT
    eta: float = 3e-5
    omega_c: float = 20.0
    temperature: float = 50.0

    def __post_init__(self):
        if not isinstance(self.topology, Topology):
            raise ConfigError(f"topology must be a Topology, got {self.topology!r}")
        if not (math.isfinite(self.eta) and self.eta >= 0.0):
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if not (math.isfinite(self.omega_c) and self.omega_c > 0.0):
            raise ConfigError(f"omega_c must be > 0, got {self.omega_c}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0.0):
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")


@dataclass(frozen=True)
class CorrelationKernel:
    """C(tau) tabulated on a uniform grid, truncated where it has decayed.

    values[k] = C(k * dtau) for k = 0 .. len-1, tau_max = (len-1) * dtau.
    """

    dtau: float
    values: np.ndarray
    tau_max: float
    eps_trunc: float

    def __post_init__(self):
        self.values.setflags(write=False)


def spectral_density(omega, eta: float, omega_c: float):
    """Ohmic spectral density with exponential cutoff, J(w) = eta w e^{-w/w_c}."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0.0):
        raise DomainError("spectral_density is defined for omega >= 0")
    out = eta * w * np.exp(-w / omega_c)
    return float(out) if np.isscalar(omega) else out


def _coth(x: float) -> float:
    # series for small arguments keeps the w -> 0 limit of J(w) coth finite
    if abs(x) < 1e-4:
        return 1.0 / x + x / 3.0 - x**3 / 45.0
    return 1.0 / math.tanh(x)


def _quad_checked(func, lo, hi, what, **kwargs):
    result = quad(func, lo, hi, full_output=1, limit=QUAD_LIMIT, **kwargs)
    if len(result) > 3:  # QUADPACK appended a warning message
        raise NumericalFailure(
            f"{what}: quadrature did not converge within the refinement cap "
            f"(estimate {result[0]:.3e}, error estimate {result[1]:.3e}): {result[3]}"
        )
    return result[0]


def correlation_function(tau: float, spec: BathSpec) -> complex:
    """Thermal bath correlation function C(tau) by adaptive quadrature.

    Negative arguments are resolved through C(-tau) = C(tau)*.  The real
    part carries the temperature dependence through the coth factor; the
    imaginary part is temperature independent.  At T = 0 the coth factor
    is identically 1.
    """
    tau = float(tau)
    if tau < 0.0:
        return complex(correlation_function(-tau, spec)).conjugate()
    eta, w_c, temp = spec.eta, spec.omega_c, spec.temperature
    if eta == 0.0:
        return 0.0 + 0.0j
    w_max = FREQ_CUTOFF_FACTOR * w_c

    if temp > 0.0:
        thermal_freq = K_B_OVER_HBAR * temp  # k_B T / hbar, rad/ns

        def f_re(w):
            if w == 0.0:
                return 2.0 * eta * thermal_freq
            return eta * w * math.exp(-w / w_c) * _coth(w / (2.0 * thermal_freq))

    else:

        def f_re(w):
            return eta * w * math.exp(-w / w_c)

    def f_im(w):
        return eta * w * math.exp(-w / w_c)

    if tau == 0.0:
        return complex(_quad_checked(f_re, 0.0, w_max, "C(0)"), 0.0)
    re = _quad_checked(f_re, 0.0, w_max, f"Re C({tau})", weight="cos", wvar=tau)
    im = _quad_checked(f_im, 0.0, w_max, f"Im C({tau})", weight="sin", wvar=tau)
    return complex(re, -im)


@lru_cache(maxsize=64)
def _tabulate(eta: float, omega_c: float, temperature: float,
              dtau: float, eps_trunc: float) -> CorrelationKernel:
    spec = BathSpec(Topology.INDEPENDENT, eta, omega_c, temperature)
    values = [correlation_function(0.0, spec)]
    scale = abs(values[0])
    if scale > 0.0 and abs(values[0].imag) >= 1e-12 * scale:
        raise NumericalFailure(
            f"Im C(0) = {values[0].imag:.3e} should vanish (odd integrand)"
        )
    threshold = eps_trunc * scale
    below = 1 if scale == 0.0 else 0
    k = 1
    while below < KERNEL_CONFIRM:
        tau = k * dtau
        if tau > KERNEL_HARD_CAP:
            raise ConfigError(
                f"kernel has not decayed below {eps_trunc:g} * |C(0)| within "
                f"{KERNEL_HARD_CAP:g} ns; bath spec looks pathological"
            )
        c = correlation_function(tau, spec)
        values.append(c)
        below = below + 1 if abs(c) <= threshold else 0
        k += 1
    arr = np.asarray(values, dtype=complex)
    return CorrelationKernel(
        dtau=dtau, values=arr, tau_max=(len(arr) - 1) * dtau, eps_trunc=eps_trunc
    )


def tabulate_kernel(spec: BathSpec, dtau: float, eps_trunc: float = 1e-6) -> CorrelationKernel:
    """Tabulate C on a uniform grid until |C| stays below
    eps_trunc * |C(0)| for 10 consecutive samples.

    dtau must resolve the cutoff (dtau <= 0.1 / omega_c).  Results are
    cached on the physical bath parameters, so sweep points sharing a bath
    reuse the table.
    """
    if not (dtau > 0.0):
        raise ConfigError(f"dtau must be positive, got {dtau}")
    if dtau > 0.1 / spec.omega_c * (1.0 + 1e-9):
        raise ConfigError(
            f"dtau {dtau} too coarse for omega_c {spec.omega_c} "
            f"(need dtau <= {0.1 / spec.omega_c:g})"
        )
    if not (0.0 < eps_trunc < 1.0):
        raise ConfigError(f"eps_trunc must be in (0, 1), got {eps_trunc}")
    return _tabulate(spec.eta, spec.omega_c, spec.temperature, dtau, eps_trunc)


def coupling_operators(topology: Topology) -> tuple[tuple[np.ndarray, int], ...]:
    """System coupling operators with their bath index.

    Common topology: one operator sz(x)I + I(x)sz on bath 0 (cross terms of
    the two qubits ride on the shared bath).  Independent topology: sz(x)I
    on bath 0 and I(x)sz on bath 1; distinct baths are uncorrelated, so no
    cross terms appear in the master equation.
    """
    if topology is Topology.COMMON:
        return ((SZ1 + SZ2, 0),)
    if topology is Topology.INDEPENDENT:
        return ((SZ1, 0), (SZ2, 1))
    raise ConfigError(f"unknown topology {topology!r}")


def dephasing_exponent(t, spec: BathSpec):
    """Exact decoherence exponent Gamma(t) of a single dephasing qubit.

    For sigma_z coupling and no system Hamiltonian the off-diagonal element
    of the qubit decays as exp(-Gamma(t)) with

        Gamma(t) = 4 int_0^inf dw J(w) coth(hbar w / 2 kB T) (1 - cos wt) / w^2.

    The time-local second-order equation is exact for this model, so the
    integrator must reproduce it; evaluated here in closed form,

        Gamma(t) = 2 eta ln(1 + w_c^2 t^2)
                   + 8 eta [ln G(1 + q) - Re ln G(1 + q + i t/beta)]

    with q = 1/(beta w_c), beta = hbar/(kB T) and G the gamma function
    (the Matsubara sum of the thermal part telescopes into gamma-function
    ratios).  Accepts scalar or array t >= 0.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise DomainError("dephasing exponent is defined for t >= 0")
    eta, w_c, temp = spec.eta, spec.omega_c, spec.temperature
    vacuum = 2.0 * eta * np.log1p((w_c * t_arr) ** 2)
    if temp == 0.0 or eta == 0.0:
        out = vacuum
    else:
        beta = 1.0 / (K_B_OVER_HBAR * temp)  # ns
        q = 1.0 / (beta * w_c)
        z = (1.0 + q) + 1j * (t_arr / beta)
        thermal = 8.0 * eta * (loggamma(1.0 + q).real - loggamma(z).real)
        out = vacuum + thermal
    return float(out) if np.isscalar(t) else out
