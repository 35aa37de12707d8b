"""Time-local second-order master-equation integrator.

In the interaction picture the equation of motion reads

    d rho_I/dt = - sum_a { [A_a(t), Lam_a(t) rho_I] - [A_a(t), rho_I Lam_a(t)^dag] }

    Lam_a(t)   = int_0^t dtau C_a(tau) A_a(t - tau)

where A_a(t) = U(t)^dag A_a U(t) are the coupling operators in the
interaction picture, C_a the correlation kernel of the bath the operator
couples to, and the sum runs over the topology's coupling operators (one
summed operator for a common bath, one per qubit for independent baths;
distinct baths carry no cross terms).  This is the literal double-commutator
form traced over the thermal bath state, with no secular approximation.

Integration strategy: fixed-step classical RK4 on rho_I, with the memory
integral truncated at the kernel's tau_max and evaluated by the trapezoid
rule on a uniform grid.  Because the Hamiltonian is piecewise constant,
A_a(t) is precomputed on the whole grid from per-segment eigendecompositions
(element-wise phase factors), and all Lam_a(t) follow from one FFT
convolution against the kernel; the RK4 loop then only touches 4x4 algebra.
The kernel grid spacing is snapped to dt/(2m) so every RK4 half-step lands
on a tabulated point.  Sampled states are returned in the Schrodinger
picture, rho(t) = U(t) rho_I(t) U(t)^dag, since entanglement is not
invariant under the non-local frame change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft

from .bath import BathSpec, CorrelationKernel, Topology, coupling_operators, tabulate_kernel
from .errors import ConfigError, DiagnosticsBreach, DomainError
from .model import PulseSchedule, coupling_in_interaction_picture, propagator, segment_eigensystems

DIAG_ABORT_TOL = 1e-6   # trace/Hermiticity breach that aborts a run
RHO0_TOL = 1e-10        # initial-state validation


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    dt is the RK4 step (ns); kernel_dtau the requested memory-grid spacing
    (snapped to dt/(2m) at run time, never coarser); eps_trunc the kernel
    truncation level.  markov_mode replaces the growing upper limit of the
    memory integral with tau_max from t = 0 (off by default: the finite
    upper limit is the equation's stated form).
    """

    dt: float = 0.01
    kernel_dtau: float = 0.005
    eps_trunc: float = 1e-6
    markov_mode: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (0.0 < self.kernel_dtau <= self.dt):
            raise ConfigError(
                f"kernel_dtau must be in (0, dt], got {self.kernel_dtau} with dt {self.dt}"
            )
        if not (0.0 < self.eps_trunc < 1.0):
            raise ConfigError(f"eps_trunc must be in (0, 1), got {self.eps_trunc}")


@dataclass
class Trajectory:
    """Sampled open-system evolution in the Schrodinger picture.

    times are observable (internal time minus the schedule's origin shift);
    diagnostics are per-sample trace error |Tr rho - 1|, Hermiticity error
    max|rho - rho^dag| and the smallest eigenvalue of rho.
    """

    times: np.ndarray
    states: np.ndarray      # (n_samples, 4, 4)
    trace_err: np.ndarray
    herm_err: np.ndarray
    min_eig: np.ndarray
    meta: dict = field(default_factory=dict)


def _bath_list(spec: BathSpec | Sequence[BathSpec]) -> list[BathSpec]:
    if isinstance(spec, BathSpec):
        specs = [spec]
    else:
        specs = list(spec)
        if not specs:
            raise ConfigError("need at least one bath spec")
    topology = specs[0].topology
    n_baths = 1 if topology is Topology.COMMON else 2
    if any(s.topology is not topology for s in specs):
        raise ConfigError("per-bath specs must share one topology")
    if len(specs) == 1:
        specs = specs * n_baths
    if len(specs) != n_baths:
        raise ConfigError(
            f"{topology.value} topology has {n_baths} bath(s), got {len(specs)} specs"
        )
    return specs


def _effective_grid(cfg: IntegratorConfig) -> tuple[float, int]:
    """Kernel spacing dt/(2m) no coarser than requested, plus grid stride per
    RK4 step."""
    m = max(1, math.ceil(cfg.dt / (2.0 * cfg.kernel_dtau) - 1e-12))
    return cfg.dt / (2.0 * m), 2 * m


def _coupling_grid(
    schedule: PulseSchedule, ops: Sequence[np.ndarray], h: float, n_pre: int, n_grid: int
) -> np.ndarray:
    """A_a(t) on the uniform grid t = j*h for j = -n_pre .. n_grid.

    Within a segment, A(t0 + s) = L (A_seg o P(s)) L^dag with
    P_jk(s) = exp(i (w_j - w_k) s) from the segment eigendecomposition, so
    every grid point costs O(d^2).  Negative times (markov mode) extend the
    first segment backward.
    """
    eigs = segment_eigensystems(schedule)
    n_ops = len(ops)
    total_pts = n_pre + n_grid + 1
    out = np.empty((total_pts, n_ops, 4, 4), dtype=complex)
    edges = schedule.boundaries()

    j_all = np.arange(-n_pre, n_grid + 1)
    t_all = j_all * h
    # segment index per grid point; ends belong to the later segment
    seg_idx = np.clip(np.searchsorted(edges, t_all + 1e-12, side="right") - 1,
                      0, len(eigs) - 1)
    seg_idx[t_all < 0.0] = 0

    for k, se in enumerate(eigs):
        mask = seg_idx == k
        if not np.any(mask):
            continue
        s = t_all[mask] - se.t0
        delta = se.eigvals[:, None] - se.eigvals[None, :]
        phases = np.exp(1j * delta[None, :, :] * s[:, None, None])
        left = se.u_start.conj().T @ se.vecs        # U0^dag V
        for a, op in enumerate(ops):
            op_seg = se.vecs.conj().T @ op @ se.vecs
            mid = op_seg[None, :, :] * phases
            out[np.flatnonzero(mask), a] = left @ mid @ left.conj().T
    return out


def _memory_grid(
    a_grid: np.ndarray, kernels: Sequence[CorrelationKernel], bath_of_op: Sequence[int],
    h: float, n_pre: int, markov: bool,
) -> np.ndarray:
    """Lam_a on the grid via FFT convolution of A_a against the weighted
    kernel (trapezoid weights, endpoint-corrected for partial windows)."""
    total_pts, n_ops = a_grid.shape[:2]
    n_grid = total_pts - n_pre - 1
    lam = np.empty((n_grid + 1, n_ops, 4, 4), dtype=complex)
    for a in range(n_ops):
        kern = kernels[bath_of_op[a]]
        c = kern.values
        k_len = len(c)
        w = np.full(k_len, h, dtype=float)
        w[0] *= 0.5
        w[-1] *= 0.5
        wc = w * c
        sig = a_grid[:, a].reshape(total_pts, 16)
        n_fft = scipy.fft.next_fast_len(total_pts + k_len - 1)
        conv = scipy.fft.ifft(
            scipy.fft.fft(sig, n_fft, axis=0) * scipy.fft.fft(wc, n_fft)[:, None],
            axis=0,
        )[:total_pts]
        lam_a = conv[n_pre:].reshape(n_grid + 1, 4, 4)
        if not markov:
            # partial windows m < k_len-1: trapezoid over [0, m*h] needs the
            # k = m term at half weight (and Lam(0) = 0 exactly); the full
            # window already carries half weight at k = k_len-1
            m_fix = np.arange(min(k_len - 1, n_grid + 1))
            lam_a[m_fix] -= (0.5 * h) * c[m_fix, None, None] * a_grid[n_pre, a]
        lam[:, a] = lam_a
    return lam


def _dissipator(a_ops: np.ndarray, lam_ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """-sum_a [A_a, Lam_a rho - rho Lam_a^dag] for Hermitian rho.

    Uses rho Lam^dag = (Lam rho)^dag, so each stage is two batched products.
    """
    x = lam_ops @ rho
    b = x - x.conj().swapaxes(-1, -2)
    comm = a_ops @ b - b @ a_ops
    return -comm.sum(axis=0)


def rhs(
    t: float,
    rho_i: np.ndarray,
    schedule: PulseSchedule,
    spec: BathSpec,
    kernel: CorrelationKernel,
) -> np.ndarray:
    """d rho_I/dt at time t, by direct quadrature of the memory integral.

    Reference implementation of the master-equation right-hand side; the
    integrator reproduces it on its precomputed grids (the grid path is
    tested against this one).  rho_i must be Hermitian with unit trace.
    """
    rho = np.asarray(rho_i, dtype=complex)
    if rho.shape != (4, 4):
        raise ConfigError(f"state must be 4x4, got {rho.shape}")
    if kernel.values.size == 0:
        raise ConfigError("empty correlation kernel")
    if t < 0.0 or t > schedule.total_duration + 1e-9:
        raise DomainError(f"time {t} outside schedule")
    ops = coupling_operators(spec.topology)
    h = kernel.dtau
    n_tau = int(math.floor(min(t, kernel.tau_max) / h + 1e-9))
    out = np.zeros((4, 4), dtype=complex)
    for op, _bath in ops:
        a_t = coupling_in_interaction_picture(schedule, op, t)
        lam = np.zeros((4, 4), dtype=complex)
        if n_tau >= 1:
            w = np.full(n_tau + 1, h)
            w[0] *= 0.5
            w[-1] *= 0.5
            for k in range(n_tau + 1):
                a_past = coupling_in_interaction_picture(schedule, op, t - k * h)
                lam += w[k] * kernel.values[k] * a_past
        x = lam @ rho
        b = x - x.conj().T
        out -= a_t @ b - b @ a_t
    return out


def _validate_rho0(rho0) -> np.ndarray:
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (4, 4):
        raise ConfigError(f"initial state must be 4x4, got {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > RHO0_TOL:
        raise ConfigError(f"initial state not Hermitian (error {herm:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > RHO0_TOL:
        raise ConfigError(f"initial state trace {tr} != 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -1e-10:
        raise ConfigError(f"initial state not positive (min eigenvalue {w.min():.3e})")
    return rho


def evolve(
    rho0,
    schedule: PulseSchedule,
    spec: BathSpec | Sequence[BathSpec],
    cfg: IntegratorConfig | None = None,
    sample_every: float = 1.0,
) -> Trajectory:
    """Integrate the master equation over the schedule and sample the state.

    rho0 is the density matrix at the start of the schedule (pictures
    coincide there).  spec may be a single BathSpec or, for the independent
    topology, a pair of per-bath specs.  Samples are taken every
    sample_every ns (snapped to a multiple of dt), transformed to the
    Schrodinger picture, and checked against the trace/Hermiticity abort
    tolerance of 1e-6.
    """
    cfg = cfg or IntegratorConfig()
    rho = _validate_rho0(rho0)
    specs = _bath_list(spec)
    topology = specs[0].topology

    h, stride = _effective_grid(cfg)
    total = schedule.total_duration
    n_steps = int(math.floor(total / cfg.dt + 1e-9))
    if n_steps < 1:
        raise ConfigError(f"schedule ({total} ns) shorter than one step ({cfg.dt} ns)")
    n_grid = n_steps * stride

    kernels = [tabulate_kernel(s, h, cfg.eps_trunc) for s in specs]
    ops_with_bath = coupling_operators(topology)
    ops = np.asarray([op for op, _ in ops_with_bath])
    bath_of_op = [b for _, b in ops_with_bath]

    n_pre = max(len(k.values) - 1 for k in kernels) if cfg.markov_mode else 0
    a_grid = _coupling_grid(schedule, ops, h, n_pre, n_grid)
    lam_grid = _memory_grid(a_grid, kernels, bath_of_op, h, n_pre, cfg.markov_mode)
    a_grid = a_grid[n_pre:]

    sample_stride = max(1, int(round(sample_every / cfg.dt)))
    sample_steps = list(range(0, n_steps + 1, sample_stride))

    times = np.empty(len(sample_steps))
    states = np.empty((len(sample_steps), 4, 4), dtype=complex)
    trace_err = np.empty(len(sample_steps))
    herm_err = np.empty(len(sample_steps))
    min_eig = np.empty(len(sample_steps))

    dt = cfg.dt
    half = stride // 2
    next_sample = 0

    def take_sample(step: int, rho_i: np.ndarray) -> None:
        nonlocal next_sample
        t = step * dt
        u = propagator(schedule, min(t, total))
        rho_s = u @ rho_i @ u.conj().T
        tr = abs(complex(np.trace(rho_s)) - 1.0)
        he = float(np.max(np.abs(rho_s - rho_s.conj().T)))
        ev = np.linalg.eigvalsh(0.5 * (rho_s + rho_s.conj().T))
        if not (tr <= DIAG_ABORT_TOL and he <= DIAG_ABORT_TOL):
            raise DiagnosticsBreach(
                f"diagnostics breach at t = {t - schedule.origin_shift:.3f} ns "
                f"(trace error {tr:.3e}, hermiticity error {he:.3e}); "
                f"dt may be too large or the coupling outside weak coupling",
                report={
                    "t_ns": t - schedule.origin_shift,
                    "trace_err": tr,
                    "herm_err": he,
                    "min_eig": float(ev.min()),
                },
            )
        times[next_sample] = t - schedule.origin_shift
        states[next_sample] = rho_s
        trace_err[next_sample] = tr
        herm_err[next_sample] = he
        min_eig[next_sample] = float(ev.min())
        next_sample += 1

    take_sample(0, rho)
    sample_set = set(sample_steps)
    sixth = dt / 6.0
    for n in range(n_steps):
        m = n * stride
        k1 = _dissipator(a_grid[m], lam_grid[m], rho)
        k2 = _dissipator(a_grid[m + half], lam_grid[m + half], rho + (0.5 * dt) * k1)
        k3 = _dissipator(a_grid[m + half], lam_grid[m + half], rho + (0.5 * dt) * k2)
        k4 = _dissipator(a_grid[m + stride], lam_grid[m + stride], rho + dt * k3)
        rho = rho + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        if (n + 1) in sample_set:
            take_sample(n + 1, rho)

    meta = {
        "dt": dt,
        "kernel_dtau": h,
        "eps_trunc": cfg.eps_trunc,
        "markov_mode": cfg.markov_mode,
        "n_steps": n_steps,
        "sample_every": sample_stride * dt,
        "tau_max": [k.tau_max for k in kernels],
        "origin_shift": schedule.origin_shift,
    }
    return Trajectory(times, states, trace_err, herm_err, min_eig, meta)


def to_schrodinger(rho_i, schedule: PulseSchedule, t: float) -> np.ndarray:
    """Map an interaction-picture state to the Schrodinger picture,
    rho = U(t) rho_I U(t)^dag.  Spectrum preserving; concurrence is not
    (U is non-local once the qubits are coupled), which is why sampling
    happens in this picture."""
    rho = np.asarray(rho_i, dtype=complex)
    if rho.shape != (4, 4):
        raise ConfigError(f"state must be 4x4, got {rho.shape}")
    u = propagator(schedule, t)
    return u @ rho @ u.conj().T
