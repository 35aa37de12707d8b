"""Two-qubit Hamiltonian, pulse schedules, and propagators.

Unit system: angular frequencies in rad/ns, times in ns, hbar = 1.  The
experimental operating point converts as J1 = 2*pi*0.280 rad/ns (280 MHz),
J2 = 2*pi*0.320 rad/ns, field gradients 2*pi*31.25e-3 rad/ns, and the
entangling exchange J12 = pi/150 rad/ns (maximum entanglement after 150 ns).

The Hamiltonian of the coupled pair is

    H = 1/2 [ J1 sz(x)I + J2 I(x)sz
              + (J12/2) (sz(x)sz - sz(x)I - I(x)sz)
              + 1/2 (dBz1 sx(x)I + dBz2 I(x)sx) ]

so a gradient dBz rotates its qubit around x at angular rate dBz/2, and an
exact pi/2 preparation rotation takes t_prep = pi/dBz.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, DomainError
from .qlinalg import ID2, ID4, SIGMA_X, SIGMA_Z, expm_hermitian, kron

TWO_PI = 2.0 * math.pi

J12_EXP = math.pi / 150.0          # rad/ns, entangling exchange at scale factor 1
DEFAULT_J1 = TWO_PI * 0.280        # rad/ns
DEFAULT_J2 = TWO_PI * 0.320        # rad/ns
DEFAULT_DBZ = TWO_PI * 31.25e-3    # rad/ns, static field-gradient splitting

SZ1 = kron(SIGMA_Z, ID2)
SZ2 = kron(ID2, SIGMA_Z)
SZZ = kron(SIGMA_Z, SIGMA_Z)
SX1 = kron(SIGMA_X, ID2)
SX2 = kron(ID2, SIGMA_X)

_TIME_SLACK = 1e-9  # absolute slack (ns) for floating-point time comparisons


@dataclass(frozen=True)
class DeviceParams:
    """Piecewise-constant device settings, all in rad/ns."""

    j1: float = 0.0
    j2: float = 0.0
    j12: float = 0.0
    dbz1: float = 0.0
    dbz2: float = 0.0

    def __post_init__(self):
        for name in ("j1", "j2", "j12", "dbz1", "dbz2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"device parameter {name} must be finite, got {value}")
        for name in ("j1", "j2", "j12"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"exchange splitting {name} must be >= 0")


def default_device_params() -> DeviceParams:
    """Experimental operating point (entangling exchange at scale factor 1)."""
    return DeviceParams(
        j1=DEFAULT_J1, j2=DEFAULT_J2, j12=J12_EXP, dbz1=DEFAULT_DBZ, dbz2=DEFAULT_DBZ
    )


@dataclass(frozen=True)
class Segment:
    duration: float  # ns, > 0
    params: DeviceParams

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ConfigError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered piecewise-constant segments.

    Times reported to users are internal time minus ``origin_shift``; for the
    standard protocol the shift equals the preparation time, so the
    observable t = 0 sits at the entangling onset.
    """

    segments: tuple[Segment, ...]
    origin_shift: float = 0.0

    def __post_init__(self):
        if not self.segments:
            raise ConfigError("schedule needs at least one segment")
        if not (0.0 <= self.origin_shift <= self.total_duration + _TIME_SLACK):
            raise ConfigError(
                f"origin_shift {self.origin_shift} outside [0, {self.total_duration}]"
            )

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    def boundaries(self) -> np.ndarray:
        """Cumulative segment start/end times, length len(segments) + 1."""
        return np.concatenate(
            ([0.0], np.cumsum([seg.duration for seg in self.segments]))
        )

    def segment_index(self, t: float) -> int:
        """Index of the segment containing internal time t (end points go to
        the later segment, the final end point to the last)."""
        edges = self.boundaries()
        if t < -_TIME_SLACK or t > edges[-1] + _TIME_SLACK:
            raise DomainError(f"time {t} outside schedule [0, {edges[-1]}]")
        idx = bisect.bisect_right(edges.tolist(), t) - 1
        return min(max(idx, 0), len(self.segments) - 1)


def build_hamiltonian(p: DeviceParams) -> np.ndarray:
    """Two-qubit Hamiltonian for one parameter set (rad/ns), Hermitian by
    construction."""
    return (
        0.5 * (p.j1 * SZ1 + p.j2 * SZ2)
        + 0.25 * p.j12 * (SZZ - SZ1 - SZ2)
        + 0.25 * (p.dbz1 * SX1 + p.dbz2 * SX2)
    )


def standard_schedule(
    t_prep: float,
    r_scale: float,
    base: DeviceParams | None = None,
    horizon: float = 400.0,
    entangling_gradients: bool = True,
) -> PulseSchedule:
    """Preparation followed by the entangling stage.

    Preparation: duration ``t_prep`` with all exchanges off and both
    gradients set to pi/t_prep, so the accumulated x rotation is exactly
    pi/2 regardless of the swept preparation time (only the dissipation
    picked up during preparation varies).

    Entangling: duration ``horizon`` with J1, J2 from ``base``,
    J12 = r_scale * pi/150 rad/ns (``base.j12`` is ignored), and the static
    gradients kept at their base values.  ``entangling_gradients=False``
    turns the gradients off after preparation, which makes the closed-system
    concurrence exactly |sin(J12 t / 2)|; used by oracle runs.
    """
    if not (t_prep > 0.0 and r_scale > 0.0 and horizon > 0.0):
        raise ConfigError(
            f"t_prep, r_scale, horizon must be positive, got "
            f"({t_prep}, {r_scale}, {horizon})"
        )
    if base is None:
        base = default_device_params()
    dbz_prep = math.pi / t_prep
    prep = DeviceParams(j1=0.0, j2=0.0, j12=0.0, dbz1=dbz_prep, dbz2=dbz_prep)
    entangling = DeviceParams(
        j1=base.j1,
        j2=base.j2,
        j12=r_scale * J12_EXP,
        dbz1=base.dbz1 if entangling_gradients else 0.0,
        dbz2=base.dbz2 if entangling_gradients else 0.0,
    )
    return PulseSchedule(
        segments=(Segment(t_prep, prep), Segment(horizon, entangling)),
        origin_shift=t_prep,
    )


@dataclass(frozen=True)
class SegmentEigen:
    """Cached eigendata for one segment: H = V diag(w) V^dag and the
    cumulative propagator at the segment start.  Plumbing for the integrator
    grids; most callers want :func:`propagator`."""

    t0: float
    duration: float
    eigvals: np.ndarray   # (4,) real
    vecs: np.ndarray      # (4, 4) unitary
    u_start: np.ndarray   # (4, 4) propagator from internal t = 0 to t0


def segment_eigensystems(schedule: PulseSchedule) -> tuple[SegmentEigen, ...]:
    out = []
    u = ID4.copy()
    t0 = 0.0
    for seg in schedule.segments:
        h = build_hamiltonian(seg.params)
        w, v = np.linalg.eigh(h)
        out.append(SegmentEigen(t0, seg.duration, w, v, u))
        u = (v * np.exp(-1j * seg.duration * w)) @ v.conj().T @ u
        t0 += seg.duration
    return tuple(out)


def propagator(schedule: PulseSchedule, t: float, t_start: float = 0.0) -> np.ndarray:
    """Time-ordered product of segment propagators over [t_start, t].

    Unitary; ``t`` and ``t_start`` are internal times in
    [0, total_duration].
    """
    total = schedule.total_duration
    if t < -_TIME_SLACK or t > total + _TIME_SLACK:
        raise DomainError(f"time {t} outside schedule [0, {total}]")
    if t_start < -_TIME_SLACK or t_start > t + _TIME_SLACK:
        raise DomainError(f"t_start {t_start} outside [0, t={t}]")
    t = min(max(t, 0.0), total)
    t_start = min(max(t_start, 0.0), t)
    u = ID4.copy()
    edges = schedule.boundaries()
    for k, seg in enumerate(schedule.segments):
        lo = max(float(edges[k]), t_start)
        hi = min(float(edges[k + 1]), t)
        if hi - lo <= _TIME_SLACK:
            continue
        u = expm_hermitian(build_hamiltonian(seg.params), hi - lo) @ u
    return u


def coupling_in_interaction_picture(
    schedule: PulseSchedule, a, t: float
) -> np.ndarray:
    """A(t) = U(t)^dag a U(t), the system coupling operator in the frame
    co-rotating with the scheduled Hamiltonian.  Bath factors are carried by
    the correlation function, not here."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (4, 4):
        raise DimensionError(f"coupling operator must be 4x4, got {a.shape}")
    u = propagator(schedule, t)
    return u.conj().T @ a @ u
