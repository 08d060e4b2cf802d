"""Classical single-machine infinite-bus transient stability simulator.

A power plant (constant-flux machine model E' behind X'd) feeds an infinite
bus through a step-up transformer and two parallel reactances.  A bolted
three-phase fault at the transformer end of circuit 2 drops the electrical
power to zero; the fault is cleared by opening circuit 2.  The swing equation

    d(delta)/dt = omega0 * dw
    d(dw)/dt    = (Pm - Pe - D*dw) / (2H),   Pe = E'*Vbus*sin(delta)/X

is integrated with a fixed-step RK4 scheme; steps that straddle a switching
instant are split so each RK4 step sees a single network state.  Stability is
judged against the post-fault unstable equilibrium (pole-slip detection) with
a hard delta - delta0 > pi backstop.  An equal-area criterion routine provides
an independent critical-clearing-time oracle for the Pe = 0 fault.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np


class InfeasibleOperatingPoint(ValueError):
    """No machine internal voltage satisfies the requested terminal P, Q."""


class NoPostFaultEquilibrium(ValueError):
    """Mechanical power exceeds the post-fault power transfer limit."""


@dataclass
class SmibModel:
    """Plant, transformer and line reactances, all per unit on the machine
    base.  The four-generator plant is aggregated into one machine."""

    s_base_mva: float = 2220.0
    v_base_kv: float = 24.0
    xd_prime: float = 0.3
    inertia_h: float = 3.5
    damping: float = 0.0
    x_transformer: float = 0.15
    x_line1: float = 0.5
    x_line2: float = 0.93
    v_bus: float = 0.92
    f0_hz: float = 60.0

    def __post_init__(self):
        for name in ("xd_prime", "x_transformer", "x_line1", "x_line2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.inertia_h <= 0:
            raise ValueError("inertia constant must be > 0")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")

    @property
    def omega0(self) -> float:
        return 2.0 * math.pi * self.f0_hz

    @property
    def x_lines_parallel(self) -> float:
        return self.x_line1 * self.x_line2 / (self.x_line1 + self.x_line2)

    @property
    def x_external_pre(self) -> float:
        """Transformer plus both circuits, terminal to bus."""
        return self.x_transformer + self.x_lines_parallel

    @property
    def x_pre(self) -> float:
        return self.xd_prime + self.x_external_pre

    @property
    def x_post(self) -> float:
        """Circuit 2 opened."""
        return self.xd_prime + self.x_transformer + self.x_line1


@dataclass
class OperatingPoint:
    """Pre-fault P, Q delivered at the machine terminals (generator sign)."""

    p_pu: float
    q_pu: float = 0.0

    def __post_init__(self):
        if self.p_pu < 0:
            raise ValueError("active power must be >= 0")

    @classmethod
    def from_power_factor(cls, pf: float, s_pu: float = 1.0) -> "OperatingPoint":
        """Full apparent load s_pu at the given power factor, overexcited."""
        if not 0 < pf <= 1:
            raise ValueError("power factor must be in (0, 1]")
        return cls(s_pu * pf, s_pu * math.sqrt(max(0.0, 1.0 - pf * pf)))


@dataclass
class FaultEvent:
    """Bolted three-phase fault on circuit 2 at the transformer end,
    cleared by opening the circuit.  duration 0 means no fault at all."""

    t_on: float = 0.1
    duration: float = 0.05

    def __post_init__(self):
        if self.t_on < 0 or self.duration < 0:
            raise ValueError("fault times must be >= 0")

    @property
    def t_clear(self) -> float:
        return self.t_on + self.duration


def init_conditions(model: SmibModel, op: OperatingPoint) -> tuple[float, float]:
    """Internal voltage magnitude E' and angle delta0 (rad) on the pre-fault
    network, from the terminal power constraint.

    With terminal voltage a*exp(j*theta) feeding the bus V through X_ext:
    a*sin(theta) = P*X/V and a*cos(theta) = (a^2 - Q*X)/V, which close to a
    quadratic in a^2; the high-voltage root is the physical one.
    """
    v = model.v_bus
    x = model.x_external_pre
    b = op.p_pu * x / v
    inner = v * v + 4.0 * op.q_pu * x - 4.0 * b * b
    if inner < 0:
        raise InfeasibleOperatingPoint(
            f"no terminal voltage supports P={op.p_pu}, Q={op.q_pu} pu "
            f"into a {v} pu bus through {x:.6f} pu")
    u = (2.0 * op.q_pu * x + v * v + v * math.sqrt(inner)) / 2.0
    a = math.sqrt(u)
    sin_t = b / a
    cos_t = (u - op.q_pu * x) / (a * v)
    vt = a * complex(cos_t, sin_t)
    current = (vt - v) / complex(0.0, x)
    e = vt + complex(0.0, model.xd_prime) * current
    e_mag, delta0 = abs(e), cmath.phase(e)
    residual = abs(e_mag * v * math.sin(delta0) / model.x_pre - op.p_pu)
    if residual > 1e-10:
        raise InfeasibleOperatingPoint(
            f"initialization residual {residual:.3e} exceeds 1e-10 pu")
    return e_mag, delta0


@dataclass
class SwingState:
    delta_rad: float
    speed_dev_pu: float
    e_prime_pu: float


def electrical_power(state: SwingState, model: SmibModel, x_effective: float) -> float:
    if math.isinf(x_effective):
        return 0.0
    return state.e_prime_pu * model.v_bus * math.sin(state.delta_rad) / x_effective


def swing_step(state: SwingState, model: SmibModel, x_effective: float,
               pm_pu: float, dt: float) -> SwingState:
    """One RK4 step of the swing equation.  x_effective = inf means the
    during-fault network where no electrical power is transferred."""
    if dt > 1e-3:
        raise ValueError("dt must be <= 1 ms")
    w0 = model.omega0
    two_h = 2.0 * model.inertia_h
    e, v = state.e_prime_pu, model.v_bus
    pmax = 0.0 if math.isinf(x_effective) else e * v / x_effective

    def deriv(delta, dw):
        pe = pmax * math.sin(delta)
        return w0 * dw, (pm_pu - pe - model.damping * dw) / two_h

    d, w = state.delta_rad, state.speed_dev_pu
    k1d, k1w = deriv(d, w)
    k2d, k2w = deriv(d + 0.5 * dt * k1d, w + 0.5 * dt * k1w)
    k3d, k3w = deriv(d + 0.5 * dt * k2d, w + 0.5 * dt * k2w)
    k4d, k4w = deriv(d + dt * k3d, w + dt * k3w)
    return SwingState(
        d + dt * (k1d + 2 * k2d + 2 * k3d + k4d) / 6.0,
        w + dt * (k1w + 2 * k2w + 2 * k3w + k4w) / 6.0,
        e,
    )


@dataclass
class SwingTrace:
    times: np.ndarray
    delta_rad: np.ndarray
    speed_dev_pu: np.ndarray
    pe_pu: np.ndarray

    def __post_init__(self):
        for arr in (self.times, self.delta_rad, self.speed_dev_pu, self.pe_pu):
            if not np.all(np.isfinite(arr)):
                raise ValueError("trace contains non-finite samples")


@dataclass
class SimulationResult:
    trace: SwingTrace
    stable: bool
    delta0_rad: float
    e_prime_pu: float

    @property
    def stability_flag(self) -> int:
        """1 means instability, 0 stability."""
        return 0 if self.stable else 1


# pole-slip persistence: dw > 0 beyond the unstable equilibrium this long
SLIP_HOLD_S = 0.5


def simulate(model: SmibModel, op: OperatingPoint, fault: FaultEvent,
             dt: float = 5e-4, t_end: float | None = None,
             stop_on_verdict: bool = False) -> SimulationResult:
    """Integrate pre-fault, fault and post-clearing phases.

    Steps never straddle a switching instant: the step hitting t_on or
    t_clear is split so RK4 sees a smooth right-hand side throughout.
    Samples are recorded on the uniform dt grid regardless of the splits.
    """
    e, delta0 = init_conditions(model, op)
    # use the float-exact electrical power at delta0 as Pm so the no-fault
    # case is a fixed point of the integrator, not just close to one
    pm = e * model.v_bus * math.sin(delta0) / model.x_pre
    if t_end is None:
        t_end = fault.t_clear + 3.0

    null_fault = fault.duration == 0.0
    events = [] if null_fault else [fault.t_on, fault.t_clear]

    def x_at(t: float) -> float:
        if null_fault or t < fault.t_on - 1e-15:
            return model.x_pre
        if t < fault.t_clear - 1e-15:
            return math.inf
        return model.x_post

    # post-fault unstable equilibrium angle, for pole-slip detection
    pmax_post = e * model.v_bus / model.x_post
    delta_uep = math.pi - math.asin(pm / pmax_post) if pm < pmax_post else None

    n_steps = int(round(t_end / dt))
    state = SwingState(delta0, 0.0, e)
    times = np.empty(n_steps + 1)
    deltas = np.empty(n_steps + 1)
    speeds = np.empty(n_steps + 1)
    pes = np.empty(n_steps + 1)

    def record(i, t, st):
        times[i] = t
        deltas[i] = st.delta_rad
        speeds[i] = st.speed_dev_pu
        pes[i] = electrical_power(st, model, x_at(t))

    record(0, 0.0, state)
    stable = True
    slip_since = None
    n_recorded = n_steps
    for i in range(1, n_steps + 1):
        t0, t1 = (i - 1) * dt, i * dt
        cut = [t for t in events if t0 + 1e-15 < t < t1 - 1e-15]
        t = t0
        for boundary in [*cut, t1]:
            if boundary - t > 1e-15:
                state = swing_step(state, model, x_at(t), pm, boundary - t)
            t = boundary
        record(i, t1, state)

        if stable and t1 >= fault.t_clear:
            swing = state.delta_rad - delta0
            slipped = False
            if swing > math.pi:
                slipped = True
            elif delta_uep is not None and state.delta_rad > delta_uep \
                    and state.speed_dev_pu > 0:
                slip_since = t1 if slip_since is None else slip_since
                slipped = t1 - slip_since >= SLIP_HOLD_S
            else:
                slip_since = None
            if slipped:
                stable = False
                if stop_on_verdict:
                    n_recorded = i
                    break

    sl = slice(0, n_recorded + 1)
    trace = SwingTrace(times[sl], deltas[sl], speeds[sl], pes[sl])
    return SimulationResult(trace, stable, delta0, e)


def cct_equal_area(model: SmibModel, op: OperatingPoint) -> tuple[float, float]:
    """Critical clearing angle and time for the Pe = 0 fault, from the
    equal-area criterion on the post-fault power curve.

    Returns (delta_crit_rad, t_crit_s); t_crit is inf when no mechanical
    power accelerates the rotor.
    """
    e, delta0 = init_conditions(model, op)
    pm = e * model.v_bus * math.sin(delta0) / model.x_pre
    pmax = e * model.v_bus / model.x_post
    if pm >= pmax:
        raise NoPostFaultEquilibrium(
            f"Pm = {pm:.6f} pu exceeds the post-fault limit {pmax:.6f} pu")
    if pm == 0.0:
        return math.pi, math.inf
    delta_u = math.pi - math.asin(pm / pmax)
    cos_dc = (pm * (delta_u - delta0) + pmax * math.cos(delta_u)) / pmax
    if cos_dc < -1.0:
        raise NoPostFaultEquilibrium(
            f"equal-area balance has no solution (cos delta_c = {cos_dc:.6f})")
    delta_c = math.acos(min(1.0, cos_dc))
    if delta_c <= delta0:
        # the decelerating area after clearing is already exhausted at
        # delta0: losing circuit 2 destabilizes regardless of duration
        return delta0, 0.0
    t_crit = math.sqrt(4.0 * model.inertia_h * (delta_c - delta0)
                       / (model.omega0 * pm))
    return delta_c, t_crit


# -- parametric sweep ----------------------------------------------------------

# the classical network cannot deliver the full apparent load at unity power
# factor into the 0.92 pu bus, so the factor grid tops out at 0.98
DEFAULT_POWER_FACTORS = (0.6, 0.7, 0.8, 0.9, 0.98)
DEFAULT_DURATIONS_S = tuple(np.linspace(0.070, 0.250, 67))


@dataclass
class SweepRow:
    power_mw: float
    duration_ms: float
    stability: int  # 1 means instability, 0 stability


def sweep(model: SmibModel | None = None,
          durations_s=DEFAULT_DURATIONS_S,
          power_factors=DEFAULT_POWER_FACTORS,
          dt: float = 5e-4,
          fault_t_on: float = 0.1) -> list[SweepRow]:
    """One verdict per (power factor, duration), apparent power fixed at
    full load.  Rows are ordered factor-major, matching the listing shape."""
    model = model or SmibModel()
    if not len(list(durations_s)) or not len(list(power_factors)):
        raise ValueError("sweep grids must be non-empty")
    rows = []
    for pf in power_factors:
        op = OperatingPoint.from_power_factor(pf)
        for dur in durations_s:
            res = simulate(model, op, FaultEvent(fault_t_on, float(dur)),
                           dt=dt, stop_on_verdict=True)
            rows.append(SweepRow(pf * model.s_base_mva, float(dur) * 1e3,
                                 res.stability_flag))
    return rows


def sweep_to_dataset(rows: list[SweepRow]):
    """Feature matrix (power MW, duration ms) labelled by the verdict."""
    from .ml import Dataset
    if not rows:
        raise ValueError("no rows")
    features = np.array([[r.power_mw, r.duration_ms] for r in rows])
    labels = np.array([r.stability for r in rows], dtype=int)
    return Dataset(features, labels, feature_names=["Power", "Duration"],
                   label_name="Stability")


# -- CSV output ----------------------------------------------------------------

def write_trace_csv(result: SimulationResult, path) -> None:
    tr = result.trace
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "delta_deg", "speed_dev", "Pe_pu"])
        for t, d, w, pe in zip(tr.times, tr.delta_rad, tr.speed_dev_pu, tr.pe_pu):
            writer.writerow([repr(float(t)), repr(math.degrees(d)),
                             repr(float(w)), repr(float(pe))])


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Power", "Duration", "Stability"])
        for row in rows:
            writer.writerow([repr(float(row.power_mw)),
                             repr(float(row.duration_ms)), row.stability])


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("line 1: empty file, expected header") from None
        if header != ["Power", "Duration", "Stability"]:
            raise ValueError(f"line 1: bad header {header!r}")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != 3:
                raise ValueError(f"line {lineno}: expected 3 fields, got {len(record)}")
            try:
                rows.append(SweepRow(float(record[0]), float(record[1]),
                                     int(record[2])))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
    return rows
