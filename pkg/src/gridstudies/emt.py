"""Fixed-step electromagnetic transient solver.

Lumped elements become trapezoidal companion models (a conductance in
parallel with a history current source), distributed lines become lossless
travelling-wave models with history buffers, and every step solves one nodal
conductance system G v = i.  The conductance matrix is LU-factored once and
refactored only when a switch changes state; closed switches merge their end
nodes exactly instead of stamping a large conductance.

Companion models (step dt):
    resistor   G = 1/R                history 0
    inductor   G = dt/(2L)            h(t+dt) = i(t) + G v(t)
    capacitor  G = 2C/dt              h(t+dt) = -i(t) - G v(t)
with branch current i(t) = G v(t) + h(t).

A travelling-wave line of surge impedance Zc and travel time tau >= dt sees,
at each end, Zc in parallel with a history source assembled from the far-end
voltage and current recorded tau seconds earlier (linear interpolation covers
non-integer tau/dt).

State 0 is the declared initial condition (rest unless initial voltages,
storage currents, or line voltages say otherwise); the solver produces states
1..N at t = dt .. N*dt.  Sources that jump at t = 0 keep second-order accuracy
when the declared initial state is the post-jump one.  Switch close/open
events detected at step n take effect at step n+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

GROUND = 0


@dataclass
class TimeGrid:
    """Uniform simulation grid; states live at t = 0, dt, ..., step_count*dt."""

    dt: float
    t_end: float

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")

    @property
    def step_count(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-12))

    def times(self) -> np.ndarray:
        return np.arange(self.step_count + 1) * self.dt


@dataclass
class CompanionBranch:
    """Trapezoidal companion model of one R, L or C element."""

    kind: str
    value: float
    dt: float
    conductance: float = field(init=False)
    history_current: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"nonpositive element value {self.value} for kind '{self.kind}'")
        if self.kind == "R":
            self.conductance = 1.0 / self.value
        elif self.kind == "L":
            self.conductance = self.dt / (2.0 * self.value)
        elif self.kind == "C":
            self.conductance = 2.0 * self.value / self.dt
        else:
            raise ValueError(f"unknown element kind '{self.kind}'")

    def current(self, v_branch: float) -> float:
        return self.conductance * v_branch + self.history_current

    def advance(self, v_branch: float):
        """Update the history source from the just-solved branch voltage."""
        if self.kind == "L":
            self.history_current += 2.0 * self.conductance * v_branch
        elif self.kind == "C":
            self.history_current = -self.history_current - 2.0 * self.conductance * v_branch


def discretize(kind: str, value: float, dt: float) -> CompanionBranch:
    return CompanionBranch(kind, value, dt)


@dataclass
class DoubleRampSource:
    """Piecewise-linear surge current: 0 -> peak over the front, peak -> peak/2
    over the tail, then the tail slope continues until the current reaches
    zero, where it stays (the waveform never reverses polarity)."""

    peak_amps: float
    front_time_s: float
    half_time_s: float

    def __post_init__(self):
        if not 0 < self.front_time_s < self.half_time_s:
            raise ValueError("need 0 < front time < time to half value")

    def __call__(self, t):
        ip, tf, th = self.peak_amps, self.front_time_s, self.half_time_s
        t = np.asarray(t, dtype=float)
        front = ip * t / tf
        tail = ip * (1.0 - 0.5 * (t - tf) / (th - tf))
        out = np.where(t <= tf, front, tail)
        out = np.where(t <= 0, 0.0, out)
        if ip >= 0:
            out = np.maximum(out, 0.0)
        else:
            out = np.minimum(out, 0.0)
        return float(out) if out.ndim == 0 else out


@dataclass
class FlashoverSwitch:
    """Voltage-controlled closing switch: latches closed when the magnitude of
    the across-voltage reaches the strength (inclusive)."""

    node_a: int
    node_b: int
    strength_volts: float
    closed: bool = False
    close_time: float | None = None
    stress_at_close: float = 0.0

    def __post_init__(self):
        if self.strength_volts <= 0:
            raise ValueError("strength must be positive")


@dataclass
class TimedSwitch:
    node_a: int
    node_b: int
    close_at: float | None = None
    open_at: float | None = None
    initially_closed: bool = False

    def state_at(self, t: float) -> bool:
        closed = self.initially_closed
        if self.close_at is not None and t >= self.close_at:
            closed = True
        if self.open_at is not None and t >= self.open_at:
            closed = False
        return closed


@dataclass
class BergeronLine:
    """v0 is the line's interior pre-history voltage per end; i0 the t=0
    current into the line at each end (nonzero when a source is already
    driving the end at t=0)."""

    node_a: int
    node_b: int
    surge_impedance: float
    travel_time: float
    v0_a: float = 0.0
    v0_b: float = 0.0
    i0_a: float = 0.0
    i0_b: float = 0.0

    def __post_init__(self):
        if self.surge_impedance <= 0 or self.travel_time <= 0:
            raise ValueError("surge impedance and travel time must be positive")


class EmtNetwork:
    """Element container; `assemble(dt)` compiles it into a stepper."""

    def __init__(self):
        self._names: dict[str, int] = {"ground": GROUND, "0": GROUND}
        self._ids: list[str] = ["ground"]
        self.resistors: list[tuple[int, int, float]] = []
        self.storage: list[tuple[int, int, str, float, float]] = []  # a, b, kind, value, i0
        self.lines: list[BergeronLine] = []
        self.current_sources: list[tuple[int, object]] = []
        self.voltage_sources: list[tuple[int, object, float]] = []
        self.flashover_switches: list[FlashoverSwitch] = []
        self.timed_switches: list[TimedSwitch] = []
        self.initial_voltages: dict[int, float] = {}

    def node(self, name: str) -> int:
        if name in self._names:
            return self._names[name]
        idx = len(self._ids)
        self._names[name] = idx
        self._ids.append(name)
        return idx

    def require_node(self, name: str) -> int:
        if name not in self._names:
            raise KeyError(f"unknown node '{name}'")
        return self._names[name]

    def node_name(self, idx: int) -> str:
        return self._ids[idx]

    @property
    def node_count(self) -> int:
        return len(self._ids) - 1

    def add_resistor(self, a: str, b: str, ohms: float) -> int:
        if ohms <= 0:
            raise ValueError(f"nonpositive resistance {ohms}")
        self.resistors.append((self.node(a), self.node(b), ohms))
        return len(self.resistors) - 1

    def add_inductor(self, a: str, b: str, henries: float, i0: float = 0.0) -> int:
        if henries <= 0:
            raise ValueError(f"nonpositive inductance {henries}")
        self.storage.append((self.node(a), self.node(b), "L", henries, i0))
        return len(self.storage) - 1

    def add_capacitor(self, a: str, b: str, farads: float, i0: float = 0.0) -> int:
        if farads <= 0:
            raise ValueError(f"nonpositive capacitance {farads}")
        self.storage.append((self.node(a), self.node(b), "C", farads, i0))
        return len(self.storage) - 1

    def add_line(self, a: str, b: str, surge_impedance: float, travel_time: float,
                 v0_a: float = 0.0, v0_b: float = 0.0,
                 i0_a: float = 0.0, i0_b: float = 0.0) -> BergeronLine:
        line = BergeronLine(self.node(a), self.node(b), surge_impedance, travel_time,
                            v0_a, v0_b, i0_a, i0_b)
        self.lines.append(line)
        return line

    def add_current_source(self, node: str, waveform):
        """`waveform` is amps into the node: a constant or a callable of t."""
        self.current_sources.append((self.node(node), waveform))

    def add_voltage_source(self, node: str, emf, internal_ohms: float):
        """Source to ground behind a resistance; emf is a constant or callable."""
        if internal_ohms <= 0:
            raise ValueError("voltage source needs a positive internal resistance")
        self.voltage_sources.append((self.node(node), emf, internal_ohms))

    def add_flashover_switch(self, a: str, b: str, strength_volts: float) -> FlashoverSwitch:
        sw = FlashoverSwitch(self.node(a), self.node(b), strength_volts)
        self.flashover_switches.append(sw)
        return sw

    def add_timed_switch(self, a: str, b: str, close_at: float | None = None,
                         open_at: float | None = None,
                         initially_closed: bool = False) -> TimedSwitch:
        sw = TimedSwitch(self.node(a), self.node(b), close_at, open_at, initially_closed)
        self.timed_switches.append(sw)
        return sw

    def set_initial_voltage(self, node: str, volts: float):
        """Declare the t=0 voltage (post-jump if a source steps at t=0)."""
        self.initial_voltages[self.node(node)] = volts

    def assemble(self, dt: float) -> "EmtSimulation":
        return EmtSimulation(self, dt)


@dataclass
class SimResult:
    times: np.ndarray
    node_traces: dict
    branch_traces: dict
    flashovers: list  # (switch index, close time, stress at close)


class EmtSimulation:
    """Compiled stepper for one network at a fixed dt."""

    def __init__(self, net: EmtNetwork, dt: float):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.net = net
        self.dt = dt
        self.n = 0  # index of the current (already known) state

        for line in net.lines:
            if line.travel_time < dt * (1 - 1e-12):
                raise ValueError(
                    f"line travel time {line.travel_time} is below the step {dt}")

        n_all = len(net._ids)
        v_init = np.zeros(n_all)
        for line in net.lines:
            v_init[line.node_a] = line.v0_a
            v_init[line.node_b] = line.v0_b
        for node, volts in net.initial_voltages.items():
            v_init[node] = volts
        self._v_init = v_init

        self._lc_a = np.array([e[0] for e in net.storage], dtype=np.intp)
        self._lc_b = np.array([e[1] for e in net.storage], dtype=np.intp)
        self._lc_g = np.array(
            [discretize(kind, val, dt).conductance
             for (_a, _b, kind, val, _i0) in net.storage])
        self._lc_sign = np.array(
            [1.0 if kind == "L" else -1.0 for (_a, _b, kind, _v, _i0) in net.storage])
        i0 = np.array([e[4] for e in net.storage])
        if len(i0):
            # histories for the first solve, from the declared t=0 state
            vb0 = v_init[self._lc_a] - v_init[self._lc_b]
            self._lc_h = self._lc_sign * (i0 + self._lc_g * vb0)
        else:
            self._lc_h = np.zeros(0)

        nl = len(net.lines)
        self._ln_ends = np.empty(2 * nl, dtype=np.intp)
        self._ln_zc = np.empty(2 * nl)
        self._ln_delay = np.empty(2 * nl)     # travel time in steps (>= 1)
        self._ln_v0 = np.empty(2 * nl)
        self._ln_i0 = np.empty(2 * nl)
        for k, line in enumerate(net.lines):
            self._ln_ends[2 * k] = line.node_a
            self._ln_ends[2 * k + 1] = line.node_b
            self._ln_zc[2 * k] = self._ln_zc[2 * k + 1] = line.surge_impedance
            self._ln_delay[2 * k] = self._ln_delay[2 * k + 1] = line.travel_time / dt
            self._ln_v0[2 * k] = line.v0_a
            self._ln_v0[2 * k + 1] = line.v0_b
            self._ln_i0[2 * k] = line.i0_a
            self._ln_i0[2 * k + 1] = line.i0_b
        self._ln_far = np.arange(2 * nl, dtype=np.intp) ^ 1  # other end of same line
        self._ln_rows = np.arange(2 * nl, dtype=np.intp)
        self._ln_depth = (np.ceil(self._ln_delay).astype(np.intp) + 2
                          if nl else np.zeros(0, dtype=np.intp))
        depth_max = int(self._ln_depth.max()) if nl else 1
        # column 0 holds the t=0 end samples; m < 0 reads fall back to v0/0
        end_v0 = v_init[self._ln_ends] if nl else np.zeros(0)
        self._buf_v = np.tile(end_v0[:, None], (1, depth_max))
        self._buf_i = np.tile(self._ln_i0[:, None], (1, depth_max))
        self._ln_h = np.zeros(2 * nl)
        if nl:
            self._update_line_histories()

        self._fo_a = np.array([sw.node_a for sw in net.flashover_switches], dtype=np.intp)
        self._fo_b = np.array([sw.node_b for sw in net.flashover_switches], dtype=np.intp)
        self._fo_strength = np.array([sw.strength_volts for sw in net.flashover_switches])
        self.flashover_events: list[tuple[int, float, float]] = []

        self._const_inj: list[tuple[int, float]] = []
        self._varying_inj: list[tuple[int, object]] = []
        for node, wave in net.current_sources:
            if callable(wave):
                self._varying_inj.append((node, wave))
            else:
                self._const_inj.append((node, float(wave)))
        for node, emf, r in net.voltage_sources:
            if callable(emf):
                self._varying_inj.append((node, lambda t, emf=emf, r=r: emf(t) / r))
            else:
                self._const_inj.append((node, float(emf) / r))

        self._rebuild()

    # -- assembly -------------------------------------------------------------

    def _closed_pairs(self) -> list[tuple[int, int]]:
        t_next = (self.n + 1) * self.dt
        pairs = [(sw.node_a, sw.node_b) for sw in self.net.flashover_switches if sw.closed]
        pairs += [(sw.node_a, sw.node_b) for sw in self.net.timed_switches
                  if sw.state_at(t_next)]
        return pairs

    def _rebuild(self):
        """Merge nodes joined by closed switches, stamp G, refactor."""
        net = self.net
        n_all = len(net._ids)
        parent = list(range(n_all))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in self._closed_pairs():
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        reps = [find(i) for i in range(n_all)]

        ground_rep = reps[GROUND]
        rows: dict[int, int] = {}
        for idx in range(n_all):
            r = reps[idx]
            if r != ground_rep and r not in rows:
                rows[r] = len(rows)
        self._n_red = len(rows)
        # ext index: 0 = ground slot, 1.. = reduced unknowns
        self._ext = np.zeros(n_all, dtype=np.intp)
        for idx in range(n_all):
            r = reps[idx]
            self._ext[idx] = 0 if r == ground_rep else rows[r] + 1

        g = np.zeros((self._n_red, self._n_red))

        def stamp(a, b, cond):
            ia, ib = self._ext[a] - 1, self._ext[b] - 1
            if ia == ib:
                return
            if ia >= 0:
                g[ia, ia] += cond
            if ib >= 0:
                g[ib, ib] += cond
            if ia >= 0 and ib >= 0:
                g[ia, ib] -= cond
                g[ib, ia] -= cond

        for a, b, ohms in net.resistors:
            stamp(a, b, 1.0 / ohms)
        for a, b, cond in zip(self._lc_a, self._lc_b, self._lc_g):
            stamp(a, b, cond)
        for e in range(len(self._ln_ends)):
            ia = self._ext[self._ln_ends[e]] - 1
            if ia >= 0:
                g[ia, ia] += 1.0 / self._ln_zc[e]
        for node, _emf, r in net.voltage_sources:
            ia = self._ext[node] - 1
            if ia >= 0:
                g[ia, ia] += 1.0 / r

        for r_rep, row in rows.items():
            if g[row, row] == 0.0:
                raise ValueError(
                    f"node '{net.node_name(r_rep)}' has no conductance to anything")
        self._lu = scipy.linalg.lu_factor(g) if self._n_red else None

        self._lc_ea = self._ext[self._lc_a] if len(self._lc_a) else self._lc_a
        self._lc_eb = self._ext[self._lc_b] if len(self._lc_b) else self._lc_b
        self._ln_e = self._ext[self._ln_ends] if len(self._ln_ends) else self._ln_ends
        self._fo_ea = self._ext[self._fo_a] if len(self._fo_a) else self._fo_a
        self._fo_eb = self._ext[self._fo_b] if len(self._fo_b) else self._fo_b
        self._fo_closed = np.array(
            [sw.closed for sw in net.flashover_switches], dtype=bool)

        base = np.zeros(self._n_red)
        for node, amps in self._const_inj:
            ia = self._ext[node] - 1
            if ia >= 0:
                base[ia] += amps
        self._base_inj = base
        self._hist_idx = np.concatenate([self._lc_ea, self._lc_eb, self._ln_e])
        self._v_ext = np.zeros(self._n_red + 1)

    # -- stepping -------------------------------------------------------------

    def solve_step(self) -> np.ndarray:
        """Advance one step; returns voltages indexed by original node id."""
        n = self.n + 1
        t = n * self.dt

        rhs = self._base_inj.copy()
        for node, fn in self._varying_inj:
            ia = self._ext[node] - 1
            if ia >= 0:
                rhs[ia] += fn(t)
        # history sources: branch model injects -h at 'from', +h at 'to';
        # each line end injects -h at its node
        vals = np.concatenate([-self._lc_h, self._lc_h, -self._ln_h])
        contrib = np.bincount(self._hist_idx, weights=vals, minlength=self._n_red + 1)
        rhs += contrib[1:]

        v_red = scipy.linalg.lu_solve(self._lu, rhs) if self._n_red else rhs
        v_ext = self._v_ext
        v_ext[1:] = v_red
        self.n = n

        if len(self._lc_h):
            vb = v_ext[self._lc_ea] - v_ext[self._lc_eb]
            self._lc_h = self._lc_sign * (self._lc_h + 2.0 * self._lc_g * vb)

        if len(self._ln_h):
            ve = v_ext[self._ln_e]
            ie = ve / self._ln_zc + self._ln_h
            col = n % self._ln_depth
            self._buf_v[self._ln_rows, col] = ve
            self._buf_i[self._ln_rows, col] = ie
            self._update_line_histories()

        out = v_ext[self._ext]  # copy under the pre-transition node mapping

        changed = False
        if len(self._fo_strength):
            stress = np.abs(v_ext[self._fo_ea] - v_ext[self._fo_eb])
            hits = (stress >= self._fo_strength) & ~self._fo_closed
            if hits.any():
                for k in np.nonzero(hits)[0]:
                    sw = self.net.flashover_switches[k]
                    sw.closed = True
                    sw.close_time = t
                    sw.stress_at_close = float(stress[k])
                    self.flashover_events.append((int(k), t, float(stress[k])))
                changed = True
        if self.net.timed_switches:
            t_next = (n + 1) * self.dt
            for sw in self.net.timed_switches:
                if sw.state_at(t_next) != sw.state_at(t):
                    changed = True
        if changed:
            self._rebuild()

        return out

    def _update_line_histories(self):
        """History sources for the next solve: far-end state one delay back,
        linearly interpolated between buffered samples."""
        q = (self.n + 1) - self._ln_delay
        m0 = np.floor(q).astype(np.intp)
        frac = q - m0
        vf0, if0 = self._read_far(m0)
        vf1, if1 = self._read_far(m0 + 1)
        vf = (1.0 - frac) * vf0 + frac * vf1
        iw = (1.0 - frac) * if0 + frac * if1
        self._ln_h = -vf / self._ln_zc - iw

    def _read_far(self, m):
        """Far-end (v, i) samples at step m; before 0 means the initial state."""
        far = self._ln_far
        init = m < 0
        mm = np.where(init, 0, m)
        col = mm % self._ln_depth[far]
        v = self._buf_v[far, col]
        i = self._buf_i[far, col]
        v = np.where(init, self._ln_v0[far], v)
        i = np.where(init, 0.0, i)
        return v, i

    def line_stored_energy(self, line_index: int) -> float:
        """Field energy on a line, rebuilt from its travelling-wave buffers.

        Each end's entering wave f = (v + Zc i)/2 over the last travel time is
        still inside the line and carries f^2 dt / Zc per recorded step.
        """
        total = 0.0
        for e in (2 * line_index, 2 * line_index + 1):
            d = self._ln_delay[e]
            zc = self._ln_zc[e]
            full = int(math.floor(d))
            frac = d - full
            last = full + (1 if frac > 1e-12 else 0)
            for back in range(last):
                m = self.n - back
                weight = 1.0 if back < full else frac
                if m < 0:
                    v, i = self._ln_v0[e], 0.0
                else:
                    col = m % self._ln_depth[e]
                    v, i = self._buf_v[e, col], self._buf_i[e, col]
                wave = 0.5 * (v + zc * i)
                total += weight * wave * wave * self.dt / zc
        return total

    def run(self, t_end: float, record: tuple = (), record_storage: tuple = (),
            stop_on_first_flashover: bool = False) -> SimResult:
        """Step from the initial state to t_end, recording named node voltages
        and the currents of selected L/C branches (by storage index)."""
        if self.n != 0:
            raise RuntimeError("run() must start from the initial state")
        grid = TimeGrid(self.dt, t_end)
        steps = grid.step_count
        rec_nodes = [self.net.require_node(name) for name in record]
        node_traces = {name: np.zeros(steps + 1) for name in record}
        branch_traces = {k: np.zeros(steps + 1) for k in record_storage}
        for name, node in zip(record, rec_nodes):
            node_traces[name][0] = self._v_init[node]
        for k in record_storage:
            branch_traces[k][0] = self.net.storage[k][4]
        times = grid.times()
        last = steps
        while self.n < steps:
            h_before = self._lc_h.copy() if record_storage else None
            v = self.solve_step()
            for name, node in zip(record, rec_nodes):
                node_traces[name][self.n] = v[node]
            for k in record_storage:
                a, b, _kind, _val, _i0 = self.net.storage[k]
                branch_traces[k][self.n] = self._lc_g[k] * (v[a] - v[b]) + h_before[k]
            if stop_on_first_flashover and self.flashover_events:
                last = self.n
                break
        if last < steps:
            times = times[: last + 1]
            node_traces = {k: tr[: last + 1] for k, tr in node_traces.items()}
            branch_traces = {k: tr[: last + 1] for k, tr in branch_traces.items()}
        return SimResult(times, node_traces, branch_traces, list(self.flashover_events))
