"""Steady-state phasor solver for small three-phase networks.

Networks are built from named nodes (node 0 is ground), series branches with
optional shunt admittance at each end, three-phase coupled branches, Thevenin
sources and ideal current injections.  All quantities are RMS phasors held as
Python complex numbers.

The solver assembles a complex nodal admittance matrix and solves it with a
dense LU factorization.  Zero-impedance branches (bolted connections) are not
stamped as admittances; their end nodes are merged before assembly so bolted
faults produce exact node voltages instead of ill-conditioned near-shorts.
"""

from __future__ import annotations

import cmath
import copy
import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

GROUND = 0

PHASES = ("A", "B", "C")

# fault_type -> (faulted phase indices, grounded)
FAULT_CONNECTIONS = {
    1: ((0, 1, 2), True),   # ABC to ground
    2: ((0, 1, 2), False),  # ABC isolated
    3: ((0, 1), True),      # AB to ground
    4: ((1, 2), True),      # BC to ground
    5: ((0, 2), True),      # AC to ground
    6: ((0, 1), False),     # AB
    7: ((1, 2), False),     # BC
    8: ((0, 2), False),     # AC
    9: ((0,), True),        # A to ground
    10: ((1,), True),       # B to ground
    11: ((2,), True),       # C to ground
}


class SingularNetworkError(ValueError):
    """Nodal matrix cannot be solved; `node` names the offending node if known."""

    def __init__(self, message: str, node: str | None = None):
        super().__init__(message)
        self.node = node


@dataclass
class Branch:
    from_node: int
    to_node: int
    series_impedance: complex
    shunt_admittance_per_end: complex = 0j

    @property
    def is_short(self) -> bool:
        return self.series_impedance == 0


@dataclass
class CoupledBranch:
    """Three-phase series element with a full 3x3 impedance matrix."""

    from_nodes: tuple[int, int, int]
    to_nodes: tuple[int, int, int]
    series_impedance: np.ndarray          # 3x3 complex, symmetric
    shunt_admittance_per_end: np.ndarray  # 3x3 complex, symmetric


@dataclass
class Source:
    """Ideal emf behind a nonzero internal impedance (Thevenin form)."""

    node: int
    emf: complex
    internal_impedance: complex


@dataclass
class FaultSpec:
    """Shunt fault at a point along a line section.

    fault_type uses the 11-entry code: 1 ABCG, 2 ABC, 3 ABG, 4 BCG, 5 ACG,
    6 AB, 7 BC, 8 AC, 9 AG, 10 BG, 11 CG.
    """

    fault_type: int
    distance_km: float
    phase_resistances: tuple[float, float, float] = (0.0, 0.0, 0.0)
    ground_resistance: float = 0.0

    def __post_init__(self):
        if self.fault_type not in FAULT_CONNECTIONS:
            raise ValueError(f"unknown fault code {self.fault_type}; valid codes are 1..11")
        if any(r < 0 for r in self.phase_resistances) or self.ground_resistance < 0:
            raise ValueError("fault resistances must be >= 0")


@dataclass
class LineSectionModel:
    """Per-km line parameters given as positive/zero-sequence values.

    mutual_skew redistributes the phase-to-phase mutual impedance the way a
    flat, untransposed conductor arrangement does: the two adjacent pairs get
    zm*(1+skew) and the outer pair gets zm*(1-2*skew), which keeps the mutual
    average (and hence the sequence averages) unchanged.  skew=0 reproduces a
    perfectly transposed line.
    """

    z1_ohm_per_km: complex
    z0_ohm_per_km: complex
    y1_siemens_per_km: complex = 0j
    y0_siemens_per_km: complex = 0j
    length_km: float = 1.0
    mutual_skew: float = 0.0

    def series_matrix(self, length_km: float | None = None) -> np.ndarray:
        length = self.length_km if length_km is None else length_km
        zs = (self.z0_ohm_per_km + 2 * self.z1_ohm_per_km) / 3.0
        zm = (self.z0_ohm_per_km - self.z1_ohm_per_km) / 3.0
        m_adj = zm * (1.0 + self.mutual_skew)
        m_out = zm * (1.0 - 2.0 * self.mutual_skew)
        z = np.array(
            [[zs, m_adj, m_out],
             [m_adj, zs, m_adj],
             [m_out, m_adj, zs]],
            dtype=complex,
        )
        return z * length

    def shunt_matrix_per_end(self, length_km: float | None = None) -> np.ndarray:
        length = self.length_km if length_km is None else length_km
        ys = (self.y0_siemens_per_km + 2 * self.y1_siemens_per_km) / 3.0
        ym = (self.y0_siemens_per_km - self.y1_siemens_per_km) / 3.0
        y = np.array(
            [[ys, ym, ym],
             [ym, ys, ym],
             [ym, ym, ys]],
            dtype=complex,
        )
        return y * (length / 2.0)


class PhasorNetwork:
    """Mutable container for nodes, branches, sources and injections."""

    def __init__(self):
        self._names: dict[str, int] = {"ground": GROUND, "0": GROUND}
        self._ids: list[str] = ["ground"]
        self.branches: list[Branch] = []
        self.coupled: list[CoupledBranch] = []
        self.sources: list[Source] = []
        self.injections: list[tuple[int, complex]] = []

    # -- node bookkeeping ---------------------------------------------------

    def node(self, name: str) -> int:
        """Return the id for `name`, creating the node on first use."""
        if name in self._names:
            return self._names[name]
        idx = len(self._ids)
        self._names[name] = idx
        self._ids.append(name)
        return idx

    def node_name(self, idx: int) -> str:
        return self._ids[idx]

    def has_node(self, name: str) -> bool:
        return name in self._names

    @property
    def node_count(self) -> int:
        """Number of non-ground nodes."""
        return len(self._ids) - 1

    def phase_nodes(self, group: str) -> tuple[int, int, int]:
        return tuple(self.node(f"{group}.{p}") for p in PHASES)

    # -- construction -------------------------------------------------------

    def add_branch(self, from_node: str, to_node: str, series_impedance: complex,
                   shunt_admittance_per_end: complex = 0j) -> Branch:
        br = Branch(self.node(from_node), self.node(to_node),
                    complex(series_impedance), complex(shunt_admittance_per_end))
        self.branches.append(br)
        return br

    def add_coupled_branch(self, from_group: str, to_group: str, series_matrix: np.ndarray,
                           shunt_matrix_per_end: np.ndarray | None = None) -> CoupledBranch:
        z = np.asarray(series_matrix, dtype=complex)
        if z.shape != (3, 3):
            raise ValueError("coupled branch needs a 3x3 impedance matrix")
        y = (np.zeros((3, 3), dtype=complex) if shunt_matrix_per_end is None
             else np.asarray(shunt_matrix_per_end, dtype=complex))
        br = CoupledBranch(self.phase_nodes(from_group), self.phase_nodes(to_group), z, y)
        self.coupled.append(br)
        return br

    def add_source(self, node: str, emf: complex, internal_impedance: complex) -> Source:
        if internal_impedance == 0:
            raise ValueError("source internal impedance must be nonzero "
                             "(ideal sources are not representable in the nodal form)")
        src = Source(self.node(node), complex(emf), complex(internal_impedance))
        self.sources.append(src)
        return src

    def add_three_phase_source(self, group: str, volts_line_to_neutral: float,
                               internal_impedance: complex, angle_deg: float = 0.0):
        """Balanced positive-sequence source on nodes group.A/B/C."""
        for k, phase in enumerate(PHASES):
            ang = math.radians(angle_deg - 120.0 * k)
            emf = volts_line_to_neutral * complex(math.cos(ang), math.sin(ang))
            self.add_source(f"{group}.{phase}", emf, internal_impedance)

    def add_injection(self, node: str, amps: complex):
        self.injections.append((self.node(node), complex(amps)))

    def copy(self) -> "PhasorNetwork":
        return copy.deepcopy(self)

    # -- internals ----------------------------------------------------------

    def _short_representatives(self) -> list[int]:
        """Union-find representative per node id after merging bolted branches."""
        parent = list(range(len(self._ids)))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for br in self.branches:
            if br.is_short:
                ra, rb = find(br.from_node), find(br.to_node)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        return [find(i) for i in range(len(self._ids))]


def assemble_admittance(net: PhasorNetwork) -> np.ndarray:
    """Nodal admittance matrix over the non-ground nodes (1..node_count).

    Zero-impedance branches cannot be stamped as admittances; solve the
    network instead (the solver merges their end nodes).
    """
    if net.node_count == 0:
        raise SingularNetworkError("network has no nodes besides ground")
    if any(br.is_short for br in net.branches):
        raise ValueError("zero-impedance branch present; use solve_steady_state, "
                         "which merges bolted connections")
    n = net.node_count
    y = np.zeros((n, n), dtype=complex)
    _stamp_passives(net, y, index=lambda node: node - 1)
    for i in range(n):
        if y[i, i] == 0:
            raise SingularNetworkError(
                f"node '{net.node_name(i + 1)}' is isolated (zero diagonal)",
                node=net.node_name(i + 1))
    return y


def _stamp_passives(net: PhasorNetwork, y: np.ndarray, index):
    """Stamp finite branches and coupled branches into `y`.

    `index` maps node id -> matrix row, returning a negative value for rows
    that must be dropped (ground and ground-merged nodes).
    """

    def stamp(a: int, b: int, g: complex):
        ia, ib = index(a), index(b)
        if ia == ib:
            return
        if ia >= 0:
            y[ia, ia] += g
        if ib >= 0:
            y[ib, ib] += g
        if ia >= 0 and ib >= 0:
            y[ia, ib] -= g
            y[ib, ia] -= g

    def stamp_shunt(a: int, g: complex):
        ia = index(a)
        if ia >= 0:
            y[ia, ia] += g

    for br in net.branches:
        if br.is_short:
            continue
        stamp(br.from_node, br.to_node, 1.0 / br.series_impedance)
        if br.shunt_admittance_per_end != 0:
            stamp_shunt(br.from_node, br.shunt_admittance_per_end)
            stamp_shunt(br.to_node, br.shunt_admittance_per_end)

    for cb in net.coupled:
        yblk = np.linalg.inv(cb.series_impedance)
        for r in range(3):
            for c in range(3):
                g = yblk[r, c]
                fr, fc = cb.from_nodes[r], cb.from_nodes[c]
                tr, tc = cb.to_nodes[r], cb.to_nodes[c]
                ir, ic = index(fr), index(fc)
                jr, jc = index(tr), index(tc)
                if ir >= 0 and ic >= 0:
                    y[ir, ic] += g
                if jr >= 0 and jc >= 0:
                    y[jr, jc] += g
                if ir >= 0 and jc >= 0:
                    y[ir, jc] -= g
                if jr >= 0 and ic >= 0:
                    y[jr, ic] -= g
                ys = cb.shunt_admittance_per_end[r, c]
                if ys != 0:
                    if ir >= 0 and ic >= 0:
                        y[ir, ic] += ys
                    if jr >= 0 and jc >= 0:
                        y[jr, jc] += ys


@dataclass
class PhasorSolution:
    network: PhasorNetwork
    node_voltages: np.ndarray            # complex, indexed by node id; ground = 0
    branch_currents: list                # complex per Branch (from -> to series current)
    coupled_currents: list               # ndarray(3) per CoupledBranch
    source_currents: list                # complex per Source, current into the network

    def voltage(self, name: str) -> complex:
        return self.node_voltages[self.network._names[name]]

    def rms(self, name: str) -> float:
        return abs(self.voltage(name))

    def angle_deg(self, name: str) -> float:
        return math.degrees(cmath.phase(self.voltage(name)))

    def power_balance(self) -> tuple[complex, complex]:
        """(complex power delivered by ideal emfs, complex power absorbed)."""
        v = self.node_voltages
        delivered = 0j
        absorbed = 0j
        net = self.network
        for src, i in zip(net.sources, self.source_currents):
            delivered += src.emf * np.conj(i)
            absorbed += src.internal_impedance * abs(i) ** 2
        for (node, amps) in net.injections:
            delivered += v[node] * np.conj(amps)
        for br, i in zip(net.branches, self.branch_currents):
            if not br.is_short:
                absorbed += br.series_impedance * abs(i) ** 2
            for end in (br.from_node, br.to_node):
                if br.shunt_admittance_per_end != 0:
                    absorbed += abs(v[end]) ** 2 * np.conj(br.shunt_admittance_per_end)
        for cb, ivec in zip(net.coupled, self.coupled_currents):
            vdrop = v[list(cb.from_nodes)] - v[list(cb.to_nodes)]
            absorbed += vdrop @ np.conj(ivec)
            for ends in (cb.from_nodes, cb.to_nodes):
                ve = v[list(ends)]
                absorbed += ve @ np.conj(cb.shunt_admittance_per_end @ ve)
        return delivered, absorbed


def solve_steady_state(net: PhasorNetwork) -> PhasorSolution:
    """Solve nodal equations; KCL residual is checked to 1e-9 (relative)."""
    if not net.sources and not net.injections:
        raise SingularNetworkError("network has no sources")

    reps = net._short_representatives()
    ground_rep = reps[GROUND]
    rep_rows: dict[int, int] = {}
    for idx in range(len(reps)):
        r = reps[idx]
        if r != ground_rep and r not in rep_rows:
            rep_rows[r] = len(rep_rows)
    n = len(rep_rows)
    if n == 0:
        raise SingularNetworkError("all nodes are bolted to ground")

    def index(node: int) -> int:
        r = reps[node]
        return -1 if r == ground_rep else rep_rows[r]

    y = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    _stamp_passives(net, y, index)

    for src in net.sources:
        i = index(src.node)
        g = 1.0 / src.internal_impedance
        if i >= 0:
            y[i, i] += g
            rhs[i] += src.emf * g
    for (node, amps) in net.injections:
        i = index(node)
        if i >= 0:
            rhs[i] += amps

    for r, row in rep_rows.items():
        if y[row, row] == 0:
            raise SingularNetworkError(
                f"node '{net.node_name(r)}' is isolated (zero diagonal)",
                node=net.node_name(r))

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # zero-pivot warning; detected below
            lu, piv = scipy.linalg.lu_factor(y)
    except scipy.linalg.LinAlgError as exc:
        raise SingularNetworkError(f"singular nodal matrix: {exc}") from exc
    v_red = scipy.linalg.lu_solve((lu, piv), rhs)
    if not np.all(np.isfinite(v_red)):
        raise SingularNetworkError("singular nodal matrix (solution is not finite)")

    scale = max(np.max(np.abs(rhs)) if n else 0.0, 1e-30)
    residual = np.max(np.abs(y @ v_red - rhs)) / scale
    if not residual <= 1e-9:
        raise SingularNetworkError(
            f"KCL residual {residual:.3e} exceeds 1e-9; matrix is numerically singular")

    voltages = np.zeros(len(reps), dtype=complex)
    for idx in range(len(reps)):
        i = index(idx)
        voltages[idx] = v_red[i] if i >= 0 else 0j

    branch_currents = [
        0j if br.is_short
        else (voltages[br.from_node] - voltages[br.to_node]) / br.series_impedance
        for br in net.branches
    ]
    coupled_currents = []
    for cb in net.coupled:
        vdrop = voltages[list(cb.from_nodes)] - voltages[list(cb.to_nodes)]
        coupled_currents.append(np.linalg.solve(cb.series_impedance, vdrop))
    source_currents = [
        (src.emf - voltages[src.node]) / src.internal_impedance for src in net.sources
    ]

    sol = PhasorSolution(net, voltages, branch_currents, coupled_currents, source_currents)
    _complete_short_currents(net, sol, reps)
    return sol


def _complete_short_currents(net: PhasorNetwork, sol: PhasorSolution, reps: list[int]):
    """Recover currents through bolted branches from KCL at the merged nodes.

    Flows are the minimum-norm solution of the component incidence system,
    which is exact whenever the bolted subgraph is a tree (the fault layouts
    built here are stars).
    """
    shorts = [(k, br) for k, br in enumerate(net.branches) if br.is_short]
    if not shorts:
        return
    v = sol.node_voltages

    imbalance = np.zeros(len(reps), dtype=complex)  # net current leaving each node
    for br, i in zip(net.branches, sol.branch_currents):
        if br.is_short:
            continue
        imbalance[br.from_node] += i
        imbalance[br.to_node] -= i
        if br.shunt_admittance_per_end != 0:
            for end in (br.from_node, br.to_node):
                imbalance[end] += v[end] * br.shunt_admittance_per_end
    for cb, ivec in zip(net.coupled, sol.coupled_currents):
        for k in range(3):
            imbalance[cb.from_nodes[k]] += ivec[k]
            imbalance[cb.to_nodes[k]] -= ivec[k]
            ys_from = cb.shunt_admittance_per_end[k] @ v[list(cb.from_nodes)]
            ys_to = cb.shunt_admittance_per_end[k] @ v[list(cb.to_nodes)]
            imbalance[cb.from_nodes[k]] += ys_from
            imbalance[cb.to_nodes[k]] += ys_to
    for src, i in zip(net.sources, sol.source_currents):
        imbalance[src.node] -= i
    for (node, amps) in net.injections:
        imbalance[node] -= amps

    by_rep: dict[int, list[tuple[int, Branch]]] = {}
    for k, br in shorts:
        by_rep.setdefault(reps[br.from_node], []).append((k, br))

    ground_rep = reps[GROUND]
    for rep, members in by_rep.items():
        nodes = sorted({br.from_node for _, br in members} | {br.to_node for _, br in members})
        if rep == ground_rep and GROUND not in nodes:
            nodes.insert(0, GROUND)
        row = {nd: i for i, nd in enumerate(nodes)}
        a = np.zeros((len(nodes), len(members)), dtype=complex)
        b = np.zeros(len(nodes), dtype=complex)
        for col, (_, br) in enumerate(members):
            a[row[br.from_node], col] = 1.0
            a[row[br.to_node], col] = -1.0
        for nd in nodes:
            # ground supplies/absorbs whatever the merged group needs
            b[row[nd]] = 0j if nd == GROUND else -imbalance[nd]
        flows, *_ = np.linalg.lstsq(a, b, rcond=None)
        for col, (k, _) in enumerate(members):
            sol.branch_currents[k] = flows[col]


# -- faults -------------------------------------------------------------------


def apply_fault(net: PhasorNetwork, fault: FaultSpec, line: LineSectionModel,
                from_group: str = "bus", to_group: str = "load",
                fault_group: str = "fault") -> PhasorNetwork:
    """Return a copy of `net` with the line split at the fault point.

    `net` must already contain the sending nodes (from_group.A/B/C); the two
    line sections and the fault branches for the requested fault code are
    added to the copy.  The original network is untouched.
    """
    if not (0.0 < fault.distance_km < line.length_km):
        raise ValueError(
            f"fault distance {fault.distance_km} km must split the {line.length_km} km "
            "line into two sections of positive length")

    out = net.copy()
    d = fault.distance_km
    rest = line.length_km - d
    out.add_coupled_branch(from_group, fault_group,
                           line.series_matrix(d), line.shunt_matrix_per_end(d))
    out.add_coupled_branch(fault_group, to_group,
                           line.series_matrix(rest), line.shunt_matrix_per_end(rest))

    phases, grounded = FAULT_CONNECTIONS[fault.fault_type]
    fault_nodes = [f"{fault_group}.{PHASES[k]}" for k in phases]
    if len(phases) == 2 and not grounded:
        # isolated phase-to-phase fault: one branch carrying both resistances
        r = fault.phase_resistances[phases[0]] + fault.phase_resistances[phases[1]]
        out.add_branch(fault_nodes[0], fault_nodes[1], complex(r))
        return out

    common = f"{fault_group}.common"
    for k, name in zip(phases, fault_nodes):
        out.add_branch(name, common, complex(fault.phase_resistances[k]))
    if grounded:
        out.add_branch(common, "ground", complex(fault.ground_resistance))
    return out


# -- reporting ----------------------------------------------------------------


def rms_report(sol: PhasorSolution, nodes: list[str] | None = None) -> list[tuple[str, str, float, float]]:
    """Rows of (node, phase, rms_volts, angle_deg); RMS is the phasor magnitude."""
    net = sol.network
    if nodes is None:
        nodes = [name for name in net._ids[1:]]
    rows = []
    for name in nodes:
        if not net.has_node(name):
            raise KeyError(f"unknown node '{name}'")
        base, dot, suffix = name.rpartition(".")
        phase = suffix if dot and suffix in PHASES else ""
        label = base if phase else name
        rows.append((label, phase, sol.rms(name), sol.angle_deg(name)))
    return rows


def write_rms_csv(sol: PhasorSolution, path, nodes: list[str] | None = None):
    rows = rms_report(sol, nodes)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "phase", "rms_volts", "angle_deg"])
        for label, phase, rms, ang in rows:
            writer.writerow([label, phase, repr(float(rms)), repr(float(ang))])


# -- text form ----------------------------------------------------------------


def parse_network(text: str) -> tuple[PhasorNetwork, list[FaultSpec]]:
    """Build a network from its line-oriented text form.

    Directives (one per line, '#' starts a comment):
        node NAME
        branch FROM TO SERIES_Z [SHUNT_Y_PER_END]
        source NODE EMF_VOLTS [ANGLE_DEG] [INTERNAL_Z]
        inject NODE AMPS
        fault TYPE DISTANCE_KM RA RB RC RGROUND
    Complex values use Python syntax without spaces, e.g. 1+10j.
    """
    net = PhasorNetwork()
    faults: list[FaultSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0].lower(), parts[1:]
        try:
            if kind == "node" and len(args) == 1:
                net.node(args[0])
            elif kind == "branch" and len(args) in (3, 4):
                shunt = complex(args[3]) if len(args) == 4 else 0j
                net.add_branch(args[0], args[1], complex(args[2]), shunt)
            elif kind == "source" and len(args) in (2, 3, 4):
                mag = float(args[1])
                ang = math.radians(float(args[2])) if len(args) >= 3 else 0.0
                zint = complex(args[3]) if len(args) == 4 else 1 + 10j
                net.add_source(args[0], mag * complex(math.cos(ang), math.sin(ang)), zint)
            elif kind == "inject" and len(args) == 2:
                net.add_injection(args[0], complex(args[1]))
            elif kind == "fault" and len(args) == 6:
                faults.append(FaultSpec(int(args[0]), float(args[1]),
                                        (float(args[2]), float(args[3]), float(args[4])),
                                        float(args[5])))
            else:
                raise ValueError(f"unrecognized directive '{line}'")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return net, faults
