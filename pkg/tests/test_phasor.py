"""Phasor solver tests.

Proves:
  Group 1 - assembly
    admittance matrix matches the hand-stamped single-branch case,
    symmetry to 1e-12 on random networks, isolated node named in the error
  Group 2 - solving against independent oracles
    voltage divider, two-mesh ladder vs a loop-current oracle,
    superposition and reciprocity to 1e-9, complex power balance to 1e-8
  Group 3 - faults
    bolted faults merge nodes exactly, every fault code stamps the right
    branch set, code 12 rejected, fault application leaves the input intact
  Group 4 - reporting and text form
    RMS is the phasor magnitude (400 kV source -> 230940.1 V per phase),
    CSV export columns, parse errors carry the line number
"""

import math

import numpy as np
import pytest

from gridstudies.phasor import (
    FAULT_CONNECTIONS,
    FaultSpec,
    LineSectionModel,
    PhasorNetwork,
    SingularNetworkError,
    apply_fault,
    assemble_admittance,
    parse_network,
    rms_report,
    solve_steady_state,
    write_rms_csv,
)


def ladder_network(z0, z1, z2, z3, z4, emf=1.0 + 0j):
    """Source behind z0 at n1; n1-z1-n2; n2-z2-gnd; n2-z3-n3; n3-z4-gnd."""
    net = PhasorNetwork()
    net.add_source("n1", emf, z0)
    net.add_branch("n1", "n2", z1)
    net.add_branch("n2", "ground", z2)
    net.add_branch("n2", "n3", z3)
    net.add_branch("n3", "ground", z4)
    return net


def ladder_oracle(z0, z1, z2, z3, z4, emf=1.0 + 0j):
    """Loop-current solution of the same ladder, written independently."""
    a = np.array([[z0 + z1 + z2, -z2], [-z2, z2 + z3 + z4]], dtype=complex)
    b = np.array([emf, 0j])
    i1, i2 = np.linalg.solve(a, b)
    v1 = emf - z0 * i1
    v2 = z2 * (i1 - i2)
    v3 = z4 * i2
    return v1, v2, v3


# -- Group 1: assembly ---------------------------------------------------------


def test_single_branch_admittance():
    net = PhasorNetwork()
    net.add_branch("a", "b", 1.0 + 0j)
    y = assemble_admittance(net)
    assert np.allclose(y, np.array([[1, -1], [-1, 1]], dtype=complex))


def test_admittance_symmetry_random_networks():
    rng = np.random.default_rng(7)
    for _ in range(20):
        net = PhasorNetwork()
        n_nodes = int(rng.integers(3, 8))
        names = [f"n{k}" for k in range(n_nodes)] + ["ground"]
        for _ in range(int(rng.integers(n_nodes, 3 * n_nodes))):
            a, b = rng.choice(len(names), size=2, replace=False)
            z = complex(rng.uniform(0.1, 5.0), rng.uniform(-3.0, 3.0))
            y_end = complex(0, rng.uniform(0, 1e-3))
            net.add_branch(names[a], names[b], z, y_end)
        line = LineSectionModel(0.02 + 0.3j, 0.2 + 1.0j, 1e-9j, 5e-10j,
                                length_km=50.0, mutual_skew=0.15)
        net.add_coupled_branch("p", "q", line.series_matrix(), line.shunt_matrix_per_end())
        y = assemble_admittance(net)
        assert np.max(np.abs(y - y.T)) < 1e-12


def test_isolated_node_named():
    net = PhasorNetwork()
    net.add_branch("a", "b", 1.0 + 0j)
    net.node("floating")
    with pytest.raises(SingularNetworkError) as err:
        assemble_admittance(net)
    assert err.value.node == "floating"


def test_empty_network_rejected():
    with pytest.raises(SingularNetworkError):
        assemble_admittance(PhasorNetwork())
    with pytest.raises(SingularNetworkError):
        solve_steady_state(PhasorNetwork())


# -- Group 2: solving ----------------------------------------------------------


def test_voltage_divider():
    net = PhasorNetwork()
    net.add_source("mid", 1.0 + 0j, 1.0 + 0j)
    net.add_branch("mid", "ground", 1.0 + 0j)
    sol = solve_steady_state(net)
    assert sol.voltage("mid") == pytest.approx(0.5 + 0j, abs=1e-12)


def test_ladder_matches_mesh_oracle():
    rng = np.random.default_rng(11)
    for _ in range(25):
        zs = [complex(rng.uniform(0.2, 4.0), rng.uniform(-2.0, 4.0)) for _ in range(5)]
        emf = complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        net = ladder_network(*zs, emf=emf)
        sol = solve_steady_state(net)
        v1, v2, v3 = ladder_oracle(*zs, emf=emf)
        assert abs(sol.voltage("n1") - v1) < 1e-9 * abs(emf)
        assert abs(sol.voltage("n2") - v2) < 1e-9 * abs(emf)
        assert abs(sol.voltage("n3") - v3) < 1e-9 * abs(emf)


def test_superposition():
    def build(e1, e2):
        net = ladder_network(1 + 1j, 2 + 3j, 5 - 1j, 1 + 0.5j, 3 + 2j, emf=e1)
        net.add_source("n3", e2, 0.5 + 2j)
        return solve_steady_state(net)

    full = build(1.0 + 0j, 0.7 - 0.4j)
    only1 = build(1.0 + 0j, 0j)
    only2 = build(0j, 0.7 - 0.4j)
    for node in ("n1", "n2", "n3"):
        combined = only1.voltage(node) + only2.voltage(node)
        assert abs(full.voltage(node) - combined) < 1e-9


def test_reciprocity():
    def build():
        net = PhasorNetwork()
        net.add_branch("a", "b", 1 + 2j)
        net.add_branch("b", "c", 2 - 1j)
        net.add_branch("a", "ground", 3 + 1j)
        net.add_branch("c", "ground", 1 + 4j)
        net.add_branch("b", "ground", 5 + 0j)
        return net

    net_ab = build()
    net_ab.add_injection("a", 1.0 + 0j)
    v_b = solve_steady_state(net_ab).voltage("b")

    net_ba = build()
    net_ba.add_injection("b", 1.0 + 0j)
    v_a = solve_steady_state(net_ba).voltage("a")
    assert abs(v_b - v_a) < 1e-9


def test_power_balance():
    rng = np.random.default_rng(3)
    for _ in range(10):
        zs = [complex(rng.uniform(0.2, 4.0), rng.uniform(0.0, 4.0)) for _ in range(5)]
        net = ladder_network(*zs)
        net.branches[1].shunt_admittance_per_end = 1e-4j
        sol = solve_steady_state(net)
        delivered, absorbed = sol.power_balance()
        assert abs(delivered - absorbed) < 1e-8 * max(abs(delivered), 1.0)


def test_balanced_source_symmetric_line_balanced_load_end():
    net = PhasorNetwork()
    net.add_three_phase_source("bus", 230940.0, 1 + 10j)
    line = LineSectionModel(0.025 + 0.31j, 0.30 + 1.02j, 3.9e-6j, 2.4e-6j, length_km=100.0)
    net.add_coupled_branch("bus", "load", line.series_matrix(), line.shunt_matrix_per_end())
    sol = solve_steady_state(net)
    mags = [sol.rms(f"load.{p}") for p in "ABC"]
    assert max(mags) - min(mags) < 1e-9 * mags[0]
    delivered, absorbed = sol.power_balance()
    assert abs(delivered - absorbed) < 1e-8 * abs(delivered)


def test_singular_network_reported():
    net = PhasorNetwork()
    net.add_source("a", 1.0, 1.0 + 0j)
    net.add_branch("b", "c", 1.0 + 0j)  # b-c island has no tie anywhere
    with pytest.raises(SingularNetworkError):
        solve_steady_state(net)


# -- Group 3: faults -----------------------------------------------------------


def case_network():
    net = PhasorNetwork()
    net.add_three_phase_source("bus", 230940.1076758503, 1 + 10j)
    return net


LINE = LineSectionModel(0.025 + 0.31j, 0.30 + 1.02j, 3.9e-6j, 2.4e-6j,
                        length_km=100.0, mutual_skew=0.15)


def test_bolted_three_phase_ground_fault_zero_volts():
    fault = FaultSpec(1, 50.0)
    sol = solve_steady_state(apply_fault(case_network(), fault, LINE))
    for p in "ABC":
        assert sol.rms(f"fault.{p}") == 0.0


def test_bolted_isolated_three_phase_fault_small_volts():
    """Ungrounded bolted ABC fault floats at a small common-mode voltage."""
    fault = FaultSpec(2, 50.0)
    sol = solve_steady_state(apply_fault(case_network(), fault, LINE))
    base = 230940.1076758503
    for p in "ABC":
        assert 0.0 < sol.rms(f"fault.{p}") / base < 0.15
    # all three fault phases sit at the same (common-mode) voltage
    va, vb, vc = (sol.voltage(f"fault.{p}") for p in "ABC")
    assert abs(va - vb) < 1e-6 * base and abs(vb - vc) < 1e-6 * base


def test_every_fault_code_solvable_and_sane():
    base = 230940.1076758503
    for code, (phases, grounded) in FAULT_CONNECTIONS.items():
        fault = FaultSpec(code, 40.0, (0.5, 0.5, 0.5), 1.0)
        sol = solve_steady_state(apply_fault(case_network(), fault, LINE))
        for k, p in enumerate("ABC"):
            mag = sol.rms(f"fault.{p}") / base
            if k in phases:
                assert mag < 0.6, (code, p, mag)
            else:
                assert mag > 0.5, (code, p, mag)
        delivered, absorbed = sol.power_balance()
        assert abs(delivered - absorbed) < 1e-8 * abs(delivered)


def test_unknown_fault_code_rejected():
    with pytest.raises(ValueError):
        FaultSpec(12, 50.0)


def test_fault_distance_must_split_line():
    for bad in (0.0, 100.0, -3.0, 120.0):
        with pytest.raises(ValueError):
            apply_fault(case_network(), FaultSpec(9, bad), LINE)


def test_apply_fault_leaves_original_untouched():
    net = case_network()
    n_branches = len(net.branches)
    out = apply_fault(net, FaultSpec(9, 30.0), LINE)
    assert len(net.branches) == n_branches
    assert len(net.coupled) == 0
    assert len(out.coupled) == 2


def test_transposed_line_rotation_symmetry():
    """With mutual_skew=0 an AG fault maps onto a BG fault under A->B->C."""
    line = LineSectionModel(0.025 + 0.31j, 0.30 + 1.02j, 3.9e-6j, 2.4e-6j,
                            length_km=100.0, mutual_skew=0.0)
    sol_ag = solve_steady_state(apply_fault(case_network(), FaultSpec(9, 25.0), line))
    sol_bg = solve_steady_state(apply_fault(case_network(), FaultSpec(10, 25.0), line))
    base = 230940.1076758503
    rotate = {"A": "B", "B": "C", "C": "A"}
    for group in ("bus", "fault", "load"):
        for p in "ABC":
            lhs = sol_ag.rms(f"{group}.{p}") / base
            rhs = sol_bg.rms(f"{group}.{rotate[p]}") / base
            assert abs(lhs - rhs) < 1e-6


# -- Group 4: reporting and text form -------------------------------------------


def test_rms_report_source_magnitude():
    net = PhasorNetwork()
    net.add_three_phase_source("bus", 230940.1076758503, 1 + 10j)
    # unloaded source: node voltage equals the emf
    sol = solve_steady_state(net)
    rows = rms_report(sol, [f"bus.{p}" for p in "ABC"])
    for (label, phase, rms, _ang), expect_phase in zip(rows, "ABC"):
        assert label == "bus" and phase == expect_phase
        assert rms == pytest.approx(230940.1, abs=0.05)


def test_rms_csv_export(tmp_path):
    net = PhasorNetwork()
    net.add_source("n1", 100.0, 1.0 + 0j)
    net.add_branch("n1", "ground", 1.0 + 0j)
    sol = solve_steady_state(net)
    path = tmp_path / "rms.csv"
    write_rms_csv(sol, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node,phase,rms_volts,angle_deg"
    assert lines[1].startswith("n1,,50.0")


def test_rms_report_unknown_node():
    net = PhasorNetwork()
    net.add_source("n1", 1.0, 1.0 + 0j)
    net.add_branch("n1", "ground", 1.0)
    sol = solve_steady_state(net)
    with pytest.raises(KeyError):
        rms_report(sol, ["nope"])


def test_parse_network_round_trip():
    text = """
    # small divider
    branch mid ground 1+0j
    source mid 1.0 0 1+0j
    fault 9 25.0 0 0 0 0.5
    """
    net, faults = parse_network(text)
    sol = solve_steady_state(net)
    assert abs(sol.voltage("mid") - 0.5) < 1e-12
    assert faults[0].fault_type == 9 and faults[0].ground_resistance == 0.5


def test_parse_network_error_carries_line_number():
    with pytest.raises(ValueError, match="line 2"):
        parse_network("branch a b 1+0j\nbogus directive here\n")
