import math

import numpy as np
import pytest

from instances import path, small_network_problem
from netdr.central import solve_central
from netdr.datasplit import AgentMask, GlobalData, generate_data, preset_masks, split_from_masks
from netdr.prox import L1Norm
from netdr.regression import NodeLocal, run_direct
from netdr.simnet import (
    TRACE_HEADER,
    Message,
    RunTrace,
    audit_ledger,
    ledger_from_text,
    ledger_to_text,
    relative_error,
    simulate,
)
from netdr.topology import build_network, random_walk_network


def test_relative_error_guard():
    assert relative_error(np.ones(3), np.ones(3)) == (0.0, False)
    err, flagged = relative_error(np.array([3.0, 4.0]), np.zeros(2))
    assert err == 5.0 and flagged


def test_degenerate_agent_matches_central():
    net = build_network(2, [(1, 2)])
    data = generate_data(3, 5, 1)
    masks = [
        AgentMask(1, np.ones((3, 5), bool), np.ones(3, bool)),
        AgentMask(2, np.zeros((3, 5), bool), np.zeros(3, bool)),
    ]
    summands = split_from_masks(data, masks)
    assert not summands[1].X.any()
    ref = solve_central(data, L1Norm(), 0.1)
    res = simulate(net, summands, L1Norm(), 0.1, 0.02, 1.9, 20000, ref, stop_tol=1e-13)
    assert res.converged
    assert np.abs(res.betas - ref.beta).max() <= 1e-6


def test_identity_instance_reaches_reference():
    net = build_network(2, [(1, 2)])
    data = GlobalData(np.eye(2), np.array([2.0, 0.0]))
    summands = split_from_masks(data, preset_masks("rows", 2, 2, 2))
    res = simulate(net, summands, L1Norm(), 0.5, 0.02, 1.9, 3000, np.array([1.5, 0.0]), stop_tol=1e-14)
    assert res.trace.rel_error[-1] <= 1e-12


def test_matches_plain_loop_bitwise():
    net, data, summands, eps = small_network_problem(7, m=4, n=3, p=4)
    ref = solve_central(data, L1Norm(), eps)
    res = simulate(net, summands, L1Norm(), eps, 0.05, 1.5, 40, ref, data=data)
    locals_ = {i + 1: NodeLocal.from_summand(s, net.m, eps) for i, s in enumerate(summands)}
    states, betas = run_direct(net, locals_, L1Norm(), 0.05, 1.5, 40)
    assert np.array_equal(res.state, states[-1])
    assert np.array_equal(res.betas, betas[-1])


def test_deterministic_traces():
    net, data, summands, eps = small_network_problem(3, m=3, n=3, p=4)
    ref = solve_central(data, L1Norm(), eps)
    a = simulate(net, summands, L1Norm(), eps, 0.1, 1.9, 60, ref, rng_seed=5)
    b = simulate(net, summands, L1Norm(), eps, 0.1, 1.9, 60, ref, rng_seed=5)
    assert a.trace.to_csv() == b.trace.to_csv()
    assert np.array_equal(a.state, b.state)


def test_trace_values_finite_nonnegative_and_monotone_steps():
    net, data, summands, eps = small_network_problem(12, m=4, n=5, p=5)
    ref = solve_central(data, L1Norm(), eps)
    res = simulate(net, summands, L1Norm(), eps, 0.05, 1.9, 400, ref, rng_seed=1)
    for col in (res.trace.rel_error, res.trace.consensus_gap, res.trace.feasibility_gap, res.trace.step_norm):
        arr = np.array(col)
        assert np.all(np.isfinite(arr)) and np.all(arr >= 0)
    assert np.all(np.diff(res.trace.step_norm) <= 1e-10)


@pytest.mark.parametrize("stride", [1, 3, 7])
def test_csv_stride(stride):
    trace = RunTrace([0.5] * 10, [0.1] * 10, [0.0] * 10, [1.0] * 10)
    lines = trace.to_csv(stride=stride).splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) - 1 == math.ceil(10 / stride)
    assert lines[1].startswith("1,")


def test_ledger_counts_on_path():
    net = path(3)
    data = generate_data(3, 4, 0)
    summands = split_from_masks(data, preset_masks("rows", 3, 4, 3))
    ref = solve_central(data, L1Norm(), 0.3)
    res = simulate(net, summands, L1Norm(), 0.3, 0.1, 1.0, 9, ref, keep_payloads=True)
    assert res.messages == 4 * 9
    report = audit_ledger(res.ledger, net, dim=7, protected=[s.X for s in summands] + [s.y for s in summands])
    assert report.ok and report.violations == []
    assert all(isinstance(m.payload, np.ndarray) and m.payload.size == 7 for m in res.ledger)


def test_forged_message_flagged():
    net = path(3)
    ledger = [Message(1, 1, 2, 4), Message(1, 2, 1, 4), Message(1, 2, 3, 4), Message(1, 3, 2, 4)]
    assert audit_ledger(ledger, net, dim=4).ok
    forged = ledger + [Message(1, 1, 3, 4)]
    report = audit_ledger(forged, net, dim=4)
    assert len(report.violations) == 1 and not report.ok
    wrong_size = ledger[:-1] + [Message(1, 3, 2, 7)]
    assert len(audit_ledger(wrong_size, net, dim=4).violations) == 1


def test_aliasing_payload_flagged():
    net = build_network(2, [(1, 2)])
    secret = np.arange(4.0)
    ledger = [Message(1, 1, 2, 4, secret), Message(1, 2, 1, 4, np.zeros(4))]
    report = audit_ledger(ledger, net, dim=4, protected=[secret])
    assert any("aliases" in v for v in report.violations)


def test_ledger_text_round_trip():
    net = random_walk_network(4, 1)
    ledger = [Message(1, i, j, 3) for i, j in net.edges] + [Message(1, j, i, 3) for i, j in net.edges]
    back, net2 = ledger_from_text(ledger_to_text(ledger, net))
    assert net2 == net
    assert back == ledger


def test_parameter_validation():
    net, data, summands, eps = small_network_problem(1, m=2, n=2, p=2)
    ref = np.zeros(2)
    with pytest.raises(ValueError, match="rho"):
        simulate(net, summands, L1Norm(), eps, 0.1, 2.0, 5, ref)
    with pytest.raises(ValueError, match="summands"):
        simulate(net, summands[:1], L1Norm(), eps, 0.1, 1.0, 5, ref)
    with pytest.raises(ValueError, match="probe"):
        simulate(net, summands, L1Norm(), eps, 0.1, 1.0, 5, ref, probe_agent=3)
