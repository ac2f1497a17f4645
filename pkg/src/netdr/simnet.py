"""Synchronous message-passing simulation of the regression agents.

Every round each agent posts ``(a_ij, b_ij)`` to each neighbor, the
network delivers all messages at a barrier, and then each agent updates
from its own data and its inbox.  Every delivered message is logged so
that the traffic can be audited afterwards.  Metrics needing the global
data (relative error, feasibility) are computed here, outside the agents.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .central import CentralSolution
from .datasplit import DataSummand, GlobalData
from .framework import check_parameters, initial_state
from .prox import Regularizer
from .regression import NodeLocal, gather_state, make_agents
from .topology import Network

TRACE_HEADER = ("iter", "rel_error", "consensus_gap", "feasibility_gap", "step_norm")


class Message(NamedTuple):
    round: int
    sender: int
    receiver: int
    size: int
    payload: np.ndarray | None = None


@dataclass
class AuditReport:
    messages: int
    rounds: int
    expected_messages: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.messages == self.expected_messages

    def summary(self) -> str:
        status = "OK" if self.ok else "FAILED"
        return (
            f"audit {status}: {self.messages} messages over {self.rounds} rounds "
            f"(expected {self.expected_messages}), {len(self.violations)} violations"
        )


@dataclass
class RunTrace:
    rel_error: list[float] = field(default_factory=list)
    consensus_gap: list[float] = field(default_factory=list)
    feasibility_gap: list[float] = field(default_factory=list)
    step_norm: list[float] = field(default_factory=list)
    absolute_error: bool = False

    def __len__(self):
        return len(self.rel_error)

    def rows(self, stride: int = 1):
        if stride < 1:
            raise ValueError(f"stride must be positive, got {stride}")
        for k in range(0, len(self), stride):
            yield (
                k + 1,
                self.rel_error[k],
                self.consensus_gap[k],
                self.feasibility_gap[k],
                self.step_norm[k],
            )

    def to_csv(self, path: str | Path | None = None, stride: int = 1) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for k, *vals in self.rows(stride):
            w.writerow([k] + [repr(float(v)) for v in vals])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def first_below(self, threshold: float) -> int | None:
        """First iteration (1-based) whose relative error is below ``threshold``."""
        for k, e in enumerate(self.rel_error):
            if e < threshold:
                return k + 1
        return None


@dataclass
class SimulationResult:
    trace: RunTrace
    betas: np.ndarray
    alphas: np.ndarray
    state: np.ndarray
    ledger: list[Message]
    iterations: int
    converged: bool

    @property
    def messages(self) -> int:
        return len(self.ledger)


def relative_error(beta_i: np.ndarray, beta_ref: np.ndarray) -> tuple[float, bool]:
    """``||beta_i - beta_ref|| / ||beta_ref||``; absolute error if the reference is zero."""
    ref = float(np.linalg.norm(beta_ref))
    err = float(np.linalg.norm(beta_i - beta_ref))
    if ref == 0.0:
        return err, True
    return err / ref, False


def consensus_gap(betas: np.ndarray) -> float:
    diff = betas[:, None, :] - betas[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=2))))


def feasibility_gap(data: GlobalData, betas: np.ndarray, eps: float) -> float:
    res = np.linalg.norm(betas @ data.X.T - data.y, axis=1)
    return float(max(0.0, np.max(res) - eps))


def simulate(
    net: Network,
    summands: list[DataSummand],
    f: Regularizer,
    eps: float,
    lam: float,
    rho: float,
    max_iter: int,
    reference: CentralSolution | np.ndarray,
    probe_agent: int = 1,
    rng_seed: int | None = None,
    stop_tol: float = 0.0,
    data: GlobalData | None = None,
    keep_payloads: bool = False,
) -> SimulationResult:
    """Run synchronous rounds of the regression iteration.

    ``summands[i - 1]`` belongs to agent ``i``.  ``rng_seed`` selects a
    random initial state (zeros when ``None``).  ``data`` is the global
    problem used by the harness for the feasibility metric; it defaults to
    the sum of the summands.
    """
    check_parameters(lam, rho)
    if len(summands) != net.m:
        raise ValueError(f"{len(summands)} summands for a network of {net.m} agents")
    if not 1 <= probe_agent <= net.m:
        raise ValueError(f"probe agent {probe_agent} outside 1..{net.m}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    beta_ref = reference.beta if isinstance(reference, CentralSolution) else np.asarray(reference)
    if data is None:
        data = GlobalData(sum(s.X for s in summands), sum(s.y for s in summands))

    locals_ = {i + 1: NodeLocal.from_summand(s, net.m, eps) for i, s in enumerate(summands)}
    n, p = data.n, data.p
    init = None if rng_seed is None else initial_state(net, n + p, rng_seed)
    agents = make_agents(net, locals_, init)

    trace = RunTrace()
    ledger: list[Message] = []
    z = gather_state(net, agents)
    converged = False
    k = 0
    for k in range(1, max_iter + 1):
        mail: dict[int, dict[int, np.ndarray]] = {i: {} for i in agents}
        for i, ag in agents.items():
            for j, payload in ag.outgoing().items():
                mail[j][i] = payload
                ledger.append(Message(k, i, j, payload.size, payload if keep_payloads else None))
        for i, ag in agents.items():
            ag.step(mail[i], f, lam, rho)

        betas = np.stack([agents[i].beta for i in range(1, net.m + 1)])
        z_next = gather_state(net, agents)
        step = float(np.linalg.norm(z_next - z))
        err, flagged = relative_error(betas[probe_agent - 1], beta_ref)
        trace.rel_error.append(err)
        trace.absolute_error = flagged
        trace.consensus_gap.append(consensus_gap(betas))
        trace.feasibility_gap.append(feasibility_gap(data, betas, eps))
        trace.step_norm.append(step)
        done = step <= stop_tol * (1.0 + float(np.linalg.norm(z)))
        z = z_next
        if done:
            converged = True
            break

    return SimulationResult(
        trace=trace,
        betas=betas,
        alphas=np.stack([agents[i].alpha for i in range(1, net.m + 1)]),
        state=z,
        ledger=ledger,
        iterations=k,
        converged=converged,
    )


def audit_ledger(ledger: list[Message], net: Network, dim: int | None = None,
                 protected: list[np.ndarray] | None = None) -> AuditReport:
    """Check every message against the network and the payload contract.

    ``dim`` is the expected payload length ``n + p`` (inferred from the
    first message when omitted).  Payloads that were kept are also checked
    not to share memory with any array in ``protected``.
    """
    violations = []
    rounds = sorted({msg.round for msg in ledger})
    if dim is None and ledger:
        dim = ledger[0].size
    for idx, msg in enumerate(ledger):
        if msg.receiver not in net.neighbors.get(msg.sender, ()):
            violations.append(
                f"message {idx} (round {msg.round}): {msg.sender} -> {msg.receiver} is not an edge"
            )
        if msg.size != dim:
            violations.append(
                f"message {idx} (round {msg.round}): payload size {msg.size}, expected {dim}"
            )
        if msg.payload is not None:
            if msg.payload.size != msg.size:
                violations.append(f"message {idx}: recorded size disagrees with payload")
            for arr in protected or ():
                if np.shares_memory(msg.payload, arr):
                    violations.append(f"message {idx}: payload aliases private data")
    return AuditReport(
        messages=len(ledger),
        rounds=len(rounds),
        expected_messages=2 * len(net.edges) * len(rounds),
        violations=violations,
    )


def ledger_to_text(ledger: list[Message], net: Network) -> str:
    lines = [net.to_text().rstrip("\n")]
    lines += [f"msg {m.round} {m.sender} {m.receiver} {m.size}" for m in ledger]
    return "\n".join(lines) + "\n"


def ledger_from_text(text: str) -> tuple[list[Message], Network]:
    net_lines, ledger = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "msg":
            try:
                k, s, r, size = (int(v) for v in parts[1:5])
            except ValueError:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
            ledger.append(Message(k, s, r, size))
        else:
            net_lines.append(raw)
    return ledger, Network.from_text("\n".join(net_lines))
