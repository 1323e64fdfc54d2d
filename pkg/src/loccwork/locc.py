"""Adaptive local measurement protocols and their certified work.

A protocol is a fixed number of rounds; in every round each site applies one
measurement (possibly the trivial one), chosen by a deterministic strategy
that may depend on all outcomes announced in earlier rounds.  Executing a
protocol on a state expands the tree of outcome branches; the work figure of
a protocol is

    sum_n [ ln d - average residual entropy at site n ] - H(outcomes),

where the average runs over the leaf distribution and H is the Shannon
entropy of that distribution.  When the final round is rank-one the residual
entropies vanish and the figure reduces to N ln d - H.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .graphs import Graph, greedy_independent_set
from .qstate import (
    PureState,
    apply_kraus_vector,
    reduced_density,
    shannon_entropy,
    von_neumann_entropy,
)

COMPLETENESS_ATOL = 1e-9
NULL_LABEL = "phi"


class ProtocolError(ValueError):
    """Strategy undefined on a history, or structurally invalid protocol."""


@dataclass(frozen=True)
class SiteMeasurement:
    """A complete Kraus set for one site: ((label, matrix), ...).

    Labels are distinct strings; sum K^dag K must equal the identity within
    1e-9.  The trivial measurement is the identity with label "phi".
    """

    ops: tuple

    def __post_init__(self) -> None:
        if not self.ops:
            raise ValueError("measurement needs at least one outcome")
        ops = []
        labels = []
        dim = None
        for label, mat in self.ops:
            if not isinstance(label, str) or not label:
                raise ValueError(f"outcome label must be a nonempty string, got {label!r}")
            m = np.asarray(mat, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"Kraus operator must be square, got shape {m.shape}")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise ValueError("mixed Kraus dimensions in one measurement")
            m = m.copy()
            m.flags.writeable = False
            labels.append(label)
            ops.append((label, m))
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels {labels}")
        total = sum(m.conj().T @ m for _, m in ops)
        if not np.allclose(total, np.eye(dim), atol=COMPLETENESS_ATOL, rtol=0.0):
            raise ValueError("incomplete Kraus set: sum K^dag K != identity within 1e-9")
        object.__setattr__(self, "ops", tuple(ops))

    @property
    def local_dim(self) -> int:
        return self.ops[0][1].shape[0]

    @classmethod
    def null(cls, local_dim: int = 2) -> "SiteMeasurement":
        return cls(((NULL_LABEL, np.eye(local_dim)),))

    @classmethod
    def z_basis(cls, local_dim: int = 2) -> "SiteMeasurement":
        ops = []
        for j in range(local_dim):
            proj = np.zeros((local_dim, local_dim))
            proj[j, j] = 1.0
            ops.append((str(j), proj))
        return cls(tuple(ops))

    @classmethod
    def x_basis(cls) -> "SiteMeasurement":
        plus = np.full((2, 2), 0.5)
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        return cls((("+", plus), ("-", minus)))


Strategy = Callable[[int, tuple], list]


@dataclass(frozen=True)
class Protocol:
    """Deterministic adaptive measurement schedule.

    strategy(round_index, history) returns one SiteMeasurement per site;
    round_index is 1-based and history is a tuple of per-round label tuples
    for all earlier rounds.
    """

    num_sites: int
    num_rounds: int
    strategy: Strategy = field(repr=False)
    local_dim: int = 2
    name: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.num_sites < 1 or self.num_rounds < 1:
            raise ValueError("need at least one site and one round")


@dataclass(frozen=True)
class BranchNode:
    """One outcome branch: full history, its probability, the conditional state."""

    history: tuple
    probability: float
    state: PureState


@dataclass(frozen=True)
class BranchTree:
    """Leaves of a fully executed protocol, plus any pruned probability mass."""

    input_state: PureState
    num_rounds: int
    leaves: tuple
    dropped_mass: float

    def outcome_distribution(self) -> dict:
        return {leaf.history: leaf.probability for leaf in self.leaves}

    @property
    def total_probability(self) -> float:
        return float(sum(leaf.probability for leaf in self.leaves))


@dataclass(frozen=True)
class ProtocolWork:
    """Work certified by one protocol on one state, in nats."""

    w_lambda: float
    local_term: float
    outcome_entropy: float
    leaf_count: int

    def __post_init__(self) -> None:
        if abs(self.w_lambda - (self.local_term - self.outcome_entropy)) > 1e-10:
            raise ValueError("w_lambda must equal local_term - outcome_entropy")


def _round_measurements(protocol: Protocol, rnd: int, history: tuple) -> list:
    try:
        meas = protocol.strategy(rnd, history)
    except KeyError as exc:
        raise ProtocolError(f"strategy undefined on history {history!r}: {exc}") from exc
    if len(meas) != protocol.num_sites:
        raise ProtocolError(
            f"strategy returned {len(meas)} measurements for {protocol.num_sites} sites"
        )
    for m in meas:
        if not isinstance(m, SiteMeasurement):
            raise ProtocolError(f"strategy must return SiteMeasurement objects, got {type(m)}")
        if m.local_dim != protocol.local_dim:
            raise ProtocolError("measurement dimension does not match protocol")
    return meas


def execute(protocol: Protocol, state: PureState, prune_below: float = 0.0) -> BranchTree:
    """Expand the full branch tree of a protocol on a state.

    Branches are split site by site within each round; a branch whose
    probability is exactly zero is not an outcome and is silently removed,
    while branches below prune_below (at most 1e-12) are removed with their
    mass accounted in dropped_mass.  Leaf states are normalized.
    """
    if not 0.0 <= prune_below <= 1e-12:
        raise ValueError("prune_below must lie in [0, 1e-12]")
    if state.num_sites != protocol.num_sites or state.local_dim != protocol.local_dim:
        raise ValueError("state shape does not match protocol")
    n, d = state.num_sites, state.local_dim
    branches: list[tuple[tuple, np.ndarray]] = [((), state.amplitudes)]
    dropped = 0.0
    for rnd in range(1, protocol.num_rounds + 1):
        nxt: list[tuple[tuple, np.ndarray]] = []
        for history, amps in branches:
            meas = _round_measurements(protocol, rnd, history)
            partial: list[tuple[tuple, np.ndarray]] = [((), amps)]
            for site in range(n):
                grown: list[tuple[tuple, np.ndarray]] = []
                for labels, vec in partial:
                    for label, kraus in meas[site].ops:
                        out = apply_kraus_vector(vec, n, d, site, kraus)
                        prob = float(np.vdot(out, out).real)
                        if prob == 0.0:
                            continue
                        if prob < prune_below:
                            dropped += prob
                            continue
                        grown.append((labels + (label,), out))
                partial = grown
            nxt.extend((history + (labels,), vec) for labels, vec in partial)
        branches = nxt
    leaves = []
    for history, vec in branches:
        prob = float(np.vdot(vec, vec).real)
        leaves.append(BranchNode(history, prob, PureState(n, d, vec / np.sqrt(prob))))
    return BranchTree(
        input_state=state, num_rounds=protocol.num_rounds, leaves=tuple(leaves), dropped_mass=dropped
    )


def protocol_work(tree: BranchTree) -> ProtocolWork:
    """Work figure of an executed protocol.

    Requires an essentially complete tree (dropped mass below 1e-9).
    """
    if tree.dropped_mass > 1e-9:
        raise ValueError(f"tree dropped {tree.dropped_mass} probability; too lossy to score")
    state = tree.input_state
    n, d = state.num_sites, state.local_dim
    entropy = shannon_entropy(tree.outcome_distribution())
    residual = 0.0
    for leaf in tree.leaves:
        site_sum = sum(
            von_neumann_entropy(reduced_density(leaf.state, [site])) for site in range(n)
        )
        residual += leaf.probability * site_sum
    local_term = n * float(np.log(d)) - residual
    return ProtocolWork(
        w_lambda=local_term - entropy,
        local_term=local_term,
        outcome_entropy=entropy,
        leaf_count=len(tree.leaves),
    )


def _phase_fixed(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v)))
    if abs(v[idx]) == 0.0:
        return v
    return v * (abs(v[idx]) / v[idx])


def refine_rank_one(protocol: Protocol, state: PureState) -> Protocol:
    """Append a round measuring every site in the eigenbasis of its
    conditional marginal.

    The appended round is rank-one, so it can only sharpen the local term
    while adding outcome entropy already paid for by the residual entropies;
    the work figure never decreases.  The eigenbases depend on the input
    state, so the refined protocol is specific to it; executing it on other
    states raises on unseen histories.
    """
    tree = execute(protocol, state)
    n = protocol.num_sites
    eigenbases: dict = {}
    for leaf in tree.leaves:
        per_site = []
        for site in range(n):
            rho = reduced_density(leaf.state, [site]).matrix
            vals, vecs = np.linalg.eigh(rho)
            order = np.argsort(-vals, kind="stable")
            ops = []
            for rank, idx in enumerate(order):
                v = _phase_fixed(vecs[:, idx])
                ops.append((f"e{rank}", np.outer(v, v.conj())))
            per_site.append(SiteMeasurement(tuple(ops)))
        eigenbases[leaf.history] = per_site

    base_strategy = protocol.strategy
    base_rounds = protocol.num_rounds

    def strategy(rnd: int, history: tuple) -> list:
        if rnd <= base_rounds:
            return base_strategy(rnd, history)
        return eigenbases[history]

    return Protocol(
        num_sites=n,
        num_rounds=base_rounds + 1,
        strategy=strategy,
        local_dim=protocol.local_dim,
        name=protocol.name + "+rank1",
        meta=dict(protocol.meta),
    )


def static_protocol(
    rounds: Sequence[Sequence[SiteMeasurement]], local_dim: int = 2, name: str = "custom"
) -> Protocol:
    """Protocol whose rounds ignore the outcome history."""
    rounds = [list(r) for r in rounds]
    if not rounds:
        raise ValueError("need at least one round")
    num_sites = len(rounds[0])
    if any(len(r) != num_sites for r in rounds):
        raise ValueError("all rounds must cover the same number of sites")

    def strategy(rnd: int, history: tuple) -> list:
        return rounds[rnd - 1]

    return Protocol(
        num_sites=num_sites,
        num_rounds=len(rounds),
        strategy=strategy,
        local_dim=local_dim,
        name=name,
    )


def null_protocol(num_sites: int, local_dim: int = 2) -> Protocol:
    """One round of trivial measurements; certifies exactly the local figure."""
    row = [SiteMeasurement.null(local_dim)] * num_sites
    return static_protocol([row], local_dim=local_dim, name="null")


def subset_protocol(num_sites: int, local_dim: int = 2) -> Protocol:
    """One round measuring every site in the computational basis."""
    row = [SiteMeasurement.z_basis(local_dim)] * num_sites
    return static_protocol([row], local_dim=local_dim, name="computational")


def independent_set_protocol(graph: Graph) -> Protocol:
    """Computational-basis measurements off a greedy independent set S and
    +/- measurements on S, in one round.

    On the graph state of `graph`, the off-S outcomes are uniform and the
    S outcomes are parity functions of their neighbors, certifying
    |S| ln 2 >= N ln 2 / (max degree + 1).
    """
    ind = greedy_independent_set(graph)
    row = [
        SiteMeasurement.x_basis() if v in ind.vertices else SiteMeasurement.z_basis()
        for v in range(graph.num_vertices)
    ]
    proto = static_protocol([row], name="independent-set")
    proto.meta["independent_set"] = tuple(sorted(ind.vertices))
    return proto


def best_lower_bound(
    state: PureState, protocols: Sequence[Protocol], prune_below: float = 0.0
) -> tuple[float, str]:
    """Largest work figure over a protocol menu; earliest protocol wins ties."""
    if not protocols:
        raise ValueError("need at least one protocol")
    best_value, best_name = None, None
    for proto in protocols:
        work = protocol_work(execute(proto, state, prune_below)).w_lambda
        if best_value is None or work > best_value:
            best_value, best_name = work, proto.name
    return float(best_value), best_name


def _parse_op_line(parts: list, path, lineno: int) -> tuple[str, np.ndarray]:
    if len(parts) != 10:
        raise ValueError(f"{path}:{lineno}: op line needs a label and 8 numbers")
    label = parts[1]
    try:
        vals = [float(x) for x in parts[2:]]
    except ValueError:
        raise ValueError(f"{path}:{lineno}: non-numeric matrix entry")
    m = np.array(
        [
            [vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]],
            [vals[4] + 1j * vals[5], vals[6] + 1j * vals[7]],
        ]
    )
    return label, m


def load_protocol(path: str | Path) -> Protocol:
    """Read a protocol description file.

    Format (one directive per line, # comments allowed):

        sites N
        measurement NAME          # optional custom blocks
        op LABEL a b c d e f g h  # 2x2 row-major, re/im interleaved
        end
        round TOK TOK ... TOK     # N tokens: Z, X, null, or a NAME

    Every measurement block must form a complete Kraus set.
    """
    path = Path(path)
    num_sites = None
    named: dict = {}
    rounds: list = []
    block_name = None
    block_ops: list = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0]
        if block_name is not None:
            if key == "op":
                block_ops.append(_parse_op_line(parts, path, lineno))
                continue
            if key == "end":
                if not block_ops:
                    raise ValueError(f"{path}:{lineno}: empty measurement block")
                named[block_name] = SiteMeasurement(tuple(block_ops))
                block_name, block_ops = None, []
                continue
            raise ValueError(f"{path}:{lineno}: expected op/end inside measurement block")
        if key == "sites":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ValueError(f"{path}:{lineno}: sites directive needs a count")
            num_sites = int(parts[1])
        elif key == "measurement":
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: measurement directive needs a name")
            block_name, block_ops = parts[1], []
        elif key == "round":
            if num_sites is None:
                raise ValueError(f"{path}:{lineno}: sites must come before rounds")
            tokens = parts[1:]
            if len(tokens) != num_sites:
                raise ValueError(
                    f"{path}:{lineno}: round has {len(tokens)} tokens, expected {num_sites}"
                )
            row = []
            for tok in tokens:
                if tok == "Z":
                    row.append(SiteMeasurement.z_basis())
                elif tok == "X":
                    row.append(SiteMeasurement.x_basis())
                elif tok == "null":
                    row.append(SiteMeasurement.null())
                elif tok in named:
                    row.append(named[tok])
                else:
                    raise ValueError(f"{path}:{lineno}: unknown measurement token {tok!r}")
            rounds.append(row)
        else:
            raise ValueError(f"{path}:{lineno}: unknown directive {key!r}")
    if block_name is not None:
        raise ValueError(f"{path}: unterminated measurement block {block_name!r}")
    if not rounds:
        raise ValueError(f"{path}: no rounds defined")
    return static_protocol(rounds, name=path.stem)
