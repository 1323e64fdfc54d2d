"""Samplers and constructors for the state families under study.

All samplers are deterministic functions of an explicit seed.  Batch-style
callers that want independent streams should derive per-sample seeds as
base_seed + sample_index; nothing here keeps hidden RNG state.

Bitstrings follow the little-endian convention of qstate: character i of a
string is the digit at site i, and the string maps to flat index
sum_i int(s[i]) * d**i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphs import Graph
from .qstate import PureState, apply_two_site_vector, make_pure


@dataclass(frozen=True)
class SubsetSpec:
    """A set of distinct length-N bitstrings defining a uniform superposition."""

    num_sites: int
    support: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.num_sites < 1:
            raise ValueError("num_sites must be >= 1")
        support = tuple(self.support)
        if not support:
            raise ValueError("support must be nonempty")
        if len(set(support)) != len(support):
            raise ValueError("support contains duplicate bitstrings")
        for s in support:
            if len(s) != self.num_sites or set(s) - {"0", "1"}:
                raise ValueError(f"bad bitstring {s!r} for {self.num_sites} sites")
        object.__setattr__(self, "support", tuple(sorted(support)))

    @property
    def k(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class CircuitSpec:
    """Brickwork circuit: `depth` alternating layers of Haar two-site gates."""

    num_sites: int
    depth: int
    rng_seed: int
    local_dim: int = 2

    def __post_init__(self) -> None:
        if self.num_sites < 2:
            raise ValueError("circuit needs at least 2 sites")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")


def bitstring_index(bits: str, local_dim: int = 2) -> int:
    """Flat index of a digit string, site 0 as the least significant digit."""
    return sum(int(ch) * local_dim**i for i, ch in enumerate(bits))


def index_to_bitstring(index: int, num_sites: int, local_dim: int = 2) -> str:
    return "".join(str((index // local_dim**i) % local_dim) for i in range(num_sites))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R diagonal is rephased to make the distribution exactly invariant.
    """
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_haar(num_sites: int, local_dim: int = 2, seed: int = 0) -> PureState:
    """Uniform (Haar) random pure state: normalized i.i.d. complex Gaussians."""
    rng = np.random.default_rng(seed)
    dim = local_dim**num_sites
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(num_sites, local_dim, v / np.linalg.norm(v))


def sample_circuit(spec: CircuitSpec) -> PureState:
    """Run the brickwork circuit on |0...0>.

    Layer l couples pairs (i, i+1) for i = l%2, l%2 + 2, ... left to right;
    gates are drawn in that order from a single generator seeded with
    spec.rng_seed, so the circuit is reproducible.
    """
    n, d = spec.num_sites, spec.local_dim
    rng = np.random.default_rng(spec.rng_seed)
    amps = np.zeros(d**n, dtype=complex)
    amps[0] = 1.0
    for layer in range(spec.depth):
        for i in range(layer % 2, n - 1, 2):
            gate = haar_unitary(d * d, rng)
            amps = apply_two_site_vector(amps, n, d, i, gate)
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1.0) > 1e-9:
        raise ArithmeticError(f"circuit lost normalization: norm {nrm}")
    return make_pure(amps, n, d)


def graph_state(g: Graph) -> PureState:
    """Qubit graph state: amplitude 2^(-N/2) * (-1)^(number of edges whose
    endpoints both read 1), for every bitstring."""
    n = g.num_vertices
    idx = np.arange(2**n, dtype=np.int64)
    parity = np.zeros(2**n, dtype=np.int64)
    for i, j in g.edges:
        parity += ((idx >> i) & 1) & ((idx >> j) & 1)
    amps = ((-1.0) ** (parity % 2)) / np.sqrt(2.0**n)
    return PureState(n, 2, amps.astype(complex))


def subset_state(spec: SubsetSpec) -> PureState:
    """Uniform superposition 1/sqrt(K) over the support bitstrings."""
    amps = np.zeros(2**spec.num_sites, dtype=complex)
    for s in spec.support:
        amps[bitstring_index(s)] = 1.0
    return make_pure(amps / np.sqrt(spec.k), spec.num_sites)


def sample_subset(num_sites: int, k: int, seed: int) -> SubsetSpec:
    """Uniformly random k-subset of {0,1}^num_sites.

    Uses a full partial shuffle when the space is small and rejection
    sampling of the smaller side otherwise; deterministic under the seed.
    """
    total = 2**num_sites
    if not 1 <= k <= total:
        raise ValueError(f"k={k} out of range for {num_sites} sites")
    rng = np.random.default_rng(seed)
    if total <= 2**22:
        picks = rng.permutation(total)[:k]
    else:
        want = min(k, total - k)
        seen: set[int] = set()
        while len(seen) < want:
            for x in rng.integers(0, total, size=2 * (want - len(seen))):
                if len(seen) < want:
                    seen.add(int(x))
        if want == k:
            picks = np.fromiter(seen, dtype=np.int64)
        else:
            excl = seen
            picks = np.fromiter((x for x in range(total) if x not in excl), dtype=np.int64)
    support = tuple(index_to_bitstring(int(x), num_sites) for x in picks)
    return SubsetSpec(num_sites, support)


def frame_potential(states: list[PureState], t: int) -> float:
    """Mean of |<a|b>|^(2t) over distinct ordered sample pairs."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if len(states) < 2:
        raise ValueError("need at least two states")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise ValueError("states have mismatched dimensions")
    v = np.stack([s.amplitudes for s in states])
    gram = np.abs(v.conj() @ v.T) ** 2
    np.fill_diagonal(gram, 0.0)
    m = len(states)
    return float((gram**t).sum() / (m * (m - 1)))


def haar_moment(t: int, dim: int) -> float:
    """E|<v|psi>|^(2t) over Haar psi: t! (dim-1)! / (t+dim-1)!.

    This is also the Haar value of the order-t frame potential.
    """
    out = 1.0
    for i in range(t):
        out *= (i + 1) / (dim + i)
    return out


def basis_state(digits: str, local_dim: int = 2) -> PureState:
    """Computational basis state from a digit string (site i = character i)."""
    n = len(digits)
    amps = np.zeros(local_dim**n, dtype=complex)
    amps[bitstring_index(digits, local_dim)] = 1.0
    return PureState(n, local_dim, amps)


def zero_state(num_sites: int, local_dim: int = 2) -> PureState:
    return basis_state("0" * num_sites, local_dim)


def plus_state(num_sites: int) -> PureState:
    dim = 2**num_sites
    return PureState(num_sites, 2, np.full(dim, 1 / np.sqrt(dim), dtype=complex))


def ghz_state(num_sites: int, local_dim: int = 2) -> PureState:
    amps = np.zeros(local_dim**num_sites, dtype=complex)
    for j in range(local_dim):
        amps[bitstring_index(str(j) * num_sites, local_dim)] = 1 / np.sqrt(local_dim)
    return PureState(num_sites, local_dim, amps)


def w_state(num_sites: int) -> PureState:
    if num_sites < 2:
        raise ValueError("w_state needs at least 2 sites")
    amps = np.zeros(2**num_sites, dtype=complex)
    for i in range(num_sites):
        amps[2**i] = 1 / np.sqrt(num_sites)
    return PureState(num_sites, 2, amps)


def save_subset_spec(spec: SubsetSpec, path: str | Path) -> None:
    """One bitstring per line."""
    Path(path).write_text("\n".join(spec.support) + "\n")


def load_subset_spec(path: str | Path) -> SubsetSpec:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: no bitstrings found")
    return SubsetSpec(len(lines[0]), tuple(lines))
