"""Shared helpers: seeded random states, measurements, and protocols."""

import numpy as np

from loccwork.locc import SiteMeasurement, static_protocol
from loccwork.qstate import PureState


def random_state(num_sites: int, seed: int, local_dim: int = 2) -> PureState:
    rng = np.random.default_rng(seed)
    dim = local_dim**num_sites
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(num_sites, local_dim, v / np.linalg.norm(v))


def random_measurement(rng: np.random.Generator, outcomes: int = 2) -> SiteMeasurement:
    """Random complete two-outcome qubit measurement: K_i = G_i S^{-1/2}."""
    g = [
        rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        for _ in range(outcomes)
    ]
    s = sum(k.conj().T @ k for k in g)
    w, v = np.linalg.eigh(s)
    inv_sqrt = v @ np.diag(w**-0.5) @ v.conj().T
    return SiteMeasurement(tuple((f"m{i}", k @ inv_sqrt) for i, k in enumerate(g)))


def random_protocol(rng: np.random.Generator, num_sites: int, max_rounds: int = 2):
    """Static protocol with per-site measurements drawn from a small menu."""
    num_rounds = int(rng.integers(1, max_rounds + 1))
    rounds = []
    for _ in range(num_rounds):
        row = []
        for _ in range(num_sites):
            kind = int(rng.integers(0, 4))
            if kind == 0:
                row.append(SiteMeasurement.null())
            elif kind == 1:
                row.append(SiteMeasurement.z_basis())
            elif kind == 2:
                row.append(SiteMeasurement.x_basis())
            else:
                row.append(random_measurement(rng))
        rounds.append(row)
    return static_protocol(rounds, name="random")
