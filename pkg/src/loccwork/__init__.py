"""Work extraction figures and local-measurement bounds for small
multipartite pure states.

Everything is reported in nats with k_B T = 1.  Sites are indexed
little-endian: the flat amplitude index is sum_n z_n d^n, so site 0 is the
fastest-varying digit and character i of a basis-string label addresses
site i.
"""

from .qstate import (
    DensityOperator,
    PureState,
    apply_kraus,
    make_pure,
    overlap,
    reduced_density,
    shannon_entropy,
    von_neumann_entropy,
)
from .graphs import (
    Graph,
    IndependentSet,
    caro_wei_bound,
    gen_lattice,
    gen_random_graph,
    greedy_independent_set,
    load_graph,
    max_independent_set_bruteforce,
    save_graph,
)
from .ensembles import (
    CircuitSpec,
    SubsetSpec,
    basis_state,
    frame_potential,
    ghz_state,
    graph_state,
    haar_moment,
    haar_unitary,
    load_subset_spec,
    plus_state,
    sample_circuit,
    sample_haar,
    sample_subset,
    save_subset_spec,
    subset_state,
    w_state,
    zero_state,
)
from .workbounds import (
    CERT_BRUTEFORCE,
    CERT_HEURISTIC,
    CERT_SCHMIDT,
    EgEstimate,
    ProductState,
    eg_alternating,
    eg_bruteforce,
    eg_schmidt,
    product_overlap,
    w_global,
    w_local,
    w_locc_upper,
)
from .locc import (
    BranchTree,
    Protocol,
    ProtocolWork,
    SiteMeasurement,
    best_lower_bound,
    execute,
    independent_set_protocol,
    load_protocol,
    null_protocol,
    protocol_work,
    refine_rank_one,
    static_protocol,
    subset_protocol,
)
from .lab import (
    ExperimentConfig,
    ResultRow,
    TailRow,
    WorkReport,
    derive_row_seed,
    emit_report,
    fit_slope,
    load_config,
    read_report,
    run_scaling,
    run_tail,
    wilson_interval,
    work_report,
)

__version__ = "0.1.0"

__all__ = [
    "BranchTree",
    "CERT_BRUTEFORCE",
    "CERT_HEURISTIC",
    "CERT_SCHMIDT",
    "CircuitSpec",
    "DensityOperator",
    "EgEstimate",
    "ExperimentConfig",
    "Graph",
    "IndependentSet",
    "ProductState",
    "Protocol",
    "ProtocolWork",
    "PureState",
    "ResultRow",
    "SiteMeasurement",
    "SubsetSpec",
    "TailRow",
    "WorkReport",
    "apply_kraus",
    "basis_state",
    "best_lower_bound",
    "caro_wei_bound",
    "derive_row_seed",
    "eg_alternating",
    "eg_bruteforce",
    "eg_schmidt",
    "emit_report",
    "execute",
    "fit_slope",
    "frame_potential",
    "gen_lattice",
    "gen_random_graph",
    "ghz_state",
    "graph_state",
    "greedy_independent_set",
    "haar_moment",
    "haar_unitary",
    "independent_set_protocol",
    "load_config",
    "load_graph",
    "load_protocol",
    "load_subset_spec",
    "make_pure",
    "max_independent_set_bruteforce",
    "null_protocol",
    "overlap",
    "plus_state",
    "product_overlap",
    "protocol_work",
    "read_report",
    "reduced_density",
    "refine_rank_one",
    "run_scaling",
    "run_tail",
    "sample_circuit",
    "sample_haar",
    "sample_subset",
    "save_graph",
    "save_subset_spec",
    "shannon_entropy",
    "static_protocol",
    "subset_protocol",
    "subset_state",
    "von_neumann_entropy",
    "w_global",
    "w_local",
    "w_locc_upper",
    "w_state",
    "wilson_interval",
    "work_report",
    "zero_state",
]
