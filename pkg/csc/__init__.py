from csc.dictionary import ConvDictionary, build_dict, mutual_coherence
from csc.model import DcppModel, DcppResult, LayerSpec, build_model, dcpp_forward, greedy_solver, oracle_solver, pool_code
from csc.pursuit import pursuit_greedy, pursuit_oracle
from csc.sparse import SparseCode, gen_sparse_code, l0_inf, stripe
from csc.stability import (
    StabilityReport,
    epsilon_recursion,
    sparsity_condition,
    synthesize_chain,
    verify_stability,
)

__all__ = [
    "ConvDictionary",
    "DcppModel",
    "DcppResult",
    "LayerSpec",
    "SparseCode",
    "StabilityReport",
    "build_dict",
    "build_model",
    "dcpp_forward",
    "epsilon_recursion",
    "gen_sparse_code",
    "greedy_solver",
    "l0_inf",
    "mutual_coherence",
    "oracle_solver",
    "pool_code",
    "pursuit_greedy",
    "pursuit_oracle",
    "sparsity_condition",
    "stripe",
    "synthesize_chain",
    "verify_stability",
]
