"""Round-elimination laboratory for locally checkable labelings on 2-colored
regular bipartite graphs."""

from .problems import (
    BLACK,
    WHITE,
    Config,
    Constraint,
    Problem,
    config,
    contains,
    equal_up_to_renaming,
    expand,
    make_problem,
    parse_problem,
    problem_hash,
    render_problem,
    swap_sides,
)
from .speedup import RawStepResult, is_maximal, re_black, re_white
from .relax import (
    Diagram,
    RelaxationMap,
    StrengthPreorder,
    add_configurations,
    check_relaxation_on_samples,
    diagram,
    merge_labels,
    relax_to_targets,
    relaxation_map,
    replace_everywhere,
    strength_order,
)
from .zeroround import (
    ZeroRoundVerdict,
    brute_force_oracle,
    randomized_floor,
    zero_round,
    zero_round_black,
    zero_round_white,
)
from .family import (
    Chain,
    PhiParams,
    PsiParams,
    SearchStrategy,
    TBound,
    auto_bound,
    chain_expected,
    chain_problems,
    make_phi,
    make_phi_prime,
    make_psi,
    t_bound,
    verify_chain,
)
from .bounds import (
    LogProb,
    deterministic_regime,
    failure_floor,
    multi_step,
    randomized_regime,
    single_step,
)
from .sim import (
    SimGraph,
    check_problem_output,
    check_xy_matching,
    gen_regular_bipartite,
    gen_tree,
    run_proposal,
    run_zero_round_witness,
)
from .certificates import render_chain, verify_certificate

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
