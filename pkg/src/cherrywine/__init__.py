"""cherrywine: truncated vine copula structures from cherry junction trees.

Pipeline: equal-frequency discretization of a multivariate sample, greedy
construction of a k-th order cherry junction tree maximizing the
information-content weight, level-by-level collapse into a truncated
regular vine, and optional Gaussian pair-copula fitting and density
evaluation.
"""

__version__ = "0.1.0"

from .errors import (
    CherryWineError,
    DataError,
    ModelError,
    NumericalError,
    PreconditionError,
)
from .greedy import (
    GreedyResult,
    HyperCherry,
    admissible,
    build_tcherry_greedy,
    candidate_space,
    enumerate_tcherry_structures,
    exhaustive_tcherry,
)
from .infotheory import InfoCache, MarginalTable, entropy, information_content, marginal_table
from .ingest import (
    Dataset,
    DiscretizedSample,
    Partition,
    SampleCopulaDensity,
    default_bin_count,
    discretize,
    load_csv,
    sample_copula,
    uniform_partition,
)
from .junction import (
    DiscreteJoint,
    JunctionTree,
    TCherryJunctionTree,
    junction_density,
    junction_tree,
    junction_to_dot,
    kl_formula,
    tcherry_from_cluster_set,
    tcherry_from_junction,
    tree_weight,
    validate_junction_tree,
    validate_tcherry_tree,
)
from .paircopula import (
    MarginalModel,
    PairCopula,
    PairCopulaAssignment,
    fit_gaussian_assignment,
    gaussian_copula,
    h_function,
    pair_density,
    pseudo_observations,
    vine_copula_density,
    vine_density,
)
from .vine import (
    CherryWine,
    VineEdge,
    VineStructure,
    cherry_to_vine,
    count_regular_vines,
    enumerate_cherry_wines,
    pair_copula_list,
    validate_vine,
    vine_level_to_dot,
)
