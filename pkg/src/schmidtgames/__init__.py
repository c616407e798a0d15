"""Schmidt-style games: engine, winning strategies, and verification oracles.

The package plays variants of Schmidt's nested-ball game at arbitrary
precision — a referee-validated engine with pluggable players — and ships
two certified winning strategies (escaping expanding-image targets, badly
approximable linear forms), fractal constructions the strategies apply to,
and independent brute-force oracles that re-check every quantitative claim
a finished game makes.
"""

from .engine import (
    AliceMove,
    GameParams,
    GameTranscript,
    TurnRecord,
    effective_alice_move,
    has_legal_bob_move,
    play,
    revalidate,
    split_rounds,
    validate_alice_move,
    validate_bob_move,
)
from .escape import (
    EscapeAlice,
    EscapeRunResult,
    ExplicitMatrices,
    LacunarySystem,
    LatticeTargets,
    MultipleTargets,
    NonLacunary,
    NotDiscrete,
    PowerMatrices,
    ScaledLatticeTargets,
    StrategyInvariantError,
    WindowSchedule,
    best_approximations,
    check_lacunary,
    check_uniformly_discrete,
    compute_n_r,
    lacunary_subsequence,
    run_escape,
    system_from_json,
    theoretical_c,
    verify_escape_certificates,
)
from .fractals import (
    BUILTIN_IFS,
    IFS,
    AhlforsEstimate,
    AxisBox,
    DiffusenessReport,
    InconclusiveSampler,
    LipschitzGraph,
    Similarity,
    affine_hull_dim,
    box_count_dimension,
    diffuseness_beta_search,
    diffuseness_test,
    ifs_from_json,
    limit_set_sample,
    lipschitz_graph_build,
    load_ifs,
)
from .geometry import Ball, DimensionExceeded, HyperplaneSlab, gram_schmidt_extend
from .linforms import (
    Bad0Alice,
    Bad0RunResult,
    CaseSelectionAmbiguous,
    CertificateWitness,
    ConstantsSchedule,
    EnumerationTooLarge,
    MinorGameAlice,
    MinorGamePlan,
    NoSolutionCertificate,
    StrategyPostconditionFailed,
    WindowParams,
    certify_no_solution,
    choose_R,
    enumerate_S,
    finite_minor_game,
    run_bad0,
    window_params_from_opening,
)
from .minors import GridMinorEvaluator, MinorTable, grad_minor, level_norm, minor_table
from .players import CenterShrinkBob, GreedyThreatBob, RandomBob, RecordedBob
from .precision import init_precision, set_precision, to_real
from .rng import RngHub
from .verify import (
    BadnessReport,
    CrosscheckReport,
    EscapeScan,
    PrecisionExhausted,
    badness_inf,
    cf_badness_consistency,
    continued_fraction,
    convergents,
    crosscheck_certified_badness,
    escape_inf,
)

__version__ = "0.1.0"
