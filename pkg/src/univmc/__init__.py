"""Low-rank matrix completion from expander-graph samples."""

__version__ = "0.1.0"

from .core import (
    LowRankFactor,
    SampleSet,
    best_rank_k,
    project_omega,
    project_T,
    project_T_perp,
    svd,
)
from .errors import (
    ConstructionFailureError,
    FileFormatError,
    GenerationFailureError,
    InvalidArgumentError,
    NumericalFailureError,
    TooLargeError,
)
from .graphs import BlockModelParams, gen_block_model, gen_erdos_renyi, gen_random_d_regular, spectrum, trim
from .incoherence import audit, claim1_bound, delta_d_estimate, delta_d_exact, mu0, mu1_sip
from .completion import SolverConfig, solve_nuclear_norm, spectral_approx, svt_shrink
from .certificate import golfing_construct, verify_certificate
from .adversarial import build_counterexample, demonstrate_failure
