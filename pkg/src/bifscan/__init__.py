"""Detection of bidirectional system-environment information flows.

A three-measurement scheme (initial, intermediate with a state update,
final) is run against exact models of open-system dynamics. Conditioning
on a randomly renewed intermediate state severs the system-side memory, so
any surviving conditional past-future correlation witnesses information
that traveled into the environment and back. The package provides:

- exact protocol engines for mixtures of one-party channels and for
  explicit system+environment dynamics (:mod:`bifscan.protocol`,
  :mod:`bifscan.channels`);
- the correlation and factorization-residual estimators
  (:mod:`bifscan.cpf`);
- closed forms for three solvable models (:mod:`bifscan.analytic`);
- reproducible Monte Carlo sampling of the scheme
  (:mod:`bifscan.montecarlo`);
- a TOML-driven command line (``bifscan``, :mod:`bifscan.cli`).
"""

from .analytic import (
    DecayAmplitude,
    decay_amplitude,
    dephasing_cpf_deterministic,
    dephasing_cpf_random,
    dephasing_decay,
    dissipative_cpf_deterministic,
    dissipative_cpf_random,
    dissipative_memory_prefactor,
    eternal_coherence,
    eternal_cpf_deterministic,
    eternal_cpf_random,
    eternal_ensemble,
    eternal_joint_deterministic,
    eternal_joint_random,
    lorentzian_kernel,
    solve_volterra,
)
from .channels import (
    BipartiteModel,
    CommutingMixtureModel,
    InvalidGeneratorError,
    LindbladChannel,
    NoiseEnsemble,
    NonCommutingError,
    NotDecomposableError,
    PauliChannel,
    TwoTimePropagator,
    UnitaryChannel,
    check_commuting,
    check_env_invariance,
    classical_rate_model,
    commuting_decomposition,
    lindblad_generator,
)
from .cpf import (
    CpfResult,
    cpf_correlation,
    cpf_summary,
    markov_residual,
    table3_summary,
)
from .linalg import (
    DensityMatrix,
    as_operator,
    density_matrix,
    herm_eig,
    maximally_mixed,
    partial_trace,
    pure_state,
    tensor,
    unitary_evolution,
)
from .measurements import (
    BlochDirection,
    MeasurementSet,
    UpdatePolicy,
    X_DIR,
    Y_DIR,
    Z_DIR,
    ZeroProbabilityBranchError,
    apply_measurement,
    bloch_eigenstates,
    bloch_projectors,
    check_env_measurement_invariance,
    uniform_random_policy,
)
from .modelfile import ModelConfig, ModelFileError, load_model_file
from .montecarlo import (
    ChainSampler,
    ReplicaSummary,
    SampleResult,
    cpf_replicas,
    ensemble_sampler,
    joint_sampler,
    sample_counts,
    sample_trajectory,
)
from .protocol import (
    JointDistribution,
    ProtocolSpec,
    joint_distribution_bipartite,
    joint_distribution_ensemble,
    stage_tables_ensemble,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # linalg
    "DensityMatrix",
    "as_operator",
    "density_matrix",
    "herm_eig",
    "maximally_mixed",
    "partial_trace",
    "pure_state",
    "tensor",
    "unitary_evolution",
    # measurements
    "BlochDirection",
    "MeasurementSet",
    "UpdatePolicy",
    "X_DIR",
    "Y_DIR",
    "Z_DIR",
    "ZeroProbabilityBranchError",
    "apply_measurement",
    "bloch_eigenstates",
    "bloch_projectors",
    "check_env_measurement_invariance",
    "uniform_random_policy",
    # channels
    "BipartiteModel",
    "CommutingMixtureModel",
    "InvalidGeneratorError",
    "LindbladChannel",
    "NoiseEnsemble",
    "NonCommutingError",
    "NotDecomposableError",
    "PauliChannel",
    "TwoTimePropagator",
    "UnitaryChannel",
    "check_commuting",
    "check_env_invariance",
    "classical_rate_model",
    "commuting_decomposition",
    "lindblad_generator",
    # protocol
    "JointDistribution",
    "ProtocolSpec",
    "joint_distribution_bipartite",
    "joint_distribution_ensemble",
    "stage_tables_ensemble",
    # cpf
    "CpfResult",
    "cpf_correlation",
    "cpf_summary",
    "markov_residual",
    "table3_summary",
    # analytic
    "DecayAmplitude",
    "decay_amplitude",
    "dephasing_cpf_deterministic",
    "dephasing_cpf_random",
    "dephasing_decay",
    "dissipative_cpf_deterministic",
    "dissipative_cpf_random",
    "dissipative_memory_prefactor",
    "eternal_coherence",
    "eternal_cpf_deterministic",
    "eternal_cpf_random",
    "eternal_ensemble",
    "eternal_joint_deterministic",
    "eternal_joint_random",
    "lorentzian_kernel",
    "solve_volterra",
    # montecarlo
    "ChainSampler",
    "ReplicaSummary",
    "SampleResult",
    "cpf_replicas",
    "ensemble_sampler",
    "joint_sampler",
    "sample_counts",
    "sample_trajectory",
    # modelfile
    "ModelConfig",
    "ModelFileError",
    "load_model_file",
]
