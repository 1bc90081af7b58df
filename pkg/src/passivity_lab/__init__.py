"""Numerical laboratory for the optimality of passive states under lossy
Lindblad channels: majorization tools, a single-jump Lindblad engine,
Monte-Carlo verification of the optimality theorem, and counterexamples
outside its hypotheses."""

__version__ = "0.1.0"

from .errors import PassivityLabError
from .linalg import EigenSystem, expm, hermitian_eigh, kron
from .lindblad import (
    LindbladGenerator,
    RawLindbladGenerator,
    apply,
    build_generator,
    build_generator_from_raw,
    channel_superoperator,
    evolve,
    identity_image,
    lambdas,
    random_generator,
)
from .majorization import (
    MajorizationVerdict,
    Relation,
    TTransformChain,
    apply_t_transforms,
    compare,
    t_transform_witness,
)
from .states import (
    Hamiltonian,
    Renyi,
    TraceFunctional,
    average_energy,
    entropy,
    ky_fan_sum,
    passive_rearrangement,
    spectrum_of,
)
