"""xordlab: a gradient-descent laboratory for XOR / XOR-detection dynamics
with empirical verifiers for the regime claims, plus MNIST filter-clustering
experiments."""

__version__ = "0.1.0"

from .patterns import (  # noqa: F401
    BinaryInput,
    DistributionSpec,
    Pattern,
    PatternSet,
    enumerate_classes,
    exact_test_error,
    is_diverse,
    label_of,
    p_star,
    pattern_set_of,
    pattern_vec,
    sample,
    uniform_diversity_probs,
)
from .gd import (  # noqa: F401
    Endpoint,
    HyperParams,
    StopRule,
    TrainTrace,
    WeightMatrix,
    hinge_loss,
    init_gaussian,
    subgradient,
    train,
    xor_forward,
    xord_forward,
)
