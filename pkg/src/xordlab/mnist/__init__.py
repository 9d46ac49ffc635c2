from .idx import (
    IdxParseError,
    MnistDataset,
    load_dataset,
    read_idx_images,
    read_idx_labels,
    write_idx_images,
    write_idx_labels,
)
from .net import (
    ConvNet,
    AdamState,
    adam_step,
    forward,
    forward_backward,
    init_convnet,
    accuracy,
)
from .lab import (
    TrainConfig,
    train_mnist,
    KMeansResult,
    cluster_filters,
    cluster_init_experiment,
    fetch_mnist,
    MNIST_FILES,
)
