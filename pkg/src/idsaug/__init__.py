"""Level-aware data augmentation for highly imbalanced intrusion detection.

Classes are tiered by imbalance ratio: ample classes pass through, scarce
classes are grown by a code-conditioned GAN with a discriminator filter,
and rare classes by nearest-neighbor interpolation. A dense classifier
trains on the result and a metrics module scores it per class.
"""

__version__ = "0.1.0"

from .dataio import Dataset, load_dataset, map_labels, stratified_split
from .leveling import augmentation_targets, imbalance_ratios, partition
from .pipeline import build_augmented, predict, train_classifier

__all__ = [
    "Dataset",
    "augmentation_targets",
    "build_augmented",
    "imbalance_ratios",
    "load_dataset",
    "map_labels",
    "partition",
    "predict",
    "stratified_split",
    "train_classifier",
    "__version__",
]
