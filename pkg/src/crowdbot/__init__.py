"""Bot detection from issue and pull request comments, with cross-repository
majority voting over per-repository predictions."""

from crowdbot.domain import (
    AggregationConfig,
    CommentRecord,
    ConfusionMatrix,
    ContributorPredictions,
    ContributorRepoActivity,
    FeatureVector,
    GroundTruth,
    Label,
    Origin,
    Prediction,
    validate_corpus,
)
from crowdbot.patterns import KERNEL

__version__ = "0.1.0"

__all__ = [
    "AggregationConfig",
    "CommentRecord",
    "ConfusionMatrix",
    "ContributorPredictions",
    "ContributorRepoActivity",
    "FeatureVector",
    "GroundTruth",
    "KERNEL",
    "Label",
    "Origin",
    "Prediction",
    "validate_corpus",
]
