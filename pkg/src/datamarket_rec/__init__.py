"""Recommendations and offline evaluation for tripartite data markets."""

from .evaluation import SplitConfig, SplitResult, SplitStrategy, run_evaluation, split
from .metrics import EvaluationCase, MetricReport, aggregate
from .model import (
    EntityKind,
    EntityRef,
    Interaction,
    InteractionStore,
    InvalidInteraction,
    project_dataset_service,
)
from .recommenders import (
    Algorithm,
    RankedList,
    RecommendationProfile,
    Similarity,
    UseCase,
    recommend,
    recommend_cf,
    recommend_mp,
    similarity,
)

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "EntityKind",
    "EntityRef",
    "EvaluationCase",
    "Interaction",
    "InteractionStore",
    "InvalidInteraction",
    "MetricReport",
    "RankedList",
    "RecommendationProfile",
    "Similarity",
    "SplitConfig",
    "SplitResult",
    "SplitStrategy",
    "UseCase",
    "aggregate",
    "project_dataset_service",
    "recommend",
    "recommend_cf",
    "recommend_mp",
    "run_evaluation",
    "similarity",
    "split",
]
