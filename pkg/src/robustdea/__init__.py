"""Robust DEA efficiency scores averaged over every variable subset."""

from .dea import Dataset, DatasetError, Membership, ModelSpec, ReturnsToScale, Role, VariableDef, efficiency_score
from .engine import enumerate_exact, enumerate_exhaustive
from .instances import CandidatePolicy, GeneratorConfig, generate_random, load_csv, save_csv, tennis_dataset
from .report import RunSettings, score_dataset, subset_scores
from .scores import (BetaIndependent, CommonBernoulli, CommonUniform, ExpertBernoulli, MaxEntropy, entropy,
                     expected_score, moments, pbar_curve, score_variance)

__all__ = [
    "Dataset", "DatasetError", "Membership", "ModelSpec", "ReturnsToScale", "Role", "VariableDef",
    "efficiency_score", "enumerate_exact", "enumerate_exhaustive", "CandidatePolicy", "GeneratorConfig",
    "generate_random", "load_csv", "save_csv", "tennis_dataset", "RunSettings", "score_dataset",
    "subset_scores", "BetaIndependent", "CommonBernoulli", "CommonUniform", "ExpertBernoulli", "MaxEntropy",
    "entropy", "expected_score", "moments", "pbar_curve", "score_variance",
]
