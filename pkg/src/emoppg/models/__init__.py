"""Classical classifiers: linear models and from-scratch tree ensembles."""

from .base import LinearModel, Prediction, TreeEnsembleModel, TreeNode, predict, predict_proba
from .boosting import train_gradient_boosted
from .forest import train_extra_trees, train_random_forest
from .linear import train_linear_svm, train_logistic
from .persistence import load_model, save_model

__all__ = [
    "LinearModel",
    "Prediction",
    "TreeEnsembleModel",
    "TreeNode",
    "predict",
    "predict_proba",
    "train_logistic",
    "train_linear_svm",
    "train_random_forest",
    "train_extra_trees",
    "train_gradient_boosted",
    "save_model",
    "load_model",
]
