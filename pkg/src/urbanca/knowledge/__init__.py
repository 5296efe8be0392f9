"""Transition-function learners: CART, random forest, logistic regression,
Gaussian naive Bayes and MLP, plus roster training and model persistence."""
from ._backend import BACKEND
from .base import TransitionModel, load_model, model_from_bytes
from .bayes import GaussianNB, train_gnb
from .forest import RandomForest, train_forest
from .linear import LogisticRegression, train_logreg
from .mlp import MLP, train_mlp
from .roster import DEFAULT_ROSTER, SEARCH_GRID, RosterEntry, TrainedModel, expand_grid, predict, train_all
from .tree import DecisionTree, gini, train_tree

__all__ = [
    "BACKEND", "TransitionModel", "load_model", "model_from_bytes",
    "GaussianNB", "train_gnb", "RandomForest", "train_forest",
    "LogisticRegression", "train_logreg", "MLP", "train_mlp",
    "DEFAULT_ROSTER", "SEARCH_GRID", "RosterEntry", "TrainedModel", "expand_grid", "predict", "train_all",
    "DecisionTree", "gini", "train_tree",
]
