"""Perceptrons trained on discriminative subspaces found by contrasting coherent biclusters."""

from .biclustering import Bicluster, BiclusteringParams, mine_biclusters, msr
from .contrastive import ContrastivePair, filter_pairs, generate_contrastive
from .dataset import DataMatrix, LabeledDataset, MinMaxParams, load_csv, split_by_class
from .errors import BicNeuronError, DataError, FitError
from .evaluation import GridSpec, grid_calibrate, metrics, stratified_folds, wilcoxon_exact
from .experiment import ExperimentConfig, aggregate, compare, evaluate
from .perceptron import Kernel, kp_train, sp_train
from .pipeline import BicNeuronConfig, BicNeuronModel, fit

__version__ = "0.1.0"

__all__ = [
    "Bicluster", "BiclusteringParams", "mine_biclusters", "msr",
    "ContrastivePair", "filter_pairs", "generate_contrastive",
    "DataMatrix", "LabeledDataset", "MinMaxParams", "load_csv", "split_by_class",
    "BicNeuronError", "DataError", "FitError",
    "GridSpec", "grid_calibrate", "metrics", "stratified_folds", "wilcoxon_exact",
    "ExperimentConfig", "aggregate", "compare", "evaluate",
    "Kernel", "kp_train", "sp_train",
    "BicNeuronConfig", "BicNeuronModel", "fit",
]
