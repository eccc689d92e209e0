from hmiwlan.nlos.features import extract_features, feature_matrix, feature_summary, feature_table
from hmiwlan.nlos.forest import (DecisionTree, Forest, ForestParams, classify, evaluate_subsets,
                                 train_forest)
from hmiwlan.nlos.io import read_cirs, write_cirs
from hmiwlan.nlos.synthetic import SyntheticCirParams, generate_dataset, rician_k_estimate
