"""LearnM, LearnMI and LearnH: records, encoding, a small MLP, and predictors."""
from .data import MODES, generate_records, records_from_run
from .encoding import Buckets, HeurRec, MethodRec, OneHotEncoder, ParamRec, load_records, save_records
from .mlp import Mlp, TrainConfig, cross_entropy, softmax, train
from .models import (
    IncrementalLearner, LearnedModel, LearnedPolicy, heuristic_from_model, incremental_update,
    predict_method, predict_param, rank_methods, train_heuristic_model, train_method_model, train_param_models,
)

__all__ = [
    "MODES", "generate_records", "records_from_run", "Buckets", "HeurRec", "MethodRec", "OneHotEncoder",
    "ParamRec", "load_records", "save_records", "Mlp", "TrainConfig", "cross_entropy", "softmax", "train",
    "IncrementalLearner", "LearnedModel", "LearnedPolicy", "heuristic_from_model", "incremental_update",
    "predict_method", "predict_param", "rank_methods", "train_heuristic_model", "train_method_model",
    "train_param_models",
]
