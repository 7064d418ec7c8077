"""irmrank: image retweet ranking over a heterogeneous repost/follow network."""

from .graph import IRMNetwork, RankTuple, SplitSpec, TupleSampler, build_graph, \
    sample_tuple, enumerate_tuples, split
from .features import FeatureSet, SynthConfig, synth_generate, read_features, \
    write_features, validate_dataset, load_dataset
from .pipeline import TrainConfig, Model, train, evaluate, run_ablations, \
    EvalReport, EpochLog

__version__ = "0.1.0"
