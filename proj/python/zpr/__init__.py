"""Zero-pronoun antecedent selection with a REINFORCE-trained policy."""

from ._zpr import (
    FEATURE_NAMES,
    FEATURE_VERSION,
    CheckpointError,
    ConfigError,
    Corpus,
    HyperConfig,
    Model,
    Phase,
    PretrainObjective,
    ToyCorpusOptions,
    TrainConfig,
    TrainResult,
    ValidationError,
    compute_reward,
    evaluate,
    exact_expected_reward,
    generate_toy_corpus,
    load_checkpoint,
    predict,
    run_cli,
    run_oracle_suite,
    save_checkpoint,
    train,
)

__all__ = [
    "FEATURE_NAMES",
    "FEATURE_VERSION",
    "CheckpointError",
    "ConfigError",
    "Corpus",
    "HyperConfig",
    "Model",
    "Phase",
    "PretrainObjective",
    "ToyCorpusOptions",
    "TrainConfig",
    "TrainResult",
    "ValidationError",
    "compute_reward",
    "evaluate",
    "exact_expected_reward",
    "generate_toy_corpus",
    "load_checkpoint",
    "predict",
    "run_cli",
    "run_oracle_suite",
    "save_checkpoint",
    "train",
]
