"""Self-critical sequence training on a tabular toy policy."""

from .policy import SparseGrad, ToyPolicy, UnknownToken, ce_loss_and_grad, generate, scst_loss_grad, sequence_nll_grad
from .rewards import (
    EOS,
    Advantage,
    IncompatibleSpec,
    Metric,
    RewardSpec,
    ScstItem,
    compute_reward,
    reward_components,
    scst_advantages,
)
from .toy import lexicon, toy_task_generate
from .train import ConfigError, TrainConfig, TrainingReport, build_vocabulary, train
