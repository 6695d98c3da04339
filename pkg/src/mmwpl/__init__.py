"""Large-scale mmWave path loss modelling: CI/CIF/FI/ABG models, multi-feature
least squares regression, a synthetic measurement generator, and
cross-environment transfer experiments."""

from .datasets import ChannelSample, Dataset, Environment, Scenario, SplitSpec, load_dataset, save_dataset, split_train_test
from .metrics import EvalReport, evaluate, residual_diagnostics
from .pathloss import (AbgModel, CifModel, CiModel, FiModel, eval_abg, eval_ci, eval_cif, eval_fi, fit_abg, fit_ci,
                       fit_cif, fit_fi, fspl)
from .regression import RegressionFit, build_design_matrix, feature_contributions, fit_regression, ols_fit, predict, residual_variance
from .simulator import SimConfig, generate_dataset, rms_delay_spread, synthesize_pdp, campaign_config
from .transfer import DEFAULT_LADDER, run_ablation, run_transfer

__version__ = "0.1.0"
