"""Bimodal distribution removal and GA feature selection for WDBC-style data."""

from .bdr import BdrConfig, bdr_pass, run_bdr_training, should_stop_removal
from .dataset import Dataset, Normalization, load_dataset, normalize, split
from .dip import dip_pvalue, dip_statistic
from .exceptions import BdrgaError
from .ga import Chromosome, GaConfig, evolve
from .nn import NetworkShape, TrainConfig, train
from .stats import histogram, linear_regression, summarize

__version__ = "0.1.0"
