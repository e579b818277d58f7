"""Class equilibrium by Coulomb repulsion.

Each class of a labeled dataset becomes one charge placed at its mean, with
magnitude given by its spread. The charges repel until the total force is
negligible; every class is then translated along with its charge, a regressor
learns the translation from raw samples, and test samples are assigned to
the charge that pulls on them hardest.
"""
from .classifier import ClassificationReport, classify_dataset, classify_point
from .dataset import (
    LabeledDataset, ResizeSpec, load_csv, load_idx, make_blobs, partition_by_class, resize,
    stratified_subset,
)
from .electrostatics import ChargeSystem, attraction_magnitude, net_forces, pairwise_force
from .equilibrium import EquilibriumModel, SolverConfig, project_classes, solve_equilibrium
from .erc import ErcDecision, erc_correct, spearman
from .errors import (
    ConsistencyError, DivergenceError, DomainError, EquilibriumError, FormatError, ParseError,
    ShapeError, SingularityError,
)
from .summaries import ClassSummary, summarize_all, summarize_class
from .transform import TrainConfig, TransformModel, forward, init_model, train

__version__ = "0.1.0"
