"""Disentangle latent arrival and departure count streams from occupancy changes."""

__version__ = "0.1.0"

from .distributions import (
    ConditionalJointTable,
    SkellamParams,
    conditional_joint_table,
    poisson_log_pmf,
    sample_joint,
    skellam_pmf,
)

__all__ = [
    "ConditionalJointTable",
    "SkellamParams",
    "conditional_joint_table",
    "poisson_log_pmf",
    "sample_joint",
    "skellam_pmf",
    "__version__",
]
