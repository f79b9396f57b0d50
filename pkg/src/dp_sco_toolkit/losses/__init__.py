"""Loss families, datasets and loss evaluation."""

from dp_sco_toolkit.losses.datasets import (
    DataPoint,
    Dataset,
    Distribution,
    LinearDistribution,
    QuadraticDistribution,
    SignDistribution,
    gen_linear_instance,
    gen_quadratic_instance,
    load_dataset,
    make_rng,
    save_dataset,
    spawn_rngs,
)
from dp_sco_toolkit.losses.evaluation import (
    PopulationEstimate,
    empirical_loss,
    population_excess_estimate,
    population_loss_estimate,
)
from dp_sco_toolkit.losses.families import (
    AbsL1Loss,
    EntropicDemoLoss,
    LinearLoss,
    LossFamily,
    QuadraticLoss,
    RegularizedLoss,
    grad,
)

__all__ = [
    "AbsL1Loss",
    "DataPoint",
    "Dataset",
    "Distribution",
    "EntropicDemoLoss",
    "LinearDistribution",
    "LinearLoss",
    "LossFamily",
    "PopulationEstimate",
    "QuadraticDistribution",
    "QuadraticLoss",
    "RegularizedLoss",
    "SignDistribution",
    "empirical_loss",
    "population_excess_estimate",
    "gen_linear_instance",
    "gen_quadratic_instance",
    "grad",
    "load_dataset",
    "make_rng",
    "population_loss_estimate",
    "save_dataset",
    "spawn_rngs",
]
