"""Pure equilibria of scheduling and congestion games with priority lists."""

from .construct import ClassTag, classify, construct
from .equilibria import (
    DynamicsPolicy,
    DynamicsTrace,
    NashCheck,
    best_response,
    enumerate_alpha_nash,
    enumerate_nash,
    find_nash,
    is_alpha_nash,
    is_nash,
    optimize_nash,
    potential_compare,
    run_dynamics,
    run_lazy_dynamics,
    search_nash,
)
from .io import parse_instance, serialize_instance
from .metrics import (
    InefficiencyReport,
    NoNE,
    Objective,
    check_bound,
    inefficiency,
    objective_value,
    social_optimum,
)
from .model import (
    BudgetExceededError,
    CongestionInstance,
    CostPolynomial,
    DomainError,
    GameError,
    GameInstance,
    InvalidReferenceError,
    Job,
    Machine,
    PartitionMatroid,
    Player,
    PriorityList,
    Profile,
    Resource,
    UniformMatroid,
    BasesMatroid,
    UnsupportedError,
    ValidationError,
    all_costs,
    cost_of,
    scheduling_instance,
)

__version__ = "0.1.0"
