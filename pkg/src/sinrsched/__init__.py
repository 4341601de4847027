"""Time-slotted wireless link scheduling under the SINR interference model.

Library layout:
  geometry     plane partitioning, shifting frames, link-to-block assignment
  interference SINR/affectness arithmetic, p-signal sets, budgets
  mwisl        local max-weight solvers and size/margin bound calculators
  scheduler    pick-and-compare, greedy, and randomized per-slot algorithms
  traffic      Poisson arrivals and queue dynamics
  harness      topology generation, runs, audits, rate sweeps, CSV output
  plotting     optional PNG reports rendered beside the CSVs
  cli          the ``sinrsched`` command
"""

from .geometry import (
    CellIndex,
    Link,
    LinkPartition,
    NetworkTopology,
    PartitionFrame,
    PartitionParams,
    Point2D,
    cell_of,
    partition_links,
    removed_strip_appearances,
    shift_for_slot,
)
from .interference import (
    InterferenceBudget,
    PairwiseGains,
    PowerModel,
    Schedule,
    SINRParams,
    affectness,
    interference_at,
    is_feasible,
    is_p_signal,
    max_tolerable_interference,
    network_I_max,
    refine_to_p_signal,
    relative_interference,
    sinr_of,
    transmit_power,
)
from .mwisl import (
    BoundReport,
    LocalInstance,
    brute_force_oracle,
    enumerate_mwisl,
    optsize_bound_linear,
    optsize_bound_uniform,
    separation_margin_linear,
    separation_margin_uniform,
    shortest_first_isl,
    weight_class_mwisl,
)
from .scheduler import SchedulerState, SlotDecision, gms_step, localized_step, random_step, weight_of
from .traffic import (
    ArrivalConfig,
    QueueState,
    backlog_slope,
    sample_arrivals,
    total_backlog,
    update_queues,
)
from .harness import (
    ExperimentConfig,
    MetricsRecord,
    audit_schedule,
    emit_csv,
    generate_network,
    run_experiment,
    sweep_rates,
)

__version__ = "0.1.0"
