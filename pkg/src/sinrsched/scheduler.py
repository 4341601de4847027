"""Per-slot schedule construction.

Three algorithms share the queue-weight objective:

  * pick-and-compare localized scheduling: partition the plane for the
    slot's frame, solve a fresh candidate set inside every core, and per
    block keep whichever of {previous block schedule, new candidate} has
    more queue weight (ties go to the new set). Previous-schedule links
    stranded outside every block are dropped for the slot.
  * greedy maximal scheduling (GMS): descending queue weight, add while
    the whole set stays feasible.
  * randomized maximal scheduling (RA): a seeded random permutation,
    first-fit feasible adds; one pass is maximal because interference
    only grows as links join.

Zero-weight links are never scheduled: serving them wastes a slot and
perturbs the interference audits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import InstanceTooLarge
from .geometry import NetworkTopology, PartitionFrame, PartitionParams, partition_links
from .interference import PairwiseGains, PowerModel, Schedule, SINRParams, is_feasible
from .mwisl import ENUM_CAP_DEFAULT, LocalInstance, enumerate_mwisl, weight_class_mwisl
from .traffic import QueueState

__all__ = [
    "SchedulerState",
    "SlotDecision",
    "localized_step",
    "weight_of",
    "gms_step",
    "random_step",
]


@dataclass(frozen=True)
class SchedulerState:
    """Carry-over between slots: last schedule, slot index, partition setup."""

    prev_schedule: Schedule
    slot: int
    partition: PartitionParams
    epsilon: float


@dataclass(frozen=True)
class SlotDecision:
    """One slot's outcome: the union schedule plus per-block bookkeeping.

    ``links_examined`` counts the backlogged core links handed to the
    local solvers this slot, a proxy for the per-slot computation the
    coordinators would perform.
    """

    schedule: Schedule
    per_block: Dict[Tuple[int, int], str]  # "kept_previous" | "adopted_new"
    new_candidates: Dict[Tuple[int, int], Schedule]
    solver_notes: Dict[Tuple[int, int], str]
    links_examined: int = 0


def weight_of(s: Schedule, queues: QueueState) -> float:
    return float(sum(queues.weight(lid) for lid in s))


def localized_step(
    net: NetworkTopology,
    queues: QueueState,
    state: SchedulerState,
    frame: PartitionFrame,
    pm: PowerModel,
    sp: SINRParams,
    enum_cap: int = ENUM_CAP_DEFAULT,
) -> SlotDecision:
    """One pick-and-compare slot over the given frame's blocks."""
    partition = partition_links(net, frame)
    threshold = 1 - state.epsilon
    chosen_ids: set = set()
    per_block: Dict[Tuple[int, int], str] = {}
    new_candidates: Dict[Tuple[int, int], Schedule] = {}
    solver_notes: Dict[Tuple[int, int], str] = {}
    examined = 0

    for key in sorted(partition.blocks):
        block = partition.blocks[key]
        backlogged = sorted(
            lid for lid in block.core if queues.weight(lid) > 0
        )
        examined += len(backlogged)
        inst = LocalInstance(
            links=tuple(net.link(lid) for lid in backlogged),
            weights=tuple(float(queues.weight(lid)) for lid in backlogged),
            threshold=threshold,
        )
        try:
            if pm.mode == "linear":
                candidate = enumerate_mwisl(inst, pm, sp, cap=enum_cap)
            else:
                candidate = weight_class_mwisl(inst, pm, sp)
        except InstanceTooLarge as exc:
            candidate = Schedule.of()
            solver_notes[key] = str(exc)
        new_candidates[key] = candidate

        previous = Schedule.of(state.prev_schedule.active & block.y)
        if weight_of(previous, queues) > weight_of(candidate, queues):
            per_block[key] = "kept_previous"
            chosen_ids |= previous.active
        else:
            per_block[key] = "adopted_new"
            chosen_ids |= candidate.active

    return SlotDecision(
        schedule=Schedule.of(chosen_ids),
        per_block=per_block,
        new_candidates=new_candidates,
        solver_notes=solver_notes,
        links_examined=examined,
    )


def gms_step(
    net: NetworkTopology,
    queues: QueueState,
    pm: PowerModel,
    sp: SINRParams,
    gains: Optional[PairwiseGains] = None,
) -> Schedule:
    """Greedy maximal schedule: heaviest queue first, feasibility-checked adds."""
    order = sorted(
        (lid for lid in range(net.n_links) if queues.weight(lid) > 0),
        key=lambda lid: (-queues.weight(lid), lid),
    )
    if gains is not None:
        return Schedule.of(gains.greedy_feasible_order(order))
    chosen: List[int] = []
    for cand in order:
        if is_feasible(Schedule.of(chosen + [cand]), net, pm, sp):
            chosen.append(cand)
    return Schedule.of(chosen)


def random_step(
    net: NetworkTopology,
    queues: QueueState,
    rng: np.random.Generator,
    pm: PowerModel,
    sp: SINRParams,
    gains: Optional[PairwiseGains] = None,
) -> Schedule:
    """Randomized maximal schedule: first-fit over a seeded permutation."""
    backlogged = [lid for lid in range(net.n_links) if queues.weight(lid) > 0]
    order = [backlogged[i] for i in rng.permutation(len(backlogged))]
    if gains is not None:
        return Schedule.of(gains.greedy_feasible_order(order))
    chosen: List[int] = []
    for cand in order:
        if is_feasible(Schedule.of(chosen + [cand]), net, pm, sp):
            chosen.append(cand)
    return Schedule.of(chosen)
