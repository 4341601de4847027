"""Local max-weight independent-set-of-links solvers and bound calculators.

A local instance lives inside one partition core: links, their queue
weights, and an affectness budget (the threshold 1 - epsilon, leaving an
epsilon fraction of every link's interference tolerance for transmitters
outside the core). Two solvers produce candidate schedules:

  * exhaustive enumeration (linear power: the optimum size is bounded by
    a constant, so enumeration stays cheap);
  * weight-class search (uniform power): drop featherweight links, bucket
    the rest into doubling weight classes, solve each class
    shortest-link-first, and keep the heaviest class result.

The bound calculators turn the closed-form size/margin expressions into
integers: how many links a core can ever activate at once, and how many
margin cells keep cross-core interference below epsilon * I_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DegenerateInstance, InstanceTooLarge
from .geometry import Link
from .interference import (
    REL_TOL,
    PowerModel,
    Schedule,
    SINRParams,
    _noise_scale,
    relative_interference,
)

__all__ = [
    "LocalInstance",
    "BoundReport",
    "optsize_bound_linear",
    "separation_margin_linear",
    "optsize_bound_uniform",
    "separation_margin_uniform",
    "auto_partition",
    "enumerate_mwisl",
    "weight_class_mwisl",
    "shortest_first_isl",
    "brute_force_oracle",
]

ENUM_CAP_DEFAULT = 20
ORACLE_CAP = 15


@dataclass(frozen=True)
class LocalInstance:
    """Links of one core with their weights and the affectness budget."""

    links: Tuple[Link, ...]
    weights: Tuple[float, ...]
    threshold: float

    def __post_init__(self) -> None:
        if not (0 < self.threshold < 1):
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if len(self.links) != len(self.weights):
            raise ConfigError("links and weights must be parallel")
        if any(w < 0 for w in self.weights):
            raise ConfigError("weights must be nonnegative")


@dataclass(frozen=True)
class BoundReport:
    """Local optimum-size upper bound and the separation margin it implies."""

    opt_size_ub: int
    margin_M: int

    def __post_init__(self) -> None:
        if self.opt_size_ub < 1:
            raise ConfigError(f"size bound must be >= 1, got {self.opt_size_ub}")
        if self.margin_M < 1:
            raise ConfigError(f"margin must be >= 1, got {self.margin_M}")


def _budget_at_longest(pm: PowerModel, sp: SINRParams) -> float:
    power = pm.c * sp.R**pm.beta if pm.mode == "linear" else pm.P
    value = power * sp.eta * sp.R ** (-sp.kappa) / sp.sigma - sp.xi
    if value <= 0:
        raise ConfigError("length-R links can tolerate no interference")
    return value


def optsize_bound_linear(
    sp: SINRParams,
    pm: PowerModel,
    J: int,
    epsilon: float,
    noise_r_exponent: Optional[float] = None,
) -> int:
    """Upper bound on how many links a core of side J*R can activate at once
    (linear power).

    The noise term scales with r**(kappa - beta); pass ``noise_r_exponent``
    to evaluate the alternative beta - kappa form for comparison.
    """
    if pm.mode != "linear":
        raise ConfigError("linear-power bound requires the linear power model")
    if J < 1:
        raise ConfigError(f"core side must be >= 1 cell, got {J}")
    if not (0 < epsilon < 1):
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    exponent = sp.kappa - pm.beta if noise_r_exponent is None else noise_r_exponent
    bracket = 1 / sp.sigma - sp.xi * sp.r**exponent / (pm.c * sp.eta)
    if bracket <= 0:
        raise DegenerateInstance(
            "noise term exhausts the SINR budget: no link is schedulable"
        )
    value = (math.sqrt(2) * J * sp.R) ** sp.kappa / (1 - epsilon) * bracket
    return math.ceil(value) + 1


def separation_margin_linear(
    sp: SINRParams, pm: PowerModel, opt_ub: int, epsilon: float
) -> int:
    """Cells of separation that cap cross-core interference at epsilon*I_max
    (linear power)."""
    if sp.kappa <= 2:
        raise ConfigError("margin formula requires kappa > 2")
    if pm.mode != "linear":
        raise ConfigError("linear-power margin requires the linear power model")
    i_max = _budget_at_longest(pm, sp)
    value = (
        2 * math.pi * pm.c * sp.eta * sp.R ** (pm.beta - sp.kappa) * opt_ub
        / ((sp.kappa - 2) * epsilon * i_max)
    ) ** (1 / sp.kappa)
    return max(1, math.ceil(value))


def optsize_bound_uniform(sp: SINRParams, J: int) -> int:
    """Upper bound on a shortest-first core schedule's size (uniform power).

    Degenerates to 0 when r == R (all links the same length); callers must
    treat that as an unusable bound rather than patch it.
    """
    if J < 1:
        raise ConfigError(f"core side must be >= 1 cell, got {J}")
    value = (
        (math.sqrt(2) * J * sp.R / sp.r + 1) ** sp.kappa
        / sp.sigma
        * (1 - (sp.r / sp.R) ** sp.kappa)
    )
    return math.ceil(value)


def separation_margin_uniform(
    sp: SINRParams, P: float, x_ub: int, epsilon: float
) -> int:
    """Cells of separation that cap cross-core interference at epsilon*I_max
    (uniform power)."""
    if sp.kappa <= 2:
        raise ConfigError("margin formula requires kappa > 2")
    if x_ub <= 0:
        raise DegenerateInstance(
            "core size bound is 0 (equal-length network); no margin derivable"
        )
    i_max = P * sp.eta * sp.R ** (-sp.kappa) / sp.sigma - sp.xi
    if i_max <= 0:
        raise ConfigError("length-R links can tolerate no interference")
    value = (
        2 * math.pi * sp.eta * P * x_ub
        / ((sp.kappa - 2) * epsilon * i_max * sp.R**sp.kappa)
    ) ** (1 / sp.kappa)
    return max(1, math.ceil(value))


def _margin_requirement(sp: SINRParams, pm: PowerModel, J: int, epsilon: float) -> Tuple[int, int]:
    if pm.mode == "linear":
        bound = optsize_bound_linear(sp, pm, J, epsilon)
        return bound, separation_margin_linear(sp, pm, bound, epsilon)
    bound = optsize_bound_uniform(sp, J)
    return bound, separation_margin_uniform(sp, pm.P, bound, epsilon)


def auto_partition(
    sp: SINRParams, pm: PowerModel, epsilon: float, K: Optional[int] = None
) -> Tuple[int, BoundReport]:
    """Derive a margin from the bound calculators; optionally derive K too.

    With K given, returns the smallest margin M (largest core) whose
    separation requirement at core side J = K - 2M is met. With K omitted,
    uses the single-cell core J = 1, for which K = 2M + 1 always works.
    """
    if K is None:
        bound, m = _margin_requirement(sp, pm, 1, epsilon)
        return 2 * m + 1, BoundReport(bound, m)
    for m in range(1, (K - 1) // 2 + 1):
        bound, required = _margin_requirement(sp, pm, K - 2 * m, epsilon)
        if required <= m:
            return K, BoundReport(bound, m)
    raise ConfigError(
        f"K={K} admits no margin meeting the separation requirement; "
        "increase K or use an explicit margin"
    )


def _affectness_matrix(inst: LocalInstance, pm: PowerModel, sp: SINRParams) -> np.ndarray:
    """a[i, j]: affectness contribution of link j to link i (diagonal 0)."""
    n = len(inst.links)
    a = np.zeros((n, n))
    for i, li in enumerate(inst.links):
        scale = _noise_scale(li, pm, sp)
        for j, lj in enumerate(inst.links):
            if i != j:
                a[i, j] = scale * relative_interference(lj, li, pm, sp)
    return a


def _id_order(inst: LocalInstance) -> List[int]:
    return sorted(range(len(inst.links)), key=lambda k: inst.links[k].id)


def enumerate_mwisl(
    inst: LocalInstance,
    pm: PowerModel,
    sp: SINRParams,
    cap: int = ENUM_CAP_DEFAULT,
) -> Schedule:
    """Exhaustive max-weight search over affectness-feasible subsets.

    A subset qualifies when every member's affectness from the others stays
    within the instance threshold. Ties break toward the lexicographically
    smallest id set. Depth-first with two prunes, both exact: affectness
    only grows as links are added, and a branch whose remaining weight
    cannot beat the incumbent is dropped.
    """
    n = len(inst.links)
    if n > cap:
        raise InstanceTooLarge(f"{n} links exceeds the enumeration cap {cap}")
    if n == 0:
        return Schedule.of()
    order = _id_order(inst)
    ids = [inst.links[k].id for k in order]
    weights = [inst.weights[k] for k in order]
    a = _affectness_matrix(inst, pm, sp)[np.ix_(order, order)]
    limit = inst.threshold * (1 + REL_TOL)
    suffix = [0.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + weights[k]

    best_w = 0.0
    best_ids: Tuple[int, ...] = ()

    chosen: List[int] = []
    aff: List[float] = []  # affectness of chosen[i] within the chosen set

    def visit(k: int, w: float) -> None:
        nonlocal best_w, best_ids
        if w + suffix[k] < best_w:
            return
        if k == n:
            ids_tuple = tuple(ids[c] for c in chosen)
            if w > best_w or (w == best_w and ids_tuple < best_ids):
                best_w, best_ids = w, ids_tuple
            return
        cand_aff = sum(a[k][c] for c in chosen)
        if cand_aff <= limit and all(
            aff[i] + a[c][k] <= limit for i, c in enumerate(chosen)
        ):
            for i, c in enumerate(chosen):
                aff[i] += a[c][k]
            chosen.append(k)
            aff.append(cand_aff)
            visit(k + 1, w + weights[k])
            chosen.pop()
            aff.pop()
            for i, c in enumerate(chosen):
                aff[i] -= a[c][k]
        visit(k + 1, w)

    visit(0, 0.0)
    return Schedule.of(best_ids)


def shortest_first_isl(
    links: Sequence[Link],
    weights: Sequence[float],
    threshold: float,
    pm: PowerModel,
    sp: SINRParams,
) -> Schedule:
    """Greedy scan in nondecreasing length order (ties by id).

    A candidate joins iff afterwards every chosen link's affectness within
    the chosen set stays at most ``threshold``; the result is therefore a
    (1/threshold)-signal set and maximal for this scan order.
    """
    limit = threshold * (1 + REL_TOL)
    order = sorted(range(len(links)), key=lambda k: (links[k].length, links[k].id))
    scales = {k: _noise_scale(links[k], pm, sp) for k in order}
    chosen: List[int] = []
    aff: List[float] = []
    for k in order:
        cand = links[k]
        cand_aff = scales[k] * sum(
            relative_interference(links[c], cand, pm, sp) for c in chosen
        )
        if cand_aff > limit:
            continue
        deltas = [
            scales[c] * relative_interference(cand, links[c], pm, sp) for c in chosen
        ]
        if any(aff[i] + d > limit for i, d in enumerate(deltas)):
            continue
        for i, d in enumerate(deltas):
            aff[i] += d
        chosen.append(k)
        aff.append(cand_aff)
    return Schedule.of(links[k].id for k in chosen)


def _group_index(w: float, w_min: float, n_groups: int) -> int:
    i = 0
    while 2 ** (i + 1) * w_min <= w:
        i += 1
    return min(i, n_groups - 1)


def weight_class_mwisl(
    inst: LocalInstance,
    pm: PowerModel,
    sp: SINRParams,
) -> Schedule:
    """Two-phase weight-class solver (uniform power).

    Phase one drops every link whose weight is at most w_max/n; if that
    would drop everything (only possible at n=1), the heaviest link is
    kept. Phase two buckets survivors into doubling weight classes
    [2^i*w_min, 2^(i+1)*w_min), closing the top class so boundary weights
    join it, runs the shortest-first scan per class, and returns the
    heaviest class result.
    """
    n = len(inst.links)
    if n == 0:
        return Schedule.of()
    w_max = max(inst.weights)
    if w_max <= 0:
        return Schedule.of()
    survivors = [k for k in range(n) if inst.weights[k] > w_max / n]
    if not survivors:
        survivors = [
            min(
                (k for k in range(n) if inst.weights[k] == w_max),
                key=lambda k: inst.links[k].id,
            )
        ]
    w_min = min(inst.weights[k] for k in survivors)
    n_groups = 1
    while 2**n_groups * w_min < w_max:
        n_groups += 1
    groups: List[List[int]] = [[] for _ in range(n_groups)]
    for k in survivors:
        groups[_group_index(inst.weights[k], w_min, n_groups)].append(k)

    best: Optional[Schedule] = None
    best_w = -1.0
    for members in groups:
        if not members:
            continue
        result = shortest_first_isl(
            [inst.links[k] for k in members],
            [inst.weights[k] for k in members],
            inst.threshold,
            pm,
            sp,
        )
        by_id = {inst.links[k].id: inst.weights[k] for k in members}
        w = sum(by_id[lid] for lid in result)
        if w > best_w or (
            w == best_w
            and best is not None
            and tuple(sorted(result.active)) < tuple(sorted(best.active))
        ):
            best, best_w = result, w
    return best if best is not None else Schedule.of()


def brute_force_oracle(
    inst: LocalInstance,
    pm: PowerModel,
    sp: SINRParams,
) -> Tuple[Schedule, float]:
    """Flat scan of every subset; the reference optimum for solver tests.

    Checks each subset against the same affectness-threshold predicate the
    solvers use, but from a freshly built matrix and without any search
    shortcuts. Tie-break: lexicographically smallest id set.
    """
    n = len(inst.links)
    if n > ORACLE_CAP:
        raise InstanceTooLarge(f"{n} links exceeds the oracle cap {ORACLE_CAP}")
    if n == 0:
        return Schedule.of(), 0.0
    order = _id_order(inst)
    ids = np.array([inst.links[k].id for k in order])
    weights = np.array([inst.weights[k] for k in order])
    a = _affectness_matrix(inst, pm, sp)[np.ix_(order, order)]
    limit = inst.threshold * (1 + REL_TOL)

    best_w = 0.0
    best_ids: Tuple[int, ...] = ()
    for mask in range(2**n):
        sel = [k for k in range(n) if mask >> k & 1]
        if sel:
            if float(a[np.ix_(sel, sel)].sum(axis=1).max()) > limit:
                continue
            w = float(weights[sel].sum())
        else:
            w = 0.0
        ids_tuple = tuple(int(ids[k]) for k in sel)
        if w > best_w or (w == best_w and ids_tuple < best_ids):
            best_w, best_ids = w, ids_tuple
    return Schedule.of(best_ids), best_w
