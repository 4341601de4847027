"""SINR arithmetic under the physical interference model.

A transmission on link l succeeds when

    signal_l / (interference_l + noise) >= sigma

with signal_l = P_l * eta * len_l**(-kappa) and interference summed over
all concurrent transmitters. Two power assignments are supported: linear
(P = c * len**beta, capped by the maximum power) and uniform (always the
maximum power).

Affectness rescales the interference a link receives so that the value
1.0 sits exactly at the SINR threshold; a set is a p-signal set when every
member's affectness from the rest stays at or below 1/p. A feasible
schedule is exactly a 1-signal set.

Comparison conventions (all relative, REL_TOL = 1e-9):
  * ``is_feasible`` is conservative: SINR must clear sigma by REL_TOL, so
    knife-edge ties count as infeasible. Audits that accept emitted
    schedules pass ``margin=-REL_TOL`` to get the forgiving direction.
  * Affectness-threshold checks (``is_p_signal``, the solvers) are
    inclusive: values within REL_TOL above the limit still pass.
Both conventions make verdicts stable across summation orders; sums are
always accumulated in ascending link-id order for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DegenerateInstance
from .geometry import Link, NetworkTopology

__all__ = [
    "REL_TOL",
    "SINRParams",
    "PowerModel",
    "InterferenceBudget",
    "Schedule",
    "PairwiseGains",
    "transmit_power",
    "interference_at",
    "sinr_of",
    "is_feasible",
    "relative_interference",
    "affectness",
    "is_p_signal",
    "refine_to_p_signal",
    "max_tolerable_interference",
    "network_I_max",
    "max_transmission_radius",
    "validate_models",
]

REL_TOL = 1e-9


@dataclass(frozen=True)
class SINRParams:
    """Physical constants: loss factor, path-loss exponent, SINR threshold,
    ambient noise, and the shortest/longest link lengths."""

    eta: float
    kappa: float
    sigma: float
    xi: float
    r: float
    R: float

    def __post_init__(self) -> None:
        if self.kappa <= 2:
            raise ConfigError(f"path-loss exponent must exceed 2, got {self.kappa}")
        if self.sigma <= 0:
            raise ConfigError(f"SINR threshold must be positive, got {self.sigma}")
        if self.xi < 0:
            raise ConfigError(f"noise must be nonnegative, got {self.xi}")
        if not (0 < self.r <= self.R):
            raise ConfigError(f"need 0 < r <= R, got r={self.r}, R={self.R}")
        if self.eta <= 0:
            raise ConfigError(f"loss factor must be positive, got {self.eta}")
        # Path gain never exceeds 1, i.e. eta * r**(-kappa) <= 1.
        if self.eta * self.r ** (-self.kappa) > 1 + 1e-12:
            raise ConfigError(
                f"path gain eta*r^-kappa = {self.eta * self.r ** (-self.kappa):.6g} "
                "exceeds 1; lower eta or raise the minimum link length"
            )


@dataclass(frozen=True)
class PowerModel:
    """Transmit-power assignment: 'linear' (c * len**beta) or 'uniform' (P)."""

    mode: str
    P: float
    c: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("linear", "uniform"):
            raise ConfigError(f"unknown power mode {self.mode!r}")
        if self.P <= 0:
            raise ConfigError(f"maximum power must be positive, got {self.P}")
        if self.mode == "linear":
            if self.c <= 0:
                raise ConfigError(f"linear coefficient must be positive, got {self.c}")
            if self.beta <= 0:
                raise ConfigError(f"linear exponent must be positive, got {self.beta}")

    @classmethod
    def linear(cls, c: float, beta: float, P: float) -> "PowerModel":
        return cls(mode="linear", P=P, c=c, beta=beta)

    @classmethod
    def uniform(cls, P: float) -> "PowerModel":
        return cls(mode="uniform", P=P)


def max_transmission_radius(pm: PowerModel, sp: SINRParams) -> float:
    """Longest length at which a link meets sigma with zero interference."""
    if sp.xi == 0:
        return math.inf
    return (sp.eta * pm.P / (sp.sigma * sp.xi)) ** (1 / sp.kappa)


def validate_models(sp: SINRParams, pm: PowerModel) -> None:
    """Cross-checks that need both parameter sets; raises ConfigError."""
    if pm.mode == "linear":
        if pm.beta >= sp.kappa:
            raise ConfigError(
                f"linear exponent beta={pm.beta} must stay below kappa={sp.kappa}"
            )
        if pm.c * sp.R**pm.beta > pm.P * (1 + 1e-12):
            raise ConfigError(
                f"longest-link power c*R^beta = {pm.c * sp.R ** pm.beta:.6g} "
                f"exceeds the maximum power {pm.P}"
            )
    radius = max_transmission_radius(pm, sp)
    if sp.R > radius * (1 + 1e-12):
        raise ConfigError(
            f"longest link length {sp.R} exceeds the maximum transmission "
            f"radius {radius:.6g}"
        )


@dataclass(frozen=True)
class Schedule:
    """Set of link ids active in one slot."""

    active: FrozenSet[int]

    @classmethod
    def of(cls, ids: Iterable[int] = ()) -> "Schedule":
        return cls(frozenset(ids))

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.active))

    def __len__(self) -> int:
        return len(self.active)

    def __contains__(self, link_id: int) -> bool:
        return link_id in self.active

    def without(self, link_id: int) -> "Schedule":
        return Schedule(self.active - {link_id})

    def union(self, other: "Schedule") -> "Schedule":
        return Schedule(self.active | other.active)


EMPTY_SCHEDULE = Schedule(frozenset())


def transmit_power(l: Link, pm: PowerModel) -> float:
    if pm.mode == "linear":
        return pm.c * l.length**pm.beta
    return pm.P


def _received(power: float, dist: float, sp: SINRParams) -> float:
    if dist == 0:
        return math.inf
    return power * sp.eta * dist ** (-sp.kappa)


def _signal(l: Link, pm: PowerModel, sp: SINRParams) -> float:
    return _received(transmit_power(l, pm), l.length, sp)


def interference_at(
    l: Link,
    others: Schedule,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
) -> float:
    """Cumulative interference at l's receiver from the given transmitters.

    Accumulated in ascending link-id order; l itself contributes nothing.
    """
    total = 0.0
    for lid in others:
        if lid == l.id:
            continue
        src = net.link(lid)
        total += _received(
            transmit_power(src, pm), src.sender.distance_to(l.receiver), sp
        )
    return total


def sinr_of(
    l: Link,
    others: Schedule,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
) -> float:
    denom = interference_at(l, others, net, pm, sp) + sp.xi
    if denom == 0:
        return math.inf
    return _signal(l, pm, sp) / denom


def is_feasible(
    s: Schedule,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
    *,
    margin: float = REL_TOL,
) -> bool:
    """True iff every active link clears the SINR threshold.

    The default positive margin rejects knife-edge ties; pass
    ``margin=-REL_TOL`` to accept anything within rounding of the
    threshold (the checker direction).
    """
    bar = sp.sigma * (1 + margin)
    for lid in s:
        if sinr_of(net.link(lid), s.without(lid), net, pm, sp) < bar:
            return False
    return True


def relative_interference(
    l_star: Link,
    l: Link,
    pm: PowerModel,
    sp: SINRParams,
) -> float:
    """Increase that l_star causes in the inverse SINR of l; zero for itself."""
    if l_star.id == l.id:
        return 0.0
    inc = _received(transmit_power(l_star, pm), l_star.sender.distance_to(l.receiver), sp)
    return inc / _signal(l, pm, sp)


def _noise_scale(l: Link, pm: PowerModel, sp: SINRParams) -> float:
    signal = _signal(l, pm, sp)
    if signal <= sp.sigma * sp.xi:
        raise DegenerateInstance(
            f"link {l.id} (length {l.length:.6g}) cannot meet the SINR "
            "threshold even without interference"
        )
    return sp.sigma / (1 - sp.sigma * sp.xi / signal)


def affectness(
    l: Link,
    s: Schedule,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
) -> float:
    """Interference l receives from s, normalized so 1.0 sits at the threshold."""
    scale = _noise_scale(l, pm, sp)
    total = 0.0
    for lid in s:
        total += relative_interference(net.link(lid), l, pm, sp)
    return scale * total


def is_p_signal(
    s: Schedule,
    p: float,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
) -> bool:
    """True iff every member's affectness from the rest is at most 1/p."""
    if p < 1:
        raise ConfigError(f"signal strength factor must be >= 1, got {p}")
    limit = (1 / p) * (1 + REL_TOL)
    for lid in s:
        if affectness(net.link(lid), s.without(lid), net, pm, sp) > limit:
            return False
    return True


def refine_to_p_signal(
    s: Schedule,
    p: float,
    p_prime: float,
    net: NetworkTopology,
    pm: PowerModel,
    sp: SINRParams,
    weights: Optional[Dict[int, float]] = None,
) -> List[Schedule]:
    """First-fit split of a p-signal set into p'-signal bins (p' > p).

    Links are placed in descending weight order (ties by id) so the
    heaviest bin fills early. Bins partition the input; the expected bin
    count is at most 4*(p'/p)**2.
    """
    if p_prime <= p:
        raise ConfigError(f"target strength {p_prime} must exceed current {p}")
    limit = (1 / p_prime) * (1 + REL_TOL)
    order = sorted(s.active, key=lambda lid: (-(weights or {}).get(lid, 0.0), lid))
    bins: List[List[int]] = []
    for lid in order:
        placed = False
        for b in bins:
            candidate = b + [lid]
            members = Schedule.of(candidate)
            if all(
                affectness(net.link(m), members.without(m), net, pm, sp) <= limit
                for m in candidate
            ):
                b.append(lid)
                placed = True
                break
        if not placed:
            bins.append([lid])
    return [Schedule.of(b) for b in bins]


def max_tolerable_interference(l: Link, pm: PowerModel, sp: SINRParams) -> float:
    """Largest interference under which l still meets sigma; must be positive."""
    value = _signal(l, pm, sp) / sp.sigma - sp.xi
    if value <= 0:
        raise ConfigError(
            f"link {l.id} (length {l.length:.6g}) is at or beyond the maximum "
            "transmission radius and can tolerate no interference"
        )
    return value


def network_I_max(net: NetworkTopology, pm: PowerModel, sp: SINRParams) -> float:
    """Tolerable interference of a longest (length-R) link: the network floor."""
    power = pm.c * sp.R**pm.beta if pm.mode == "linear" else pm.P
    value = power * sp.eta * sp.R ** (-sp.kappa) / sp.sigma - sp.xi
    if value <= 0:
        raise ConfigError(
            "longest links are at or beyond the maximum transmission radius; "
            "the network-wide interference budget is empty"
        )
    return value


@dataclass(frozen=True)
class InterferenceBudget:
    """Network floor I_max, per-link ceilings, and the inside/outside split."""

    I_max: float
    I_max_l: Tuple[float, ...]
    epsilon: float

    def __post_init__(self) -> None:
        if not (0 < self.epsilon < 1):
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @classmethod
    def from_network(
        cls,
        net: NetworkTopology,
        pm: PowerModel,
        sp: SINRParams,
        epsilon: float,
    ) -> "InterferenceBudget":
        per_link = tuple(max_tolerable_interference(l, pm, sp) for l in net.links)
        return cls(network_I_max(net, pm, sp), per_link, epsilon)


class PairwiseGains:
    """Precomputed power/gain arrays for a fixed topology.

    gain[i, j] is the interference link j's sender deposits at link i's
    receiver (diagonal zero). The schedulers' hot paths run on these
    arrays; the scalar functions above stay the reference implementation
    and audits recompute from coordinates on their own.
    """

    def __init__(self, net: NetworkTopology, pm: PowerModel, sp: SINRParams):
        self.net = net
        self.pm = pm
        self.sp = sp
        n = net.n_links
        sx = np.array([l.sender.x for l in net.links])
        sy = np.array([l.sender.y for l in net.links])
        rx = np.array([l.receiver.x for l in net.links])
        ry = np.array([l.receiver.y for l in net.links])
        lengths = np.hypot(sx - rx, sy - ry)
        if pm.mode == "linear":
            self.power = pm.c * lengths**pm.beta
        else:
            self.power = np.full(n, pm.P)
        self.signal = self.power * sp.eta * lengths ** (-sp.kappa)
        dist = np.hypot(sx[None, :] - rx[:, None], sy[None, :] - ry[:, None])
        with np.errstate(divide="ignore"):
            self.gain = self.power[None, :] * sp.eta * dist ** (-sp.kappa)
        np.fill_diagonal(self.gain, 0.0)
        self.n = n

    def feasible(self, ids: Sequence[int], *, margin: float = REL_TOL) -> bool:
        if len(ids) == 0:
            return True
        idx = np.fromiter(sorted(ids), dtype=int)
        interf = self.gain[np.ix_(idx, idx)].sum(axis=1)
        sinr = self.signal[idx] / (interf + self.sp.xi)
        return bool(np.all(sinr >= self.sp.sigma * (1 + margin)))

    def greedy_feasible_order(
        self, order: Sequence[int], *, margin: float = REL_TOL
    ) -> List[int]:
        """First-fit scan of ``order``: keep a link iff the whole current
        set stays feasible after adding it. Equivalent to re-running the
        scalar is_feasible on every prefix."""
        bar = self.sp.sigma * (1 + margin)
        chosen: List[int] = []
        interf = np.empty(0)
        for cand in order:
            if chosen:
                cand_interf = float(self.gain[cand, chosen].sum())
                grown = interf + self.gain[chosen, cand]
                ok = (
                    self.signal[cand] >= bar * (cand_interf + self.sp.xi)
                    and bool(np.all(self.signal[chosen] >= bar * (grown + self.sp.xi)))
                )
            else:
                cand_interf = 0.0
                grown = interf
                ok = self.signal[cand] >= bar * self.sp.xi
            if ok:
                interf = np.append(grown, cand_interf)
                chosen.append(cand)
        return chosen
