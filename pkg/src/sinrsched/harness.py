"""Experiment orchestration: topologies, runs, audits, sweeps, CSV output.

The default profile is desk-scale (100 nodes on an 80x80 area, 2000
slots) so full runs finish in seconds; the larger 500-node/200x200 setup
remains a flag away. Every run is driven by one integer seed: topology,
initial queues, arrivals, and the randomized scheduler each get an
independent child stream, so identical configs reproduce byte-identical
CSV files.

Stability is judged numerically: the least-squares slope of total backlog
over a trailing window, compared against a threshold scaled by the link
count. A rate is supportable when every seed's run stays below the
threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, GenerationFailed
from .geometry import (
    Link,
    LinkPartition,
    NetworkTopology,
    PartitionFrame,
    PartitionParams,
    Point2D,
    partition_links,
    shift_for_slot,
)
from .interference import (
    REL_TOL,
    InterferenceBudget,
    PairwiseGains,
    PowerModel,
    Schedule,
    SINRParams,
    affectness,
    interference_at,
    validate_models,
)
from .mwisl import ENUM_CAP_DEFAULT, auto_partition
from .scheduler import SchedulerState, gms_step, localized_step, random_step
from .traffic import (
    ArrivalConfig,
    backlog_slope,
    initial_queues,
    sample_arrivals,
    total_backlog,
    update_queues,
)

__all__ = [
    "ExperimentConfig",
    "MetricsRecord",
    "AuditRow",
    "RunResult",
    "SweepRow",
    "SweepResult",
    "generate_network",
    "build_models",
    "resolve_partition",
    "seed_streams",
    "run_experiment",
    "audit_schedule",
    "sweep_rates",
    "emit_csv",
    "write_topology_csv",
    "load_topology_csv",
    "write_schedule_csv",
    "load_schedule_csv",
    "write_sweep_csv",
    "write_audit_csv",
    "RUN_HEADER",
    "SWEEP_HEADER",
    "AUDIT_HEADER",
]

REJECTION_BUDGET = 1000


def seed_streams(
    seed: int,
) -> Tuple[
    np.random.Generator, np.random.Generator, np.random.Generator, np.random.Generator
]:
    """Independent child streams for topology, queues, arrivals, scheduler."""
    root = np.random.SeedSequence(seed)
    t, q, a, g = root.spawn(4)
    return (
        np.random.default_rng(t),
        np.random.default_rng(q),
        np.random.default_rng(a),
        np.random.default_rng(g),
    )


RUN_HEADER = [
    "slot",
    "total_backlog",
    "active_links",
    "mean_I_out",
    "max_inside_affectness",
    "max_total_affectness",
]
SWEEP_HEADER = ["rate", "seed", "final_backlog", "slope", "stable"]
AUDIT_HEADER = [
    "slot",
    "link_id",
    "I_out",
    "eps_Imax",
    "inside_affectness",
    "total_affectness",
    "Imax_l",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs. epsilon/K default per power mode to the
    best-observed settings (linear: 0.8 with K=6; uniform: 0.9 with K=9)."""

    nodes: int = 100
    area: float = 80.0
    rmin: float = 1.0
    rmax: float = 5.0
    power: str = "linear"
    c: float = 0.2
    beta: float = 1.0
    power_max: float = 1.0
    kappa: float = 3.0
    sigma: float = 1.0
    eta: float = 1.0
    xi: float = 1e-4
    epsilon: Optional[float] = None
    K: Optional[int] = None
    M: Union[int, str] = 1  # cell count, or "auto"
    algo: str = "ds"
    slots: int = 2000
    rate: float = 0.1
    a_max: int = 50
    seed: int = 0
    audit: bool = False
    enum_cap: int = ENUM_CAP_DEFAULT

    def __post_init__(self) -> None:
        if self.nodes < 2 or self.nodes % 2:
            raise ConfigError(f"node count must be even and >= 2, got {self.nodes}")
        if self.algo not in ("ds", "gms", "ra"):
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if self.power not in ("linear", "uniform"):
            raise ConfigError(f"unknown power setting {self.power!r}")
        if self.slots < 1:
            raise ConfigError(f"slot count must be >= 1, got {self.slots}")
        if isinstance(self.M, str) and self.M != "auto":
            raise ConfigError(f"margin must be an integer or 'auto', got {self.M!r}")
        eps = self.eps
        if not (0 < eps < 1):
            raise ConfigError(f"epsilon must lie in (0, 1), got {eps}")

    @property
    def eps(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 0.8 if self.power == "linear" else 0.9

    @property
    def k_cells(self) -> Optional[int]:
        if self.K is not None:
            return self.K
        if self.M == "auto":
            return None  # derived together with the margin
        return 6 if self.power == "linear" else 9


@dataclass(frozen=True)
class MetricsRecord:
    slot: int
    total_backlog: int
    active_links: int
    mean_I_out: Optional[float] = None
    max_inside_affectness: Optional[float] = None
    max_total_affectness: Optional[float] = None


@dataclass(frozen=True)
class AuditRow:
    slot: int
    link_id: int
    I_out: float
    eps_Imax: float
    inside_affectness: float
    total_affectness: float
    Imax_l: float


@dataclass
class RunResult:
    records: List[MetricsRecord]
    schedules: List[Schedule]
    net: NetworkTopology
    params: Optional[PartitionParams]
    violations: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class SweepRow:
    rate: float
    seed: int
    final_backlog: int
    slope: float
    stable: bool


@dataclass
class SweepResult:
    rows: List[SweepRow]
    supportable_rate: Optional[float]
    anomalies: List[str] = field(default_factory=list)
    # per-rate (mean, max) of final backlog across seeds
    backlog_stats: Dict[float, Tuple[float, int]] = field(default_factory=dict)


def _alone_schedulable(length: float, cfg: ExperimentConfig) -> bool:
    power = cfg.c * length**cfg.beta if cfg.power == "linear" else cfg.power_max
    return power * cfg.eta * length ** (-cfg.kappa) > cfg.sigma * cfg.xi


def generate_network(rng: np.random.Generator, cfg: ExperimentConfig) -> NetworkTopology:
    """Senders uniform in the area square, each receiver uniform in the
    annulus [rmin, rmax] around its sender (the uniform-disk draw
    conditioned on the length bounds), re-drawn until the link can meet
    the SINR threshold on its own."""
    m = cfg.nodes // 2
    sender_xy = rng.uniform(0.0, cfg.area, (m, 2))
    senders = [Point2D(float(x), float(y)) for x, y in sender_xy]
    receivers: List[Point2D] = []
    for s in senders:
        for _ in range(REJECTION_BUDGET):
            radius = math.sqrt(rng.uniform(cfg.rmin**2, cfg.rmax**2))
            theta = rng.uniform(0.0, 2 * math.pi)
            if _alone_schedulable(radius, cfg):
                receivers.append(
                    Point2D(s.x + radius * math.cos(theta), s.y + radius * math.sin(theta))
                )
                break
        else:
            raise GenerationFailed(
                "could not draw a schedulable link; parameters leave no room "
                f"inside [{cfg.rmin}, {cfg.rmax}]"
            )
    links = tuple(Link(i, senders[i], receivers[i]) for i in range(m))
    lengths = [l.length for l in links]
    return NetworkTopology(
        nodes=tuple(senders) + tuple(receivers),
        links=links,
        r=min(lengths),
        R=max(lengths),
    )


def build_models(net: NetworkTopology, cfg: ExperimentConfig) -> Tuple[SINRParams, PowerModel]:
    sp = SINRParams(
        eta=cfg.eta, kappa=cfg.kappa, sigma=cfg.sigma, xi=cfg.xi, r=net.r, R=net.R
    )
    if cfg.power == "linear":
        pm = PowerModel.linear(cfg.c, cfg.beta, cfg.power_max)
    else:
        pm = PowerModel.uniform(cfg.power_max)
    validate_models(sp, pm)
    return sp, pm


def resolve_partition(
    sp: SINRParams, pm: PowerModel, cfg: ExperimentConfig
) -> PartitionParams:
    """Fix (K, M) for a run: explicit margin, or derived from the bound
    calculators when M='auto' (deriving K as well if it was omitted)."""
    if cfg.M == "auto":
        K, report = auto_partition(sp, pm, cfg.eps, cfg.k_cells)
        return PartitionParams(d=sp.R, K=K, M=report.margin_M)
    K = cfg.k_cells
    assert K is not None
    return PartitionParams(d=sp.R, K=K, M=int(cfg.M))


def audit_schedule(
    net: NetworkTopology,
    schedule: Schedule,
    partition: Optional[LinkPartition],
    pm: PowerModel,
    sp: SINRParams,
    budget: InterferenceBudget,
    slot: int = 0,
) -> Tuple[List[AuditRow], List[str]]:
    """Independent per-link interference audit of one slot's schedule.

    Recomputes interference and affectness from coordinates with the
    scalar reference functions. With a partition, splits each link's
    interference into inside (same block) and outside parts and checks
    the outside power against epsilon*I_max and the inside affectness
    against 1-epsilon; without one, the whole network counts as inside.

    Violations carry a kind prefix. "feasibility:" (total affectness
    above 1, i.e. the SINR constraint) is always a hard failure. The
    "outside-bound:"/"inside-bound:" budget checks are guaranteed only
    when the margin comes from the bound calculators; at practical
    hand-picked margins they are empirical observations.
    """
    block_of: Dict[int, Tuple[int, int]] = {}
    if partition is not None:
        for key, block in partition.blocks.items():
            for lid in block.y:
                block_of[lid] = key
    eps_imax = budget.epsilon * budget.I_max
    inside_limit = (1 - budget.epsilon) * (1 + REL_TOL)
    rows: List[AuditRow] = []
    violations: List[str] = []
    for lid in schedule:
        l = net.link(lid)
        key = block_of.get(lid)
        if partition is not None and key is not None:
            same = partition.blocks[key].y
            inside = Schedule.of((schedule.active & same) - {lid})
            outside = Schedule.of(schedule.active - same)
        else:
            inside = schedule.without(lid)
            outside = Schedule.of()
        i_out = interference_at(l, outside, net, pm, sp)
        inside_aff = affectness(l, inside, net, pm, sp)
        total_aff = affectness(l, schedule.without(lid), net, pm, sp)
        rows.append(
            AuditRow(
                slot=slot,
                link_id=lid,
                I_out=i_out,
                eps_Imax=eps_imax,
                inside_affectness=inside_aff,
                total_affectness=total_aff,
                Imax_l=budget.I_max_l[lid],
            )
        )
        if total_aff > 1 + REL_TOL:
            violations.append(
                f"feasibility: slot {slot} link {lid}: total affectness "
                f"{total_aff:.6g} > 1"
            )
        if partition is not None and key is not None:
            if i_out > eps_imax * (1 + REL_TOL):
                violations.append(
                    f"outside-bound: slot {slot} link {lid}: outside interference "
                    f"{i_out:.6g} > eps*I_max {eps_imax:.6g}"
                )
            if inside_aff > inside_limit:
                violations.append(
                    f"inside-bound: slot {slot} link {lid}: inside affectness "
                    f"{inside_aff:.6g} > 1-eps {1 - budget.epsilon:.6g}"
                )
    return rows, violations


def run_experiment(
    cfg: ExperimentConfig, net: Optional[NetworkTopology] = None
) -> RunResult:
    """Full slot loop for one (config, seed): schedule, audit, arrive, drain.

    A pre-built topology bypasses generation; otherwise one is drawn from
    the seed's topology stream.
    """
    topo_rng, queue_rng, arrival_rng, algo_rng = seed_streams(cfg.seed)
    if net is None:
        net = generate_network(topo_rng, cfg)
    sp, pm = build_models(net, cfg)
    gains = PairwiseGains(net, pm, sp)
    params = resolve_partition(sp, pm, cfg) if cfg.algo == "ds" else None
    budget = (
        InterferenceBudget.from_network(net, pm, sp, cfg.eps) if cfg.audit else None
    )
    queues = initial_queues(queue_rng, net.n_links)
    arrivals_cfg = ArrivalConfig(lam=cfg.rate, a_max=cfg.a_max, seed=cfg.seed)
    state = (
        SchedulerState(Schedule.of(), 0, params, cfg.eps) if params is not None else None
    )

    records: List[MetricsRecord] = []
    schedules: List[Schedule] = []
    violations: List[str] = []
    for t in range(cfg.slots):
        partition = None
        if cfg.algo == "ds":
            assert params is not None and state is not None
            frame = PartitionFrame(params, *shift_for_slot(t, params.K))
            decision = localized_step(
                net, queues, state, frame, pm, sp, enum_cap=cfg.enum_cap
            )
            schedule = decision.schedule
            if cfg.audit:
                partition = partition_links(net, frame)
            state = SchedulerState(schedule, t + 1, params, cfg.eps)
        elif cfg.algo == "gms":
            schedule = gms_step(net, queues, pm, sp, gains)
        else:
            schedule = random_step(net, queues, algo_rng, pm, sp, gains)

        mean_i_out = max_inside = max_total = None
        if cfg.audit:
            assert budget is not None
            rows, viol = audit_schedule(net, schedule, partition, pm, sp, budget, t)
            violations.extend(viol)
            if rows:
                mean_i_out = float(np.mean([row.I_out for row in rows]))
                max_inside = max(row.inside_affectness for row in rows)
                max_total = max(row.total_affectness for row in rows)
            else:
                mean_i_out = max_inside = max_total = 0.0

        arrivals = sample_arrivals(arrivals_cfg, arrival_rng, net.n_links)
        queues = update_queues(queues, schedule, arrivals)
        schedules.append(schedule)
        records.append(
            MetricsRecord(
                slot=t,
                total_backlog=total_backlog(queues),
                active_links=len(schedule),
                mean_I_out=mean_i_out,
                max_inside_affectness=max_inside,
                max_total_affectness=max_total,
            )
        )
    return RunResult(
        records=records,
        schedules=schedules,
        net=net,
        params=params,
        violations=violations,
    )


def sweep_rates(
    cfg: ExperimentConfig,
    rates: Sequence[float],
    seeds: int = 3,
    window_frac: float = 0.4,
    slope_threshold: Optional[float] = None,
    net: Optional[NetworkTopology] = None,
) -> SweepResult:
    """One run per (rate, seed); a rate is supportable when every seed's
    trailing-window backlog slope stays under the threshold (default
    0.05 packets/slot per link)."""
    if list(rates) != sorted(rates):
        raise ConfigError("rates must be sorted ascending")
    rows: List[SweepRow] = []
    stable_by_rate: Dict[float, bool] = {}
    for rate in rates:
        all_stable = True
        for i in range(seeds):
            run_cfg = replace(cfg, rate=rate, seed=cfg.seed + i)
            result = run_experiment(run_cfg, net=net)
            series = [rec.total_backlog for rec in result.records]
            window = max(2, int(len(series) * window_frac))
            slope = backlog_slope(series, window)
            threshold = (
                slope_threshold
                if slope_threshold is not None
                else 0.05 * result.net.n_links
            )
            stable = slope < threshold
            all_stable &= stable
            rows.append(
                SweepRow(
                    rate=rate,
                    seed=run_cfg.seed,
                    final_backlog=series[-1],
                    slope=slope,
                    stable=stable,
                )
            )
        stable_by_rate[rate] = all_stable
    supportable = None
    anomalies = []
    for rate in rates:
        if stable_by_rate[rate]:
            supportable = rate
    for lo, hi in zip(rates, rates[1:]):
        if not stable_by_rate[lo] and stable_by_rate[hi]:
            anomalies.append(
                f"rate {lo} unstable while higher rate {hi} is stable"
            )
    stats = {}
    for rate in rates:
        finals = [row.final_backlog for row in rows if row.rate == rate]
        stats[rate] = (float(np.mean(finals)), max(finals))
    return SweepResult(
        rows=rows,
        supportable_rate=supportable,
        anomalies=anomalies,
        backlog_stats=stats,
    )


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(path: str, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def emit_csv(records: Sequence[MetricsRecord], path: str) -> None:
    """Per-slot run metrics; empty record lists still get the header."""
    _write_rows(
        path,
        RUN_HEADER,
        [
            (
                rec.slot,
                rec.total_backlog,
                rec.active_links,
                rec.mean_I_out,
                rec.max_inside_affectness,
                rec.max_total_affectness,
            )
            for rec in records
        ],
    )


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> None:
    _write_rows(
        path,
        SWEEP_HEADER,
        [(row.rate, row.seed, row.final_backlog, row.slope, row.stable) for row in rows],
    )


def write_audit_csv(rows: Sequence[AuditRow], path: str) -> None:
    _write_rows(
        path,
        AUDIT_HEADER,
        [
            (
                row.slot,
                row.link_id,
                row.I_out,
                row.eps_Imax,
                row.inside_affectness,
                row.total_affectness,
                row.Imax_l,
            )
            for row in rows
        ],
    )


def write_topology_csv(net: NetworkTopology, path: str) -> None:
    """Node table with sender/receiver pairing; senders first, in link order."""
    m = len(net.links)
    rows = []
    for i, l in enumerate(net.links):
        rows.append((i, l.sender.x, l.sender.y, "sender", m + i))
    for i, l in enumerate(net.links):
        rows.append((m + i, l.receiver.x, l.receiver.y, "receiver", i))
    _write_rows(path, ["node_id", "x", "y", "role", "peer_id"], rows)


def load_topology_csv(path: str) -> NetworkTopology:
    """Rebuild a topology; link ids follow ascending sender node id."""
    nodes: Dict[int, Point2D] = {}
    roles: Dict[int, str] = {}
    peers: Dict[int, int] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"node_id", "x", "y", "role", "peer_id"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigError(f"topology file {path} lacks the expected header")
        for row in reader:
            nid = int(row["node_id"])
            nodes[nid] = Point2D(float(row["x"]), float(row["y"]))
            roles[nid] = row["role"]
            peers[nid] = int(row["peer_id"])
    senders = sorted(nid for nid, role in roles.items() if role == "sender")
    if not senders:
        raise ConfigError(f"topology file {path} contains no sender rows")
    links = []
    for link_id, nid in enumerate(senders):
        peer = peers[nid]
        if roles.get(peer) != "receiver":
            raise ConfigError(f"sender {nid} pairs with non-receiver {peer}")
        links.append(Link(link_id, nodes[nid], nodes[peer]))
    lengths = [l.length for l in links]
    ordered = [nodes[nid] for nid in sorted(nodes)]
    return NetworkTopology(
        nodes=tuple(ordered), links=tuple(links), r=min(lengths), R=max(lengths)
    )


def write_schedule_csv(schedules: Sequence[Schedule], path: str) -> None:
    """Per-slot active sets, one (slot, link_id) row per active link."""
    rows = []
    for t, s in enumerate(schedules):
        for lid in s:
            rows.append((t, lid))
    _write_rows(path, ["slot", "link_id"], rows)


def load_schedule_csv(path: str) -> List[Tuple[int, Schedule]]:
    by_slot: Dict[int, set] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"slot", "link_id"}.issubset(reader.fieldnames):
            raise ConfigError(f"schedule file {path} lacks the expected header")
        for row in reader:
            by_slot.setdefault(int(row["slot"]), set()).add(int(row["link_id"]))
    return [(t, Schedule.of(by_slot[t])) for t in sorted(by_slot)]
