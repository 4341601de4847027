"""Plane partitioning for localized scheduling.

The plane is tiled into square cells of side ``d`` (the longest link
length). A frame groups cells into K x K blocks ("super squares"), each
with an inner core ("sub-square") inset by M cells per side. The frame
origin shifts by whole cells from slot to slot so that, over K*K slots,
every (a, b) offset occurs exactly once and every link periodically lands
inside a core.

Cells are half-open: cell (i, j) of a frame covers
[a*d + i*d, a*d + (i+1)*d) x [b*d + j*d, b*d + (j+1)*d), so each point
belongs to exactly one cell of every frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, NamedTuple, Tuple

from .errors import ConfigError

__all__ = [
    "Point2D",
    "Link",
    "NetworkTopology",
    "PartitionParams",
    "PartitionFrame",
    "CellIndex",
    "BlockLinks",
    "LinkPartition",
    "cell_of",
    "shift_for_slot",
    "partition_links",
    "removed_strip_appearances",
    "removed_region_appearances",
]


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Link:
    """Directed communication request from sender to receiver."""

    id: int
    sender: Point2D
    receiver: Point2D
    length: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "length", self.sender.distance_to(self.receiver))


@dataclass(frozen=True)
class NetworkTopology:
    """Immutable node/link set with its shortest and longest link lengths."""

    nodes: Tuple[Point2D, ...]
    links: Tuple[Link, ...]
    r: float
    R: float

    def __post_init__(self) -> None:
        if not (0 < self.r <= self.R):
            raise ConfigError(f"need 0 < r <= R, got r={self.r}, R={self.R}")
        ids = [l.id for l in self.links]
        if sorted(ids) != list(range(len(self.links))):
            raise ConfigError("link ids must be unique and dense 0..|E|-1")
        # Allow a hair of float slack: r/R may themselves be derived lengths.
        lo, hi = self.r * (1 - 1e-12), self.R * (1 + 1e-12)
        for l in self.links:
            if not (lo <= l.length <= hi):
                raise ConfigError(
                    f"link {l.id} length {l.length} outside [{self.r}, {self.R}]"
                )

    @property
    def n_links(self) -> int:
        return len(self.links)

    def link(self, link_id: int) -> Link:
        return self.links[link_id]


@dataclass(frozen=True)
class PartitionParams:
    """Grid constants: cell side d, block side K (cells), margin M (cells)."""

    d: float
    K: int
    M: int

    def __post_init__(self) -> None:
        if self.d <= 0:
            raise ConfigError(f"cell side must be positive, got {self.d}")
        if self.M < 1:
            raise ConfigError(f"margin must be >= 1 cell, got {self.M}")
        if self.K <= 2 * self.M:
            raise ConfigError(f"need K > 2M, got K={self.K}, M={self.M}")

    @property
    def J(self) -> int:
        """Core side in cells (K = 2M + J)."""
        return self.K - 2 * self.M


@dataclass(frozen=True)
class PartitionFrame:
    """One shifted grid: offsets a, b in whole cells, each in [0, K)."""

    params: PartitionParams
    a: int
    b: int

    def __post_init__(self) -> None:
        K = self.params.K
        if not (0 <= self.a < K and 0 <= self.b < K):
            raise ConfigError(f"shift ({self.a}, {self.b}) outside [0, {K})")


class CellIndex(NamedTuple):
    i: int
    j: int


class BlockLinks(NamedTuple):
    """Per-block link-id sets: y = whole block, core = inner sub-square."""

    y: FrozenSet[int]
    core: FrozenSet[int]


@dataclass(frozen=True)
class LinkPartition:
    """Assignment of a topology's links to one frame's blocks.

    ``removed`` holds every link that belongs to no core: links whose
    endpoints straddle two blocks, plus links touching the M-cell margin.
    Such links get no fresh local computation this slot.
    """

    blocks: Dict[Tuple[int, int], BlockLinks]
    removed: FrozenSet[int]


def cell_of(p: Point2D, frame: PartitionFrame) -> CellIndex:
    """Cell of ``p`` relative to the frame origin (a*d, b*d).

    Half-open convention: a point on a boundary belongs to the cell whose
    lower-left corner it is.
    """
    d = frame.params.d
    return CellIndex(
        math.floor((p.x - frame.a * d) / d),
        math.floor((p.y - frame.b * d) / d),
    )


def shift_for_slot(t: int, K: int) -> Tuple[int, int]:
    """Frame offsets for slot ``t``: a advances every slot, b once per wrap.

    Equivalent to starting from (0, 0) and incrementing b exactly in the
    slots where a returns to 0; visits all K*K offset pairs once per K*K
    consecutive slots.
    """
    if K < 3:
        raise ConfigError(f"need K >= 3, got {K}")
    if t < 0:
        raise ConfigError(f"slot index must be >= 0, got {t}")
    return t % K, (t // K) % K


def _block_and_core(cell: CellIndex, K: int, M: int) -> Tuple[Tuple[int, int], bool]:
    bi, bj = cell.i // K, cell.j // K
    ui, uj = cell.i - bi * K, cell.j - bj * K
    in_core = M <= ui < K - M and M <= uj < K - M
    return (bi, bj), in_core


def partition_links(net: NetworkTopology, frame: PartitionFrame) -> LinkPartition:
    """Split links into per-block (Y, core) sets plus the removed remainder."""
    K, M = frame.params.K, frame.params.M
    ys: Dict[Tuple[int, int], set] = {}
    cores: Dict[Tuple[int, int], set] = {}
    removed = set()
    for l in net.links:
        b_s, core_s = _block_and_core(cell_of(l.sender, frame), K, M)
        b_r, core_r = _block_and_core(cell_of(l.receiver, frame), K, M)
        if b_s == b_r:
            ys.setdefault(b_s, set()).add(l.id)
            if core_s and core_r:
                cores.setdefault(b_s, set()).add(l.id)
                continue
        removed.add(l.id)
    blocks = {
        key: BlockLinks(frozenset(ys[key]), frozenset(cores.get(key, frozenset())))
        for key in ys
    }
    return LinkPartition(blocks=blocks, removed=frozenset(removed))


def removed_strip_appearances(cell: CellIndex, K: int, M: int) -> int:
    """Frames (of all K*K) that place ``cell`` in a margin strip.

    Counts strips of one orientation: the vertical strips of width 2M
    centred on block boundaries. The horizontal count is identical by
    symmetry and each is exactly 2*K*M; the union of both orientations is
    larger (see removed_region_appearances) because corner frames would be
    double-counted.
    """
    if not (0 < 2 * M < K):
        raise ConfigError(f"need 0 < 2M < K, got K={K}, M={M}")
    count = 0
    for a in range(K):
        u = (cell.i - a) % K
        if u < M or u >= K - M:
            count += K  # any of the K vertical offsets
    return count


def removed_region_appearances(cell: CellIndex, K: int, M: int) -> int:
    """Frames that place ``cell`` anywhere outside every core (either axis)."""
    if not (0 < 2 * M < K):
        raise ConfigError(f"need 0 < 2M < K, got K={K}, M={M}")
    count = 0
    for a in range(K):
        u = (cell.i - a) % K
        for b in range(K):
            v = (cell.j - b) % K
            if u < M or u >= K - M or v < M or v >= K - M:
                count += 1
    return count
