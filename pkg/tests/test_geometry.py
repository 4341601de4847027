import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sinrsched.errors import ConfigError
from sinrsched.geometry import (
    CellIndex,
    NetworkTopology,
    PartitionFrame,
    PartitionParams,
    Point2D,
    cell_of,
    partition_links,
    removed_region_appearances,
    removed_strip_appearances,
    shift_for_slot,
)

from conftest import mk_link, mk_net


def frame(d=1.0, K=4, M=1, a=0, b=0):
    return PartitionFrame(PartitionParams(d=d, K=K, M=M), a, b)


class TestCellOf:
    def test_identity_frame(self):
        assert cell_of(Point2D(0.5, 0.5), frame()) == (0, 0)

    def test_boundary_point_belongs_to_upper_cell(self):
        # half-open cells: x = 1.0 is the lower-left corner of column 1
        assert cell_of(Point2D(1.0, 0.0), frame()) == (1, 0)

    def test_shifted_frame(self):
        # hand evaluation: floor((0.5 - 1*1)/1) = -1
        assert cell_of(Point2D(0.5, 0.5), frame(K=4, a=1, b=0)) == (-1, 0)

    @given(
        x=st.floats(-50, 50),
        y=st.floats(-50, 50),
        a=st.integers(0, 3),
        b=st.integers(0, 3),
    )
    @settings(max_examples=200, deadline=None)
    def test_half_open_tiling(self, x, y, a, b):
        # membership up to rounding: a point within one ULP of a boundary
        # may land on either side, but always in exactly one cell
        f = frame(d=1.5, a=a, b=b)
        i, j = cell_of(Point2D(x, y), f)
        d = f.params.d
        tol = 1e-9 * d
        assert a * d + i * d - tol <= x < a * d + (i + 1) * d + tol
        assert b * d + j * d - tol <= y < b * d + (j + 1) * d + tol


class TestShiftForSlot:
    def test_slot_zero(self):
        assert shift_for_slot(0, 4) == (0, 0)

    def test_slot_one(self):
        assert shift_for_slot(1, 4) == (1, 0)

    def test_wrap_advances_vertical(self):
        # simulate forward from t=0: a wraps to 0 at t=4 and b steps
        assert shift_for_slot(4, 4) == (0, 1)

    def test_matches_iterative_update_rule(self):
        # oracle: the stateful rule "a_t = t mod K; b steps when a_t wraps to 0"
        for K in (3, 4, 5, 7):
            a, b = 0, 0
            for t in range(3 * K * K):
                if t > 0:
                    a = t % K
                    if a == 0:
                        b = (b + 1) % K
                assert shift_for_slot(t, K) == (a, b)

    @pytest.mark.parametrize("K", range(3, 11))
    def test_cycle_visits_every_pair_once(self, K):
        seen = {shift_for_slot(t, K) for t in range(K * K)}
        assert len(seen) == K * K
        assert seen == {(a, b) for a in range(K) for b in range(K)}

    def test_small_K_rejected(self):
        with pytest.raises(ConfigError):
            shift_for_slot(0, 2)


def _oracle_partition(net, f):
    """Independent containment check from raw coordinates, no cell math."""
    d, K, M = f.params.d, f.params.K, f.params.M
    cores = {}
    ys = {}
    for l in net.links:
        for which, store in (("y", ys), ("core", cores)):
            inset = M * d if which == "core" else 0.0
            key = None
            for bi in range(-3, 6):
                for bj in range(-3, 6):
                    x_lo = bi * K * d + f.a * d + inset
                    x_hi = (bi + 1) * K * d + f.a * d - inset
                    y_lo = bj * K * d + f.b * d + inset
                    y_hi = (bj + 1) * K * d + f.b * d - inset
                    if all(
                        x_lo <= p.x < x_hi and y_lo <= p.y < y_hi
                        for p in (l.sender, l.receiver)
                    ):
                        key = (bi, bj)
            if key is not None:
                store.setdefault(key, set()).add(l.id)
    return ys, cores


class TestPartitionLinks:
    def test_core_link_appears_in_one_block(self):
        # K=4, M=1, d=1: core of block (0,0) covers [1,3)x[1,3)
        net = mk_net([mk_link(0, 1.2, 1.2, 2.5, 2.5)])
        part = partition_links(net, frame())
        assert set(part.blocks) == {(0, 0)}
        assert part.blocks[0, 0].core == {0}
        assert part.blocks[0, 0].y == {0}
        assert part.removed == frozenset()

    def test_straddling_link_is_removed(self):
        net = mk_net([mk_link(0, 3.5, 1.0, 4.5, 1.0)])  # crosses x=4 block edge
        part = partition_links(net, frame())
        assert part.removed == {0}
        assert not part.blocks.get((0, 0), None) or 0 not in part.blocks[0, 0].y

    def test_margin_link_in_y_but_not_core(self):
        net = mk_net([mk_link(0, 0.2, 1.5, 1.4, 1.5)])  # sender in margin column 0
        part = partition_links(net, frame())
        assert 0 in part.blocks[0, 0].y
        assert 0 not in part.blocks[0, 0].core
        assert 0 in part.removed

    def test_matches_containment_oracle(self, rng):
        links = []
        for i in range(20):
            sx, sy = rng.uniform(0, 8, 2)
            ang = rng.uniform(0, 2 * math.pi)
            ln = rng.uniform(0.3, 1.2)
            links.append(mk_link(i, sx, sy, sx + ln * math.cos(ang), sy + ln * math.sin(ang)))
        net = mk_net(links)
        for a in range(4):
            for b in range(4):
                f = frame(a=a, b=b)
                part = partition_links(net, f)
                ys, cores = _oracle_partition(net, f)
                got_cores = {k: set(v.core) for k, v in part.blocks.items() if v.core}
                assert got_cores == cores
                got_ys = {k: set(v.y) for k, v in part.blocks.items()}
                assert got_ys == ys

    def test_removed_complements_cores(self, rng):
        links = []
        for i in range(30):
            sx, sy = rng.uniform(0, 10, 2)
            links.append(mk_link(i, sx, sy, sx + 0.5, sy))
        net = mk_net(links)
        part = partition_links(net, frame(a=2, b=3))
        in_cores = set().union(*(b.core for b in part.blocks.values()))
        assert in_cores | part.removed == set(range(30))
        assert in_cores & part.removed == set()

    def test_blocks_y_disjoint_and_core_subset(self, rng):
        links = []
        for i in range(30):
            sx, sy = rng.uniform(0, 10, 2)
            links.append(mk_link(i, sx, sy, sx + 0.4, sy + 0.3))
        net = mk_net(links)
        part = partition_links(net, frame(K=5, M=2, a=1, b=4))
        seen = set()
        for b in part.blocks.values():
            assert b.core <= b.y
            assert not (seen & b.y)
            seen |= b.y

    def test_distinct_cores_far_apart_in_cell_index(self):
        # cores of blocks differing in one axis are >= 2M cells apart there
        K, M = 5, 2
        for b1 in range(-2, 3):
            for b2 in range(-2, 3):
                if b1 == b2:
                    continue
                hi1 = b1 * K + K - M - 1  # last core cell of block b1 (axis)
                lo2 = b2 * K + M  # first core cell of block b2
                assert abs(lo2 - hi1) >= 2 * M or abs(b1 * K + M - (b2 * K + K - M - 1)) >= 2 * M


class TestRemovedStripAppearances:
    def test_paper_budget_small_case(self):
        assert removed_strip_appearances(CellIndex(0, 0), 3, 1) <= 6

    def test_degenerate_margin_rejected(self):
        with pytest.raises(ConfigError):
            removed_strip_appearances(CellIndex(0, 0), 3, 0)
        with pytest.raises(ConfigError):
            removed_strip_appearances(CellIndex(0, 0), 4, 2)

    def test_matches_frame_enumeration(self):
        # oracle: enumerate all K*K frames, test vertical-strip membership
        K, M = 4, 1
        cell = CellIndex(0, 0)
        count = 0
        for a in range(K):
            for b in range(K):
                u = (cell.i - a) % K
                if u < M or u >= K - M:
                    count += 1
        assert removed_strip_appearances(cell, K, M) == count

    @pytest.mark.parametrize("K,M", [(3, 1), (5, 1), (5, 2), (8, 3)])
    def test_count_is_cell_independent_and_exact(self, K, M):
        cells = [CellIndex(i, j) for i in (-3, 0, 7) for j in (-1, 0, 5)]
        counts = {removed_strip_appearances(c, K, M) for c in cells}
        assert counts == {2 * K * M}

    @pytest.mark.parametrize("K,M", [(3, 1), (5, 2), (7, 3)])
    def test_full_region_count_relation(self, K, M):
        # union over both strip orientations: corners counted once
        cell = CellIndex(2, -1)
        per_axis = removed_strip_appearances(cell, K, M)
        union = removed_region_appearances(cell, K, M)
        assert union == 2 * per_axis - 4 * M * M
        assert union == 4 * M * (K - M)
        # the per-orientation budget is what stays within 2KM; the union
        # of both orientations always exceeds it for valid K > 2M
        assert union > 2 * K * M


class TestTypes:
    def test_link_length_derived(self):
        assert mk_link(0, 0, 0, 3, 4).length == 5.0

    def test_topology_rejects_sparse_ids(self):
        links = [mk_link(0, 0, 0, 1, 0), mk_link(2, 3, 0, 4, 0)]
        nodes = tuple(l.sender for l in links) + tuple(l.receiver for l in links)
        with pytest.raises(ConfigError):
            NetworkTopology(nodes=nodes, links=tuple(links), r=1.0, R=1.0)

    def test_topology_rejects_out_of_range_lengths(self):
        links = [mk_link(0, 0, 0, 2, 0)]
        nodes = (links[0].sender, links[0].receiver)
        with pytest.raises(ConfigError):
            NetworkTopology(nodes=nodes, links=tuple(links), r=0.5, R=1.0)

    def test_partition_params_need_room_for_core(self):
        with pytest.raises(ConfigError):
            PartitionParams(d=1.0, K=4, M=2)
        assert PartitionParams(d=1.0, K=5, M=2).J == 1

    def test_frame_shift_bounds(self):
        with pytest.raises(ConfigError):
            PartitionFrame(PartitionParams(d=1.0, K=4, M=1), 4, 0)

    def test_point_rejects_non_finite(self):
        with pytest.raises(ConfigError):
            Point2D(float("nan"), 0.0)
