import pytest
from hypothesis import given, settings, strategies as st

from stoqlab import contours as ct
from stoqlab import lattice as lt
from stoqlab.lattice import Region

BOX = Region.box((7, 7), (-3, -3))
P = ct.PartitionParams.defaults(2, 3.0)


def droplet(box=BOX, at=(0, 0)):
    return ct.SpinConfig.from_map(box, {at: 1}, -1)


def test_boundary_examples():
    assert len(ct.boundary(ct.SpinConfig.constant(BOX, -1))) == 0
    assert ct.boundary(droplet()) == lt.ball((0, 0), 1)


def test_checkerboard_boundary_covers_box_and_collar():
    box = Region.box((4, 4))
    sig = ct.SpinConfig.from_map(box, lambda p: 1 if sum(p) % 2 else -1, -1)
    bd = ct.boundary(sig)
    assert box.issubset(bd)
    # collar: outside neighbours of plus sites on the box edge
    collar = bd.minus(box)
    assert len(collar) > 0 and all(min(lt.l1_distance(c, b) for b in box) == 1 for c in collar)


def test_partition_of_droplet():
    parts = ct.build_partition(droplet(), P)
    assert len(parts) == 1
    assert parts[0].support == lt.ball((0, 0), 1)
    assert ct.check_partition(parts, P, lt.ball((0, 0), 1)).ok


def test_partition_of_empty_boundary():
    assert ct.build_partition(ct.SpinConfig.constant(BOX, -1), P) == []


def test_two_far_droplets_give_two_parts():
    p = ct.PartitionParams(M=1.0, a=1.0, r=1)
    box = Region.box((3, 40), (-1, -1))
    sig = ct.SpinConfig.from_map(box, {(0, 0): 1, (0, 30): 1}, -1)
    parts = ct.build_partition(sig, p)
    assert len(parts) == 2
    assert ct.check_partition(parts, p, ct.boundary(sig)).ok


def test_hand_built_distance_violation():
    p = ct.PartitionParams(M=1.0, a=2.0, r=2)
    g1 = Region.of([(0, 0), (0, 2)])
    g2 = Region.of([(0, 3), (0, 5)])
    parts = [ct.PartitionPart(g1, (g1,)), ct.PartitionPart(g2, (g2,))]
    rep = ct.check_partition(parts, p)
    assert rep.distance == [(0, 1)]
    assert not rep.ok_B


def test_single_part_passes():
    g = Region.of([(0, 0), (4, 4)])
    assert ct.check_partition([ct.PartitionPart(g, (g,))], P, g).ok


def test_intersection_idempotent_and_refinement():
    sig = ct.SpinConfig.from_map(BOX, {(0, 0): 1, (2, 2): 1}, -1)
    parts = ct.build_partition(sig, P)
    same = ct.intersect_partitions(parts, parts, P)
    assert [q.support for q in same] == [q.support for q in parts]
    bd = ct.boundary(sig)
    fine = [ct.PartitionPart(Region.of([x]), (Region.of([x]),)) for x in bd]
    coarse = [ct.PartitionPart(bd, (bd,))]
    meet = ct.intersect_partitions(fine, coarse, P)
    assert sorted(q.support.points for q in meet) == sorted(q.support.points for q in fine)


def test_enumerated_partitions_have_valid_refinement():
    p = ct.PartitionParams(M=0.5, a=1.0, r=2)
    bd = Region.of([(0, 0), (0, 1), (0, 6), (0, 7)])
    valid = ct.enumerate_valid_partitions(bd, p)
    assert len(valid) >= 2
    meet = ct.intersect_partitions(valid[0], valid[1], p)
    assert ct.check_partition(meet, p, bd).ok


def test_droplet_contour_labels():
    cs = ct.contours_of(droplet(), P)
    assert len(cs) == 1
    assert cs[0].sign == -1
    assert len(cs[0].I_plus) == 0


def test_ring_contour_labels():
    box = Region.box((13, 13), (-6, -6))
    ring = Region.box((9, 9), (-4, -4)).minus(Region.box((3, 3), (-1, -1)))
    sig = ct.SpinConfig.from_map(box, {x: 1 for x in ring}, -1)
    cs = ct.contours_of(sig, P)
    assert len(cs) == 1
    g = cs[0]
    assert g.sign == -1
    assert g.interior_labels.count(-1) == 1
    assert g.I_minus.points == ((0, 0),)
    assert len(g.I_plus) > 0 and g.I_plus.issubset(ring)


def test_no_contours_for_constant():
    assert ct.contours_of(ct.SpinConfig.constant(BOX, -1), P) == []


def test_erase_droplet():
    sig = droplet()
    cs = ct.contours_of(sig, P)
    assert ct.erase_contours(sig, cs) == ct.SpinConfig.constant(BOX, -1)
    assert ct.erase_contours(sig, []) == sig


def test_erasure_volume_inside_complement():
    box = Region.box((11, 11), (-5, -5))
    plus = set(Region.box((5, 5), (-2, -2)).points) - {(0, 0)}
    sig = ct.SpinConfig.from_map(box, {x: 1 for x in plus}, -1)
    cs = ct.contours_of(sig, P)
    for g in cs:
        tau = ct.erase_contours(sig, [g])
        for h in ct.contours_of(tau, P):
            assert not (h.volume.as_set() & g.support.as_set())


def test_enumerate_contours_at_origin():
    box = Region.box((3, 3), (-1, -1))
    found = ct.enumerate_contours_at_origin(5, box, P)
    assert lt.ball((0, 0), 1) in found
    assert ct.enumerate_contours_at_origin(0, box, P) == []


@settings(max_examples=25)
@given(st.sets(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=12))
def test_built_partitions_pass_checker(plus):
    sig = ct.SpinConfig.from_map(BOX, {x: 1 for x in plus}, -1)
    parts = ct.build_partition(sig, P)
    assert ct.check_partition(parts, P, ct.boundary(sig)).ok


@settings(max_examples=25)
@given(st.sets(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=12))
def test_contour_volumes_within_kappa(plus):
    sig = ct.SpinConfig.from_map(BOX, {x: 1 for x in plus}, -1)
    for g in ct.contours_of(sig, P):
        assert ct.contour_volume_ok(g, P)
        assert g.support.issubset(g.volume)


def test_params_validation():
    with pytest.raises(ValueError):
        ct.PartitionParams(M=0.0, a=2.0, r=1)
    with pytest.raises(ValueError):
        ct.PartitionParams.defaults(2, 1.5)
