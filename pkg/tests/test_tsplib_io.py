import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, bundled, make_instance
from oracles import tour_sum, tsplib_distance
from patsp.tsplib_io import (
    Instance,
    TSPLibError,
    UnsupportedFormatError,
    WeightRule,
    distance,
    distance_row,
    format_tour,
    pairwise_distances,
    parse_instance,
    parse_tour,
    read_instance,
    to_tsplib,
    tour_length,
    validate_tour,
)

SIZES = {"ulysses22": 22, "att48": 48, "kroC100": 100, "pcb442": 442, "rat783": 783, "pr2392": 2392}


@pytest.mark.parametrize("name,n", sorted(SIZES.items()))
def test_bundled_instances_parse(name, n):
    inst = bundled(name)
    assert inst.n == n
    assert inst.name == name


def test_weight_rules(att48, ulysses22):
    assert att48.weight_rule is WeightRule.ATT
    assert ulysses22.weight_rule is WeightRule.GEO
    assert bundled("kroC100").weight_rule is WeightRule.EUC_2D


def test_raw_euclid_345():
    inst = make_instance([(0, 0), (3, 4), (9, 9)])
    assert distance(inst, 0, 1) == 5.0


def test_euc2d_rounds_to_nearest():
    inst = make_instance([(0, 0), (1.4, 0), (1.5, 0)], WeightRule.EUC_2D)
    assert distance(inst, 0, 1) == 1.0
    assert distance(inst, 0, 2) == 2.0


def test_ceil2d():
    inst = make_instance([(0, 0), (1.1, 0)], WeightRule.CEIL_2D)
    assert distance(inst, 0, 1) == 2.0


def test_att_pair_matches_reference(att48):
    c = att48.coords
    assert distance(att48, 0, 1) == tsplib_distance("ATT", c[0], c[1]) == 1495.0


@pytest.mark.parametrize("name", ["att48", "ulysses22", "kroC100"])
def test_full_matrix_matches_reference(name):
    inst = bundled(name)
    rule = inst.weight_rule.value
    c = inst.coords
    for i in range(0, inst.n, 3):
        row = distance_row(inst, i)
        for j in range(inst.n):
            expected = 0.0 if i == j else tsplib_distance(rule, c[i], c[j])
            assert row[j] == expected


def test_on_demand_distances_match_reference():
    inst = bundled("pr2392")
    assert inst.matrix is None
    c = inst.coords
    rng = np.random.default_rng(0)
    for i, j in rng.integers(0, inst.n, size=(200, 2)):
        expected = 0.0 if i == j else tsplib_distance("EUC_2D", c[i], c[j])
        assert distance(inst, int(i), int(j)) == expected


def test_optimal_tour_anchors(att48, ulysses22):
    att_opt = parse_tour((DATA / "att48.opt.tour").read_text())
    uly_opt = parse_tour((DATA / "ulysses22.opt.tour").read_text())
    assert tour_length(att48, att_opt) == 10628.0
    assert tour_length(ulysses22, uly_opt) == 7013.0


def test_identity_tour_matches_brute_sum(att48):
    assert tour_length(att48, list(range(48))) == tour_sum("ATT", att48.coords, range(48)) == 49840.0


def test_square_tours(square):
    assert tour_length(square, [0, 1, 2, 3]) == 4.0
    assert tour_length(square, [0, 2, 1, 3]) == pytest.approx(2 + 2 * math.sqrt(2))


def test_invalid_tour_rejected(square):
    with pytest.raises(ValueError):
        tour_length(square, [0, 1, 1, 3])
    with pytest.raises(ValueError):
        validate_tour([0, 1, 2], 4)


def test_index_out_of_range(square):
    with pytest.raises(IndexError):
        distance(square, 0, 4)


def test_dimension_mismatch_names_line():
    text = "NAME : bad\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\nEOF\n"
    with pytest.raises(TSPLibError, match="line"):
        parse_instance(text)


def test_missing_dimension():
    text = "NAME : bad\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\nEOF\n"
    with pytest.raises(TSPLibError):
        parse_instance(text)


def test_explicit_weights_unsupported():
    text = ("NAME : x\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\n"
            "EDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 3\n2 3 0\nEOF\n")
    with pytest.raises(UnsupportedFormatError):
        parse_instance(text)


def test_garbage_file(tmp_path):
    p = tmp_path / "junk.tsp"
    p.write_text("this is not a tsp file\n")
    with pytest.raises(TSPLibError):
        read_instance(p)


def test_tour_file_round_trip():
    order = [3, 1, 0, 2]
    assert parse_tour(format_tour("x", order)) == order


@pytest.mark.parametrize("name", ["att48", "ulysses22", "kroC100"])
def test_tsplib_round_trip_bundled(name):
    inst = bundled(name)
    again = parse_instance(to_tsplib(inst))
    assert again == inst
    assert again.weight_rule is inst.weight_rule


coord = st.floats(min_value=-1e5, max_value=1e5, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=25),
       st.sampled_from([WeightRule.EUC_2D, WeightRule.CEIL_2D, WeightRule.ATT]))
def test_round_trip_property(points, rule):
    inst = make_instance(points, rule, name="prop")
    again = parse_instance(to_tsplib(inst))
    assert again.coords == inst.coords
    assert again.weight_rule is rule and again.name == "prop"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=2, max_size=20),
       st.sampled_from(list(WeightRule)))
def test_symmetry_and_zero_diagonal(points, rule):
    if rule is WeightRule.GEO:
        points = [(x % 90, y % 180) for x, y in points]
    inst = make_instance(points, rule)
    n = inst.n
    for i in range(n):
        assert distance(inst, i, i) == 0.0
        for j in range(i + 1, n):
            assert distance(inst, i, j) == distance(inst, j, i) >= 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=3, max_size=15))
def test_raw_triangle_inequality(points):
    inst = make_instance(points)
    n = inst.n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert distance(inst, i, k) <= distance(inst, i, j) + distance(inst, j, k) + 1e-6


def test_pairwise_condensed_count(att48):
    d = pairwise_distances(att48)
    assert d.shape == (48 * 47 // 2,)


def test_instance_rejects_nonfinite():
    with pytest.raises(ValueError):
        Instance("bad", WeightRule.RAW_EUC, ((0.0, float("nan")),))
