import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import brute_xcorr
from lssounder.correlation import corr_profile, measure_ifw
from lssounder.golay import GolayPair, generate_pair, mate, verify_complementary
from lssounder.lscode import (
    MAX_DEPTH, CodeId, LsCodeSet, assemble, code_set, default_code_set, expand, predicted_ifw,
)


def test_assemble_layout():
    code = assemble([1, 1], [1, -1], 2, 0)
    assert list(code.chips) == [1, 1, 0, 0, 1, -1]
    assert list(assemble([1, 1], [1, -1], 0, 0).chips) == [1, 1, 1, -1]


def test_default_code_length():
    codes = default_code_set()
    assert len(codes) == 2
    for code in codes:
        assert len(code) == 2 * 4096 + 8000 == 16192


@given(st.integers(0, 5), st.integers(0, 9), st.integers(0, 9))
def test_layout_invariants(k, gap, tail):
    p = generate_pair(k)
    code = assemble(p.c, p.s, gap, tail)
    n = len(p)
    assert len(code) == 2 * n + gap + tail
    np.testing.assert_array_equal(code.chips[:n], p.c)
    assert not code.chips[n:n + gap].any()
    np.testing.assert_array_equal(code.chips[code.s_offset:code.s_offset + n], p.s)
    assert not code.chips[2 * n + gap:].any()
    assert code.active_mask().sum() == 2 * n


def test_assemble_rejects_bad_parts():
    with pytest.raises(ValueError):
        assemble([1, 1], [1], 2)
    with pytest.raises(ValueError):
        assemble([1], [1], -1)


def test_code_id_round_trip():
    cid = CodeId(2, 3, "mate")
    assert str(cid) == "L2N3m"
    assert CodeId.parse(str(cid)) == cid
    with pytest.raises(ValueError):
        CodeId.parse("nonsense")


def test_depth_zero_tree():
    seed = generate_pair(3)
    tree = expand(seed, 0)
    assert len(tree.layers) == 1
    base, m = tree.layers[0][0]
    assert base == seed and m == mate(seed)


def test_layer_one_children_of_k1_seed():
    x = generate_pair(1)
    y = mate(x)
    tree = expand(x, 1)
    node0, node1 = tree.layers[1]
    assert node0[0] == GolayPair([1, 1, -1, 1], [1, -1, -1, -1])
    assert node1[0] == GolayPair([-1, 1, 1, 1], [-1, -1, 1, -1])
    assert node0[0] == GolayPair(np.r_[x.c, y.c], np.r_[x.s, y.s])
    assert node1[0] == GolayPair(np.r_[y.c, x.c], np.r_[y.s, x.s])


@pytest.mark.parametrize("k,depth", [(0, 4), (1, 3), (2, 3), (3, 2), (4, 3)])
def test_every_node_complementary(k, depth):
    tree = expand(generate_pair(k), depth)
    for layer, nodes in enumerate(tree.layers):
        assert len(nodes) == 2 ** layer
        for base, m in nodes:
            assert len(base) == tree.subcode_length(layer)
            assert verify_complementary(base).is_complementary
            assert m == mate(base)


def test_expand_limits():
    with pytest.raises(ValueError):
        expand(generate_pair(1), MAX_DEPTH + 1)
    with pytest.raises(ValueError):
        expand(generate_pair(12), 5)


def test_code_set_counts():
    tree = expand(generate_pair(1), 1)
    layer0 = code_set(tree, 0, 2, trailing_gap=0)
    assert len(layer0) == 2 and all(len(c) == 6 for c in layer0)
    layer1 = code_set(tree, 1, 4)
    assert len(layer1) == 4 and all(len(c) == 16 for c in layer1)
    assert len({c.id for c in layer1}) == 4
    with pytest.raises(ValueError):
        code_set(tree, 2, 4)


def test_code_set_validation():
    a = assemble([1], [1], 1, 0, CodeId(0, 0, "base"))
    b = assemble([1], [-1], 2, 0, CodeId(0, 0, "mate"))
    with pytest.raises(ValueError):
        LsCodeSet((a, b), 1)
    with pytest.raises(ValueError):
        LsCodeSet((a, a), 1)
    with pytest.raises(ValueError):
        LsCodeSet((), 1)


def test_predicted_ifw_rules():
    tree = expand(generate_pair(2), 2)
    same = predicted_ifw(tree, CodeId(2, 1, "base"), CodeId(2, 1, "mate"), 4000)
    assert same == 4000
    assert predicted_ifw(tree, CodeId(2, 0, "base"), CodeId(2, 0, "base"), 7) == 7
    # siblings share their father, 8 chips long
    assert predicted_ifw(tree, CodeId(2, 0, "base"), CodeId(2, 1, "mate"), 100) == 8
    # cousins meet at the root
    assert predicted_ifw(tree, CodeId(2, 0, "base"), CodeId(2, 3, "base"), 100) == 4
    assert predicted_ifw(tree, CodeId(2, 0, "base"), CodeId(2, 3, "base"), 3) == 3
    with pytest.raises(ValueError):
        predicted_ifw(tree, CodeId(1, 0, "base"), CodeId(2, 0, "base"), 10)
    with pytest.raises(KeyError):
        predicted_ifw(tree, CodeId(2, 4, "base"), CodeId(2, 0, "base"), 10)


def _brute_width(a, b, gap):
    for lag in range(1, gap + 1):
        if brute_xcorr(a, b, lag) or brute_xcorr(a, b, -lag):
            return lag
    return gap


@pytest.mark.parametrize("k", [0, 1, 2])
def test_predicted_window_brute_force(k):
    # tiny trees, per-lag double loops over the transmitted chips
    tree = expand(generate_pair(k), 2)
    for layer in range(3):
        gap = 2 * tree.subcode_length(layer)
        codes = code_set(tree, layer, gap)
        for ci, cj in itertools.combinations_with_replacement(codes, 2):
            width = _brute_width(ci.chips, cj.chips, gap)
            assert width >= predicted_ifw(tree, ci.id, cj.id, gap), (ci.id, cj.id)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_predicted_window_exhaustive(k):
    tree = expand(generate_pair(k), 3)
    for layer in range(4):
        n = tree.subcode_length(layer)
        for gap in (n // 2, n, 2 * n):
            codes = code_set(tree, layer, gap)
            for ci, cj in itertools.combinations_with_replacement(codes, 2):
                prof = corr_profile(ci, cj, range(-gap, gap + 1), domain="chips")
                assert measure_ifw(prof).width >= predicted_ifw(tree, ci.id, cj.id, gap)
