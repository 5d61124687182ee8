import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphaflow import meshes
from alphaflow.complex_core import build_surface, induced_subcomplex, link_pairs
from alphaflow.errors import TooManyVertices
from alphaflow.packing2d import gauss_curvature
from alphaflow.thurston import (
    admissible_curvature_membership,
    ge_xu_condition,
    mask_to_subset,
    subset_to_mask,
    thurston_condition,
)

from .helpers import random_radii, random_weighted

PI = math.pi


def brute_rhs(surface, subset):
    """Oracle: the right-hand side from the explicit link-pair list and subcomplex."""
    lk = link_pairs(surface, subset)
    _, chi = induced_subcomplex(surface, subset)
    return -sum(PI - surface.weight(*p.edge) for p in lk) + 2 * PI * chi


def test_mask_round_trip():
    assert subset_to_mask([0, 2, 5]) == 0b100101
    assert mask_to_subset(0b100101) == (0, 2, 5)


def test_tetrahedron_hand_values(tetra):
    rep = thurston_condition(tetra)
    assert len(rep) == 14
    assert rep.passed
    expected = {1: (PI, -PI), 2: (2 * PI, 0.0), 3: (3 * PI, 2 * PI)}
    for v in rep.verdicts():
        lhs, rhs = expected[len(v.subset)]
        assert abs(v.lhs - lhs) <= 1e-12
        assert abs(v.rhs - rhs) <= 1e-12
        assert v.passed and not v.marginal


def test_torus_single_vertex(torus):
    v = thurston_condition(torus).verdict_for([3])
    assert v.lhs == 0.0
    assert v.rhs == pytest.approx(-4 * PI, abs=1e-12)
    assert v.passed


@pytest.mark.parametrize("builder", [meshes.tetrahedron, meshes.octahedron, meshes.torus7])
def test_rhs_matches_subset_oracle(rng, builder):
    s = random_weighted(rng, builder)
    rep = thurston_condition(s)
    assert len(rep) == 2**s.N - 2
    for v in rep.verdicts():
        assert v.rhs == pytest.approx(brute_rhs(s, v.subset), abs=1e-12)
        assert v.lhs == pytest.approx(2 * PI * s.euler_characteristic * len(v.subset) / s.N, abs=1e-12)


def test_ge_xu_reductions(rng, torus, octa):
    for s in (octa, torus):
        base = thurston_condition(s)
        for alpha in (-1.0, 0.5, 2.0):
            gx = ge_xu_condition(s, np.ones(s.N), alpha)
            assert np.array_equal(gx.passed_flags, base.passed_flags)
            assert np.allclose(gx.lhs, base.lhs, atol=1e-12)
        gx0 = ge_xu_condition(s, random_radii(rng, s.N), 0.0)
        assert np.array_equal(gx0.passed_flags, base.passed_flags)
    # torus: lhs vanishes for every metric and alpha
    gx = ge_xu_condition(torus, random_radii(rng, 7), 1.3)
    assert np.all(gx.lhs == 0)
    assert gx.passed == bool(np.all(gx.rhs < 0))


def test_ge_xu_explicit_lhs(rng, octa):
    r = random_radii(rng, 6)
    rep = ge_xu_condition(octa, r, 1.5)
    for v in itertools.islice(rep.verdicts(), 0, None, 7):
        expected = 4 * PI * np.sum(r[list(v.subset)] ** 1.5) / np.sum(r**1.5)
        assert v.lhs == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("builder", [meshes.tetrahedron, meshes.octahedron, meshes.torus7])
def test_membership_of_realized_curvatures(rng, builder):
    for _ in range(20):
        s = random_weighted(rng, builder)
        K = gauss_curvature(s, random_radii(rng, s.N, 2.0))
        rep = admissible_curvature_membership(s, K)
        assert rep.passed, rep.failing_subsets()[:3]
        assert rep.gauss_bonnet_ok


def test_membership_failures(tetra):
    x = np.full(4, PI)
    assert admissible_curvature_membership(tetra, x).passed
    bad = x + 0.25
    rep = admissible_curvature_membership(tetra, bad)
    assert not rep.gauss_bonnet_ok and not rep.passed
    # sum is right but one vertex has too much curvature: {1,2,3} sum drops to 2*pi
    skew = np.array([2 * PI, 2 * PI / 3, 2 * PI / 3, 2 * PI / 3])
    rep = admissible_curvature_membership(tetra, skew)
    assert rep.gauss_bonnet_ok and not rep.passed
    v = rep.verdict_for([1, 2, 3])
    assert v.marginal and not v.passed
    assert (1, 2, 3) in rep.failing_subsets()


def test_orthogonal_weights():
    # every link pair now contributes pi/2 instead of pi
    s = meshes.tetrahedron(weight=PI / 2)
    rep = thurston_condition(s)
    assert rep.passed
    assert rep.verdict_for([0]).rhs == pytest.approx(-3 * PI / 2 + 2 * PI)


def test_stop_on_failure(tetra):
    skew = np.array([2 * PI / 3, 2 * PI / 3, 2 * PI / 3, 2 * PI])
    rep = admissible_curvature_membership(tetra, skew, stop_on_failure=True)
    assert not rep.complete
    assert not rep.passed
    # enumeration stops at the first failing mask, 0b0111
    assert rep.masks[-1] == 7 and len(rep) == 7


def test_workers_agree():
    s = meshes.grid_torus(4, 4)
    a = thurston_condition(s)
    b = thurston_condition(s, workers=3)
    assert np.array_equal(a.masks, b.masks)
    assert np.array_equal(a.rhs, b.rhs)


def test_too_many_vertices():
    with pytest.raises(TooManyVertices):
        thurston_condition(meshes.grid_torus(5, 6))
    with pytest.raises(TooManyVertices):
        thurston_condition(meshes.torus7(), cap=6)


def test_report_dict(tetra):
    d = thurston_condition(tetra).to_dict()
    assert d["subsets_checked"] == 14 and d["passed"] and d["failures"] == 0
    rec = d["records"][0]
    assert set(rec) == {"mask", "subset", "lhs", "rhs", "pass", "marginal"}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, PI / 2), min_size=21, max_size=21))
def test_torus_rhs_oracle_random_weights(ws):
    base = meshes.torus7()
    s = build_surface(7, base.faces.tolist(), {tuple(e): w for e, w in zip(base.edges.tolist(), ws)})
    rep = thurston_condition(s)
    for m in (1, 0b11, 0b1011, 0b111111):
        v = rep.verdict_for(mask_to_subset(m))
        assert v.rhs == pytest.approx(brute_rhs(s, v.subset), abs=1e-12)
