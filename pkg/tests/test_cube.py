import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hslice import cube
from hslice.cube import EdgeId, Hyperplane, SliceKind


def H(a, b):
    return Hyperplane.exact_of(a, b)


def signs(bits, n):
    return [1 if bits >> j & 1 else -1 for j in range(n)]


def brute_unsliced(hs, n):
    """Independent oracle: loop over vertex pairs with Fraction arithmetic."""
    out = []
    for u in range(2**n):
        for j in range(n):
            if u >> j & 1:
                continue
            v = u | 1 << j
            sliced = False
            for h in hs:
                fu = sum(Fraction(c) * s for c, s in zip(h.a, signs(u, n))) - Fraction(h.b)
                fv = sum(Fraction(c) * s for c, s in zip(h.a, signs(v, n))) - Fraction(h.b)
                if fu * fv < 0:
                    sliced = True
            if not sliced:
                out.append(EdgeId(u, j))
    return out


# --- evaluate / slices_edge ---------------------------------------------------------


def test_evaluate_examples():
    assert cube.evaluate(H([1, 0, 0], 0), 0b111) == 1
    assert cube.evaluate(H([1, 1], 2), 0b11) == 0
    third = Fraction(1, 3)
    val = cube.evaluate(H([third, third], 0), 0b01)
    assert val == 0 and isinstance(val, Fraction)


def test_evaluate_dimension_mismatch():
    with pytest.raises(cube.DimensionError):
        cube.evaluate(H([1, 1], 0), 0b100)


def test_slices_edge_examples():
    e = EdgeId.from_vertices(0b11, 0b10)  # (+1,+1) -- (-1,+1)
    assert cube.slices_edge(H([1, 0], 0), e).kind is SliceKind.SLICED
    e = EdgeId.from_vertices(0b11, 0b01)  # (+1,+1) -- (+1,-1)
    assert cube.slices_edge(H([1, 0], 0), e).kind is SliceKind.NOT_SLICED
    e = EdgeId.from_vertices(0b11, 0b10)
    out = cube.slices_edge(H([1, 1], 2), e)
    assert out.kind is SliceKind.DEGENERATE
    assert 0b11 in out.on_hyperplane


def test_float_mode_zero_band():
    h = Hyperplane.float_of([0.1, 0.2], 0.30000000000000004)
    # <a,(+1,+1)> - b is ~1e-17, inside the degeneracy band
    e = EdgeId.from_vertices(0b11, 0b10)
    assert cube.slices_edge(h, e).kind is SliceKind.DEGENERATE


def test_mixed_modes_rejected():
    with pytest.raises(TypeError):
        Hyperplane((Fraction(1), 1.0), Fraction(0))


def test_edge_canonical_form():
    with pytest.raises(ValueError):
        EdgeId(0b1, 0)
    e = EdgeId.from_vertices(0b101, 0b100)
    assert e == EdgeId(0b100, 0)
    assert e.endpoints == (0b100, 0b101)
    with pytest.raises(ValueError):
        EdgeId.from_vertices(0b00, 0b11)


@pytest.mark.parametrize("n", range(1, 9))
def test_edge_enumeration_is_bijection(n):
    edges = list(cube.iter_edges(n))
    assert len(edges) == cube.edge_count(n) == n * 2 ** (n - 1)
    assert len(set(edges)) == len(edges)
    # compare with itertools over vertex pairs
    pairs = {(u, v) for u, v in itertools.combinations(range(2**n), 2) if bin(u ^ v).count("1") == 1}
    assert {e.endpoints for e in edges} == pairs


def test_vertex_sign_roundtrip():
    for bits in range(16):
        assert cube.signs_to_vertex(cube.vertex_to_signs(bits, 4)) == bits


# --- verify_cover ---------------------------------------------------------------


def test_levels_three():
    hs = cube.levels_cover(3)
    assert [h.b for h in hs] == [-2, 0, 2]
    rep = cube.verify_cover(hs, 3)
    assert rep.summary() == "12/12 sliced"
    assert rep.unsliced == [] and rep.complete


def test_levels_three_without_middle():
    hs = [h for h in cube.levels_cover(3) if h.b != 0]
    rep = cube.verify_cover(hs, 3)
    assert rep.unsliced_count == 6
    for e in rep.unsliced:
        u, v = e.endpoints
        assert {sum(signs(u, 3)), sum(signs(v, 3))} == {-1, 1}
    assert rep.unsliced == brute_unsliced(hs, 3)


def test_empty_collection():
    rep = cube.verify_cover([], 2)
    assert (rep.sliced_edges, rep.unsliced_count) == (0, 4)


def test_cap_and_dimension_errors():
    with pytest.raises(cube.CapExceeded):
        cube.verify_cover([], 25)
    with pytest.raises(cube.DimensionError):
        cube.verify_cover([H([1, 1, 1], 0)], 2)
    with pytest.raises(cube.DimensionError):
        cube.verify_cover([], 0)


def test_unsliced_list_truncated_with_full_count():
    rep = cube.verify_cover([], 6, unsliced_cap=10)
    assert len(rep.unsliced) == 10 and rep.unsliced_count == 6 * 32


def test_report_counts_consistent():
    g = np.random.default_rng(3)
    hs = [Hyperplane.float_of(g.normal(size=7), g.normal()) for _ in range(3)]
    rep = cube.verify_cover(hs, 7)
    assert rep.sliced_edges + rep.unsliced_count == rep.total_edges
    assert all(c <= rep.total_edges for c in rep.per_hyperplane_slice_counts)


def test_workers_give_same_report():
    hs = [H([1, 2, -1, 3, 1, 1, 2, 1, 1], 1), H([2, 1, 1, 1, -1, 1, 1, 1, 3], 0)]
    a = cube.verify_cover(hs, 9, workers=1, chunk_bits=4)
    b = cube.verify_cover(hs, 9, workers=4, chunk_bits=4)
    assert a.to_dict() == b.to_dict()


def test_chunked_matches_brute_force():
    hs = [H([1, -2, 1, 1, 3, 1, -1], 1), H([1, 1, 1, 1, 1, 1, 1], 3), H([2, 0, 0, 1, 0, 1, 0], 0)]
    rep = cube.verify_cover(hs, 7, chunk_bits=3)
    assert rep.unsliced == brute_unsliced(hs, 7)


# --- properties --------------------------------------------------------------------


small_rat = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def hyperplane_and_edge(draw):
    n = draw(st.integers(1, 6))
    a = draw(st.lists(small_rat, min_size=n, max_size=n))
    b = draw(small_rat)
    base = draw(st.integers(0, 2**n - 1))
    flip = draw(st.integers(0, n - 1))
    return H(a, b), EdgeId(base & ~(1 << flip), flip)


@settings(max_examples=300, deadline=None)
@given(hyperplane_and_edge())
def test_sliced_means_opposite_signs(he):
    h, e = he
    out = cube.slices_edge(h, e)
    u, v = e.endpoints
    fu, fv = cube.evaluate(h, u), cube.evaluate(h, v)
    assert out.sliced == (fu * fv < 0)
    assert (out.kind is SliceKind.DEGENERATE) == (fu == 0 or fv == 0)


@settings(max_examples=200, deadline=None)
@given(hyperplane_and_edge(), st.fractions(min_value=-7, max_value=7, max_denominator=9).filter(lambda x: x != 0))
def test_scale_invariance(he, phi):
    h, e = he
    assert cube.slices_edge(h, e).kind == cube.slices_edge(h.scaled(phi), e).kind


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.data())
def test_verify_cover_matches_oracle(n, data):
    k = data.draw(st.integers(0, 3))
    hs = [H(data.draw(st.lists(small_rat, min_size=n, max_size=n)), data.draw(small_rat)) for _ in range(k)]
    rep = cube.verify_cover(hs, n)
    assert rep.unsliced == brute_unsliced(hs, n)


@pytest.mark.parametrize("n", range(2, 13))
def test_levels_cover_complete_and_minimal(n):
    hs = cube.levels_cover(n)
    assert cube.verify_cover(hs, n).unsliced_count == 0
    for drop in range(n):
        rest = hs[:drop] + hs[drop + 1:]
        assert cube.verify_cover(rest, n).unsliced_count >= 1


# --- wiggle -----------------------------------------------------------------------


def sliced_set(h, n):
    return {e for e in cube.iter_edges(n) if cube.slices_edge(h, e).sliced}


def test_wiggle_zero_coefficient():
    res = cube.wiggle([H([0, 1], 0)])
    (h,) = res.hyperplanes
    assert h.a[0] != 0 and h.a[1] == 1
    assert abs(h.a[0]) != 1
    assert res.verified
    assert sliced_set(h, 2) == sliced_set(H([0, 1], 0), 2)


def test_wiggle_generic_unchanged():
    hs = [H([1, 2, 3], 0), H([4, -5, 6], 1)]
    res = cube.wiggle(hs)
    assert res.hyperplanes == hs and not res.changed


def test_wiggle_vertex_touching_keeps_slices_and_reports_degeneracy():
    orig = H([1, 1], 2)
    res = cube.wiggle([orig])
    (h,) = res.hyperplanes
    assert h.b == 2
    assert cube.is_generic(res.hyperplanes)
    assert sliced_set(h, 2) == sliced_set(orig, 2)
    assert res.degenerate_before == 2 and res.degenerate_after is not None


def test_wiggle_levels_generic_and_preserving():
    hs = cube.levels_cover(6)
    res = cube.wiggle(hs)
    assert cube.is_generic(res.hyperplanes)
    for old, new in zip(hs, res.hyperplanes):
        assert sliced_set(old, 6) == sliced_set(new, 6)


def test_wiggle_needs_exact():
    with pytest.raises(TypeError):
        cube.wiggle([Hyperplane.float_of([0.0, 1.0], 0.0)])


def test_wiggle_failure_is_reported():
    # a huge magnitude moves a zero coefficient far enough to change slices
    with pytest.raises(cube.WiggleError):
        cube.wiggle([H([0, 1], Fraction(1, 2))], magnitude=Fraction(8), max_halvings=0)
