import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from hslice import scales
from hslice.scales import MalformedCertificate, ScaleCertificate


def cert(groups, delta):
    return ScaleCertificate(tuple(tuple(g) for g in groups), delta)


def chain_ok(v, groups, delta):
    norms = [math.sqrt(sum(float(v[i]) ** 2 for i in g)) for g in groups]
    if not norms:
        return True
    return norms[-1] >= delta and all(norms[i] >= 100 * norms[i + 1] for i in range(len(norms) - 1))


def set_partitions_max(v, delta):
    """Independent oracle: try every assignment of coordinates to groups 0..L-1 or unused."""
    n = len(v)
    best = 0
    for L in range(1, n + 1):
        found = False
        for labels in itertools.product(range(L + 1), repeat=n):
            groups = [[i for i in range(n) if labels[i] == g] for g in range(L)]
            if all(groups) and chain_ok(v, groups, delta):
                found = True
                break
        if found:
            best = L
        else:
            break
    return best


def test_verify_examples():
    assert scales.verify_certificate([10000, 100, 1], cert([[0], [1], [2]], 1))
    assert not scales.verify_certificate([1, 1], cert([[0], [1]], 1))
    with pytest.raises(MalformedCertificate):
        scales.verify_certificate([1, 2], cert([[0], [0]], 1))
    with pytest.raises(MalformedCertificate):
        scales.verify_certificate([1, 2], cert([[0], [5]], 1))


def test_verify_checks_size():
    assert not scales.verify_certificate([10000, 100, 1], cert([[0], [1], [2]], 2))


def test_greedy_examples():
    s, c = scales.greedy_scales([10000, 100, 1], 1)
    assert s == 3 and scales.verify_certificate([10000, 100, 1], c)
    assert scales.greedy_scales([1, 1, 1, 1], 1)[0] == 1
    s, c = scales.greedy_scales([], 1)
    assert s == 0 and c.groups == ()


def test_greedy_rejects_bad_delta():
    with pytest.raises(ValueError):
        scales.greedy_scales([1], 0)


def test_brute_examples():
    assert scales.brute_max_scales([10000, 100, 1], 1) == 3
    assert scales.brute_max_scales([5], 1) == 1
    assert scales.brute_max_scales([0.5], 1) == 0
    with pytest.raises(ValueError):
        scales.brute_max_scales([1] * 13, 1)


@pytest.mark.parametrize("v,delta", [
    ([10000, 100, 1], 1), ([1, 1, 1, 1], 1), ([3, 4, 300, 500, 1], 1), ([1, 99, 100, 9999], 1),
    ([2, 2, 2, 2, 400, 400], 1.5), ([0.5, 0.5, 0.5, 0.5], 1), ([70, 70, 1, 1, 1], 0.1),
])
def test_brute_matches_partition_oracle(v, delta):
    assert scales.brute_max_scales(v, delta) == set_partitions_max(v, delta)


def test_huge_exact_entries():
    v = [100**k for k in range(400, 0, -1)]
    s, c = scales.greedy_scales(v, 10)
    assert s == 400
    assert scales.verify_certificate(v, c)
    v = [Fraction(1, 3) * 100**k for k in range(50)]
    assert scales.greedy_scales(v, Fraction(1, 3))[0] == 50


def test_certificate_roundtrip():
    s, c = scales.greedy_scales([10000, 100, 1], 1)
    back = ScaleCertificate.from_dict(c.to_dict())
    assert back.groups == c.groups and back.delta == c.delta


def test_certificate_for_caches_norms():
    c = scales.certificate_for([3, 4, 0.01], [[0, 1], [2]], 0.01)
    assert c.group_norms[0] == pytest.approx(5)


mag = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)
vectors = st.lists(st.one_of(mag, st.sampled_from([1.0, 100.0, 10000.0])), max_size=12)


@settings(max_examples=300, deadline=None)
@given(vectors, st.sampled_from([0.1, 1.0, 10.0]))
def test_greedy_sound(v, delta):
    s, c = scales.greedy_scales(v, delta)
    assert c.s == s
    assert scales.verify_certificate(v, c)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.one_of(mag, st.sampled_from([1.0, 100.0, 10000.0])), max_size=9),
       st.sampled_from([0.1, 1.0, 10.0]))
def test_greedy_dominated_by_brute(v, delta):
    assert scales.greedy_scales(v, delta)[0] <= scales.brute_max_scales(v, delta)


@settings(max_examples=300, deadline=None)
@given(vectors, st.floats(min_value=1e-3, max_value=1e4), st.floats(min_value=1.0, max_value=1e4))
def test_greedy_monotone_in_delta(v, delta, factor):
    assert scales.greedy_scales(v, delta * factor)[0] <= scales.greedy_scales(v, delta)[0]


@settings(max_examples=300, deadline=None)
@given(vectors, st.floats(min_value=1e-3, max_value=10), st.floats(min_value=1.0, max_value=1e6))
def test_truncation_stays_valid(v, delta, factor):
    s, c = scales.greedy_scales(v, delta)
    assume(s > 0)
    t = scales.truncate_certificate(c, delta * factor)
    assert t.s == max(s - math.ceil(math.log(factor, 100) - 1e-12), 0)
    assert scales.verify_certificate(v, t)
