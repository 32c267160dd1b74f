import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from l0smooth.errors import InputDomainError
from l0smooth.noise import NoiseParams
from l0smooth.oracle import brute_regions
from l0smooth.pointwise import mass_pairs, rho
from l0smooth.regions import (
    RegionEntry,
    RegionTable,
    build_region_table,
    cardinality,
    dump_csv,
    region_mass,
)


def test_cardinality_examples():
    assert cardinality(NoiseParams(2, 1, 80), 1, 0, 1) == 1
    assert cardinality(NoiseParams(2, 1, 80), 1, 1, 1) == 0
    assert cardinality(NoiseParams(2, 2, 80), 1, 1, 1) == 1


def test_r0_single_ratio():
    params = NoiseParams(5, 2, 70)
    table = build_region_table(params, 0)
    assert all(e.u == e.v for e in table)
    assert {e.ratio(params) for e in table} == {1}
    assert sum(e.count for e in table) == 3**5


def test_d1_k1_r1():
    assert build_region_table(NoiseParams(1, 1, 80), 1).as_dict() == {(0, 1): 1, (1, 0): 1}


@pytest.mark.parametrize("d,K,r", [(4, 2, 2), (5, 1, 3), (3, 3, 3), (6, 1, 0)])
def test_matches_brute_force(d, K, r):
    params = NoiseParams(d, K, 80)
    assert build_region_table(params, r).as_dict() == brute_regions(params, r).as_dict()


@given(st.integers(1, 30), st.integers(1, 5), st.data())
def test_row_sum_identity(d, K, data):
    r = data.draw(st.integers(0, d))
    params = NoiseParams(d, K, 60)
    table = build_region_table(params, r).as_dict()
    for u in range(d + 1):
        row = sum(c for (uu, _), c in table.items() if uu == u)
        assert row == math.comb(d, u) * K**u


@given(st.integers(1, 12), st.integers(1, 4), st.data())
def test_swap_symmetry(d, K, data):
    r = data.draw(st.integers(0, d))
    u = data.draw(st.integers(0, d))
    v = data.draw(st.integers(0, d))
    params = NoiseParams(d, K, 60)
    assert cardinality(params, r, u, v) == cardinality(params, r, v, u)


@pytest.mark.parametrize("alpha_pct", [20, 50, 80])
def test_masses_sum_to_one(alpha_pct):
    params = NoiseParams(7, 2, alpha_pct)
    table = build_region_table(params, 4)
    assert sum(region_mass(e, params, "x") for e in table) == 1
    assert sum(region_mass(e, params, "xbar") for e in table) == 1


@pytest.mark.parametrize("alpha_pct", [20, 80])
def test_sorted_descending_ratio_then_u(alpha_pct):
    params = NoiseParams(9, 2, alpha_pct)
    entries = list(build_region_table(params, 5))
    keys = [(-e.ratio(params), e.u) for e in entries]
    assert keys == sorted(keys)


def test_equal_ratio_permutation_invariance():
    params = NoiseParams(6, 2, 80)
    table = build_region_table(params, 3)
    groups = {}
    for e in table:
        groups.setdefault(e.v - e.u, []).append(e)
    reversed_entries = []
    for key in sorted(groups, reverse=True):
        reversed_entries += groups[key][::-1]
    shuffled = RegionTable(params, 3, tuple(reversed_entries))
    for k in range(17):
        p = Fraction(k, 16)
        assert rho(mass_pairs(table), p)[0] == rho(mass_pairs(shuffled), p)[0]


def test_bad_radius_and_side():
    params = NoiseParams(3, 1, 80)
    with pytest.raises(InputDomainError):
        build_region_table(params, 4)
    with pytest.raises(InputDomainError):
        region_mass(RegionEntry(0, 1, 1), params, "y")


def test_dump_csv():
    text = dump_csv(build_region_table(NoiseParams(1, 1, 80), 1))
    assert text.splitlines() == ["u,v,count", "0,1,1", "1,0,1"]
