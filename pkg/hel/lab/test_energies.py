"""
能量统计测试

A = {0,1,3} 的各项能量均可手算：
A∘A = {0:3, ±1:1, ±2:1, ±3:1}，A*A = {0:1, 1:2, 2:1, 3:2, 4:2, 6:1}
"""

import itertools
import random
from collections import Counter
from fractions import Fraction
from functools import reduce

import pytest

from hel.lab.convolution import TupleFunction
from hel.lab.energies import (
    IntersectionFamily,
    dyadic_buckets,
    ek_identity_check,
    energy,
    energy_forms,
    energy_forms_check,
    energy_moment,
    energy_pair,
    energy_pair_moment,
    energy_report,
    diagonal_energy_check,
    holder_checks,
    iterated_intersection,
    level_count,
    level_of,
    multiplicative_energy,
    product_set,
    ratio_counts,
    restricted_energy,
    shifted_product_size,
    sigma_k,
    sigma_restricted_check,
    sigma_weighted,
    t_energy,
    tuple_restricted_energy,
)
from hel.lab.exceptions import PreconditionError
from hel.lab.group_core import FiniteSet, GroupDescriptor, sumset

Z = GroupDescriptor.integers()
A = FiniteSet(Z, (0, 1, 3))
B = FiniteSet(Z, (0, 2, 3, 7))

GROUPS = (
    Z,
    GroupDescriptor.cyclic(37),
    GroupDescriptor.cube(6),
    GroupDescriptor.product(GroupDescriptor.cyclic(4), GroupDescriptor.cube(3)),
)


def test_energies():
    """测试能量与高阶能量"""
    print("=== 测试能量 ===")
    assert energy(A) == 15
    assert energy_pair(A, A) == 15
    assert energy_forms(A, B)[0] == energy_forms(A, B)[1] == energy_forms(A, B)[2]
    assert energy_moment(A, 1) == 9
    assert energy_moment(A, 2) == 15
    assert energy_moment(A, 3) == 33
    assert energy_moment(A, 4) == 87
    assert energy_moment(A, 1.5) == pytest.approx(3 ** 1.5 + 6)
    assert isinstance(energy_moment(A, 3.0), int)

    assert energy_pair_moment(A, A, 2) == 15
    assert energy_pair_moment(A, A, 3) == 33
    assert energy_pair_moment(A, B, 1) == len(A) ** 2

    with pytest.raises(PreconditionError):
        energy_moment(A, 0.5)
    with pytest.raises(PreconditionError):
        energy_moment(FiniteSet(Z), 2)
    print("能量测试通过")


def test_t_and_sigma():
    """测试 T_k 与 σ_k"""
    print("=== 测试 T_k 与 σ_k ===")
    assert t_energy(A, 2) == energy(A)
    assert t_energy(A, 3) == 99
    with pytest.raises(PreconditionError):
        t_energy(A, 1)
    assert sigma_k(A, 2) == 1

    S = FiniteSet(Z, (-1, 0, 1))
    assert sigma_k(S, 2) == 3
    assert sigma_k(S, 3) == 7
    with pytest.raises(PreconditionError):
        sigma_k(S, 1)

    assert sigma_weighted(FiniteSet(Z, (1, 2)), A) == 2
    assert sigma_weighted(FiniteSet(Z, (0,)), A) == len(A)
    print("T_k 与 σ_k 测试通过")


def _random_set(G, rng, size):
    if not G.is_finite:
        return FiniteSet(G, tuple(rng.sample(range(-40, 41), size)))
    return FiniteSet(G, tuple(G.element_at(i) for i in rng.sample(range(G.order), size)))


def _sum_counts(S, k):
    """枚举全部 k 元组，按和计数"""
    G = S.descriptor
    return Counter(reduce(G.add, t) for t in itertools.product(S.elements, repeat=k))


def _difference_counts(S):
    G = S.descriptor
    return Counter(G.sub(a, b) for a, b in itertools.product(S.elements, repeat=2))


def _equal_difference_tuples(S, s):
    """a_1−b_1 = … = a_s−b_s 的 2s 元组个数"""
    G = S.descriptor
    total = 0
    for t in itertools.product(S.elements, repeat=2 * s):
        diffs = {G.sub(t[i], t[s + i]) for i in range(s)}
        total += len(diffs) == 1
    return total


def test_brute_force_oracles():
    """随机集合上与元组枚举结果比对"""
    print("=== 元组枚举比对 ===")
    rng = random.Random(2024)
    for G in GROUPS:
        for _ in range(4):
            S = _random_set(G, rng, rng.randint(2, 32))
            T = _random_set(G, rng, rng.randint(1, 32))
            pairs = Counter(G.add(a, b) for a, b in itertools.product(S.elements, T.elements))
            assert energy_pair(S, T) == sum(c * c for c in pairs.values())

            diffs = _difference_counts(S)
            for s in (1, 2, 3, 4):
                assert energy_moment(S, s) == sum(c ** s for c in diffs.values())
            for k in (2, 3):
                sums = _sum_counts(S, k)
                assert t_energy(S, k) == sum(c * c for c in sums.values())
                assert sigma_k(S, k) == sums[G.zero]

        small = _random_set(G, rng, 4)
        for s in (1, 2, 3, 4):
            assert energy_moment(small, s) == _equal_difference_tuples(small, s)
        quadruples = sum(G.add(a, b) == G.add(c, d)
                         for a, b, c, d in itertools.product(small.elements, repeat=4))
        assert energy(small) == quadruples
    print("元组枚举比对通过")


def test_energy_inequalities():
    """E_{s2} ≤ E_{s1}|A|^{s2−s1} 与 |A|⁴ ≤ E(A)|A−A|"""
    print("=== 测试能量不等式 ===")
    rng = random.Random(77)
    grid = (1, 1.5, 2, 2.5, 3, 4)
    for G in GROUPS:
        for _ in range(6):
            S = _random_set(G, rng, rng.randint(1, 32))
            n = len(S)
            assert n ** 4 <= energy(S) * len(sumset(S, S, 1, -1))
            assert n ** 2 <= energy(S) <= n ** 3
            for s1, s2 in itertools.combinations(grid, 2):
                assert energy_moment(S, s2) <= energy_moment(S, s1) * n ** (s2 - s1) * (1 + 1e-9)
    print("能量不等式测试通过")


def test_restricted():
    """测试受限能量与迭代交"""
    print("=== 测试受限能量 ===")
    assert restricted_energy(A, FiniteSet(Z, (1, 2))) == 2
    assert restricted_energy(A, FiniteSet(Z, (0, 1))) == 10
    assert restricted_energy(A, FiniteSet(Z, (0, 1)), 3) == 28
    assert restricted_energy(A, sumset(A, A, 1, -1)) == energy(A)

    assert iterated_intersection(A, ()) == A
    assert iterated_intersection(A, (1,)).elements == (0,)
    assert iterated_intersection(A, (2,)).elements == (1,)
    assert iterated_intersection(A, (1, 3)).elements == (0,)
    assert len(iterated_intersection(A, (1, 2))) == 0
    assert len(IntersectionFamily.of(A, (1,))) == 1

    P = TupleFunction.indicator(Z, [(0,), (1,)], 1)
    assert tuple_restricted_energy(A, P) == 10
    assert tuple_restricted_energy(A, P, mode='plain') == 4
    with pytest.raises(PreconditionError):
        tuple_restricted_energy(A, P, mode='cubed')
    print("受限能量测试通过")


def test_exact_checks():
    """测试精确恒等式与显式不等式"""
    print("=== 测试能量恒等式 ===")
    results = []
    for k, l in ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3)):
        results.append(ek_identity_check(A, k, l))
    results += energy_forms_check(A, B)
    results += [diagonal_energy_check(A, B, 2), diagonal_energy_check(B, A, 3)]
    results += holder_checks(B)
    D = sumset(A, A, 1, -1)
    results += [sigma_restricted_check(A, D, 2), sigma_restricted_check(A, D, 4)]
    for res in results:
        print(f"{res.check_id}: lhs={res.lhs} rhs={res.rhs}")
        assert res.passed, res.check_id

    assert ek_identity_check(A, 2, 1).rhs == 33
    with pytest.raises(PreconditionError):
        sigma_restricted_check(A, D, 3)
    with pytest.raises(PreconditionError):
        ek_identity_check(A, 0, 1)
    print("能量恒等式测试通过")


def test_multiplicative():
    """测试乘法统计"""
    print("=== 测试乘法能量 ===")
    G = FiniteSet(Z, (1, 2, 4))
    assert ratio_counts(G)[Fraction(1)] == 3
    assert ratio_counts(G)[Fraction(1, 2)] == 2
    assert multiplicative_energy(G) == 19
    assert multiplicative_energy(G, s=1) == 9
    assert product_set(G, G).elements == (1, 2, 4, 8, 16)
    assert shifted_product_size(FiniteSet(Z, (1, 2))) == 4

    U = FiniteSet(GroupDescriptor.cyclic(7), (1, 2, 4))
    assert multiplicative_energy(U) == 27
    assert product_set(U, U) == U

    with pytest.raises(PreconditionError):
        ratio_counts(FiniteSet(Z, (0, 1)))
    with pytest.raises(PreconditionError):
        ratio_counts(FiniteSet(GroupDescriptor.cyclic(8), (2,)))
    with pytest.raises(PreconditionError):
        product_set(FiniteSet(GroupDescriptor.cube(2), (1,)), FiniteSet(GroupDescriptor.cube(2), (1,)))
    print("乘法能量测试通过")


def test_levels():
    assert level_count(3, 15, 2) == 3
    assert level_count(4, 64, 2) == 2
    assert level_of(5, 1) == 3
    assert level_of(2, 1) == 1
    assert level_of(1, 1) is None
    assert dyadic_buckets({'a': 3, 'b': 1, 'c': 2}, 1) == {2: ['a'], 1: ['c']}


def test_energy_report():
    """测试能量报告"""
    print("=== 测试能量报告 ===")
    report = energy_report(A, s_values=(2.5,))
    q = report.quantities
    assert q['E'] == 15 and q['E_3'] == 33 and q['E_4'] == 87
    assert q['T_2'] == 15 and q['T_3'] == 99
    assert q['sigma_2'] == 1
    assert 'T_4' in q
    assert q['E_2.5'] == pytest.approx(3 ** 2.5 + 6)
    assert report.K == Fraction(9, 5)
    assert report.M == Fraction(33, 25)
    assert report.L == 3

    data = report.to_json()
    assert data['derived']['K'] == pytest.approx(1.8)
    assert data['quantities']['E'] == 15
    frame = report.to_frame()
    assert frame.loc['E', 'value'] == 15
    assert frame.loc['K', 'group'] == 'derived'

    H = FiniteSet.whole(GroupDescriptor.cube(3))
    sub = energy_report(H)
    assert sub.K == 1 and sub.M == 1 and sub.M_E4 == 1

    with pytest.raises(PreconditionError):
        energy_report(FiniteSet(Z))
    print("能量报告测试通过")


def main():
    """主测试函数"""
    print("开始能量统计测试...\n")
    test_energies()
    test_t_and_sigma()
    test_brute_force_oracles()
    test_energy_inequalities()
    test_restricted()
    test_exact_checks()
    test_multiplicative()
    test_levels()
    test_energy_report()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
