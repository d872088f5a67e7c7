"""
生成器测试

验证各族集合的确定性与生成后断言的结构性质
"""

import pytest

from hel.lab.energies import autocorrelation, energy_moment, product_set, t_energy
from hel.lab.exceptions import GeneratorError
from hel.lab.generators import (
    FamilySpec,
    disjoint_subgroup_union,
    gen_ap,
    gen_convex,
    gen_cyclic_subgroup,
    gen_disjoint_subgroup_union,
    gen_geometric,
    gen_H_plus_dissociated,
    gen_mult_subgroup,
    gen_random,
    gen_subgroup,
    generate,
    is_convex,
    is_dissociated,
    predict_h_plus_lambda_energy,
    predict_union_energy,
    predict_union_t_energy,
    primitive_root,
)
from hel.lab.group_core import FiniteSet, GroupDescriptor


def _within(actual, predicted, factor):
    return predicted / factor <= actual <= predicted * factor


def test_convex():
    """测试凸集生成"""
    print("=== 测试凸集 ===")
    assert gen_convex('squares', 5).elements == (1, 4, 9, 16, 25)
    first = gen_convex('random-gaps', 40, seed=7)
    assert first == gen_convex('random-gaps', 40, seed=7)
    assert len(first) == 40 and is_convex(first)
    assert is_convex(gen_convex('power', 30, alpha=1.5))
    assert is_convex(gen_convex('power', 30, alpha=3.0))
    with pytest.raises(GeneratorError):
        gen_convex('power', 10, alpha=1.0)
    with pytest.raises(GeneratorError):
        gen_convex('squares', 2)
    with pytest.raises(GeneratorError):
        gen_convex('cubes', 5)
    assert not is_convex(gen_ap(8))
    print("凸集测试通过")


def test_progressions():
    assert gen_ap(4, 3, 2).elements == (3, 5, 7, 9)
    G = gen_geometric(6)
    assert G.elements == (1, 2, 4, 8, 16, 32)
    assert len(product_set(G, G)) == 2 * 6 - 1
    with pytest.raises(GeneratorError):
        gen_ap(3, step=0)
    with pytest.raises(GeneratorError):
        gen_geometric(3, ratio=1)


def test_mult_subgroup():
    """测试乘法子群"""
    print("=== 测试乘法子群 ===")
    A, _ = gen_mult_subgroup(7, 2)
    assert A.elements == (1, 2, 4)
    assert gen_mult_subgroup(7, 6)[0].elements == (1,)
    A, h = gen_mult_subgroup(13, 3)
    assert A.elements == (1, 5, 8, 12)
    assert h == 8
    assert primitive_root(13) == 2
    assert primitive_root(7) == 3
    A, _ = gen_mult_subgroup(101, 4)
    assert len(A) == 25
    with pytest.raises(GeneratorError):
        gen_mult_subgroup(15, 2)
    with pytest.raises(GeneratorError):
        gen_mult_subgroup(7, 4)
    print("乘法子群测试通过")


def test_subgroups():
    H = gen_subgroup(3, 5)
    assert len(H) == 8 and H.descriptor == GroupDescriptor.cube(5)
    assert gen_cyclic_subgroup(12, 4).elements == (0, 3, 6, 9)
    with pytest.raises(GeneratorError):
        gen_cyclic_subgroup(12, 5)
    with pytest.raises(GeneratorError):
        gen_subgroup(4, 3)


def test_dissociated():
    assert is_dissociated([1, 2, 4, 8])
    assert not is_dissociated([1, 2, 3])
    assert not is_dissociated([5, 5])
    with pytest.raises(GeneratorError):
        is_dissociated(range(1, 22))


def test_h_plus_dissociated():
    """测试 H 与分离集的并与直和"""
    print("=== 测试 H ∔ Λ ===")
    for mode in ('direct-sum', 'disjoint-union'):
        A, parts = gen_H_plus_dissociated(4, 2, 0, mode)
        assert A == parts['H'] == gen_subgroup(2, 4)

    A, parts = gen_H_plus_dissociated(6, 3, 3, 'direct-sum')
    H = parts['H']
    assert len(A) == 24
    r = autocorrelation(A)
    assert FiniteSet(A.descriptor, tuple(x for x, v in r.values.items() if v == len(A))) == H
    for s in (1.5, 2, 3):
        predicted = predict_h_plus_lambda_energy(len(H), len(A), s)
        assert _within(energy_moment(A, s), predicted, 4)

    A, parts = gen_H_plus_dissociated(7, 3, 4, 'disjoint-union')
    assert len(A) == 12
    assert not parts['Lambda'].intersection(parts['H']).elements

    A, _ = gen_H_plus_dissociated(6, 2, mode='disjoint-union', vectors=[4, 8, 48])
    assert len(A) == 7
    with pytest.raises(GeneratorError):
        gen_H_plus_dissociated(5, 3, vectors=[8, 16, 24])
    with pytest.raises(GeneratorError):
        gen_H_plus_dissociated(5, 3, 3)
    with pytest.raises(GeneratorError):
        gen_H_plus_dissociated(5, 2, mode='direct-sum', vectors=[1, 8])
    print("H ∔ Λ 测试通过")


def test_disjoint_subgroup_union():
    """测试完全不交子空间之并"""
    print("=== 测试 ⊔H_j ===")
    A, parts = gen_disjoint_subgroup_union(6, 1, 3)
    assert A == parts[0] == gen_subgroup(3, 6)

    A, parts = gen_disjoint_subgroup_union(6, 2, 3)
    assert len(A) == 2 * 7 + 1
    assert parts[0].intersection(parts[1]).elements == (0,)

    for k in (2, 3, 4):
        A, parts = gen_disjoint_subgroup_union(16, k, 4)
        K = len(parts) ** 2
        for s in (1.5, 2, 3):
            assert _within(energy_moment(A, s), predict_union_energy(len(A), K, s), 8)
        for t in (2, 3):
            assert _within(t_energy(A, t), predict_union_t_energy(len(A), K, t), 8)

    # k = 4, |H_j| = 4：T_3 = 47293，远离 |A|^5/K^2 ≈ 1450
    A, parts = gen_disjoint_subgroup_union(8, 4, 2)
    assert len(A) == 13
    assert t_energy(A, 3) == 47293
    assert not _within(t_energy(A, 3), predict_union_t_energy(13, 16, 3), 8)

    with pytest.raises(GeneratorError):
        disjoint_subgroup_union(4, [[1, 2], [2, 4]])
    with pytest.raises(GeneratorError):
        gen_disjoint_subgroup_union(5, 2, 3)
    print("⊔H_j 测试通过")


def test_random():
    Z64 = GroupDescriptor.cyclic(64)
    A = gen_random(Z64, 10, seed=3)
    assert A == gen_random(Z64, 10, seed=3)
    assert len(A) == 10
    assert gen_random(Z64, 64) == FiniteSet.whole(Z64)
    B = gen_random(GroupDescriptor.integers(), 12, seed=1)
    assert len(B) == 12 and all(0 <= x < 48 for x in B.elements)
    P = GroupDescriptor.product(GroupDescriptor.cyclic(3), GroupDescriptor.cube(2))
    assert len(gen_random(P, 5, seed=2)) == 5
    with pytest.raises(GeneratorError):
        gen_random(Z64, 65)


def test_family_spec():
    """测试族描述的解析与分派"""
    print("=== 测试族描述 ===")
    spec = FamilySpec.parse('convex:n=5,kind=squares')
    assert spec == FamilySpec.parse('convex:kind=squares,n=5')
    assert str(spec) == 'convex:kind=squares,n=5'
    assert generate(spec).set.elements == (1, 4, 9, 16, 25)
    assert 'convex' in generate(spec).tags

    spec = FamilySpec.parse('random:group=Z/64,n=10,seed=3')
    assert spec.seed == 3
    assert generate(spec).set == gen_random(GroupDescriptor.cyclic(64), 10, seed=3)
    assert FamilySpec.parse(str(spec)) == spec

    gen = generate('H-plus-dissociated:n=4,hdim=2')
    assert 'subgroup' in gen.tags
    assert gen.components['H'] == gen.set

    gen = generate('disjoint-subgroup-union:n=6,k=2,hdim=3')
    assert len(gen.components['parts']) == 2
    assert generate('multiplicative-subgroup:p=13,d=3').components['generator'] == 8
    assert 'small-multiplicative-doubling' in generate('geometric:n=5').tags
    assert 'arithmetic-progression' in generate('arithmetic-progression:n=6').tags

    with pytest.raises(GeneratorError):
        FamilySpec.parse('spiral:n=3')
    with pytest.raises(GeneratorError):
        generate('multiplicative-subgroup:p=13')
    with pytest.raises(GeneratorError):
        FamilySpec.parse('convex:n')
    print("族描述测试通过")


def main():
    """主测试函数"""
    print("开始生成器测试...\n")
    test_convex()
    test_progressions()
    test_mult_subgroup()
    test_subgroups()
    test_dissociated()
    test_h_plus_dissociated()
    test_disjoint_subgroup_union()
    test_random()
    test_family_spec()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
