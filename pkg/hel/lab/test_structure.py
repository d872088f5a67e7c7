"""
结构定理测试

层分解、BSG 提取与三条结构流程在子群、小集合与凸集上的行为
"""

import itertools
import math
from fractions import Fraction

import pytest

from hel.lab.base_check import CheckKind
from hel.lab.exceptions import CapExceededError, PipelineAbort, PreconditionError
from hel.lab.generators import gen_ap, gen_convex, gen_geometric, gen_H_plus_dissociated
from hel.lab.group_core import FiniteSet, GroupDescriptor, sumset
from hel.lab.structure import (
    E3Pipeline,
    StructurePipeline,
    TraceRecord,
    bsg_extract,
    convex_energy_ratios,
    convex_pipeline_trace,
    decay_profile_check,
    energy_gen_check,
    growth_size,
    level_decompose,
    pipeline_E3,
    pipeline_E4M,
    pipeline_E4T4,
    shifted_energy_check,
)

Z = GroupDescriptor.integers()
SMALL = FiniteSet(Z, (0, 1, 3))


def _cube(dim):
    return FiniteSet.whole(GroupDescriptor.cube(dim))


def _explicit_pass(results):
    """显式与恒等式检查全部通过（跳过的与渐近类不计）"""
    return all(r.passed for r in results if not r.skipped and r.kind is not CheckKind.ASYMPTOTIC)


def test_level_decompose():
    """测试二进层分解"""
    print("=== 测试层分解 ===")
    levels = level_decompose(SMALL)
    assert levels.K == Fraction(9, 5)
    assert levels.threshold == Fraction(5, 3)
    assert levels.buckets[1].elements == (-3, -2, -1, 1, 2, 3)
    assert levels.buckets[2].elements == (0,)
    assert levels.masses == {1: 6, 2: 9}
    assert levels.selected == 2 and levels.l == 2
    assert levels.delta == Fraction(10, 3)
    assert _explicit_pass(levels.checks())
    assert levels.to_json()['selected'] == 2

    H = _cube(3)
    levels = level_decompose(H)
    assert levels.K == 1
    assert list(levels.buckets) == [1]
    assert levels.D == H

    levels = level_decompose(SMALL, 3)
    assert levels.selected == 2
    assert _explicit_pass(levels.checks())

    with pytest.raises(PreconditionError):
        level_decompose(SMALL, 1)
    with pytest.raises(PreconditionError):
        level_decompose(FiniteSet(Z))
    print("层分解测试通过")


def test_bsg_subgroup():
    """测试子群上的 BSG：A' = B' = H"""
    print("=== 测试 BSG ===")
    H = _cube(3)
    A_prime, B_prime, cert = bsg_extract(H)
    assert A_prime == H and B_prime == H
    assert cert.alpha == 1
    assert cert.edges == 64
    assert cert.sumset_size == 8
    assert cert.min_paths == 8
    assert _explicit_pass(cert.checks())
    assert cert.to_json()['A_prime'] == [H.descriptor.encode(x) for x in range(8)]

    with pytest.raises(PreconditionError):
        bsg_extract(H, alpha=Fraction(3, 2))
    with pytest.raises(PreconditionError):
        bsg_extract(FiniteSet(H.descriptor, (0, 1)), H)
    print("BSG 测试通过")


def test_bsg_subgroup_with_dissociated():
    G = GroupDescriptor.cube(8)
    H = FiniteSet(G, tuple(range(16)))
    A = H.union(FiniteSet(G, (16, 32, 64, 128)))
    A_prime, B_prime, cert = bsg_extract(A)
    assert cert.measured_alpha == Fraction(4520, 8000)
    assert A_prime == H and B_prime == H
    assert _explicit_pass(cert.checks())


def test_bsg_random_sizes():
    """随机集合上构造保证的大小下界"""
    A = gen_convex('random-gaps', 40, seed=5)
    B = FiniteSet(Z, A.elements[:25])
    A_prime, B_prime, cert = bsg_extract(A, B)
    assert A_prime.issubset(A) and B_prime.issubset(B)
    assert _explicit_pass(cert.checks())


def test_growth_size():
    assert growth_size(SMALL, 1, 1) == 7
    assert growth_size(SMALL, 2, 1) == 10
    assert growth_size(_cube(3), 2, 2) == 8
    with pytest.raises(CapExceededError):
        growth_size(SMALL, 2, 2, cap=5)
    with pytest.raises(PreconditionError):
        growth_size(SMALL, 0, 1)


def test_best_translate():
    x, hits = StructurePipeline.best_translate(SMALL, FiniteSet(Z, (0, 1)))
    assert (x, hits) == (0, 2)


def test_trace_record():
    trace = TraceRecord('demo', 'abc')
    trace.value('K', Fraction(3, 2))
    trace.step('first', 'ref', CheckKind.EXPLICIT, 1, 2)
    trace.step('second', 'ref', CheckKind.ASYMPTOTIC, 5, 1)
    trace.skip('third', 'ref', CheckKind.EXACT, 'cap')
    frame = trace.to_frame()
    assert list(frame.index) == ['demo.first', 'demo.second', 'demo.third']
    assert frame.loc['demo.first', 'holds']
    data = trace.to_json()
    assert data['values'] == {'K': 1.5}
    assert 'pass' not in data['steps'][1]


def test_pipeline_e3():
    """测试 E_3 流程"""
    print("=== 测试 E_3 流程 ===")
    H = _cube(3)
    cert = pipeline_E3(H)
    assert cert.subset == H
    assert cert.measured['size'] == 8
    assert cert.measured['energy'] == 512
    assert cert.measured['growth'] == {(1, 1): 8, (2, 1): 8, (2, 2): 8}
    assert cert.parameters['M'] == 1
    assert _explicit_pass(cert.checks())
    data = cert.to_json()
    assert data['pipeline'] == 'structure.e3'
    assert data['measured']['growth']['2-2'] == 8

    cert = E3Pipeline(s=1.5, printlog=False).run(H)
    assert cert.subset == H

    with pytest.raises(PipelineAbort) as info:
        pipeline_E3(SMALL)
    assert isinstance(info.value.trace, TraceRecord)
    assert info.value.trace.results

    with pytest.raises(PreconditionError):
        pipeline_E3(H, s=3)
    with pytest.raises(CapExceededError):
        E3Pipeline(cap=4, printlog=False).run(H)
    print("E_3 流程测试通过")


def test_pipeline_e4m():
    H = _cube(3)
    cert = pipeline_E4M(H)
    assert cert.subset == H
    assert _explicit_pass(cert.checks())
    with pytest.raises(PreconditionError):
        pipeline_E4M(H, s=4)


def _pair_sums(L):
    return FiniteSet(L.descriptor, tuple(a ^ b for a, b in itertools.combinations(L.elements, 2)))


def test_pipelines_on_h_plus_lambda():
    """
    F_2^n 中 H ∔ Λ 的层结构

    λ_i − λ_j = λ_j − λ_i，混合层 H + (λ_i + λ_j) 上 |A_x| = 2|H|，
    其质量 2λ(λ−1)|H|³ 在 λ ≥ 3 时超过 H 的 λ²|H|³，抽屉原理选中混合层；
    A′ 落在 A ∩ (D + x) 中，至多 λ − 1 个 H 的陪集。
    """
    print("=== 测试 H ∔ Λ 上的结构流程 ===")
    A, parts = gen_H_plus_dissociated(8, 4, 4)
    H, L = parts['H'], parts['Lambda']
    mixed = sumset(H, _pair_sums(L))
    levels = level_decompose(A)
    assert levels.threshold == 40
    assert levels.masses == {1: 96 * 32 ** 2, 2: 16 * 64 ** 2}
    assert levels.selected == 1
    assert levels.D == mixed

    cert = pipeline_E3(A)
    subset = cert.subset
    assert subset.issubset(A)
    assert len({a >> 4 for a in subset.elements}) <= 3
    assert len(sumset(subset, subset, 1, -1)) == 4 * len(H)
    assert _explicit_pass(cert.checks())

    cert = pipeline_E4M(A)
    assert cert.subset == subset
    assert len(cert.subset) == 48
    assert len({a >> 4 for a in cert.subset.elements}) == 3
    print("H ∔ Λ 结构流程测试通过")


def test_e3_on_h_plus_lambda_large():
    """λ = 8：|A′ − A′| 达到 (1 + C(λ−1, 2))|H|，超过 4|H|"""
    A, parts = gen_H_plus_dissociated(14, 6, 8)
    H, L = parts['H'], parts['Lambda']
    levels = level_decompose(A)
    assert levels.masses == {1: 1792 * 128 ** 2, 3: 64 * 512 ** 2}
    assert levels.D == sumset(H, _pair_sums(L))

    subset = pipeline_E3(A).subset
    width = len(sumset(subset, subset, 1, -1))
    assert width <= (1 + math.comb(7, 2)) * len(H)
    assert width == 1408


def test_pipeline_e4t4():
    """测试 E_4/T_4 流程"""
    print("=== 测试 E_4/T_4 流程 ===")
    H = _cube(3)
    cert = pipeline_E4T4(H)
    assert cert.subset == H
    assert cert.parameters['mu'] == 1
    assert cert.parameters['nu'] == pytest.approx(1.0)
    assert cert.parameters['M'] == pytest.approx(1.0)
    by_id = {r.check_id: r for r in cert.checks()}
    assert by_id['structure.e4t4.identity'].passed
    assert by_id['structure.e4t4.restricted_mass'].passed
    assert _explicit_pass(cert.checks())

    A = gen_convex('squares', 10)
    cert = pipeline_E4T4(A)
    assert cert.subset.issubset(A)
    assert _explicit_pass(cert.checks())
    print("E_4/T_4 流程测试通过")


def test_convex_trace():
    """测试凸集能量证明链"""
    print("=== 测试凸集证明链 ===")
    A = gen_convex('squares', 12)
    trace = convex_pipeline_trace(A)
    assert trace.values['convex']
    for key in ('K', 'l', 'Delta', 'mu_0', 'd', 'sigma', 'sigma_star', 'tau'):
        assert key in trace.values
    assert _explicit_pass(trace.checks())
    ids = {r.check_id for r in trace.checks()}
    assert 'structure.convex.convex.energy' in ids
    frame = trace.to_frame()
    assert set(frame.columns) == {'lhs', 'rhs', 'kind', 'holds'}

    trace = convex_pipeline_trace(FiniteSet(Z, (0, 5)))
    assert _explicit_pass(trace.checks())
    assert trace.to_json()['steps']

    trace = convex_pipeline_trace(gen_ap(10))
    assert not trace.values['convex']
    assert 'structure.convex.convex.energy' not in {r.check_id for r in trace.checks()}
    print("凸集证明链测试通过")


def test_decay_profile():
    res = decay_profile_check(gen_convex('squares', 20))
    assert res.kind is CheckKind.ASYMPTOTIC and res.passed is None
    assert res.ratio > 0

    G = gen_geometric(8)
    assert decay_profile_check(G, 'mult-doubling').ratio > 0
    assert decay_profile_check(G, 'shifted-product').ratio > 0

    with pytest.raises(PreconditionError):
        decay_profile_check(gen_ap(8), 'convex')
    with pytest.raises(PreconditionError):
        decay_profile_check(gen_geometric(4), 'spiral')
    with pytest.raises(PreconditionError):
        decay_profile_check(FiniteSet(Z, (0, 1, 2)), 'mult-doubling')


def test_energy_ratios():
    """凸集与乘法结构下的能量比值"""
    print("=== 测试能量比值 ===")
    A = gen_convex('squares', 16)
    e3, e2 = convex_energy_ratios(A)
    assert e3.check_id == 'structure.convex_e3'
    assert e2.check_id == 'structure.convex_energy'
    assert e3.passed is None and e3.ratio > 0
    with pytest.raises(PreconditionError):
        convex_energy_ratios(gen_ap(8))

    G = gen_geometric(10)
    res = energy_gen_check(G)
    assert res.kind is CheckKind.ASYMPTOTIC
    assert res.detail['M'] == pytest.approx(19 / 10)
    assert shifted_energy_check(G).ratio > 0

    with pytest.raises(PreconditionError):
        energy_gen_check(FiniteSet(Z, (0, 1, 2)))
    with pytest.raises(PreconditionError):
        shifted_energy_check(FiniteSet(Z, (-1, 1, 2)))
    with pytest.raises(PreconditionError):
        energy_gen_check(_cube(2))
    print("能量比值测试通过")

def main():
    """主测试函数"""
    print("开始结构定理测试...\n")
    test_level_decompose()
    test_bsg_subgroup()
    test_bsg_subgroup_with_dissociated()
    test_bsg_random_sizes()
    test_growth_size()
    test_best_translate()
    test_trace_record()
    test_pipeline_e3()
    test_pipeline_e4m()
    test_pipelines_on_h_plus_lambda()
    test_e3_on_h_plus_lambda_large()
    test_pipeline_e4t4()
    test_convex_trace()
    test_decay_profile()
    test_energy_ratios()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
