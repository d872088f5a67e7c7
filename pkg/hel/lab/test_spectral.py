"""
算子与谱测试

验证算子构造、Jacobi 分解以及各条谱恒等式 / 不等式
"""

import math
import random

import numpy as np
import pytest

from hel.lab.convolution import correlate
from hel.lab.energies import autocorrelation, energy
from hel.lab.exceptions import CapExceededError, ConvergenceError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupDescriptor, GroupFunction, sumset
from hel.lab.spectral import (
    SpectrumAnalyzer,
    abs_spectrum_check,
    build_operator,
    decompose_matrix,
    decomposition_checks,
    diagonal_convexity_check,
    fourth_power_trace_check,
    g_bound_checks,
    jacobi_eigh,
    li_inequality_check,
    mu_g_a_checks,
    operator_product_checks,
    perron_frobenius_check,
    rank_one_check,
    rayleigh_check,
    tensor_operator_check,
    triangles_identity_check,
    weighted_energy_check,
)

Z = GroupDescriptor.integers()
Z32 = GroupDescriptor.cyclic(32)
Z64 = GroupDescriptor.cyclic(64)


def _cube_group(dim):
    G = GroupDescriptor.cube(dim)
    return G, FiniteSet.whole(G)


def _random_set(G, rng, size):
    return FiniteSet(G, tuple(rng.sample(range(G.modulus), size)))


def _even_function(G, rng, size=8, low=-3, high=3):
    neg = G.negator()
    values = {}
    for x in rng.sample(range(G.modulus), size):
        v = rng.randint(low, high)
        values[x] = v
        values[neg(x)] = v
    return GroupFunction(G, values)


def _all_pass(results):
    return all(r.passed for r in results if not r.skipped)


def test_build_operator_examples():
    """测试算子构造的小例子"""
    print("=== 测试算子构造 ===")
    A = FiniteSet(Z, (0, 1))
    D = FiniteSet(Z, (-1, 0, 1))
    op = build_operator('rect-diff', A, A, D)
    assert np.array_equal(op.matrix, np.ones((2, 2)))

    G, H = _cube_group(2)
    sym = build_operator('sym-diff', H, g=autocorrelation(H))
    assert np.array_equal(sym.matrix, np.full((4, 4), 4.0))

    A3 = FiniteSet(Z, (0, 1, 3))
    B = FiniteSet(Z, (0, 1))
    S = sumset(A3, B)
    plus = build_operator('rect-sum', A3, B, S)
    assert np.array_equal(plus.matrix, np.ones((3, 2)))

    # 逐个元素重建
    rng = random.Random(3)
    A = _random_set(Z32, rng, 7)
    B = _random_set(Z32, rng, 5)
    g = _even_function(Z32, rng)
    op = build_operator('rect-diff', A, B, g)
    for i, x in enumerate(A.elements):
        for j, y in enumerate(B.elements):
            assert op.matrix[i, j] == g(Z32.sub(x, y))
    print("算子构造测试通过")


def test_build_operator_errors():
    A = FiniteSet(Z, (0, 1))
    B = FiniteSet(Z, (0, 1, 2))
    with pytest.raises(PreconditionError):
        build_operator('rect-diff', A, B, A)
    with pytest.raises(CapExceededError):
        build_operator('sym-diff', B, g=B, max_dim=2)
    with pytest.raises(PreconditionError):
        build_operator('sym-diff', A, g=GroupFunction(Z, {0: 1j}))
    with pytest.raises(PreconditionError):
        build_operator('triangle', A, g=A)


def test_decompose_examples():
    """测试分解的小例子"""
    print("=== 测试分解 ===")
    dec = decompose_matrix([[1, 2], [3, 4]], symmetric=False)
    assert math.isclose(float(np.sum(dec.values ** 2)), 30.0, rel_tol=1e-12)

    dec = decompose_matrix(np.ones((2, 2)), symmetric=False)
    assert np.allclose(dec.values, [2.0, 0.0], atol=1e-12)

    _, H = _cube_group(2)
    dec = build_operator('sym-diff', H, g=autocorrelation(H)).decompose()
    assert dec.symmetric
    assert np.allclose(dec.values, [16.0, 0.0, 0.0, 0.0], atol=1e-10)
    assert np.allclose(dec.left[:, 0], 0.5)
    assert math.isclose(dec.means[0], 2.0)
    print("分解测试通过")


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(7)
    for n in (1, 2, 5, 20, 33):
        m = rng.standard_normal((n, n))
        m = m + m.T
        values, vectors, _ = jacobi_eigh(m)
        assert np.allclose(np.sort(values), np.linalg.eigvalsh(m), atol=1e-9)
        assert np.allclose(vectors.T @ vectors, np.eye(n), atol=1e-9)
        assert np.allclose(m @ vectors, vectors * values, atol=1e-8)


def test_jacobi_errors():
    with pytest.raises(PreconditionError):
        jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ConvergenceError):
        jacobi_eigh([[1.0, 2.0], [2.0, 1.0]], max_sweeps=0)


def test_ordering_and_signs():
    dec = decompose_matrix(np.diag([1.0, -3.0, 3.0, 0.5]), symmetric=True)
    assert np.allclose(dec.values, [3.0, -3.0, 1.0, 0.5])
    for j in range(4):
        col = dec.left[:, j]
        first = col[np.flatnonzero(np.abs(col) > 1e-9)[0]]
        assert first > 0


def test_decomposition_invariants():
    """测试分解不变量（正交、重构、迹公式）"""
    print("=== 测试分解不变量 ===")
    rng = random.Random(11)
    for _ in range(3):
        A = _random_set(Z64, rng, 12)
        B = _random_set(Z64, rng, 6)
        g = _even_function(Z64, rng, size=10)
        for kind in ('rect-diff', 'rect-sum'):
            op = build_operator(kind, A, B, g)
            results = decomposition_checks(op)
            assert _all_pass(results), [r.check_id for r in results if r.failed]
            assert any(r.check_id == 'spectral.trace.l4' and not r.skipped for r in results)
        for kind in ('sym-diff', 'sym-sum'):
            op = build_operator(kind, A, g=g)
            results = decomposition_checks(op)
            assert _all_pass(results), [r.check_id for r in results if r.failed]
    print("分解不变量测试通过")


def test_rect_singular_vectors():
    rng = np.random.default_rng(5)
    m = rng.integers(-3, 4, size=(7, 4)).astype(float)
    dec = decompose_matrix(m, symmetric=False)
    assert np.allclose(dec.reconstruct(), m, atol=1e-9)
    assert np.allclose(dec.values, np.linalg.svd(m, compute_uv=False), atol=1e-9)
    wide = decompose_matrix(m.T, symmetric=False)
    assert np.allclose(wide.reconstruct(), m.T, atol=1e-9)
    assert dec.orthonormality_residual() < 1e-9
    assert wide.orthonormality_residual() < 1e-9


def test_rank_one():
    """测试 A−B ⊆ D、A+B ⊆ S 时的秩一算子"""
    print("=== 测试秩一算子 ===")
    A = FiniteSet(Z, (0, 1))
    D = FiniteSet(Z, (-1, 0, 1))
    S = FiniteSet(Z, (0, 1, 2))
    results = rank_one_check(A, A, D, S)
    assert _all_pass(results)
    main = [r for r in results if r.check_id == 'spectral.rank_one.diff.main'][0]
    assert math.isclose(main.lhs, 2.0)

    A3 = FiniteSet(Z, (0, 1, 3))
    B = FiniteSet(Z, (0, 1))
    results = rank_one_check(A3, B, sumset(A3, B, 1, -1), sumset(A3, B))
    assert _all_pass(results)
    main = [r for r in results if r.check_id == 'spectral.rank_one.diff.main'][0]
    assert math.isclose(main.lhs, math.sqrt(6))

    _, H = _cube_group(3)
    results = rank_one_check(H, H, H, H)
    assert _all_pass(results)
    sym = [r for r in results if r.check_id == 'spectral.rank_one.sym_diff.main'][0]
    assert math.isclose(sym.lhs, 8.0)

    with pytest.raises(PreconditionError):
        rank_one_check(A3, B, FiniteSet(Z, (0, 1)), None)
    print("秩一算子测试通过")


def test_perron_frobenius():
    assert perron_frobenius_check(np.ones((5, 5))).passed
    assert perron_frobenius_check(np.diag([3.0, 1.0, 2.0])).passed
    # 顶部特征值退化
    assert perron_frobenius_check(np.kron(np.eye(2), np.ones((3, 3)))).passed
    rng = random.Random(2)
    for _ in range(3):
        A = _random_set(Z64, rng, 20)
        op = build_operator('sym-diff', A, g=autocorrelation(A))
        assert perron_frobenius_check(op.matrix).passed
    with pytest.raises(PreconditionError):
        perron_frobenius_check(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_diagonal_convexity():
    res = diagonal_convexity_check(np.diag([1.0, -1.0]), trials=4)
    assert res.passed
    assert math.isclose(res.rhs, 2.0)
    rng = np.random.default_rng(1)
    m = rng.standard_normal((8, 8))
    assert diagonal_convexity_check(m + m.T, trials=16, seed=3).passed
    # 45° 旋转基上对角元为零
    q = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    diag = np.einsum('ij,ij->j', q, np.diag([1.0, -1.0]) @ q)
    assert np.allclose(diag, 0.0)


def test_weighted_energy():
    """测试 |A|²σ²(ψ,B) ≤ E_3(A,B)σ(ψ²,D)"""
    print("=== 测试 3/2 能量引理 ===")
    G, H = _cube_group(3)
    results = weighted_energy_check(H, H, H, H, H)
    assert len(results) == 2
    for r in results:
        assert r.lhs == r.rhs == 8 ** 6
        assert r.passed

    zero = GroupFunction(G, {})
    assert all(r.lhs == 0 and r.passed for r in weighted_energy_check(H, H, zero, H, H))

    rng = random.Random(8)
    for _ in range(4):
        A = _random_set(Z64, rng, rng.randint(4, 16))
        B = _random_set(Z64, rng, rng.randint(4, 16))
        psi = GroupFunction(Z64, {x: rng.choice((-1, 1)) for x in range(64)})
        results = weighted_energy_check(A, B, psi, sumset(A, B, 1, -1), sumset(A, B))
        assert _all_pass(results)

    A = FiniteSet(Z, (0, 5))
    with pytest.raises(PreconditionError):
        weighted_energy_check(A, A, A, FiniteSet(Z, (0,)), None)
    print("3/2 能量引理测试通过")


def test_li_inequality():
    _, H = _cube_group(3)
    for r in li_inequality_check(H, H, 1):
        assert r.passed
    first = li_inequality_check(H, H, -1)[0]
    assert math.isclose(first.lhs, 8 ** 7)
    assert first.rhs == 8 ** 7

    one = FiniteSet(Z, (4,))
    for r in li_inequality_check(one, one, 1):
        assert r.passed
        assert math.isclose(float(r.lhs), 1.0)

    rng = random.Random(13)
    for _ in range(4):
        A = _random_set(Z64, rng, rng.randint(3, 20))
        B = _random_set(Z64, rng, rng.randint(3, 20))
        for sign in (1, -1):
            assert _all_pass(li_inequality_check(A, B, sign))


def test_mu_g_a():
    """测试特征函数均值的恒等式"""
    print("=== 测试 μ_α g_α 恒等式 ===")
    G, H = _cube_group(2)
    results = mu_g_a_checks(H, H)
    assert _all_pass(results)
    first = results[0]
    assert first.rhs == 16
    assert math.isclose(first.lhs, 16.0)

    A = FiniteSet(Z32, (0, 3, 7, 8, 20))
    results = mu_g_a_checks(A, GroupFunction.delta(Z32))
    assert math.isclose(results[0].lhs, 5.0)
    assert results[0].rhs == 5

    rng = random.Random(21)
    for _ in range(4):
        A = _random_set(Z32, rng, rng.randint(4, 12))
        g = _even_function(Z32, rng, size=6)
        results = mu_g_a_checks(A, g)
        assert _all_pass(results)
        g = _even_function(Z32, rng, size=6, low=0, high=4)
        results = mu_g_a_checks(A, g)
        assert len([r for r in results if not r.skipped]) == 4
        assert _all_pass(results)

    with pytest.raises(PreconditionError):
        mu_g_a_checks(A, GroupFunction(Z32, {1: 1}))
    print("μ_α g_α 恒等式测试通过")


def test_tensor_operator():
    A = FiniteSet(Z, (0, 1))
    results = tensor_operator_check(A, autocorrelation(A), 2)
    assert _all_pass(results)
    assert math.isclose(results[1].lhs, 9.0)

    _, H = _cube_group(2)
    results = tensor_operator_check(H, H, 2)
    assert _all_pass(results)
    assert math.isclose(results[1].rhs, 16.0)

    rng = random.Random(4)
    A = _random_set(Z32, rng, 5)
    assert _all_pass(tensor_operator_check(A, _even_function(Z32, rng, size=4), 3))

    with pytest.raises(CapExceededError):
        tensor_operator_check(_random_set(Z64, rng, 23), _even_function(Z64, rng), 2)


def test_g_bound():
    G, H = _cube_group(2)
    g = autocorrelation(H)
    results = g_bound_checks(H, g, GroupFunction.indicator(H))
    assert _all_pass(results)
    size = [r for r in results if r.check_id == 'spectral.g_bound.size'][0]
    assert math.isclose(size.lhs, 4.0)

    A = FiniteSet(Z32, (1, 2, 9, 17))
    results = g_bound_checks(A, GroupFunction.delta(Z32))
    assert _all_pass(results)

    rng = random.Random(6)
    for _ in range(4):
        A = _random_set(Z32, rng, rng.randint(4, 16))
        g = _even_function(Z32, rng, size=8, low=0, high=5)
        if not len(g):
            continue
        assert _all_pass(g_bound_checks(A, g))
        g1 = GroupFunction(Z32, {x: rng.randint(0, 2) for x in rng.sample(range(32), 5)})
        if len(g1):
            assert _all_pass(g_bound_checks(A, correlate(g1, g1), g1))

    with pytest.raises(PreconditionError):
        g_bound_checks(A, GroupFunction(Z32, {0: -1}))


def test_triangles_identity():
    """测试三角形恒等式"""
    print("=== 测试三角形恒等式 ===")
    G, H = _cube_group(2)
    res = triangles_identity_check(H, H, H)
    assert res.passed
    assert math.isclose(res.lhs, 64.0)

    res = triangles_identity_check(H, H, GroupFunction(G, {}))
    assert res.lhs == 0.0 and res.passed

    rng = random.Random(17)
    for _ in range(3):
        A = _random_set(Z32, rng, rng.randint(4, 12))
        g1 = _even_function(Z32, rng, size=6)
        g2 = _even_function(Z32, rng, size=6)
        oracle = sum(g1(Z32.sub(x, y)) * g1(Z32.sub(x, z)) * g2(Z32.sub(y, z))
                     for x in A for y in A for z in A)
        res = triangles_identity_check(A, g1, g2)
        assert res.passed
        assert math.isclose(res.lhs, oracle, abs_tol=1e-9)
    print("三角形恒等式测试通过")


def test_operator_products_and_traces():
    rng = random.Random(9)
    A = _random_set(Z32, rng, 9)
    B = _random_set(Z32, rng, 5)
    g = GroupFunction(Z32, {x: rng.randint(-2, 3) for x in rng.sample(range(32), 10)})
    results = operator_product_checks(A, B, g)
    assert len(results) == 4
    assert all(r.lhs == 0 and r.passed for r in results)

    for _ in range(3):
        m = np.random.default_rng(rng.randint(0, 99)).integers(-4, 5, size=(6, 4))
        assert fourth_power_trace_check(m).passed


def test_abs_spectrum_and_rayleigh():
    rng = random.Random(12)
    for _ in range(3):
        A = _random_set(Z64, rng, rng.randint(3, 15))
        assert abs_spectrum_check(A, _even_function(Z64, rng)).passed
        res = rayleigh_check(A)
        assert res.passed
        assert res.rhs == energy(A) / len(A)


def test_spectrum_analyzer():
    A = FiniteSet(Z, (0, 1, 3))
    report = SpectrumAnalyzer(printlog=False).run('sym-diff', A, g=autocorrelation(A))
    assert report['decomposition'] == 'eigen'
    assert len(report['eigenvalues']) == 3
    assert len(report['means']) == 3
    assert all(c.get('pass', True) for c in report['checks'])
    with pytest.raises(TypeError):
        SpectrumAnalyzer(unknown=1)


def main():
    """主测试函数"""
    print("开始算子与谱测试...\n")
    test_build_operator_examples()
    test_build_operator_errors()
    test_decompose_examples()
    test_jacobi_matches_numpy()
    test_jacobi_errors()
    test_ordering_and_signs()
    test_decomposition_invariants()
    test_rect_singular_vectors()
    test_rank_one()
    test_perron_frobenius()
    test_diagonal_convexity()
    test_weighted_energy()
    test_li_inequality()
    test_mu_g_a()
    test_tensor_operator()
    test_g_bound()
    test_triangles_identity()
    test_operator_products_and_traces()
    test_abs_spectrum_and_rayleigh()
    test_spectrum_analyzer()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
