"""
卷积引擎测试

小集合上的值与手算结果对照，大集合上稠密路径与逐点求和对照
"""

from collections import Counter

import pytest

from hel.lab.convolution import (
    TupleFunction,
    convolve,
    convolve_kfold,
    correlate,
    diagonal_correlation_check,
    generalized_convolution,
    generalized_convolution_at,
    multi_scalar_check,
    scalar_product_check,
    sigma_c_check,
    tensor_c_check,
    tensor_convolution_check,
    tensor_power,
    tensor_set,
    triple_correlation_mixed,
)
from hel.lab.exceptions import CapExceededError, DescriptorMismatchError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupDescriptor, GroupFunction

Z = GroupDescriptor.integers()
A = FiniteSet(Z, (0, 1, 3))
B = FiniteSet(Z, (0, 2, 3, 7))


def test_small_values():
    """测试手算的卷积与相关"""
    print("=== 测试卷积与相关 ===")
    assert convolve(A, A) == GroupFunction(Z, {0: 1, 1: 2, 2: 1, 3: 2, 4: 2, 6: 1})
    assert correlate(A, A) == GroupFunction(Z, {-3: 1, -2: 1, -1: 1, 0: 3, 1: 1, 2: 1, 3: 1})
    assert correlate(A, A)(0) == len(A)
    assert convolve(A, B).total() == len(A) * len(B)

    # (A∘B)(x) = (A*B^c)(−x)
    corr = correlate(A, B)
    reflected = convolve(A, GroupFunction.indicator(B).reflect())
    assert all(corr(x) == reflected(-x) for x in range(-10, 11))

    assert convolve_kfold(A, 1) == GroupFunction.indicator(A)
    assert convolve_kfold(A, 3).total() == 27
    assert convolve_kfold(A, 3)(4) == 6
    with pytest.raises(PreconditionError):
        convolve_kfold(A, 0)
    with pytest.raises(DescriptorMismatchError):
        convolve(A, FiniteSet(GroupDescriptor.cyclic(5), (1,)))
    print("卷积与相关测试通过")


def _naive(X, Y):
    add = X.descriptor.adder()
    return GroupFunction(X.descriptor, dict(Counter(add(x, y) for x in X for y in Y)))


def test_dense_path():
    """测试稠密路径与逐点求和一致"""
    print("=== 测试稠密卷积 ===")
    interval = FiniteSet(Z, tuple(range(64)))
    conv = convolve(interval, interval)
    assert conv(63) == 64
    assert conv(0) == 1 and conv(126) == 1
    assert conv.total() == 64 * 64
    assert conv == _naive(interval, interval)

    G = GroupDescriptor.cyclic(50)
    C = FiniteSet(G, tuple(range(40)))
    assert convolve(C, C) == _naive(C, C)

    scattered = FiniteSet(Z, tuple(k * k for k in range(40)))
    assert convolve(scattered, scattered) == _naive(scattered, scattered)

    F = FiniteSet(GroupDescriptor.cube(6), tuple(range(0, 64, 3)))
    assert convolve(F, F) == _naive(F, F)
    print("稠密卷积测试通过")


def test_generalized_convolution():
    """测试广义卷积"""
    print("=== 测试广义卷积 ===")
    assert generalized_convolution([A, A]) == TupleFunction.from_function(correlate(A, A))

    C3 = generalized_convolution([A, A, A])
    assert C3.arity == 2
    assert C3((0, 0)) == 3
    assert C3((1, 3)) == 1
    assert C3.total() == 27
    assert generalized_convolution_at([A, A, A], (1, 3)) == 1
    assert generalized_convolution_at([A, A, A], (2, 2)) == 1
    assert all(C3(key) == generalized_convolution_at([A, A, A], key) for key in C3.keys())

    mixed = triple_correlation_mixed(A, A, B)
    assert mixed == generalized_convolution([A, A, B])

    assert C3.threshold(2).keys() == [(0, 0)]
    assert C3.squared_sum() >= C3.total()

    with pytest.raises(PreconditionError):
        generalized_convolution([A])
    with pytest.raises(PreconditionError):
        generalized_convolution_at([A, A, A], (1,))
    with pytest.raises(CapExceededError):
        generalized_convolution([A] * 5)
    with pytest.raises(CapExceededError):
        generalized_convolution([FiniteSet(Z, tuple(range(200)))] * 3)
    with pytest.raises(PreconditionError):
        TupleFunction(Z, 2, {(1,): 1})
    print("广义卷积测试通过")


def test_tensor_powers():
    T = tensor_power(A, 2)
    assert T.descriptor == GroupDescriptor.product(Z, Z)
    assert len(T) == 9 and T((1, 3)) == 1
    assert tensor_set(A, 2) == T.support
    w = GroupFunction(Z, {0: 2, 1: 3})
    assert tensor_power(w, 2)((1, 1)) == 9
    with pytest.raises(PreconditionError):
        tensor_power(A, 0)


def test_identity_checks():
    """测试精确恒等式"""
    print("=== 测试卷积恒等式 ===")
    w = GroupFunction(Z, {-1: 1, 0: 2, 1: 1})
    results = [
        scalar_product_check([A, B], [B, A]),
        scalar_product_check([A, A, B], [B, w, A]),
        multi_scalar_check([A, B], 2),
        multi_scalar_check([A, B, w], 2),
        multi_scalar_check([A, B], 3),
        sigma_c_check([A, B], 2),
        sigma_c_check([A, B, w], 2),
        sigma_c_check([w, A, B], 3),
        tensor_c_check([A, B]),
        tensor_c_check([A, A, B]),
        diagonal_correlation_check(A, B, 2),
        diagonal_correlation_check(A, B, 3),
    ]
    results += tensor_convolution_check(A, w)
    for res in results:
        print(f"{res.check_id}: lhs={res.lhs} rhs={res.rhs}")
        assert res.passed, res.check_id
    assert results[0].check_id == 'convolution.scalar_C.l2'
    assert results[0].lhs == results[0].rhs > 0

    with pytest.raises(PreconditionError):
        sigma_c_check([A, A, A, A], 2)
    with pytest.raises(PreconditionError):
        scalar_product_check([A, B], [A])
    print("卷积恒等式测试通过")


def main():
    """主测试函数"""
    print("开始卷积引擎测试...\n")
    test_small_values()
    test_dense_path()
    test_generalized_convolution()
    test_tensor_powers()
    test_identity_checks()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
