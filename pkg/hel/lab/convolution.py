"""
精确卷积引擎

提供两种卷积、k 重卷积、广义卷积 C_k 以及张量幂：
- (f*g)(x) = Σ_y f(y) g(x−y)
- (f∘g)(x) = Σ_y f(y) g(y+x)
- C_k(f_0,…,f_{k−1})(x_1,…,x_{k−1}) = Σ_z f_0(z) Π f_i(z+x_i)

所有值均为精确整数（整数输入时）；迭代顺序固定，结果可复现。
不使用傅里叶变换：Z 与 Z/N 上的稠密情形走 numpy 的直接求和。
"""

import hashlib
import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from hel.lab.base_check import CheckKind, make_result
from hel.lab.exceptions import CapExceededError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupDescriptor, GroupFunction, require_same

MAX_TUPLE_ARITY = 3          # k ≤ 4
MAX_TUPLE_BASE = 128         # 物化 C_k 时每个因子的支撑上限
MAX_TUPLE_WORK = 1 << 25
DENSE_MIN_WORK = 1024
INT64_SAFE = 1 << 62


def as_function(obj):
    """FiniteSet 转为示性函数，GroupFunction 原样返回"""
    if isinstance(obj, FiniteSet):
        return GroupFunction.indicator(obj)
    return obj


def _dense_convolve(f, g, G):
    if G.kind not in ('Z', 'ZmodN') or f.value_kind != 'int' or g.value_kind != 'int':
        return None
    work = len(f) * len(g)
    if work < DENSE_MIN_WORK:
        return None
    fmin, gmin = min(f.values), min(g.values)
    fspan = max(f.values) - fmin + 1
    gspan = max(g.values) - gmin + 1
    if fspan * gspan > 16 * work or max(fspan, gspan) > (1 << 24):
        return None
    if f.sup_norm() * g.sup_norm() * min(len(f), len(g)) >= INT64_SAFE:
        return None
    farr = np.zeros(fspan, dtype=np.int64)
    garr = np.zeros(gspan, dtype=np.int64)
    for x, v in f.values.items():
        farr[x - fmin] = v
    for x, v in g.values.items():
        garr[x - gmin] = v
    conv = np.convolve(farr, garr)
    base = fmin + gmin
    if G.kind == 'ZmodN':
        n = G.modulus
        folded = np.zeros(n, dtype=np.int64)
        np.add.at(folded, (base + np.arange(conv.size)) % n, conv)
        nz = np.flatnonzero(folded)
        return GroupFunction(G, {int(i): int(folded[i]) for i in nz})
    nz = np.flatnonzero(conv)
    return GroupFunction(G, {base + int(i): int(conv[i]) for i in nz})


def convolve(f, g):
    """
    卷积 (f*g)(x) = Σ_y f(y) g(x−y)

    参数：
    - f, g: GroupFunction 或 FiniteSet（按示性函数处理），同一个群

    返回：
    - GroupFunction，总质量为 (Σf)(Σg)
    """
    f, g = as_function(f), as_function(g)
    G = require_same(f, g)
    dense = _dense_convolve(f, g, G)
    if dense is not None:
        return dense
    add = G.adder()
    out = defaultdict(int)
    for x, u in f.values.items():
        for y, v in g.values.items():
            out[add(x, y)] += u * v
    return GroupFunction(G, dict(out))


def correlate(f, g):
    """
    相关 (f∘g)(x) = Σ_y f(y) g(y+x)

    满足 (f∘g)(x) = (f*g^c)(−x)，且 (A∘A)(0) = |A|。
    """
    f, g = as_function(f), as_function(g)
    return convolve(f.reflect(), g)


def convolve_kfold(f, k):
    """
    k 重卷积：*_1 f = f，*_k f = f * (*_{k−1} f)

    参数：
    - f: GroupFunction 或 FiniteSet
    - k: 正整数

    返回：
    - GroupFunction，总质量为 (Σf)^k
    """
    if k < 1:
        raise PreconditionError('k 必须 ≥ 1')
    f = as_function(f)
    result = f
    for _ in range(k - 1):
        result = convolve(f, result)
    return result


@dataclass(frozen=True, eq=False)
class TupleFunction:
    """
    元组函数 Γ^{arity} → 整数

    用于表示 C_k(F)(x_1,…,x_{k−1}) 以及元组集合 𝒫（值全为 1）。
    """

    descriptor: GroupDescriptor
    arity: int
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for key in self.values:
            if len(key) != self.arity:
                raise PreconditionError(f'元组长度 {len(key)} 与声明的 {self.arity} 不符')
        object.__setattr__(self, 'values', {k: v for k, v in self.values.items() if v != 0})

    @classmethod
    def indicator(cls, descriptor, tuples, arity):
        return cls(descriptor, arity, {tuple(t): 1 for t in tuples})

    @classmethod
    def from_function(cls, f):
        """单变量函数视为 1 元元组函数"""
        return cls(f.descriptor, 1, {(x,): v for x, v in f.values.items()})

    def __call__(self, key):
        return self.values.get(tuple(key), 0)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, TupleFunction):
            return NotImplemented
        return (self.descriptor, self.arity, self.values) == (other.descriptor, other.arity, other.values)

    __hash__ = None

    def items(self):
        return sorted(self.values.items())

    def keys(self):
        return sorted(self.values)

    def total(self):
        return sum(self.values.values())

    def squared_sum(self):
        return sum(v * v for v in self.values.values())

    def threshold(self, level):
        """元组集合 {x : F(x) ≥ level}"""
        return TupleFunction.indicator(self.descriptor,
                                       (k for k, v in self.values.items() if v >= level), self.arity)

    def to_json(self):
        enc = self.descriptor.encode
        return {'group': self.descriptor.to_json(), 'arity': self.arity,
                'values': [[[enc(x) for x in key], v] for key, v in self.items()]}


def _check_tuple_caps(base, rest):
    if len(rest) > MAX_TUPLE_ARITY:
        raise CapExceededError(f'C_k 只物化到 k ≤ {MAX_TUPLE_ARITY + 1}')
    sizes = [len(base)] + [len(r) for r in rest]
    if max(sizes) > MAX_TUPLE_BASE:
        raise CapExceededError(f'C_k 物化要求每个支撑 ≤ {MAX_TUPLE_BASE}，实际 {max(sizes)}')
    if math.prod(sizes) > MAX_TUPLE_WORK:
        raise CapExceededError(f'C_k 计算量 {math.prod(sizes)} 超过上限 {MAX_TUPLE_WORK}')


def generalized_convolution(F):
    """
    广义卷积 C_k(F)(x_1,…,x_{k−1}) = Σ_z f_0(z) Π_{i≥1} f_i(z+x_i)

    参数：
    - F: k 个 GroupFunction / FiniteSet 组成的列表，k ≥ 2

    返回：
    - TupleFunction，元组长度 k−1；k = 2 时与 correlate 一致
    """
    if len(F) < 2:
        raise PreconditionError('广义卷积需要 k ≥ 2')
    F = [as_function(f) for f in F]
    G = require_same(*F)
    base, rest = F[0], F[1:]
    if len(rest) == 1:
        return TupleFunction.from_function(correlate(base, rest[0]))
    _check_tuple_caps(base, rest)
    sub = G.subtractor()
    out = defaultdict(int)
    rest_items = [fi.items() for fi in rest]
    for z, w in base.items():
        shifted = [[(sub(y, z), v) for y, v in items] for items in rest_items]
        for combo in itertools.product(*shifted):
            value = w
            for _, v in combo:
                value *= v
            out[tuple(c[0] for c in combo)] += value
    return TupleFunction(G, len(rest), dict(out))


def generalized_convolution_at(F, shifts):
    """单点求值 C_k(F)(x_1,…,x_{k−1})，不物化整张表"""
    F = [as_function(f) for f in F]
    G = require_same(*F)
    if len(shifts) != len(F) - 1:
        raise PreconditionError('偏移个数必须是 k−1')
    add = G.adder()
    total = 0
    for z, w in F[0].values.items():
        value = w
        for fi, x in zip(F[1:], shifts):
            value *= fi(add(z, x))
            if not value:
                break
        total += value
    return total


def triple_correlation_mixed(h, A, B):
    """
    C_3(h, A, B)(x, y) = Σ_z h(z) A(z+x) B(z+y)

    参数：
    - h: GroupFunction 或 FiniteSet
    - A, B: FiniteSet 或 GroupFunction

    返回：
    - TupleFunction，元组长度 2
    """
    h, A, B = as_function(h), as_function(A), as_function(B)
    G = require_same(h, A, B)
    if len(h) * len(A) * len(B) > MAX_TUPLE_WORK:
        raise CapExceededError('C_3 计算量超过上限')
    sub = G.subtractor()
    a_items, b_items = A.items(), B.items()
    out = defaultdict(int)
    for z, w in h.items():
        for x, u in a_items:
            dx = sub(x, z)
            wu = w * u
            for y, v in b_items:
                out[(dx, sub(y, z))] += wu * v
    return TupleFunction(G, 2, dict(out))


def tensor_group(descriptor, t):
    return GroupDescriptor.product(*([descriptor] * t))


def tensor_power(f, t):
    """
    张量幂 f^⊗(x_1,…,x_t) = Π f(x_j)，定义在 t 重直积群上

    参数：
    - f: GroupFunction 或 FiniteSet
    - t: 正整数

    返回：
    - GroupFunction
    """
    if t < 1:
        raise PreconditionError('t 必须 ≥ 1')
    f = as_function(f)
    G = tensor_group(f.descriptor, t)
    out = {}
    for combo in itertools.product(f.items(), repeat=t):
        out[tuple(x for x, _ in combo)] = math.prod(v for _, v in combo)
    return GroupFunction(G, out)


def tensor_set(A, t):
    """A^t ⊆ Γ^t"""
    G = tensor_group(A.descriptor, t)
    return FiniteSet(G, tuple(itertools.product(A.elements, repeat=t)))


def tensor_power_tuple(F, t):
    """元组函数的张量幂：第 i 个坐标为各副本第 i 个坐标组成的元组"""
    G = tensor_group(F.descriptor, t)
    out = {}
    for combo in itertools.product(F.items(), repeat=t):
        key = tuple(tuple(k[i] for k, _ in combo) for i in range(F.arity))
        out[key] = math.prod(v for _, v in combo)
    return TupleFunction(G, F.arity, out)


def diagonal_set(A, k):
    """Δ_k(A) = {(a,…,a)} ⊆ Γ^k"""
    G = tensor_group(A.descriptor, k)
    return FiniteSet(G, tuple((a,) * k for a in A.elements))


def correlate_tuples(F, H):
    """元组函数的相关 (F∘H)(x) = Σ_y F(y) H(y+x)，坐标逐个相减"""
    G = require_same(F, H)
    if F.arity != H.arity:
        raise PreconditionError('元组长度不一致')
    sub = G.subtractor()
    out = defaultdict(int)
    h_items = H.items()
    for y, u in F.items():
        for w, v in h_items:
            out[tuple(sub(b, a) for a, b in zip(y, w))] += u * v
    return TupleFunction(G, F.arity, dict(out))


def _inner(F, H):
    small, big = (F, H) if len(F) <= len(H) else (H, F)
    return sum(v * big.values.get(k, 0) for k, v in small.values.items())


def _mismatch(F, H):
    keys = set(F.values) | set(H.values)
    return sum(1 for k in keys if F.values.get(k, 0) != H.values.get(k, 0))


def digest_of(objs):
    payload = '|'.join(json.dumps(o.to_json(), sort_keys=True, separators=(',', ':')) for o in objs)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def scalar_product_check(fs, gs):
    """
    Σ_x C_l(f_0..f_{l−1})(x) C_l(g_0..g_{l−1})(x) = Σ_z Π (f_i∘g_i)(z)

    参数：
    - fs, gs: 各 l 个函数，l ∈ {2, 3}
    """
    if len(fs) != len(gs):
        raise PreconditionError('两组函数个数必须相同')
    fs, gs = [as_function(f) for f in fs], [as_function(g) for g in gs]
    lhs = _inner(generalized_convolution(fs), generalized_convolution(gs))
    corrs = [correlate(f, g) for f, g in zip(fs, gs)]
    rhs = sum(math.prod(c(z) for c in corrs[1:]) * v for z, v in corrs[0].values.items())
    return make_result(f'convolution.scalar_C.l{len(fs)}',
                       'f:scalar_C: Σ C_l(f)C_l(g) = Σ_z Π (f_i∘g_i)(z)',
                       CheckKind.EXACT, digest_of(fs + gs), lhs, rhs)


def multi_scalar_check(fs, l):
    """
    Σ_x Π_i C_l(f_i,…,f_i)(x) = Σ_y C_k(f_0,…,f_{k−1})(y)^l

    参数：
    - fs: k 个函数，k ∈ {2, 3}
    - l: 2 或 3
    """
    fs = [as_function(f) for f in fs]
    tables = [generalized_convolution([f] * l) for f in fs]
    first, rest = tables[0], tables[1:]
    lhs = sum(v * math.prod(t(key) for t in rest) for key, v in first.values.items())
    rhs = sum(v ** l for v in generalized_convolution(fs).values.values())
    return make_result(f'convolution.gen_C.k{len(fs)}.l{l}',
                       'f:gen_C: Σ_x Π_i C_l(f_i)(x) = Σ_y C_k(f_0..f_{k−1})(y)^l',
                       CheckKind.EXACT, digest_of(fs), lhs, rhs, l=l)


def sigma_c_check(fs, l):
    """
    Σ_x C_l(f_0)(x)·(C_l(f_1)∘…∘C_l(f_{k−1}))(x) = Σ_z R(z)^l

    k = 2 时 R = f_0∘f_1；k = 3 时 R = (f_0*f_1)∘f_2，
    后者在 f_0 为偶函数时与 (f_0∘f_1)∘f_2 相同。
    """
    fs = [as_function(f) for f in fs]
    if len(fs) not in (2, 3):
        raise PreconditionError('只支持 k ∈ {2, 3}')
    tables = [generalized_convolution([f] * l) for f in fs]
    chain = tables[1]
    for t in tables[2:]:
        chain = correlate_tuples(chain, t)
    lhs = _inner(tables[0], chain)
    if len(fs) == 2:
        base = correlate(fs[0], fs[1])
    else:
        base = correlate(convolve(fs[0], fs[1]), fs[2])
    rhs = sum(v ** l for v in base.values.values())
    return make_result(f'convolution.conv_C.k{len(fs)}.l{l}',
                       'f:conv_C: σ_k for C_l, Σ_x C_l(f_0)(C_l(f_1)∘…)(x) = Σ_z (…)^l(z)',
                       CheckKind.EXACT, digest_of(fs), lhs, rhs, l=l)


def tensor_convolution_check(f, g, t=2):
    """(g∘f)^⊗ = g^⊗∘f^⊗ 与 (g*f)^⊗ = g^⊗*f^⊗，lhs 为不一致的点数"""
    f, g = as_function(f), as_function(g)
    ft, gt = tensor_power(f, t), tensor_power(g, t)
    digest = digest_of([f, g])
    ref = 'f:tensor_convolutions: (g∘f)^⊗ = g^⊗∘f^⊗, (g*f)^⊗ = g^⊗*f^⊗'
    corr = _mismatch(tensor_power(correlate(g, f), t), correlate(gt, ft))
    conv = _mismatch(tensor_power(convolve(g, f), t), convolve(gt, ft))
    return [
        make_result('convolution.tensor.corr', ref, CheckKind.EXACT, digest, corr, 0, t=t),
        make_result('convolution.tensor.conv', ref, CheckKind.EXACT, digest, conv, 0, t=t),
    ]


def tensor_c_check(fs, t=2):
    """C_k(f_0^⊗,…,f_{k−1}^⊗) = C_k(f_0,…,f_{k−1})^⊗，lhs 为不一致的点数"""
    fs = [as_function(f) for f in fs]
    lifted = generalized_convolution([tensor_power(f, t) for f in fs])
    direct = tensor_power_tuple(generalized_convolution(fs), t)
    return make_result(f'convolution.tensor_C.k{len(fs)}',
                       'f:tensor_convolutions_C_k: C_k(f^⊗_0,…) = C^⊗_k(f_0,…)',
                       CheckKind.EXACT, digest_of(fs), _mismatch(lifted, direct), 0, t=t)


def diagonal_correlation_check(A, B, k=2):
    """(Δ_k(B)∘A^k)(x_1..x_k) = C_{k+1}(B,A,…,A)(x_1..x_k)，lhs 为不一致的点数"""
    left = correlate(diagonal_set(B, k), tensor_set(A, k))
    right = generalized_convolution([B] + [A] * k)
    return make_result('convolution.diagonal_C',
                       'C_k definition: (Δ_k(B)∘A^k)(x) = C_{k+1}(B,A,…,A)(x)',
                       CheckKind.EXACT, digest_of([A, B]),
                       _mismatch(TupleFunction(right.descriptor, k, left.values), right), 0, k=k)
