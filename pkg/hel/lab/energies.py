"""
能量统计

集合的全部标量统计量：
- 加法能量 E(A,B)、高阶能量 E_s(A)、E_k(A,B)
- T_k(A)、σ_k(A)、加权 σ_ψ(A)
- 受限能量 E^P_k(A)、E^𝒫_k(A)、迭代交 A_s
- 乘法能量与乘积集

整数指数时结果为精确整数，实数指数时对精确的自相关值取浮点幂。
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Integral

import pandas as pd

from hel.lab.base_check import CheckKind, combine_digest, make_result
from hel.lab.convolution import (
    convolve, convolve_kfold, correlate, diagonal_set, generalized_convolution_at, tensor_set,
)
from hel.lab.exceptions import CapExceededError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupFunction, require_same, sumset

T4_WORK_CAP = 1 << 24
EK_IDENTITY_CAP = 1 << 22


def _is_integral(s):
    return isinstance(s, Integral) or float(s).is_integer()


def _moment(values, s):
    """Σ v^s；整数 s 精确求和"""
    if _is_integral(s):
        k = int(s)
        return sum(v ** k for v in values)
    return math.fsum(float(v) ** s for v in values)


@lru_cache(maxsize=256)
def autocorrelation(A):
    """A∘A，按集合缓存"""
    return correlate(A, A)


def energy_pair(A, B):
    """
    加法能量 E(A,B) = Σ_x (A*B)(x)²

    参数：
    - A, B: 同一个群中的集合

    返回：
    - int
    """
    require_same(A, B)
    return convolve(A, B).l2_squared()


def energy_forms(A, B):
    """
    能量的三种表达式

    返回：
    - tuple: (Σ(A*B)², Σ(A∘B)², Σ(A∘A)(B∘B))
    """
    require_same(A, B)
    conv = convolve(A, B).l2_squared()
    corr = correlate(A, B).l2_squared()
    mixed = sum(v * autocorrelation(B)(x) for x, v in autocorrelation(A).values.items())
    return conv, corr, mixed


def energy(A):
    return autocorrelation(A).l2_squared()


def energy_moment(A, s):
    """
    高阶能量 E_s(A) = Σ_x (A∘A)(x)^s

    参数：
    - A: 非空集合
    - s: 实数 s ≥ 1；整数时返回精确整数

    返回：
    - int 或 float
    """
    if s < 1:
        raise PreconditionError(f'E_s 要求 s ≥ 1，实际 {s}')
    if not len(A):
        raise PreconditionError('E_s 要求非空集合')
    return _moment(autocorrelation(A).values.values(), s)


def energy_pair_moment(A, B, k):
    """
    E_k(A,B) = Σ_x (A∘A)(x) (B∘B)(x)^{k−1}

    参数：
    - A, B: 同一个群中的集合
    - k: 实数 k ≥ 1

    返回：
    - int（k 为整数时）或 float
    """
    if k < 1:
        raise PreconditionError(f'E_k(A,B) 要求 k ≥ 1，实际 {k}')
    require_same(A, B)
    ra, rb = autocorrelation(A), autocorrelation(B)
    if _is_integral(k):
        e = int(k) - 1
        return sum(v * rb(x) ** e for x, v in ra.values.items())
    return math.fsum(v * float(rb(x)) ** (k - 1) for x, v in ra.values.items())


def t_energy(A, k):
    """
    T_k(A) = Σ_x (A *_{k−1} A)(x)²，即 k 项和相等的 2k 元组个数

    参数：
    - A: 集合
    - k: 整数 k ≥ 2

    返回：
    - int
    """
    if k < 2:
        raise PreconditionError(f'T_k 要求 k ≥ 2，实际 {k}')
    return convolve_kfold(A, k).l2_squared()


def sigma_k(A, k):
    """σ_k(A) = (A *_{k−1} A)(0)，即和为 0 的 k 元组个数"""
    if k < 2:
        raise PreconditionError('σ_k 要求 k ≥ 2')
    return convolve_kfold(A, k)(A.descriptor.zero)


def sigma_weighted(psi, A):
    """σ_ψ(A) = Σ_x ψ(x) (A∘A)(x)；ψ 为集合时即 σ_P(A)"""
    if isinstance(psi, FiniteSet):
        psi = GroupFunction.indicator(psi)
    require_same(psi, A)
    r = autocorrelation(A)
    small, big = (psi, r) if len(psi) <= len(r) else (r, psi)
    return sum(v * big(x) for x, v in small.values.items())


def restricted_energy(A, P, k=2):
    """
    受限能量 E^P_k(A) = Σ_{s∈P} |A_s|^k；k = 2 时即 E_P(A)

    参数：
    - A, P: 同一个群中的集合
    - k: 实数 k ≥ 1
    """
    if k < 1:
        raise PreconditionError('E^P_k 要求 k ≥ 1')
    require_same(A, P)
    r = autocorrelation(A)
    return _moment([r(x) for x in P.elements if r(x)], k)


def iterated_intersection(A, shifts):
    """
    迭代交 A_s = A ∩ (A−s_1) ∩ … ∩ (A−s_{k−1})

    参数：
    - A: 集合
    - shifts: 元素元组；空元组返回 A

    返回：
    - FiniteSet
    """
    add = A.descriptor.adder()
    members = A.members
    return FiniteSet(A.descriptor,
                     tuple(a for a in A.elements if all(add(a, s) in members for s in shifts)))


@dataclass(frozen=True)
class IntersectionFamily:
    """一个偏移元组 s 及其实现的集合 A_s"""

    base: FiniteSet
    shifts: tuple
    realized: FiniteSet = field(default=None)

    @classmethod
    def of(cls, A, shifts):
        shifts = tuple(shifts)
        return cls(A, shifts, iterated_intersection(A, shifts))

    def __len__(self):
        return len(self.realized)


def tuple_restricted_energy(A, tuples, mode='squared'):
    """
    元组受限能量

    参数：
    - A: 集合
    - tuples: TupleFunction（视为元组集合），元组长度 k−1
    - mode: 'squared' 返回 E^𝒫_k(A) = Σ|A_s|²，'plain' 返回 σ_𝒫(A) = Σ C_k(A)(s)

    返回：
    - int
    """
    if mode not in ('squared', 'plain'):
        raise PreconditionError(f'未知模式: {mode}')
    require_same(A, tuples)
    fs = [A] * (tuples.arity + 1)
    total = 0
    for key in tuples.keys():
        size = generalized_convolution_at(fs, key)
        total += size * size if mode == 'squared' else size
    return total


def distinct_intersections(A, arity):
    """
    枚举所有 arity 元偏移，按实现的集合 A_s 分组

    返回：
    - Counter: frozenset(A_s) → 偏移个数（只含非空 A_s）
    """
    diffs = sumset(A, A, 1, -1).elements
    if len(diffs) ** arity > EK_IDENTITY_CAP:
        raise CapExceededError(f'偏移枚举 {len(diffs)}^{arity} 超过上限')
    counts = Counter()
    frontier = {(): A.members}
    add = A.descriptor.adder()
    for _ in range(arity):
        nxt = {}
        for key, members in frontier.items():
            for d in diffs:
                cut = frozenset(a for a in members if add(a, d) in A.members)
                if cut:
                    nxt[key + (d,)] = cut
        frontier = nxt
    for members in frontier.values():
        counts[members] += 1
    return counts


def ek_identity_check(A, k, l):
    """
    Σ_{s,t} E(A_s, A_t) = E_{k+l}(A)，s 取 k−1 元偏移，t 取 l−1 元偏移

    参数：
    - A: 集合
    - k, l: 正整数

    返回：
    - CheckResult（精确）
    """
    if k < 1 or l < 1:
        raise PreconditionError('k, l 必须 ≥ 1')
    left = distinct_intersections(A, k - 1)
    right = left if l == k else distinct_intersections(A, l - 1)
    if len(left) * len(right) > EK_IDENTITY_CAP:
        raise CapExceededError('A_s 组合过多')
    G = A.descriptor
    sets_l = {m: FiniteSet(G, tuple(m)) for m in left}
    sets_r = {m: FiniteSet(G, tuple(m)) for m in right}
    total = 0
    for ms, cs in left.items():
        for mt, ct in right.items():
            total += cs * ct * energy_pair(sets_l[ms], sets_r[mt])
    return make_result('energies.ek_identity', 'l:E_k-identity: Σ_{s,t} E(A_s,A_t) = E_{k+l}(A)',
                       CheckKind.EXACT, A.digest, total, energy_moment(A, k + l), k=k, l=l)


def energy_forms_check(A, B):
    """三种能量表达式两两相等"""
    conv, corr, mixed = energy_forms(A, B)
    digest = combine_digest(A.digest, B.digest)
    ref = 'f:energy_convolution: Σ(A*B)² = Σ(A∘B)² = Σ(A∘A)(B∘B)'
    return [
        make_result('energies.forms.conv_corr', ref, CheckKind.EXACT, digest, conv, corr),
        make_result('energies.forms.conv_mixed', ref, CheckKind.EXACT, digest, conv, mixed),
    ]


def diagonal_energy_check(A, B, k=2):
    """E_{k+1}(A,B) = E(Δ_k(A), B^k)"""
    lhs = energy_pair_moment(A, B, k + 1)
    rhs = energy_pair(diagonal_set(A, k), tensor_set(B, k))
    return make_result('energies.diagonal', 'f:energy-B^k-Delta: E_{k+1}(A,B) = E(Δ_k(A), B^k)',
                       CheckKind.EXACT, combine_digest(A.digest, B.digest), lhs, rhs, k=k)


def sigma_restricted_check(A, D, k):
    """
    (σ_D(A)/|A|)^{2k} ≤ E_k(A)·T_{k/2}(D)，k 为正偶数

    两侧乘以 |A|^{2k} 后按精确整数比较。
    """
    if k % 2:
        raise PreconditionError('k 必须是正偶数')
    sigma = sigma_weighted(D, A)
    half = k // 2
    t_half = len(D) if half == 1 else t_energy(D, half)
    lhs = Fraction(sigma, len(A)) ** (2 * k)
    rhs = energy_moment(A, k) * t_half
    return make_result(f'energies.sigma_restricted.k{k}',
                       'f:E_k,T_k,sigma: (σ_D(A)/|A|)^{2k} ≤ E_k(A) T_{k/2}(D)',
                       CheckKind.EXPLICIT, combine_digest(A.digest, D.digest), lhs, rhs, 'le', k=k)


def holder_checks(A):
    """
    由 Cauchy–Schwarz / Hölder 得到的一组显式不等式

    返回：
    - list of CheckResult
    """
    n = len(A)
    d = A.digest
    e2 = energy(A)
    e3 = energy_moment(A, 3)
    e32 = energy_moment(A, 1.5)
    diff = sumset(A, A, 1, -1)
    results = [
        make_result('energies.cs.diff', 'Cauchy–Schwarz: |A|⁴ ≤ E(A)|A−A|', CheckKind.EXPLICIT, d,
                    n ** 4, e2 * len(diff), 'le'),
        make_result('energies.cs.e2_e3', 'Cauchy–Schwarz: E(A)² ≤ |A|² E_3(A)', CheckKind.EXPLICIT, d,
                    e2 * e2, n * n * e3, 'le'),
        make_result('energies.cs.e32_e2', 'Cauchy–Schwarz: E_{3/2}(A)² ≤ |A|² E(A)', CheckKind.EXPLICIT, d,
                    e32 * e32, n * n * e2, 'le'),
        make_result('energies.monotone', 'E_{s2}(A) ≤ E_{s1}(A)|A|^{s2−s1} (s1=3/2, s2=3)',
                    CheckKind.EXPLICIT, d, e3, e32 * n ** 1.5, 'le'),
        make_result('energies.e1', 'E_1(A) = |A|²', CheckKind.EXACT, d, energy_moment(A, 1), n * n),
    ]
    for k in (2, 3):
        k_fold = convolve_kfold(A, k)
        tk = k_fold.l2_squared()
        results.append(make_result(
            f'energies.e32_tk.k{k}', 'E_4/T_4 remark: (E_{3/2}(A)/|A|)^{2k} ≤ E_k(A) T_k(A)',
            CheckKind.EXPLICIT, d, (e32 / n) ** (2 * k), energy_moment(A, k) * tk, 'le', k=k))
        results.append(make_result(
            f'energies.tk_lower.k{k}', 'Cauchy–Schwarz: T_k(A) ≥ |A|^{2k}/|kA|',
            CheckKind.EXPLICIT, d, tk * len(k_fold), n ** (2 * k), 'ge', k=k))
    return results


def _multiplicative_ratio(descriptor):
    if descriptor.kind == 'Z':
        return lambda a, b: Fraction(a, b)
    if descriptor.kind == 'ZmodN':
        p = descriptor.modulus
        return lambda a, b: a * pow(b, -1, p) % p
    raise PreconditionError('乘法统计只支持 Z 与 Z/N')


def _check_invertible(A):
    G = A.descriptor
    for a in A.elements:
        if a == 0 or (G.kind == 'ZmodN' and math.gcd(a, G.modulus) != 1):
            raise PreconditionError(f'元素 {a} 不可逆')


def ratio_counts(A):
    """q(x) = #{(a1,a2) ∈ A² : x = a1/a2}"""
    _check_invertible(A)
    ratio = _multiplicative_ratio(A.descriptor)
    return Counter(ratio(a1, a2) for a1 in A.elements for a2 in A.elements)


def multiplicative_energy(A, B=None, s=2):
    """
    乘法能量 E^×_s(A,B) = Σ_x q_A(x) q_B(x)^{s−1}

    参数：
    - A: 非零整数集合（或 Z/N 中的可逆元）
    - B: 可选，缺省为 A
    - s: 实数 s ≥ 1

    返回：
    - int 或 float
    """
    if s < 1:
        raise PreconditionError('s 必须 ≥ 1')
    qa = ratio_counts(A)
    qb = qa if B is None else ratio_counts(B)
    if B is not None:
        require_same(A, B)
    if _is_integral(s):
        e = int(s) - 1
        return sum(v * qb.get(x, 0) ** e for x, v in qa.items())
    return math.fsum(v * float(qb.get(x, 0)) ** (s - 1) for x, v in qa.items())


def product_set(A, B):
    """AB = {ab}"""
    G = require_same(A, B)
    if G.kind == 'Z':
        return FiniteSet(G, tuple({a * b for a in A.elements for b in B.elements}))
    if G.kind == 'ZmodN':
        n = G.modulus
        return FiniteSet(G, tuple({a * b % n for a in A.elements for b in B.elements}))
    raise PreconditionError('乘积集只支持 Z 与 Z/N')


def shifted_product_size(A):
    """|A(A+1)|"""
    shifted = A.translate(1)
    return len(product_set(A, shifted))


def level_count(size, energy_k, k):
    """L = max(1, ⌈log₂(4|A|^{k+1}/E_k(A))⌉)，按精确整数比较"""
    target = Fraction(4 * size ** (k + 1)) / Fraction(energy_k)
    L = 1
    while 2 ** L < target:
        L += 1
    return L


def level_of(value, theta):
    """满足 2^{i−1}θ < value ≤ 2^iθ 的 i ≥ 1；value ≤ θ 时返回 None"""
    if value <= theta:
        return None
    i = 1
    while value > 2 ** i * theta:
        i += 1
    return i


def dyadic_buckets(values, theta):
    """按 level_of 把 {x: value} 分入二进层，返回 {i: [x, ...]}"""
    out = defaultdict(list)
    for x, v in values.items():
        i = level_of(v, theta)
        if i is not None:
            out[i].append(x)
    return dict(out)


def t4_affordable(A):
    order = A.descriptor.order
    bound = len(A) ** 3 if order is None else min(len(A) ** 3, order)
    return len(A) * bound <= T4_WORK_CAP


@dataclass
class EnergyReport:
    """
    一个集合的能量报告

    K = |A|³/E(A)，M 由 E_3 = M|A|⁴/K² 定义；其余归一化参数同理。
    """

    digest: str
    size: int
    quantities: dict
    K: Fraction
    M: Fraction
    M_E4: Fraction
    K_32: float
    M_T4: object
    L: int

    def derived(self):
        return {'K': self.K, 'M': self.M, 'M_E4': self.M_E4, 'K_3/2': self.K_32,
                'M_T4': self.M_T4, 'L': self.L}

    def to_json(self):
        def plain(v):
            if isinstance(v, Fraction):
                return int(v) if v.denominator == 1 else float(v)
            return v
        return {
            'digest': self.digest,
            'size': self.size,
            'quantities': {k: plain(v) for k, v in self.quantities.items()},
            'derived': {k: plain(v) for k, v in self.derived().items()},
        }

    def to_frame(self):
        """把全部数值整理为一张表"""
        rows = [(name, 'quantity', value) for name, value in self.to_json()['quantities'].items()]
        rows += [(name, 'derived', value) for name, value in self.to_json()['derived'].items()]
        return pd.DataFrame(rows, columns=['name', 'group', 'value']).set_index('name')


def energy_report(A, s_values=()):
    """
    计算 EnergyReport

    参数：
    - A: 非空集合
    - s_values: 额外报告的实数指数

    返回：
    - EnergyReport
    """
    if not len(A):
        raise PreconditionError('能量报告需要非空集合')
    n = len(A)
    e2 = energy(A)
    e3 = energy_moment(A, 3)
    e4 = energy_moment(A, 4)
    e32 = energy_moment(A, 1.5)
    q = {
        'E_1': energy_moment(A, 1),
        'E': e2,
        'E_3/2': e32,
        'E_3': e3,
        'E_4': e4,
        'T_2': t_energy(A, 2),
        'T_3': t_energy(A, 3),
        'sigma_2': sigma_k(A, 2),
        'sigma_3': sigma_k(A, 3),
        'sigma_4': sigma_k(A, 4),
    }
    t4 = t_energy(A, 4) if t4_affordable(A) else None
    if t4 is not None:
        q['T_4'] = t4
    for s in s_values:
        q[f'E_{s:g}'] = energy_moment(A, s)
    K = Fraction(n ** 3, e2)
    return EnergyReport(
        digest=A.digest,
        size=n,
        quantities=q,
        K=K,
        M=e3 * K ** 2 / n ** 4,
        M_E4=e4 * K ** 3 / n ** 5,
        K_32=n ** 5 / e32 ** 2,
        M_T4=None if t4 is None else t4 * K ** 3 / n ** 7,
        L=level_count(n, e2, 2),
    )
