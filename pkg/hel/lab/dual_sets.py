"""
对偶集合

流行差集 P、流行元组集 𝒫 以及由二者组成的 (k,c) 对偶对：
- 双线性型 Σ_{x,y} P(x−y) A(x)A(y) Σ_z 𝒫(z) Π A(x+z_i)A(y+z_i)
- 分层流行集 P_i、𝒫_j 与层值 Δ、Δ*
- Hermite 对偶算子 T(x,y)、正则化子集 A′、连通性剖面
- 对偶集合一节的全部显式不等式

k = 2 时 𝒫 是 1 元元组集合，等价于差集 P*。
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hel.lab.base_check import BaseCheck, CheckKind, make_result, skipped_result
from hel.lab.convolution import (
    TupleFunction, as_function, correlate, digest_of, generalized_convolution, tensor_power_tuple,
    tensor_set,
)
from hel.lab.energies import (
    autocorrelation, dyadic_buckets, energy, energy_moment, energy_pair, iterated_intersection,
    level_count, restricted_energy, sigma_weighted, t4_affordable, t_energy, tuple_restricted_energy,
)
from hel.lab.exceptions import CapExceededError, LabError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupFunction, negate_set, require_same, sumset
from hel.lab.spectral import MAX_DIM, build_operator, hermitian_operator

S_GRID = (1, 1.25, 1.5, 1.75, 2)
EXHAUSTIVE_LIMIT = 18
DUAL_WORK_CAP = 1 << 24
E3_DUAL_LIMIT = 64
TENSOR_STABILITY_SIZE = 8
PSD_TOL = 1e-9
SUBSET_BATCH = 1 << 14


# ---------------------------------------------------------------- 矩阵工具

def _incidence(A, keys):
    """I[x, z] = Π_i A(x+z_i)，x ∈ A，z 取自 keys"""
    if len(A) * max(len(keys), 1) > DUAL_WORK_CAP:
        raise CapExceededError(f'|A|·|𝒫| = {len(A) * len(keys)} 超过上限 {DUAL_WORK_CAP}')
    pos = A.position
    out = np.zeros((len(A), len(keys)), dtype=np.int64)
    for col, key in enumerate(keys):
        for a in iterated_intersection(A, key).elements:
            out[pos[a], col] = 1
    return out


def _difference_table(A, f):
    """W[x, y] = f(x−y)，x, y ∈ A"""
    sub = A.descriptor.subtractor()
    dtype = np.int64 if f.value_kind == 'int' else float
    return np.array([[f(sub(x, y)) for y in A.elements] for x in A.elements],
                    dtype=dtype).reshape(len(A), len(A))


def _check_arity(A, tuples):
    require_same(A, tuples)
    if tuples.arity not in (1, 2):
        raise PreconditionError(f'只支持 k ∈ {{2, 3}}，实际元组长度 {tuples.arity}')


def dual_matrix(A, tuples):
    """
    T(x,y) = A(x)A(y) Σ_z 𝒫(z) Π A(x+z_i)A(y+z_i)

    参数：
    - A: 集合
    - tuples: TupleFunction，视为 k−1 元元组集合

    返回：
    - np.ndarray: |A|×|A| 整数矩阵，行列按 A 的规范顺序
    """
    _check_arity(A, tuples)
    inc = _incidence(A, tuples.keys())
    return inc @ inc.T


def bilinear_form(A, P, tuples):
    """双线性型 Σ_{x,y} P(x−y) T(x,y)"""
    require_same(A, P)
    mask = _difference_table(A, GroupFunction.indicator(P))
    return int(np.sum(dual_matrix(A, tuples) * mask))


# ---------------------------------------------------------------- 对偶对

@dataclass(frozen=True, eq=False)
class DualPair:
    """
    (k,c) 流行对偶对

    form 为双线性型的值，c·E_k(A) ≤ form；
    分层构造时记录 L、层号 (i, j) 以及 Δ = 2^iE_k/(2|A|²)、Δ* = 2^jE_k/(4|A|^k)。
    """

    base: FiniteSet
    k: int
    c: Fraction
    P: FiniteSet
    tuples: TupleFunction
    form: int
    energy_k: int
    delta: object = None
    delta_star: object = None
    L: object = None
    levels: object = None

    @property
    def dual_set(self):
        """k = 2 时 𝒫 作为差集 P*"""
        if self.k != 2:
            raise PreconditionError('只有 k = 2 时 𝒫 是差集')
        return FiniteSet(self.base.descriptor, tuple(key[0] for key in self.tuples.keys()))

    @property
    def digest(self):
        return digest_of([self.base, self.P, self.tuples])

    def sigma_P(self):
        return sigma_weighted(self.P, self.base)

    def sigma_star(self):
        """σ_𝒫(A) = Σ_{z∈𝒫} C_k(A)(z)"""
        return tuple_restricted_energy(self.base, self.tuples, mode='plain')

    def certify(self):
        """
        独立重算双线性型：Σ_{z∈𝒫} #{(x,y) ∈ A_z² : x−y ∈ P}

        返回：
        - list of CheckResult
        """
        sub = self.base.descriptor.subtractor()
        members = self.P.members
        total = 0
        for key in self.tuples.keys():
            cut = iterated_intersection(self.base, key).elements
            total += sum(1 for x in cut for y in cut if sub(x, y) in members)
        d = self.digest
        return [
            make_result('dual.pair.form', 'tmp:24.12.2012_star: bilinear form recomputed through A_z',
                        CheckKind.EXACT, d, total, self.form, k=self.k),
            make_result('dual.pair.c', 'tmp:24.12.2012_star: c·E_k(A) ≤ Σ P(x−y)A(x)A(y)Σ_z 𝒫(z)ΠA(x+z_i)A(y+z_i)',
                        CheckKind.EXPLICIT, d, self.c * self.energy_k, total, 'le', k=self.k),
        ]

    def to_json(self):
        enc = self.base.descriptor.encode

        def plain(v):
            if isinstance(v, Fraction):
                return int(v) if v.denominator == 1 else float(v)
            return v

        return {
            'k': self.k,
            'c': plain(self.c),
            'P': [enc(x) for x in self.P.elements],
            'P_star': [[enc(z) for z in key] for key in self.tuples.keys()],
            'form': self.form,
            'E_k': self.energy_k,
            'delta': plain(self.delta),
            'delta_star': plain(self.delta_star),
            'L': self.L,
            'levels': None if self.levels is None else list(self.levels),
        }


def _require_k(k, allowed=(2, 3)):
    if k not in allowed:
        raise PreconditionError(f'k 只能取 {allowed}，实际 {k}')


def popular_difference_set(A, k=2):
    """
    P = {z : |A_z|^{k−1} ≥ E_k(A)/(2|A|²)}，按精确整数比较

    参数：
    - A: 非空集合
    - k: 整数 k ≥ 2

    返回：
    - FiniteSet，对称
    """
    if k < 2 or int(k) != k:
        raise PreconditionError('k 必须是 ≥ 2 的整数')
    if not len(A):
        raise PreconditionError('需要非空集合')
    k = int(k)
    n = len(A)
    ek = energy_moment(A, k)
    r = autocorrelation(A)
    return FiniteSet(A.descriptor,
                     tuple(x for x, v in r.values.items() if 2 * n * n * v ** (k - 1) >= ek))


def _tuple_table(A, k):
    return generalized_convolution([A] * k)


def popular_tuple_set(A, k=2):
    """𝒫 = {z : C_k(A)(z) ≥ E_k(A)/(4|A|^k)}，元组长度 k−1"""
    _require_k(k)
    if not len(A):
        raise PreconditionError('需要非空集合')
    ek = energy_moment(A, k)
    return _tuple_table(A, k).threshold(Fraction(ek, 4 * len(A) ** k))


def popular_dual_pair(A, k=2):
    """
    由流行差集与流行元组集组成的 (k,1/4) 对偶对

    返回：
    - DualPair，c = 1/4，不记录层值
    """
    P = popular_difference_set(A, k)
    tuples = popular_tuple_set(A, k)
    return DualPair(A, k, Fraction(1, 4), P, tuples, bilinear_form(A, P, tuples), energy_moment(A, k))


@dataclass(frozen=True)
class _Candidate:
    form: int
    i: int
    j: int


def level_dual_pair(A, k=2):
    """
    扫描全部 (i, j) ∈ [L]²，取双线性型最大的分层对偶对

    L = max(1, ⌈log₂(4|A|^{k+1}/E_k(A))⌉)；并列时取字典序最小的 (i, j)。

    参数：
    - A: 非空集合
    - k: 2 或 3（k = 3 受元组物化上限约束）

    返回：
    - DualPair，c = 2^{−2}L^{−2}
    """
    _require_k(k)
    if not len(A):
        raise PreconditionError('需要非空集合')
    if len(A) > MAX_DIM:
        raise CapExceededError(f'|A| = {len(A)} 超过上限 {MAX_DIM}')
    G = A.descriptor
    n = len(A)
    ek = energy_moment(A, k)
    L = level_count(n, ek, k)
    theta = Fraction(ek, 2 * n * n)
    theta_star = Fraction(ek, 4 * n ** k)
    r = autocorrelation(A)
    p_levels = dyadic_buckets({x: v ** (k - 1) for x, v in r.values.items()}, theta)
    t_levels = dyadic_buckets(_tuple_table(A, k).values, theta_star)

    index = {x: i for i, xs in p_levels.items() for x in xs}
    sub = G.subtractor()
    level_table = np.array([[index.get(sub(x, y), 0) for y in A.elements] for x in A.elements],
                           dtype=np.int64).reshape(n, n)
    candidates = []
    for j in sorted(t_levels):
        inc = _incidence(A, sorted(t_levels[j]))
        T = inc @ inc.T
        for i in sorted(p_levels):
            candidates.append(_Candidate(int(T[level_table == i].sum()), i, j))
    if not candidates:
        raise LabError('没有非空的层集合')
    best = max(candidates, key=lambda c: (c.form, -c.i, -c.j))
    c = Fraction(1, 4 * L * L)
    if best.form < c * ek:
        raise LabError(f'没有 (i,j) 达到 2^-2 L^-2 流行阈值：max form = {best.form}, E_k = {ek}, L = {L}')
    P = FiniteSet(G, tuple(p_levels[best.i]))
    tuples = TupleFunction.indicator(G, t_levels[best.j], k - 1)
    return DualPair(A, k, c, P, tuples, best.form, ek,
                    delta=2 ** best.i * theta, delta_star=2 ** best.j * theta_star,
                    L=L, levels=(best.i, best.j))


# ---------------------------------------------------------------- 对偶算子

def dual_hermitian_operator(A, tuples):
    """
    Hermite 对偶算子 T（非负定）

    参数：
    - A: 集合
    - tuples: k−1 元元组集合

    返回：
    - GroupOperator，kind = 'dual-hermitian'
    """
    if len(A) > MAX_DIM:
        raise CapExceededError(f'|A| = {len(A)} 超过上限 {MAX_DIM}')
    return hermitian_operator(A, dual_matrix(A, tuples))


def _fast_path_matrix(A, dual):
    """k = 2：T = MᵀM（或 MMᵀ），M 为 𝒫^c 与 A 之间的矩形算子"""
    reflected = negate_set(dual)
    if len(reflected) >= len(A):
        m = build_operator('rect-diff', reflected, A, GroupFunction.indicator(A).reflect()).matrix
        return m.T @ m
    m = build_operator('rect-diff', A, reflected, GroupFunction.indicator(A)).matrix
    return m @ m.T


def dual_operator_checks(A, tuples):
    """
    对偶算子的分解不变量：非负定、迹 = σ_𝒫(A)，k = 2 时与矩形算子乘积一致

    返回：
    - list of CheckResult
    """
    op = dual_hermitian_operator(A, tuples)
    dec = op.decompose()
    d = digest_of([A, tuples])
    mu0 = dec.main
    results = [
        make_result('dual.operator.psd', 'def:T_op_P: T is nonnegative definite',
                    CheckKind.EXACT, d, float(dec.values.min()) if dec.values.size else 0.0,
                    -PSD_TOL * abs(mu0), 'ge'),
        make_result('dual.operator.trace', 'def:T_op_P: tr T = σ_𝒫(A)', CheckKind.EXACT, d,
                    int(np.trace(op.matrix)), tuple_restricted_energy(A, tuples, mode='plain')),
    ]
    if tuples.arity == 1:
        dual = FiniteSet(A.descriptor, tuple(key[0] for key in tuples.keys()))
        product = _fast_path_matrix(A, dual)
        results.append(make_result(
            'dual.operator.fast_path', "f:T*T: T = (T^A_{A,𝒫^c})*T^A_{A,𝒫^c} for k = 2, mismatch count",
            CheckKind.EXACT, d, int(np.count_nonzero(product != op.matrix)), 0))
    return results


# ---------------------------------------------------------------- 定理检查

def _main_energy_eigenvalue(A, k):
    """μ_0(T^{(A∘A)^{k−1}}_A)"""
    weight = autocorrelation(A).power(k - 1)
    return build_operator('sym-diff', A, g=weight).decompose().main


def _c3_square_sum(A, P):
    """Σ_{x,y∈P} C_3(A)(x,y)² = ‖I Iᵀ‖_F²，I[a,x] = A(a+x)"""
    inc = _incidence(A, [(x,) for x in P.elements])
    gram = inc @ inc.T
    return int(np.sum(gram * gram))


def _tensor_stability_checks(pair):
    A = pair.base
    tA = tensor_set(A, 2)
    tP = tensor_set(pair.P, 2)
    tT = tensor_power_tuple(pair.tuples, 2)
    form = bilinear_form(tA, tP, tT)
    d = pair.digest
    ref = 'tensor powers of (k,c)-popular dual sets form (k,c^t)-popular dual sets'
    return [
        make_result('dual.tensor_stability.form', f'{ref}: form(A^⊗) = form(A)²', CheckKind.EXACT, d,
                    form, pair.form ** 2, t=2),
        make_result('dual.tensor_stability.c', f'{ref}: c²E(A^⊗) ≤ form(A^⊗)', CheckKind.EXPLICIT, d,
                    pair.c ** 2 * energy(tA), form, 'le', t=2),
    ]


def dual_bounds_check(A, k=2):
    """
    分层对偶对的全部显式界

    k = 2 时附加 E(A) ≤ μ_0^{1−s/2}E_s(A)（s 取 S_GRID）、c 对偶的 Cauchy–Schwarz 形式，
    以及 |A| ≤ 8 时的张量稳定性。

    参数：
    - A: 非空集合
    - k: 2 或 3

    返回：
    - list of CheckResult
    """
    _require_k(k)
    pair = level_dual_pair(A, k)
    popular = popular_dual_pair(A, k)
    d = A.digest
    ek, L = pair.energy_k, pair.L
    mu0 = _main_energy_eigenvalue(A, k)
    mu_t = dual_hermitian_operator(A, pair.tuples).decompose().main
    sigma_p, sigma_t = pair.sigma_P(), pair.sigma_star()
    dd = pair.delta * pair.delta_star
    tag = f'k{k}'
    results = pair.certify() + popular.certify()
    results += [
        make_result(f'dual.popular.energy.{tag}', 'tmp:24.12.2012_2: 2^{−1}E_k(A) ≤ E^P_k(A)',
                    CheckKind.EXPLICIT, d, Fraction(ek, 2), restricted_energy(A, popular.P, k), 'le'),
        make_result(f'dual.popular.half.{tag}', 'popular dual pair: 2^{−1}E^P_k(A) ≤ bilinear form',
                    CheckKind.EXPLICIT, d, Fraction(restricted_energy(A, popular.P, k), 2), popular.form, 'le'),
        make_result(f'dual.bounds.dd.{tag}', 'f:D,D^*: ΔΔ* ≤ 16Lμ_0(T^{(A∘A)^{k−1}}_A)',
                    CheckKind.EXPLICIT, d, float(dd), 16 * L * mu0, 'le'),
        make_result(f'dual.bounds.ss.{tag}', 'f:s,s^*: E_k²(A) ≤ 16L²μ_0 σ_P(A)σ_𝒫(A)',
                    CheckKind.EXPLICIT, d, ek * ek, 16 * L * L * mu0 * sigma_p * sigma_t, 'le'),
        make_result(f'dual.bounds.pp.{tag}', 'f:P,P^*: E_k²(A) ≤ 2^8L³μ_0²|P||𝒫|',
                    CheckKind.EXPLICIT, d, ek * ek, 2 ** 8 * L ** 3 * mu0 * mu0 * len(pair.P) * len(pair.tuples),
                    'le'),
        make_result(f'dual.bounds.ss_prime.{tag}', "f:s,s^*': E_k²(A) ≤ 16L⁴σ_P(A)σ_𝒫(A)μ_0(T)",
                    CheckKind.EXPLICIT, d, ek * ek, 16 * L ** 4 * sigma_p * sigma_t * mu_t, 'le'),
        make_result(f'dual.bounds.dd_pair.{tag}', 'f:D,D^* argument for the chosen pair: ΔΔ*·form ≤ 4μ_0E_k(A)',
                    CheckKind.EXPLICIT, d, float(dd * pair.form), 4 * mu0 * ek, 'le'),
        make_result(f'dual.bounds.ss_pair.{tag}', 'f:s,s^* argument for the chosen pair: form² ≤ 2μ_0σ_Pσ_𝒫',
                    CheckKind.EXPLICIT, d, pair.form ** 2, 2 * mu0 * sigma_p * sigma_t, 'le'),
    ]
    if k != 2:
        return results
    e2 = ek
    for s in S_GRID:
        results.append(make_result(
            f'dual.bounds.k2.s{s:g}', 'f:k=2: E(A) ≤ μ_0(T^{A∘A}_A)^{1−s/2}E_s(A)', CheckKind.EXPLICIT, d,
            e2, mu0 ** (1 - s / 2) * energy_moment(A, s), 'le', s=s))
    for name, dual_pair, c in (('popular', popular, Fraction(1, 2)), ('level', pair, None)):
        e_p = restricted_energy(A, dual_pair.P, 2)
        rhs = dual_pair.sigma_star() * _c3_square_sum(A, dual_pair.P)
        lhs = (c * e_p) ** 2 if c is not None else dual_pair.form ** 2
        results.append(make_result(
            f'dual.bounds.k2_prime.{name}', "f:k=2': c²E_P²(A) ≤ σ_{P*}(A)·Σ_{x,y∈P}C_3²(A)(x,y)",
            CheckKind.EXPLICIT, d, lhs, rhs, 'le'))
    if len(A) <= TENSOR_STABILITY_SIZE:
        results += _tensor_stability_checks(popular)
    return results


def duality_identity_check(A, g, h):
    """
    Σ A(x)A(y)g(x−y)C_3(h,A,A)(x,y) = Σ A(x)A(y)h(x−y)C_3(g,A,A)(x,y)

    参数：
    - A: 集合
    - g, h: GroupFunction 或 FiniteSet

    返回：
    - CheckResult（精确）
    """
    g, h = as_function(g), as_function(h)
    require_same(A, g, h)

    def side(u, v):
        keys = [(z,) for z, _ in v.items()]
        inc = _incidence(A, keys)
        weights = np.array([w for _, w in v.items()], dtype=np.int64 if v.value_kind == 'int' else float)
        gram = (inc * weights) @ inc.T
        total = np.sum(_difference_table(A, u) * gram)
        return int(total) if u.value_kind == v.value_kind == 'int' else float(total)

    return make_result('dual.duality', 'f:dual_k=2: Σ A(x)A(y)g(x−y)C_3(h,A,A) = Σ A(x)A(y)h(x−y)C_3(g,A,A)',
                       CheckKind.EXACT, digest_of([A, g, h]), side(g, h), side(h, g))


# ---------------------------------------------------------------- 正则化子集

@dataclass(frozen=True, eq=False)
class RegularizedSubset:
    """
    A′ = A∖A₁，A₁ = {x ∈ A : ((A∘A)∘A)(x) > 2E(A)/|A|}；weights 记录 x ∈ A 上的 ((A∘A)∘A)(x)

    P ⊆ {x : |A_x| ≥ Δ}，mu_energy = μ_0(T^{A∘A}_{A′})，mu_P = μ_0(T^P_{A′})
    """

    base: FiniteSet
    subset: FiniteSet
    exceptional: FiniteSet
    weights: dict
    P: FiniteSet
    delta: int
    energy: int
    mu_energy: float
    mu_P: float

    def checks(self):
        n = len(self.base)
        d = digest_of([self.base, self.P])
        bound = Fraction(2 * self.energy, n)
        return [
            make_result('dual.regularized.size', "l:A'_0.5: |A'| ≥ |A|/2", CheckKind.EXPLICIT, d,
                        2 * len(self.subset), n, 'ge'),
            make_result('dual.regularized.mu_energy', "l:A'_0.5: μ_0(T^{A∘A}_{A'}) ≤ 2E(A)/|A|",
                        CheckKind.EXPLICIT, d, self.mu_energy, float(bound), 'le'),
            make_result('dual.regularized.mu_P', "l:A'_0.5: μ_0(T^P_{A'}) ≤ 2E(A)/(Δ|A|)",
                        CheckKind.EXPLICIT, d, self.mu_P, float(bound / self.delta), 'le', delta=self.delta),
        ]

    def to_json(self):
        enc = self.base.descriptor.encode
        return {
            'subset': [enc(x) for x in self.subset.elements],
            'exceptional': [enc(x) for x in self.exceptional.elements],
            'weights': [[enc(x), w] for x, w in self.weights.items()],
            'P': [enc(x) for x in self.P.elements],
            'delta': self.delta,
            'mu_energy': self.mu_energy,
            'mu_P': self.mu_P,
        }


def regularized_subset(A, P=None, delta=None):
    """
    正则化子集 A′ ⊆ A，|A′| ≥ |A|/2

    参数：
    - A: 非空集合
    - P: 对称集合，缺省为 popular_difference_set(A, 2)
    - delta: 满足 P ⊆ {x : |A_x| ≥ Δ} 的正整数，缺省为 min_{x∈P} |A_x|

    返回：
    - tuple: (A′, RegularizedSubset)
    """
    if not len(A):
        raise PreconditionError('需要非空集合')
    n = len(A)
    e = energy(A)
    r = autocorrelation(A)
    triple = correlate(r, A)
    weights = {x: triple(x) for x in A.elements}
    exceptional = FiniteSet(A.descriptor, tuple(x for x, w in weights.items() if n * w > 2 * e))
    subset = A.difference(exceptional)
    P = popular_difference_set(A, 2) if P is None else P
    require_same(A, P)
    if not len(P) or not P.is_symmetric():
        raise PreconditionError('P 必须是非空对称集合')
    smallest = min(r(x) for x in P.elements)
    if delta is None:
        delta = smallest
    if delta <= 0 or smallest < delta:
        raise PreconditionError(f'需要 P ⊆ {{x : |A_x| ≥ Δ}} 且 Δ > 0，实际 Δ = {delta}，min |A_x| = {smallest}')
    mu_energy = build_operator('sym-diff', subset, g=r).decompose().main
    mu_p = build_operator('sym-diff', subset, g=P).decompose().main
    return subset, RegularizedSubset(A, subset, exceptional, weights, P, delta, e, mu_energy, mu_p)


# ---------------------------------------------------------------- 连通性

@dataclass(frozen=True, eq=False)
class ConnectivityProfile:
    """
    (α, β, γ) 连通性

    γ = min_B E_α(B)(|A|/|B|)^{2α}/E_α(A)（截断到 1），B 取遍 |B| ≥ β|A| 的子集；
    sampled 模式下 γ 只是上估计。
    """

    base: FiniteSet
    alpha: float
    beta: float
    gamma: float
    mode: str
    witness: FiniteSet
    evaluated: int

    def to_json(self):
        enc = self.base.descriptor.encode
        return {
            'alpha': self.alpha,
            'beta': self.beta,
            'gamma': self.gamma,
            'mode': self.mode,
            'witness': [enc(x) for x in self.witness.elements],
            'evaluated': self.evaluated,
        }


def _difference_index(A):
    sub = A.descriptor.subtractor()
    labels = {}
    table = np.zeros((len(A), len(A)), dtype=np.int64)
    for i, x in enumerate(A.elements):
        for j, y in enumerate(A.elements):
            table[i, j] = labels.setdefault(sub(x, y), len(labels))
    return table, len(labels)


def _batch_energies(masks, table, width, alpha):
    """每一行子集 B 的 E_α(B)"""
    counts = np.zeros((masks.shape[0], width), dtype=np.int64)
    n = masks.shape[1]
    for i in range(n):
        for j in range(n):
            counts[:, table[i, j]] += masks[:, i] & masks[:, j]
    if float(alpha).is_integer():
        return (counts ** int(alpha)).sum(axis=1).astype(float)
    return (counts.astype(float) ** alpha).sum(axis=1)


def _exhaustive_masks(n, smallest):
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, 1 << n, SUBSET_BATCH):
        ints = np.arange(start, min(start + SUBSET_BATCH, 1 << n), dtype=np.int64)
        masks = ((ints[:, None] >> bits) & 1).astype(np.int64)
        yield masks[masks.sum(axis=1) >= smallest]


def _sampled_masks(n, smallest, trials, seed):
    rng = np.random.default_rng(seed)
    sizes = sorted({smallest, (smallest + n) // 2, n})
    rows = []
    for size in sizes:
        for _ in range(trials if size < n else 1):
            mask = np.zeros(n, dtype=np.int64)
            mask[rng.choice(n, size=size, replace=False)] = 1
            rows.append(mask)
    yield np.array(rows, dtype=np.int64).reshape(len(rows), n)


def connectivity_profile(A, alpha=2, beta=0.5, mode='exhaustive', trials=64, seed=0):
    """
    测量连通性参数 γ

    参数：
    - A: 非空集合
    - alpha: α > 1
    - beta: β ∈ [0, 1]
    - mode: 'exhaustive'（|A| ≤ 18）或 'sampled'
    - trials: sampled 模式下每个规模的抽样次数
    - seed: 随机种子

    返回：
    - ConnectivityProfile
    """
    if alpha <= 1:
        raise PreconditionError(f'α 必须 > 1，实际 {alpha}')
    if not 0 <= beta <= 1:
        raise PreconditionError(f'β 必须在 [0,1] 中，实际 {beta}')
    if mode not in ('exhaustive', 'sampled'):
        raise PreconditionError(f'未知模式: {mode}')
    if not len(A):
        raise PreconditionError('需要非空集合')
    n = len(A)
    if mode == 'exhaustive' and n > EXHAUSTIVE_LIMIT:
        raise CapExceededError(f'穷举模式要求 |A| ≤ {EXHAUSTIVE_LIMIT}，实际 {n}')
    smallest = max(1, math.ceil(round(beta * n, 9)))
    table, width = _difference_index(A)
    full = energy_moment(A, alpha)
    batches = (_exhaustive_masks(n, smallest) if mode == 'exhaustive'
               else _sampled_masks(n, smallest, trials, seed))
    best, witness, evaluated = math.inf, None, 0
    for masks in batches:
        if not masks.shape[0]:
            continue
        sizes = masks.sum(axis=1).astype(float)
        ratios = _batch_energies(masks, table, width, alpha) * (n / sizes) ** (2 * alpha) / float(full)
        evaluated += masks.shape[0]
        pos = int(np.argmin(ratios))
        if ratios[pos] < best:
            best, witness = float(ratios[pos]), masks[pos]
    chosen = FiniteSet(A.descriptor, tuple(x for x, keep in zip(A.elements, witness) if keep))
    return ConnectivityProfile(A, alpha, beta, min(1.0, best), mode, chosen, evaluated)


# ---------------------------------------------------------------- 连通集合的推论

def _best_level_set(A, weights, theta, score):
    """按 weights(x) 的二进层划分，返回 score 最大的层 (j, P_j, 最高层号)"""
    levels = dyadic_buckets(weights, theta)
    if not levels:
        raise LabError('没有非空的层集合')
    G = A.descriptor
    sets = {j: FiniteSet(G, tuple(xs)) for j, xs in levels.items()}
    j = max(sorted(sets), key=lambda i: score(sets[i]))
    return j, sets[j], max(levels)


def _dual_partner(A, P):
    """在 𝒫_j（θ* = E(A)/(4|A|²)）中取与 P 的双线性型最大者"""
    n = len(A)
    e = energy(A)
    theta_star = Fraction(e, 4 * n * n)
    levels = dyadic_buckets(autocorrelation(A).values, theta_star)
    mask = _difference_table(A, GroupFunction.indicator(P))
    best = None
    for j in sorted(levels):
        inc = _incidence(A, [(x,) for x in sorted(levels[j])])
        form = int(np.sum((inc @ inc.T) * mask))
        if best is None or form > best[0]:
            best = (form, j)
    form, j = best
    return FiniteSet(A.descriptor, tuple(levels[j])), 2 ** j * theta_star, form


def _restricted_moment(A, P, s):
    """E^P_s(A) = Σ_{x∈P} (A∘A)(x)^s，浮点"""
    r = autocorrelation(A)
    return math.fsum(float(r(x)) ** s for x in P.elements)


def e4_energy_check(A):
    """E_4(A) ≥ |A|⁵/(2⁵L^{10/3}M^{1/3}K^{7/3})，E = |A|³/K，T_4 = M|A|⁷/K³"""
    n = len(A)
    d = A.digest
    ref = 'f:E_4_E: E_4(A) ≥ |A|⁵/(2⁵L^{10/3}M^{1/3}K^{7/3})'
    if not t4_affordable(A):
        return skipped_result('dual.e4_e', ref, CheckKind.EXPLICIT, d, 'cap: T_4 计算量超过上限')
    e = energy(A)
    K = Fraction(n ** 3, e)
    M = t_energy(A, 4) * K ** 3 / n ** 7
    L = level_count(n, e, 2)
    rhs = n ** 5 / (2 ** 5 * L ** (10 / 3) * float(M) ** (1 / 3) * float(K) ** (7 / 3))
    return make_result('dual.e4_e', ref, CheckKind.EXPLICIT, d, energy_moment(A, 4), rhs, 'ge')


def _es_connected_checks(A, profile, subset):
    """(s,β,γ) 连通时的 ΔΔ* 与 σσ* 界"""
    s, gamma = float(profile.alpha), profile.gamma
    n = len(A)
    e = energy(A)
    es = energy_moment(A, s)
    theta = gamma * es / (2 ** (1 + 2 * s) * n * n)
    r = autocorrelation(A)
    j, P, top = _best_level_set(A, {x: float(v) ** (s - 1) for x, v in r.values.items()}, theta,
                                lambda Q: _restricted_moment(subset, Q, s))
    L = max(level_count(n, e, 2), top)
    delta = (2 ** j * theta) ** (1 / (s - 1))
    dual, delta_star, _ = _dual_partner(A, P)
    sigma, sigma_star = sigma_weighted(P, A), sigma_weighted(dual, A)
    d = digest_of([A, P, dual])
    return [
        make_result(f'dual.connected_s.dd.s{s:g}', 'f:c_dd+: E_s|A|^{s−1}Δ(Δ*)^{s−1} ≤ 2^{4s+3}γ^{−1}L^{s+1}E^s',
                    CheckKind.EXPLICIT, d, es * n ** (s - 1) * delta * float(delta_star) ** (s - 1),
                    2 ** (4 * s + 3) / gamma * L ** (s + 1) * float(e) ** s, 'le', s=s, gamma=gamma),
        make_result(f'dual.connected_s.ss.s{s:g}',
                    'f:c_ss+: E_s²|A|^{s−1} ≤ 2^{6s+1}γ^{−2}L^{s+1}E^{s−1}σ_P^{s−1}σ_{P*}^{3−s}',
                    CheckKind.EXPLICIT, d, es * es * n ** (s - 1),
                    2 ** (6 * s + 1) / gamma ** 2 * L ** (s + 1) * float(e) ** (s - 1)
                    * float(sigma) ** (s - 1) * float(sigma_star) ** (3 - s), 'le', s=s, gamma=gamma),
    ]


def _difference_set_ratios(A, subset, s):
    """|A−A| = K|A| 时的 ΔΔ*、σσ* 量，只报告比值"""
    n = len(A)
    e = energy(A)
    K = len(sumset(A, A, 1, -1)) / n
    theta = n ** (s - 1) / (2 ** (2 * s + 1) * K ** (s - 1))
    r = autocorrelation(A)
    j, P, top = _best_level_set(A, {x: float(v) ** (s - 1) for x, v in r.values.items()}, theta,
                                lambda Q: _restricted_moment(subset, Q, s))
    L = max(level_count(n, e, 2), top)
    delta = (2 ** j * theta) ** (1 / (s - 1))
    dual, delta_star, _ = _dual_partner(A, P)
    sigma, sigma_star = sigma_weighted(P, A), sigma_weighted(dual, A)
    d = digest_of([A, P, dual])
    return [
        make_result(f'dual.a_minus_a.dd.s{s:g}', "f:c_dd+': Δ(Δ*)^{s−1} ≪ L^{s+1}K^{s−1}E^s/|A|^{2s}",
                    CheckKind.ASYMPTOTIC, d, delta * float(delta_star) ** (s - 1),
                    L ** (s + 1) * K ** (s - 1) * float(e) ** s / n ** (2 * s), s=s),
        make_result(f'dual.a_minus_a.ss.s{s:g}',
                    "f:c_ss+': |A|^{3s+1} ≪ K^{2(s−1)}L^{s+1}E^{s−1}σ_P^{s−1}σ_{P*}^{3−s}",
                    CheckKind.ASYMPTOTIC, d, float(n) ** (3 * s + 1),
                    K ** (2 * (s - 1)) * L ** (s + 1) * float(e) ** (s - 1)
                    * float(sigma) ** (s - 1) * float(sigma_star) ** (3 - s), s=s),
    ]


def connected_corollary_check(A, profile, s_values=S_GRID, extra_profiles=()):
    """
    (2,β,γ) 连通集合的推论

    参数：
    - A: 集合
    - profile: α = 2、β ≤ 1/2 的 ConnectivityProfile
    - s_values: E_s 下界使用的指数
    - extra_profiles: α ∈ (1,2] 的剖面，给出 (s,β,γ) 连通时的界

    返回：
    - list of CheckResult
    """
    if profile.alpha != 2 or profile.beta > 0.5:
        raise PreconditionError('需要 α = 2、β ≤ 1/2 的连通性剖面')
    if profile.base.digest != A.digest:
        raise PreconditionError('连通性剖面不属于该集合')
    gamma = profile.gamma
    n = len(A)
    e = energy(A)
    subset, _ = regularized_subset(A)
    theta = gamma * e / (2 ** 5 * n * n)
    r = autocorrelation(A)
    j, P, top = _best_level_set(A, {x: float(v) for x, v in r.values.items()}, theta,
                                lambda Q: restricted_energy(subset, Q, 2))
    L = max(level_count(n, e, 2), top)
    delta = 2 ** j * theta
    dual, delta_star, _ = _dual_partner(A, P)
    sigma, sigma_star = sigma_weighted(P, A), sigma_weighted(dual, A)
    d = digest_of([A, P, dual])
    mode = profile.mode
    results = [
        make_result('dual.connected.dd', 'f:c_dd: ΔΔ* ≤ 2^8L²E(A)/(γ|A|)', CheckKind.EXPLICIT, d,
                    delta * float(delta_star), 2 ** 8 * L * L * e / (gamma * n), 'le', gamma=gamma, mode=mode),
        make_result('dual.connected.pp', 'f:c_pp: L^{−5}γ³2^{−21}|A|² ≤ |P||P*|', CheckKind.EXPLICIT, d,
                    gamma ** 3 * n * n / (L ** 5 * 2 ** 21), len(P) * len(dual), 'le', gamma=gamma, mode=mode),
        make_result('dual.connected.ss', 'f:c_ss: L^{−3}γ²2^{−13}E(A)|A| ≤ σ_P(A)σ_{P*}(A)', CheckKind.EXPLICIT, d,
                    gamma ** 2 * e * n / (L ** 3 * 2 ** 13), sigma * sigma_star, 'le', gamma=gamma, mode=mode),
    ]
    for s in s_values:
        results.append(make_result(
            f'dual.connected.s{s:g}', 'f:connected: E_s(A) ≥ 2^{−5}γ|A|^{1−s/2}E^{s/2}(A)', CheckKind.EXPLICIT,
            A.digest, energy_moment(A, s), gamma * n ** (1 - s / 2) * float(e) ** (s / 2) / 2 ** 5, 'ge',
            s=s, gamma=gamma, mode=mode))
    results.append(e4_energy_check(A))
    for extra in extra_profiles:
        if not 1 < extra.alpha <= 2 or extra.beta > 0.5:
            raise PreconditionError('附加剖面需要 α ∈ (1,2]、β ≤ 1/2')
        results += _es_connected_checks(A, extra, subset)
    for s in s_values:
        if 1 < s <= 2:
            results += _difference_set_ratios(A, subset, s)
    return results


# ---------------------------------------------------------------- E_3 对偶

def e3_dual_check(A):
    """
    P = {x : E(A,A_x) ≥ |A_x|²E_3(A)/(2E(A))}，P* = {x : |A_x| ≥ E_3(A)/(4E(A))}

    返回：
    - list of CheckResult：恒等式、E_3/2 下界、对偶型下界与其 Cauchy–Schwarz 推论
    """
    if not len(A):
        raise PreconditionError('需要非空集合')
    if len(A) > E3_DUAL_LIMIT:
        raise CapExceededError(f'E_3 对偶要求 |A| ≤ {E3_DUAL_LIMIT}，实际 {len(A)}')
    G = A.descriptor
    e, e3 = energy(A), energy_moment(A, 3)
    r = autocorrelation(A)
    shifted = {x: energy_pair(A, iterated_intersection(A, (x,))) for x in r.values}
    P = FiniteSet(G, tuple(x for x, v in shifted.items() if 2 * e * v >= r(x) ** 2 * e3))
    P_star = FiniteSet(G, tuple(x for x, v in r.values.items() if 4 * e * v >= e3))
    inc = _incidence(A, [(x,) for x in P.elements])
    gram = inc @ inc.T
    weight = _difference_table(A, r)
    star = _difference_table(A, GroupFunction.indicator(P_star))
    over_p = sum(shifted[x] for x in P.elements)
    form = int(np.sum(weight * gram))
    dual_form = int(np.sum(weight * star * gram))
    d = digest_of([A, P, P_star])
    return [
        make_result('dual.e3.identity', 'l:E_k-identity: Σ_{x∈P}E(A,A_x) = Σ A(x)A(y)(A∘A)(x−y)C_3(P,A,A)(x,y)',
                    CheckKind.EXACT, d, over_p, form),
        make_result('dual.e3.half', 'E_3 dual sets: 2^{−1}E_3(A) ≤ Σ_{x∈P}E(A,A_x)', CheckKind.EXPLICIT, d,
                    Fraction(e3, 2), over_p, 'le'),
        make_result('dual.e3.form', 'f:dual_E_3: 2^{−2}E_3(A) ≤ Σ A(x)A(y)(A∘A)(x−y)P*(x−y)C_3(P,A,A)(x,y)',
                    CheckKind.EXPLICIT, d, Fraction(e3, 4), dual_form, 'le'),
        make_result('dual.e3.cs', 'f:dual_E_3 + Cauchy–Schwarz: 2^{−4}E_3² ≤ E^{P*}_3(A)Σ_{x,y∈P}C_3²(A)(x,y)',
                    CheckKind.EXPLICIT, d, Fraction(e3 * e3, 16),
                    restricted_energy(A, P_star, 3) * int(np.sum(gram * gram)), 'le'),
    ]


class DualSetAnalyzer(BaseCheck):
    """
    构造对偶对并运行对偶集合一节的全部检查

    参数：
    - k: 2 或 3
    - alpha, beta: 连通性参数
    - connectivity_mode: 'auto'（|A| ≤ 18 穷举，否则抽样）、'exhaustive' 或 'sampled'
    - trials, seed: 抽样参数
    - printlog: 是否打印日志
    """

    check_id = 'dual.analyzer'
    ref = 't:dual_bounds'

    params = (
        ('k', 2),
        ('alpha', 2),
        ('beta', 0.5),
        ('connectivity_mode', 'auto'),
        ('trials', 64),
        ('seed', 0),
    )

    def _mode(self, A):
        if self.p.connectivity_mode != 'auto':
            return self.p.connectivity_mode
        return 'exhaustive' if len(A) <= EXHAUSTIVE_LIMIT else 'sampled'

    def run(self, A):
        pair = level_dual_pair(A, self.p.k)
        self.log(f'L={pair.L} 层号={pair.levels} |P|={len(pair.P)} |𝒫|={len(pair.tuples)} form={pair.form}')
        checks = dual_bounds_check(A, self.p.k)
        checks += dual_operator_checks(A, pair.tuples)
        _, cert = regularized_subset(A)
        checks += cert.checks()
        report = {
            'input_digest': A.digest,
            'pair': pair.to_json(),
            'regularized': cert.to_json(),
        }
        if self.p.k == 2:
            mode = self._mode(A)
            profile = connectivity_profile(A, self.p.alpha, self.p.beta, mode, self.p.trials, self.p.seed)
            self.log(f'连通性 γ={profile.gamma:.6g}（{mode}，{profile.evaluated} 个子集）')
            report['connectivity'] = profile.to_json()
            if profile.alpha == 2 and profile.beta <= 0.5:
                checks += connected_corollary_check(A, profile)
            if len(A) <= E3_DUAL_LIMIT:
                checks += e3_dual_check(A)
        failed = [c.check_id for c in checks if c.failed]
        if failed:
            self.log(f'未通过: {", ".join(failed)}')
        report['checks'] = [c.to_json() for c in checks]
        return report
