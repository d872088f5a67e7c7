"""
检查注册表

把每一条在范围内的恒等式、显式不等式与渐近结论绑定到一个可运行的检查：
- CheckDescriptor：检查编号、出处标签、类型、输入要求（族标签、大小上限）与求值函数
- run_suite：按套件与编号通配符批量运行，结果按 (check_id, 输入摘要) 排序
- emit_report / load_report：确定性的 JSON / CSV 报告

不适用的 (检查, 输入) 组合写成带原因的跳过结果，不会被丢弃。
"""

import fnmatch
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import pandas as pd

from hel.lab.base_check import CheckKind, CheckResult, combine_digest, make_result, skipped_result
from hel.lab.convolution import (
    diagonal_correlation_check, multi_scalar_check, scalar_product_check, sigma_c_check,
    tensor_c_check, tensor_convolution_check,
)
from hel.lab.dual_sets import (
    EXHAUSTIVE_LIMIT, connected_corollary_check, connectivity_profile, dual_bounds_check,
    dual_operator_checks, duality_identity_check, e3_dual_check, e4_energy_check, level_dual_pair,
    popular_difference_set, popular_dual_pair, regularized_subset,
)
from hel.lab.energies import (
    autocorrelation, diagonal_energy_check, ek_identity_check, energy_forms_check, energy_moment,
    energy_pair_moment, holder_checks, sigma_restricted_check, t_energy,
)
from hel.lab.exceptions import (
    CapExceededError, DescriptorMismatchError, PipelineAbort, PreconditionError, ReportError,
    UnknownCheckError,
)
from hel.lab.generators import (
    FamilySpec, GeneratedSet, generate, predict_h_plus_lambda_energy, predict_union_energy,
    predict_union_t_energy, wrap_set,
)
from hel.lab.group_core import FiniteSet, GroupFunction, sumset
from hel.lab.spectral import (
    abs_spectrum_check, build_operator, decomposition_checks, diagonal_convexity_check,
    fourth_power_trace_check, g_bound_checks, li_inequality_check, mu_g_a_checks,
    operator_product_checks, perron_frobenius_check, rank_one_check, rayleigh_check,
    tensor_operator_check, triangles_identity_check, weighted_energy_check,
)
from hel.lab.structure import (
    bsg_extract, convex_energy_ratios, convex_pipeline_trace, decay_profile_check, energy_gen_check,
    level_decompose, pipeline_E3, pipeline_E4M, pipeline_E4T4, shifted_energy_check,
)

REPORT_VERSION = 1
CSV_COLUMNS = ('check_id', 'paper_ref', 'kind', 'input_digest', 'lhs', 'rhs', 'ratio', 'pass',
               'runtime_ms', 'skipped')

SUITES = {
    'identities': (CheckKind.EXACT,),
    'explicit': (CheckKind.EXPLICIT,),
    'asymptotic': (CheckKind.ASYMPTOTIC,),
    'all': (CheckKind.EXACT, CheckKind.EXPLICIT, CheckKind.ASYMPTOTIC),
}

# 范围内的全部出处标签；每个标签至少出现在一个 CheckDescriptor.paper_ref 中
PAPER_MAP = (
    'f:energy_convolution', 'f:E_k_preliminalies', 'f:E_k_preliminalies_B', 'f:energy-B^k-Delta',
    'l:commutative_C', 'f:scalar_C', 'f:gen_C', 'f:conv_C', 'f:tensor_convolutions',
    'f:tensor_convolutions_C_k',
    'l:singular_decomposition', 'f:ractangular_norm_of_M', 't:Perron-Frobenius', 'l:convex_eigenvalues',
    'l:E_k-identity', 't:BSzG', 'l:E_3_convex', 'l:arranging_gen',
    "def:operator1'", "def:operator2'", 'f:TT*', 'f:TT*_tilde', 'f:T*T', 'f:T*T_tilde',
    "f:sum_eigenvalues'", "f:sum_squares_eigenvalues'_1", "f:sum_squares_eigenvalues'_2",
    "l:eigenvalues_D,S'", "l:3/2_energy'", "f:3/2_energy_D'", "f:3/2_energy_S'", 'f:Li',
    'def:operator1', 'def:operator2', 'f:sum_eigenvalues', 'f:sum_squares_eigenvalues',
    'l:eigenvalues_D,S', 'p:mu_g_a', 'f:mu_g_a_1', 'f:mu_g_a_2', 'f:mu_g_a_3', 'l:tensor_operator',
    'l:g_bound', 'f:g_bound', 'f:L_infty', "f:L_infty'", 'cor:mu_energy_mu_g', 'p:triangles_g',
    't:convex_energy', 't:energy_gen', 'f:convex_energy', 'f:energy_gen', 'f:E^m_A(A+1)',
    'l:arranging_product',
    't:E_3_M', 't:E_4_M', 't:E_4_T_4', 'f:E_k,T_k,sigma',
    'def:dual_sets', "def:dual_sets'", 'tmp:24.12.2012_2', 'tmp:24.12.2012_star', 'f:dual_k=2',
    'def:T_op_P', 't:dual_bounds', 'f:D,D^*', "f:k=2'", "l:A'_0.5",
    'c:connected', 'f:c_dd', 'f:connected', 'p:E_s_E', 'f:c_dd+', 'f:c_ss+', 'l:A-A_E', "f:c_dd+'",
    "f:c_ss+'", 'p:E_4_T_4_E', 'f:E_4_E', 'f:dual_E_3',
)


@dataclass(frozen=True)
class CheckDescriptor:
    """
    一个可运行的检查

    paper_ref 写作 "标签, 标签 | 说明"；evaluator 接收 GeneratedSet，
    返回 CheckResult 或其列表，只保留与 kind 相同类型的结果。
    """

    check_id: str
    paper_ref: str
    kind: CheckKind
    evaluator: Callable
    requires: frozenset = frozenset()
    max_size: int = 64
    groups: tuple = ()

    @property
    def tags(self):
        return tuple(t.strip() for t in self.paper_ref.split(' | ')[0].split(', '))

    def inapplicable(self, item):
        """不适用时返回原因，否则返回 None"""
        A = item.set
        if not len(A):
            return 'requirement: 空集合'
        missing = sorted(self.requires - item.tags)
        if missing:
            return f'requirement: 缺少标签 {", ".join(missing)}'
        if self.groups and A.descriptor.kind not in self.groups:
            return f'requirement: 群类型 {A.descriptor.kind} 不在 {"/".join(self.groups)} 中'
        if len(A) > self.max_size:
            return f'cap: |A| = {len(A)} > {self.max_size}'
        return None

    def evaluate(self, item, timing=False):
        """
        对一个输入运行检查

        参数：
        - item: GeneratedSet
        - timing: 是否记录耗时，否则 runtime_ms 为 0

        返回：
        - list of CheckResult，至少一条
        """
        reason = self.inapplicable(item)
        if reason is not None:
            return [self._skip(item, reason)]
        start = time.perf_counter()
        try:
            out = self.evaluator(item)
        except PipelineAbort as exc:
            partial = exc.trace.checks() if exc.trace is not None else []
            out = partial + [self._skip(item, f'abort: {exc}')]
        except CapExceededError as exc:
            return [self._skip(item, f'cap: {exc}')]
        except (PreconditionError, DescriptorMismatchError) as exc:
            return [self._skip(item, f'precondition: {exc}')]
        elapsed = (time.perf_counter() - start) * 1000 if timing else 0
        if isinstance(out, CheckResult):
            out = [out]
        results = [r for r in out if CheckKind(r.kind) is self.kind or r.skipped]
        if not results:
            return [self._skip(item, f'inapplicable: 没有 {self.kind.value} 类结果')]
        return [r.with_runtime(elapsed) for r in results]

    def _skip(self, item, reason):
        return skipped_result(self.check_id, self.paper_ref, self.kind, item.digest, reason)


# ---------------------------------------------------------------- 派生输入

def _partner(item):
    """B：子群取 A 本身（等号情形），否则取 A 的前一半"""
    A = item.set
    if 'subgroup' in item.tags or len(A) < 2:
        return A
    return FiniteSet(A.descriptor, A.elements[:(len(A) + 1) // 2])


def _difference_indicator(A):
    return GroupFunction.indicator(sumset(A, A, 1, -1))


def _energy_operator(A):
    return build_operator('sym-diff', A, g=autocorrelation(A))


# ---------------------------------------------------------------- 卷积与能量

def _ev_energy_forms(item):
    return energy_forms_check(item.set, _partner(item))


def _ev_moment_definitions(item):
    """E_k(A) = Σ_x |A ∩ (A−x)|^k 与 E_k(A,B) = Σ_x (A∘A)(x)(B∘B)(x)^{k−1} 的逐点复算"""
    A, B = item.set, _partner(item)
    ra, rb = autocorrelation(A), autocorrelation(B)
    neg = A.descriptor.negator()
    results = []
    for k in (1, 2, 3, 4):
        direct = sum(len(A.intersection(A.translate(neg(x)))) ** k for x in ra.values)
        results.append(make_result(f'energies.definition.k{k}',
                                   'f:E_k_preliminalies: E_k(A) = Σ_x |A_x|^k', CheckKind.EXACT,
                                   A.digest, energy_moment(A, k), direct, k=k))
    for k in (2, 3):
        direct = sum(v * rb(x) ** (k - 1) for x, v in ra.values.items())
        results.append(make_result(f'energies.definition_pair.k{k}',
                                   'f:E_k_preliminalies_B: E_k(A,B) = Σ (A∘A)(B∘B)^{k−1}', CheckKind.EXACT,
                                   combine_digest(A.digest, B.digest), energy_pair_moment(A, B, k), direct, k=k))
    results.append(make_result('energies.definition_pair.k2_symmetric',
                               'f:E_k_preliminalies_B: E_2(A,B) = E_2(B,A)', CheckKind.EXACT,
                               combine_digest(A.digest, B.digest), energy_pair_moment(A, B, 2),
                               energy_pair_moment(B, A, 2)))
    return results


def _ev_diagonal_energy(item):
    return diagonal_energy_check(item.set, _partner(item), 2)


def _ev_ek_identity(item):
    A = item.set
    return [ek_identity_check(A, k, l) for k, l in ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1))]


def _ev_scalar_c(item):
    A, B = item.set, _partner(item)
    return [scalar_product_check([A, B], [A, A]), scalar_product_check([A, B, A], [B, A, A])]


def _ev_gen_c(item):
    A, B = item.set, _partner(item)
    return [multi_scalar_check(fs, l) for fs in ([A, B], [A, B, A]) for l in (2, 3)]


def _ev_conv_c(item):
    A, B = item.set, _partner(item)
    return [sigma_c_check(fs, l) for fs in ([A, B], [A, B, A]) for l in (2, 3)]


def _ev_tensor_convolutions(item):
    A, B = item.set, _partner(item)
    return (tensor_convolution_check(A, B, 2) + [tensor_c_check([A, B], 2)]
            + [diagonal_correlation_check(A, B, 2)])


def _ev_holder(item):
    return holder_checks(item.set)


def _ev_sigma_restricted(item):
    A = item.set
    D = popular_difference_set(A, 2)
    return [sigma_restricted_check(A, D, 2), sigma_restricted_check(A, D, 4)]


# ---------------------------------------------------------------- 谱

def _ev_decomposition(item):
    A, B = item.set, _partner(item)
    g = autocorrelation(A)
    results = []
    for kind, rhs in (('rect-diff', B), ('rect-sum', B), ('sym-diff', None), ('sym-sum', None)):
        op = build_operator(kind, A, rhs, g)
        results += decomposition_checks(op)
        results.append(fourth_power_trace_check(op.matrix).with_id(f'spectral.fourth_power.{kind}'))
    return results


def _ev_operator_products(item):
    return operator_product_checks(item.set, _partner(item), autocorrelation(item.set))


def _ev_rank_one(item):
    A, B = item.set, _partner(item)
    results = rank_one_check(A, B, sumset(A, B, 1, -1), sumset(A, B))
    if B != A:
        results += rank_one_check(A, A, sumset(A, A, 1, -1), sumset(A, A))
    return results


def _ev_perron(item):
    return perron_frobenius_check(_energy_operator(item.set).matrix)


def _ev_convex_eigenvalues(item):
    return diagonal_convexity_check(_energy_operator(item.set).matrix)


def _ev_mu_g_a(item):
    return mu_g_a_checks(item.set, autocorrelation(item.set))


def _ev_tensor_operator(item):
    return tensor_operator_check(item.set, autocorrelation(item.set), 2)


def _ev_triangles(item):
    A = item.set
    r = autocorrelation(A)
    return [triangles_identity_check(A, r, r), triangles_identity_check(A, r, _difference_indicator(A))]


def _ev_abs_spectrum(item):
    return abs_spectrum_check(item.set, autocorrelation(item.set))


def _ev_energy_32(item):
    A, B = item.set, _partner(item)
    return weighted_energy_check(A, B, A, sumset(A, B, 1, -1), sumset(A, B))


def _ev_li(item):
    A, B = item.set, _partner(item)
    return li_inequality_check(A, B, 1) + li_inequality_check(A, B, -1)


def _ev_g_bound(item):
    A = item.set
    return g_bound_checks(A, autocorrelation(A), GroupFunction.indicator(A)) + [rayleigh_check(A)]


# ---------------------------------------------------------------- 对偶集合

def _ev_duality(item):
    A = item.set
    return duality_identity_check(A, autocorrelation(A), _difference_indicator(A))


def _ev_dual_operator(item):
    A = item.set
    return dual_operator_checks(A, level_dual_pair(A, 2).tuples)


def _ev_dual_pair(item):
    return popular_dual_pair(item.set, 2).certify()


def _ev_dual_bounds(item):
    return dual_bounds_check(item.set, 2)


def _ev_dual_bounds_k3(item):
    return dual_bounds_check(item.set, 3)


def _ev_regularized(item):
    _, cert = regularized_subset(item.set)
    return cert.checks()


def _ev_connected(item):
    A = item.set
    mode = 'exhaustive' if len(A) <= EXHAUSTIVE_LIMIT else 'sampled'
    profile = connectivity_profile(A, 2, 0.5, mode)
    extra = connectivity_profile(A, 1.5, 0.5, mode)
    return connected_corollary_check(A, profile, extra_profiles=(extra,)) + [e4_energy_check(A)]


def _ev_e3_dual(item):
    return e3_dual_check(item.set)


# ---------------------------------------------------------------- 结构

def _ev_levels(item):
    return level_decompose(item.set).checks()


def _ev_bsg(item):
    _, _, cert = bsg_extract(item.set)
    return cert.checks()


def _ev_e3(item):
    return pipeline_E3(item.set).checks()


def _ev_e4m(item):
    return pipeline_E4M(item.set).checks()


def _ev_e4t4(item):
    return pipeline_E4T4(item.set).checks()


def _ev_convex_trace(item):
    return convex_pipeline_trace(item.set).checks()


def _ev_convex_ratios(item):
    return convex_energy_ratios(item.set) + [decay_profile_check(item.set, 'convex')]


def _ev_mult_ratios(item):
    A = item.set
    return [energy_gen_check(A), shifted_energy_check(A),
            decay_profile_check(A, 'mult-doubling'), decay_profile_check(A, 'shifted-product')]


# ---------------------------------------------------------------- 例子族

def _factor_gap(measured, predicted):
    measured, predicted = float(measured), float(predicted)
    return max(measured / predicted, predicted / measured)


def _ev_h_plus_lambda(item):
    A = item.set
    H, L = item.components.get('H'), item.components.get('Lambda')
    if H is None or not (A == H or len(A) == len(H) * len(L)):
        raise PreconditionError('需要直和形式的 H ∔ Λ')
    return [
        make_result(f'generators.h_plus_lambda.s{s:g}', 'r:L+H_E_s | 两段式 E_s 预测，误差因子 ≤ 4',
                    CheckKind.EXPLICIT, A.digest,
                    _factor_gap(energy_moment(A, s), predict_h_plus_lambda_energy(len(H), len(A), s)), 4, 'le')
        for s in (1.5, 2, 3)
    ]


def _ev_subgroup_union(item):
    A = item.set
    parts = item.components.get('parts')
    if not parts:
        raise PreconditionError('需要 ⊔H_j 的各个子空间')
    n = len(A)
    K = len(parts) ** 2
    results = [
        make_result(f'generators.union.E.s{s:g}', 'r:self-dual | ⊔H_j 的 E_s 形状，误差因子 ≤ 8',
                    CheckKind.EXPLICIT, A.digest,
                    _factor_gap(energy_moment(A, s), predict_union_energy(n, K, s)), 8, 'le')
        for s in (1.5, 2, 3)
    ]
    results += [
        make_result(f'generators.union.T.t{t}', 'r:self-dual | ⊔H_j 的 T_t 形状，误差因子 ≤ 8',
                    CheckKind.EXPLICIT, A.digest,
                    _factor_gap(t_energy(A, t), predict_union_t_energy(n, K, t)), 8, 'le')
        for t in (2, 3)
    ]
    return results


# ---------------------------------------------------------------- 注册表

EXACT, EXPLICIT, ASYMPTOTIC = CheckKind.EXACT, CheckKind.EXPLICIT, CheckKind.ASYMPTOTIC
FINITE = ('ZmodN', 'F2n', 'product')

DESCRIPTORS = (
    # 定义与卷积恒等式
    CheckDescriptor('energies.forms', 'f:energy_convolution | E(A,B) 的三种写法相等', EXACT,
                    _ev_energy_forms, max_size=128),
    CheckDescriptor('energies.definitions', 'f:E_k_preliminalies, f:E_k_preliminalies_B | E_k 的逐点定义',
                    EXACT, _ev_moment_definitions, max_size=64),
    CheckDescriptor('energies.diagonal', 'f:energy-B^k-Delta | Σ|B^k ∩ Δ(A)|² 与 E_k(A,B)', EXACT,
                    _ev_diagonal_energy, max_size=16),
    CheckDescriptor('energies.ek_identity', 'l:E_k-identity | Σ_{x∈A^k} E_l(A, A_x) 与 k+l ≤ 4', EXACT,
                    _ev_ek_identity, max_size=16),
    CheckDescriptor('convolution.scalar', 'l:commutative_C, f:scalar_C | Σ C_l(f)C_l(g) = Σ Π(f_i∘g_i)',
                    EXACT, _ev_scalar_c, max_size=16),
    CheckDescriptor('convolution.generalized', 'l:commutative_C, f:gen_C | Σ Π C_l(f_i) = Σ C_k^l', EXACT,
                    _ev_gen_c, max_size=12),
    CheckDescriptor('convolution.sigma', 'l:commutative_C, f:conv_C | C_l 链的 σ 形式', EXACT,
                    _ev_conv_c, max_size=12),
    CheckDescriptor('convolution.tensor', 'f:tensor_convolutions, f:tensor_convolutions_C_k | 张量幂与卷积交换',
                    EXACT, _ev_tensor_convolutions, max_size=12),
    # 谱恒等式
    CheckDescriptor('spectral.decomposition',
                    "l:singular_decomposition, f:ractangular_norm_of_M, def:operator1', def:operator2', "
                    "def:operator1, def:operator2, f:sum_eigenvalues', f:sum_squares_eigenvalues'_1, "
                    "f:sum_squares_eigenvalues'_2, f:sum_eigenvalues, f:sum_squares_eigenvalues | 四个算子的分解与迹公式",
                    EXACT, _ev_decomposition, max_size=48),
    CheckDescriptor('spectral.products', 'f:TT*, f:TT*_tilde, f:T*T, f:T*T_tilde | 算子乘积写成 C_3', EXACT,
                    _ev_operator_products, max_size=32),
    CheckDescriptor('spectral.rank_one', "l:eigenvalues_D,S', l:eigenvalues_D,S | A−B ⊆ D、A+B ⊆ S 时秩为 1",
                    EXACT, _ev_rank_one, max_size=32),
    CheckDescriptor('spectral.perron', 't:Perron-Frobenius | 非负矩阵的主特征向量非负', EXACT,
                    _ev_perron, max_size=64),
    CheckDescriptor('spectral.mu_g_a', 'p:mu_g_a, f:mu_g_a_1, f:mu_g_a_2 | 特征函数均值的两个恒等式', EXACT,
                    _ev_mu_g_a, max_size=64),
    CheckDescriptor('spectral.tensor_operator', 'l:tensor_operator | T^{g⊗g}_{A×A} 的谱是乘积', EXACT,
                    _ev_tensor_operator, max_size=16),
    CheckDescriptor('spectral.triangles', 'p:triangles_g | 三角形计数 = Σ μ_α²⟨T^{g_2}f_α,f_α⟩', EXACT,
                    _ev_triangles, max_size=64),
    CheckDescriptor('spectral.abs_spectrum', "def:operator1', def:operator1 | λ_j(T^g_{A,A}) = |μ_j(T^g_A)|",
                    EXACT, _ev_abs_spectrum, max_size=48),
    # 对偶集合恒等式
    CheckDescriptor('dual.duality', 'f:dual_k=2 | 对偶恒等式交换 g 与 h', EXACT, _ev_duality, max_size=24),
    CheckDescriptor('dual.operator', 'def:T_op_P, def:dual_sets | 对偶算子非负定且迹为 σ_𝒫(A)', EXACT,
                    _ev_dual_operator, max_size=24),
    CheckDescriptor('dual.pair_form', "def:dual_sets', tmp:24.12.2012_star | 双线性型经 A_z 复算", EXACT,
                    _ev_dual_pair, max_size=24),
    CheckDescriptor('dual.e3_identity', 'l:E_k-identity, f:dual_E_3 | Σ_{x∈P}E(A,A_x) 的 C_3 写法', EXACT,
                    _ev_e3_dual, max_size=32),
    CheckDescriptor('structure.e4t4_identity', 't:E_4_T_4 | Σ_s R_s(x) = (A∘A)(x)² 给出 E_4', EXACT,
                    _ev_e4t4, max_size=64),

    # 显式常数不等式
    CheckDescriptor('energies.holder', 'f:E_k,T_k,sigma | Cauchy–Schwarz 与 Hölder 型不等式', EXPLICIT,
                    _ev_holder, max_size=64),
    CheckDescriptor('energies.sigma_restricted', 'f:E_k,T_k,sigma | (σ_D(A)/|A|)^{2k} ≤ E_k(A)T_{k/2}(D)',
                    EXPLICIT, _ev_sigma_restricted, max_size=24),
    CheckDescriptor('spectral.energy_32', "l:3/2_energy', f:3/2_energy_D', f:3/2_energy_S' | |A|²σ²(ψ,B) 的上界",
                    EXPLICIT, _ev_energy_32, max_size=64),
    CheckDescriptor('spectral.li', 'f:Li | Li 不等式与 ss2 推论', EXPLICIT, _ev_li, max_size=64),
    CheckDescriptor('spectral.g_bound',
                    "l:g_bound, f:g_bound, f:L_infty, f:L_infty', cor:mu_energy_mu_g | 主特征函数的估计",
                    EXPLICIT, _ev_g_bound, max_size=64),
    CheckDescriptor('spectral.mu_g_a_bounds', 'p:mu_g_a, f:mu_g_a_3 | Σ μ³g_α² 下界与 Carbery 不等式', EXPLICIT,
                    _ev_mu_g_a, max_size=64),
    CheckDescriptor('spectral.convex_eigenvalues', 'l:convex_eigenvalues | 对角的凸组合不超过谱的极值',
                    EXPLICIT, _ev_convex_eigenvalues, max_size=64),
    CheckDescriptor('dual.pair', "def:dual_sets', tmp:24.12.2012_2, tmp:24.12.2012_star | c = 1/4 的对偶对",
                    EXPLICIT, _ev_dual_pair, max_size=24),
    CheckDescriptor('dual.bounds', "t:dual_bounds, f:D,D^*, f:k=2', tmp:24.12.2012_2 | ΔΔ*、σσ*、|P||𝒫| 的界",
                    EXPLICIT, _ev_dual_bounds, max_size=24),
    CheckDescriptor('dual.bounds_k3', 't:dual_bounds, f:D,D^* | k = 3 的对偶界', EXPLICIT,
                    _ev_dual_bounds_k3, max_size=12),
    CheckDescriptor('dual.regularized', "l:A'_0.5 | 正则化子集 A′ 的证书", EXPLICIT, _ev_regularized,
                    max_size=24),
    CheckDescriptor('dual.connected',
                    'c:connected, f:c_dd, f:connected, p:E_s_E, f:c_dd+, f:c_ss+, p:E_4_T_4_E, f:E_4_E | '
                    '按测得的 γ 检查连通推论',
                    EXPLICIT, _ev_connected, max_size=24),
    CheckDescriptor('dual.e3', 'f:dual_E_3 | E_3 对偶集合的下界', EXPLICIT, _ev_e3_dual, max_size=32),
    CheckDescriptor('structure.levels', 't:E_3_M | 二进层分解的抽屉原理', EXPLICIT, _ev_levels, max_size=256),
    CheckDescriptor('structure.bsg', 't:BSzG | 可验证的 BSG 提取', EXPLICIT, _ev_bsg, max_size=128),
    CheckDescriptor('structure.e3', 't:E_3_M | E_3 流程的显式步骤', EXPLICIT, _ev_e3, max_size=96),
    CheckDescriptor('structure.e4m', 't:E_4_M | E_4 流程的显式步骤', EXPLICIT, _ev_e4m, max_size=96),
    CheckDescriptor('structure.e4t4', 't:E_4_T_4 | E_4/T_4 流程的显式步骤', EXPLICIT, _ev_e4t4, max_size=64),
    CheckDescriptor('structure.convex_trace', 't:convex_energy | 凸集证明链的显式步骤', EXPLICIT,
                    _ev_convex_trace, max_size=96),
    CheckDescriptor('generators.h_plus_lambda', 'r:L+H_E_s | H ∔ Λ 的 E_s 两段式', EXPLICIT, _ev_h_plus_lambda,
                    requires=frozenset({'H-plus-dissociated'}), max_size=4096),
    CheckDescriptor('generators.subgroup_union', 'r:self-dual | ⊔H_j 的 E_s 与 T_t 形状', EXPLICIT,
                    _ev_subgroup_union, requires=frozenset({'disjoint-subgroup-union'}), max_size=256),

    # 渐近结论，只报告比值
    CheckDescriptor('structure.convex_ratios', 'l:E_3_convex, t:convex_energy, f:convex_energy | 凸集能量比值',
                    ASYMPTOTIC, _ev_convex_ratios, requires=frozenset({'convex'}), max_size=1024),
    CheckDescriptor('structure.multiplicative_ratios',
                    't:energy_gen, f:energy_gen, f:E^m_A(A+1), l:arranging_gen, l:arranging_product | '
                    '乘法小倍增下的能量比值',
                    ASYMPTOTIC, _ev_mult_ratios, groups=('Z',), max_size=512),
    CheckDescriptor('structure.e3_ratios', 't:E_3_M | E_3 流程的规模与倍增比值', ASYMPTOTIC, _ev_e3,
                    max_size=96),
    CheckDescriptor('structure.e4m_ratios', 't:E_4_M | E_4 流程的规模与倍增比值', ASYMPTOTIC, _ev_e4m,
                    max_size=96),
    CheckDescriptor('structure.e4t4_ratios', 't:E_4_T_4 | E_4/T_4 流程的规模与能量比值', ASYMPTOTIC, _ev_e4t4,
                    max_size=64),
    CheckDescriptor('structure.bsg_ratios', 't:BSzG | BSG 和集与 α^{−5}|A| 的比值', ASYMPTOTIC, _ev_bsg,
                    max_size=128),
    CheckDescriptor('structure.convex_trace_ratios', 't:convex_energy | 凸集证明链的渐近步骤', ASYMPTOTIC,
                    _ev_convex_trace, max_size=96),
    CheckDescriptor('dual.difference_ratios', "l:A-A_E, f:c_dd+', f:c_ss+' | 差集上的渐近比值", ASYMPTOTIC,
                    _ev_connected, max_size=24),
)

REGISTRY = {d.check_id: d for d in DESCRIPTORS}


def get_descriptor(check_id):
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise UnknownCheckError(f'未知的检查编号: {check_id}') from None


def select_checks(suite='all', pattern=None):
    """
    按套件与编号通配符选出检查

    参数：
    - suite: identities / explicit / asymptotic / all
    - pattern: fnmatch 通配符，匹配 CheckDescriptor.check_id

    返回：
    - list of CheckDescriptor，按编号排序
    """
    if suite not in SUITES:
        raise UnknownCheckError(f'未知的检查套件: {suite}')
    kinds = SUITES[suite]
    chosen = [d for d in DESCRIPTORS if d.kind in kinds]
    if pattern:
        chosen = [d for d in chosen if fnmatch.fnmatchcase(d.check_id, pattern)]
        if not chosen:
            raise UnknownCheckError(f'没有与 {pattern} 匹配的检查（套件 {suite}）')
    return sorted(chosen, key=lambda d: d.check_id)


def resolve_input(obj):
    """
    把 FamilySpec、族描述字符串、集合文件路径或 FiniteSet 统一为 GeneratedSet
    """
    if isinstance(obj, GeneratedSet):
        return obj
    if isinstance(obj, FamilySpec):
        return generate(obj)
    if isinstance(obj, FiniteSet):
        return wrap_set(obj)
    if isinstance(obj, Path) or (isinstance(obj, str) and os.path.isfile(obj)):
        from hel.lab.data_loader import SetLoader
        return wrap_set(SetLoader(cache_dir=None, printlog=False).load_set(obj))
    return generate(str(obj))


def run_check(check_id, item, timing=False):
    """单独运行一个检查，与批量运行的结果相同"""
    return get_descriptor(check_id).evaluate(resolve_input(item), timing)


def _run_task(task):
    check_id, item, timing = task
    return REGISTRY[check_id].evaluate(item, timing)


def run_suite(suite, inputs, check_filter=None, jobs=1, timing=False):
    """
    批量运行一个检查套件

    参数：
    - suite: identities / explicit / asymptotic / all
    - inputs: FamilySpec、族描述字符串、集合文件或 FiniteSet 的列表
    - check_filter: 检查编号通配符
    - jobs: 进程数，大于 1 时使用进程池
    - timing: 是否记录耗时

    返回：
    - list of CheckResult，按 (check_id, input_digest) 排序
    """
    descriptors = select_checks(suite, check_filter)
    items = [resolve_input(obj) for obj in inputs]
    tasks = [(d.check_id, item, timing) for item in items for d in descriptors]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(task) for task in tasks]
    results = [r for chunk in chunks for r in chunk]
    return sorted(results, key=lambda r: (r.check_id, r.input_digest))


def has_failures(results):
    """是否存在未通过的非渐近检查（决定命令行退出码）"""
    return any(r.failed for r in results)


# ---------------------------------------------------------------- 报告

def report_frame(results):
    """结果整理为 DataFrame，列顺序与 CSV 报告相同"""
    rows = [r.to_json() for r in results]
    return pd.DataFrame(rows, columns=list(CSV_COLUMNS), dtype=object)


def emit_report(results, fmt='json', path='report.json'):
    """
    写出报告

    参数：
    - results: CheckResult 列表
    - fmt: 'json' 或 'csv'
    - path: 输出路径

    返回：
    - Path
    """
    path = Path(path)
    try:
        if fmt == 'json':
            payload = {'version': REPORT_VERSION, 'results': [r.to_json() for r in results]}
            path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + '\n', encoding='utf-8')
        elif fmt == 'csv':
            report_frame(results).to_csv(path, index=False, lineterminator='\n')
        else:
            raise PreconditionError(f'未知的报告格式: {fmt}')
    except OSError as exc:
        raise ReportError(f'无法写入报告 {path}: {exc}') from exc
    return path


def _csv_number(text):
    if text == '':
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def _csv_row(record):
    row = {
        'check_id': record['check_id'],
        'paper_ref': record['paper_ref'],
        'kind': record['kind'],
        'input_digest': record['input_digest'],
        'lhs': _csv_number(record['lhs']),
        'rhs': _csv_number(record['rhs']),
        'ratio': _csv_number(record['ratio']),
    }
    if record['pass'] != '':
        row['pass'] = record['pass'] == 'True'
    row['runtime_ms'] = int(record['runtime_ms'])
    if record['skipped'] != '':
        row['skipped'] = record['skipped']
    return row


def load_report(path):
    """
    读回 JSON 或 CSV 报告

    返回：
    - list of CheckResult
    """
    path = Path(path)
    try:
        if path.suffix == '.csv':
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
            rows = [_csv_row(record) for record in frame.to_dict(orient='records')]
        else:
            payload = json.loads(path.read_text(encoding='utf-8'))
            if payload.get('version') != REPORT_VERSION:
                raise ReportError(f'不支持的报告版本: {payload.get("version")}')
            rows = payload['results']
    except OSError as exc:
        raise ReportError(f'无法读取报告 {path}: {exc}') from exc
    return [CheckResult.from_json(row) for row in rows]
