"""
结构定理

二进层分解、抽屉原理选层、可验证的 Balog–Szemerédi–Gowers 提取，
以及三条结构流程（E_3、E_4 与 E_4/T_4 条件）和凸集能量证明链的逐步记录。

所有和集增长都直接测量，不假设 Plünnecke 型不等式；
带 ≪ 的结论按隐含常数 1 只报告比值（asymptotic），显式不等式给出 pass/fail。
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np
import pandas as pd

from hel.lab.base_check import BaseCheck, CheckKind, make_result, skipped_result
from hel.lab.convolution import convolve, convolve_kfold, correlate, digest_of
from hel.lab.energies import (
    autocorrelation, dyadic_buckets, energy, energy_moment, energy_pair, iterated_intersection,
    multiplicative_energy, product_set, t4_affordable, t_energy,
)
from hel.lab.exceptions import CapExceededError, PipelineAbort, PreconditionError
from hel.lab.generators import is_convex
from hel.lab.group_core import FiniteSet, negate_set, require_same, sumset
from hel.lab.spectral import MAX_DIM, build_operator, perron_vector

BSG_CONSTANT = Fraction(1, 16)
GROWTH_PAIRS = ((1, 1), (2, 1), (2, 2))
GROWTH_WORK_CAP = 1 << 22
E3_CAP = 512
E4M_CAP = 256
E4T4_CAP = 128
E4T4_SHIFT_CAP = 512
IDENTITY_WIDTH_CAP = 4096
DECAY_KINDS = ('convex', 'mult-doubling', 'shifted-product')


def _log(x):
    """log x，截断到 ≥ 1"""
    return math.log(max(float(x), math.e))


def _exp(value):
    return math.exp(value) if value < 700 else math.inf


def _plain(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    if isinstance(v, FiniteSet):
        return [v.descriptor.encode(x) for x in v.elements]
    if isinstance(v, np.generic):
        return v.item()
    return v


# ---------------------------------------------------------------- 证明链记录

@dataclass
class TraceRecord:
    """
    按顺序记录的证明步骤

    values 保存中间量（K、Δ、μ_0 等），results 保存每一步的 CheckResult。
    """

    name: str
    digest: str
    values: dict = field(default_factory=dict)
    results: list = field(default_factory=list)

    def value(self, key, v):
        self.values[key] = v
        return v

    def step(self, name, ref, kind, lhs, rhs, relation='le', **detail):
        res = make_result(f'{self.name}.{name}', ref, kind, self.digest, lhs, rhs, relation, **detail)
        self.results.append(res)
        return res

    def skip(self, name, ref, kind, reason):
        res = skipped_result(f'{self.name}.{name}', ref, kind, self.digest, reason)
        self.results.append(res)
        return res

    def extend(self, results):
        self.results.extend(results)

    def checks(self):
        return list(self.results)

    def to_json(self):
        return {
            'name': self.name,
            'input_digest': self.digest,
            'values': {k: _plain(v) for k, v in self.values.items()},
            'steps': [r.to_json() for r in self.results],
        }

    def to_frame(self):
        """每一步一行：step、lhs、rhs、kind、holds"""
        rows = [(r.check_id, _plain(r.lhs), _plain(r.rhs), r.kind.value,
                 None if r.skipped else r.passed) for r in self.results]
        return pd.DataFrame(rows, columns=['step', 'lhs', 'rhs', 'kind', 'holds']).set_index('step')


# ---------------------------------------------------------------- 二进层分解

@dataclass(frozen=True, eq=False)
class LevelDecomposition:
    """
    D_j = {x : 2^{j−2}|A|/K < |A_x| ≤ 2^{j−1}|A|/K}，K 由 E_s(A) = |A|^{s+1}/K^{s−1} 定义

    selected 为质量 Σ_{x∈D_j}|A_x|^s 最大的层（并列取最小的 j），Δ = 2^{j*−1}|A|/K。
    """

    base: FiniteSet
    s: float
    energy_s: object
    K: object
    threshold: object
    buckets: dict
    masses: dict
    selected: int
    delta: object

    @property
    def D(self):
        return self.buckets[self.selected]

    @property
    def l(self):
        return max(self.buckets)

    def checks(self):
        """层大小、抽屉原理与层质量下界；1 < s < 3 时附带 |D| 与 Σ_D|A_x| 的比值"""
        A, s = self.base, self.s
        n = len(A)
        d = digest_of([A, self.D])
        e3 = energy_moment(A, 3)
        sizes = max(len(D) * (Fraction(2) ** (j - 2) * self.threshold) ** 3 for j, D in self.buckets.items())
        total = sum(self.masses.values())
        results = [
            make_result('structure.levels.bucket_bound', 'tmp:28.07.2012_1*: |D_j|(2^{j−2}|A|K^{−1})³ ≤ E_3(A)',
                        CheckKind.EXPLICIT, d, sizes, e3, 'le'),
            make_result('structure.levels.mass', '(s−1)E_s ≪ Σ_j Σ_{x∈D_j}|A_x|^s, here (1−2^{1−s})E_s ≤ Σ_j mass_j',
                        CheckKind.EXPLICIT, d, (1 - 2 ** (1 - s)) * float(self.energy_s), float(total), 'le', s=s),
            make_result('structure.levels.pigeonhole', 'tmp:17.11.2012_D&: Σ_j mass_j ≤ l·mass_{j*}',
                        CheckKind.EXPLICIT, d, total, self.l * self.masses[self.selected], 'le', s=s),
        ]
        if 1 < s < 3:
            M = float(e3) * float(self.K) ** 2 / n ** 4
            L = 2 / (3 - s) * math.log(4 * M / (s - 1))
            r = autocorrelation(A)
            results += [
                make_result('structure.levels.size', 'tmp:17.11.2012_D_and_tilde: |D| ≫ (s−1)|A|K/(L M^{s/(3−s)})',
                            CheckKind.ASYMPTOTIC, d, (s - 1) * n * float(self.K) / (L * M ** (s / (3 - s))),
                            len(self.D), s=s),
                make_result('structure.levels.popularity',
                            "tmp:17.11.2012_D_and_tilde': Σ_{x∈D}(A∘A)(x) ≫ (s−1)|A|²/(L M^{(s−1)/(3−s)})",
                            CheckKind.ASYMPTOTIC, d, (s - 1) * n * n / (L * M ** ((s - 1) / (3 - s))),
                            sum(r(x) for x in self.D.elements), s=s),
            ]
        return results

    def to_json(self):
        return {
            's': self.s,
            'K': _plain(self.K),
            'threshold': _plain(self.threshold),
            'buckets': {str(j): _plain(D) for j, D in sorted(self.buckets.items())},
            'masses': {str(j): _plain(m) for j, m in sorted(self.masses.items())},
            'selected': self.selected,
            'delta': _plain(self.delta),
        }


def level_decompose(A, s=2):
    """
    按 |A_x| 的二进层分解差集并用抽屉原理选层

    参数：
    - A: 非空集合
    - s: 实数 s > 1；s = 2 时全部阈值为精确分数

    返回：
    - LevelDecomposition
    """
    if not len(A):
        raise PreconditionError('层分解需要非空集合')
    if s <= 1:
        raise PreconditionError(f'层分解要求 s > 1，实际 {s}')
    n = len(A)
    es = energy_moment(A, s)
    if s == 2:
        K = Fraction(n ** 3, es)
        threshold = Fraction(es, n * n)
    else:
        K = (n ** (s + 1) / float(es)) ** (1 / (s - 1))
        threshold = n / K
    r = autocorrelation(A)
    levels = dyadic_buckets(r.values, threshold / 2)
    G = A.descriptor
    buckets = {j: FiniteSet(G, tuple(xs)) for j, xs in levels.items()}
    if float(s).is_integer():
        masses = {j: sum(r(x) ** int(s) for x in D.elements) for j, D in buckets.items()}
    else:
        masses = {j: math.fsum(float(r(x)) ** s for x in D.elements) for j, D in buckets.items()}
    selected = max(sorted(masses), key=masses.get)
    return LevelDecomposition(A, s, es, K, threshold, buckets, masses, selected,
                              2 ** (selected - 1) * threshold)


# ---------------------------------------------------------------- BSG 提取

@dataclass(frozen=True, eq=False)
class BSGCertificate:
    """
    BSG 提取的测量结果

    构造保证 |A′| > α|A|/11、|B′| > α|B|/8，且每对 (a,b) ∈ A′×B′ 至少有 α|A′|/16 条好路径；
    |A′+B′| 只测量，与 α^{−5}|A| 比较。
    """

    base_a: FiniteSet
    base_b: FiniteSet
    alpha: Fraction
    measured_alpha: Fraction
    edges: int
    pivot: object
    subset_a: FiniteSet
    subset_b: FiniteSet
    sumset_size: int
    min_paths: int

    @property
    def digest(self):
        return digest_of([self.base_a, self.base_b])

    def checks(self):
        d, a = self.digest, self.alpha
        ref = 't:BSzG'
        return [
            make_result('structure.bsg.size_a', f"{ref}: |A'| ≫ α|A|, constant 1/16", CheckKind.EXPLICIT, d,
                        BSG_CONSTANT * a * len(self.base_a), len(self.subset_a), 'le'),
            make_result('structure.bsg.size_b', f"{ref}: |B'| ≫ α|B|, constant 1/16", CheckKind.EXPLICIT, d,
                        BSG_CONSTANT * a * len(self.base_b), len(self.subset_b), 'le'),
            make_result('structure.bsg.paths', f"{ref}: popular paths a–b'–a''–b per pair ≥ α|A'|/16",
                        CheckKind.EXPLICIT, d, BSG_CONSTANT * a * len(self.subset_a), self.min_paths, 'le'),
            make_result('structure.bsg.sumset', f"{ref}: |A'+B'| ≪ α^{{−5}}|A|", CheckKind.ASYMPTOTIC, d,
                        self.sumset_size, float(a) ** -5 * len(self.base_a)),
        ]

    def to_json(self):
        return {
            'alpha': _plain(self.alpha),
            'measured_alpha': _plain(self.measured_alpha),
            'edges': self.edges,
            'pivot': self.base_b.descriptor.encode(self.pivot),
            'A_prime': _plain(self.subset_a),
            'B_prime': _plain(self.subset_b),
            'sumset_size': self.sumset_size,
            'min_paths': self.min_paths,
        }


def popular_sum_graph(A, B, alpha):
    """
    二部图：a ∈ A 与 b ∈ B 相连当且仅当 (A*B)(a+b) ≥ α|A|/2

    节点记为 ('A', a) 与 ('B', b)，属性 bipartite ∈ {0, 1}。
    """
    G = require_same(A, B)
    r = convolve(A, B)
    tau = alpha * len(A) / 2
    add = G.adder()
    graph = nx.Graph()
    graph.add_nodes_from((('A', a) for a in A.elements), bipartite=0)
    graph.add_nodes_from((('B', b) for b in B.elements), bipartite=1)
    graph.add_edges_from((('A', a), ('B', b)) for a in A.elements for b in B.elements
                         if r(add(a, b)) >= tau)
    return graph


def _biadjacency(graph, rows, cols):
    pos = {b: j for j, b in enumerate(cols)}
    m = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for i, a in enumerate(rows):
        for _, node in graph.edges(('A', a)):
            m[i, pos[node[1]]] = 1
    return m


def bsg_extract(A, B=None, alpha=None):
    """
    构造性 BSG：流行和二部图上的邻域选取

    步骤：去掉度 < α|B|/4 的 a；以公共邻居 < α³|B|/2^{11} 为坏对，
    取使 |N(b)|² − 64α^{−1}·坏对数 最大的 b*；A′ 为 N(b*) 中坏伙伴 ≤ α|N(b*)|/32 的元素，
    B′ 为在 A′ 中至少有 α|A′|/8 个邻居的 b。

    参数：
    - A, B: 同一群中的非空集合，|B| ≤ |A|；B 缺省为 A
    - alpha: 流行参数，缺省为 E(A,B)/|A|³，不得超过该值

    返回：
    - tuple: (A′, B′, BSGCertificate)
    """
    B = A if B is None else B
    require_same(A, B)
    if not len(A) or not len(B):
        raise PreconditionError('BSG 需要非空集合')
    if len(B) > len(A):
        raise PreconditionError(f'BSG 要求 |B| ≤ |A|，实际 |B|={len(B)} > |A|={len(A)}')
    if len(A) > MAX_DIM:
        raise CapExceededError(f'|A| = {len(A)} 超过上限 {MAX_DIM}')
    n = len(A)
    measured = Fraction(energy_pair(A, B), n ** 3)
    if alpha is None:
        alpha = measured
    else:
        alpha = Fraction(alpha).limit_denominator(1 << 30)
        if alpha <= 0 or alpha > measured * (1 + Fraction(1, 10 ** 9)):
            raise PreconditionError(f'α = {float(alpha):.6g} 必须在 (0, E(A,B)/|A|³ = {float(measured):.6g}] 内')
    graph = popular_sum_graph(A, B, alpha)
    edges = graph.number_of_edges()

    keep = [a for a in A.elements if 4 * graph.degree[('A', a)] >= alpha * len(B)]
    m0 = _biadjacency(graph, keep, B.elements)
    codeg = m0 @ m0.T
    bad = (codeg * 2 ** 11 < float(alpha ** 3 * len(B))).astype(np.int64)
    sizes = m0.sum(axis=0)
    bad_counts = np.sum(m0 * (bad @ m0), axis=0)
    score = sizes.astype(float) ** 2 - 64.0 * bad_counts / float(alpha)
    pivot = int(np.argmax(score))

    first = np.flatnonzero(m0[:, pivot])
    partners = bad[np.ix_(first, first)].sum(axis=1)
    chosen = first[partners * 32 <= float(alpha) * len(first)]
    degrees_b = m0[chosen, :].sum(axis=0)
    kept_b = np.flatnonzero(degrees_b * 8 >= float(alpha) * len(chosen))

    G = A.descriptor
    A_prime = FiniteSet(G, tuple(keep[i] for i in chosen))
    B_prime = FiniteSet(G, tuple(B.elements[j] for j in kept_b))
    good = 1 - bad[np.ix_(chosen, chosen)]
    paths = good @ m0[np.ix_(chosen, kept_b)]
    min_paths = int(paths.min()) if paths.size else 0
    cert = BSGCertificate(A, B, alpha, measured, edges, B.elements[pivot], A_prime, B_prime,
                          len(sumset(A_prime, B_prime)), min_paths)
    return A_prime, B_prime, cert


# ---------------------------------------------------------------- 提取证书

def growth_size(A, n, m, cap=GROWTH_WORK_CAP):
    """逐步计算 |nA − mA|；任一步 |当前|·|A| 超过 cap 时抛出 CapExceededError"""
    if n < 1 or m < 0:
        raise PreconditionError('需要 n ≥ 1、m ≥ 0')
    neg = negate_set(A)
    current = A
    for part in [A] * (n - 1) + [neg] * m:
        if len(current) * len(part) > cap:
            raise CapExceededError(f'|{n}A−{m}A| 的计算量超过上限 {cap}')
        current = sumset(current, part)
    return len(current)


def _growth_table(A, cap):
    table = {}
    for n, m in GROWTH_PAIRS:
        try:
            table[(n, m)] = growth_size(A, n, m, cap)
        except CapExceededError:
            table[(n, m)] = None
    return table


@dataclass(frozen=True, eq=False)
class ExtractionCertificate:
    """
    结构流程的输出

    measured 在创建时由 A′ 重新计算：|A′|、E(A′) 与 |nA′−mA′|，(n,m) ∈ {(1,1),(2,1),(2,2)}；
    超过计算上限的增长量记为 None。
    """

    pipeline: str
    base: FiniteSet
    subset: FiniteSet
    s: float
    parameters: dict
    measured: dict
    trace: TraceRecord

    @classmethod
    def issue(cls, pipeline, base, subset, s, parameters, trace, growth_cap=GROWTH_WORK_CAP):
        if not subset.issubset(base):
            raise PipelineAbort("A' 不是 A 的子集", trace)
        measured = {
            'size': len(subset),
            'energy': energy(subset),
            'growth': _growth_table(subset, growth_cap),
        }
        return cls(pipeline, base, subset, s, dict(parameters), measured, trace)

    @property
    def digest(self):
        return self.base.digest

    def checks(self):
        return self.trace.checks()

    def to_json(self):
        return {
            'pipeline': self.pipeline,
            'input_digest': self.digest,
            's': self.s,
            'A_prime': _plain(self.subset),
            'parameters': {k: _plain(v) for k, v in self.parameters.items()},
            'measured': {
                'size': self.measured['size'],
                'energy': self.measured['energy'],
                'growth': {f'{n}-{m}': v for (n, m), v in self.measured['growth'].items()},
            },
            'checks': [r.to_json() for r in self.checks()],
        }


# ---------------------------------------------------------------- 流程

class StructurePipeline(BaseCheck):
    """
    结构流程基类

    子类实现 run(A)，返回 ExtractionCertificate；中间结果退化时抛出带部分记录的 PipelineAbort。
    """

    check_id = 'structure.pipeline'
    ref = 't:E_3_M'
    kind = CheckKind.ASYMPTOTIC

    params = (
        ('cap', E3_CAP),
        ('growth_cap', GROWTH_WORK_CAP),
    )

    def _start(self, A):
        if not len(A):
            raise PreconditionError('结构流程需要非空集合')
        if len(A) > self.p.cap:
            raise CapExceededError(f'|A| = {len(A)} 超过流程上限 {self.p.cap}')
        return TraceRecord(self.check_id, A.digest)

    def _abort(self, trace, message):
        self.log(f'中止: {message}')
        raise PipelineAbort(message, trace)

    @staticmethod
    def best_translate(A, D):
        """x ∈ A − D 中 |A ∩ (D + x)| 最大者（并列取规范序最小的 x）"""
        counts = correlate(D, A)
        x = max(sorted(counts.values), key=lambda y: counts(y))
        return x, counts(x)

    def _growth_steps(self, trace, subset, D, cap):
        """|nA′−mA′| ≤ |nD′−mD′|：A′ − x ⊆ D′"""
        for n, m in GROWTH_PAIRS:
            name = f'growth_contained.{n}-{m}'
            ref = f'tmp:31.07.2012_2\'\'\': |{n}A\'−{m}A\'| ≤ |{n}D\'−{m}D\'|'
            try:
                trace.step(name, ref, CheckKind.EXPLICIT, growth_size(subset, n, m, cap),
                           growth_size(D, n, m, cap), 'le')
            except CapExceededError as exc:
                trace.skip(name, ref, CheckKind.EXPLICIT, f'cap: {exc}')


class _LevelPipeline(StructurePipeline):
    """层分解 → D = D_{j*} → BSG(D, D) → 平移求交"""

    params = (
        ('s', 2),
    )

    def _parameters(self, A, levels):
        """返回 (K, M) 与流程的参考标签"""
        raise NotImplementedError

    def _size_log(self, M, s):
        raise NotImplementedError

    def _growth_log(self, M, s):
        raise NotImplementedError

    def run(self, A):
        trace = self._start(A)
        s = self.p.s
        n = len(A)
        levels = level_decompose(A, s)
        trace.extend(levels.checks())
        K, M = self._parameters(A, levels)
        trace.value('K', K)
        trace.value('M', M)
        trace.value('j', levels.selected)
        trace.value('Delta', levels.delta)
        D = levels.D
        mu = Fraction(energy(D), len(D) ** 3)
        trace.value('mu', mu)
        self.log(f'K={float(K):.4g} M={float(M):.4g} j*={levels.selected} |D|={len(D)} μ={float(mu):.4g}')

        D_prime, _, bsg = bsg_extract(D, D)
        trace.extend(bsg.checks())
        trace.value('D_prime', D_prime)
        if len(D_prime) < 2:
            self._abort(trace, f"D' 退化为 {len(D_prime)} 个元素")

        x, hits = self.best_translate(A, D_prime)
        subset = A.intersection(D_prime.translate(x))
        trace.value('x', A.descriptor.encode(x))
        width = len(sumset(A, D_prime, 1, -1))
        trace.step('translate', "tmp:31.07.2012_2: max_x |(A−x)∩D'| ≥ |A||D'|/|A−D'|", CheckKind.EXPLICIT,
                   Fraction(n * len(D_prime), width), hits, 'le')
        trace.step('translate_rate', "tmp:31.07.2012_2: |(A−x)∩D'| ≫ μ|A|L^{−1}M^{−1}", CheckKind.ASYMPTOTIC,
                   float(mu) * n / (_log(M) * float(M)), hits)
        self._growth_steps(trace, subset, D_prime, self.p.growth_cap)

        cert = ExtractionCertificate.issue(self.check_id, A, subset, s,
                                           {'K': K, 'M': M, 'j': levels.selected, 'Delta': levels.delta,
                                            'mu': mu, 'x': A.descriptor.encode(x), 'alpha': bsg.alpha},
                                           trace, self.p.growth_cap)
        size_ref, growth_ref = self.refs
        trace.step('size', size_ref, CheckKind.ASYMPTOTIC, _exp(self._size_log(M, s)) * n, len(subset), s=s)
        for (gn, gm), value in cert.measured['growth'].items():
            name = f'doubling.{gn}-{gm}'
            if value is None:
                trace.skip(name, growth_ref, CheckKind.ASYMPTOTIC, 'cap: 和集计算量超过上限')
                continue
            bound = _exp(6 * (gn + gm) * self._growth_log(M, s)) * float(K) * len(subset)
            trace.step(name, growth_ref, CheckKind.ASYMPTOTIC, value, bound, s=s)
        self.log(f"|A'|={len(subset)} 增长={cert.measured['growth']}")
        return cert


class E3Pipeline(_LevelPipeline):
    """E(A) = |A|³/K、E_3(A) = M|A|⁴/K² 时的结构提取，s ∈ (1, 3)"""

    check_id = 'structure.e3'
    ref = 't:E_3_M'

    params = (
        ('cap', E3_CAP),
    )

    def _parameters(self, A, levels):
        s = self.p.s
        if not 1 < s < 3:
            raise PreconditionError(f'E_3 流程要求 s ∈ (1,3)，实际 {s}')
        n = len(A)
        K = levels.K
        M = Fraction(energy_moment(A, 3)) * K ** 2 / n ** 4 if s == 2 else \
            energy_moment(A, 3) * K ** 2 / n ** 4
        if s == 2:
            self.refs = ("f:E_3_size: |A'| ≫ M^{−10}log^{−15}M·|A|",
                         "f:E_3_doubling: |nA'−mA'| ≪ (M⁹log¹⁴M)^{6(n+m)}K|A'|")
        elif s <= 1.5:
            self.refs = ("f:E_3_size_s: |A'| ≫ M^{−(14−4s)/(3−s)}(s−1)²¹log^{−21}(M/(s−1))·|A|",
                         "f:E_3_doubling_s: |nA'−mA'| ≪ (M⁵(s−1)^{−20}log²⁰(M/(s−1)))^{6(n+m)}K|A'|")
        else:
            self.refs = ("f:E_3_size_ss: |A'| ≫ M^{−(44−24s)/(3−s)}(3−s)²¹log^{−21}M·|A|",
                         "f:E_3_doubling_ss: |nA'−mA'| ≪ (M^{(45−25s)/(3−s)}(3−s)^{−20}log²⁰M)^{6(n+m)}K|A'|")
        return K, M

    def _size_log(self, M, s):
        lm = math.log(float(M))
        if s == 2:
            return -10 * lm - 15 * math.log(_log(M))
        if s <= 1.5:
            return (-(14 - 4 * s) / (3 - s) * lm + 21 * math.log(s - 1)
                    - 21 * math.log(_log(float(M) / (s - 1))))
        return -(44 - 24 * s) / (3 - s) * lm + 21 * math.log(3 - s) - 21 * math.log(_log(M))

    def _growth_log(self, M, s):
        lm = math.log(float(M))
        if s == 2:
            return 9 * lm + 14 * math.log(_log(M))
        if s <= 1.5:
            return 5 * lm - 20 * math.log(s - 1) + 20 * math.log(_log(float(M) / (s - 1)))
        return (45 - 25 * s) / (3 - s) * lm - 20 * math.log(3 - s) + 20 * math.log(_log(M))


class E4MPipeline(_LevelPipeline):
    """E_s(A) = |A|^{s+1}/K^{s−1}、E_4(A) = M|A|⁵/K³ 时的结构提取，s ∈ (1, 4)"""

    check_id = 'structure.e4m'
    ref = 't:E_4_M'

    params = (
        ('cap', E4M_CAP),
    )

    def _parameters(self, A, levels):
        s = self.p.s
        if not 1 < s < 4:
            raise PreconditionError(f'E_4 流程要求 s ∈ (1,4)，实际 {s}')
        n = len(A)
        K = levels.K
        e4 = energy_moment(A, 4)
        M = Fraction(e4) * K ** 3 / n ** 5 if isinstance(K, Fraction) else e4 * K ** 3 / n ** 5
        if s >= 1.6:
            self.refs = ("f:E_4_size: |A'| ≫ M^{−(5s−5)/(4−s)}(4−s)⁶log^{−6}M·|A|",
                         "f:E_4_doubling: |nA'−mA'| ≪ (M^{(4s−4)/(4−s)}(4−s)^{−5}log⁵M)^{6(n+m)}K|A'|")
        else:
            self.refs = ("f:E_4_size_small: |A'| ≫ M^{−3/(4−s)}(s−1)⁶log^{−6}(M/(s−1))·|A|",
                         "f:E_4_doubling_small: |nA'−mA'| ≪ (M(s−1)^{−5}log⁵(M/(s−1)))^{6(n+m)}K|A'|")
        return K, M

    def _size_log(self, M, s):
        lm = math.log(float(M))
        if s >= 1.6:
            return -(5 * s - 5) / (4 - s) * lm + 6 * math.log(4 - s) - 6 * math.log(_log(M))
        return -3 / (4 - s) * lm + 6 * math.log(s - 1) - 6 * math.log(_log(float(M) / (s - 1)))

    def _growth_log(self, M, s):
        lm = math.log(float(M))
        if s >= 1.6:
            return (4 * s - 4) / (4 - s) * lm - 5 * math.log(4 - s) + 5 * math.log(_log(M))
        return lm - 5 * math.log(s - 1) + 5 * math.log(_log(float(M) / (s - 1)))


def _difference_labels(A):
    """A − A 的编号表：table[i, j] 为 a_i − a_j 的编号"""
    sub = A.descriptor.subtractor()
    labels = {}
    table = np.zeros((len(A), len(A)), dtype=np.int64)
    for i, x in enumerate(A.elements):
        for j, y in enumerate(A.elements):
            table[i, j] = labels.setdefault(sub(x, y), len(labels))
    return table, labels


def _iter_autocorrelation_rows(A, table, width, shifts):
    """逐个偏移 s 生成 A_s∘A_s，按差集编号展开"""
    members = A.members
    add = A.descriptor.adder()
    flat = table.ravel()
    for s in shifts:
        mask = np.array([1.0 if add(a, s) in members else 0.0 for a in A.elements])
        yield np.bincount(flat, weights=np.outer(mask, mask).ravel(), minlength=width)


def _autocorrelation_rows(A, table, width, shifts):
    rows = np.zeros((len(shifts), width), dtype=float)
    for k, row in enumerate(_iter_autocorrelation_rows(A, table, width, shifts)):
        rows[k] = row
    return rows


class E4T4Pipeline(StructurePipeline):
    """
    E_{3/2}(A) = |A|^{5/2}/K^{1/2}、T_4(A) = M|A|⁷/K³ 时的结构提取

    偏移对 (s, t) 取遍 |A_s|, |A_t| ≥ 2^{−2}μ|A|，E_4 = μ|A|⁵；
    ν = max E(A_s,A_t)/(|A_s|^{3/2}|A_t|^{3/2})，A′ 为 {A_s, A_t} 中 E(·)/|·|³ 较大者。
    """

    check_id = 'structure.e4t4'
    ref = 't:E_4_T_4'

    params = (
        ('cap', E4T4_CAP),
        ('shift_cap', E4T4_SHIFT_CAP),
    )

    def run(self, A):
        trace = self._start(A)
        n = len(A)
        e4 = energy_moment(A, 4)
        e32 = energy_moment(A, 1.5)
        mu = Fraction(e4, n ** 5)
        K = n ** 5 / e32 ** 2
        M = Fraction(t_energy(A, 4)) * Fraction(K) ** 3 / n ** 7 if t4_affordable(A) else None
        trace.value('mu', mu)
        trace.value('K', K)
        trace.value('M', M)

        r = autocorrelation(A)
        shifts = [x for x in sorted(r.values) if 4 * r(x) >= mu * n]
        if len(shifts) > self.p.shift_cap:
            raise CapExceededError(f'合格偏移 {len(shifts)} 个，超过上限 {self.p.shift_cap}')
        table, labels = _difference_labels(A)
        rows = _autocorrelation_rows(A, table, len(labels), shifts)
        pair = rows @ rows.T
        sizes = np.array([float(r(x)) for x in shifts])
        nu_table = pair / np.outer(sizes, sizes) ** 1.5
        i, j = np.unravel_index(int(np.argmax(nu_table)), nu_table.shape)
        nu = float(nu_table[i, j])
        trace.value('nu', nu)
        trace.value('shifts', len(shifts))
        self.log(f'μ={float(mu):.4g} K={K:.4g} 合格偏移 {len(shifts)} 个 ν={nu:.4g}')

        restricted = int(round(float(pair.sum())))
        trace.step('restricted_mass', 'tmp:26.11.2012_1: Σ_{|A_s|,|A_t| ≥ μ|A|/4} E(A_s,A_t) ≥ 2^{−1}E_4',
                   CheckKind.EXPLICIT, Fraction(e4, 2), restricted, 'le')
        trace.step('nu', '2^{−1}E_4 ≤ ν·E_{3/2}(A)²', CheckKind.EXPLICIT, e4 / 2, nu * e32 ** 2, 'le')
        if len(labels) <= IDENTITY_WIDTH_CAP:
            total = sum(_iter_autocorrelation_rows(A, table, len(labels), list(labels)))
            trace.step('identity', 'l:E_k-identity: Σ_{s,t} E(A_s,A_t) = E_4(A)', CheckKind.EXACT,
                       int(round(float(np.sum(total ** 2)))), e4, 'eq')
        else:
            trace.skip('identity', 'l:E_k-identity: Σ_{s,t} E(A_s,A_t) = E_4(A)', CheckKind.EXACT,
                       f'cap: |A−A| = {len(labels)} > {IDENTITY_WIDTH_CAP}')

        candidates = [(pair[k, k] / sizes[k] ** 3, -k) for k in (i, j)]
        best = -max(candidates)[1]
        subset = iterated_intersection(A, (shifts[best],))
        trace.value('s', A.descriptor.encode(shifts[i]))
        trace.value('t', A.descriptor.encode(shifts[j]))
        cert = ExtractionCertificate.issue(self.check_id, A, subset, 1.5,
                                           {'mu': mu, 'K': K, 'M': M, 'nu': nu,
                                            's': A.descriptor.encode(shifts[i]),
                                            't': A.descriptor.encode(shifts[j])},
                                           trace, self.p.growth_cap)
        size, e_sub = cert.measured['size'], cert.measured['energy']
        trace.step('subset_energy', "Cauchy–Schwarz: E(A')/|A'|³ ≥ ν", CheckKind.EXPLICIT,
                   nu, e_sub / size ** 3, 'le')
        trace.step('subset_size', "|A'| ≥ 2^{−2}μ|A|", CheckKind.EXPLICIT, mu * n / 4, size, 'le')
        if M is None:
            reason = 'cap: T_4 计算量超过上限'
            trace.skip('size', "f:E_4_size: |A'| ≫ |A|/(MK)", CheckKind.ASYMPTOTIC, reason)
            trace.skip('energy', "f:E_4_energy: E(A') ≫ |A'|³/M", CheckKind.ASYMPTOTIC, reason)
        else:
            trace.step('size', "f:E_4_size: |A'| ≫ |A|/(MK)", CheckKind.ASYMPTOTIC,
                       n / (float(M) * K), size)
            trace.step('energy', "f:E_4_energy: E(A') ≫ |A'|³/M", CheckKind.ASYMPTOTIC,
                       size ** 3 / float(M), e_sub)
        self.log(f"|A'|={size} E(A')={e_sub}")
        return cert


def pipeline_E3(A, s=2, printlog=False):
    return E3Pipeline(s=s, printlog=printlog).run(A)


def pipeline_E4M(A, s=2, printlog=False):
    return E4MPipeline(s=s, printlog=printlog).run(A)


def pipeline_E4T4(A, printlog=False):
    return E4T4Pipeline(printlog=printlog).run(A)


# ---------------------------------------------------------------- 凸集能量证明链

class ConvexTrace(StructurePipeline):
    """
    逐步计算凸集能量证明中的全部中间量

    A 不必是凸集；只有凸集才附加依赖凸性的比值。
    σ* 按本实现的理解取 i 选定的受限和 Σ_{α,β∈D, α−β∈S_i} (A∘A)(α)(A∘A)²(α−β)。
    """

    check_id = 'structure.convex'
    ref = 't:convex_energy'

    params = (
        ('cap', MAX_DIM),
    )

    def run(self, A):
        trace = self._start(A)
        n = len(A)
        e = energy(A)
        e3 = energy_moment(A, 3)
        K = Fraction(n ** 3, e)
        L = _log(n)
        convex = is_convex(A)
        for key, v in (('K', K), ('E', e), ('E_3', e3), ('L', L), ('convex', convex)):
            trace.value(key, v)

        levels = level_decompose(A, 2)
        D, delta, l = levels.D, levels.delta, levels.l
        mass = levels.masses[levels.selected]
        trace.value('l', l)
        trace.value('j', levels.selected)
        trace.value('Delta', delta)
        trace.value('|D|', len(D))
        trace.step('quarter_energy', 'tmp:17.11.2012_1: 2^{−2}E ≤ Σ_{|A_s| > |A|/(2K)} |A_s|²',
                   CheckKind.EXPLICIT, Fraction(e, 4), sum(levels.masses.values()))
        trace.step('pigeonhole', 'tmp:17.11.2012_D_pred: 2^{−2}l^{−1}E ≤ Σ_{s∈D}|A_s|²',
                   CheckKind.EXPLICIT, Fraction(e, 4 * l), mass)
        trace.step('bucket_cap', 'tmp:17.11.2012_D_pred: Σ_{s∈D}|A_s|² ≤ |D|Δ²',
                   CheckKind.EXPLICIT, mass, len(D) * delta ** 2)

        r = autocorrelation(A)
        g = r.restrict(D)
        T1 = build_operator('sym-diff', A, g=g)
        T3 = build_operator('sym-diff', A, g=r)
        mu0, f0 = perron_vector(T1.matrix)
        trace.value('mu_0', mu0)
        trace.step('mu_lower', 'tmp:17.11.2012_D: E/(4l|A|) ≤ μ_0(T_1)', CheckKind.EXPLICIT,
                   e / (4 * l * n), mu0)
        trace.step('main_form', "tmp:17.11.2012_D': μ_0(T_1) ≤ ⟨T_3f_0, f_0⟩", CheckKind.EXPLICIT,
                   mu0, float(f0 @ T3.matrix @ f0))

        m1, m3 = T1.matrix, T3.matrix
        gram = m1 @ m1
        trace.step('triangles', 'tmp:17.11.2012_2: μ_0³(T_1) ≤ Σ g(α)g(β)(A∘A)(α−β)C_3(A)(α,β)',
                   CheckKind.EXPLICIT, mu0 ** 3, float(np.sum(gram * m3)))
        d = e * e / (32 * L * L * n ** 3 * math.sqrt(e3))
        trace.value('d', d)
        trunc = float(np.sum(gram * m3 * (m3 > d)))
        trace.step('truncation', 'tmp:17.11.2012_2: 2^{−1}μ_0³ ≤ Σ over (A∘A)(α−β) > d',
                   CheckKind.ASYMPTOTIC, mu0 ** 3 / 2, trunc)

        if len(D) > self.p.cap:
            reason = f'cap: |D| = {len(D)} > {self.p.cap}'
            for name in ('sigma_chain', 'sigma_levels', 'sigma_star_energy'):
                trace.skip(name, 'proof of t:convex_energy: σ, σ*', CheckKind.EXPLICIT, reason)
            return trace
        self._sigma_steps(trace, A, D, delta, d, mu0, L, convex)
        return trace

    def _sigma_steps(self, trace, A, D, delta, d, mu0, L, convex):
        n = len(A)
        r = autocorrelation(A)
        sub = A.descriptor.subtractor()
        diff = np.array([[r(sub(a, b)) for b in D.elements] for a in D.elements], dtype=float)
        weight = np.array([float(r(a)) for a in D.elements])
        terms = weight[:, None] * diff ** 2 * (diff > d)
        sigma = float(terms.sum())
        trace.value('sigma', sigma)
        trace.step('sigma_chain', 'tmp:17.11.2012_5: μ_0⁶(T_1) ≪ |A|³LΔ³σ', CheckKind.ASYMPTOTIC,
                   mu0 ** 6, n ** 3 * L * float(delta) ** 3 * sigma)

        level_table = {x: i for i, xs in dyadic_buckets(r.values, d).items() for x in xs}
        index = np.array([[level_table.get(sub(a, b), 0) for b in D.elements] for a in D.elements])
        per_level = {i: float(terms[index == i].sum()) for i in sorted(set(level_table.values()))}
        i_star = max(sorted(per_level), key=per_level.get)
        sigma_star = per_level[i_star]
        tau = 2 ** i_star * d
        trace.value('i', i_star)
        trace.value('tau', tau)
        trace.value('sigma_star', sigma_star)
        trace.value('sigma_star_reading', 'i-selected restricted sum over α−β ∈ S_i')
        trace.step('sigma_levels', 'tmp:17.11.2012_4: σ ≤ #levels·σ*', CheckKind.EXPLICIT,
                   sigma, len(per_level) * sigma_star)
        e_da = energy_pair(D, A)
        trace.step('sigma_star_energy', 'tmp:17.11.2012_3: σ* ≤ Δτ E(D,A)', CheckKind.EXPLICIT,
                   sigma_star, float(delta) * tau * e_da)
        if not convex:
            return
        size = len(D)
        trace.step('convex.sigma_star', 'tmp:17.11.2012_3: σ* ≪ Δτ|A||D|^{3/2}', CheckKind.ASYMPTOTIC,
                   sigma_star, float(delta) * tau * n * size ** 1.5)
        trace.step('convex.sigma_star_tau', "tmp:17.11.2012_3': σ* ≪ τ^{−1/4}|A|^{13/4}|D|^{3/4}",
                   CheckKind.ASYMPTOTIC, sigma_star, tau ** -0.25 * n ** 3.25 * size ** 0.75)
        trace.step('convex.sigma_star_opt', 'tmp:20.11.2012_2: σ* ≪ Δ^{1/5}|A|^{14/5}|D|^{9/10}',
                   CheckKind.ASYMPTOTIC, sigma_star, float(delta) ** 0.2 * n ** 2.8 * size ** 0.9)
        levels = dyadic_buckets(r.values, d)
        worst = max(len(xs) * (2 ** i * d) ** 3 for i, xs in levels.items())
        trace.step('convex.level_sizes', 'tmp:20.11.2012_1: |S_i| ≪ |A|³/(2^i d)³', CheckKind.ASYMPTOTIC,
                   worst, n ** 3)
        trace.step('convex.e3', 'l:E_3_convex: E_3(A) ≪ |A|³log|A|', CheckKind.ASYMPTOTIC,
                   trace.values['E_3'], n ** 3 * _log(n))
        trace.step('convex.energy', 'f:convex_energy: E(A) ≪ |A|^{32/13}log^{71/65}|A|', CheckKind.ASYMPTOTIC,
                   trace.values['E'], n ** (32 / 13) * _log(n) ** (71 / 65))


def convex_pipeline_trace(A, printlog=False):
    return ConvexTrace(printlog=printlog).run(A)


# ---------------------------------------------------------------- 衰减剖面

def _fit_decay(values, scale):
    """max_j v_j j^{1/3}/scale，v 降序"""
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    j = np.arange(1, v.size + 1, dtype=float)
    return float(np.max(v * np.cbrt(j))) / scale


def decay_profile_check(A, kind='convex', k=2):
    """
    卷积值排序后的衰减常数拟合

    参数：
    - A: Z 中的集合（mult-doubling 也接受 Z/N）
    - kind: 'convex'（l:E_3_convex，(A*_{k−1}A)(x_j) ≪ |A|^{k−4(1−2^{−k})/3}j^{−1/3}）、
      'mult-doubling'（l:arranging_gen）或 'shifted-product'（l:arranging_product）
    - k: convex 情形的卷积次数

    返回：
    - CheckResult（asymptotic），lhs 为拟合常数
    """
    if kind not in DECAY_KINDS:
        raise PreconditionError(f'未知的衰减类型: {kind}')
    if len(A) < 2:
        raise PreconditionError('衰减剖面需要至少两个元素')
    n = len(A)
    if kind == 'convex':
        if not is_convex(A):
            raise PreconditionError('convex 剖面要求 A 是凸集')
        exponent = k - 4 / 3 * (1 - 2 ** -k)
        values = list(convolve_kfold(A, k).values.values())
        C = _fit_decay(values, n ** exponent)
        implied = C ** 3 * n ** (3 * exponent) * (1 + math.log(len(values)))
        return make_result('structure.decay.convex', 'l:E_3_convex: (A*_{k−1}A)(x_j) ≪ |A|^{k−4(1−2^{−k})/3}j^{−1/3}',
                           CheckKind.ASYMPTOTIC, A.digest, C, 1, k=k, implied_e3=implied,
                           e3=energy_moment(A, 3), e3_bound=n ** 3 * _log(n))
    if A.descriptor.kind not in ('Z', 'ZmodN') or any(a == 0 for a in A.elements):
        raise PreconditionError('乘法剖面要求 Z 或 Z/N 中不含 0 的集合')
    if kind == 'mult-doubling':
        M = len(product_set(A, A)) / n
        C = _fit_decay(list(autocorrelation(A).values.values()), (M * _log(M)) ** (2 / 3) * n)
        return make_result('structure.decay.mult_doubling',
                           'l:arranging_gen: (A∘A)(x_j) ≪ (M log M)^{2/3}|A|j^{−1/3}, |AA| = M|A|',
                           CheckKind.ASYMPTOTIC, A.digest, C, 1, M=M,
                           energy=energy(A), energy_bound=M * _log(M) * n ** 2.5)
    if A.descriptor.kind != 'Z':
        raise PreconditionError('shifted-product 剖面只支持 Z')
    shifted = len(product_set(A, A.translate(1)))
    reps = Counter(a * b for a in A.elements for b in A.elements)
    C = _fit_decay(list(reps.values()), (shifted ** 2 * n) ** (1 / 3))
    return make_result('structure.decay.shifted_product',
                       'l:arranging_product: #{s : |A∩sA^{−1}| ≥ τ} ≪ |A(A+1)|²|A|/τ³',
                       CheckKind.ASYMPTOTIC, A.digest, C, 1, shifted=shifted)


# ---------------------------------------------------------------- 能量结论的比值

_CONVEX_SHAPE = 'n^{32/13}log^{71/65}n'


def _energy_shape(n):
    return n ** (32 / 13) * _log(n) ** (71 / 65)


def convex_energy_ratios(A):
    """凸集：E_3(A)/(|A|³log|A|) 与 E(A)/(|A|^{32/13}log^{71/65}|A|)"""
    if not is_convex(A):
        raise PreconditionError('要求 A 是凸集')
    n = len(A)
    return [
        make_result('structure.convex_e3', 'l:E_3_convex: E_3(A) ≪ |A|³log|A|', CheckKind.ASYMPTOTIC,
                    A.digest, energy_moment(A, 3), n ** 3 * _log(n)),
        make_result('structure.convex_energy', f'f:convex_energy: E(A) ≪ {_CONVEX_SHAPE}', CheckKind.ASYMPTOTIC,
                    A.digest, energy(A), _energy_shape(n)),
    ]


def _require_multiplicative(A):
    if A.descriptor.kind != 'Z' or any(a == 0 for a in A.elements):
        raise PreconditionError('要求 Z 中不含 0 的集合')


def energy_gen_check(A):
    """|AA| = M|A| 时 E(A) ≪ (M log M)^{14/13}|A|^{32/13}log^{71/65}|A|"""
    _require_multiplicative(A)
    n = len(A)
    M = len(product_set(A, A)) / n
    return make_result('structure.energy_gen', f't:energy_gen, f:energy_gen: E(A) ≪ (M log M)^{{14/13}}{_CONVEX_SHAPE}',
                       CheckKind.ASYMPTOTIC, A.digest, energy(A),
                       (M * _log(M)) ** (14 / 13) * _energy_shape(n), M=M)


def shifted_energy_check(A):
    """|A(A+1)| = M|A| 时 E^×(A) ≪ M^{14/13}|A|^{32/13}log^{71/65}|A|"""
    _require_multiplicative(A)
    if any(a == -1 for a in A.elements):
        raise PreconditionError('A + 1 不能含 0')
    n = len(A)
    M = len(product_set(A, A.translate(1))) / n
    return make_result('structure.shifted_energy', f'f:E^m_A(A+1): E^×(A) ≪ M^{{14/13}}{_CONVEX_SHAPE}',
                       CheckKind.ASYMPTOTIC, A.digest, multiplicative_energy(A),
                       M ** (14 / 13) * _energy_shape(n), M=M)
