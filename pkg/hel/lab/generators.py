"""
样例集合生成器

为每一类示例集合提供确定性的生成函数，并在生成后验证其宣称的结构性质：
- 凸集（平方数、幂次、随机递增间隔）
- Z/p 中的乘法子群
- 子空间 H 与分离集 Λ 的并 / 直和
- 完全不交子空间的并 ⊔H_j
- 算术级数、几何级数、子群、随机集合

FamilySpec 的字符串形式为 'family:key=value,...'，相同字符串总得到相同集合。
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from hel.lab.exceptions import GeneratorError
from hel.lab.group_core import FiniteSet, GroupDescriptor, sumset

PRIME_LIMIT = 10 ** 6
DISSOCIATED_LIMIT = 20
CONVEX_KINDS = ('squares', 'power', 'random-gaps')
RANDOM_Z_SPAN = 4

FAMILY_TAGS = {
    'convex': ('convex',),
    'multiplicative-subgroup': ('multiplicative-subgroup',),
    'H-plus-dissociated': ('H-plus-dissociated',),
    'disjoint-subgroup-union': ('disjoint-subgroup-union',),
    'arithmetic-progression': ('arithmetic-progression',),
    'geometric': ('small-multiplicative-doubling',),
    'subgroup': ('subgroup',),
    'random': ('random',),
}


# ---------------------------------------------------------------- 族描述

def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


@dataclass(frozen=True)
class FamilySpec:
    """
    族描述：family 标签、参数与种子

    参数按键名排序保存，因此同一族的不同写法给出同一个描述。
    """

    family: str
    params: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILY_TAGS:
            raise GeneratorError(f'未知的集合族: {self.family}')
        object.__setattr__(self, 'params', tuple(sorted(dict(self.params).items())))

    @classmethod
    def parse(cls, text):
        """
        解析 'family:key=value,...'

        参数：
        - text: 族描述字符串，seed 作为普通键出现

        返回：
        - FamilySpec
        """
        family, _, rest = str(text).partition(':')
        params = {}
        for item in filter(None, (p.strip() for p in rest.split(','))):
            key, sep, value = item.partition('=')
            if not sep:
                raise GeneratorError(f'参数缺少取值: {item}')
            params[key.strip()] = _parse_value(value.strip())
        seed = params.pop('seed', 0)
        return cls(family.strip(), tuple(params.items()), int(seed))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    def __str__(self):
        items = [f'{k}={v}' for k, v in self.params]
        if self.seed:
            items.append(f'seed={self.seed}')
        return f'{self.family}:{",".join(items)}'


@dataclass(frozen=True, eq=False)
class GeneratedSet:
    """生成结果：集合、标签与组成部分（H、Λ、H_j 等）"""

    spec: FamilySpec
    set: FiniteSet
    tags: frozenset
    components: dict = field(default_factory=dict)

    @property
    def digest(self):
        return self.set.digest


# ---------------------------------------------------------------- 凸集

def is_convex(A):
    """Z 中的集合是否具有严格递增的相邻间隔"""
    if A.descriptor.kind != 'Z':
        return False
    gaps = np.diff(np.array(A.elements, dtype=np.int64))
    return bool(np.all(np.diff(gaps) > 0))


def gen_convex(kind='squares', n=32, seed=0, alpha=2.0, spread=4):
    """
    生成凸集

    参数：
    - kind: 'squares'（i²）、'power'（⌊i^α⌋）或 'random-gaps'（间隔随机递增）
    - n: 元素个数，n ≥ 3
    - seed: 随机种子（random-gaps 使用）
    - alpha: power 的指数
    - spread: random-gaps 每步额外增量的上界

    返回：
    - FiniteSet in Z
    """
    if n < 3:
        raise GeneratorError(f'凸集至少需要 3 个元素，实际 {n}')
    if kind not in CONVEX_KINDS:
        raise GeneratorError(f'未知的凸集类型: {kind}')
    Z = GroupDescriptor.integers()
    if kind == 'squares':
        values = [i * i for i in range(1, n + 1)]
    elif kind == 'power':
        if alpha <= 1:
            raise GeneratorError(f'α = {alpha} 时间隔不严格递增')
        # 二阶差分 ≥ scale·α(α−1)·min(1, n^{α−2}) ≥ 4，取整后仍严格凸
        curvature = alpha * (alpha - 1) * min(1.0, n ** (alpha - 2))
        scale = max(1, math.ceil(4 / curvature))
        values = [math.floor(scale * i ** alpha) for i in range(1, n + 1)]
    else:
        rng = np.random.default_rng(seed)
        steps = 1 + rng.integers(0, spread, size=n - 1)
        gaps = np.cumsum(steps)
        values = np.concatenate([[0], np.cumsum(gaps)]).tolist()
    A = FiniteSet(Z, tuple(values))
    if len(A) != n or not is_convex(A):
        raise GeneratorError(f'{kind} 生成的序列不是严格凸的')
    return A


def gen_ap(n, start=0, step=1):
    """算术级数 {start + i·step}"""
    if n < 1 or step == 0:
        raise GeneratorError('算术级数需要 n ≥ 1 且公差非零')
    return FiniteSet(GroupDescriptor.integers(), tuple(start + i * step for i in range(n)))


def gen_geometric(n, ratio=2):
    """几何级数 {ratio^i}，|AA| = 2n − 1"""
    if n < 1 or abs(ratio) < 2:
        raise GeneratorError('几何级数需要 n ≥ 1 且 |ratio| ≥ 2')
    return FiniteSet(GroupDescriptor.integers(), tuple(ratio ** i for i in range(n)))


# ---------------------------------------------------------------- 乘法子群

def _is_prime(p):
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % q for q in range(3, math.isqrt(p) + 1, 2))


def _prime_factors(m):
    factors, q = [], 2
    while q * q <= m:
        if m % q == 0:
            factors.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1:
        factors.append(m)
    return factors


def primitive_root(p):
    """试除分解 p−1 后取最小的原根"""
    if not _is_prime(p):
        raise GeneratorError(f'{p} 不是素数')
    if p == 2:
        return 1
    factors = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise GeneratorError(f'没有找到模 {p} 的原根')


def gen_mult_subgroup(p, d):
    """
    Z/p 中指数为 d 的乘法子群

    参数：
    - p: 素数，p ≤ 10⁶
    - d: p − 1 的因子

    返回：
    - tuple: (FiniteSet in Z/p, 生成元 g^d)
    """
    if not _is_prime(p):
        raise GeneratorError(f'{p} 不是素数')
    if p > PRIME_LIMIT:
        raise GeneratorError(f'p = {p} 超过上限 {PRIME_LIMIT}')
    if d < 1 or (p - 1) % d:
        raise GeneratorError(f'{d} 不整除 p − 1 = {p - 1}')
    h = pow(primitive_root(p), d, p)
    size = (p - 1) // d
    values = [pow(h, i, p) for i in range(size)]
    G = FiniteSet(GroupDescriptor.cyclic(p), tuple(values))
    members = G.members
    if len(G) != size or any(a * b % p not in members for a in values for b in values):
        raise GeneratorError('生成的集合不是乘法子群')
    return G, h


# ---------------------------------------------------------------- F_2^n 族

def _rank_f2(vectors):
    """F_2 上的秩（位向量整数表示）"""
    pivots = {}
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
    return len(pivots)


def _span(basis):
    out = [0]
    for v in basis:
        out += [x ^ v for x in out]
    return out


def is_dissociated(vectors):
    """
    穷举判定：不存在非空子集异或为 0

    参数：
    - vectors: 位向量列表，长度不超过 20
    """
    vectors = list(vectors)
    if len(vectors) > DISSOCIATED_LIMIT:
        raise GeneratorError(f'分离性穷举只支持 |Λ| ≤ {DISSOCIATED_LIMIT}')
    if len(set(vectors)) != len(vectors):
        return False
    for r in range(1, len(vectors) + 1):
        for combo in itertools.combinations(vectors, r):
            acc = 0
            for v in combo:
                acc ^= v
            if acc == 0:
                return False
    return True


def gen_subgroup(dim, n=None):
    """F_2^n 中由前 dim 个坐标张成的子空间"""
    n = dim if n is None else n
    if dim < 0 or dim > n:
        raise GeneratorError(f'子空间维数 {dim} 超出 F_2^{n}')
    return FiniteSet(GroupDescriptor.cube(n), tuple(range(1 << dim)))


def gen_cyclic_subgroup(modulus, order):
    """Z/N 中阶为 order 的子群 (N/order)·Z/N"""
    if order < 1 or modulus % order:
        raise GeneratorError(f'{order} 不整除 {modulus}')
    step = modulus // order
    return FiniteSet(GroupDescriptor.cyclic(modulus), tuple(range(0, modulus, step)))


def gen_H_plus_dissociated(n, hdim, lam=0, mode='direct-sum', vectors=None):
    """
    H 与分离集 Λ 的并或直和

    参数：
    - n: 空间维数
    - hdim: H 的维数（H 由前 hdim 个坐标张成）
    - lam: Λ 的大小，默认取 H 之外的标准基向量
    - mode: 'disjoint-union'（H ⊔ Λ）或 'direct-sum'（H ∔ Λ）
    - vectors: 自定义 Λ（位向量），需通过穷举分离性检查

    返回：
    - tuple: (FiniteSet in F_2^n, {'H': H, 'Lambda': Λ})
    """
    if mode not in ('disjoint-union', 'direct-sum'):
        raise GeneratorError(f'未知模式: {mode}')
    if vectors is None:
        if hdim + lam > n:
            raise GeneratorError(f'维数溢出: hdim + λ = {hdim + lam} > n = {n}')
        vectors = [1 << (hdim + i) for i in range(lam)]
    else:
        vectors = [int(v) for v in vectors]
        if any(v < 0 or v >> n for v in vectors):
            raise GeneratorError('Λ 的向量超出 F_2^n')
        if hdim > n:
            raise GeneratorError(f'维数溢出: hdim = {hdim} > n = {n}')
        if not is_dissociated(vectors):
            raise GeneratorError('Λ 不是分离集')
    G = GroupDescriptor.cube(n)
    H = FiniteSet(G, tuple(range(1 << hdim)))
    L = FiniteSet(G, tuple(vectors))
    h_basis = [1 << i for i in range(hdim)]
    if mode == 'direct-sum':
        if _rank_f2(h_basis + vectors) != hdim + len(vectors):
            raise GeneratorError('Λ 与 H 不构成直和')
        A = H if not vectors else sumset(H, L)
    else:
        if any(v in H for v in vectors):
            raise GeneratorError('Λ 与 H 相交')
        A = H.union(L)
    return A, {'H': H, 'Lambda': L}


def disjoint_subgroup_union(n, bases):
    """
    给定各子空间的基，构造 ⊔H_j 并验证完全不交

    参数：
    - n: 空间维数
    - bases: 每个子空间的位向量基

    返回：
    - tuple: (FiniteSet, [H_1, ..., H_k])
    """
    G = GroupDescriptor.cube(n)
    flat = [int(v) for basis in bases for v in basis]
    if any(v <= 0 or v >> n for v in flat):
        raise GeneratorError('基向量必须是 F_2^n 中的非零向量')
    if _rank_f2(flat) != len(flat):
        raise GeneratorError('子空间不是完全不交的：|H_1 + … + H_k| < |H_1|…|H_k|')
    parts = [FiniteSet(G, tuple(_span(basis))) for basis in bases]
    A = FiniteSet(G, tuple(x for H in parts for x in H.elements))
    return A, parts


def gen_disjoint_subgroup_union(n, k, hdim):
    """k 个由相邻坐标块张成的 hdim 维子空间之并，要求 k·hdim ≤ n"""
    if k < 1 or hdim < 1:
        raise GeneratorError('需要 k ≥ 1 且 hdim ≥ 1')
    if k * hdim > n:
        raise GeneratorError(f'维数溢出: k·hdim = {k * hdim} > n = {n}')
    bases = [[1 << (j * hdim + i) for i in range(hdim)] for j in range(k)]
    return disjoint_subgroup_union(n, bases)


# ---------------------------------------------------------------- 随机集合

def gen_random(group, n, seed=0, span=None):
    """
    无放回均匀抽样

    参数：
    - group: GroupDescriptor；Z 中在 [0, span) 内抽样，span 缺省为 4n
    - n: 元素个数
    - seed: 随机种子

    返回：
    - FiniteSet
    """
    if n < 0:
        raise GeneratorError('n 必须非负')
    size = group.order if group.is_finite else (span or max(RANDOM_Z_SPAN * n, 1))
    if n > size:
        raise GeneratorError(f'n = {n} 超过可抽样的元素个数 {size}')
    rng = np.random.default_rng(seed)
    picks = rng.choice(size, size=n, replace=False) if n else []
    if group.is_finite:
        return FiniteSet(group, tuple(group.element_at(int(i)) for i in picks))
    return FiniteSet(group, tuple(int(i) for i in picks))


# ---------------------------------------------------------------- 样例统计预测

def predict_h_plus_lambda_energy(h, a, s):
    """H ∔ Λ 的两段式预测 E_s ≈ |H||A|^s + |A|²|H|^{s−1}"""
    return h * a ** s + a * a * h ** (s - 1)


def predict_union_energy(a, K, s):
    """⊔H_j：E_s ≈ |A|^{s+1}/K^{s/2}"""
    return a ** (s + 1) / K ** (s / 2)


def predict_union_t_energy(a, K, t):
    """⊔H_j：T_t ≈ |A|^{2t−1}/K^{t−1}"""
    return a ** (2 * t - 1) / K ** (t - 1)


# ---------------------------------------------------------------- 集合文件

def infer_tags(A):
    """
    为没有族描述的集合（例如从文件读入）推断可假设的标签

    只判断凸性与子群性：Z 中 |A| ≥ 3 的凸集记 convex，A + A = A 的有限群集合记 subgroup。
    """
    tags = set()
    if A.descriptor.kind == 'Z':
        if len(A) >= 3 and is_convex(A):
            tags.add('convex')
    elif len(A) and sumset(A, A) == A:
        tags.add('subgroup')
    return frozenset(tags)


def wrap_set(A, spec=None):
    """把裸集合包装为 GeneratedSet"""
    return GeneratedSet(spec, A, infer_tags(A))


# ---------------------------------------------------------------- 分派

def generate(spec):
    """
    按 FamilySpec（或其字符串）生成集合

    返回：
    - GeneratedSet
    """
    if not isinstance(spec, FamilySpec):
        spec = FamilySpec.parse(spec)
    p = dict(spec.params)
    components = {}
    try:
        if spec.family == 'convex':
            A = gen_convex(p.get('kind', 'squares'), int(p.get('n', 32)), spec.seed,
                           float(p.get('alpha', 2.0)), int(p.get('spread', 4)))
        elif spec.family == 'multiplicative-subgroup':
            A, h = gen_mult_subgroup(int(p['p']), int(p['d']))
            components['generator'] = h
        elif spec.family == 'H-plus-dissociated':
            A, components = gen_H_plus_dissociated(int(p['n']), int(p['hdim']), int(p.get('lam', 0)),
                                                   p.get('mode', 'direct-sum'))
        elif spec.family == 'disjoint-subgroup-union':
            A, parts = gen_disjoint_subgroup_union(int(p['n']), int(p['k']), int(p['hdim']))
            components['parts'] = parts
        elif spec.family == 'arithmetic-progression':
            A = gen_ap(int(p['n']), int(p.get('start', 0)), int(p.get('step', 1)))
        elif spec.family == 'geometric':
            A = gen_geometric(int(p['n']), int(p.get('ratio', 2)))
        elif spec.family == 'subgroup':
            if 'modulus' in p:
                A = gen_cyclic_subgroup(int(p['modulus']), int(p['order']))
            else:
                A = gen_subgroup(int(p['dim']), int(p.get('n', p['dim'])))
        else:
            group = GroupDescriptor.parse(p.get('group', 'Z'))
            span = p.get('span')
            A = gen_random(group, int(p['n']), spec.seed, None if span is None else int(span))
    except KeyError as exc:
        raise GeneratorError(f'{spec.family} 缺少参数 {exc}') from exc
    tags = set(FAMILY_TAGS[spec.family])
    if spec.family == 'subgroup' or (spec.family == 'H-plus-dissociated' and not p.get('lam')):
        tags.add('subgroup')
    if A.descriptor.kind == 'Z' and spec.family != 'convex' and len(A) >= 3 and is_convex(A):
        tags.add('convex')
    return GeneratedSet(spec, A, frozenset(tags), components)
