"""
有限生成阿贝尔群的基础抽象

提供四类具体的群：
- Z：整数（无界窗口）
- ZmodN：模 N 剩余类
- F2n：布尔立方体 F_2^n，元素以整数位向量表示，坐标 0 对应最高位
- product：若干群的直积，元素为元组

以及集合（FiniteSet）、有限支撑函数（GroupFunction）和和集运算。
所有对象构造后不可变，可在线程与进程间共享。
"""

import hashlib
import json
import math
import operator
from dataclasses import dataclass, field
from functools import cached_property, reduce
from numbers import Integral

from hel.lab.exceptions import DescriptorMismatchError, PreconditionError

KINDS = ('Z', 'ZmodN', 'F2n', 'product')


@dataclass(frozen=True)
class GroupDescriptor:
    """
    群描述符

    参数：
    - kind: 'Z'、'ZmodN'、'F2n' 或 'product'
    - modulus: ZmodN 的模数 N ≥ 1
    - dimension: F2n 的维数 n ≥ 0
    - factors: product 的因子（非空元组）
    """

    kind: str
    modulus: object = None
    dimension: object = None
    factors: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f'未知的群类型: {self.kind}')
        if self.kind == 'ZmodN' and (not isinstance(self.modulus, Integral) or self.modulus < 1):
            raise PreconditionError(f'模数必须是正整数: {self.modulus}')
        if self.kind == 'F2n' and (not isinstance(self.dimension, Integral) or self.dimension < 0):
            raise PreconditionError(f'维数必须是非负整数: {self.dimension}')
        if self.kind == 'product':
            if not self.factors:
                raise PreconditionError('直积至少需要一个因子')
            object.__setattr__(self, 'factors', tuple(self.factors))

    @classmethod
    def integers(cls):
        return cls('Z')

    @classmethod
    def cyclic(cls, modulus):
        return cls('ZmodN', modulus=int(modulus))

    @classmethod
    def cube(cls, dimension):
        return cls('F2n', dimension=int(dimension))

    @classmethod
    def product(cls, *factors):
        return cls('product', factors=tuple(factors))

    @property
    def is_finite(self):
        if self.kind == 'Z':
            return False
        if self.kind == 'product':
            return all(f.is_finite for f in self.factors)
        return True

    @property
    def order(self):
        """群的阶；无限群返回 None"""
        if self.kind == 'Z':
            return None
        if self.kind == 'ZmodN':
            return self.modulus
        if self.kind == 'F2n':
            return 1 << self.dimension
        orders = [f.order for f in self.factors]
        if any(o is None for o in orders):
            return None
        return math.prod(orders)

    @property
    def zero(self):
        if self.kind == 'product':
            return tuple(f.zero for f in self.factors)
        return 0

    # 运算闭包：热点循环中避免重复分派

    def adder(self):
        if self.kind == 'Z':
            return operator.add
        if self.kind == 'ZmodN':
            n = self.modulus
            return lambda x, y: (x + y) % n
        if self.kind == 'F2n':
            return operator.xor
        adds = [f.adder() for f in self.factors]
        return lambda x, y: tuple(a(u, v) for a, u, v in zip(adds, x, y))

    def negator(self):
        if self.kind == 'Z':
            return operator.neg
        if self.kind == 'ZmodN':
            n = self.modulus
            return lambda x: (-x) % n
        if self.kind == 'F2n':
            return lambda x: x
        negs = [f.negator() for f in self.factors]
        return lambda x: tuple(ng(u) for ng, u in zip(negs, x))

    def subtractor(self):
        if self.kind == 'Z':
            return operator.sub
        if self.kind == 'ZmodN':
            n = self.modulus
            return lambda x, y: (x - y) % n
        if self.kind == 'F2n':
            return operator.xor
        subs = [f.subtractor() for f in self.factors]
        return lambda x, y: tuple(s(u, v) for s, u, v in zip(subs, x, y))

    def add(self, x, y):
        return self.adder()(x, y)

    def neg(self, x):
        return self.negator()(x)

    def sub(self, x, y):
        return self.subtractor()(x, y)

    def multiple(self, x, k):
        """k·x，k 为非负整数"""
        add = self.adder()
        total = self.zero
        for _ in range(k):
            total = add(total, x)
        return total

    def canonical(self, raw):
        """
        把原始输入规范化为群元素

        参数：
        - raw: 整数、位列表或嵌套列表

        返回：
        - 规范坐标的元素（剩余类取 [0, N)，位取 {0,1}）
        """
        if self.kind == 'Z':
            return int(raw)
        if self.kind == 'ZmodN':
            return int(raw) % self.modulus
        if self.kind == 'F2n':
            n = self.dimension
            if isinstance(raw, (list, tuple)):
                if len(raw) != n or any(int(b) not in (0, 1) for b in raw):
                    raise PreconditionError(f'F_2^{n} 元素需要 {n} 个比特: {raw}')
                return reduce(lambda acc, b: (acc << 1) | int(b), raw, 0)
            value = int(raw)
            if value < 0 or value >> n:
                raise PreconditionError(f'位向量超出 F_2^{n}: {raw}')
            return value
        if not isinstance(raw, (list, tuple)) or len(raw) != len(self.factors):
            raise PreconditionError(f'直积元素需要 {len(self.factors)} 个坐标: {raw}')
        return tuple(f.canonical(c) for f, c in zip(self.factors, raw))

    def encode(self, x):
        """元素的 JSON 编码"""
        if self.kind in ('Z', 'ZmodN'):
            return int(x)
        if self.kind == 'F2n':
            n = self.dimension
            return [(x >> (n - 1 - i)) & 1 for i in range(n)]
        return [f.encode(c) for f, c in zip(self.factors, x)]

    def decode(self, obj):
        return self.canonical(obj)

    def element_at(self, index):
        """有限群中按规范顺序的第 index 个元素"""
        if not self.is_finite:
            raise PreconditionError('无限群没有元素编号')
        if self.kind in ('ZmodN', 'F2n'):
            return index
        coords = []
        for f in reversed(self.factors):
            index, r = divmod(index, f.order)
            coords.append(f.element_at(r))
        return tuple(reversed(coords))

    def all_elements(self):
        """有限群的全部元素，按规范顺序"""
        return [self.element_at(i) for i in range(self.order)]

    def to_json(self):
        data = {'kind': self.kind}
        if self.kind == 'ZmodN':
            data['modulus'] = self.modulus
        elif self.kind == 'F2n':
            data['dimension'] = self.dimension
        elif self.kind == 'product':
            data['factors'] = [f.to_json() for f in self.factors]
        return data

    @classmethod
    def from_json(cls, data):
        kind = data.get('kind')
        if kind == 'Z':
            return cls.integers()
        if kind == 'ZmodN':
            return cls.cyclic(data['modulus'])
        if kind == 'F2n':
            return cls.cube(data['dimension'])
        if kind == 'product':
            return cls.product(*(cls.from_json(f) for f in data['factors']))
        raise PreconditionError(f'未知的群类型: {kind}')

    def __str__(self):
        if self.kind == 'Z':
            return 'Z'
        if self.kind == 'ZmodN':
            return f'Z/{self.modulus}'
        if self.kind == 'F2n':
            return f'F2^{self.dimension}'
        return ' x '.join(str(f) for f in self.factors)

    @classmethod
    def parse(cls, text):
        """
        解析 __str__ 的写法：'Z'、'Z/64'、'F2^5'、'Z/4 x F2^3'

        参数：
        - text: 群的字符串表示

        返回：
        - GroupDescriptor
        """
        parts = [p.strip() for p in str(text).split(' x ')]
        if len(parts) > 1:
            return cls.product(*(cls.parse(p) for p in parts))
        token = parts[0]
        try:
            if token == 'Z':
                return cls.integers()
            if token.startswith('Z/'):
                return cls.cyclic(int(token[2:]))
            if token.startswith('F2^'):
                return cls.cube(int(token[3:]))
        except ValueError as exc:
            raise PreconditionError(f'无法解析的群: {text}') from exc
        raise PreconditionError(f'无法解析的群: {text}')


def group_order(descriptor):
    return descriptor.order


def all_elements(descriptor):
    return descriptor.all_elements()


def require_same(*objs):
    """所有操作数必须属于同一个群，返回该群描述符"""
    first = objs[0].descriptor
    for obj in objs[1:]:
        if obj.descriptor != first:
            raise DescriptorMismatchError(f'群不一致: {first} 与 {obj.descriptor}')
    return first


@dataclass(frozen=True)
class FiniteSet:
    """
    有限集合

    元素去重并按规范顺序排列；相同元素集合的表示唯一。
    """

    descriptor: GroupDescriptor
    elements: tuple = ()

    def __post_init__(self):
        canon = self.descriptor.canonical
        object.__setattr__(self, 'elements', tuple(sorted({canon(e) for e in self.elements})))

    @classmethod
    def of(cls, descriptor, elements):
        return cls(descriptor, tuple(elements))

    @classmethod
    def whole(cls, descriptor):
        return cls(descriptor, tuple(descriptor.all_elements()))

    @cached_property
    def members(self):
        return frozenset(self.elements)

    @cached_property
    def position(self):
        """元素到规范序号的映射（矩阵行列编号）"""
        return {x: i for i, x in enumerate(self.elements)}

    @cached_property
    def digest(self):
        payload = json.dumps(self.to_json(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.members

    def translate(self, x):
        add = self.descriptor.adder()
        return FiniteSet(self.descriptor, tuple(add(a, x) for a in self.elements))

    def intersection(self, other):
        require_same(self, other)
        return FiniteSet(self.descriptor, tuple(x for x in self.elements if x in other.members))

    def union(self, other):
        require_same(self, other)
        return FiniteSet(self.descriptor, self.elements + other.elements)

    def difference(self, other):
        require_same(self, other)
        return FiniteSet(self.descriptor, tuple(x for x in self.elements if x not in other.members))

    def issubset(self, other):
        return self.members <= other.members

    def is_symmetric(self):
        neg = self.descriptor.negator()
        return all(neg(x) in self.members for x in self.elements)

    def to_json(self):
        enc = self.descriptor.encode
        return {'group': self.descriptor.to_json(), 'elements': [enc(x) for x in self.elements]}

    @classmethod
    def from_json(cls, data):
        descriptor = GroupDescriptor.from_json(data['group'])
        return cls(descriptor, tuple(descriptor.decode(e) for e in data['elements']))

    def __repr__(self):
        shown = ', '.join(str(x) for x in self.elements[:8])
        more = ', ...' if len(self) > 8 else ''
        return f'FiniteSet({self.descriptor}, |A|={len(self)}: {{{shown}{more}}})'


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """
    有限支撑函数 Γ → 整数（或实数）

    支撑中不保存零值；value_kind 为 'int' 或 'float'。
    """

    descriptor: GroupDescriptor
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'values', {x: v for x, v in self.values.items() if v != 0})

    @classmethod
    def indicator(cls, A):
        return cls(A.descriptor, {x: 1 for x in A.elements})

    @classmethod
    def delta(cls, descriptor, x=None):
        return cls(descriptor, {descriptor.zero if x is None else x: 1})

    @cached_property
    def value_kind(self):
        return 'int' if all(isinstance(v, Integral) for v in self.values.values()) else 'float'

    @property
    def support(self):
        return FiniteSet(self.descriptor, tuple(self.values))

    def __call__(self, x):
        return self.values.get(x, 0)

    def items(self):
        """按规范顺序排列的 (元素, 值)"""
        return sorted(self.values.items())

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, GroupFunction):
            return NotImplemented
        return self.descriptor == other.descriptor and self.values == other.values

    __hash__ = None

    def reflect(self):
        """f^c(x) = f(−x)"""
        neg = self.descriptor.negator()
        return GroupFunction(self.descriptor, {neg(x): v for x, v in self.values.items()})

    def is_even(self):
        neg = self.descriptor.negator()
        return all(self.values.get(neg(x), 0) == v for x, v in self.values.items())

    def is_nonnegative(self):
        return all(v >= 0 for v in self.values.values())

    def total(self):
        return sum(self.values.values())

    def l2_squared(self):
        return sum(v * v for v in self.values.values())

    def sup_norm(self):
        return max((abs(v) for v in self.values.values()), default=0)

    def scale(self, c):
        return GroupFunction(self.descriptor, {x: c * v for x, v in self.values.items()})

    def __add__(self, other):
        require_same(self, other)
        out = dict(self.values)
        for x, v in other.values.items():
            out[x] = out.get(x, 0) + v
        return GroupFunction(self.descriptor, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        """逐点乘积"""
        require_same(self, other)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return GroupFunction(self.descriptor,
                             {x: v * big.values[x] for x, v in small.values.items() if x in big.values})

    def power(self, s):
        """逐点 s 次幂；s 为整数时保持精确"""
        if float(s).is_integer():
            k = int(s)
            return GroupFunction(self.descriptor, {x: v ** k for x, v in self.values.items()})
        return GroupFunction(self.descriptor, {x: float(v) ** s for x, v in self.values.items()})

    def restrict(self, A):
        require_same(self, A)
        return GroupFunction(self.descriptor, {x: v for x, v in self.values.items() if x in A.members})

    def to_json(self):
        enc = self.descriptor.encode
        return {'group': self.descriptor.to_json(),
                'values': [[enc(x), v] for x, v in self.items()]}

    @classmethod
    def from_json(cls, data):
        descriptor = GroupDescriptor.from_json(data['group'])
        return cls(descriptor, {descriptor.decode(x): v for x, v in data['values']})


def negate_set(A):
    """
    集合取负 {−a : a ∈ A}

    参数：
    - A: FiniteSet

    返回：
    - FiniteSet
    """
    neg = A.descriptor.negator()
    return FiniteSet(A.descriptor, tuple(neg(a) for a in A.elements))


def sumset(A, B, sign_a=1, sign_b=1):
    """
    和集 {sign_a·a + sign_b·b}

    参数：
    - A, B: 同一个群中的集合
    - sign_a, sign_b: ±1

    返回：
    - FiniteSet，大小不超过 |A||B|
    """
    G = require_same(A, B)
    if sign_a not in (1, -1) or sign_b not in (1, -1):
        raise PreconditionError('符号只能是 ±1')
    left = A.elements if sign_a == 1 else negate_set(A).elements
    right = B.elements if sign_b == 1 else negate_set(B).elements
    add = G.adder()
    return FiniteSet(G, tuple({add(a, b) for a in left for b in right}))


def iterated_sumset(A, n, m):
    """
    迭代和集 nA − mA

    参数：
    - A: FiniteSet
    - n, m: 非负整数，n + m ≥ 1

    返回：
    - FiniteSet
    """
    if n < 0 or m < 0 or n + m == 0:
        raise PreconditionError('需要 n, m ≥ 0 且 n + m ≥ 1')
    neg_a = negate_set(A)
    current = A if n > 0 else neg_a
    for _ in range(n - 1):
        current = sumset(current, A)
    for _ in range(m if n > 0 else m - 1):
        current = sumset(current, neg_a)
    return current
