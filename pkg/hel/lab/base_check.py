"""
基础检查类

提供所有检查与流程共用的基础功能，包括：
- 参数合并与统一的日志记录
- 检查结果（CheckResult）的构造与序列化
- 精确 / 显式常数 / 渐近三类比较
"""

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Integral, Rational
from types import SimpleNamespace

RTOL = 1e-9


class CheckKind(str, Enum):
    """检查类型：恒等式、显式常数不等式、渐近（只报告比值）"""

    EXACT = 'exact'
    EXPLICIT = 'explicit'
    ASYMPTOTIC = 'asymptotic'


@dataclass(frozen=True)
class CheckResult:
    """
    一条被验证的结论

    ref 在报告中写作 "paper_ref"；passed 在报告中写作 "pass"，
    渐近类与被跳过的结果没有 pass 字段。
    """

    check_id: str
    ref: str
    kind: CheckKind
    input_digest: str
    lhs: object = None
    rhs: object = None
    ratio: object = None
    passed: object = None
    runtime_ms: int = 0
    skip_reason: object = None
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def skipped(self):
        return self.skip_reason is not None

    @property
    def failed(self):
        return self.passed is False

    def with_runtime(self, runtime_ms):
        return CheckResult(self.check_id, self.ref, self.kind, self.input_digest,
                           self.lhs, self.rhs, self.ratio, self.passed,
                           int(runtime_ms), self.skip_reason, self.detail)

    def with_id(self, check_id, ref=None):
        return CheckResult(check_id, ref if ref is not None else self.ref, self.kind,
                           self.input_digest, self.lhs, self.rhs, self.ratio, self.passed,
                           self.runtime_ms, self.skip_reason, self.detail)

    def to_json(self):
        """
        转换为报告中的一行

        返回：
        - dict: 键顺序固定，数值统一为 int 或 float
        """
        row = {
            'check_id': self.check_id,
            'paper_ref': self.ref,
            'kind': CheckKind(self.kind).value,
            'input_digest': self.input_digest,
            'lhs': _plain_number(self.lhs),
            'rhs': _plain_number(self.rhs),
            'ratio': _plain_number(self.ratio),
        }
        if self.skip_reason is None and CheckKind(self.kind) is not CheckKind.ASYMPTOTIC:
            row['pass'] = bool(self.passed)
        row['runtime_ms'] = int(self.runtime_ms)
        if self.skip_reason is not None:
            row['skipped'] = self.skip_reason
        return row

    @classmethod
    def from_json(cls, row):
        return cls(
            check_id=row['check_id'],
            ref=row['paper_ref'],
            kind=CheckKind(row['kind']),
            input_digest=row['input_digest'],
            lhs=row.get('lhs'),
            rhs=row.get('rhs'),
            ratio=row.get('ratio'),
            passed=row.get('pass'),
            runtime_ms=int(row.get('runtime_ms', 0)),
            skip_reason=row.get('skipped'),
        )


def _plain_number(value):
    if value is None or isinstance(value, bool):
        return value
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Rational):
        if value.denominator == 1:
            return int(value.numerator)
        return float(value)
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        return None
    return value


def _is_exact(value):
    return isinstance(value, Rational) and not isinstance(value, bool)


def safe_ratio(lhs, rhs):
    """lhs/rhs；rhs 为 0 时返回 None"""
    if rhs is None or lhs is None or rhs == 0:
        return None
    if _is_exact(lhs) and _is_exact(rhs):
        return Fraction(lhs) / Fraction(rhs)
    return float(lhs) / float(rhs)


def compare(lhs, rhs, relation='eq', rtol=RTOL, atol=0.0):
    """
    比较两侧数值

    参数：
    - lhs, rhs: 精确整数 / 分数时按精确算术比较，否则使用容差
    - relation: 'eq'、'le'（lhs ≤ rhs）或 'ge'（lhs ≥ rhs）
    - rtol: 相对容差
    - atol: 绝对容差

    返回：
    - bool: 是否成立
    """
    if _is_exact(lhs) and _is_exact(rhs):
        if relation == 'eq':
            return lhs == rhs
        if relation == 'le':
            return lhs <= rhs
        return lhs >= rhs
    lhs, rhs = float(lhs), float(rhs)
    slack = rtol * max(abs(lhs), abs(rhs)) + atol
    if relation == 'eq':
        return abs(lhs - rhs) <= slack
    if relation == 'le':
        return lhs <= rhs + slack
    return lhs >= rhs - slack


def make_result(check_id, ref, kind, digest, lhs, rhs, relation='eq',
                rtol=RTOL, atol=0.0, **detail):
    """
    构造一条检查结果

    参数：
    - check_id: 稳定的检查编号
    - ref: 出处标签与简短说明
    - kind: CheckKind
    - digest: 输入摘要
    - lhs, rhs: 两侧数值
    - relation: 'eq' / 'le' / 'ge'，渐近类忽略
    - **detail: 附加信息，不进入报告

    返回：
    - CheckResult
    """
    kind = CheckKind(kind)
    passed = None
    if kind is not CheckKind.ASYMPTOTIC:
        passed = compare(lhs, rhs, relation, rtol, atol)
    return CheckResult(check_id, ref, kind, digest, lhs, rhs,
                       safe_ratio(lhs, rhs), passed, detail=detail)


def skipped_result(check_id, ref, kind, digest, reason):
    return CheckResult(check_id, ref, CheckKind(kind), digest, skip_reason=str(reason))


def combine_digest(*digests):
    """多个输入的联合摘要"""
    if len(digests) == 1:
        return digests[0]
    joined = '+'.join(digests)
    return hashlib.sha256(joined.encode()).hexdigest()[:16]


def merged_params(klass):
    """沿 MRO 合并 params 元组，子类覆盖父类"""
    merged = {}
    for base in reversed(klass.__mro__):
        merged.update(dict(vars(base).get('params', ())))
    return merged


class BaseCheck:
    """
    基础检查类

    提供所有检查与结构提取流程共用的基础功能：
    - params 元组声明可调参数，构造时允许关键字覆盖
    - 统一的日志记录格式
    - 三类比较结果的构造
    """

    check_id = 'base'
    ref = ''
    kind = CheckKind.EXACT

    params = (
        ('printlog', True),  # 是否打印日志
        ('rtol', RTOL),
        ('atol', 0.0),
    )

    def __init__(self, **kwargs):
        defaults = merged_params(type(self))
        unknown = sorted(set(kwargs) - set(defaults))
        if unknown:
            raise TypeError(f'{type(self).__name__} 不支持的参数: {", ".join(unknown)}')
        defaults.update(kwargs)
        self.params = self.p = SimpleNamespace(**defaults)

    def log(self, txt):
        """
        统一的日志记录函数

        参数：
        - txt: 要记录的文本信息
        """
        if self.params.printlog:
            print(f'[{self.check_id}] {txt}')

    def result(self, digest, lhs, rhs, relation='eq', check_id=None, ref=None,
               kind=None, **detail):
        res = make_result(check_id or self.check_id, ref if ref is not None else self.ref,
                          kind or self.kind, digest, lhs, rhs, relation,
                          self.params.rtol, self.params.atol, **detail)
        self.log(f'lhs={_plain_number(lhs)} rhs={_plain_number(rhs)} '
                 f'pass={res.passed}')
        return res

    def skip(self, digest, reason, check_id=None):
        self.log(f'跳过: {reason}')
        return skipped_result(check_id or self.check_id, self.ref, self.kind, digest, reason)

    def run(self, *inputs):
        """
        检查核心函数

        子类必须重写此方法，返回 CheckResult 列表
        """
        raise NotImplementedError('子类必须实现run方法')
