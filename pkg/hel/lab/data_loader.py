"""
集合加载工具

提供统一的集合读写功能，支持：
- 集合文件（JSON）的读取与规范化
- 生成族的本地缓存，以族描述字符串为键
- 集合基本信息统计
"""

import json
import os
import re
import warnings
from fractions import Fraction

from hel.lab.energies import energy
from hel.lab.exceptions import PreconditionError
from hel.lab.generators import FamilySpec, GeneratedSet, generate
from hel.lab.group_core import FiniteSet, GroupDescriptor, sumset


class SetLoader:
    """
    集合加载工具类

    - 读取集合文件：规范化元素、去重，发现重复元素时发出 UserWarning
    - 生成族缓存：同一个族描述只生成一次
    - get_set_info：大小、群、|A+A|、|A−A|、倍增常数、E 与 K
    """

    def __init__(self, cache_dir="set_cache", printlog=True):
        """
        初始化集合加载器

        参数：
        - cache_dir: 缓存目录，默认为"set_cache"；None 表示不缓存
        - printlog: 是否打印加载信息
        """
        self.cache_dir = cache_dir
        self.printlog = printlog
        if cache_dir is not None:
            os.makedirs(cache_dir, exist_ok=True)

    def log(self, txt):
        if self.printlog:
            print(txt)

    def parse_set(self, data, source='<json>'):
        """
        从集合文件的 JSON 内容构造 FiniteSet

        参数：
        - data: {"group": ..., "elements": [...]}，group 也可以写成 'Z/64' 这样的字符串
        - source: 出错与警告信息中使用的来源名

        返回：
        - FiniteSet
        """
        try:
            group = data['group']
            raw = list(data['elements'])
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f'{source} 不是集合文件: 缺少 group 或 elements') from exc
        G = GroupDescriptor.parse(group) if isinstance(group, str) else GroupDescriptor.from_json(group)
        canon = [G.decode(e) for e in raw]
        if any(G.encode(c) != e for c, e in zip(canon, raw)):
            self.log(f"{source}: 元素已规范化")
        duplicates = len(canon) - len(set(canon))
        if duplicates:
            warnings.warn(f'{source}: 去掉 {duplicates} 个重复元素', UserWarning, stacklevel=2)
            self.log(f"{source}: 去掉 {duplicates} 个重复元素")
        return FiniteSet(G, tuple(canon))

    def load_set(self, path):
        """
        读取集合文件

        参数：
        - path: JSON 文件路径

        返回：
        - FiniteSet
        """
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
        A = self.parse_set(data, str(path))
        self.log(f"从 {path} 加载集合: {A.descriptor} 中 {len(A)} 个元素")
        return A

    def save_set(self, A, filename):
        """
        保存集合到 JSON 文件

        参数：
        - A: FiniteSet
        - filename: 文件名
        """
        with open(filename, 'w', encoding='utf-8') as fh:
            json.dump(A.to_json(), fh)
            fh.write('\n')
        self.log(f"集合已保存到: {filename}")

    def _cache_file(self, spec):
        key = re.sub(r'[^A-Za-z0-9_.=-]+', '_', str(spec))
        return os.path.join(self.cache_dir, f"{key}.json")

    def load_family(self, spec, use_cache=True):
        """
        生成（或从缓存读取）一个族

        参数：
        - spec: FamilySpec 或 'family:key=value,...'
        - use_cache: 是否使用缓存，默认True

        返回：
        - GeneratedSet
        """
        if not isinstance(spec, FamilySpec):
            spec = FamilySpec.parse(spec)
        use_cache = use_cache and self.cache_dir is not None
        cache_file = self._cache_file(spec) if use_cache else None

        if use_cache and os.path.exists(cache_file):
            self.log(f"从缓存加载集合: {cache_file}")
            with open(cache_file, encoding='utf-8') as fh:
                data = json.load(fh)
            item = GeneratedSet(spec, FiniteSet.from_json(data['set']), frozenset(data['tags']),
                                {k: _decode_component(v) for k, v in data['components'].items()})
        else:
            self.log(f"生成集合: {spec}")
            item = generate(spec)
            if use_cache:
                payload = {
                    'spec': str(spec),
                    'set': item.set.to_json(),
                    'tags': sorted(item.tags),
                    'components': {k: _encode_component(v) for k, v in item.components.items()},
                }
                with open(cache_file, 'w', encoding='utf-8') as fh:
                    json.dump(payload, fh)
                self.log(f"集合已缓存到: {cache_file}")

        self.log(f"{spec}: |A| = {len(item.set)}，标签 {', '.join(sorted(item.tags)) or '无'}")
        return item

    def get_set_info(self, A):
        """
        获取集合基本信息

        参数：
        - A: 非空 FiniteSet

        返回：
        - dict: 集合信息字典
        """
        if not len(A):
            raise PreconditionError('空集合没有基本信息')
        n = len(A)
        plus = len(sumset(A, A))
        minus = len(sumset(A, A, 1, -1))
        e = energy(A)
        info = {
            '集合大小': n,
            '群': str(A.descriptor),
            '摘要': A.digest,
            '|A+A|': plus,
            '|A-A|': minus,
            '加法倍增': Fraction(plus, n),
            '差倍增': Fraction(minus, n),
            'E(A)': e,
            'K': Fraction(n ** 3, e),
        }
        return info


def _encode_component(value):
    if isinstance(value, FiniteSet):
        return value.to_json()
    if isinstance(value, (list, tuple)):
        return [_encode_component(v) for v in value]
    return value


def _decode_component(value):
    if isinstance(value, dict) and 'group' in value:
        return FiniteSet.from_json(value)
    if isinstance(value, list):
        return [_decode_component(v) for v in value]
    return value
