"""
高阶能量方法的验证实验室

包含以下组件：
- 群、集合与有限支撑函数
- 精确卷积与广义卷积
- 能量统计与能量报告
- 算子谱分析
- 对偶集合
- 结构提取流程与凸集证明链
- 集合族生成器

以及检查注册表、批量验证工具和集合加载组件。
"""

from hel.lab.base_check import BaseCheck, CheckKind, CheckResult
from hel.lab.check_registry import DESCRIPTORS, emit_report, load_report, run_check, run_suite
from hel.lab.data_loader import SetLoader
from hel.lab.dual_sets import DualSetAnalyzer
from hel.lab.energies import EnergyReport, energy_report
from hel.lab.generators import FamilySpec, GeneratedSet, generate
from hel.lab.group_core import FiniteSet, GroupDescriptor, GroupFunction
from hel.lab.spectral import SpectrumAnalyzer
from hel.lab.structure import ConvexTrace, E3Pipeline, E4MPipeline, E4T4Pipeline
from hel.lab.verify_utils import VerifyUtils

__all__ = [
    'BaseCheck',
    'CheckKind',
    'CheckResult',
    'DESCRIPTORS',
    'emit_report',
    'load_report',
    'run_check',
    'run_suite',
    'SetLoader',
    'DualSetAnalyzer',
    'EnergyReport',
    'energy_report',
    'FamilySpec',
    'GeneratedSet',
    'generate',
    'FiniteSet',
    'GroupDescriptor',
    'GroupFunction',
    'SpectrumAnalyzer',
    'ConvexTrace',
    'E3Pipeline',
    'E4MPipeline',
    'E4T4Pipeline',
    'VerifyUtils',
]
