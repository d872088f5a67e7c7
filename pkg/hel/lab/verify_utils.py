"""
批量验证工具

提供统一的批量验证功能，包括：
- 检查套件运行与结果汇总
- 多个集合族的能量比较
- 按规模扫描并拟合渐近常数（CSV 即绘图接口）
"""

import itertools
import math

import pandas as pd

from hel.lab.check_registry import has_failures, report_frame, run_suite
from hel.lab.energies import energy_report
from hel.lab.exceptions import LabError
from hel.lab.generators import FamilySpec, generate
from hel.lab.group_core import sumset

CONVEX_EXPONENT = 32 / 13
CONVEX_LOG_EXPONENT = 71 / 65


def _log(x):
    return max(math.log(x), 1.0) if x > 0 else 1.0


class VerifyUtils:
    """
    批量验证工具类

    - run_verify：运行检查套件并打印汇总
    - compare_families：多个族的能量与倍增对比
    - scan_sizes：固定族、改变规模，报告 E_3/(|A|³log|A|) 等拟合常数及其漂移
    """

    def __init__(self, jobs=1, timing=False, printlog=False):
        """
        初始化验证工具

        参数：
        - jobs: 进程数，默认1
        - timing: 是否记录每个检查的耗时
        - printlog: 是否打印进度与汇总
        """
        self.jobs = jobs
        self.timing = timing
        self.printlog = printlog

    def log(self, txt):
        if self.printlog:
            print(txt)

    def run_verify(self, suite, inputs, check_filter=None):
        """
        运行检查套件

        参数：
        - suite: identities / explicit / asymptotic / all
        - inputs: 族描述、集合文件或 FiniteSet 的列表
        - check_filter: 检查编号通配符

        返回：
        - list of CheckResult
        """
        self.log(f"运行 {suite} 套件，{len(inputs)} 个输入，{self.jobs} 个进程...")
        results = run_suite(suite, inputs, check_filter, self.jobs, self.timing)
        self._print_summary(results)
        return results

    def summarize(self, results):
        """
        汇总结果

        返回：
        - dict: total、passed、failed、skipped、asymptotic 与未通过的编号
        """
        return {
            'total': len(results),
            'passed': sum(1 for r in results if r.passed),
            'failed': sum(1 for r in results if r.failed),
            'skipped': sum(1 for r in results if r.skipped),
            'asymptotic': sum(1 for r in results if r.passed is None and not r.skipped),
            'failed_ids': sorted({r.check_id for r in results if r.failed}),
        }

    def _print_summary(self, results):
        summary = self.summarize(results)
        self.log('\n--- 验证汇总 ---')
        self.log(f"检查总数: {summary['total']}")
        self.log(f"通过: {summary['passed']}")
        self.log(f"未通过: {summary['failed']}")
        self.log(f"跳过: {summary['skipped']}")
        self.log(f"渐近比值: {summary['asymptotic']}")
        if has_failures(results):
            self.log(f"未通过的检查: {', '.join(summary['failed_ids'])}")

    def to_frame(self, results):
        """结果整理为以 (check_id, input_digest) 为索引的 DataFrame"""
        return report_frame(results).set_index(['check_id', 'input_digest'])

    def set_metrics(self, A):
        """
        一个集合的能量指标与拟合常数

        返回：
        - dict
        """
        report = energy_report(A)
        n = len(A)
        q = report.quantities
        return {
            'size': n,
            'doubling': len(sumset(A, A)) / n,
            'difference_doubling': len(sumset(A, A, 1, -1)) / n,
            'E': q['E'],
            'E_3': q['E_3'],
            'E_4': q['E_4'],
            'K': float(report.K),
            'M': float(report.M),
            'L': report.L,
            'C_E3': q['E_3'] / (n ** 3 * _log(n)),
            'C_E': q['E'] / (n ** CONVEX_EXPONENT * _log(n) ** CONVEX_LOG_EXPONENT),
        }

    def compare_families(self, specs, quantities=None):
        """
        比较多个族的能量指标

        参数：
        - specs: 族描述列表
        - quantities: 只保留的列，默认全部

        返回：
        - pandas.DataFrame: 以族描述为索引，按 K 降序
        """
        results_dict = {}

        for spec in specs:
            self.log(f"正在计算: {spec}")
            results_dict[str(spec)] = self.set_metrics(generate(spec).set)

        metrics_df = pd.DataFrame.from_dict(results_dict, orient='index')
        metrics_df = metrics_df.sort_values('K', ascending=False)
        if quantities:
            metrics_df = metrics_df[list(quantities)]

        self.log("集合族对比：")
        self.log(metrics_df)

        return metrics_df

    def scan_sizes(self, family, sizes, param='n', **fixed):
        """
        按规模扫描一个族

        参数：
        - family: 族名，如 'convex'
        - sizes: 规模参数的取值
        - param: 规模参数名，默认 'n'
        - **fixed: 其余固定参数，取值为列表时与规模做笛卡尔积

        返回：
        - pandas.DataFrame: 每行一个规模，attrs['drift'] 记录 C_E3 与 C_E 的相对漂移
        """
        grid = {k: v if isinstance(v, (list, tuple)) else [v] for k, v in fixed.items()}
        names = [param] + list(grid)
        combinations = list(itertools.product(sizes, *grid.values()))
        rows = []

        self.log(f"开始规模扫描，总共{len(combinations)}个组合...")

        for i, combination in enumerate(combinations):
            params = dict(zip(names, combination))
            spec = FamilySpec(family, tuple(params.items()))
            try:
                metrics = self.set_metrics(generate(spec).set)
                rows.append({'spec': str(spec), **params, **metrics})
                self.log(f"[{i+1}/{len(combinations)}] {spec}")
                self.log(f"    E_3/(|A|³log|A|): {metrics['C_E3']:.4f}")
                self.log(f"    E/(|A|^{{32/13}}log^{{71/65}}|A|): {metrics['C_E']:.4f}")
            except LabError as e:
                self.log(f"[{i+1}/{len(combinations)}] {spec} 运行失败: {str(e)}")

        scan_df = pd.DataFrame(rows)
        if len(scan_df) > 0:
            scan_df = scan_df.sort_values(param).reset_index(drop=True)
            scan_df.attrs['drift'] = {c: self.drift(scan_df[c]) for c in ('C_E3', 'C_E')}
            self.log(f"\n=== 拟合常数漂移 ===\n{scan_df.attrs['drift']}")

        return scan_df

    @staticmethod
    def drift(series):
        """相对漂移 (max − min)/max"""
        top = float(series.max())
        return (top - float(series.min())) / top if top else 0.0
