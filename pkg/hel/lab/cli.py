"""命令行入口：hel gen / compute / spectrum / dual / extract / trace / verify / info"""

import functools
import json
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from hel.lab.check_registry import SUITES, emit_report, has_failures, resolve_input
from hel.lab.data_loader import SetLoader
from hel.lab.dual_sets import DualSetAnalyzer
from hel.lab.energies import autocorrelation, energy_report
from hel.lab.exceptions import LabError
from hel.lab.group_core import GroupFunction
from hel.lab.spectral import OPERATOR_KINDS, SpectrumAnalyzer
from hel.lab.structure import ConvexTrace, E3Pipeline, E4MPipeline, E4T4Pipeline
from hel.lab.verify_utils import VerifyUtils

PIPELINES = {'e3': E3Pipeline, 'e4m': E4MPipeline, 'e4t4': E4T4Pipeline}


def _plain(obj):
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f'无法序列化: {type(obj).__name__}')


def _dumps(data):
    return json.dumps(data, default=_plain, ensure_ascii=False, indent=2)


def lab_errors(command):
    """LabError 转为 click.ClickException"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except LabError as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def _load(set_arg):
    """集合文件路径或族描述"""
    return resolve_input(set_arg).set


@click.group()
def main():
    """高阶能量方法的验证实验室"""


@main.command()
@click.option("--family", required=True, help="族描述，如 'convex:kind=squares,n=64'")
@click.option("--seed", type=int, default=None, help="覆盖族描述中的种子")
@click.option("--out", type=click.Path(path_type=Path, dir_okay=False), default=None,
              help="输出集合文件，默认写到标准输出")
@lab_errors
def gen(family, seed, out):
    """生成一个集合族，输出集合文件 JSON"""
    if seed is not None:
        family = f"{family}{',' if ':' in family else ':'}seed={seed}"
    A = resolve_input(family).set
    if out is None:
        click.echo(json.dumps(A.to_json()))
    else:
        SetLoader(cache_dir=None, printlog=False).save_set(A, out)
        click.echo(f"{family}: |A| = {len(A)}，已写入 {out}")


@main.command()
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@click.option("--s", "s_values", type=float, multiple=True, help="额外报告的实数指数 E_s")
@lab_errors
def compute(set_arg, s_values):
    """能量报告：全部量与 K、M、L"""
    click.echo(_dumps(energy_report(_load(set_arg), s_values).to_json()))


@main.command()
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@click.option("--weight", type=click.Choice(["autocorr", "file"]), default="autocorr", show_default=True)
@click.option("--weight-file", type=click.Path(path_type=Path, exists=True, dir_okay=False), default=None,
              help="--weight file 时的权函数 JSON（GroupFunction 格式）")
@click.option("--kind", type=click.Choice(OPERATOR_KINDS[:4]), default="sym-diff", show_default=True)
@click.option("--max-dim", type=int, default=None, help="算子维数上限")
@lab_errors
def spectrum(set_arg, weight, weight_file, kind, max_dim):
    """构造算子并输出谱报告"""
    A = _load(set_arg)
    if weight == "file":
        if weight_file is None:
            raise click.UsageError("--weight file 需要 --weight-file")
        g = GroupFunction.from_json(json.loads(weight_file.read_text(encoding="utf-8")))
    else:
        g = autocorrelation(A)
    B = A if kind.startswith("rect") else None
    params = {} if max_dim is None else {"max_dim": max_dim}
    report = SpectrumAnalyzer(printlog=False, **params).run(kind, A, B, g)
    click.echo(_dumps(report))


@main.command()
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@click.option("--k", type=click.IntRange(2, 3), default=2, show_default=True)
@click.option("--mode", type=click.Choice(["auto", "exhaustive", "sampled"]), default="auto", show_default=True,
              help="连通性剖面的计算方式")
@click.option("--seed", type=int, default=0, show_default=True)
@lab_errors
def dual(set_arg, k, mode, seed):
    """构造对偶对并输出对偶集合报告"""
    report = DualSetAnalyzer(k=k, connectivity_mode=mode, seed=seed, printlog=False).run(_load(set_arg))
    click.echo(_dumps(report))


@main.command()
@click.argument("pipeline", type=click.Choice(sorted(PIPELINES)))
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@click.option("--s", "s", type=float, default=None, help="e3 / e4m 的指数 s")
@click.option("--verbose", is_flag=True, help="打印每一步")
@lab_errors
def extract(pipeline, set_arg, s, verbose):
    """运行结构提取流程，输出证书"""
    if s is not None and pipeline == "e4t4":
        raise click.UsageError("e4t4 没有指数 s")
    params = {} if s is None else {"s": s}
    cert = PIPELINES[pipeline](printlog=verbose, **params).run(_load(set_arg))
    click.echo(_dumps(cert.to_json()))


@main.command()
@click.argument("which", type=click.Choice(["convex"]))
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--verbose", is_flag=True, help="打印每一步")
@lab_errors
def trace(which, set_arg, fmt, verbose):
    """凸集能量证明链的逐步记录"""
    record = ConvexTrace(printlog=verbose).run(_load(set_arg))
    if fmt == "csv":
        click.echo(record.to_frame().to_csv(lineterminator="\n"), nl=False)
    else:
        click.echo(_dumps(record.to_json()))


@main.command()
@click.option("--suite", type=click.Choice(sorted(SUITES)), required=True)
@click.option("--family", "families", multiple=True, help="族描述，可重复")
@click.option("--set", "sets", multiple=True, type=click.Path(exists=True, dir_okay=False),
              help="集合文件，可重复")
@click.option("--filter", "check_filter", default=None, help="检查编号通配符")
@click.option("--out", type=click.Path(path_type=Path, dir_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--jobs", type=click.IntRange(1), default=1, show_default=True)
@click.option("--timing", is_flag=True, help="记录每个检查的耗时")
@click.pass_context
@lab_errors
def verify(ctx, suite, families, sets, check_filter, out, fmt, jobs, timing):
    """运行检查套件并写出报告；存在未通过的非渐近检查时退出码为 1"""
    inputs = list(families) + list(sets)
    if not inputs:
        raise click.UsageError("至少需要一个 --family 或 --set")
    utils = VerifyUtils(jobs=jobs, timing=timing)
    results = utils.run_verify(suite, inputs, check_filter)
    emit_report(results, fmt, out)
    summary = utils.summarize(results)
    click.echo(f"{summary['total']} 条结果：通过 {summary['passed']}，未通过 {summary['failed']}，"
               f"跳过 {summary['skipped']}，渐近 {summary['asymptotic']} → {out}")
    if has_failures(results):
        for check_id in summary['failed_ids']:
            click.echo(f"未通过: {check_id}", err=True)
        ctx.exit(1)


@main.command()
@click.option("--set", "set_arg", required=True, help="集合文件或族描述")
@lab_errors
def info(set_arg):
    """集合基本信息"""
    data = SetLoader(cache_dir=None, printlog=False).get_set_info(_load(set_arg))
    for key, value in data.items():
        click.echo(f"{key}: {value}")


if __name__ == "__main__":
    main()
