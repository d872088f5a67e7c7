"""
命令行测试

通过 click.testing.CliRunner 调用各子命令
"""

import json
import os

from click.testing import CliRunner

from hel.lab.check_registry import load_report
from hel.lab.cli import main as cli
from hel.lab.data_loader import SetLoader
from hel.lab.group_core import FiniteSet, GroupDescriptor

SMALL = {'group': {'kind': 'Z'}, 'elements': [0, 1, 3]}


def _write_small(name='small.json'):
    with open(name, 'w', encoding='utf-8') as fh:
        json.dump(SMALL, fh)
    return name


def test_gen():
    """测试 gen 子命令"""
    print("=== 测试 gen ===")
    runner = CliRunner()
    result = runner.invoke(cli, ['gen', '--family', 'subgroup:dim=3'])
    assert result.exit_code == 0, result.output
    data = json.loads(result.output)
    assert data['group'] == {'kind': 'F2n', 'dimension': 3}
    assert len(data['elements']) == 8

    first = runner.invoke(cli, ['gen', '--family', 'convex:kind=random-gaps,n=10', '--seed', '3'])
    second = runner.invoke(cli, ['gen', '--family', 'convex:kind=random-gaps,n=10', '--seed', '3'])
    assert first.exit_code == 0 and first.output == second.output

    with runner.isolated_filesystem():
        result = runner.invoke(cli, ['gen', '--family', 'arithmetic-progression:n=5', '--out', 'ap.json'])
        assert result.exit_code == 0, result.output
        A = SetLoader(cache_dir=None, printlog=False).load_set('ap.json')
        assert A == FiniteSet(GroupDescriptor.integers(), range(5))
    print("gen 测试通过")


def test_compute_and_info():
    """测试 compute 与 info"""
    print("=== 测试 compute / info ===")
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _write_small()
        result = runner.invoke(cli, ['compute', '--set', path, '--s', '2.5'])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report['quantities']['E'] == 15
        assert report['quantities']['E_3'] == 33
        assert 'E_2.5' in report['quantities']
        assert abs(report['derived']['K'] - 1.8) < 1e-12

        result = runner.invoke(cli, ['info', '--set', path])
        assert result.exit_code == 0, result.output
        assert '集合大小: 3' in result.output
        assert 'E(A): 15' in result.output
    print("compute / info 测试通过")


def test_spectrum_and_dual():
    runner = CliRunner()
    result = runner.invoke(cli, ['spectrum', '--set', 'subgroup:dim=2'])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report['kind'] == 'sym-diff'
    assert all(c.get('pass', True) for c in report['checks'])

    result = runner.invoke(cli, ['spectrum', '--set', 'subgroup:dim=2', '--weight', 'file'])
    assert result.exit_code == 2

    result = runner.invoke(cli, ['dual', '--set', 'subgroup:dim=3'])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report['pair']['levels'] == [1, 2]
    assert 'connectivity' in report


def test_extract_and_trace():
    """测试 extract 与 trace"""
    print("=== 测试 extract / trace ===")
    runner = CliRunner()
    result = runner.invoke(cli, ['extract', 'e3', '--set', 'subgroup:dim=3'])
    assert result.exit_code == 0, result.output
    cert = json.loads(result.output)
    assert cert['pipeline'] == 'structure.e3'
    assert len(cert['A_prime']) == 8

    result = runner.invoke(cli, ['extract', 'e4t4', '--set', 'subgroup:dim=3', '--s', '2'])
    assert result.exit_code == 2

    result = runner.invoke(cli, ['trace', 'convex', '--set', 'convex:kind=squares,n=12', '--format', 'csv'])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == 'step,lhs,rhs,kind,holds'

    result = runner.invoke(cli, ['trace', 'convex', '--set', 'convex:kind=squares,n=12'])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)['values']['convex']
    print("extract / trace 测试通过")


def test_verify():
    """测试 verify 与退出码"""
    print("=== 测试 verify ===")
    runner = CliRunner()
    with runner.isolated_filesystem():
        path = _write_small()
        result = runner.invoke(cli, ['verify', '--suite', 'identities', '--family', 'subgroup:dim=2',
                                     '--set', path, '--filter', 'energies.*', '--out', 'report.json'])
        assert result.exit_code == 0, result.output
        assert os.path.exists('report.json')
        results = load_report('report.json')
        assert results and not any(r.failed for r in results)
        assert len({r.input_digest for r in results}) == 2

        result = runner.invoke(cli, ['verify', '--suite', 'identities', '--set', path,
                                     '--filter', 'energies.forms', '--out', 'report.csv', '--format', 'csv'])
        assert result.exit_code == 0, result.output
        assert load_report('report.csv')

        result = runner.invoke(cli, ['verify', '--suite', 'identities', '--out', 'none.json'])
        assert result.exit_code == 2
    print("verify 测试通过")


def test_errors():
    runner = CliRunner()
    result = runner.invoke(cli, ['compute', '--set', 'nosuch:n=3'])
    assert result.exit_code == 1
    assert 'nosuch' in result.output

    result = runner.invoke(cli, ['verify', '--suite', 'all', '--family', 'subgroup:dim=2',
                                 '--filter', 'nothing.*', '--out', 'x.json'])
    assert result.exit_code == 1


def main():
    """主测试函数"""
    print("开始命令行测试...\n")
    test_gen()
    test_compute_and_info()
    test_spectrum_and_dual()
    test_extract_and_trace()
    test_verify()
    test_errors()
    print("\n=== 所有测试完成 ===")


if __name__ == "__main__":
    main()
