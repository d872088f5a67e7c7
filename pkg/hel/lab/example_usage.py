"""
实验室使用示例

展示如何生成集合、计算能量、运行结构提取并批量验证
"""

from hel.lab import (
    DualSetAnalyzer,
    E3Pipeline,
    SetLoader,
    SpectrumAnalyzer,
    VerifyUtils,
    energy_report,
)
from hel.lab.energies import autocorrelation
from hel.lab.structure import convex_pipeline_trace


def main():
    """
    主函数：演示实验室的使用方法
    """
    print("=== 高阶能量验证演示 ===")

    # 1. 生成集合
    print("\n1. 生成集合...")
    loader = SetLoader()
    convex = loader.load_family('convex:kind=squares,n=48').set
    subgroup = loader.load_family('subgroup:dim=4').set

    # 2. 能量报告
    print("\n2. 计算能量报告...")
    report = energy_report(convex, s_values=(2.5,))
    print(report.to_frame())

    # 3. 算子谱
    print("\n3. 构造 sym-diff 算子...")
    spectrum = SpectrumAnalyzer(max_dim=256).run('sym-diff', convex, None, autocorrelation(convex))
    print(f"主特征值: {spectrum['eigenvalues'][0]:.4f}")

    # 4. 对偶集合
    print("\n4. 对偶集合...")
    dual = DualSetAnalyzer(k=2).run(subgroup)
    print(f"层号: {dual['pair']['levels']}，|P| = {len(dual['pair']['P'])}")

    # 5. 结构提取
    print("\n5. 运行 E_3 结构提取...")
    cert = E3Pipeline(s=2, printlog=True).run(subgroup)
    print(f"|A′| = {cert.measured['size']}，增长 {cert.measured['growth']}")

    # 6. 凸集证明链
    print("\n6. 凸集证明链...")
    trace = convex_pipeline_trace(convex, printlog=True)
    print(trace.to_frame())

    # 7. 批量验证与集合族对比
    # print("\n7. 批量验证...")
    # utils = VerifyUtils(jobs=2, printlog=True)
    # results = utils.run_verify('all', ['convex:kind=squares,n=32', 'subgroup:dim=4'])
    # print(utils.to_frame(results))

    # utils.compare_families([
    #     'convex:kind=squares,n=64',
    #     'arithmetic-progression:n=64',
    #     'geometric:n=16',
    #     'H-plus-dissociated:n=8,hdim=4,lam=4',
    # ])

    print("\n=== 演示完成 ===")


def quick_test():
    """
    快速测试函数：单个规模扫描
    """
    print("=== 快速测试 ===")

    utils = VerifyUtils(printlog=True)
    scan = utils.scan_sizes('convex', [32, 64, 128], kind='squares')
    print(scan[['n', 'C_E3', 'C_E']])

    print("快速测试完成")


if __name__ == "__main__":
    # 运行完整演示
    main()

    # 或者运行快速测试
    # quick_test()
