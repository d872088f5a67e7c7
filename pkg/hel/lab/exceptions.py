"""
异常定义

实验室所有模块共用的异常层次，根类为 LabError。
每个子类同时继承最接近的内建异常，调用方可以按任一类型捕获。
"""


class LabError(Exception):
    """实验室异常的根类"""


class DescriptorMismatchError(LabError, ValueError):
    """两个操作数属于不同的群"""


class PreconditionError(LabError, ValueError):
    """违反操作的前置条件（包含关系、权重奇偶性、参数范围等）"""


class CapExceededError(LabError, ValueError):
    """超出物理规模上限"""


class ConvergenceError(LabError, RuntimeError):
    """Jacobi 迭代在扫描次数上限内未收敛"""


class PipelineAbort(LabError, RuntimeError):
    """
    结构提取流程遇到退化的中间结果

    trace 保存中止前已经完成的步骤，便于排查。
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class GeneratorError(LabError, ValueError):
    """生成器参数不合法或生成结果不满足声明的结构性质"""


class UnknownCheckError(LabError, KeyError):
    """未知的检查编号或检查套件"""

    def __str__(self):
        return str(self.args[0]) if self.args else ''


class ReportError(LabError, OSError):
    """报告无法写入或读取"""
