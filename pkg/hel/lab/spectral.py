"""
算子与谱

把集合上的卷积算子写成稠密矩阵，用自带的循环 Jacobi 迭代求特征分解 / 奇异值分解，
并验证一组谱恒等式与不等式：
- 矩形算子 T^g_{A,B}(x,y) = g(x−y)，T̃^g_{A,B}(x,y) = g(x+y)，x ∈ A，y ∈ B
- 对称算子 T^g_A、T̃^g_A（B = A）
- 对偶集合给出的 Hermite 算子（由 dual_sets 构造）

特征值按 (−|μ|, −μ) 排序，每个特征向量第一个非零坐标为正，
因此特征函数均值 g_α 可复现。
"""

import hashlib
import itertools
import math
from dataclasses import dataclass

import numpy as np

from hel.lab.base_check import BaseCheck, CheckKind, make_result, skipped_result
from hel.lab.convolution import (
    as_function, convolve, correlate, digest_of, generalized_convolution_at, tensor_power, tensor_set,
)
from hel.lab.energies import (
    autocorrelation, energy, energy_moment, energy_pair, energy_pair_moment, sigma_weighted,
)
from hel.lab.exceptions import CapExceededError, ConvergenceError, PreconditionError
from hel.lab.group_core import FiniteSet, GroupFunction, require_same, sumset

JACOBI_TOL = 1e-13
MAX_SWEEPS = 64
MAX_DIM = 2048
SPECTRAL_TOL = 1e-8
ORTHO_TOL = 1e-9
SINGULAR_FLOOR = 1e-12
C3_WORK_CAP = 1 << 21
TENSOR_DIM_CAP = 512

OPERATOR_KINDS = ('rect-diff', 'rect-sum', 'sym-diff', 'sym-sum', 'dual-hermitian')


# ---------------------------------------------------------------- Jacobi

def _round_robin(n):
    """循环赛配对：每一轮给出互不相交的 (p, q)，一轮扫遍所有下标对"""
    m = n + (n % 2)
    order = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(order[i], order[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p), max(p)) for p in pairs if max(p) < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        order = [order[0], order[-1]] + order[1:-1]
    return rounds


def _rotate(a, v, p, q):
    apq = a[p, q]
    active = apq != 0.0
    if not active.any():
        return
    p, q, apq = p[active], q[active], apq[active]
    with np.errstate(over='ignore', divide='ignore'):
        theta = (a[q, q] - a[p, p]) / (2.0 * apq)
        t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c

    ap, aq = a[:, p], a[:, q]
    a[:, p] = c * ap - s * aq
    a[:, q] = s * ap + c * aq
    ap, aq = a[p, :], a[q, :]
    a[p, :] = c[:, None] * ap - s[:, None] * aq
    a[q, :] = s[:, None] * ap + c[:, None] * aq
    a[p, q] = 0.0
    a[q, p] = 0.0

    vp, vq = v[:, p], v[:, q]
    v[:, p] = c * vp - s * vq
    v[:, q] = s * vp + c * vq


def jacobi_eigh(matrix, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """
    对称矩阵的循环 Jacobi 特征分解

    每一轮对互不相交的下标对同时做旋转，一次扫描覆盖全部下标对。
    非对角 Frobenius 范数不超过 tol 倍对角范数时停止。

    参数：
    - matrix: 实对称方阵
    - tol: 收敛阈值
    - max_sweeps: 扫描次数上限

    返回：
    - tuple: (特征值, 特征向量按列, 扫描次数)，未排序
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f'需要方阵，实际形状 {a.shape}')
    n = a.shape[0]
    scale = max(1.0, float(np.abs(a).max())) if n else 1.0
    if n and float(np.abs(a - a.T).max()) > 1e-12 * scale:
        raise PreconditionError('Jacobi 迭代要求对称矩阵')
    a = (a + a.T) / 2.0
    v = np.eye(n)
    off_mask = ~np.eye(n, dtype=bool)
    rounds = _round_robin(n)
    for sweep in range(max_sweeps + 1):
        off = float(np.linalg.norm(a[off_mask]))
        if off == 0.0 or off <= tol * float(np.linalg.norm(np.diag(a))):
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p, q in rounds:
            _rotate(a, v, p, q)
    raise ConvergenceError(f'Jacobi 迭代 {max_sweeps} 次扫描后未收敛 (n={n}, off={off:.3e})')


def _normalize_signs(left, right=None):
    """每列第一个非零坐标取正；right 跟随 left 一起翻转"""
    for j in range(left.shape[1]):
        col = left[:, j]
        peak = float(np.abs(col).max()) if col.size else 0.0
        if peak == 0.0:
            continue
        first = int(np.flatnonzero(np.abs(col) > 1e-9 * peak)[0])
        if col[first] < 0:
            left[:, j] = -col
            if right is not None:
                right[:, j] = -right[:, j]


def _complete_basis(basis, count):
    """用标准基做 Gram–Schmidt，把正交列补齐到 count 列"""
    rows = basis.shape[0]
    cols = [basis[:, j] for j in range(basis.shape[1])]
    for e in np.eye(rows):
        if len(cols) >= count:
            break
        w = e
        if cols:
            q = np.column_stack(cols)
            w = w - q @ (q.T @ w)
            w = w - q @ (q.T @ w)
        norm = float(np.linalg.norm(w))
        if norm > 1e-8:
            cols.append(w / norm)
    return np.column_stack(cols) if cols else np.zeros((rows, 0))


# ---------------------------------------------------------------- 分解

@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    特征分解（kind='eigen'）或奇异值分解（kind='singular'）

    eigen：values 为 μ_α，按 |μ| 降序；left 的列为 f_α
    singular：values 为 λ_j ≥ 0 降序；M = Σ λ_j u_j v_jᵀ，left 为 u，right 为 v
    """

    kind: str
    values: np.ndarray
    left: np.ndarray
    right: object = None
    sweeps: int = 0

    @property
    def symmetric(self):
        return self.kind == 'eigen'

    @property
    def main(self):
        """μ_0 或 λ_0"""
        return float(self.values[0]) if self.values.size else 0.0

    @property
    def means(self):
        """g_α = Σ_x f_α(x)"""
        return self.left.sum(axis=0)

    def reconstruct(self):
        right = self.left if self.symmetric else self.right
        return (self.left * self.values) @ right.T

    def orthonormality_residual(self):
        res = 0.0
        for basis in (self.left, None if self.symmetric else self.right):
            if basis is None or not basis.size:
                continue
            gram = basis.T @ basis
            res = max(res, float(np.abs(gram - np.eye(gram.shape[0])).max()))
        return res

    def to_json(self):
        data = {'kind': self.kind, 'values': [float(x) for x in self.values]}
        if self.symmetric:
            data['means'] = [float(x) for x in self.means]
        return data


def _eigen(matrix):
    values, vectors, sweeps = jacobi_eigh(matrix)
    order = np.lexsort((-values, -np.abs(values)))
    values, vectors = values[order], vectors[:, order].copy()
    _normalize_signs(vectors)
    return SpectralDecomposition('eigen', values, vectors, sweeps=sweeps)


def _singular(matrix):
    rows, cols = matrix.shape
    if cols > rows:
        dec = _singular(matrix.T)
        _normalize_signs(dec.right, dec.left)
        return SpectralDecomposition('singular', dec.values, dec.right, dec.left, dec.sweeps)
    _, v, sweeps = jacobi_eigh(matrix.T @ matrix)
    mv = matrix @ v
    lam = np.linalg.norm(mv, axis=0)
    order = np.argsort(-lam, kind='stable')
    lam, v, mv = lam[order], v[:, order].copy(), mv[:, order]
    top = float(lam[0]) if lam.size else 0.0
    kept = int(np.count_nonzero(lam > SINGULAR_FLOOR * top)) if top > 0 else 0
    basis = np.zeros((rows, 0))
    if kept:
        q, r = np.linalg.qr(mv[:, :kept])
        basis = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    u = _complete_basis(basis, cols)
    _normalize_signs(u, v)
    return SpectralDecomposition('singular', lam, u, v, sweeps)


def decompose_matrix(matrix, symmetric=None):
    """
    分解任意实矩阵

    参数：
    - matrix: 二维数组
    - symmetric: True 时做特征分解，False 时做奇异值分解，None 时按矩阵是否对称自动选择

    返回：
    - SpectralDecomposition
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise PreconditionError('需要二维矩阵')
    if max(m.shape) > MAX_DIM:
        raise CapExceededError(f'矩阵维数 {max(m.shape)} 超过上限 {MAX_DIM}')
    if symmetric is None:
        symmetric = m.shape[0] == m.shape[1] and np.array_equal(m, m.T)
    return _eigen(m) if symmetric else _singular(m)


def matrix_digest(matrix):
    m = np.ascontiguousarray(np.asarray(matrix, dtype=float))
    h = hashlib.sha256(str(m.shape).encode())
    h.update(m.tobytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------- 算子

@dataclass(frozen=True, eq=False)
class GroupOperator:
    """
    稠密算子矩阵

    行、列按集合的规范顺序排列；dual-hermitian 类型没有权函数。
    """

    kind: str
    rows: FiniteSet
    cols: FiniteSet
    weight: object
    matrix: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def square(self):
        return not self.kind.startswith('rect')

    @property
    def digest(self):
        if self.weight is None:
            return matrix_digest(self.matrix)
        return digest_of([self.rows, self.cols, self.weight])

    def is_symmetric(self):
        return self.square and np.array_equal(self.matrix, self.matrix.T)

    def decompose(self):
        """对称时做特征分解，否则做奇异值分解"""
        return decompose_matrix(self.matrix, symmetric=self.is_symmetric())


def build_operator(kind, A, B=None, g=None, max_dim=MAX_DIM):
    """
    构造算子矩阵

    参数：
    - kind: 'rect-diff'、'rect-sum'、'sym-diff' 或 'sym-sum'
    - A: 行集合
    - B: 列集合，矩形算子要求 |B| ≤ |A|；对称算子忽略（取 A）
    - g: 实值权函数（GroupFunction，或按示性函数处理的 FiniteSet）
    - max_dim: 维数上限

    返回：
    - GroupOperator
    """
    if kind not in OPERATOR_KINDS or kind == 'dual-hermitian':
        raise PreconditionError(f'未知算子类型: {kind}')
    if g is None:
        raise PreconditionError('需要权函数 g')
    g = as_function(g)
    if kind.startswith('rect'):
        B = A if B is None else B
        if len(B) > len(A):
            raise PreconditionError(f'矩形算子要求 |B| ≤ |A|，实际 |B|={len(B)} > |A|={len(A)}')
    else:
        B = A
    G = require_same(A, B, g)
    if any(isinstance(v, complex) for v in g.values.values()):
        raise PreconditionError('只支持实值权函数')
    if max(len(A), len(B)) > max_dim:
        raise CapExceededError(f'算子维数 {max(len(A), len(B))} 超过上限 {max_dim}')
    combine = G.subtractor() if kind.endswith('diff') else G.adder()
    values = g.values
    matrix = np.array([[values.get(combine(x, y), 0) for y in B.elements] for x in A.elements],
                      dtype=float).reshape(len(A), len(B))
    return GroupOperator(kind, A, B, g, matrix)


def hermitian_operator(index, matrix):
    """由显式对称矩阵构造 dual-hermitian 算子"""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (len(index), len(index)):
        raise PreconditionError('矩阵形状与下标集合不符')
    if not np.array_equal(m, m.T):
        raise PreconditionError('dual-hermitian 算子必须对称')
    if len(index) > MAX_DIM:
        raise CapExceededError(f'算子维数 {len(index)} 超过上限 {MAX_DIM}')
    return GroupOperator('dual-hermitian', index, index, None, m)


def perron_vector(matrix, dec=None):
    """
    非负对称矩阵的 Perron 向量

    取 μ ≈ ρ(M) 的特征子空间，把全 1 向量投影进去再归一化，
    顶部特征值退化时依然得到非负向量。

    返回：
    - tuple: (ρ, 单位向量)
    """
    m = np.asarray(matrix, dtype=float)
    dec = dec or decompose_matrix(m, symmetric=True)
    n = m.shape[0]
    if not n:
        return 0.0, np.zeros(0)
    rho = float(np.abs(dec.values).max())
    top = np.flatnonzero(np.abs(dec.values - rho) <= SPECTRAL_TOL * (1.0 + rho))
    basis = dec.left[:, top]
    w = basis @ (basis.T @ np.ones(n))
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        return rho, dec.left[:, 0]
    return rho, w / norm


# ---------------------------------------------------------------- 分解不变量

def _entry_sum_squares(op):
    """Σ_{x∈A, y∈B} g(x∓y)²，精确"""
    G = op.rows.descriptor
    combine = G.subtractor() if op.kind.endswith('diff') else G.adder()
    g = op.weight.values
    return sum(g.get(combine(x, y), 0) ** 2 for x in op.rows.elements for y in op.cols.elements)


def _c3_gram(base, g, shifts, reflect):
    """
    [C_3(base, g, g)(±s, ±s')]_{s,s'}，精确整数表

    参数：
    - base: 求和集合
    - g: 权函数（调用方按需传入 g^c）
    - shifts: 下标元素
    - reflect: True 时在 −s 处求值
    """
    if len(base) * len(shifts) ** 2 > C3_WORK_CAP:
        raise CapExceededError('C_3 逐点求值计算量超过上限')
    G = base.descriptor
    neg = G.negator()
    points = [neg(s) if reflect else s for s in shifts]
    base_f = GroupFunction.indicator(base)
    size = len(points)
    table = [[0] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            table[i][j] = table[j][i] = generalized_convolution_at([base_f, g, g], (points[i], points[j]))
    return table


def _table_mismatch(matrix, table):
    ref = np.array(table, dtype=float).reshape(matrix.shape)
    return int(np.count_nonzero(np.abs(matrix - ref) > ORTHO_TOL * (1.0 + np.abs(ref))))


def _fourth_power_reference(op):
    """Σλ⁴ 的 C_3 形式：(f:sum_squares_eigenvalues'_1) 或 _2"""
    reflect = op.kind == 'rect-diff'
    table = _c3_gram(op.rows, op.weight, op.cols.elements, reflect)
    return sum(v * v for row in table for v in row)


def _symmetric_trace_laws(op, dec, d):
    A, g = op.rows, op.weight
    G = A.descriptor
    results = []
    if op.kind == 'sym-diff':
        if dec.symmetric:
            results.append(make_result(
                'spectral.trace.sum', 'f:sum_eigenvalues: Σμ_j(T^g_A) = g(0)|A|', CheckKind.EXACT, d,
                float(dec.values.sum()), g(G.zero) * len(A), atol=ORTHO_TOL))
        rhs = sum(v * v * autocorrelation(A)(z) for z, v in g.values.items())
        results.append(make_result(
            'spectral.trace.squares', 'f:sum_squares_eigenvalues: Σ|μ_j|² = Σ|g|²(A∘A)',
            CheckKind.EXACT, d, float(np.sum(dec.values ** 2)), rhs, atol=ORTHO_TOL))
    elif op.kind == 'sym-sum':
        results.append(make_result(
            'spectral.trace.sum', 'f:sum_eigenvalues: Σμ_j(T̃^g_A) = Σ_{x∈A} g(2x)', CheckKind.EXACT, d,
            float(dec.values.sum()), sum(g(G.multiple(x, 2)) for x in A.elements), atol=ORTHO_TOL))
        doubled = convolve(A, A)
        rhs = sum(v * v * doubled(z) for z, v in g.values.items())
        results.append(make_result(
            'spectral.trace.squares', 'f:sum_squares_eigenvalues: Σ|μ_j(T̃^g_A)|² = Σ|g|²(A*A)',
            CheckKind.EXACT, d, float(np.sum(dec.values ** 2)), rhs, atol=ORTHO_TOL))
    return results


def decomposition_checks(op, dec=None):
    """
    分解不变量：正交性、重构、迹公式

    参数：
    - op: GroupOperator
    - dec: 已有的分解，缺省时现算

    返回：
    - list of CheckResult
    """
    dec = dec or op.decompose()
    d = op.digest
    m = op.matrix
    fro = float(np.linalg.norm(m))
    recon = float(np.linalg.norm(m - dec.reconstruct())) / fro if fro else 0.0
    results = [
        make_result('spectral.orthonormal', 'l:singular_decomposition: orthonormal sequences',
                    CheckKind.EXACT, d, dec.orthonormality_residual(), 0, atol=ORTHO_TOL),
        make_result('spectral.reconstruct', 'f:M_singular_decomposition_basic: M = Σ λ_j u_j v_jᵀ',
                    CheckKind.EXACT, d, recon, 0, atol=ORTHO_TOL),
    ]
    squares = float(np.sum(dec.values ** 2))
    fourth = float(np.sum(dec.values ** 4))
    gram = m @ m.T
    results.append(make_result(
        'spectral.fourth_power', 'f:ractangular_norm_of_M: Σλ⁴ = Σ_{x,x\'} |Σ_y M(x,y)M(x\',y)|²',
        CheckKind.EXACT, d, fourth, float(np.sum(gram * gram)), atol=ORTHO_TOL))
    if op.kind == 'dual-hermitian':
        results.append(make_result('spectral.trace.sum', 'l:singular_decomposition: Σμ = tr M',
                                   CheckKind.EXACT, d, float(dec.values.sum()), float(np.trace(m)),
                                   atol=ORTHO_TOL))
        results.append(make_result('spectral.trace.squares', 'l:singular_decomposition: Σμ² = ‖M‖²_F',
                                   CheckKind.EXACT, d, squares, fro * fro, atol=ORTHO_TOL))
        return results
    if op.square:
        return results + _symmetric_trace_laws(op, dec, d)
    results.append(make_result(
        'spectral.trace.l2', "f:sum_eigenvalues': Σλ_j² = Σ_{x,y} |g(x∓y)|² A(x)B(y)",
        CheckKind.EXACT, d, squares, _entry_sum_squares(op), atol=ORTHO_TOL))
    label = "f:sum_squares_eigenvalues'_1" if op.kind == 'rect-diff' else "f:sum_squares_eigenvalues'_2"
    try:
        results.append(make_result('spectral.trace.l4', f'{label}: Σλ_j⁴ = Σ_{{y,y\'}} |C_3(A,g,g)|²',
                                   CheckKind.EXACT, d, fourth, _fourth_power_reference(op),
                                   atol=ORTHO_TOL))
    except CapExceededError as exc:
        results.append(skipped_result('spectral.trace.l4', label, CheckKind.EXACT, d, f'cap: {exc}'))
    return results


def spectrum_report(op, dec=None):
    """
    CLI spectrum 的输出：特征值 / 奇异值、特征函数均值与迹检查

    返回：
    - dict
    """
    dec = dec or op.decompose()
    report = {
        'kind': op.kind,
        'rows': len(op.rows),
        'cols': len(op.cols),
        'input_digest': op.digest,
        'decomposition': dec.kind,
        'sweeps': dec.sweeps,
        'eigenvalues' if dec.symmetric else 'singular_values': [float(x) for x in dec.values],
    }
    if dec.symmetric:
        report['means'] = [float(x) for x in dec.means]
    report['checks'] = [r.to_json() for r in decomposition_checks(op, dec)]
    return report


# ---------------------------------------------------------------- 检查

def operator_product_checks(A, B, g):
    """
    四个乘积公式：MᵀM 与 MMᵀ 写成 C_3，lhs 为不一致的矩阵元个数

    rect-diff：MᵀM(y,y') = C_3(A,g,g)(−y,−y')，MMᵀ(x,x') = C_3(B,g^c,g^c)(−x,−x')
    rect-sum：MᵀM(y,y') = C_3(A,g,g)(y,y')，MMᵀ(x,x') = C_3(B,g,g)(x,x')
    """
    g = as_function(g)
    diff = build_operator('rect-diff', A, B, g)
    plus = build_operator('rect-sum', A, B, g)
    d = diff.digest
    gc = g.reflect()
    cases = [
        ('spectral.product.diff_cols', 'f:TT*', diff.matrix.T @ diff.matrix,
         lambda: _c3_gram(A, g, B.elements, True)),
        ('spectral.product.sum_cols', 'f:TT*_tilde', plus.matrix.T @ plus.matrix,
         lambda: _c3_gram(A, g, B.elements, False)),
        ('spectral.product.diff_rows', 'f:T*T', diff.matrix @ diff.matrix.T,
         lambda: _c3_gram(B, gc, A.elements, True)),
        ('spectral.product.sum_rows', 'f:T*T_tilde', plus.matrix @ plus.matrix.T,
         lambda: _c3_gram(B, g, A.elements, False)),
    ]
    results = []
    for check_id, label, product, table in cases:
        try:
            mismatch = _table_mismatch(product, table())
        except CapExceededError as exc:
            results.append(skipped_result(check_id, label, CheckKind.EXACT, d, f'cap: {exc}'))
            continue
        results.append(make_result(check_id, f'{label}: operator product as C_3', CheckKind.EXACT,
                                   d, mismatch, 0))
    return results


def _require_containment(A, B, D, S):
    if D is None and S is None:
        raise PreconditionError('D 与 S 至少给出一个')
    if D is not None and not sumset(A, B, 1, -1).issubset(D):
        raise PreconditionError('需要 A−B ⊆ D')
    if S is not None and not sumset(A, B).issubset(S):
        raise PreconditionError('需要 A+B ⊆ S')


def _flat_deviation(vector, size):
    return float(np.abs(vector - 1.0 / math.sqrt(size)).max()) if size else 0.0


def rank_one_check(A, B, D=None, S=None):
    """
    A−B ⊆ D、A+B ⊆ S 时 T^D_{A,B}、T̃^S_{A,B} 秩为 1

    λ_0 = (|A||B|)^{1/2}，u_0 = A/|A|^{1/2}，v_0 = B/|B|^{1/2}，其余奇异值为零；
    B = A 时同时检查对称算子 T^D_A、T̃^S_A（μ_0 = |A|，其余特征值为零）。

    返回：
    - list of CheckResult
    """
    B = A if B is None else B
    _require_containment(A, B, D, S)
    results = []
    cases = []
    if D is not None:
        cases.append(('diff', build_operator('rect-diff', A, B, D)))
    if S is not None:
        cases.append(('sum', build_operator('rect-sum', A, B, S)))
    ref = "l:eigenvalues_D,S': λ_0 = (|A||B|)^{1/2}, all other singular values equal zero"
    for tag, op in cases:
        dec = op.decompose()
        d = op.digest
        lam0 = dec.main
        rest = float(np.abs(dec.values[1:]).max()) if dec.values.size > 1 else 0.0
        vectors = max(_flat_deviation(dec.left[:, 0], len(A)),
                      _flat_deviation(dec.right[:, 0] if dec.right is not None else dec.left[:, 0], len(B)))
        results += [
            make_result(f'spectral.rank_one.{tag}.main', ref, CheckKind.EXACT, d,
                        lam0, math.sqrt(len(A) * len(B)), atol=ORTHO_TOL),
            make_result(f'spectral.rank_one.{tag}.vectors', ref, CheckKind.EXACT, d,
                        vectors, 0, atol=ORTHO_TOL),
            make_result(f'spectral.rank_one.{tag}.rest', ref, CheckKind.EXACT, d,
                        rest, ORTHO_TOL * lam0, 'le'),
        ]
    if B == A:
        ref = 'l:eigenvalues_D,S: μ_0 = |A|, f_0 = A/|A|^{1/2}, all other eigenvalues equal zero'
        for tag, kind, w in (('diff', 'sym-diff', D), ('sum', 'sym-sum', S)):
            if w is None:
                continue
            op = build_operator(kind, A, g=w)
            dec = op.decompose()
            rest = float(np.abs(dec.values[1:]).max()) if dec.values.size > 1 else 0.0
            results += [
                make_result(f'spectral.rank_one.sym_{tag}.main', ref, CheckKind.EXACT, op.digest,
                            dec.main, len(A), atol=ORTHO_TOL),
                make_result(f'spectral.rank_one.sym_{tag}.vectors', ref, CheckKind.EXACT, op.digest,
                            _flat_deviation(dec.left[:, 0], len(A)), 0, atol=ORTHO_TOL),
                make_result(f'spectral.rank_one.sym_{tag}.rest', ref, CheckKind.EXACT, op.digest,
                            rest, ORTHO_TOL * len(A), 'le'),
            ]
    return results


def perron_frobenius_check(matrix):
    """
    非负对称矩阵的 ρ(M) 对应非负特征向量

    lhs 为 Perron 向量的最小坐标，rhs 为 −1e−9 倍最大坐标。
    """
    m = np.asarray(matrix, dtype=float)
    if (m < 0).any():
        raise PreconditionError('Perron–Frobenius 检查要求非负矩阵')
    dec = decompose_matrix(m, symmetric=True)
    rho, w = perron_vector(m, dec)
    peak = float(w.max()) if w.size else 0.0
    low = float(w.min()) if w.size else 0.0
    return make_result('spectral.perron_frobenius',
                       't:Perron-Frobenius: ρ(M) corresponds to a nonnegative eigenvector',
                       CheckKind.EXACT, matrix_digest(m), low, -ORTHO_TOL * peak, 'ge', rho=rho)


def diagonal_convexity_check(matrix, trials=8, seed=0):
    """
    Σ_i ⟨M x_i, x_i⟩² ≤ Σ_i μ_i²，x_i 取随机正交基（QR）与特征基本身

    lhs 为各次试验中的最大值。
    """
    m = np.asarray(matrix, dtype=float)
    dec = decompose_matrix(m, symmetric=True)
    rhs = float(np.sum(dec.values ** 2))
    rng = np.random.default_rng(seed)
    n = m.shape[0]
    worst = float(np.sum(np.einsum('ij,ij->j', dec.left, m @ dec.left) ** 2))
    for _ in range(trials):
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        diag = np.einsum('ij,ij->j', q, m @ q)
        worst = max(worst, float(np.sum(diag ** 2)))
    return make_result('spectral.convex_eigenvalues',
                       'l:convex_eigenvalues: Σ⟨Mx_i,x_i⟩² ≤ Σμ_i² over orthonormal systems',
                       CheckKind.EXPLICIT, matrix_digest(m), worst, rhs, 'le', trials=trials)


def weighted_energy_check(A, B, psi, D=None, S=None):
    """
    |A|² σ²(ψ,B) ≤ E_3(A,B) σ(ψ²,D)，以及把 D 换成 S 的版本

    参数：
    - A, B: 集合
    - psi: GroupFunction 或 FiniteSet
    - D, S: 满足 A−B ⊆ D、A+B ⊆ S 的集合，可只给一个

    返回：
    - list of CheckResult
    """
    _require_containment(A, B, D, S)
    psi = as_function(psi)
    require_same(A, B, psi)
    sigma = sigma_weighted(psi, B)
    lhs = len(A) ** 2 * sigma * sigma
    e3 = energy_pair_moment(A, B, 3)
    squared = psi.power(2)
    results = []
    for tag, label, w in (('D', "f:3/2_energy_D'", D), ('S', "f:3/2_energy_S'", S)):
        if w is None:
            continue
        results.append(make_result(
            f'spectral.energy_32.{tag}', f'{label}: |A|²σ²(ψ,B) ≤ E_3(A,B)σ(ψ²,{tag})',
            CheckKind.EXPLICIT, digest_of([A, B, psi, w]), lhs, e3 * sigma_weighted(squared, w), 'le'))
    return results


def li_inequality_check(A, B, sign=1):
    """
    |A|² E²_{3/2}(B) ≤ E_3(A,B) E(B,A±B) ≤ E_3(A)^{1/3} E_3(B)^{2/3} E(B,A±B)

    第二个不等式以立方形式 E_3(A,B)³ ≤ E_3(A) E_3(B)² 精确比较；
    另附 |A|⁶ ≤ E_3(A) Σ_{x∈A−A} ((A±A)∘(A±A))(x)。
    """
    if sign not in (1, -1):
        raise PreconditionError('sign 只能是 ±1')
    require_same(A, B)
    tag = 'plus' if sign == 1 else 'minus'
    d = digest_of([A, B])
    e3_ab = energy_pair_moment(A, B, 3)
    e_mixed = energy_pair(B, sumset(A, B, 1, sign))
    e32 = energy_moment(B, 1.5)
    e3_a = energy_moment(A, 3)
    a_pm = sumset(A, A, 1, sign)
    return [
        make_result(f'spectral.li.first.{tag}', 'f:Li: |A|²E²_{3/2}(B) ≤ E_3(A,B)E(B,A±B)',
                    CheckKind.EXPLICIT, d, len(A) ** 2 * e32 * e32, e3_ab * e_mixed, 'le'),
        make_result(f'spectral.li.second.{tag}', 'f:Li: E_3(A,B)³ ≤ E_3(A)E_3(B)²',
                    CheckKind.EXPLICIT, d, e3_ab ** 3, e3_a * energy_moment(B, 3) ** 2, 'le'),
        make_result(f'spectral.li.ss2.{tag}', 'f:Li corollary: |A|⁶ ≤ E_3(A)Σ_{x∈A−A}((A±A)∘(A±A))(x)',
                    CheckKind.EXPLICIT, A.digest, len(A) ** 6,
                    e3_a * sigma_weighted(sumset(A, A, 1, -1), a_pm), 'le'),
    ]


def _require_even(*gs):
    for g in gs:
        if not g.is_even():
            raise PreconditionError('权函数必须是偶函数 g(−x) = g(x)')


def mu_g_a_checks(A, g):
    """
    Σ μ_α g_α² = Σ g(A∘A)，Σ μ_α² g_α² = Σ_{x∈A} (g∘A)(x)²；
    g 非负时还有 Σ μ_α³ g_α² ≥ (Σ g(A∘A))³/|A|² 与 Carbery 不等式

    返回：
    - list of CheckResult
    """
    g = as_function(g)
    _require_even(g)
    op = build_operator('sym-diff', A, g=g)
    dec = op.decompose()
    d = op.digest
    means2 = dec.means ** 2
    sigma = sigma_weighted(g, A)
    corr = correlate(g, A)
    results = [
        make_result('spectral.mu_g_a.1', 'f:mu_g_a_1: Σ μ_α|g_α|² = Σ g(A∘A)', CheckKind.EXACT, d,
                    float(np.sum(dec.values * means2)), sigma, atol=ORTHO_TOL),
        make_result('spectral.mu_g_a.2', 'f:mu_g_a_2: Σ |μ_α|²|g_α|² = Σ_{x∈A} |(g∘A)(x)|²',
                    CheckKind.EXACT, d, float(np.sum(dec.values ** 2 * means2)),
                    sum(corr(x) ** 2 for x in A.elements), atol=ORTHO_TOL),
    ]
    if not g.is_nonnegative():
        for check_id, label in (('spectral.mu_g_a.3', 'f:mu_g_a_3'), ('spectral.carbery', 'tmp:20.12.2012_2')):
            results.append(skipped_result(check_id, label, CheckKind.EXPLICIT, d, 'precondition: g 含负值'))
        return results
    m = op.matrix
    rows, cols = m.sum(axis=1), m.sum(axis=0)
    results += [
        make_result('spectral.mu_g_a.3', 'f:mu_g_a_3: Σ μ_α|μ_α g_α|² ≥ (Σ g(A∘A))³/|A|²',
                    CheckKind.EXPLICIT, d, float(np.sum(dec.values ** 3 * means2)),
                    sigma ** 3 / len(A) ** 2, 'ge'),
        make_result('spectral.carbery', "tmp:20.12.2012_2: ⟨T1_A,1_A⟩³ ≤ |A|² Σ T(x,y)(Σ_a T(x,a))(Σ_b T(b,y))",
                    CheckKind.EXPLICIT, d, float(sigma) ** 3, len(A) ** 2 * float(rows @ m @ cols), 'le'),
    ]
    return results


def tensor_operator_check(A, g, t=2):
    """
    (T^g_A)^⊗ = T^{g^⊗}_{A^⊗} 的谱是基算子谱的全部 t 重乘积

    返回：
    - list of CheckResult：排序后谱的最大偏差、μ_0 的幂、乘积特征向量的残差
    """
    if t not in (2, 3):
        raise PreconditionError('t 只能取 2 或 3')
    g = as_function(g)
    if len(A) ** t > TENSOR_DIM_CAP:
        raise CapExceededError(f'|A|^t = {len(A) ** t} 超过上限 {TENSOR_DIM_CAP}')
    if len(g) ** t > 1 << 20:
        raise CapExceededError('g^⊗ 的支撑过大')
    _require_even(g)
    base = build_operator('sym-diff', A, g=g)
    power = build_operator('sym-diff', tensor_set(A, t), g=tensor_power(g, t))
    bdec, pdec = base.decompose(), power.decompose()
    products = np.array([math.prod(c) for c in itertools.product(bdec.values, repeat=t)])
    mu0 = abs(bdec.main)
    tol = SPECTRAL_TOL * (1.0 + mu0 ** t)
    deviation = float(np.abs(np.sort(products) - np.sort(pdec.values)).max()) if products.size else 0.0
    vectors = bdec.left
    for _ in range(t - 1):
        vectors = np.kron(vectors, bdec.left)
    residual = float(np.abs(power.matrix @ vectors - vectors * products).max()) if products.size else 0.0
    d = digest_of([A, g])
    ref = 'l:tensor_operator: spectrum of the t-tensor power = all t-products'
    return [
        make_result(f'spectral.tensor_operator.t{t}', ref, CheckKind.EXACT, d, deviation, 0, atol=tol),
        make_result(f'spectral.tensor_operator.main.t{t}', 'l:tensor_operator: μ_0(T^⊗) = μ_0^t',
                    CheckKind.EXACT, d, abs(pdec.main), mu0 ** t, rtol=SPECTRAL_TOL),
        make_result(f'spectral.tensor_operator.vectors.t{t}', ref, CheckKind.EXACT, d,
                    residual, 0, atol=tol),
    ]


def g_bound_checks(A, g, g1=None):
    """
    非负偶权函数 g 的主特征函数估计

    |A| ≥ (Σ f_0)² ≥ max{μ_0/‖g‖_∞, μ_0²/‖g‖_2²}，‖f_0‖_∞ ≤ ‖g‖_2/μ_0；
    给出 g_1（g = g_1∘g_1）时 ‖f_0‖_∞ ≤ ‖g_1‖_2/μ_0^{1/2}；
    以及 μ_0(T^{A∘A}_A) ≥ μ_0(T^g_A)³/(‖g‖_2²‖g‖_∞)。
    """
    g = as_function(g)
    if not g.is_nonnegative():
        raise PreconditionError('g 必须非负')
    if not len(g):
        raise PreconditionError('g 不能恒为零')
    _require_even(g)
    op = build_operator('sym-diff', A, g=g)
    dec = op.decompose()
    mu0, f0 = perron_vector(op.matrix, dec)
    d = op.digest
    mass = float(f0.sum()) ** 2
    sup, l2sq = float(g.sup_norm()), float(g.l2_squared())
    top = float(np.abs(f0).max())
    results = [
        make_result('spectral.g_bound.size', 'f:g_bound: |A| ≥ (Σ f_0)²', CheckKind.EXPLICIT, d,
                    mass, len(A), 'le'),
        make_result('spectral.g_bound.sup', 'f:g_bound: (Σ f_0)² ≥ μ_0/‖g‖_∞', CheckKind.EXPLICIT, d,
                    mass, mu0 / sup, 'ge'),
        make_result('spectral.g_bound.l2', 'f:g_bound: (Σ f_0)² ≥ μ_0²/‖g‖_2²', CheckKind.EXPLICIT, d,
                    mass, mu0 * mu0 / l2sq, 'ge'),
    ]
    if mu0 > 0:
        results.append(make_result('spectral.L_infty', 'f:L_infty: ‖f_0‖_∞ ≤ ‖g‖_2/μ_0',
                                   CheckKind.EXPLICIT, d, top, math.sqrt(l2sq) / mu0, 'le'))
    else:
        results.append(skipped_result('spectral.L_infty', 'f:L_infty', CheckKind.EXPLICIT, d,
                                      'precondition: μ_0 = 0'))
    if g1 is not None:
        g1 = as_function(g1)
        if correlate(g1, g1) != g:
            raise PreconditionError('需要 g = g_1∘g_1')
        results.append(make_result("spectral.L_infty_prime", "f:L_infty': ‖f_0‖_∞ ≤ ‖g_1‖_2/μ_0^{1/2}",
                                   CheckKind.EXPLICIT, d, top,
                                   math.sqrt(g1.l2_squared() / mu0) if mu0 > 0 else math.inf, 'le'))
    energy_op = build_operator('sym-diff', A, g=autocorrelation(A))
    results.append(make_result('spectral.mu_energy_mu_g',
                               'f:mu_energy_mu_g: μ_0(T^{A∘A}_A) ≥ μ³(T^g_A)/(‖g‖_2²‖g‖_∞)',
                               CheckKind.EXPLICIT, d, energy_op.decompose().main,
                               mu0 ** 3 / (l2sq * sup), 'ge'))
    return results


def triangles_identity_check(A, g1, g2):
    """
    Σ_{x,y,z∈A} g_1(x−y)g_1(x−z)g_2(y−z) = Σ_α μ_α²(T^{g_1}_A)⟨T^{g_2}_A f_α, f_α⟩
    """
    g1, g2 = as_function(g1), as_function(g2)
    _require_even(g1, g2)
    op1 = build_operator('sym-diff', A, g=g1)
    op2 = build_operator('sym-diff', A, g=g2)
    m1, m2 = op1.matrix, op2.matrix
    lhs = float(np.sum((m1 @ m1) * m2))
    dec = op1.decompose()
    quad = np.einsum('ij,ij->j', dec.left, m2 @ dec.left)
    rhs = float(np.sum(dec.values ** 2 * quad))
    return make_result('spectral.triangles', 'p:triangles_g: Σ g_1g_1g_2 over triangles = Σ μ_α²⟨T^{g_2}f_α,f_α⟩',
                       CheckKind.EXACT, digest_of([A, g1, g2]), lhs, rhs, atol=ORTHO_TOL)


def abs_spectrum_check(A, g):
    """对偶函数 g：λ_j(T^g_{A,A}) = |μ_j(T^g_A)|（多重集合）"""
    g = as_function(g)
    _require_even(g)
    sym = build_operator('sym-diff', A, g=g)
    rect = build_operator('rect-diff', A, A, g)
    mu = np.sort(np.abs(sym.decompose().values))
    lam = np.sort(decompose_matrix(rect.matrix, symmetric=False).values)
    tol = SPECTRAL_TOL * (1.0 + (float(mu[-1]) if mu.size else 0.0))
    deviation = float(np.abs(mu - lam).max()) if mu.size else 0.0
    return make_result('spectral.abs_spectrum', 'λ_j(T^g_{A,A}) = |μ_j(T^g_A)| for even real g',
                       CheckKind.EXACT, sym.digest, deviation, 0, atol=tol)


def rayleigh_check(A):
    """μ_0(T^{A∘A}_A) ≥ E(A)/|A|"""
    op = build_operator('sym-diff', A, g=autocorrelation(A))
    return make_result('spectral.rayleigh', 'cor:mu_energy_mu_g setup: μ_0(T^{A∘A}_A) ≥ E(A)/|A|',
                       CheckKind.EXPLICIT, A.digest, op.decompose().main, energy(A) / len(A), 'ge')


def fourth_power_trace_check(matrix):
    """Σλ⁴ = Σ_{x,x'} |Σ_y M(x,y)M(x',y)|²，任意实矩阵"""
    m = np.asarray(matrix, dtype=float)
    dec = decompose_matrix(m, symmetric=False)
    gram = m @ m.T
    return make_result('spectral.fourth_power', 'f:ractangular_norm_of_M: Σλ⁴ = Σ|Σ_y M(x,y)M(x\',y)|²',
                       CheckKind.EXACT, matrix_digest(m), float(np.sum(dec.values ** 4)),
                       float(np.sum(gram * gram)), atol=ORTHO_TOL)


class SpectrumAnalyzer(BaseCheck):
    """
    构造算子、分解并检查全部分解不变量

    参数：
    - max_dim: 算子维数上限
    - printlog: 是否打印日志
    """

    check_id = 'spectral.analyzer'
    ref = 'l:singular_decomposition'

    params = (
        ('max_dim', MAX_DIM),
    )

    def run(self, kind, A, B=None, g=None):
        op = build_operator(kind, A, B, g, max_dim=self.p.max_dim)
        self.log(f'{kind}: {op.shape[0]}×{op.shape[1]}')
        dec = op.decompose()
        self.log(f'{dec.kind} 分解，{dec.sweeps} 次扫描，主值 {dec.main:.6g}')
        report = spectrum_report(op, dec)
        failed = [c['check_id'] for c in report['checks'] if c.get('pass') is False]
        if failed:
            self.log(f'不变量未通过: {", ".join(failed)}')
        return report
