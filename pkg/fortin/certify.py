"""
Fortin 算子的离线验证

- 约束块满列秩（65×35、45×15）与对偶基矩阵 |det A|
- 随机多项式输入下的正交关系：对任意离散试探函数 b(x_h; Πv) = b(x_h; v)
- 交换性质、幂等性、有界性（含单元尺寸缩放下的稳定性）
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from config import FORTIN_MODE, FORTIN_SAMPLES, FORTIN_TOLERANCE, RANDOM_SEED, RANK_TOLERANCE
from dpg.local import b_rows_tau, b_rows_theta, b_rows_xi, b_rows_z
from dpg.scheme import Scheme
from dpg.test_space import divdiv_norm, divdiv_vector_norm, h2_norm
from fortin.divdiv import (
    REFERENCE_MAP, ddiv_operator, divdiv_vector_operator, fortin_ddiv, fortin_divdiv_vector,
)
from fortin.dual_basis import DET_TOLERANCE, build_dual_basis
from fortin.ggrad import fortin_ggrad_element
from mesh.triangulation import REFERENCE_VERTICES, AffineMap
from poly.fields import FieldKind, PolyField
from poly.projection import l2_inner, l2_project
from transforms.piola import push_tensor, push_vector
from utils.error_handler import CertificationError, DegenerateElementError
from utils.logger import logger

SURROGATE_DEGREE = 6
H_SCALES = (1.0, 0.5, 0.25, 0.125)
STABILITY_SPREAD = 0.2
TRIANGULAR_TOLERANCE = 1e-13
DUALITY_TOLERANCE = 1e-12
BLOCKS = ("dual_basis", "divdiv_vector", "ddiv")


@dataclass
class Certificate:
    name: str
    value: float
    threshold: float
    passed: bool
    block: Optional[str] = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name:<34} {self.value:.3e}  (阈值 {self.threshold:.0e})"
        return f"{text}  {self.detail}" if self.detail else text


def _at_least(name: str, value: float, threshold: float, **kwargs) -> Certificate:
    return Certificate(name, value, threshold, bool(value > threshold), **kwargs)


def _at_most(name: str, value: float, threshold: float, **kwargs) -> Certificate:
    return Certificate(name, value, threshold, bool(value < threshold), **kwargs)


def _failed(name: str, block: str, error: Exception) -> Certificate:
    return Certificate(name, float("nan"), float("nan"), False, block=block, detail=str(error))


# ----------------------------------------------------------------------
# 随机单元与范数
# ----------------------------------------------------------------------
def _min_angle(X: np.ndarray) -> float:
    angles = []
    for k in range(3):
        a, b = X[(k + 1) % 3] - X[k], X[(k + 2) % 3] - X[k]
        cos = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        angles.append(math.acos(float(np.clip(cos, -1.0, 1.0))))
    return min(angles)


def random_shape(rng: np.random.Generator, min_angle: float = math.radians(20.0)) -> np.ndarray:
    """直径为 1、最小角不小于 min_angle 的随机正向三角形（以第一个顶点为原点）"""
    while True:
        X = REFERENCE_VERTICES + 0.3 * rng.standard_normal((3, 2))
        try:
            amap = AffineMap.from_vertices(X)
        except DegenerateElementError:
            continue
        if _min_angle(X) < min_angle:
            continue
        phi = rng.uniform(0.0, 2.0 * math.pi)
        R = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
        return R @ amap.B / amap.h


def random_affine_map(rng: np.random.Generator, h: float = 1.0) -> AffineMap:
    B0 = random_shape(rng)
    return AffineMap.from_matrix(h * B0, rng.uniform(-1.0, 1.0, size=2))


def _norm(f: PolyField) -> float:
    return float(np.sqrt(max(float(l2_inner(f, f)), 0.0)))


def _relative(diff: float, scale: float) -> float:
    return diff / max(1.0, scale)


def weighted_h2_norm(z: PolyField) -> float:
    """h⁻²‖z‖² + h²‖ε∇z‖²，对相似缩放不变"""
    h = z.amap.h
    return math.sqrt(_norm(z) ** 2 / h**2 + h**2 * _norm(z.hessian()) ** 2)


def weighted_divdiv_vector_norm(xi: PolyField, tau: PolyField) -> float:
    """h⁻²‖Ξ‖² + ‖DivΞ − τ‖² + h²‖div τ‖²"""
    h = xi.amap.h
    return math.sqrt(_norm(xi) ** 2 / h**2 + _norm(xi.div_rows() - tau) ** 2
                     + h**2 * _norm(tau.div()) ** 2)


def weighted_divdiv_norm(theta: PolyField) -> float:
    """h⁻²‖Θ‖² + h²‖divDivΘ‖²"""
    h = theta.amap.h
    return math.sqrt(_norm(theta) ** 2 / h**2 + h**2 * _norm(theta.divdiv()) ** 2)


# ----------------------------------------------------------------------
# 秩与行列式
# ----------------------------------------------------------------------
def certify_constraint_ranks(corrupt: Optional[str] = None, tol: float = RANK_TOLERANCE,
                             strict: bool = True) -> List[Certificate]:
    """三个块的证书；strict 时第一个失败的块抛 CertificationError"""
    if corrupt is not None and corrupt not in BLOCKS:
        raise ValueError(f"未知约束块 {corrupt}，可选 {BLOCKS}")
    certificates: List[Certificate] = []

    try:
        dual = build_dual_basis(REFERENCE_MAP, corrupt=corrupt == "dual_basis")
        certificates += [
            _at_least("dual_basis.|det A|", abs(dual.det), DET_TOLERANCE, block="dual_basis",
                      detail=f"det A₃ = {np.linalg.det(dual.A3):.6f}"),
            _at_most("dual_basis.triangular", dual.triangular_defect(), TRIANGULAR_TOLERANCE,
                     block="dual_basis"),
            _at_most("dual_basis.duality", dual.duality_residual(), DUALITY_TOLERANCE,
                     block="dual_basis"),
        ]
    except CertificationError as e:
        certificates.append(_failed("dual_basis.|det A|", "dual_basis", e))

    expected = {"divdiv_vector": (65, 35), "ddiv": (45, 15)}
    for block, factory in (("divdiv_vector", divdiv_vector_operator), ("ddiv", ddiv_operator)):
        system = factory(corrupt=corrupt == block).system
        shape_ok = system.shape == expected[block]
        sigma = system.smallest_singular_value()
        cert = _at_least(f"{block}.sigma_min", sigma, tol, block=block,
                         detail=f"C {system.shape[0]}×{system.shape[1]}")
        cert.passed = cert.passed and shape_ok
        certificates.append(cert)

    if strict:
        for cert in certificates:
            if not cert.passed:
                raise CertificationError(f"约束块 {cert.block} 验证失败: {cert.line()}", block=cert.block)
    return certificates


# ----------------------------------------------------------------------
# 正交、交换与幂等
# ----------------------------------------------------------------------
def _update_max(target: Dict[str, float], values: Dict[str, float]) -> None:
    for key, value in values.items():
        target[key] = max(target.get(key, 0.0), value)


def orthogonality_residuals(rng: np.random.Generator, samples: int = FORTIN_SAMPLES,
                            mode: str = FORTIN_MODE) -> Dict[str, float]:
    """随机单元上随机六次输入的最大相对残差"""
    theta_scheme, plain_scheme = Scheme.theta(), Scheme.plain(4)
    lt, lp = theta_scheme.trial_layout, plain_scheme.trial_layout
    worst: Dict[str, float] = {}
    for _ in range(samples):
        amap = random_affine_map(rng)
        z = PolyField.random(FieldKind.SCALAR, SURROGATE_DEGREE, rng, amap=amap)
        xi = PolyField.random(FieldKind.TENSOR, SURROGATE_DEGREE, rng, amap=amap)
        tau = PolyField.random(FieldKind.VECTOR, SURROGATE_DEGREE, rng, amap=amap)
        q = PolyField.random(FieldKind.TENSOR, SURROGATE_DEGREE, rng, amap=amap)

        pz = fortin_ggrad_element(z, amap)
        pxi, ptau = fortin_divdiv_vector(xi, tau, amap, mode)
        pq = fortin_ddiv(q, amap, mode)

        # theta 格式：z 行与 (Ξ, τ) 行
        rz, rpz = b_rows_z(theta_scheme, amap, z), b_rows_z(theta_scheme, amap, pz)
        rv = b_rows_xi(theta_scheme, amap, xi) + b_rows_tau(theta_scheme, amap, tau)
        rpv = b_rows_xi(theta_scheme, amap, pxi) + b_rows_tau(theta_scheme, amap, ptau)
        _update_max(worst, {
            "ggrad.qhat_pairing": _relative(float(np.max(np.abs(rz[lt["qhat"]] - rpz[lt["qhat"]]))),
                                            float(np.max(np.abs(rz)))),
            "ggrad.moment_volume": _relative(float(np.max(np.abs(rz[lt["M"]] - rpz[lt["M"]]))),
                                             float(np.max(np.abs(rz)))),
        })
        scale = float(np.max(np.abs(rv)))
        _update_max(worst, {
            f"divdiv_vector.{name}": _relative(float(np.max(np.abs(rv[lt[block]] - rpv[lt[block]]))), scale)
            for block, name in (("u", "u_div"), ("theta", "theta_shear"), ("M", "moment_volume"),
                                ("uhat", "uhat_pairing"))
        })

        # plain 格式：Θ 行
        rq, rpq = b_rows_theta(plain_scheme, amap, q), b_rows_theta(plain_scheme, amap, pq)
        scale = float(np.max(np.abs(rq)))
        _update_max(worst, {
            f"ddiv.{name}": _relative(float(np.max(np.abs(rq[lp[block]] - rpq[lp[block]]))), scale)
            for block, name in (("u", "u_divdiv"), ("M", "moment_volume"), ("uhat", "uhat_pairing"))
        })

        _update_max(worst, commutativity_residuals(xi, tau, q, (pxi, ptau), pq))
        _update_max(worst, idempotence_residuals(z, pz, (pxi, ptau), pq, amap, mode))

        z_affine = PolyField.random(FieldKind.SCALAR, 1, rng, amap=amap)
        diff = fortin_ggrad_element(z_affine, amap) - z_affine
        _update_max(worst, {"ggrad.kernel": _relative(_norm(diff), _norm(z_affine))})
    return worst


def commutativity_residuals(xi: PolyField, tau: PolyField, q: PolyField,
                            projected_xt, projected_q: PolyField) -> Dict[str, float]:
    """DivΠΞ − Πτ = Π³(DivΞ − τ)，div Πτ = Π² div τ，divDiv ΠQ = Π² divDiv Q"""
    pxi, ptau = projected_xt
    shear_proj = l2_project(xi.div_rows() - tau, 3)
    div_proj = l2_project(tau.div(), 2)
    dd_proj = l2_project(q.divdiv(), 2)
    return {
        "divdiv_vector.commute_shear": _relative(_norm(pxi.div_rows() - ptau - shear_proj), _norm(shear_proj)),
        "divdiv_vector.commute_div": _relative(_norm(ptau.div() - div_proj), _norm(div_proj)),
        "ddiv.commute_divdiv": _relative(_norm(projected_q.divdiv() - dd_proj), _norm(dd_proj)),
    }


def idempotence_residuals(z: PolyField, pz: PolyField, projected_xt, pq: PolyField,
                          amap: AffineMap, mode: str = FORTIN_MODE) -> Dict[str, float]:
    """Π∘Π = Π"""
    pxi, ptau = projected_xt
    ppz = fortin_ggrad_element(pz, amap)
    ppxi, pptau = fortin_divdiv_vector(pxi, ptau, amap, mode)
    ppq = fortin_ddiv(pq, amap, mode)
    return {
        "ggrad.idempotence": _relative(_norm(ppz - pz), _norm(pz)),
        "divdiv_vector.idempotence": _relative(_norm(ppxi - pxi) + _norm(pptau - ptau),
                                               _norm(pxi) + _norm(ptau)),
        "ddiv.idempotence": _relative(_norm(ppq - pq), _norm(pq)),
    }


# ----------------------------------------------------------------------
# 有界性
# ----------------------------------------------------------------------
@dataclass
class BoundednessReport:
    samples: int
    max_ratio: Dict[str, float]
    discrete_ratio: Dict[str, float]
    h_ratios: Dict[str, List[float]]
    h_weighted_ratios: Dict[str, List[float]]

    def spread(self, name: str) -> float:
        """同一参考输入在不同 h 下加权比值的相对变化"""
        values = self.h_weighted_ratios[name]
        return (max(values) - min(values)) / min(values)

    @property
    def finite(self) -> bool:
        return all(np.isfinite(v) for v in self.max_ratio.values())

    @property
    def stable(self) -> bool:
        return all(self.spread(name) < STABILITY_SPREAD for name in self.h_weighted_ratios)


def _ratios(z: PolyField, xi: PolyField, tau: PolyField, q: PolyField, mode: str,
            weighted: bool = False) -> Dict[str, float]:
    amap = z.amap
    pz = fortin_ggrad_element(z, amap)
    pxi, ptau = fortin_divdiv_vector(xi, tau, amap, mode)
    pq = fortin_ddiv(q, amap, mode)
    if weighted:
        return {
            "ggrad": weighted_h2_norm(pz) / weighted_h2_norm(z),
            "divdiv_vector": weighted_divdiv_vector_norm(pxi, ptau) / weighted_divdiv_vector_norm(xi, tau),
            "ddiv": weighted_divdiv_norm(pq) / weighted_divdiv_norm(q),
        }
    return {
        "ggrad": h2_norm(pz) / h2_norm(z),
        "divdiv_vector": divdiv_vector_norm(pxi, ptau) / divdiv_vector_norm(xi, tau),
        "ddiv": divdiv_norm(pq) / divdiv_norm(q),
    }


def _random_inputs(rng: np.random.Generator, amap: AffineMap):
    return tuple(PolyField.random(kind, SURROGATE_DEGREE, rng, amap=amap)
                 for kind in (FieldKind.SCALAR, FieldKind.TENSOR, FieldKind.VECTOR, FieldKind.TENSOR))


def _discrete_inputs(rng: np.random.Generator, amap: AffineMap):
    """span η 中的 z、离散 (Ξ, τ) 与离散 Q"""
    dual = build_dual_basis(amap)
    vec_op, dd_op = divdiv_vector_operator(), ddiv_operator()
    z = dual.eta.combine(rng.standard_normal(9))
    x = rng.standard_normal(vec_op.system.n_trial)
    xi = push_tensor(amap, vec_op.xi_trial.combine(x))
    tau = push_vector(amap, vec_op.tau_trial.combine(x))
    q = push_tensor(amap, dd_op.trial.combine(rng.standard_normal(dd_op.system.n_trial)))
    return z, xi, tau, q


def verify_fortin_boundedness(n: int = FORTIN_SAMPLES, seed: int = RANDOM_SEED,
                              mode: str = FORTIN_MODE) -> BoundednessReport:
    """随机单元上 ‖Πv‖_V / ‖v‖_V 的最大值，以及 h ∈ {1, 1/2, 1/4, 1/8} 下的稳定性"""
    if n < 1:
        raise ValueError("样本数至少为 1")
    rng = np.random.default_rng(seed)
    max_ratio: Dict[str, float] = {}
    discrete_ratio: Dict[str, float] = {}
    for _ in range(n):
        amap = random_affine_map(rng)
        _update_max(max_ratio, _ratios(*_random_inputs(rng, amap), mode))
        # norm 模式只在参考单元上保证 ‖Π̂v̂‖ ≤ ‖v̂‖
        discrete_map = amap if mode == "distance" else REFERENCE_MAP
        _update_max(discrete_ratio, _ratios(*_discrete_inputs(rng, discrete_map), mode))

    # 同一参考输入与单元形状，仅改变尺寸
    B0 = random_shape(rng)
    z_hat, xi_hat, tau_hat, q_hat = _random_inputs(rng, None)
    h_ratios: Dict[str, List[float]] = {}
    h_weighted: Dict[str, List[float]] = {}
    for h in H_SCALES:
        amap = AffineMap.from_matrix(h * B0)
        z = z_hat.with_map(amap)
        xi, tau, q = push_tensor(amap, xi_hat), push_vector(amap, tau_hat), push_tensor(amap, q_hat)
        for name, value in _ratios(z, xi, tau, q, mode).items():
            h_ratios.setdefault(name, []).append(value)
        for name, value in _ratios(z, xi, tau, q, mode, weighted=True).items():
            h_weighted.setdefault(name, []).append(value)

    report = BoundednessReport(n, max_ratio, discrete_ratio, h_ratios, h_weighted)
    logger.info(f"Fortin 有界性: max ratio {', '.join(f'{k}={v:.3f}' for k, v in max_ratio.items())}")
    return report


# ----------------------------------------------------------------------
# 全套验证
# ----------------------------------------------------------------------
@dataclass
class CertificationReport:
    mode: str
    samples: int
    seed: int
    tolerance: float
    certificates: List[Certificate] = field(default_factory=list)
    boundedness: Optional[BoundednessReport] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    @property
    def failed(self) -> List[Certificate]:
        return [c for c in self.certificates if not c.passed]

    @property
    def failed_blocks(self) -> List[str]:
        return sorted({c.block for c in self.failed if c.block})

    def to_text(self) -> str:
        lines = [f"Fortin 验证报告 (mode={self.mode}, samples={self.samples}, seed={self.seed}, "
                 f"tol={self.tolerance:.0e})"]
        lines += [c.line() for c in self.certificates]
        if self.boundedness is not None:
            b = self.boundedness
            lines.append("有界性 (‖Πv‖_V / ‖v‖_V):")
            for name in b.max_ratio:
                plain = ", ".join(f"{v:.4f}" for v in b.h_ratios[name])
                lines.append(f"  {name:<14} max={b.max_ratio[name]:.4f}  discrete={b.discrete_ratio[name]:.12f}"
                             f"  h-ratios=[{plain}]  h-spread={b.spread(name):.2e}")
        if self.passed:
            lines.append("结论: 全部通过")
        else:
            lines.append(f"结论: 失败 {len(self.failed)} 项: {', '.join(c.name for c in self.failed)}")
        return "\n".join(lines)


def _guarded(name: str, block: str, compute: Callable[[], List[Certificate]]) -> List[Certificate]:
    try:
        return compute()
    except CertificationError as e:
        logger.error(f"{name} 失败: {e}")
        return [_failed(name, e.block or block, e)]


def run_fortin_certification(tolerance: float = FORTIN_TOLERANCE, samples: int = FORTIN_SAMPLES,
                             seed: int = RANDOM_SEED, mode: str = FORTIN_MODE,
                             corrupt: Optional[str] = None,
                             boundedness_samples: Optional[int] = None) -> CertificationReport:
    """秩证书、正交/交换/幂等残差与有界性；失败只记入报告"""
    report = CertificationReport(mode=mode, samples=samples, seed=seed, tolerance=tolerance)
    report.certificates += certify_constraint_ranks(corrupt=corrupt, strict=False)

    def orthogonality() -> List[Certificate]:
        rng = np.random.default_rng(seed)
        residuals = orthogonality_residuals(rng, samples, mode)
        return [_at_most(name, value, tolerance, block=name.split(".")[0])
                for name, value in sorted(residuals.items())]

    report.certificates += _guarded("orthogonality", "divdiv_vector", orthogonality)

    bounded_n = boundedness_samples if boundedness_samples is not None else max(1, samples // 5)
    try:
        boundedness = verify_fortin_boundedness(bounded_n, seed, mode)
    except CertificationError as e:
        report.certificates.append(_failed("boundedness", e.block, e))
    else:
        report.boundedness = boundedness
        report.certificates.append(_at_least("boundedness.finite", float(boundedness.finite), 0.5))
        for name in boundedness.discrete_ratio:
            report.certificates.append(
                _at_most(f"{name}.discrete_ratio_excess",
                         max(boundedness.discrete_ratio[name] - 1.0, 0.0), tolerance, block=name))
            report.certificates.append(
                _at_most(f"{name}.h_spread", boundedness.spread(name), STABILITY_SPREAD, block=name))

    status = "通过" if report.passed else f"失败 {report.failed_blocks}"
    logger.info(f"Fortin 验证{status}")
    return report
