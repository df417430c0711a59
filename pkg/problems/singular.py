"""
凹角奇异解

u(r, φ) = r^{1+α} (cos((α+1)φ) + C cos((α−1)φ))，φ 从区域楔形的角平分线量起，
固支边位于 φ = ±ω/2。(α, C) 使 u 与 ∂_n u 在两条边上同时为零
"""
import math
from dataclasses import dataclass
from functools import partial
from typing import Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from dpg.scheme import MaterialTensor
from mesh.domains import notched_square
from problems.base import ManufacturedSolution
from utils.error_handler import RootFindingError
from utils.logger import logger

DEFAULT_OPENING = 5.0 * math.pi / 4.0
_BRACKET = (0.01, 1.0)
_GRID = 400


@dataclass(frozen=True)
class SingularParams:
    omega: float
    alpha: float
    C: float

    @property
    def lam(self) -> float:
        return 1.0 + self.alpha


def _determinant(alpha: float, omega: float) -> float:
    a = (alpha + 1.0) * omega / 2.0
    b = (alpha - 1.0) * omega / 2.0
    return math.cos(a) * (alpha - 1.0) * math.sin(b) - math.cos(b) * (alpha + 1.0) * math.sin(a)


def _amplitude(alpha: float, omega: float) -> float:
    a = (alpha + 1.0) * omega / 2.0
    b = (alpha - 1.0) * omega / 2.0
    if abs(math.cos(b)) > 1e-8:
        return -math.cos(a) / math.cos(b)
    return -(alpha + 1.0) * math.sin(a) / ((alpha - 1.0) * math.sin(b))


def solve_corner_exponent(omega: float = DEFAULT_OPENING) -> SingularParams:
    """在 (0, 1] 中求行列式方程的最小正根，α = 0 是平凡根不在区间内"""
    if not math.pi <= omega < 2.0 * math.pi:
        raise ValueError(f"张角 {omega} 不在 [π, 2π) 内")
    g = partial(_determinant, omega=omega)
    if abs(g(1.0)) < 1e-13:
        params = SingularParams(omega, 1.0, _amplitude(1.0, omega))
        logger.debug(f"张角 {omega:.6f}: 无奇性, α = 1")
        return params

    grid = np.linspace(*_BRACKET, _GRID)
    values = np.array([g(a) for a in grid])
    changes = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)
    if changes.size == 0:
        raise RootFindingError(f"张角 {omega} 的角点方程在 {_BRACKET} 内无根")
    i = int(changes[0])
    alpha = brentq(g, grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
    params = SingularParams(omega, float(alpha), _amplitude(alpha, omega))
    logger.debug(f"角点指数: ω={omega:.6f}, α={params.alpha:.12f}, C={params.C:.12f}")
    return params


def corner_exponent_newton(omega: float, alpha0: float, c0: float,
                           tol: float = 1e-14, max_iter: int = 50) -> Tuple[float, float]:
    """直接对 2×2 原方程组做 Newton 迭代"""
    x = np.array([alpha0, c0], dtype=float)
    half = omega / 2.0
    for _ in range(max_iter):
        alpha, c = x
        a, b = (alpha + 1.0) * half, (alpha - 1.0) * half
        F = np.array([
            math.cos(a) + c * math.cos(b),
            (alpha + 1.0) * math.sin(a) + c * (alpha - 1.0) * math.sin(b),
        ])
        J = np.array([
            [-half * (math.sin(a) + c * math.sin(b)), math.cos(b)],
            [math.sin(a) + (alpha + 1.0) * half * math.cos(a)
             + c * math.sin(b) + c * (alpha - 1.0) * half * math.cos(b),
             (alpha - 1.0) * math.sin(b)],
        ])
        step = np.linalg.solve(J, F)
        x = x - step
        if np.max(np.abs(step)) < tol:
            break
    return float(x[0]), float(x[1])


def _polar(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(r <= 1e-14):
        raise ValueError("奇异解不能在角点处求值")
    return r, np.arctan2(pts[:, 1], pts[:, 0])


def _angular(params: SingularParams, phi: np.ndarray):
    """Φ, Φ', Φ''"""
    lam, c = params.lam, params.C
    mu = lam - 2.0
    f0 = np.cos(lam * phi) + c * np.cos(mu * phi)
    f1 = -lam * np.sin(lam * phi) - c * mu * np.sin(mu * phi)
    f2 = -lam**2 * np.cos(lam * phi) - c * mu**2 * np.cos(mu * phi)
    return f0, f1, f2


def eval_singular(params: SingularParams, points: np.ndarray):
    """返回 (u, ∇u, Hessian)，形状 (n,), (n, 2), (n, 2, 2)"""
    r, phi = _polar(points)
    lam = params.lam
    f0, f1, f2 = _angular(params, phi)

    u = r**lam * f0
    e_r = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    e_phi = np.stack([-np.sin(phi), np.cos(phi)], axis=1)
    grad = r[:, None] ** (lam - 1.0) * (lam * f0[:, None] * e_r + f1[:, None] * e_phi)

    scale = r ** (lam - 2.0)
    h_rr = lam * (lam - 1.0) * scale * f0
    h_rp = (lam - 1.0) * scale * f1
    h_pp = scale * (lam * f0 + f2)
    Q = np.stack([e_r, e_phi], axis=2)  # 列为 e_r, e_φ
    polar = np.stack([np.stack([h_rr, h_rp], axis=1), np.stack([h_rp, h_pp], axis=1)], axis=1)
    hess = np.einsum("nik,nkl,njl->nij", Q, polar, Q)
    return u, grad, hess


def shear_force_magnitude(params: SingularParams, points: np.ndarray) -> np.ndarray:
    """|Div M| = |∇Δu| = 4Cα(1−α) r^{α−2}（ℂ = identity）"""
    r, _ = _polar(points)
    a = params.alpha
    return 4.0 * abs(params.C) * a * abs(1.0 - a) * r ** (a - 2.0)


def shear_force_energy(params: SingularParams, rho: float, n_points: int = 40) -> float:
    """∫_{Ω∩{r>ρ}} |Div M|²，径向精确积分，角向分段 Gauss-Legendre

    区域为 (−1,1)² 中 |φ| ≤ ω/2 的部分，射线长度 R(φ) = min(1/cos φ, 1/|sin φ|)
    """
    a = params.alpha
    half = params.omega / 2.0
    if not 0.0 < rho < 1.0:
        raise ValueError("ρ 必须位于 (0, 1)")
    k = (4.0 * params.C * a * (1.0 - a)) ** 2
    p = 2.0 * a - 2.0  # ∫ r^{2α−4} r dr = r^p / p
    breaks = [-half, -math.pi / 4.0, math.pi / 4.0, half]
    s, w = roots_legendre(n_points)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        phi = 0.5 * (hi - lo) * s + 0.5 * (hi + lo)
        cos, sin = np.cos(phi), np.abs(np.sin(phi))
        with np.errstate(divide="ignore"):
            R = np.minimum(np.where(cos > 0, 1.0 / cos, np.inf), np.where(sin > 0, 1.0 / sin, np.inf))
        radial = (R**p - rho**p) / p
        total += 0.5 * (hi - lo) * float(w @ radial)
    return k * total


def singular_problem(omega: float = DEFAULT_OPENING, material: MaterialTensor = None) -> ManufacturedSolution:
    material = material or MaterialTensor.identity()
    if not material.is_identity:
        raise ValueError("奇异解只在 ℂ = identity 时满足 divDiv ε∇u = 0")
    params = solve_corner_exponent(omega)

    return ManufacturedSolution(
        name="singular",
        domain_factory=partial(notched_square, omega),
        u=lambda pts: eval_singular(params, pts)[0],
        gradient=lambda pts: eval_singular(params, pts)[1],
        hessian=lambda pts: eval_singular(params, pts)[2],
        f=None,
        material=material,
        corner=(0.0, 0.0),
        params={"omega": params.omega, "alpha": params.alpha, "C": params.C},
    )
