"""
Kirchhoff-Love 板 DPG 求解器配置管理
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# 加载环境变量
load_dotenv()

# 项目根目录
BASE_DIR = Path(__file__).parent

# ============================================================
# 数值积分配置
# ============================================================
VOLUME_QUAD_DEGREE = int(os.getenv("VOLUME_QUAD_DEGREE", "10"))  # 三角形积分精确度
EDGE_QUAD_DEGREE = int(os.getenv("EDGE_QUAD_DEGREE", "11"))  # 边上 Gauss-Legendre 精确度
MAX_QUAD_DEGREE = int(os.getenv("MAX_QUAD_DEGREE", "12"))

# ============================================================
# 离散格式配置
# ============================================================
DEFAULT_SCHEME = os.getenv("DEFAULT_SCHEME", "theta").lower()  # theta / plain
PLAIN_TENSOR_DEGREE = int(os.getenv("PLAIN_TENSOR_DEGREE", "4"))  # 2 为实验选项
MATERIAL_POISSON = float(os.getenv("MATERIAL_POISSON", "0.0"))  # 0 对应 C = identity

# ============================================================
# 求解器配置
# ============================================================
SOLVER_RESIDUAL_TOL = float(os.getenv("SOLVER_RESIDUAL_TOL", "1e-10"))  # 超过则告警
SOLVER_RESIDUAL_MAX = float(os.getenv("SOLVER_RESIDUAL_MAX", "1e-6"))  # 超过则报错

# ============================================================
# 自适应加密配置
# ============================================================
BULK_THETA = float(os.getenv("BULK_THETA", "0.7"))
DEFAULT_LEVELS = int(os.getenv("DEFAULT_LEVELS", "6"))
BUDGET_DOFS = int(os.getenv("BUDGET_DOFS", "30000"))
CORNER_RADIUS = float(os.getenv("CORNER_RADIUS", "0.25"))  # 统计角点附近标记比例

# ============================================================
# 误差度量配置
# ============================================================
ERROR_QUAD_DEGREE = int(os.getenv("ERROR_QUAD_DEGREE", "10"))
CORNER_SUBDIVISION_LEVELS = int(os.getenv("CORNER_SUBDIVISION_LEVELS", "4"))

# ============================================================
# Fortin 验证配置
# ============================================================
FORTIN_MODE = os.getenv("FORTIN_MODE", "distance").lower()  # distance / norm
FORTIN_TOLERANCE = float(os.getenv("FORTIN_TOLERANCE", "1e-10"))
FORTIN_SAMPLES = int(os.getenv("FORTIN_SAMPLES", "100"))
RANK_TOLERANCE = float(os.getenv("RANK_TOLERANCE", "1e-8"))

# ============================================================
# 运行时配置
# ============================================================
THREADS = int(os.getenv("THREADS", "1"))
RANDOM_SEED = int(os.getenv("RANDOM_SEED", "0"))
OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(BASE_DIR / "results")))

# ============================================================
# 日志配置
# ============================================================
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_DIR = BASE_DIR / "logs"
LOG_FILE = LOG_DIR / "kirchhoff_dpg.log"

# 确保日志目录存在
LOG_DIR.mkdir(exist_ok=True)

# ============================================================
# 配置验证
# ============================================================
def validate_config():
    """验证配置取值范围"""
    for name, degree in (("VOLUME_QUAD_DEGREE", VOLUME_QUAD_DEGREE),
                         ("EDGE_QUAD_DEGREE", EDGE_QUAD_DEGREE),
                         ("ERROR_QUAD_DEGREE", ERROR_QUAD_DEGREE)):
        if not 0 <= degree <= MAX_QUAD_DEGREE:
            raise ValueError(f"{name}={degree} 超出支持范围 [0, {MAX_QUAD_DEGREE}]")
    if DEFAULT_SCHEME not in ("theta", "plain"):
        raise ValueError(f"DEFAULT_SCHEME 只能是 theta 或 plain，当前为 {DEFAULT_SCHEME}")
    if PLAIN_TENSOR_DEGREE not in (2, 4):
        raise ValueError("PLAIN_TENSOR_DEGREE 只能是 2 或 4")
    if not 0.0 < BULK_THETA <= 1.0:
        raise ValueError("BULK_THETA 必须位于 (0, 1]")
    if not -1.0 < MATERIAL_POISSON <= 0.5:
        raise ValueError("MATERIAL_POISSON 必须位于 (-1, 0.5]")
    if FORTIN_MODE not in ("distance", "norm"):
        raise ValueError("FORTIN_MODE 只能是 distance 或 norm")
    if THREADS < 1:
        raise ValueError("THREADS 至少为 1")

# 延迟验证（在实际使用时验证，避免导入时报错）
