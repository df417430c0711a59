"""
收敛性验收评估器 - 按 test_cases.json 运行研究并检查拟合斜率
"""
import json
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

# 添加父目录到路径
sys.path.insert(0, str(Path(__file__).parent.parent))

from cli.commands import compute_slope
from dpg.scheme import Scheme
from estimator.adaptive import LevelRecord, adaptive_loop
from fortin.certify import run_fortin_certification
from problems import get_problem, solve_corner_exponent
from utils.logger import logger

SLOPE_AXES = {"ndof": "ndof", "h": "h_max"}


def fit_slopes(records: List[LevelRecord], columns: List[str], against: str = "ndof",
               window: Optional[int] = None) -> Dict[str, Optional[float]]:
    """各列相对 ndof 或 h_max 的对数斜率，列全为零或缺失时返回 None"""
    axis = np.array([getattr(r, SLOPE_AXES[against]) for r in records], dtype=float)
    slopes = {}
    for column in columns:
        values = [getattr(r, column) for r in records]
        if any(v is None for v in values) or not np.all(np.asarray(values, dtype=float) > 0):
            slopes[column] = None
            continue
        slopes[column] = compute_slope(axis, np.asarray(values, dtype=float), window)
    return slopes


def _within(value: Optional[float], bounds: List[float]) -> bool:
    return value is not None and bounds[0] <= value <= bounds[1]


class ConvergenceEvaluator:
    """收敛性研究评估器"""

    def __init__(self, threads: int = 1):
        self.threads = threads
        self.test_cases = self.load_test_cases()

    def load_test_cases(self, file_path: Path = None) -> List[Dict]:
        """加载测试用例"""
        if file_path is None:
            file_path = Path(__file__).parent / "test_cases.json"
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)

    def evaluate_study(self, test_case: Dict) -> Dict:
        """一次 solve 研究的斜率检查"""
        problem = get_problem(test_case["problem"])
        scheme = Scheme.theta() if test_case["scheme"] == "theta" else Scheme.plain(test_case.get("plain_degree", 4))
        records = adaptive_loop(problem, scheme, refine_mode=test_case["refine"], levels=test_case["levels"],
                                budget_dofs=test_case.get("budget_dofs", 30000),
                                theta=test_case.get("theta", 0.7), threads=self.threads)
        expected = test_case["expected_slopes"]
        slopes = fit_slopes(records, list(expected), test_case.get("against", "ndof"), test_case.get("window"))
        checks = {column: _within(slopes[column], bounds) for column, bounds in expected.items()}

        if "corner_density_min" in test_case:
            density = records[-1].corner_density
            checks["corner_density"] = density is not None and density >= test_case["corner_density_min"]
        return {
            "slopes": slopes,
            "checks": checks,
            "levels": len(records),
            "final_ndof": records[-1].ndof,
        }

    def evaluate_corner(self, test_case: Dict) -> Dict:
        params = solve_corner_exponent(test_case["omega"])
        checks = {
            "alpha": _within(params.alpha, test_case["alpha_range"]),
            "C": _within(params.C, test_case["C_range"]),
        }
        return {"alpha": params.alpha, "C": params.C, "checks": checks}

    def evaluate_fortin(self, test_case: Dict) -> Dict:
        report = run_fortin_certification(samples=test_case.get("samples", 100), seed=test_case.get("seed", 0))
        return {"failed": [c.name for c in report.failed], "checks": {"certification": report.passed}}

    def evaluate_test_case(self, test_case: Dict) -> Dict:
        """评估单个测试用例"""
        start = time.perf_counter()
        handler = {"study": self.evaluate_study, "corner": self.evaluate_corner,
                   "fortin": self.evaluate_fortin}[test_case["kind"]]
        result = handler(test_case)
        return {
            "id": test_case["id"],
            "name": test_case["name"],
            **result,
            "passed": all(result["checks"].values()),
            "seconds": time.perf_counter() - start,
            "timestamp": datetime.now().isoformat(),
        }

    def evaluate_all(self, output_file: Path = None, only: Optional[List[str]] = None) -> Dict:
        """运行全部（或指定 id 的）测试用例"""
        results = []
        for test_case in self.test_cases:
            if only and test_case["id"] not in only:
                continue
            logger.info(f"评估 {test_case['id']}: {test_case['name']}")
            try:
                result = self.evaluate_test_case(test_case)
            except Exception as e:
                logger.error(f"测试用例 {test_case['id']} 失败: {e}", exc_info=True)
                result = {"id": test_case["id"], "name": test_case["name"], "passed": False, "error": str(e)}
            results.append(result)
            print(f"\n{result['id']} {result['name']}: {'通过' if result['passed'] else '未通过'}")
            for key, value in result.get("slopes", {}).items():
                print(f"  斜率 {key}: {value if value is None else f'{value:.4f}'}")

        summary = {
            "total_cases": len(results),
            "passed_cases": sum(1 for r in results if r["passed"]),
            "failed_cases": [r["id"] for r in results if not r["passed"]],
        }

        # 保存结果
        if output_file is None:
            output_file = Path(__file__).parent / f"eval_results_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"
        output_data = {"summary": summary, "results": results, "timestamp": datetime.now().isoformat()}
        with open(output_file, "w", encoding="utf-8") as f:
            json.dump(output_data, f, ensure_ascii=False, indent=2)
        logger.info(f"评估结果已保存到: {output_file}")

        print("\n" + "=" * 60)
        print("评估汇总")
        print("=" * 60)
        print(f"总测试用例: {summary['total_cases']}，通过: {summary['passed_cases']}")
        if summary["failed_cases"]:
            print(f"未通过: {', '.join(summary['failed_cases'])}")
        print("=" * 60)
        return output_data


if __name__ == "__main__":
    evaluator = ConvergenceEvaluator()
    evaluator.evaluate_all(only=sys.argv[1:] or None)
