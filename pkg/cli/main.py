"""
kirchhoff-dpg 命令行入口

    kirchhoff-dpg solve --problem singular --scheme theta --refine both --out results/run.csv
    kirchhoff-dpg fortin-verify
    kirchhoff-dpg slopes results/run_uniform.csv --column eta --window 3
"""
import argparse
import sys
from typing import List, Optional

from cli.commands import cmd_fortin_verify, cmd_slopes, cmd_solve
from cli.schemas import FortinConfig, RunConfig, SlopeConfig
from config import (
    BUDGET_DOFS, BULK_THETA, DEFAULT_LEVELS, DEFAULT_SCHEME, FORTIN_MODE, FORTIN_SAMPLES,
    FORTIN_TOLERANCE, MATERIAL_POISSON, PLAIN_TENSOR_DEGREE, RANDOM_SEED, THREADS, validate_config,
)
from utils.error_handler import EXIT_OK, handle_cli_errors
from utils.logger import logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kirchhoff-dpg", description="Kirchhoff-Love 板的超弱 DPG 求解与 Fortin 验证")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="收敛性研究，每层输出一行 CSV")
    solve.add_argument("--scheme", choices=["theta", "plain"], default=DEFAULT_SCHEME)
    solve.add_argument("--refine", choices=["uniform", "adaptive", "both"], default="both")
    solve.add_argument("--problem", choices=["singular", "smooth", "zero"], default="singular")
    solve.add_argument("--levels", type=int, default=DEFAULT_LEVELS)
    solve.add_argument("--budget-dofs", type=int, default=BUDGET_DOFS)
    solve.add_argument("--theta-mark", type=float, default=BULK_THETA, help="Dörfler 标记参数 ϑ")
    solve.add_argument("--out", type=str, default=None, help="CSV 输出路径，refine=both 时追加 _uniform/_adaptive")
    solve.add_argument("--threads", type=int, default=THREADS, help="单元并行线程数，结果与线程数无关")
    solve.add_argument("--plain-tensor-degree", type=int, choices=[2, 4], default=PLAIN_TENSOR_DEGREE)
    solve.add_argument("--poisson", type=float, default=MATERIAL_POISSON, help="各向同性材料泊松比")

    verify = sub.add_parser("fortin-verify", help="Fortin 算子的秩、正交与有界性验证")
    verify.add_argument("--tolerance", type=float, default=FORTIN_TOLERANCE)
    verify.add_argument("--samples", type=int, default=FORTIN_SAMPLES)
    verify.add_argument("--seed", type=int, default=RANDOM_SEED)
    verify.add_argument("--mode", choices=["distance", "norm"], default=FORTIN_MODE)
    verify.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)

    slopes = sub.add_parser("slopes", help="对数斜率拟合")
    slopes.add_argument("csv", type=str)
    slopes.add_argument("--column", default="eta")
    slopes.add_argument("--window", type=int, default=3)
    slopes.add_argument("--against", choices=["ndof", "h"], default="ndof")
    return parser


def _run_solve(args: argparse.Namespace) -> int:
    config = RunConfig(
        scheme=args.scheme, refine=args.refine, problem=args.problem, levels=args.levels,
        budget_dofs=args.budget_dofs, theta_mark=args.theta_mark, out=args.out,
        threads=args.threads, plain_tensor_degree=args.plain_tensor_degree, poisson=args.poisson,
    )
    tables = cmd_solve(config)
    if config.out is None:
        for mode, table in tables.items():
            if len(tables) > 1:
                print(f"# refine={mode}")
            print(table.to_csv(index=False), end="")
    return EXIT_OK


def _run_fortin_verify(args: argparse.Namespace) -> int:
    config = FortinConfig(tolerance=args.tolerance, samples=args.samples, seed=args.seed,
                          mode=args.mode, inject_fault=args.inject_fault)
    text, code = cmd_fortin_verify(config)
    print(text)
    return code


def _run_slopes(args: argparse.Namespace) -> int:
    config = SlopeConfig(csv=args.csv, column=args.column, window=args.window, against=args.against)
    print(f"{cmd_slopes(config):.6f}")
    return EXIT_OK


COMMANDS = {"solve": _run_solve, "fortin-verify": _run_fortin_verify, "slopes": _run_slopes}


@handle_cli_errors
def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    validate_config()
    logger.debug(f"命令: {args.command}, 参数: {vars(args)}")
    return COMMANDS[args.command](args)


def main(argv: Optional[List[str]] = None) -> int:
    code = run(argv)
    sys.exit(code)


if __name__ == "__main__":
    main()
