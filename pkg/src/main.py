"""
编队规划命令行入口

用法:
    python -m src.main run --scenario scenarios/tracking_front.yaml
    python -m src.main plan --scenario scenarios/path_length_rear.yaml --out output/rear
    python -m src.main simulate --scenario scenarios/path_length_rear.yaml --out output/rear
    python -m src.main report output/front/metrics.json output/rear/metrics.json --out output
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from src.config import config
from src.errors import FluxFormationError
from src.scenario import (
    EXIT_ERROR,
    EXIT_NOT_CONVERGED,
    compare_report,
    load_scenario,
    plan_scenario,
    run_scenario,
    simulate_scenario,
)

logger = logging.getLogger(__name__)

COMMANDS = {
    "plan": plan_scenario,
    "simulate": simulate_scenario,
    "run": run_scenario,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.main", description="基于电通量的无人机编队路径规划")
    parser.add_argument("--quiet", action="store_true", help="只输出警告与错误日志")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("plan", "运行规划器并写出 path.csv"),
                            ("simulate", "读取 path.csv，参数化并仿真"),
                            ("run", "规划、参数化、仿真一次完成")):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--scenario", required=True, help="YAML 场景文件")
        sub.add_argument("--out", default=None, help="输出目录（覆盖场景中的 output_dir）")
        sub.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)

    report = subparsers.add_parser("report", help="汇总多个 metrics.json 为对比表")
    report.add_argument("metrics", nargs="+", help="metrics.json 文件")
    report.add_argument("--out", default=None, help="comparison.csv 的输出目录")
    report.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    return parser


def setup_logging(quiet: bool) -> None:
    log_config = config.get_log_config()
    level = logging.WARNING if quiet else getattr(logging, str(log_config["level"]).upper(), logging.INFO)
    logging.basicConfig(level=level, format=log_config["format"])


def _run_command(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    output_dir = args.out or scenario.output_dir
    status = COMMANDS[args.command](scenario, output_dir)

    print("=" * 50)
    print(f"场景: {scenario.name}  ({args.command})")
    print(f"输出目录: {output_dir}")
    if status == EXIT_NOT_CONVERGED:
        print("⚠️  有规划器未收敛，已写出部分结果")
    print("=" * 50)
    return status


def _report_command(args: argparse.Namespace) -> int:
    table = compare_report(args.metrics)
    out_dir = args.out or config.get_output_config()["output_dir"]
    csv_path = os.path.join(out_dir, "comparison.csv")
    table.write_csv(csv_path)
    print(table.to_text())
    print(f"\n已写入 {csv_path}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    主函数

    Returns:
        退出码：0 成功，1 错误，2 规划未收敛
    """
    args = build_parser().parse_args(argv)
    setup_logging(getattr(args, "quiet", False))
    try:
        if args.command == "report":
            return _report_command(args)
        return _run_command(args)
    except FluxFormationError as e:
        logger.error("%s: %s", type(e).__name__, e)
        print(f"\n错误: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        logger.error("运行失败: %s", e)
        print(f"\n错误: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
