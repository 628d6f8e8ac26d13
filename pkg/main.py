#!/usr/bin/env python3
"""
多孔弹性薄板实验室 - 命令行入口
"""
import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from src.core.models import COMMANDS

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_ERROR = 2


def setup_logging(level: Optional[str] = None):
    """设置日志"""
    from src.core.config import config

    name = (level or config.get('logging.level', 'INFO')).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler()]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poroplate", description="多孔弹性薄板: 三维 Biot 与极限模型的数值验证")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve-limit": "求解二维极限模型并审计能量",
        "solve-3d": "求解单个 ε 的三维 Biot 问题",
        "sweep-epsilon": "ε 扫描: 三维解与校正后的极限解比较",
        "mms": "制造解收敛阶",
        "resultants": "合力、力矩与平衡残差",
        "report": "汇总已有输出",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="配置文件 (JSON), 默认 ./config.json")
        p.add_argument("--output", help="输出根目录, 覆盖 output.root")
        p.add_argument("--strict", action="store_true", help="任一判定失败时以状态 1 退出")
        p.add_argument("--log-level", help="DEBUG / INFO / WARNING / ERROR")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="覆盖配置项, 值按 JSON 解析, 可重复")
        if name == "solve-3d":
            p.add_argument("--eps", type=float, help="厚度比 ε, 默认取参数段")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数, 返回退出状态"""
    args = build_parser().parse_args(argv)

    from src.core.app import core
    from src.core.config import config
    from src.core.errors import LabError
    from src.core.models import parse_run_config

    try:
        config.load(args.config)
        for assignment in args.set:
            config.set_from_string(assignment)
        setup_logging(args.log_level)
        logger = logging.getLogger(__name__)

        data = config.as_dict()
        data["command"] = args.command
        data["strict"] = bool(args.strict)
        if args.output:
            data.setdefault("output", {})["root"] = args.output
        if getattr(args, "eps", None) is not None:
            data["eps"] = args.eps
        cfg = parse_run_config(data)
        header = cfg.model_dump(mode="json")

        logger.info(f"命令 {cfg.command}, 配置 {config.path}")
        result = asyncio.run(core.run(cfg, header))
    except LabError as e:
        logging.getLogger(__name__).error(f"运行失败: {e}")
        return EXIT_ERROR

    if result.failed:
        logger.warning(f"{len(result.failed)} 项判定失败")
        if cfg.strict:
            return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
