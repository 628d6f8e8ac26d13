#!/usr/bin/env python3
"""
多孔弹性薄板实验室 环境诊断工具
"""
import json
import os
import sys


def check_python_env():
    """检查Python环境"""
    print("🐍 检查Python环境...")
    print(f"Python版本: {sys.version}")

    required_packages = ['numpy', 'scipy', 'pydantic']
    missing_packages = []

    for package in required_packages:
        try:
            module = __import__(package)
            print(f"✅ {package} {getattr(module, '__version__', '')}")
        except ImportError:
            print(f"❌ {package} - 未安装")
            missing_packages.append(package)

    if missing_packages:
        print(f"\n📦 请安装缺失的包: pip install {' '.join(missing_packages)}")
        return False

    from scipy.integrate import cumulative_simpson  # noqa: F401  scipy >= 1.12
    return True


def check_config():
    """检查配置文件"""
    print("\n⚙️ 检查配置文件...")

    if not os.path.exists('config.json'):
        print("⚠️ 缺少config.json文件, 将使用默认值")
        return True

    try:
        with open('config.json', 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        print(f"❌ 配置文件格式错误: 第 {e.lineno} 行: {e.msg}")
        return False

    from src.core.errors import ConfigError
    from src.core.models import parse_run_config

    try:
        cfg = parse_run_config({**data, "command": "report"})
    except ConfigError as e:
        print(f"❌ {e}")
        return False

    print(f"✅ 网格 {cfg.grid.nx}²×{cfg.grid.nz}, 步数 {cfg.time.nsteps}, 场景 {cfg.scenario.name}")
    print(f"✅ 扫描 ε = {cfg.sweep.eps}")
    print(f"📁 输出目录: {os.environ.get('POROPLATE_OUTPUT_ROOT', cfg.output.root)}")
    return True


def check_limit_step():
    """零数据极限模型一步"""
    print("\n🧮 检查极限模型求解...")
    from src.core.domain.grid import Grid2D, Grid3D
    from src.core.domain.limit2d import run_limit
    from src.core.domain.loads import LoadSpec
    from src.core.domain.params import DimensionlessParams, lame_ratio

    params = DimensionlessParams(eps=0.1, gamma=1.0, lam=lame_ratio(0.25), alpha=0.9, nu=0.25)
    traj = run_limit(params, Grid3D(Grid2D.square(8), 4), LoadSpec(), 0.1, 1)
    norm = traj.states[-1].max_norm()
    print(f"{'✅' if norm <= 1e-12 else '❌'} 零数据解最大范数 {norm:.2e}")
    return norm <= 1e-12


def check_biot_step():
    """零数据三维一步"""
    print("\n🧊 检查三维 Biot 求解...")
    from src.core.domain.biot3d import run_biot
    from src.core.domain.grid import Grid2D, Grid3D
    from src.core.domain.loads import LoadSpec
    from src.core.domain.params import DimensionlessParams, lame_ratio

    params = DimensionlessParams(eps=0.2, gamma=1.0, lam=lame_ratio(0.25), alpha=0.9, nu=0.25)
    traj = run_biot(params, Grid3D(Grid2D.square(8), 4), LoadSpec(), 0.1, 1)
    norm = traj.states[-1].max_norm()
    print(f"{'✅' if norm <= 1e-12 else '❌'} 零数据解最大范数 {norm:.2e}")
    return norm <= 1e-12


def generate_fix_suggestions():
    """生成修复建议"""
    print("\n🔧 修复建议:")
    print("1. 安装缺失的Python包: pip install -r requirements.txt")
    print("2. 检查config.json配置文件格式和内容")
    print("3. scipy 版本需 >= 1.12")
    print("4. 查看详细日志: python main.py solve-limit --log-level DEBUG")


def main():
    """主诊断流程"""
    print("🔍 多孔弹性薄板实验室 环境诊断")
    print("=" * 50)

    checks = [
        ("Python环境", check_python_env),
        ("配置文件", check_config),
        ("极限模型", check_limit_step),
        ("三维求解", check_biot_step),
    ]

    all_passed = True
    for name, check_func in checks:
        try:
            result = check_func()
            if not result:
                all_passed = False
        except Exception as e:
            print(f"❌ {name}检查失败: {e}")
            all_passed = False

    print("\n" + "=" * 50)
    if all_passed:
        print("🎉 所有检查通过！可以运行:")
        print("   python main.py sweep-epsilon --strict")
    else:
        print("⚠️ 发现问题，请根据上述检查结果进行修复")
        generate_fix_suggestions()
    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
