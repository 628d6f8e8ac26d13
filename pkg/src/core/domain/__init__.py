"""
领域层 - 数值模型

params/loads: 参数与载荷; grid: 网格与差分; linsolve: 线性求解;
limit2d: 极限模型; biot3d: 缩放三维 Biot; verify: 校正场与验证; manufactured: 制造解
"""
