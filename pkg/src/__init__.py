"""
多孔弹性薄板实验室 - 微核心架构
"""
