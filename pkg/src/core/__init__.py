"""
核心模块: 配置、运行配置模型、插件基类与运行核心
"""
