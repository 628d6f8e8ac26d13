"""
命令插件: 每个子命令一个插件, artifacts 负责产物写出
"""
