"""
微核心配置系统
"""
import copy
import json
import logging
import os
from pathlib import Path
from typing import Dict, Any, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "POROPLATE_OUTPUT_ROOT"


class Config:
    """单一配置管理器"""

    def __init__(self, config_path: str = "config.json"):
        self.path = Path(config_path)
        self._data = self._load()

    def _load(self) -> Dict[str, Any]:
        """加载配置, 文件不存在时为空"""
        if not self.path.exists():
            return {}
        try:
            with open(self.path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            logger.error(f"配置加载失败: {e}")
            raise ConfigError(str(self.path), f"第 {e.lineno} 行第 {e.colno} 列: {e.msg}") from e

    def load(self, config_path: Optional[str] = None) -> "Config":
        """重新加载 (可指定新路径)"""
        if config_path is not None:
            self.path = Path(config_path)
            if not self.path.exists():
                raise ConfigError(str(self.path), "配置文件不存在")
        self._data = self._load()
        logger.debug(f"已加载配置: {self.path}")
        return self

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值，支持点号分割的嵌套键"""
        if key == "output.root" and os.environ.get(OUTPUT_ROOT_ENV):
            return os.environ[OUTPUT_ROOT_ENV]
        keys = key.split('.')
        value = self._data

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any):
        """按点号键写入, 中间节点不存在时创建"""
        keys = key.split('.')
        node = self._data
        for k in keys[:-1]:
            if not isinstance(node.get(k), dict):
                node[k] = {}
            node = node[k]
        node[keys[-1]] = value

    def set_from_string(self, assignment: str):
        """解析 key=value, 值按 JSON 解析, 失败时作字符串"""
        if '=' not in assignment:
            raise ConfigError(assignment, "覆盖项格式应为 key=value")
        key, raw = assignment.split('=', 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        self.set(key.strip(), value)

    def as_dict(self) -> Dict[str, Any]:
        """解析后的完整配置 (含环境变量覆盖), 用于输出文件头"""
        data = copy.deepcopy(self._data)
        if os.environ.get(OUTPUT_ROOT_ENV):
            data.setdefault("output", {})["root"] = os.environ[OUTPUT_ROOT_ENV]
        return data

    def __getattr__(self, name: str) -> Any:
        """支持属性访问"""
        if name.startswith('_'):
            raise AttributeError(name)
        return self.get(name, {})


# 全局配置实例
config = Config()
