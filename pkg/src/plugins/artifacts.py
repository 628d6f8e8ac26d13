"""
产物写出: 带配置头的 CSV、场文件与判定文件
"""
import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from ..core.domain.grid import Field, provenance_lines
from ..core.domain.verify import Verdict
from ..core.errors import LabError

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path: Path, header: Optional[Dict[str, Any]], columns: Sequence[str],
                rows: Iterable[Sequence[Any]]) -> Path:
    """RFC-4180 CSV, 首行为 `# config: {...}`"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in provenance_lines(header):
            f.write(line + "\n")
        writer = csv.writer(f)
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.debug(f"已写出 {path}")
    return path


def read_table(path: Path) -> List[Dict[str, str]]:
    """读回 write_table 的产物, 跳过注释行"""
    with open(path, newline="", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_field(f: Field, directory: Path, stem: str, formats: Sequence[str],
                header: Optional[Dict[str, Any]], names: Optional[Sequence[str]] = None) -> List[Path]:
    paths = []
    if "csv" in formats:
        paths.append(f.to_csv(Path(directory) / f"{stem}.csv", header, names))
    if "vtk" in formats:
        paths.append(f.to_vtk(Path(directory) / f"{stem}.vtk", stem))
    return paths


def write_verdicts(path: Path, verdicts: Sequence[Verdict]) -> Path:
    """逐行 `criterion-id PASS|FAIL value threshold`"""
    path = Path(path)
    path.write_text("".join(v.line() + "\n" for v in verdicts), encoding="utf-8")
    for v in verdicts:
        log = logger.info if v.passed else logger.warning
        log(f"判定 {v.line()}")
    return path


def read_verdicts(path: Path) -> List[Verdict]:
    verdicts = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4 or parts[1] not in ("PASS", "FAIL"):
            raise LabError(f"{path} 第 {n} 行格式错误: {line!r}")
        verdicts.append(Verdict(parts[0], parts[1] == "PASS", float(parts[2]), float(parts[3])))
    return verdicts


def step_indices(nsteps: int, every: int) -> List[int]:
    """输出时间层: 每 every 步一次, 末步总是输出"""
    every = max(1, every)
    idx = list(range(0, nsteps + 1, every))
    if idx[-1] != nsteps:
        idx.append(nsteps)
    return idx
