"""Single writer per output directory

Experiment runs finish on worker threads; every file goes through one
:class:`OutputWriter` so writes never interleave and every artifact carries
the run id of the manifest it belongs to.
"""
import json
import threading
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from ..core.exceptions import ReportError
from ..core.logging_utils import get_logger, sanitize_for_logging
from .constants import DEFAULT_FLOAT_FORMAT

logger = get_logger(__name__)


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=_to_jsonable)


class OutputWriter:
    """Writes CSV, JSON and text artifacts below ``out_dir``"""

    def __init__(self, out_dir: Union[str, Path], run_id: str, float_format: str = DEFAULT_FLOAT_FORMAT) -> None:
        self.out_dir = Path(out_dir)
        self.run_id = run_id
        self.float_format = float_format
        self.written: List[Path] = []
        self._lock = threading.Lock()
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ReportError("Output directory cannot be created", details=str(e), path=str(self.out_dir)) from e

    def _target(self, name: str) -> Path:
        path = self.out_dir / name
        if path.resolve().parent != self.out_dir.resolve():
            raise ReportError("Artifact name escapes the output directory", path=name)
        return path

    def _commit(self, path: Path, text: str) -> Path:
        with self._lock:
            try:
                with open(path, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
            except OSError as e:
                raise ReportError("Cannot write artifact", details=str(e), path=str(path)) from e
            self.written.append(path)
        logger.debug(f"Wrote {sanitize_for_logging(str(path))}")
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """RFC-4180 CSV with a leading ``run_id`` column

        Floats are rounded to the output precision first so that tiny
        negative solver noise never prints as ``-0.000000``.
        """
        frame = frame.copy()
        decimals = _decimals(self.float_format)
        for column in frame.columns:
            if pd.api.types.is_float_dtype(frame[column]):
                frame[column] = frame[column].round(decimals) + 0.0
        frame.insert(0, "run_id", self.run_id)
        text = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        return self._commit(self._target(name), text)

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        payload = dict(data)
        payload["run_id"] = self.run_id
        text = json.dumps(payload, sort_keys=True, indent=2, default=_to_jsonable) + "\n"
        return self._commit(self._target(name), text)

    def write_text(self, name: str, text: str) -> Path:
        return self._commit(self._target(name), text)


def _decimals(float_format: str) -> int:
    """Digits after the point of a ``%.Nf`` style format (6 otherwise)"""
    try:
        return len((float_format % 0.0).split(".")[1])
    except (IndexError, TypeError, ValueError):
        return 6
