"""
Delimited table and report I/O. Every output goes through atomic_write
(temporary file in the target directory, then os.replace).
"""
import json
import logging
import os
import tempfile
from pathlib import Path

import pandas as pd

from mining.errors import SchemaMismatch

logger = logging.getLogger(__name__)


def read_table(path: Path | str, delimiter: str = ',') -> pd.DataFrame:
    """All cells as strings; empty cells stay empty strings."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise SchemaMismatch(f"{path} is empty (no header row)") from None
    except pd.errors.ParserError as e:
        raise SchemaMismatch(f"{path} could not be parsed: {e}") from None
    frame.columns = [str(c).strip() for c in frame.columns]
    logger.debug(f"Read {len(frame)} rows from {path}.")
    return frame


def atomic_write(path: Path | str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {path}.")
    return path


def write_frame(frame: pd.DataFrame, path: Path | str, delimiter: str = ',') -> Path:
    return atomic_write(path, frame.to_csv(index=False, sep=delimiter, lineterminator='\n'))


def write_text(path: Path | str, text: str) -> Path:
    return atomic_write(path, text)


def write_json(path: Path | str, payload: dict) -> Path:
    return atomic_write(path, json.dumps(payload, indent=2) + '\n')


def read_json(path: Path | str) -> dict:
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaMismatch(f"{path} is not valid JSON: {e}") from None
