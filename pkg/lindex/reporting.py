"""JSON and CSV serialization for reports.

Non-finite floats become null; floats are written with ``repr`` precision,
which round-trips exactly. Payloads carry no wall-clock fields.
"""
from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, TextIO

import numpy as np
import pandas as pd

from lindex.domain import Verdict

FLOAT_FORMAT = '%.17g'


def json_serial(obj):
    """JSON serializer for objects not serializable by default json code."""
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Type {type(obj)} not serializable")


def to_jsonable(obj: Any) -> Any:
    """Recursively replace non-finite floats with None and complex numbers with [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return to_jsonable(json_serial(obj))


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), allow_nan=False)


def write_json_line(payload: Any, stream: TextIO) -> None:
    stream.write(dumps(payload) + '\n')


def summary_line(verdicts: Iterable[Verdict]) -> Dict[str, Any]:
    counts = {v.value: 0 for v in Verdict}
    for v in verdicts:
        counts[v.value] += 1
    return {'summary': counts}


def write_frame(frame: pd.DataFrame, stream: TextIO) -> None:
    frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT)


def payload_frame(payloads: List[Dict[str, Any]]) -> pd.DataFrame:
    """Flatten report payloads into one CSV row each."""
    return pd.json_normalize([to_jsonable(p) for p in payloads])


__all__ = ['FLOAT_FORMAT', 'json_serial', 'to_jsonable', 'dumps', 'write_json_line', 'summary_line',
           'write_frame', 'payload_frame']
