"""
export.py

JSON and CSV writers for the pydantic result models. CSV goes through pandas;
nested models (vectors over mu, residual rows) are flattened with
json_normalize so every row is one record.

Usage:
    from x0n.export import write_records
    write_records([row1, row2], fmt='csv', path='out.csv')
"""

import json
import sys
from typing import Iterable, List, Optional, Union

import pandas as pd
from pydantic import BaseModel

Record = Union[BaseModel, dict]


def _as_dict(record: Record) -> dict:
    return record.model_dump() if isinstance(record, BaseModel) else dict(record)


def to_frame(records: Iterable[Record], explode: Optional[str] = None) -> pd.DataFrame:
    """One row per record; with explode, one row per element of that list field."""
    data = [_as_dict(r) for r in records]
    if explode:
        meta = [k for k in (data[0] if data else {}) if k != explode and not isinstance(data[0][k], list)]
        return pd.json_normalize(data, record_path=explode, meta=meta, record_prefix=f"{explode}.")
    return pd.json_normalize(data)


def to_json(records: Union[Record, List[Record]]) -> str:
    if isinstance(records, list):
        return json.dumps([_as_dict(r) for r in records], indent=2)
    return json.dumps(_as_dict(records), indent=2)


def write_records(records: Union[Record, List[Record]], fmt: str = 'json', path: Optional[str] = None,
                  explode: Optional[str] = None):
    """Write to path, or stdout when path is None."""
    if fmt == 'json':
        text = to_json(records)
    elif fmt == 'csv':
        rows = records if isinstance(records, list) else [records]
        text = to_frame(rows, explode=explode).to_csv(index=False)
    else:
        raise ValueError(f"unknown output format {fmt!r}; expected 'json' or 'csv'")
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w") as f:
        f.write(text)
