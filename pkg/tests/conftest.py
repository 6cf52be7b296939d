import json
from pathlib import Path

import pytest

from orthoclust.corpus import DataPoint

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def tiny_datapoints() -> list[DataPoint]:
    rows = [
        ("d1", "after", "aftah", "he said aftah dark", "AA"),
        ("d2", "rather", "ratha", "I would ratha not", "WS"),
        ("d3", "quarters", "qua'ters", "back to the qua'ters now", "AA"),
        ("d4", "blooming", "bloomin", "that bloomin thing again", "BW"),
        ("d5", "hunters", "hoonters", "the hoonters came home", "DE"),
    ]
    return [
        DataPoint(id=i, standard=s, observed=o, context=c, dtag=t)
        for i, s, o, c, t in rows
    ]


def write_jsonl_dataset(path: Path, rows: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def jsonl_dataset(tmp_path, tiny_datapoints) -> Path:
    rows = [
        {
            "id": dp.id,
            "standard": dp.standard,
            "observed": dp.observed,
            "context": dp.context,
            "dtag": dp.dtag,
        }
        for dp in tiny_datapoints
    ]
    return write_jsonl_dataset(tmp_path / "dataset.jsonl", rows)
