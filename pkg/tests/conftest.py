from pathlib import Path

import numpy as np
import pytest

from mining.pipeline import training_dataset
from mining.tree import Attribute, Dataset
from utils.config import PipelineConfig
from utils.tables import read_table

FILES = Path(__file__).parent / 'files'


def read_golden(name: str) -> str:
    return (FILES / name).read_text(encoding='utf-8')


def random_dataset(
    rng: np.random.Generator,
    max_attributes: int = 4,
    max_values: int = 3,
    max_rows: int = 12,
    classes: tuple[str, ...] = ('Pos', 'Neg', 'Mid'),
    conflict_free: bool = False,
) -> Dataset:
    """Small categorical dataset; every declared value set is a0..aK."""
    n_attributes = int(rng.integers(1, max_attributes + 1))
    attributes = [
        Attribute(f"A{i}", tuple(f"v{j}" for j in range(int(rng.integers(1, max_values + 1)))))
        for i in range(n_attributes)
    ]
    n_rows = int(rng.integers(1, max_rows + 1))
    rows = [tuple(str(rng.choice(a.values)) for a in attributes) for _ in range(n_rows)]
    if conflict_free:
        # One label per distinct attribute vector.
        label_of = {}
        labels = [label_of.setdefault(row, str(rng.choice(classes))) for row in rows]
    else:
        labels = [str(rng.choice(classes)) for _ in range(n_rows)]
    return Dataset.build(attributes, rows, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def reference_frame():
    return read_table(FILES / 'reference_discretized.csv')


@pytest.fixture
def reference_data(reference_frame):
    return training_dataset(reference_frame)


@pytest.fixture
def default_config(tmp_path):
    return PipelineConfig(out_dir=tmp_path, run_log=None)
