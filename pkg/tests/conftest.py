from pathlib import Path

import pytest

from mcsort import io as mio
from mcsort.core import ProblemInstance
from mcsort.learn import (
    LearnConfig,
    learn_complexity_first,
    learn_margin_first,
)

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def firms_files():
    return (DATA / "firms.csv").read_text(), (DATA / "firm_examples.csv").read_text()


@pytest.fixture(scope="session")
def firms_bundle(firms_files):
    matrix_text, examples_text = firms_files
    matrix, names, ids = mio.parse_matrix(matrix_text)
    examples = mio.parse_examples(examples_text, ids, 4)
    return matrix, names, ids, examples


@pytest.fixture(scope="session")
def firms_instance(firms_bundle):
    matrix, _, _, examples = firms_bundle
    return ProblemInstance.from_matrix(matrix, 4, 4, examples)


@pytest.fixture(scope="session")
def margin_outcome(firms_instance):
    return learn_margin_first(firms_instance, LearnConfig())


@pytest.fixture(scope="session")
def complexity_outcome(firms_instance):
    return learn_complexity_first(firms_instance, LearnConfig())
