from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ftuaudit import oracle
from ftuaudit.metrics import Predictor

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def toy():
    """Four points, uniform mass, p = (0.4, 0.4, 0.55, 0.7); x1, x2 in B."""
    return oracle.example1()


@pytest.fixture
def toy_predictors():
    return {
        "f1": Predictor([Fraction("0.45")] * 3 + [Fraction("0.7")]),
        "f2": Predictor([Fraction("0.475"), Fraction("0.55"), Fraction("0.475"), Fraction("0.55")]),
        "f3": Predictor([Fraction("0.5125")] * 4),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
