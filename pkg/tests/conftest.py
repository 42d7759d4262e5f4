from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_int_grid(rng: np.random.Generator, width: int, height: int, lo=0, hi=9):
    """Integer-valued float cost grid; integer costs keep every solver's
    floating-point sums exact, so cross-solver checks can use ==."""
    return rng.integers(lo, hi + 1, size=(height, width)).astype(np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)
