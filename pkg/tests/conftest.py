import os
import sys
from pathlib import Path

import numpy as np
import pytest


# Ensure project root is on sys.path so `import tsdae` works in tests
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

FIXTURES = Path(PROJECT_ROOT) / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example1_path() -> Path:
    return FIXTURES / "example1.json"


@pytest.fixture
def example2_path() -> Path:
    return FIXTURES / "example2.json"
