from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def frames_dir() -> Path:
    return FIXTURES / "frames"
