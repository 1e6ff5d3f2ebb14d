import pytest
from hypothesis import settings

from robochat.config import default_map_path
from robochat.decoder import Lexicon
from robochat.world import WorldMap

# property tests run sim/planning code; wall-clock deadlines just add flakes
settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

DATA_DIR = "src/robochat/data"


@pytest.fixture(scope="session")
def office_map() -> WorldMap:
    return WorldMap.load(default_map_path())


@pytest.fixture(scope="session")
def lexicon(office_map) -> Lexicon:
    return Lexicon.from_map(office_map)


@pytest.fixture
def empty_map() -> WorldMap:
    """20 m x 20 m of open floor, 0.5 m cells."""
    return WorldMap.from_dict({
        "grid": ["0" * 40 for _ in range(40)],
        "resolution": 0.5,
        "locations": {"start": [10.0, 10.0, 0.0]},
        "objects": [],
    })
