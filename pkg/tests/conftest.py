import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ripscope.complex import build_rips_filtration  # noqa: E402
from ripscope.ingest import PointCloud, generate_octagon, generate_octahedron, load_fixture  # noqa: E402


@pytest.fixture(scope="session")
def octagon():
    return generate_octagon(2.0)


@pytest.fixture(scope="session")
def octagon_filt(octagon):
    return build_rips_filtration(octagon, 3, 4.2)


@pytest.fixture(scope="session")
def octahedron_filt():
    return build_rips_filtration(generate_octahedron(), 3, 3.1)


@pytest.fixture(scope="session")
def c20_filt():
    return build_rips_filtration(load_fixture("c20"), 3, 4.0)


def random_cloud(seed: int, lo: int = 6, hi: int = 9) -> PointCloud:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(lo, hi + 1))
    return PointCloud(rng.uniform(0.0, 3.0, size=(n, 3)))


@pytest.fixture
def cloud_factory():
    return random_cloud
