import numpy as np
import pytest

from bubblekit import greens


@pytest.fixture(scope="session")
def disk():
    return greens.build_backend(greens.DomainSpec.unit_disk())


@pytest.fixture(scope="session")
def circle_nystrom():
    """The unit circle discretized as a generic parametric curve."""
    theta = 2.0 * np.pi * np.arange(256) / 256
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    return greens.build_backend(greens.DomainSpec.parametric(nodes))


@pytest.fixture(scope="session")
def ellipse_nystrom():
    theta = 2.0 * np.pi * np.arange(256) / 256
    nodes = np.column_stack([1.2 * np.cos(theta), 0.8 * np.sin(theta)])
    return greens.build_backend(greens.DomainSpec.parametric(nodes))
