import numpy as np
import pytest

from eegpoison import _pykernels, kernels
from eegpoison.data import SynthSpec, stratified_split, synthesize

try:
    from eegpoison import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ["python"] + (["cython"] if _ckernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = _pykernels if request.param == "python" else _ckernels
    for name in ("best_gini_split", "stump_impurity", "knn_predict"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture(scope="session")
def separable():
    return synthesize(SynthSpec(per_class_count=100, separation=6.0, seed=0))


@pytest.fixture(scope="session")
def separable_split(separable):
    return stratified_split(separable, 0.8, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
