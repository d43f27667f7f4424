import numpy as np
import pytest
from hypothesis import settings

from hfm.model import Dataset, build_dataset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion, summarised at the end")
    config._criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        label = marker.args[0]
        callspec = getattr(item, "callspec", None)
        if callspec is not None:
            label = f"{label} [{callspec.id}]"
        item.config._criteria.append((label, status))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in config._criteria:
        terminalreporter.write_line(f"[{status}] {label}")


@pytest.fixture
def toy4():
    """Binary toy: (x, y, a) = (0,0,1), (0.1,0,1), (0.5,0,2), (1,1,2)."""
    return build_dataset([[0.0], [0.1], [0.5], [1.0]], [[1], [1], [2], [2]], [0, 0, 0, 1])


@pytest.fixture
def toy3():
    return build_dataset([[0.0], [0.5], [1.0]], [[1], [2], [3]], [0, 0, 0])


def raw_dataset(points, groups, labels=None, predictions=None):
    """Dataset from points already in [0, 1], bypassing min-max scaling."""
    points = np.asarray(points, dtype=float)
    groups = np.asarray(groups)
    if groups.ndim == 1:
        groups = groups[:, None]
    if labels is None:
        labels = np.zeros(len(points), dtype=int)
    cards = tuple(int(c) for c in groups.max(axis=0))
    return Dataset(points, groups, np.asarray(labels), predictions, cards, 2)
