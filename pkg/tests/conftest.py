import pytest

from spherecut.gadgets import grid
from spherecut.graph import EmbeddedGraph, ProblemSpec, build_graph

FAMILY = [(2, 2), (2, 3), (3, 3), (3, 4)]


def tight_spec(g: EmbeddedGraph, k: int) -> ProblemSpec:
    """Balance window [floor(n/k), ceil(n/k) + 1) on total weight n."""
    n = g.total_weight
    return ProblemSpec(k, n // k, -(-n // k) + 1, g.total_cost + 1)


def family():
    for r, c in FAMILY:
        for k in (2, 3):
            g = grid(r, c)
            yield f"{r}x{c}-k{k}", g, tight_spec(g, k)


def triangle(weights=(1, 1, 1), costs=(1, 1, 1)) -> EmbeddedGraph:
    return build_graph(
        {
            "vertices": [{"id": i, "weight": w} for i, w in enumerate(weights)],
            "edges": [
                {"id": 0, "u": 0, "v": 1, "cost": costs[0]},
                {"id": 1, "u": 1, "v": 2, "cost": costs[1]},
                {"id": 2, "u": 2, "v": 0, "cost": costs[2]},
            ],
            "rotation": {"0": [0, 2], "1": [1, 0], "2": [2, 1]},
        }
    )


def path(n: int, weights=None) -> EmbeddedGraph:
    weights = weights or [1] * n
    rot = {str(i): [e for e in (i - 1, i) if 0 <= e < n - 1] for i in range(n)}
    return build_graph(
        {
            "vertices": [{"id": i, "weight": weights[i]} for i in range(n)],
            "edges": [{"id": i, "u": i, "v": i + 1} for i in range(n - 1)],
            "rotation": rot,
        }
    )


@pytest.fixture
def g22():
    return grid(2, 2)


@pytest.fixture
def g33():
    return grid(3, 3)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    n, title = mark.args
    failed = call.excinfo is not None
    prev = item.config._criteria.get(n, (title, True))
    if call.when == "call" or failed:
        item.config._criteria[n] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(crit):
        title, ok = crit[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
