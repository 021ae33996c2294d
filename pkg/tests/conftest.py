from datetime import datetime, timezone
from pathlib import Path

import pytest

from devrep.events import filter_actors_and_window, parse_event_log
from devrep.network import DeveloperNetwork, EdgeWeights, build_network

DATA_DIR = Path(__file__).parent / "data"

WINDOW_START = datetime(2021, 1, 1, tzinfo=timezone.utc)
WINDOW_END = datetime(2022, 1, 1, tzinfo=timezone.utc)


@pytest.fixture
def events_small_path() -> Path:
    return DATA_DIR / "events_small.jsonl"


@pytest.fixture
def small_log(events_small_path):
    """The bundled 10-record fixture after the full ingest pipeline."""
    with open(events_small_path) as handle:
        raw = parse_event_log(handle)
    return filter_actors_and_window(raw, WINDOW_START, WINDOW_END)


@pytest.fixture
def small_network(small_log) -> DeveloperNetwork:
    return build_network(small_log, window_days=30)


def path_graph(*names: str, weight: int = 1) -> DeveloperNetwork:
    """A path through the given vertices with uniform edge totals."""
    edges = {}
    for a, b in zip(names, names[1:]):
        key = (a, b) if a < b else (b, a)
        edges[key] = EdgeWeights(coedit=weight, review=0)
    return DeveloperNetwork(names, edges)


def complete_graph(*names: str, weight: int = 1) -> DeveloperNetwork:
    edges = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            key = (a, b) if a < b else (b, a)
            edges[key] = EdgeWeights(coedit=weight, review=0)
    return DeveloperNetwork(names, edges)
