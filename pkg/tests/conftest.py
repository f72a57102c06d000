from __future__ import annotations

from importlib import resources

import pytest

from unitcanvas.dataset import Dataset, Lexicon, build_lexicon, load_csv
from unitcanvas.layout import apply_layout, initial_cluster
from unitcanvas.session import Session, SessionConfig
from unitcanvas.view_state import ViewState


def load_fixture() -> Dataset:
    data = resources.files("unitcanvas.resources").joinpath("colleges.csv").read_bytes()
    return load_csv(data)


@pytest.fixture(scope="session")
def dataset() -> Dataset:
    return load_fixture()


@pytest.fixture(scope="session")
def lexicon(dataset) -> Lexicon:
    return build_lexicon(dataset)


@pytest.fixture
def state(dataset) -> ViewState:
    s = ViewState.initial(dataset)
    apply_layout(s, initial_cluster(s))
    return s


@pytest.fixture
def session(dataset) -> Session:
    return Session(dataset, SessionConfig(seed=7))


def make_session(dataset, seed: int = 7) -> Session:
    return Session(dataset, SessionConfig(seed=seed))


def event(kind: str, payload: dict, t_ms: int = 0, modality: str = "touch", seq: int = 0) -> dict:
    return {"seq": seq, "t_ms": t_ms, "kind": kind, "payload": payload, "modality": modality}


def lasso_around(session: Session, row_ids) -> list[list[float]]:
    """Rectangle polygon slightly larger than the points' bounding box."""
    xs = [session.state.points[r].x for r in row_ids]
    ys = [session.state.points[r].y for r in row_ids]
    x0, x1, y0, y1 = min(xs) - 4, max(xs) + 4, min(ys) - 4, max(ys) + 4
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
