import numpy as np
import pytest

from finslerjet.geometry import ChartPoint, FinslerModel

EXAMPLE_F = "sqrt((y1)^2 + (x1)^2*(y2)^3/y3)"
PRINTED_F = "x1*sqrt(((y1)^2*y3 + (y2)^3)/y3)"
FLAT_F = "sqrt((y1)^2 + (y2)^2 + (y3)^2)"
EXAMPLE_BOX = [(0.5, 2.5), (-1, 1), (-1, 1), (0.5, 2), (0.5, 2), (0.5, 2)]
FLAT_BOX = [(0.5, 1.5)] * 3 + [(-1.5, -0.5)] * 3


def example_model(**kw):
    return FinslerModel.from_strings(3, EXAMPLE_F, ["x1", "0", "0"], ["x1", "y3", "x1*y1"],
                                     name="example", **kw)


def printed_model():
    return FinslerModel.from_strings(3, PRINTED_F, ["x1", "0", "0"],
                                     ["x1", "y3", "((y1)^2*y3 + (y2)^3)/y3", "x1*y1"])


def flat_model(phi=("-x1", "-x2", "-x3"), domain=("-(x1*y1 + x2*y2 + x3*y3)",)):
    return FinslerModel.from_strings(3, FLAT_F, list(phi), list(domain), name="flat")


def box_points(box, count, seed, model=None):
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    out = []
    while len(out) < count:
        p = ChartPoint.from_z(rng.uniform(lo, hi))
        if model is None or model.admissible(p, 1e-3):
            out.append(p)
    return out


@pytest.fixture(scope="session")
def example():
    return example_model()


@pytest.fixture(scope="session")
def example_normalized():
    return example_model().negated_phi()


@pytest.fixture(scope="session")
def flat():
    return flat_model()


@pytest.fixture(scope="session")
def example_points(example):
    return box_points(EXAMPLE_BOX, 20, 1, example)


@pytest.fixture(scope="session")
def flat_points(flat):
    return box_points(FLAT_BOX, 20, 2, flat)


P0 = ChartPoint((2.0, 0.0, 0.0), (1.0, 2.0, 1.0))
Q0 = ChartPoint((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0))


ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
