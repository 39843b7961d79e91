import numpy as np
import pytest
from hypothesis import settings

from tvgcg.mesh import MeshKind, MeshSpec, build_mesh

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

UNIT = (0.0, 1.0, 0.0, 1.0)


def dd(n, domain=(-1.0, 1.0, -1.0, 1.0)):
    return build_mesh(MeshSpec(MeshKind.DOUBLE_DIAGONAL, n=n, domain=domain))


def jittered(n, jitter=0.0, seed=0, domain=(-1.0, 1.0, -1.0, 1.0)):
    return build_mesh(MeshSpec(MeshKind.JITTERED, n=n, jitter=jitter, seed=seed, domain=domain))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit2():
    """Double-diagonal n=2 on the unit square (16 triangles)."""
    return dd(2, UNIT)


def sinusoid(x):
    """Exact state on (-1, 1)^2 for the load (pi^2 / 2) * sinusoid."""
    return np.sin(np.pi * (x[:, 0] + 1) / 2) * np.sin(np.pi * (x[:, 1] + 1) / 2)


def l2_error(mesh, y, exact, level=3):
    """L2 distance between a P1 field and a function, by subtriangle centroid quadrature."""
    from tvgcg.problems import _subtriangle_points

    lam = _subtriangle_points(level)
    pts = np.einsum("qk,tkd->tqd", lam, mesh.vertices[mesh.triangles])
    yh = np.einsum("qk,tk->tq", lam, y[mesh.triangles])
    ex = exact(pts.reshape(-1, 2)).reshape(yh.shape)
    return float(np.sqrt(np.sum(mesh.areas[:, None] * (yh - ex) ** 2) / lam.shape[0]))


def manufactured_errors(ns=(8, 16, 32)):
    from tvgcg.fem import assemble, solve_state
    from tvgcg.problems import project_indicator

    errs = []
    for n in ns:
        mesh = dd(n)
        u = project_indicator(mesh, lambda x: np.pi**2 / 2 * sinusoid(x), 3)
        errs.append(l2_error(mesh, solve_state(assemble(mesh), u), sinusoid))
    return errs


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
