import numpy as np
import pytest

from conftest import dd
from tvgcg.fem import assemble, solve_state
from tvgcg.gcg import LOG_COLUMNS, GcgSolver, MaxIterExceeded, Stagnated, Status, solve
from tvgcg.insertion import Stagnated as InsertionStagnated
from tvgcg.insertion import dinkelbach
from tvgcg.problems import CASTLE, castle_observation
from tvgcg.tvcalc import perimeter


@pytest.fixture(scope="module")
def castle16():
    mesh = dd(16)
    fem = assemble(mesh)
    solver = GcgSolver(fem, castle_observation(mesh), CASTLE["alpha"])
    return solver, solver.run()


def test_constant_observation_certified_immediately():
    mesh = dd(8)
    fem = assemble(mesh, 1.0)
    y_obs = solve_state(fem, np.ones(mesh.n_triangles))
    fem.n_solves = 0
    res = solve(fem, y_obs, 1e-3)
    assert res.converged and len(res.log) == 1
    assert res.log[0]["zeta"] == 0.0 and res.atoms == []
    assert res.control == pytest.approx(np.ones(mesh.n_triangles), abs=1e-9)
    assert res.n_pde_solves == 2


def test_castle_converges(castle16):
    _, res = castle16
    assert res.status is Status.CONVERGED
    assert res.raise_for_status() is res
    last = res.log[-1]
    assert last["zeta"] <= 1e-10
    assert list(res.log[0])[: len(LOG_COLUMNS)] == list(LOG_COLUMNS)
    assert [r["k"] for r in res.log] == list(range(len(res.log)))


def test_pde_solve_count(castle16):
    _, res = castle16
    R = len(res.log)
    assert res.n_pde_solves == 1 + R + (R - 1)


def test_certificate_bounds_gap(castle16):
    _, res = castle16
    final = res.log[-1]["M"]
    for row in res.log:
        assert row["M"] - final <= row["zeta"] + 1e-12 * (1 + abs(final))


def test_energy_non_increasing(castle16):
    _, res = castle16
    M = [r["M"] for r in res.log]
    assert all(b <= a + 1e-13 * abs(a) for a, b in zip(M, M[1:]))
    for r in res.log:
        assert r["M"] == pytest.approx(r["J_internal"], rel=1e-9)
        assert r["J"] == pytest.approx(CASTLE["alpha"] * r["J_internal"], rel=1e-12)


def test_tv_bounded_by_weights(castle16):
    _, res = castle16
    for r in res.log:
        assert r["tv"] <= r["sum_gamma"] + 1e-12 * (1 + r["sum_gamma"])


def test_iterate_reconstruction(castle16):
    solver, res = castle16
    n = solver.fem.mesh.n_triangles
    u = np.full(n, res.c)
    for g, a in zip(res.gamma, res.atoms):
        u += g * a.control(n)
    assert res.control == pytest.approx(u, abs=1e-14)
    assert np.all(res.gamma > 0)
    ref = solve_state(assemble(solver.fem.mesh), res.control)
    assert res.state == pytest.approx(ref, abs=1e-9 * np.abs(ref).max())


def test_first_order_conditions(castle16):
    solver, res = castle16
    mesh = solver.fem.mesh
    p, m = solver.dual_variable(res.state)
    assert abs(m) <= 1e-10 * np.abs(p).max()
    assert dinkelbach(mesh, p).lambda_bar >= 1.0 - 1e-9
    for a in res.atoms:
        ratio = np.sum(p[a.set] * mesh.areas[a.set]) / perimeter(mesh, a.set)
        assert ratio == pytest.approx(1.0, abs=1e-8)


def test_iteration_cap():
    mesh = dd(16)
    res = GcgSolver(assemble(mesh), castle_observation(mesh), CASTLE["alpha"], max_iter=2).run()
    assert res.status is Status.MAX_ITER and not res.converged
    assert len(res.log) == 2 and len(res.atoms) >= 1
    with pytest.raises(MaxIterExceeded) as exc:
        res.raise_for_status()
    assert exc.value.result is res


def test_deterministic_log():
    mesh = dd(8)
    runs = [solve(assemble(mesh), castle_observation(mesh), CASTLE["alpha"]).log for _ in range(2)]
    strip = [[{k: v for k, v in r.items() if k != "wall_ms"} for r in log] for log in runs]
    assert strip[0] == strip[1]


def test_stagnated_is_insertion_stagnation():
    assert issubclass(Stagnated, InsertionStagnated)


def test_invalid_inputs():
    mesh = dd(4)
    fem = assemble(mesh)
    with pytest.raises(ValueError):
        GcgSolver(fem, np.zeros(mesh.n_triangles), 0.0)
    with pytest.raises(ValueError):
        GcgSolver(fem, np.zeros(7), 1.0)
