"""Set up and run a configured solve, and write its outputs."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .fem import FemSystem, assemble, solve_state
from .gcg import LOG_COLUMNS, GcgResult, GcgSolver
from .io import write_csv, write_vtk
from .mesh import Mesh, build_mesh
from .problems import castle_observation, two_spheres_observation
from .tvcalc import tv_p0

__all__ = ["Experiment", "prepare", "run", "write_outputs", "ATOM_COLUMNS"]

logger = logging.getLogger(__name__)

ATOM_COLUMNS = ("index", "weight", "perimeter", "n_triangles")


@dataclass
class Experiment:
    config: RunConfig
    mesh: Mesh
    fem: FemSystem
    y_obs: np.ndarray
    reference_control: np.ndarray | None = None

    def energy(self, u: np.ndarray) -> float:
        """``0.5 ||K u - y_o||^2 + alpha TV(u)``; costs one state solve."""
        y = solve_state(self.fem, u)
        if self.y_obs.shape == (self.mesh.n_vertices,):
            r = y - self.y_obs
            misfit = 0.5 * float(r @ (self.fem.M @ r))
        else:
            yy = float(np.sum(self.mesh.areas * self.y_obs**2))
            misfit = 0.5 * (float(y @ (self.fem.M @ y)) - 2.0 * float(y @ self.fem.load_p0(self.y_obs)) + yy)
        return misfit + self.config.alpha * tv_p0(self.mesh, u)


def _load_observation(path: Path, mesh: Mesh) -> np.ndarray:
    y = np.loadtxt(path, dtype=float, ndmin=1)
    if y.shape not in ((mesh.n_triangles,), (mesh.n_vertices,)):
        raise ValueError(
            f"{path}: {y.size} values match neither {mesh.n_triangles} triangles nor {mesh.n_vertices} vertices"
        )
    return y


def prepare(config: RunConfig) -> Experiment:
    mesh = build_mesh(config.mesh)
    fem = assemble(mesh, config.c_coeff, tol=config.cg_tol)
    ref = None
    if config.observation == "castle":
        y_obs = castle_observation(mesh)
    elif config.observation == "two_spheres":
        y_obs, ref = two_spheres_observation(fem)
        fem.n_solves = 0  # data generation is not part of the solve budget
    else:
        y_obs = _load_observation(config.observation_file, mesh)
    return Experiment(config, mesh, fem, y_obs, ref)


def run(exp: Experiment) -> GcgResult:
    cfg = exp.config
    solver = GcgSolver(exp.fem, exp.y_obs, cfg.alpha, zeta_tol=cfg.zeta_tol, ssn_tol=cfg.ssn_tol,
                       max_iter=cfg.max_iter)
    return solver.run()


def write_outputs(exp: Experiment, result: GcgResult, out_dir: Path | None = None) -> list[Path]:
    out = Path(out_dir if out_dir is not None else exp.config.output_dir)
    written = []
    if exp.config.write_csv:
        write_csv(out / "log.csv", LOG_COLUMNS, result.log)
        atoms = [
            {"index": i, "weight": g, "perimeter": a.perimeter, "n_triangles": len(a.set)}
            for i, (g, a) in enumerate(zip(result.gamma, result.atoms))
        ]
        write_csv(out / "atoms.csv", ATOM_COLUMNS, atoms)
        written += [out / "log.csv", out / "atoms.csv"]
    if exp.config.write_vtk:
        write_vtk(out / "control.vtk", exp.mesh, cell_data={"control": result.control})
        write_vtk(out / "state.vtk", exp.mesh, point_data={"state": result.state})
        write_vtk(out / "dual.vtk", exp.mesh, cell_data={"dual": result.dual})
        written += [out / "control.vtk", out / "state.vtk", out / "dual.vtk"]
    return written
