"""Run configuration: flat ``section.key = value`` files and experiment presets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .mesh import MeshKind, MeshSpec

__all__ = ["ConfigError", "RunConfig", "PRESETS", "load_config", "parse_config"]

PRESETS = {
    "castle": {"alpha": 1e-4, "c_coeff": 0.0, "observation": "castle"},
    "two_spheres": {"alpha": 1e-5, "c_coeff": 0.5, "observation": "two_spheres"},
}
OBSERVATIONS = ("castle", "two_spheres", "file")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to run one solve.

    ``observation`` is ``castle`` (P0 indicator of the centered square),
    ``two_spheres`` (state of the two-disk control) or ``file`` (values
    read from ``observation_file``, one per triangle or per vertex).
    """

    preset: str = "custom"
    alpha: float | None = None
    c_coeff: float = 0.0
    observation: str = "file"
    observation_file: Path | None = None
    mesh: MeshSpec = field(default_factory=lambda: MeshSpec(MeshKind.DOUBLE_DIAGONAL, n=32))
    zeta_tol: float = 1e-10
    ssn_tol: float = 1e-14
    cg_tol: float = 1e-12
    max_iter: int = 500
    output_dir: Path = Path("out")
    write_vtk: bool = True
    write_csv: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.preset not in ("custom", *PRESETS):
            raise ConfigError(f"problem.preset: unknown preset {self.preset!r}")
        if self.alpha is None:
            raise ConfigError("problem.alpha: required for preset=custom")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError("problem.alpha: must be positive")
        if not (math.isfinite(self.c_coeff) and self.c_coeff >= 0):
            raise ConfigError("problem.c_coeff: must be nonnegative")
        if self.observation not in OBSERVATIONS:
            raise ConfigError(f"problem.observation: expected one of {OBSERVATIONS}")
        if self.observation == "file" and self.observation_file is None:
            raise ConfigError("problem.observation_file: required when observation=file")
        for name in ("zeta_tol", "ssn_tol", "cg_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"solver.{name}: must be positive")
        if self.max_iter < 1:
            raise ConfigError("solver.max_iter: must be at least 1")
        if self.preset in PRESETS:
            for key, val in PRESETS[self.preset].items():
                if getattr(self, key) != val:
                    raise ConfigError(f"problem.{key}: preset {self.preset} requires {val!r}")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "RunConfig":
        if name not in PRESETS:
            raise ConfigError(f"problem.preset: unknown preset {name!r}")
        return cls(preset=name, **PRESETS[name], **overrides)


def _parse_bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_int(s):
    return int(s.strip(), 0)


# key -> (RunConfig field or "mesh.<attr>", parser)
KEYS = {
    "problem.preset": ("preset", str),
    "problem.alpha": ("alpha", float),
    "problem.c_coeff": ("c_coeff", float),
    "problem.observation": ("observation", str),
    "problem.observation_file": ("observation_file", Path),
    "mesh.kind": ("mesh.kind", MeshKind),
    "mesh.n": ("mesh.n", _parse_int),
    "mesh.jitter": ("mesh.jitter", float),
    "mesh.seed": ("mesh.seed", _parse_int),
    "solver.zeta_tol": ("zeta_tol", float),
    "solver.ssn_tol": ("ssn_tol", float),
    "solver.cg_tol": ("cg_tol", float),
    "solver.max_iter": ("max_iter", _parse_int),
    "output.dir": ("output_dir", Path),
    "output.vtk": ("write_vtk", _parse_bool),
    "output.csv": ("write_csv", _parse_bool),
}


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse the flat key-value format.

    Blank lines and lines starting with ``#`` or ``;`` are ignored. Relative
    paths are resolved against ``base_dir`` when given.
    """
    values: dict[str, object] = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        if not val:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        target, parser = KEYS[key]
        try:
            values[target] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        seen[key] = lineno

    mesh_kw = {k.split(".", 1)[1]: values.pop(k) for k in list(values) if k.startswith("mesh.")}
    if base_dir is not None:
        for k in ("observation_file", "output_dir"):
            if k in values and not values[k].is_absolute():
                values[k] = base_dir / values[k]
    try:
        mesh = replace(MeshSpec(MeshKind.DOUBLE_DIAGONAL, n=32), **mesh_kw)
    except ValueError as exc:
        raise ConfigError(f"mesh: {exc}") from None
    preset = values.get("preset", "custom")
    if preset in PRESETS:
        for k, v in PRESETS[preset].items():
            values.setdefault(k, v)
    elif preset != "custom":
        raise ConfigError(f"problem.preset: unknown preset {preset!r}")
    known = {f.name for f in fields(RunConfig)}
    assert set(values) <= known
    return RunConfig(mesh=mesh, **values)


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()  # OSError propagates to the caller
    return parse_config(text, base_dir=path.parent)
