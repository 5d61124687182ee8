"""Reading and writing mesh documents.

A mesh document is a JSON object::

    {
      "schema_version": 1,
      "dim": 2,                       # 2 = weighted surface, 3 = tetrahedral 3-manifold
      "vertex_count": 4,
      "faces": [[0, 1, 2], ...],      # dim 2 (0-based); use "tets" for dim 3
      "weights": {"0-1": 0.0, ...},   # dim 2 only, keys "i-j" with i < j; omitted = all zero
      "radii": [1.0, 1.0, 1.0, 1.0]   # optional initial metric
    }

Floats are written with ``repr`` precision, so a document written and read
back yields identical arrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import meshes
from .complex_core import TetComplex, WeightedSurface, build_surface, build_tet_complex
from .errors import ConfigError

SCHEMA_VERSION = 1
BUNDLED = ("tetrahedron", "octahedron", "torus7", "boundary_4simplex")


@dataclass
class MeshDocument:
    dim: int
    complex: WeightedSurface | TetComplex
    radii: np.ndarray | None = None

    @property
    def vertex_count(self) -> int:
        return self.complex.vertex_count

    def radii_or_default(self) -> np.ndarray:
        return self.radii.copy() if self.radii is not None else np.ones(self.vertex_count)

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "dim": self.dim, "vertex_count": int(self.vertex_count)}
        if self.dim == 2:
            out["faces"] = self.complex.faces.tolist()
            out["weights"] = {
                f"{i}-{j}": float(w) for (i, j), w in zip(self.complex.edges.tolist(), self.complex.weights)
            }
        else:
            out["tets"] = self.complex.tets.tolist()
        if self.radii is not None:
            out["radii"] = [float(x) for x in self.radii]
        return out


def _parse_weight_key(key: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in key.split("-"))
    except ValueError:
        raise ConfigError(f"weight key {key!r} is not of the form 'i-j'") from None
    if not a < b:
        raise ConfigError(f"weight key {key!r} must have i < j")
    return a, b


def parse_mesh(data: dict) -> MeshDocument:
    """Validate a decoded mesh document and build its complex.

    Raises
    ------
    ConfigError
        For schema problems; combinatorial problems surface as the
        :class:`~alphaflow.errors.ComplexError` subclasses.
    """
    if not isinstance(data, dict):
        raise ConfigError("mesh document must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}")
    dim = data.get("dim")
    n = data.get("vertex_count")
    if dim not in (2, 3):
        raise ConfigError("dim must be 2 or 3")
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise ConfigError("vertex_count must be a positive integer")
    try:
        if dim == 2:
            if "faces" not in data or "tets" in data:
                raise ConfigError("a 2D mesh needs 'faces' and no 'tets'")
            raw = data.get("weights", {})
            if not isinstance(raw, dict):
                raise ConfigError("weights must be an object keyed 'i-j'")
            weights = {_parse_weight_key(k): float(v) for k, v in raw.items()}
            cx = build_surface(n, data["faces"], weights if weights else 0.0)
        else:
            if "tets" not in data or "faces" in data or "weights" in data:
                raise ConfigError("a 3D mesh needs 'tets' and neither 'faces' nor 'weights'")
            cx = build_tet_complex(n, data["tets"])
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed mesh: {exc}") from exc
    radii = None
    if data.get("radii") is not None:
        try:
            radii = np.asarray(data["radii"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("radii must be a list of numbers") from None
        if radii.shape != (n,):
            raise ConfigError(f"radii must have length {n}")
        if not np.all(radii > 0):
            raise ConfigError("radii must be positive")
    return MeshDocument(dim, cx, radii)


def read_mesh(path) -> MeshDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_mesh(data)


def write_mesh(doc: MeshDocument, path) -> None:
    Path(path).write_text(dumps_mesh(doc), encoding="utf-8")


def dumps_mesh(doc: MeshDocument) -> str:
    """JSON text with one top-level field per line."""
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.to_dict().items())
    return "{\n" + body + "\n}\n"


def bundled_mesh_path(name: str):
    """Path of one of the meshes shipped with the package (see ``BUNDLED``)."""
    if name not in BUNDLED:
        raise ConfigError(f"no bundled mesh {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("alphaflow") / "data" / f"{name}.json"


def generate(name: str) -> MeshDocument:
    """Build a bundled mesh from its generator (equal radii, zero weights)."""
    if name in meshes.SURFACES:
        cx = meshes.SURFACES[name]()
        return MeshDocument(2, cx, np.ones(cx.vertex_count))
    if name in meshes.TET_COMPLEXES:
        cx = meshes.TET_COMPLEXES[name]()
        return MeshDocument(3, cx, np.ones(cx.vertex_count))
    raise ConfigError(f"unknown mesh generator {name!r}")


def read_vector(path, n: int, what: str) -> np.ndarray:
    """A length-``n`` float vector from a JSON list or a whitespace-separated text file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from exc
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        values = text.replace(",", " ").split()
    try:
        v = np.asarray(values, dtype=float).ravel()
    except (TypeError, ValueError):
        raise ConfigError(f"{what} file {path} does not hold numbers") from None
    if v.shape != (n,):
        raise ConfigError(f"{what} must have {n} entries, got {v.size}")
    return v
