"""TSPLIB reading and writing, plus a seeded random Euclidean instance generator.

Vertices are 0-indexed everywhere in the Python API. The 1-indexed TSPLIB
convention only exists inside the text documents handled here.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class TsplibError(ValueError):
    """Raised for malformed or unsupported TSPLIB documents."""


class WeightKind(str, Enum):
    EUC_2D = "EUC_2D"
    CEIL_2D = "CEIL_2D"
    ATT = "ATT"
    GEO = "GEO"
    EXPLICIT = "EXPLICIT"


class ExplicitLayout(str, Enum):
    FULL_MATRIX = "FULL_MATRIX"
    UPPER_ROW = "UPPER_ROW"
    LOWER_ROW = "LOWER_ROW"
    LOWER_DIAG_ROW = "LOWER_DIAG_ROW"
    UPPER_DIAG_ROW = "UPPER_DIAG_ROW"


@dataclass(frozen=True)
class EdgeWeightKind:
    tag: WeightKind
    explicit_layout: Optional[ExplicitLayout] = None

    def __post_init__(self):
        tag = WeightKind(self.tag)
        layout = None if self.explicit_layout is None else ExplicitLayout(self.explicit_layout)
        if (tag is WeightKind.EXPLICIT) != (layout is not None):
            raise TsplibError("explicit_layout must be given exactly when the weight type is EXPLICIT")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "explicit_layout", layout)


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def edge_endpoints(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints (u, v), u < v, of every edge of K_n in canonical order."""
    return np.triu_indices(n, 1)


def edge_id(u: int, v: int, n: int) -> int:
    """Position of edge {u, v} in the canonical order of :func:`edge_endpoints`."""
    if u == v:
        raise ValueError("self-loops are not edges")
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def _nint(x):
    return np.floor(x + 0.5)


def _geo_radians(coord):
    # TSPLIB's truncated pi and DDD.MM encoding; degrees are truncated, not rounded
    deg = np.trunc(coord)
    minutes = coord - deg
    return 3.141592 * (deg + 5.0 * minutes / 3.0) / 180.0


def coordinate_weights(coords: np.ndarray, kind: WeightKind) -> np.ndarray:
    """Full symmetric integer weight matrix for a coordinate-based weight type."""
    x = coords[:, 0]
    y = coords[:, 1]
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    if kind is WeightKind.EUC_2D:
        w = _nint(np.sqrt(dx * dx + dy * dy))
    elif kind is WeightKind.CEIL_2D:
        w = np.ceil(np.sqrt(dx * dx + dy * dy))
    elif kind is WeightKind.ATT:
        r = np.sqrt((dx * dx + dy * dy) / 10.0)
        t = _nint(r)
        w = np.where(t < r, t + 1.0, t)
    elif kind is WeightKind.GEO:
        lat = _geo_radians(x)
        lon = _geo_radians(y)
        rrr = 6378.388
        q1 = np.cos(lon[:, None] - lon[None, :])
        q2 = np.cos(lat[:, None] - lat[None, :])
        q3 = np.cos(lat[:, None] + lat[None, :])
        arg = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
        w = np.trunc(rrr * np.arccos(arg) + 1.0)
    else:
        raise TsplibError(f"{kind} is not a coordinate weight type")
    w = w.astype(np.int64)
    np.fill_diagonal(w, 0)
    return w


@dataclass(frozen=True, eq=False)
class Instance:
    """A symmetric TSP instance.

    ``edge_list`` is only set for documents carrying an EDGE_DATA_SECTION,
    i.e. sparsified instances read back from disk.
    """

    name: str
    n: int
    weight_kind: WeightKind
    coords: Optional[np.ndarray] = None
    explicit_weights: Optional[np.ndarray] = None
    edge_list: Optional[tuple[tuple[int, int], ...]] = None
    explicit_layout: Optional[ExplicitLayout] = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        kind = WeightKind(self.weight_kind)
        object.__setattr__(self, "weight_kind", kind)
        if self.n < 1:
            raise ValueError("an instance needs at least one vertex")
        if kind is WeightKind.EXPLICIT:
            if self.explicit_weights is None:
                raise TsplibError("EXPLICIT instances need an explicit weight matrix")
            w = np.array(self.explicit_weights, dtype=np.int64)
            if w.shape != (self.n, self.n):
                raise TsplibError(f"weight matrix has shape {w.shape}, expected {(self.n, self.n)}")
            if not np.array_equal(w, w.T):
                raise TsplibError("explicit weight matrix is not symmetric")
            if self.coords is not None:
                raise TsplibError("EXPLICIT instances cannot also carry coordinates")
            object.__setattr__(self, "explicit_weights", w)
            if self.explicit_layout is None:
                object.__setattr__(self, "explicit_layout", ExplicitLayout.FULL_MATRIX)
            w = w.copy()
            np.fill_diagonal(w, 0)
        else:
            if self.coords is None or self.explicit_weights is not None:
                raise TsplibError(f"{kind.value} instances need coordinates and no explicit matrix")
            c = np.asarray(self.coords, dtype=float)
            if c.shape != (self.n, 2):
                raise TsplibError(f"coordinates have shape {c.shape}, expected {(self.n, 2)}")
            object.__setattr__(self, "coords", c)
            w = coordinate_weights(c, kind)
        if (w < 0).any():
            raise TsplibError("edge weights must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.edge_list is not None:
            object.__setattr__(self, "edge_list", _check_edge_list(self.edge_list, self.n))

    @property
    def m(self) -> int:
        return edge_count(self.n)

    def edge_weights(self) -> np.ndarray:
        """Weights of all edges of K_n in canonical (u < v) order."""
        iu, ju = edge_endpoints(self.n)
        return self.weights[iu, ju]

    def without_edge_list(self) -> "Instance":
        return Instance(self.name, self.n, self.weight_kind, self.coords,
                        self.explicit_weights, None, self.explicit_layout)


def _check_edge_list(edges: Iterable[Sequence[int]], n: int) -> tuple[tuple[int, int], ...]:
    seen = set()
    out = []
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise TsplibError(f"invalid edge ({u}, {v}) for {n} vertices")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise TsplibError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class SparsifiedInstance:
    """An instance together with the subset of its edges that survived pruning.

    ``retained`` is a boolean mask over the canonical edge order; ``inserted``
    marks the retained edges that were added back from known tours.
    """

    base: Instance
    retained: np.ndarray
    inserted: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.retained, dtype=bool).copy()
        i = np.asarray(self.inserted, dtype=bool).copy()
        if r.shape != (self.base.m,) or i.shape != (self.base.m,):
            raise ValueError("edge masks must cover every edge of the base instance")
        if (i & ~r).any():
            raise ValueError("inserted edges must be retained")
        r.setflags(write=False)
        i.setflags(write=False)
        object.__setattr__(self, "retained", r)
        object.__setattr__(self, "inserted", i)

    @property
    def m_hat(self) -> int:
        return int(self.retained.sum())

    @property
    def pruning_rate(self) -> float:
        return 1.0 - self.m_hat / self.base.m

    def retained_edges(self) -> list[tuple[int, int]]:
        iu, ju = edge_endpoints(self.base.n)
        idx = np.flatnonzero(self.retained)
        return list(zip(iu[idx].tolist(), ju[idx].tolist()))


def edge_weight(u: int, v: int, inst: Instance) -> int:
    if u == v:
        raise ValueError("no self-loops: u and v must differ")
    if not (0 <= u < inst.n and 0 <= v < inst.n):
        raise IndexError(f"vertex out of range for n={inst.n}")
    return int(inst.weights[u, v])


# --------------------------------------------------------------------------- parsing

_SECTIONS = {"NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION", "EDGE_DATA_SECTION",
             "DISPLAY_DATA_SECTION", "TOUR_SECTION", "FIXED_EDGES_SECTION", "DEPOT_SECTION",
             "DEMAND_SECTION"}
_KNOWN = {"NAME", "TYPE", "COMMENT", "DIMENSION", "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT",
          "EDGE_DATA_FORMAT", "NODE_COORD_TYPE", "DISPLAY_DATA_TYPE", "CAPACITY"}


def _explicit_matrix(values: list[float], n: int, layout: ExplicitLayout) -> np.ndarray:
    w = np.zeros((n, n), dtype=np.int64)
    vals = np.asarray(values, dtype=float)
    if layout is ExplicitLayout.FULL_MATRIX:
        need = n * n
    elif layout in (ExplicitLayout.UPPER_ROW, ExplicitLayout.LOWER_ROW):
        need = n * (n - 1) // 2
    else:
        need = n * (n + 1) // 2
    if vals.size < need:
        raise TsplibError(f"EDGE_WEIGHT_SECTION has {vals.size} entries, {layout.value} needs {need}")
    vals = vals[:need]
    if not np.all(vals == np.round(vals)):
        raise TsplibError("explicit edge weights must be integers")
    vals = vals.astype(np.int64)
    if layout is ExplicitLayout.FULL_MATRIX:
        return vals.reshape(n, n)
    if layout is ExplicitLayout.UPPER_ROW:
        iu, ju = np.triu_indices(n, 1)
    elif layout is ExplicitLayout.LOWER_ROW:
        iu, ju = np.tril_indices(n, -1)
    elif layout is ExplicitLayout.UPPER_DIAG_ROW:
        iu, ju = np.triu_indices(n, 0)
    else:
        iu, ju = np.tril_indices(n, 0)
    w[iu, ju] = vals
    w[ju, iu] = vals
    return w


def parse_instance(text: str) -> Instance:
    """Parse a symmetric TSPLIB document."""
    header: dict[str, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    weight_values: list[float] = []
    edges: list[tuple[int, int]] = []
    has_edges = False
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        head = line.split(":", 1)[0].strip().upper() if ":" in line else line.split()[0].upper()
        if head == "EOF":
            break
        if head in _SECTIONS:
            section = head
            if head == "EDGE_DATA_SECTION":
                has_edges = True
            continue
        if ":" in line and head.replace("_", "").isalpha():
            key, value = (s.strip() for s in line.split(":", 1))
            key = key.upper()
            if key not in _KNOWN:
                logger.warning("ignoring unknown TSPLIB keyword %s", key)
            header[key] = value
            section = None
            continue
        if section is None:
            logger.warning("ignoring stray line %r", line)
            continue
        fields = line.split()
        if section == "NODE_COORD_SECTION":
            if len(fields) < 3:
                raise TsplibError(f"malformed coordinate line {line!r}")
            coords[int(fields[0])] = (float(fields[1]), float(fields[2]))
        elif section == "EDGE_WEIGHT_SECTION":
            weight_values.extend(float(f) for f in fields)
        elif section == "EDGE_DATA_SECTION":
            nums = [int(f) for f in fields]
            if nums and nums[0] == -1:
                section = None
                continue
            if len(nums) != 2:
                raise TsplibError(f"EDGE_LIST lines need two vertices, got {line!r}")
            edges.append((nums[0] - 1, nums[1] - 1))
        # other sections (display data, tours, ...) are skipped

    for key in ("DIMENSION", "EDGE_WEIGHT_TYPE"):
        if key not in header:
            raise TsplibError(f"missing mandatory keyword {key}")
    kind_txt = header.get("TYPE", "TSP").split()[0].upper()
    if kind_txt != "TSP":
        raise TsplibError(f"unsupported problem type {kind_txt}; only symmetric TSP is handled")
    n = int(header["DIMENSION"])
    try:
        kind = WeightKind(header["EDGE_WEIGHT_TYPE"].upper())
    except ValueError:
        raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {header['EDGE_WEIGHT_TYPE']}") from None
    edge_list = tuple(edges) if has_edges else None
    name = header.get("NAME", "unnamed")
    if kind is WeightKind.EXPLICIT:
        if not weight_values:
            raise TsplibError("missing mandatory keyword EDGE_WEIGHT_SECTION")
        layout = ExplicitLayout(header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper())
        w = _explicit_matrix(weight_values, n, layout)
        return Instance(name, n, kind, explicit_weights=w, edge_list=edge_list, explicit_layout=layout)
    if not coords:
        raise TsplibError("missing mandatory keyword NODE_COORD_SECTION")
    if sorted(coords) != list(range(1, n + 1)):
        raise TsplibError(f"NODE_COORD_SECTION must list vertices 1..{n}")
    xy = np.array([coords[i] for i in range(1, n + 1)], dtype=float)
    return Instance(name, n, kind, coords=xy, edge_list=edge_list)


def read_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


def read_sparsified(path_or_text, *, is_text: bool = False) -> SparsifiedInstance:
    """Load a document written by :func:`write_sparsified`."""
    text = path_or_text if is_text else open(path_or_text).read()
    inst = parse_instance(text)
    if inst.edge_list is None:
        raise TsplibError("document has no EDGE_DATA_SECTION")
    mask = np.zeros(inst.m, dtype=bool)
    for u, v in inst.edge_list:
        mask[edge_id(u, v, inst.n)] = True
    return SparsifiedInstance(inst.without_edge_list(), mask, np.zeros(inst.m, dtype=bool))


# --------------------------------------------------------------------------- writing

def _header(inst: Instance, comment: Optional[str] = None) -> list[str]:
    lines = [f"NAME: {inst.name}", "TYPE: TSP"]
    if comment:
        lines.append(f"COMMENT: {comment}")
    lines += [f"DIMENSION: {inst.n}", f"EDGE_WEIGHT_TYPE: {inst.weight_kind.value}"]
    if inst.weight_kind is WeightKind.EXPLICIT:
        lines.append("EDGE_WEIGHT_FORMAT: FULL_MATRIX")
    return lines


def _body(inst: Instance) -> list[str]:
    if inst.weight_kind is WeightKind.EXPLICIT:
        lines = ["EDGE_WEIGHT_SECTION"]
        lines += [" ".join(str(int(x)) for x in row) for row in inst.explicit_weights]
        return lines
    lines = ["NODE_COORD_SECTION"]
    lines += [f"{i + 1} {float(x)!r} {float(y)!r}" for i, (x, y) in enumerate(inst.coords)]
    return lines


def write_instance(inst: Instance) -> str:
    """Serialize a (complete-graph) instance; coordinates round-trip exactly."""
    return "\n".join(_header(inst) + _body(inst) + ["EOF", ""])


def write_sparsified(s: SparsifiedInstance) -> str:
    edges = s.retained_edges()
    if not edges:
        raise ValueError("refusing to write a sparsified instance with no retained edges")
    comment = f"{len(edges)} of {s.base.m} edges retained, {int(s.inserted.sum())} from inserted tours"
    lines = _header(s.base, comment) + ["EDGE_DATA_FORMAT: EDGE_LIST"] + _body(s.base)
    lines.append("EDGE_DATA_SECTION")
    lines += [f"{u + 1} {v + 1}" for u, v in edges]
    lines += ["-1", "EOF", ""]
    return "\n".join(lines)


# --------------------------------------------------------------------------- generation

def generate_random_instance(n: int, seed: int, box: float = 1e6, name: Optional[str] = None) -> Instance:
    """Uniform random points in [0, box]^2 with EUC_2D weights."""
    if n < 4:
        raise ValueError(f"random instances need n >= 4, got {n}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, box, size=(n, 2))
    return Instance(name or f"rand{n}_s{seed}", n, WeightKind.EUC_2D, coords=pts)
