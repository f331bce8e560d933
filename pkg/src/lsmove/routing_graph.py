"""Macroscopic routing graph of color-code patches and logical qubit mappings.

Patches sit on a honeycomb lattice stored in brick-wall coordinates: vertex
``(row, col)`` is joined horizontally to ``(row, col +- 1)`` and vertically to
``(row + 1, col)`` whenever ``row + col`` is even.  Every interior vertex has
degree three.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class Role(enum.Enum):
    DATA = "data"
    ANCILLA = "ancilla"


@dataclass(frozen=True)
class PatchVertex:
    id: int
    coord: tuple[int, int]
    canonical_role: Role


@dataclass(frozen=True)
class LayoutSpec:
    """Periodic placement of data patches.

    A vertex ``(r, c)`` of the tiled interior is a data patch iff
    ``(r % rows, (c - shift * (r // rows)) % cols)`` is in ``cells``.
    ``rows + shift`` and ``cols`` are even so that tiling preserves the
    brick-wall parity.
    """

    name: str
    density: Fraction
    rows: int
    cols: int
    cells: frozenset[tuple[int, int]]
    shift: int = 0

    def is_data(self, r: int, c: int) -> bool:
        tile_row = r // self.rows
        return (r % self.rows, (c - self.shift * tile_row) % self.cols) in self.cells

    @property
    def data_per_tile(self) -> int:
        return len(self.cells)


def _cells(*coords: tuple[int, int]) -> frozenset[tuple[int, int]]:
    return frozenset(coords)


# Data clusters are mutually non-adjacent; cluster shapes are isolated
# vertices (single), horizontal dimers (pair), horizontal trimers (triple)
# and closed hexagonal rings (hex).  Hex rings sit on every seventh face so
# that each non-chosen face touches exactly one ring.
LAYOUTS: dict[str, LayoutSpec] = {
    "single": LayoutSpec(
        name="single",
        density=Fraction(1, 8),
        rows=4,
        cols=4,
        cells=_cells((0, 0), (2, 2)),
    ),
    "pair": LayoutSpec(
        name="pair",
        density=Fraction(1, 4),
        rows=4,
        cols=4,
        cells=_cells((0, 0), (0, 1), (2, 2), (2, 3)),
    ),
    "triple": LayoutSpec(
        name="triple",
        density=Fraction(3, 10),
        rows=2,
        cols=10,
        cells=_cells((0, 0), (0, 1), (0, 2), (1, 5), (1, 6), (1, 7)),
    ),
    "hex": LayoutSpec(
        name="hex",
        density=Fraction(3, 7),
        rows=2,
        cols=14,
        # rings of the faces (0, 0), (1, 9), (-1, 5) of an index-7 face superlattice
        cells=_cells(
            (0, 0), (0, 1), (0, 2), (0, 5), (0, 6), (0, 7),
            (1, 0), (1, 1), (1, 2), (1, 9), (1, 10), (1, 11),
        ),
        shift=4,
    ),
}


def layout_spec(name: str) -> LayoutSpec:
    try:
        return LAYOUTS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown layout {name!r}; expected one of {sorted(LAYOUTS)}") from None


def brickwall_neighbors(r: int, c: int, rows: int, cols: int) -> list[tuple[int, int]]:
    """Neighbor coordinates of ``(r, c)`` inside a ``rows x cols`` brick wall."""
    out = []
    if c > 0:
        out.append((r, c - 1))
    if c + 1 < cols:
        out.append((r, c + 1))
    if (r + c) % 2 == 0:
        if r + 1 < rows:
            out.append((r + 1, c))
    elif r > 0:
        out.append((r - 1, c))
    return out


class RoutingGraph:
    """Immutable honeycomb patch graph.

    Vertex ids are row-major, ``id = row * cols + col``.  Adjacency is kept
    both as Python tuples and as CSR arrays for the compiled path search.
    """

    def __init__(self, rows: int, cols: int, data_coords: set[tuple[int, int]], layout: LayoutSpec | None = None):
        self.dims = (rows, cols)
        self.layout = layout
        self.vertices: list[PatchVertex] = []
        adj: list[tuple[int, ...]] = []
        for r in range(rows):
            for c in range(cols):
                vid = r * cols + c
                role = Role.DATA if (r, c) in data_coords else Role.ANCILLA
                self.vertices.append(PatchVertex(vid, (r, c), role))
                adj.append(tuple(sorted(rr * cols + cc for rr, cc in brickwall_neighbors(r, c, rows, cols))))
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(adj)
        self.canonical_data: tuple[int, ...] = tuple(v.id for v in self.vertices if v.canonical_role is Role.DATA)
        self.is_canonical_data = np.zeros(len(self.vertices), dtype=np.bool_)
        self.is_canonical_data[list(self.canonical_data)] = True
        # ancilla patches outside the largest free component are reachable only
        # through data patches, so a qubit teleported there can get stuck
        self.is_open_ancilla = self._main_ancilla_component()

        indptr = np.zeros(len(adj) + 1, dtype=np.int64)
        for i, nbrs in enumerate(adj):
            indptr[i + 1] = indptr[i] + len(nbrs)
        self.indptr = indptr
        self.indices = np.fromiter((u for nbrs in adj for u in nbrs), dtype=np.int64, count=int(indptr[-1]))

    def _main_ancilla_component(self) -> np.ndarray:
        seen = self.is_canonical_data.copy()
        best: list[int] = []
        for start in range(len(self.vertices)):
            if seen[start]:
                continue
            seen[start] = True
            comp = [start]
            for v in comp:
                for u in self.adjacency[v]:
                    if not seen[u]:
                        seen[u] = True
                        comp.append(u)
            if len(comp) > len(best):
                best = comp
        mask = np.zeros(len(self.vertices), dtype=np.bool_)
        mask[best] = True
        return mask

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < len(self.vertices)

    def vertex_id(self, row: int, col: int) -> int:
        rows, cols = self.dims
        if not (0 <= row < rows and 0 <= col < cols):
            raise KeyError((row, col))
        return row * cols + col

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "vertices": [
                {"id": v.id, "row": v.coord[0], "col": v.coord[1], "role": v.canonical_role.value}
                for v in self.vertices
            ],
            "edges": [list(e) for e in self.edges()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def neighbors(g: RoutingGraph, v: int) -> frozenset[int]:
    if v not in g:
        raise KeyError(f"unknown vertex {v}")
    return frozenset(g.adjacency[v])


@dataclass
class Mapping:
    """Placement of qubit labels on patch vertices (a bijection on its domain)."""

    position: dict[int, int] = field(default_factory=dict)
    occupant: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_positions(cls, position: dict[int, int]) -> Mapping:
        occupant = {}
        for label, v in position.items():
            if v in occupant:
                raise ValueError(f"labels {occupant[v]} and {label} share vertex {v}")
            occupant[v] = label
        return cls(dict(position), occupant)

    def copy(self) -> Mapping:
        return Mapping(dict(self.position), dict(self.occupant))

    def __len__(self) -> int:
        return len(self.position)

    def occupied_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=np.bool_)
        if self.occupant:
            mask[list(self.occupant)] = True
        return mask

    def teleport(self, label: int, dest: int) -> None:
        """In-place variant of :func:`apply_teleport`."""
        if label not in self.position:
            raise KeyError(f"unknown qubit label {label}")
        if dest in self.occupant:
            raise ValueError(f"vertex {dest} is occupied by label {self.occupant[dest]}")
        del self.occupant[self.position[label]]
        self.position[label] = dest
        self.occupant[dest] = label

    def to_json(self) -> dict[str, int]:
        return {str(label): self.position[label] for label in sorted(self.position)}


def apply_teleport(m: Mapping, label: int, dest: int) -> Mapping:
    out = m.copy()
    out.teleport(label, dest)
    return out


BORDER = 1


def _grid_shape(spec: LayoutSpec, q: int) -> tuple[int, int]:
    """Tile counts (vertical, horizontal) for the smallest roughly square tiling."""
    needed = math.ceil(q / spec.data_per_tile)
    best = None
    for nr in range(1, needed + 1):
        nc = math.ceil(needed / nr)
        # honeycomb rows are 1.5 apart, columns sqrt(3)/2 apart
        height = nr * spec.rows * 1.5
        width = nc * spec.cols * math.sqrt(3) / 2
        cost = nr * nc * (1.0 + abs(math.log(width / height)))
        if best is None or cost < best[0] - 1e-12:
            best = (cost, nr, nc)
    return best[1], best[2]


def build_graph(spec: LayoutSpec, tile_rows: int, tile_cols: int) -> RoutingGraph:
    """Tile ``spec`` and surround the tiling with a one-patch ancilla margin.

    The diagonal offset keeps ``row + col`` parity.  Margin columns are only
    connected in vertical dimers, so a few margin patches are isolated, but
    every data patch still touches the main free component.
    """
    inner_rows = tile_rows * spec.rows
    inner_cols = tile_cols * spec.cols
    data = {
        (r + BORDER, c + BORDER)
        for r in range(inner_rows)
        for c in range(inner_cols)
        if spec.is_data(r, c)
    }
    return RoutingGraph(inner_rows + 2 * BORDER, inner_cols + 2 * BORDER, data, layout=spec)


def build_layout(name: str, q: int, seed: int | None = 0) -> tuple[RoutingGraph, Mapping]:
    """Build the routing graph for a layout and place labels ``0..q-1`` at random.

    Args:
        name: One of ``single``, ``pair``, ``triple``, ``hex``.
        q: Number of logical data qubits.
        seed: Seed for the shuffle of labels over canonical data vertices.

    Returns:
        The graph and the initial mapping.
    """
    spec = layout_spec(name)
    if q < 1:
        raise ValueError("q must be at least 1")
    nr, nc = _grid_shape(spec, q)
    g = build_graph(spec, nr, nc)
    slots = list(g.canonical_data)
    random.Random(seed).shuffle(slots)
    return g, Mapping.from_positions({label: slots[label] for label in range(q)})


def interior_density(spec: LayoutSpec, tile_rows: int, tile_cols: int) -> float:
    inner = tile_rows * spec.rows * tile_cols * spec.cols
    return tile_rows * tile_cols * spec.data_per_tile / inner
