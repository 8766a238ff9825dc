"""Triangular (4.8.8) color-code lattices.

The patch is built in the dual picture. Dual vertices live on the points
``(x, y)`` with ``x = y (mod 2)``: points with odd ``x`` are the centres of
red squares, points with both coordinates even are octagon centres. Every
triangle of the resulting tetrakis tiling is a qubit and every dual vertex
inside the patch is a face (stabilizer). Three external vertices, one per
boundary colour, close the triangulation along the three sides.

Indexing
--------
Positions are reported in a frame rotated by 45 degrees so that the red
(logical) boundary lies at the bottom, the green boundary on the left and
the blue boundary on the right. Faces and qubits are both numbered
row-major in that frame: top to bottom, then left to right.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

COLORS = ("red", "green", "blue")

# External (boundary) vertices are keyed by the colour of the faces they
# stand in for.
_EXT = {"red": "R", "green": "G", "blue": "B"}
_OUTWARD = {
    "R": np.array([0.0, -1.0]),
    "G": np.array([-1.0, 1.0]) / np.sqrt(2.0),
    "B": np.array([1.0, 1.0]) / np.sqrt(2.0),
}
# Preferred travel direction of each colour's pure-error chain.
_PREFERRED = {
    "red": np.array([-1.0, -1.0]) / np.sqrt(2.0),
    "green": np.array([-1.0, 0.0]),
    "blue": np.array([1.0, 0.0]),
}


@dataclass(frozen=True)
class Face:
    index: int
    color: str
    qubits: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Lattice:
    """Static data of a distance-``d`` triangular (4.8.8) color code.

    Attributes
    ----------
    d : int
        Code distance (odd, at least 3).
    faces : tuple of Face
        Stabilizer faces. Each face carries one X- and one Z-type generator.
    check : ndarray, shape (F, n), uint8
        Face-qubit incidence matrix.
    incidence : tuple of tuple of int
        ``incidence[i]`` lists the faces containing qubit ``i`` (``B_i``).
    logical : ndarray, shape (n,), uint8
        Support of the logical operator along the red (bottom) boundary.
    pure_chains : ndarray, shape (F, n), uint8
        Row ``f`` is an error whose syndrome flags face ``f`` only.
    qubit_xy, face_xy : ndarray
        Positions in the rotated frame, used for ordering and inspection.
    """

    d: int
    faces: tuple[Face, ...]
    check: np.ndarray
    incidence: tuple[tuple[int, ...], ...]
    logical: np.ndarray
    pure_chains: np.ndarray
    qubit_xy: np.ndarray
    face_xy: np.ndarray

    @property
    def n(self) -> int:
        return self.check.shape[1]

    @property
    def num_faces(self) -> int:
        return self.check.shape[0]

    def face_colors(self) -> list[str]:
        return [f.color for f in self.faces]

    def to_dict(self) -> dict:
        return {
            "schema": "colorsa.lattice/1",
            "d": self.d,
            "n": self.n,
            "faces": [
                {"index": f.index, "color": f.color, "qubits": list(f.qubits)}
                for f in self.faces
            ],
            "logical_support": np.flatnonzero(self.logical).tolist(),
            "pure_chains": [np.flatnonzero(row).tolist() for row in self.pure_chains],
            "qubit_positions": np.round(self.qubit_xy, 6).tolist(),
        }


def _color(v) -> str:
    x, y = v
    if x % 2:
        return "red"
    return "green" if ((x + y) // 2) % 2 == 0 else "blue"


def _zigzag(m: int, first: tuple[int, int], step: tuple[int, int]) -> list[tuple[int, int]]:
    """Boundary leg leaving the apex (1, 1): alternate red and octagon points."""
    pts = [(1, 1), first]
    x, y = first
    sx, sy = step
    side = -1
    for _ in range(m - 1):
        # step to the next square centre, then on to the next octagon
        if sx == 0:
            pts.append((x + side, y + sy))
            x, y = x + 2 * side, y + 2 * sy
        else:
            pts.append((x + sx, y + side))
            x, y = x + 2 * sx, y + 2 * side
        pts.append((x, y))
        side = -side
    return pts


def _staircase(a: tuple[int, int], b: tuple[int, int], first: str) -> list[tuple[int, int]]:
    """Octagon-grid path from ``a`` to ``b`` alternating right and up steps."""
    path = [a]
    x, y = a
    move = first
    while (x, y) != b:
        if move == "R":
            x += 2
        else:
            y += 2
        path.append((x, y))
        move = "U" if move == "R" else "R"
    if path[-1] != b or x > b[0] or y > b[1]:
        raise RuntimeError("staircase does not reach the corner")
    return path


def _boundary(d: int) -> tuple[list, list, list]:
    m = (d - 1) // 2
    left = _zigzag(m, (2, 0), (0, -1))
    right = _zigzag(m, (2, 2), (1, 0))
    bottom = _staircase(left[-1], right[-1], "U" if m % 2 else "R")
    return left, right, bottom


def _cell_triangles(c):
    x, y = c
    corners = [(x + 1, y + 1), (x + 1, y - 1), (x - 1, y - 1), (x - 1, y + 1)]
    for k in range(4):
        yield (c, corners[k], corners[(k + 1) % 4])


def _inside(pt, polygon) -> bool:
    """Even-odd ray casting; ``pt`` never lies on an edge here."""
    x, y = pt
    inside = False
    for (x0, y0), (x1, y1) in zip(polygon, polygon[1:] + polygon[:1]):
        if (y0 > y) != (y1 > y):
            if x < x0 + (y - y0) * (x1 - x0) / (y1 - y0):
                inside = not inside
    return inside


def _interior_triangles(cycle: list) -> list:
    """Tetrakis triangles whose centroid lies inside the boundary cycle."""
    xs = [p[0] for p in cycle]
    ys = [p[1] for p in cycle]
    out = []
    for cx in range(min(xs) - 1, max(xs) + 2):
        if cx % 2 == 0:
            continue
        for cy in range(min(ys) - 1, max(ys) + 2):
            if cy % 2 == 0:
                continue
            for t in _cell_triangles((cx, cy)):
                cen = (sum(v[0] for v in t) / 3.0, sum(v[1] for v in t) / 3.0)
                if _inside(cen, cycle):
                    out.append(t)
    return out


def _rot(v) -> np.ndarray:
    return np.array([v[0] + v[1], v[1] - v[0]], dtype=float)


def _rowmajor(points: np.ndarray) -> np.ndarray:
    pts = np.round(points, 6)
    return np.lexsort((pts[:, 0], -pts[:, 1]))


@lru_cache(maxsize=None)
def build_lattice(d: int) -> Lattice:
    """Construct the distance-``d`` triangular (4.8.8) color code.

    Deterministic; results are cached and the arrays are read-only.
    """
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f"distance must be an integer, got {d!r}")
    d = int(d)
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be odd and >= 3, got {d}")

    left, right, bottom = _boundary(d)
    sides = (("G", left), ("B", right), ("R", bottom))
    # the bottom staircase may touch a leg at a vertex, so the interior is
    # found by point-in-polygon rather than by flood fill
    cycle = left[::-1] + right[1:] + bottom[::-1][1:-1]
    triangles = _interior_triangles(cycle)
    for ext, arc in sides:
        triangles.extend((ext, u, v) for u, v in zip(arc, arc[1:]))
    triangles.extend([("G", "B", left[0]), ("G", "R", left[-1]), ("B", "R", right[-1])])

    verts = sorted({v for t in triangles for v in t if not isinstance(v, str)})
    face_pos = np.array([_rot(v) for v in verts])
    face_order = _rowmajor(face_pos)
    verts = [verts[k] for k in face_order]
    face_pos = face_pos[face_order]
    vid = {v: k for k, v in enumerate(verts)}

    def qubit_pos(t):
        real = [_rot(v) for v in t if not isinstance(v, str)]
        pos = np.mean(real, axis=0)
        for v in t:
            if isinstance(v, str):
                pos = pos + 0.5 * _OUTWARD[v]
        return pos

    qpos = np.array([qubit_pos(t) for t in triangles])
    q_order = _rowmajor(qpos)
    triangles = [triangles[k] for k in q_order]
    qpos = qpos[q_order]

    n, nf = len(triangles), len(verts)
    check = np.zeros((nf, n), dtype=np.uint8)
    for q, t in enumerate(triangles):
        for v in t:
            if not isinstance(v, str):
                check[vid[v], q] = 1
    logical = np.array([1 if "R" in t else 0 for t in triangles], dtype=np.uint8)

    faces = tuple(
        Face(index=f, color=_color(v), qubits=tuple(np.flatnonzero(check[f]).tolist()))
        for f, v in enumerate(verts)
    )
    incidence = tuple(tuple(np.flatnonzero(check[:, q]).tolist()) for q in range(n))

    chains = _pure_chains(triangles, verts, vid, face_pos, faces)

    for arr in (check, logical, chains, qpos, face_pos):
        arr.setflags(write=False)
    return Lattice(
        d=d,
        faces=faces,
        check=check,
        incidence=incidence,
        logical=logical,
        pure_chains=chains,
        qubit_xy=qpos,
        face_xy=face_pos,
    )


def _pure_chains(triangles, verts, vid, face_pos, faces) -> np.ndarray:
    """Shortest chain from each face to the boundary of its own colour.

    Two triangles sharing a dual edge form one step of the chain between
    their apexes; both apexes have the same colour. Ties between shortest
    routes are broken by the colour's preferred direction.
    """
    n = len(triangles)
    by_edge: dict[frozenset, list[int]] = {}
    for q, t in enumerate(triangles):
        for k in range(3):
            edge = frozenset((t[k], t[(k + 1) % 3]))
            by_edge.setdefault(edge, []).append(q)

    adj: dict = {}
    for edge, qs in by_edge.items():
        if len(qs) != 2:
            continue
        a0 = next(iter(set(triangles[qs[0]]) - edge))
        a1 = next(iter(set(triangles[qs[1]]) - edge))
        adj.setdefault(a0, []).append((a1, qs))
        adj.setdefault(a1, []).append((a0, qs))

    chains = np.zeros((len(verts), n), dtype=np.uint8)
    for f, v in enumerate(verts):
        color = faces[f].color
        target = _EXT[color]
        pref = _PREFERRED[color]

        def order(item, here):
            nb, _ = item
            if nb == target:
                return (0, 0.0)
            return (1, -float(np.dot(face_pos[vid[nb]] - face_pos[vid[here]], pref)))

        parent = {v: None}
        queue = deque([v])
        while queue and target not in parent:
            here = queue.popleft()
            for nb, qs in sorted(adj.get(here, []), key=lambda it: order(it, here)):
                if nb not in parent:
                    parent[nb] = (here, qs)
                    queue.append(nb)
        if target not in parent:
            raise RuntimeError(f"face {f} has no path to its boundary")
        node = target
        while parent[node] is not None:
            prev, qs = parent[node]
            chains[f, qs] ^= 1
            node = prev
    return chains


def _as_bits(lat: Lattice, vec, length: int, what: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.uint8)
    if arr.shape[-1:] != (length,):
        raise ValueError(f"{what} must have trailing length {length}, got shape {arr.shape}")
    return arr


def syndrome(lat: Lattice, error) -> np.ndarray:
    """Face parities of ``error`` (works on a batch along leading axes)."""
    e = _as_bits(lat, error, lat.n, "error")
    return ((e.astype(np.int64) @ lat.check.T.astype(np.int64)) & 1).astype(np.uint8)


def pure_error(lat: Lattice, S) -> np.ndarray:
    """XOR of the pure chains of all flagged faces, ``T(S)``."""
    s = _as_bits(lat, S, lat.num_faces, "syndrome")
    return ((s.astype(np.int64) @ lat.pure_chains.astype(np.int64)) & 1).astype(np.uint8)


def logical_overlap_parity(lat: Lattice, error) -> int | np.ndarray:
    e = _as_bits(lat, error, lat.n, "error")
    par = (e.astype(np.int64) @ lat.logical.astype(np.int64)) & 1
    return int(par) if np.ndim(par) == 0 else par.astype(np.uint8)
