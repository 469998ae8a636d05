"""Simplicial 2D triangulations with labeled boundary parts and conforming
refinement.

A Mesh stores vertices, positively oriented triangles, and a deduplicated
side (edge) table with adjacency, unit normals, measures and midpoints.
Boundary sides carry exactly one of the labels Dirichlet / Neumann / contact;
a nonempty Dirichlet part is required.  Meshes are immutable: refinement
returns a new Mesh that remembers its parent and a child-to-parent element
map.

Refinement is classical red-green-blue driven by per-element reference edges
(initially the longest edge; bisection children get newest-vertex-style
reference edges, red children inherit the parent's position), which keeps the
number of similarity classes finite.
"""

import numpy as np

INTERIOR, DIRICHLET, NEUMANN, CONTACT = 0, 1, 2, 3
LABEL_NAMES = {DIRICHLET: "dirichlet", NEUMANN: "neumann", CONTACT: "contact"}
LABEL_CODES = {name: code for code, name in LABEL_NAMES.items()}


def _normalize_label(value):
    if isinstance(value, str):
        try:
            return LABEL_CODES[value]
        except KeyError:
            raise ValueError(f"unknown boundary label {value!r}") from None
    code = int(value)
    if code not in LABEL_NAMES:
        raise ValueError(f"unknown boundary label code {value!r}")
    return code


class Mesh:
    """Triangulation with side bookkeeping.

    boundary_label is a callable (a, b) -> label (name or code) invoked once
    for every boundary side with vertex indices a, b; it is how build_mesh
    and the refinement routines communicate label inheritance.
    """

    def __init__(self, vertices, triangles, boundary_label,
                 ref_edges=None, parent=None, parent_elements=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) array")
        nt = len(self.triangles)

        P = self.vertices[self.triangles]
        d1 = P[:, 1] - P[:, 0]
        d2 = P[:, 2] - P[:, 0]
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        if np.any(cross <= 0.0):
            raise ValueError("triangles must be non-degenerate and counter-clockwise")
        self.areas = 0.5 * cross

        # side extraction: row t*3+i is the edge opposite local vertex i
        tri = self.triangles
        edges = np.stack(
            [tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]], axis=1
        ).reshape(-1, 2)
        keys = np.sort(edges, axis=1)
        uniq, inv, counts = np.unique(
            keys, axis=0, return_inverse=True, return_counts=True
        )
        if np.any(counts > 2):
            raise ValueError("a side is shared by more than two elements")
        ns = len(uniq)
        self.elem_sides = inv.reshape(nt, 3)

        order = np.argsort(inv, kind="stable")  # rows grouped by side id
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        row_elem = order // 3
        self.side_elems = np.full((ns, 2), -1, dtype=np.int64)
        self.side_elems[:, 0] = row_elem[starts]  # lowest incident element
        two = counts == 2
        self.side_elems[two, 1] = row_elem[starts[two] + 1]
        self.side_vertices = edges[order[starts]]  # as traversed by T_-

        V = self.vertices
        a, b = self.side_vertices[:, 0], self.side_vertices[:, 1]
        tang = V[b] - V[a]
        self.side_measures = np.hypot(tang[:, 0], tang[:, 1])
        # a CCW triangle traverses its boundary counter-clockwise, so the
        # outward normal of T_- is the tangent rotated clockwise
        self.side_normals = (
            np.stack([tang[:, 1], -tang[:, 0]], axis=1) / self.side_measures[:, None]
        )
        self.side_midpoints = 0.5 * (V[a] + V[b])

        edge_len = self.side_measures[self.elem_sides]
        self.diameters = edge_len.max(axis=1)

        if ref_edges is None:
            self.ref_edges = np.argmax(edge_len, axis=1).astype(np.int64)
        else:
            self.ref_edges = np.ascontiguousarray(ref_edges, dtype=np.int64)

        self.elem_side_orient = np.where(
            self.side_elems[self.elem_sides, 0] == np.arange(nt)[:, None], 1.0, -1.0
        )

        self.side_labels = np.zeros(ns, dtype=np.int8)
        for s in np.flatnonzero(counts == 1):
            va, vb = self.side_vertices[s]
            label = boundary_label(int(va), int(vb))
            if label is None:
                raise ValueError(f"unlabeled boundary segment {(int(va), int(vb))}")
            self.side_labels[s] = _normalize_label(label)

        self.interior_sides = np.flatnonzero(self.side_labels == INTERIOR)
        self.boundary_sides = np.flatnonzero(self.side_labels != INTERIOR)
        self.dirichlet_sides = np.flatnonzero(self.side_labels == DIRICHLET)
        self.neumann_sides = np.flatnonzero(self.side_labels == NEUMANN)
        self.contact_sides = np.flatnonzero(self.side_labels == CONTACT)
        self.free_sides = np.flatnonzero(self.side_labels != DIRICHLET)
        if len(self.dirichlet_sides) == 0:
            raise ValueError("mesh needs a nonempty Dirichlet boundary part")

        self.parent = parent
        self.parent_elements = (
            None if parent_elements is None
            else np.ascontiguousarray(parent_elements, dtype=np.int64)
        )
        self._bary_grads = None
        self._lookup = None

    # basic counts and size measures
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_sides(self):
        return len(self.side_vertices)

    @property
    def area(self):
        return float(self.areas.sum())

    @property
    def h_avg(self):
        # averaged mesh size, used for convergence tables
        return float(np.sqrt(self.area / self.n_vertices))

    @property
    def h_max(self):
        return float(self.diameters.max())

    def side_index(self, a, b):
        if self._lookup is None:
            self._lookup = {
                (min(int(p), int(q)), max(int(p), int(q))): s
                for s, (p, q) in enumerate(self.side_vertices)
            }
        return self._lookup[(min(a, b), max(a, b))]

    def barycentric_gradients(self):
        """Constant gradients of the barycentric coordinates, shape (nt, 3, 2)."""
        if self._bary_grads is None:
            P = self.vertices[self.triangles]
            g = np.empty((self.n_triangles, 3, 2))
            for i in range(3):
                e = P[:, (i + 1) % 3] - P[:, (i + 2) % 3]
                g[:, i, 0] = e[:, 1]
                g[:, i, 1] = -e[:, 0]
            g /= (2.0 * self.areas)[:, None, None]
            self._bary_grads = g
        return self._bary_grads

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def min_angle(self):
        L = np.sort(self.side_measures[self.elem_sides], axis=1)
        # smallest angle is opposite the shortest side
        c = (L[:, 1] ** 2 + L[:, 2] ** 2 - L[:, 0] ** 2) / (2 * L[:, 1] * L[:, 2])
        return float(np.arccos(np.clip(c, -1.0, 1.0)).min())


def _segments_intersect(p, q, r, s):
    # proper intersection test for the polygon simplicity check
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(p, q, r), orient(p, q, s)
    o3, o4 = orient(r, s, p), orient(r, s, q)
    if o1 != o2 and o3 != o4:
        return True
    return False


def _ear_clip(pts):
    n = len(pts)
    idx = list(range(n))
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def inside(p, a, b, c):
        d1 = cross(a, b, p)
        d2 = cross(b, c, p)
        d3 = cross(c, a, p)
        return d1 >= 0 and d2 >= 0 and d3 >= 0

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 2 * n * n:
            raise ValueError("polygon triangulation failed (non-simple polygon?)")
        for pos in range(len(idx)):
            ia, ib, ic = idx[pos - 1], idx[pos], idx[(pos + 1) % len(idx)]
            a, b, c = pts[ia], pts[ib], pts[ic]
            if cross(a, b, c) <= 0:
                continue  # reflex or degenerate corner
            if any(
                inside(pts[j], a, b, c)
                for j in idx
                if j not in (ia, ib, ic)
            ):
                continue
            tris.append((ia, ib, ic))
            idx.pop(pos)
            break
        else:
            raise ValueError("polygon triangulation failed (non-simple polygon?)")
    tris.append(tuple(idx))
    return tris


def build_mesh(polygon, labels):
    """Initial triangulation of a simple CCW polygon with one boundary label
    per polygon edge (labels[i] belongs to the edge polygon[i] -> polygon[i+1]).

    Convex polygons are fan-triangulated from the first vertex (so the unit
    square splits along the diagonal from vertex 0); non-convex simple
    polygons fall back to ear clipping.
    """
    pts = np.asarray(polygon, dtype=float)
    k = len(pts)
    if k < 3:
        raise ValueError("polygon needs at least 3 vertices")
    if len(labels) != k:
        raise ValueError("need exactly one label per polygon edge")
    codes = [_normalize_label(lab) for lab in labels]

    area2 = 0.0
    for i in range(k):
        j = (i + 1) % k
        area2 += pts[i, 0] * pts[j, 1] - pts[j, 0] * pts[i, 1]
    if area2 <= 0:
        raise ValueError("polygon must be counter-clockwise")

    # simplicity: no two non-adjacent edges may cross
    for i in range(k):
        for j in range(i + 1, k):
            if j == i or (j + 1) % k == i or (i + 1) % k == j:
                continue
            if _segments_intersect(
                pts[i], pts[(i + 1) % k], pts[j], pts[(j + 1) % k]
            ):
                raise ValueError("polygon is not simple")

    def corner_cross(i):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % k]
        return (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])

    convex = all(corner_cross(i) >= 0 for i in range(k))
    tris = None
    if convex:
        fan = [(0, i, i + 1) for i in range(1, k - 1)]
        areas = []
        for (ia, ib, ic) in fan:
            a, b, c = pts[ia], pts[ib], pts[ic]
            areas.append((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if all(ar > 0 for ar in areas):
            tris = fan
    if tris is None:
        tris = _ear_clip(pts)

    def boundary_label(a, b):
        if b == (a + 1) % k:
            return codes[a]
        if a == (b + 1) % k:
            return codes[b]
        raise ValueError(f"boundary side {(a, b)} does not lie on a polygon edge")

    return Mesh(pts, np.asarray(tris, dtype=np.int64), boundary_label)


def _bisect(tri, mid):
    # tri is (w0, w1, w2) with reference edge (w0, w1); both children carry
    # their reference edge opposite the new midpoint vertex (position 2)
    w0, w1, w2 = tri
    return (w2, w0, mid), (w1, w2, mid)


def rgb_refine(mesh, marked):
    """Conforming red-green-blue refinement of the marked elements."""
    marked = np.unique(np.asarray(list(marked), dtype=np.int64))
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise ValueError("marked set contains invalid element indices")

    nt = mesh.n_triangles
    edge_marked = np.zeros(mesh.n_sides, dtype=bool)
    edge_marked[mesh.elem_sides[marked].ravel()] = True

    ref_side = mesh.elem_sides[np.arange(nt), mesh.ref_edges]
    while True:
        need = edge_marked[mesh.elem_sides].any(axis=1) & ~edge_marked[ref_side]
        if not need.any():
            break
        edge_marked[ref_side[need]] = True

    cut = np.flatnonzero(edge_marked)
    old_nv = mesh.n_vertices
    mid_of = np.full(mesh.n_sides, -1, dtype=np.int64)
    mid_of[cut] = old_nv + np.arange(len(cut))
    new_vertices = np.vstack([mesh.vertices, mesh.side_midpoints[cut]])
    source_side = {int(old_nv + j): int(s) for j, s in enumerate(cut)}

    new_tris = []
    new_refs = []
    parents = []
    for t in range(nt):
        tri = mesh.triangles[t]
        sides = mesh.elem_sides[t]
        mk = edge_marked[sides]
        ell = int(mesh.ref_edges[t])
        n_marked = int(mk.sum())
        if n_marked == 0:
            new_tris.append(tuple(tri))
            new_refs.append(ell)
            parents.append(t)
            continue
        if n_marked == 3:
            v0, v1, v2 = tri
            m0, m1, m2 = (int(mid_of[sides[i]]) for i in range(3))
            children = [
                (v0, m2, m1),
                (m2, v1, m0),
                (m1, m0, v2),
                (m0, m1, m2),
            ]
            new_tris.extend(children)
            new_refs.extend([ell] * 4)
            parents.extend([t] * 4)
            continue
        # green or blue: the reference edge is marked (closure invariant)
        a, b = (ell + 1) % 3, (ell + 2) % 3
        mm = int(mid_of[sides[ell]])
        child1, child2 = _bisect((tri[a], tri[b], tri[ell]), mm)
        if n_marked == 1:
            new_tris.extend([child1, child2])
            new_refs.extend([2, 2])
            parents.extend([t] * 2)
        else:
            other = a if mk[a] else b
            mo = int(mid_of[sides[other]])
            if other == b:
                # the second marked edge (tri[ell], tri[a]) lies in child1
                g1, g2 = _bisect(child1, mo)
                new_tris.extend([g1, g2, child2])
            else:
                g1, g2 = _bisect(child2, mo)
                new_tris.extend([child1, g1, g2])
            new_refs.extend([2, 2, 2])
            parents.extend([t] * 3)

    def boundary_label(a, b):
        if a >= old_nv:
            s = source_side[a]
        elif b >= old_nv:
            s = source_side[b]
        else:
            s = mesh.side_index(a, b)
        code = int(mesh.side_labels[s])
        if code == INTERIOR:
            raise ValueError("refinement produced a boundary side from an interior one")
        return code

    return Mesh(
        new_vertices,
        np.asarray(new_tris, dtype=np.int64),
        boundary_label,
        ref_edges=np.asarray(new_refs, dtype=np.int64),
        parent=mesh,
        parent_elements=np.asarray(parents, dtype=np.int64),
    )


def red_refine(mesh):
    """Uniform refinement: every triangle splits into 4 congruent children."""
    return rgb_refine(mesh, np.arange(mesh.n_triangles))


def write_mesh(mesh, path):
    """Plain-text format: header, vertex coordinates (shortest round-tripping
    decimals), triangle index triples, boundary side records."""
    bnd = mesh.boundary_sides
    lines = [f"vertices {mesh.n_vertices} triangles {mesh.n_triangles} sides {len(bnd)}"]
    for x, y in mesh.vertices:
        lines.append(f"{float(x)!r} {float(y)!r}")
    for a, b, c in mesh.triangles:
        lines.append(f"{a} {b} {c}")
    for s in bnd:
        va, vb = mesh.side_vertices[s]
        lines.append(f"{va} {vb} {LABEL_NAMES[int(mesh.side_labels[s])]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    with open(path) as fh:
        tokens = fh.readline().split()
        if len(tokens) != 6 or tokens[0] != "vertices" or tokens[2] != "triangles" \
                or tokens[4] != "sides":
            raise ValueError("bad mesh file header")
        nv, nt, nb = int(tokens[1]), int(tokens[3]), int(tokens[5])
        vertices = np.empty((nv, 2))
        for i in range(nv):
            sx, sy = fh.readline().split()
            vertices[i] = (float(sx), float(sy))
        triangles = np.empty((nt, 3), dtype=np.int64)
        for i in range(nt):
            triangles[i] = [int(v) for v in fh.readline().split()]
        labels = {}
        for _ in range(nb):
            sa, sb, name = fh.readline().split()
            a, b = int(sa), int(sb)
            labels[(min(a, b), max(a, b))] = _normalize_label(name)

    def boundary_label(a, b):
        return labels.get((min(a, b), max(a, b)))

    return Mesh(vertices, triangles, boundary_label)


def check_conformity(mesh):
    """Audit: every side has exactly 2 adjacent elements or lies on the
    boundary, and no vertex sits in the interior of another element's side."""
    counts = (mesh.side_elems >= 0).sum(axis=1)
    interior_ok = np.all(counts[mesh.interior_sides] == 2)
    boundary_ok = np.all(counts[mesh.boundary_sides] == 1)
    if not (interior_ok and boundary_ok):
        raise AssertionError("side-element incidence broken")
    V = mesh.vertices
    for s in range(mesh.n_sides):
        a, b = mesh.side_vertices[s]
        pa = V[a]
        d = V[b] - pa
        L2 = d @ d
        t = ((V - pa) @ d) / L2
        off = V - pa - np.outer(t, d)
        on_line = (off * off).sum(axis=1) < 1e-24 * L2
        inside = (t > 1e-12) & (t < 1 - 1e-12)
        bad = np.flatnonzero(on_line & inside)
        bad = [v for v in bad if v not in (a, b)]
        if bad:
            raise AssertionError(f"hanging vertex {bad[0]} on side {s}")
    return True
