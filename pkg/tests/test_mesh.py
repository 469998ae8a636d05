import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signorini import mesh as m


def unit_square(labels=("contact", "dirichlet", "dirichlet", "dirichlet")):
    poly = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return m.build_mesh(poly, list(labels))


def square2(labels=("contact", "neumann", "dirichlet", "dirichlet", "neumann")):
    # (-1,1)^2 with an extra polygon vertex at (1,0) where the label changes
    poly = [(-1.0, -1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0)]
    return m.build_mesh(poly, list(labels))


# independent conformity audit: element incidence counts and hanging vertices
def audit(mesh):
    from collections import defaultdict

    incident = defaultdict(list)
    for t, tri in enumerate(mesh.triangles):
        for i in range(3):
            a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
            incident[(min(a, b), max(a, b))].append(t)
    for pair, elems in incident.items():
        assert len(elems) in (1, 2)
    # no vertex strictly inside any side
    V = mesh.vertices
    for (a, b), elems in incident.items():
        pa, pb = V[a], V[b]
        d = pb - pa
        L2 = d @ d
        for v in range(len(V)):
            if v in (a, b):
                continue
            w = V[v] - pa
            t = (w @ d) / L2
            if 1e-12 < t < 1 - 1e-12:
                off = w - t * d
                assert off @ off > 1e-24 * L2, f"hanging vertex {v} on side {(a, b)}"


def min_angle_of(mesh):
    P = mesh.vertices[mesh.triangles]
    worst = np.pi
    for i in range(3):
        u = P[:, (i + 1) % 3] - P[:, i]
        w = P[:, (i + 2) % 3] - P[:, i]
        c = (u * w).sum(1) / np.sqrt((u * u).sum(1) * (w * w).sum(1))
        worst = min(worst, np.arccos(np.clip(c, -1, 1)).min())
    return worst


def test_unit_square_counts():
    mesh = unit_square()
    assert mesh.n_triangles == 2
    assert mesh.n_sides == 5
    assert len(mesh.contact_sides) == 1
    # bottom edge is contact, the other three square edges are Dirichlet,
    # the fifth side is the interior diagonal
    assert len(mesh.dirichlet_sides) == 3
    # the prescribed diagonal split: diagonal (0,0)-(1,1) must be a side
    diag = {tuple(sorted(sv)) for sv in mesh.side_vertices}
    assert (0, 2) in diag


def test_all_dirichlet_square():
    mesh = unit_square(("dirichlet",) * 4)
    assert len(mesh.dirichlet_sides) == 4
    assert len(mesh.contact_sides) == 0
    assert len(mesh.boundary_sides) == 4


def test_square2_labels():
    mesh = square2()
    assert mesh.n_triangles == 3
    assert len(mesh.contact_sides) == 1
    assert len(mesh.dirichlet_sides) == 2
    assert len(mesh.neumann_sides) == 2
    # contact side is the bottom edge
    s = mesh.contact_sides[0]
    assert np.allclose(mesh.side_midpoints[s], [0.0, -1.0])


def test_red_refine_counts_and_h():
    mesh = unit_square()
    for k in range(1, 4):
        mesh = m.red_refine(mesh)
        assert mesh.n_triangles == 2 * 4**k
        assert np.isclose(mesh.h_max, np.sqrt(2.0) / 2**k)
        assert abs(mesh.area - 1.0) < 1e-14
        audit(mesh)


def test_red_refine_label_inheritance():
    mesh = m.red_refine(unit_square())
    # bottom edge split into 2 contact sides, remaining boundary Dirichlet
    assert len(mesh.contact_sides) == 2
    assert len(mesh.dirichlet_sides) == 6
    for s in mesh.contact_sides:
        assert mesh.side_midpoints[s][1] == 0.0


def test_rgb_full_marking_equals_red():
    mesh = m.red_refine(unit_square())
    a = m.red_refine(mesh)
    b = m.rgb_refine(mesh, np.arange(mesh.n_triangles))
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.side_labels, b.side_labels)


def test_rgb_empty_marking_is_identity():
    mesh = m.red_refine(unit_square())
    out = m.rgb_refine(mesh, [])
    assert out is mesh


def test_rgb_single_marked_element():
    mesh = m.red_refine(unit_square())  # 8 triangles
    # pick an element with three interior sides if one exists, else any
    marked = None
    for t in range(mesh.n_triangles):
        if all(mesh.side_elems[s, 1] >= 0 for s in mesh.elem_sides[t]):
            marked = t
            break
    assert marked is not None
    out = m.rgb_refine(mesh, [marked])
    audit(out)
    children = np.flatnonzero(out.parent_elements == marked)
    assert len(children) == 4  # marked element is red-split
    assert out.n_triangles > mesh.n_triangles + 3  # neighbors got green/blue split


def test_rgb_min_angle_bound():
    rng = np.random.default_rng(7)
    mesh = m.red_refine(unit_square())
    a0 = min_angle_of(mesh)
    for _ in range(10):
        k = min(max(1, mesh.n_triangles // 5), 30)
        marked = rng.choice(mesh.n_triangles, size=k, replace=False)
        mesh = m.rgb_refine(mesh, marked)
        audit(mesh)
        assert min_angle_of(mesh) >= 0.5 * a0 - 1e-12


def test_normals():
    mesh = m.red_refine(square2())
    lens = np.linalg.norm(mesh.side_normals, axis=1)
    assert np.allclose(lens, 1.0, atol=1e-14)
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    for s in range(mesh.n_sides):
        tm, tp = mesh.side_elems[s]
        n = mesh.side_normals[s]
        mid = mesh.side_midpoints[s]
        # outward for T_-
        assert n @ (mid - centroids[tm]) > 0
        if tp >= 0:
            assert tm < tp  # lower to higher element index
            assert n @ (mid - centroids[tp]) < 0


def test_orientation_flags():
    mesh = m.red_refine(unit_square())
    for t in range(mesh.n_triangles):
        for i in range(3):
            s = mesh.elem_sides[t, i]
            sign = mesh.elem_side_orient[t, i]
            assert sign == (1.0 if mesh.side_elems[s, 0] == t else -1.0)


def test_side_measures_and_areas():
    mesh = m.red_refine(square2())
    assert np.all(mesh.areas > 0)
    assert abs(mesh.area - 4.0) < 1e-13
    for s in range(mesh.n_sides):
        a, b = mesh.side_vertices[s]
        assert np.isclose(
            mesh.side_measures[s], np.linalg.norm(mesh.vertices[a] - mesh.vertices[b])
        )
    assert np.isclose(mesh.h_avg, np.sqrt(mesh.area / mesh.n_vertices))


def test_ref_edges_initially_longest():
    mesh = m.red_refine(unit_square())
    V = mesh.vertices
    for t, tri in enumerate(mesh.triangles):
        L = [
            np.linalg.norm(V[tri[(i + 2) % 3]] - V[tri[(i + 1) % 3]]) for i in range(3)
        ]
        assert L[mesh.ref_edges[t]] >= max(L) - 1e-12


def test_mesh_file_roundtrip(tmp_path):
    mesh = m.rgb_refine(m.red_refine(square2()), [0, 3, 5])
    path = tmp_path / "mesh.txt"
    m.write_mesh(mesh, path)
    back = m.read_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.side_labels, mesh.side_labels)


@settings(max_examples=25, deadline=None)
@given(
    sx=st.floats(min_value=0.1, max_value=10, allow_nan=False),
    sy=st.floats(min_value=0.1, max_value=10, allow_nan=False),
)
def test_mesh_file_roundtrip_scaled(tmp_path_factory, sx, sy):
    # decimal coordinates of <= 17 significant digits must round-trip bit-exactly
    base = m.red_refine(unit_square())
    scaled = m.Mesh(
        base.vertices * np.array([sx, sy]),
        base.triangles,
        lambda a, b: m.LABEL_NAMES[base.side_labels[base.side_index(a, b)]],
    )
    path = tmp_path_factory.mktemp("rt") / "mesh.txt"
    m.write_mesh(scaled, path)
    back = m.read_mesh(path)
    assert np.array_equal(back.vertices, scaled.vertices)


def test_build_mesh_errors():
    bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
    with pytest.raises(ValueError):
        m.build_mesh(bowtie, ["dirichlet"] * 4)
    with pytest.raises(ValueError):
        unit_square(("dirichlet", "dirichlet", "dirichlet"))  # label count mismatch
    with pytest.raises(ValueError):
        unit_square(("dirichlet", "dirichlet", "dirichlet", "bogus"))
    with pytest.raises(ValueError):
        unit_square(("neumann",) * 4)  # needs a Dirichlet part


def test_parent_elements():
    mesh = m.red_refine(unit_square())
    assert mesh.parent is not None
    assert np.array_equal(np.sort(np.unique(mesh.parent_elements)), [0, 1])
    counts = np.bincount(mesh.parent_elements)
    assert np.all(counts == 4)
