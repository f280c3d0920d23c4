"""Cut geometry between a background mesh and an overlapping mesh.

Background cells are split into not, completely and partially overlapped
sets.  The overlap region is decomposed into convex pieces
``T_bg ∩ T_ov`` and the boundary of the overlapping mesh is split into
segments that each lie in a single active background cell.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadratureRule, polygon_rule, segment_rule, triangle_rules

EPS_GEOM = 1e-10
EPS_CLASS = 1e-9
COMPATIBILITY_WARN_RATIO = 10.0


class GeometryError(ValueError):
    """Raised when the two meshes do not form a valid overlapping configuration."""


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def polygon_area(vertices):
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        return 0.0
    return 0.5 * float(np.sum(_cross(v, np.roll(v, -1, axis=0))))


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: np.ndarray

    @property
    def area(self):
        return polygon_area(self.vertices)

    @property
    def is_empty(self):
        return len(self.vertices) < 3

    def __len__(self):
        return len(self.vertices)


EMPTY_POLYGON = ConvexPolygon(np.empty((0, 2)))


def _cleanup(points, eps):
    if len(points) == 0:
        return points
    pts = [points[0]]
    for p in points[1:]:
        if np.hypot(*(p - pts[-1])) > eps:
            pts.append(p)
    if len(pts) > 1 and np.hypot(*(pts[0] - pts[-1])) <= eps:
        pts.pop()
    # drop collinear vertices
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            ac = c - a
            length = np.hypot(*ac)
            if length <= eps or abs(_cross(ac, b - a)) / length <= eps:
                pts.pop(i)
                changed = True
                break
    return np.array(pts) if len(pts) >= 3 else np.empty((0, 2))


def _check_triangle(tri, eps):
    tri = np.asarray(tri, dtype=float).reshape(3, 2)
    area = 0.5 * _cross(tri[1] - tri[0], tri[2] - tri[0])
    if abs(area) < eps * eps:
        raise GeometryError("degenerate triangle")
    return tri if area > 0 else tri[::-1].copy()


def clip_triangle_triangle(t1, t2, eps=EPS_GEOM):
    """Intersection of two triangles as a CCW convex polygon (possibly empty).

    Sutherland-Hodgman: ``t1`` is clipped successively by the three
    half-planes bounding ``t2``.
    """
    subject = _check_triangle(t1, eps)
    clip = _check_triangle(t2, eps)
    out = list(subject)
    for k in range(3):
        a, b = clip[k], clip[(k + 1) % 3]
        edge = b - a
        inv_len = 1.0 / np.hypot(*edge)
        inp, out = out, []
        if not inp:
            break
        dist = [_cross(edge, p - a) * inv_len for p in inp]
        for i in range(len(inp)):
            p, q = inp[i - 1], inp[i]
            dp, dq = dist[i - 1], dist[i]
            if dq >= -eps:
                if dp < -eps:
                    out.append(p + (dp / (dp - dq)) * (q - p))
                out.append(q)
            elif dp >= -eps:
                out.append(p + (dp / (dp - dq)) * (q - p))
    verts = _cleanup(np.array(out), eps)
    if len(verts) < 3 or polygon_area(verts) <= 0.0:
        return EMPTY_POLYGON
    return ConvexPolygon(verts)


def locate_point(mesh, p, eps=EPS_GEOM):
    """Lowest-id cell containing ``p`` or ``None``."""
    p = np.asarray(p, dtype=float)
    lam = mesh.bary_const + np.einsum("cij,j->ci", mesh.bary_grad, p)
    hits = np.flatnonzero(lam.min(axis=1) >= -eps)
    return int(hits[0]) if len(hits) else None


def locate_points(mesh, points, eps=EPS_GEOM, chunk=2048):
    """Vectorized :func:`locate_point`; ``-1`` marks points outside the mesh."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.full(len(points), -1, dtype=np.int64)
    for start in range(0, len(points), chunk):
        pts = points[start : start + chunk]
        lam = mesh.bary_const[None] + np.einsum("cij,nj->nci", mesh.bary_grad, pts)
        inside = lam.min(axis=2) >= -eps
        found = inside.any(axis=1)
        out[start : start + chunk] = np.where(found, inside.argmax(axis=1), -1)
    return out


@dataclass
class CellClassification:
    not_overlapped: np.ndarray
    fully_overlapped: np.ndarray
    partially_overlapped: np.ndarray
    overlap_area: np.ndarray = field(repr=False)

    @property
    def t1_star(self):
        return np.union1d(self.not_overlapped, self.partially_overlapped)


@dataclass(frozen=True)
class OverlapPiece:
    bg_cell: int
    ov_cell: int
    polygon: ConvexPolygon


@dataclass(frozen=True)
class InterfaceSegment:
    endpoints: np.ndarray
    bg_cell: int
    ov_cell: int
    ov_facet: int
    normal: np.ndarray
    h_penalty: float

    @property
    def length(self):
        return float(np.linalg.norm(self.endpoints[1] - self.endpoints[0]))

    @property
    def midpoint(self):
        return 0.5 * (self.endpoints[0] + self.endpoints[1])


@dataclass
class CutGeometry:
    background: object
    overlapping: object
    classification: CellClassification
    overlap_pieces: list
    interface_segments: list
    t1_star_cells: np.ndarray
    pieces_by_cell: dict = field(repr=False, default_factory=dict)

    def omega1_area(self, bg_cell):
        return self.background.cell_areas[bg_cell] - sum(
            self.overlap_pieces[k].polygon.area for k in self.pieces_by_cell.get(bg_cell, ())
        )

    def interface_length(self):
        return sum(s.length for s in self.interface_segments)

    def overlap_area(self):
        return sum(p.polygon.area for p in self.overlap_pieces)


def _bboxes(mesh):
    p = mesh.vertices[mesh.cells]
    return p.min(axis=1), p.max(axis=1)


def _candidate_pairs(bg, ov, bg_cells, eps):
    bg_lo, bg_hi = _bboxes(bg)
    ov_lo, ov_hi = _bboxes(ov)
    pairs = {}
    for c in bg_cells:
        hit = np.all(ov_lo <= bg_hi[c] + eps, axis=1) & np.all(ov_hi >= bg_lo[c] - eps, axis=1)
        idx = np.flatnonzero(hit)
        if len(idx):
            pairs[int(c)] = idx
    return pairs


def _segment_distances(points, a, b):
    """Distance from each point to the closest of the segments ``a[k]b[k]``."""
    ab = b - a
    ap = points[:, None, :] - a[None]
    t = np.clip(np.einsum("pkd,kd->pk", ap, ab) / np.einsum("kd,kd->k", ab, ab), 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    return np.linalg.norm(points[:, None, :] - closest, axis=2).min(axis=1)


def check_strictly_inside(bg, ov, eps=EPS_GEOM):
    bnd = ov.boundary_vertices()
    pts = ov.vertices[bnd]
    if np.any(locate_points(bg, pts, eps=eps) < 0):
        raise GeometryError("overlapping mesh is not strictly inside the background domain")
    bf = bg.facets[bg.boundary_facet_ids]
    dist = _segment_distances(pts, bg.vertices[bf[:, 0]], bg.vertices[bf[:, 1]])
    if np.any(dist <= eps):
        raise GeometryError("overlapping mesh boundary touches the background boundary")


def _clip_all(bg, ov, eps):
    ov_lo, ov_hi = ov.bounding_box()
    bg_lo, bg_hi = _bboxes(bg)
    near = np.flatnonzero(np.all(bg_hi >= ov_lo - eps, axis=1) & np.all(bg_lo <= ov_hi + eps, axis=1))
    clips = {}
    for c, cand in _candidate_pairs(bg, ov, near, eps).items():
        tri = bg.cell_points(c)
        found = []
        for k in cand:
            poly = clip_triangle_triangle(tri, ov.cell_points(k), eps)
            if not poly.is_empty:
                found.append((int(k), poly))
        if found:
            clips[c] = found
    return clips


def _classify_from_clips(bg, clips, eps_class):
    area = np.zeros(bg.n_cells)
    for c, found in clips.items():
        area[c] = sum(poly.area for _, poly in found)
    ratio = area / bg.cell_areas
    full = ratio >= 1.0 - eps_class
    none = ratio <= eps_class
    partial = ~(full | none)
    return CellClassification(
        not_overlapped=np.flatnonzero(none),
        fully_overlapped=np.flatnonzero(full),
        partially_overlapped=np.flatnonzero(partial),
        overlap_area=area,
    )


def _clip_segment(a, b, tri, eps):
    """Parameter interval of ``a + t (b - a)`` inside ``tri`` or ``None``."""
    d = b - a
    t0, t1 = 0.0, 1.0
    for k in range(3):
        p, q = tri[k], tri[(k + 1) % 3]
        e = q - p
        inv_len = 1.0 / np.hypot(*e)
        # signed distance f(t) = f0 + t * df, inside where f >= -eps
        f0 = _cross(e, a - p) * inv_len
        df = _cross(e, d) * inv_len
        if abs(df) < 1e-300:
            if f0 < -eps:
                return None
            continue
        t = (-eps - f0) / df
        if df > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return t0, t1


def _split_facet(a, b, cand_cells, bg, active_mask, eps):
    length = float(np.linalg.norm(b - a))
    tol = eps / length
    intervals = []
    for c in cand_cells:
        iv = _clip_segment(a, b, bg.cell_points(c), eps)
        if iv is not None and iv[1] - iv[0] > tol:
            intervals.append((max(iv[0], 0.0), min(iv[1], 1.0), int(c)))
    breaks = sorted({0.0, 1.0, *(t for iv in intervals for t in iv[:2])})
    merged = [breaks[0]]
    for t in breaks[1:]:
        if t - merged[-1] > tol:
            merged.append(t)
    merged[-1] = 1.0

    pieces = []
    for s0, s1 in zip(merged[:-1], merged[1:]):
        tm = 0.5 * (s0 + s1)
        owners = [c for lo, hi, c in intervals if lo - tol <= tm <= hi + tol]
        if not owners:
            return None
        # active cells first, then lowest id
        cell = min(owners, key=lambda c: (not active_mask[c], c))
        if pieces and pieces[-1][2] == cell:
            pieces[-1] = (pieces[-1][0], s1, cell)
        else:
            pieces.append((s0, s1, cell))
    return pieces


def _interface_segments(bg, ov, active_mask, eps):
    """Split the boundary facets of ``ov`` over background cells.

    A piece of Γ crossing only inactive cells means the area tolerance
    swallowed a genuine Ω_1 sliver; the owning cell is returned in
    ``promoted`` and must be treated as partially overlapped.
    """
    bg_lo, bg_hi = _bboxes(bg)
    segments, promoted = [], set()
    for f in ov.boundary_facet_ids:
        i, j = ov.facets[f]
        cell = int(ov.facet_cells[f, 0])
        opposite = ov.vertices[ov.cells[cell, ov.facet_local[f, 0]]]
        a, b = ov.vertices[i], ov.vertices[j]
        tangent = (b - a) / np.linalg.norm(b - a)
        normal = np.array([tangent[1], -tangent[0]])
        if np.dot(normal, a - opposite) < 0:
            normal = -normal
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        hit = np.all(bg_lo <= hi + eps, axis=1) & np.all(bg_hi >= lo - eps, axis=1)
        pieces = _split_facet(a, b, np.flatnonzero(hit), bg, active_mask, eps)
        if pieces is None:
            raise GeometryError(f"boundary facet {f} of the overlapping mesh cannot be located in the background mesh")
        for s0, s1, c in pieces:
            if not active_mask[c]:
                promoted.add(c)
            ends = np.array([a + s0 * (b - a), a + s1 * (b - a)])
            segments.append(InterfaceSegment(ends, c, cell, int(f), normal, float(ov.cell_diameters[cell])))
    return segments, promoted


def _classify(bg, ov, eps, eps_class):
    check_strictly_inside(bg, ov, eps)
    clips = _clip_all(bg, ov, eps)
    cls = _classify_from_clips(bg, clips, eps_class)
    active_mask = np.zeros(bg.n_cells, dtype=bool)
    active_mask[cls.t1_star] = True
    segments, promoted = _interface_segments(bg, ov, active_mask, eps)
    if promoted:
        promoted = np.array(sorted(promoted), dtype=np.int64)
        cls.fully_overlapped = np.setdiff1d(cls.fully_overlapped, promoted)
        cls.not_overlapped = np.setdiff1d(cls.not_overlapped, promoted)
        cls.partially_overlapped = np.union1d(cls.partially_overlapped, promoted)
    return cls, clips, segments


def classify_cells(bg, ov, eps=EPS_GEOM, eps_class=EPS_CLASS):
    """Split background cells into not / fully / partially overlapped sets.

    The split is by overlapped area relative to ``eps_class``; a cell whose
    interior is crossed by Γ is always partially overlapped.
    """
    return _classify(bg, ov, eps, eps_class)[0]


def build_cut_geometry(bg, ov, eps=EPS_GEOM, eps_class=EPS_CLASS):
    cls, clips, segments = _classify(bg, ov, eps, eps_class)
    pieces, by_cell = [], {}
    for c in cls.partially_overlapped:
        for k, poly in clips.get(int(c), ()):
            by_cell.setdefault(int(c), []).append(len(pieces))
            pieces.append(OverlapPiece(int(c), k, poly))

    geom = CutGeometry(bg, ov, cls, pieces, segments, cls.t1_star, by_cell)
    ratio = mesh_size_ratio(geom)
    if ratio > COMPATIBILITY_WARN_RATIO:
        warnings.warn(f"mesh sizes incompatible across the interface (h ratio {ratio:.3g})", stacklevel=2)
    return geom


def mesh_size_ratio(geom):
    """Largest ratio between background and overlapping cell diameters over
    cell pairs sharing a piece of the interface."""
    ratio = 1.0
    for s in geom.interface_segments:
        hb = geom.background.cell_diameters[s.bg_cell]
        ratio = max(ratio, hb / s.h_penalty, s.h_penalty / hb)
    return float(ratio)


def integrate_over_cut_part(bg_cell, f, geom, degree=4):
    """Integrate ``f`` over ``T ∩ Ω_1`` as the full-cell integral minus the
    overlap pieces of that cell."""
    if bg_cell not in set(geom.t1_star_cells.tolist()):
        raise GeometryError(f"cell {bg_cell} is not an active background cell")
    tri = geom.background.cell_points(bg_cell)
    pts, w = triangle_rules(tri[None], degree)
    rule = QuadratureRule(pts[0], w[0])
    total = rule.integrate(f)
    for k in geom.pieces_by_cell.get(int(bg_cell), ()):
        total = total - polygon_rule(geom.overlap_pieces[k].polygon, degree).integrate(f)
    return total


# ---------------------------------------------------------------------------
# flattened quadrature data for assembly


@dataclass
class CellQuadrature:
    """Quadrature points tagged with the cell(s) whose basis lives there."""

    points: np.ndarray
    weights: np.ndarray
    bg_cells: np.ndarray = None
    ov_cells: np.ndarray = None
    normals: np.ndarray = None
    h: np.ndarray = None


def full_cell_quadrature(mesh, cells, degree):
    cells = np.asarray(cells, dtype=np.int64)
    pts, w = triangle_rules(mesh.vertices[mesh.cells[cells]], degree)
    q = pts.shape[1]
    return pts.reshape(-1, 2), w.ravel(), np.repeat(cells, q)


def omega1_quadrature(geom, degree):
    """Signed-weight rule for the background side: full active cells with
    positive weights, overlap pieces with negative weights."""
    pts, w, cells = full_cell_quadrature(geom.background, geom.t1_star_cells, degree)
    plist, wlist, clist = [pts], [w], [cells]
    for piece in geom.overlap_pieces:
        rule = polygon_rule(piece.polygon, degree)
        plist.append(rule.points)
        wlist.append(-rule.weights)
        clist.append(np.full(len(rule), piece.bg_cell))
    return CellQuadrature(np.concatenate(plist), np.concatenate(wlist), bg_cells=np.concatenate(clist))


def overlap_quadrature(geom, degree):
    plist, wlist, blist, olist = [np.empty((0, 2))], [np.empty(0)], [np.empty(0, np.int64)], [np.empty(0, np.int64)]
    for piece in geom.overlap_pieces:
        rule = polygon_rule(piece.polygon, degree)
        plist.append(rule.points)
        wlist.append(rule.weights)
        blist.append(np.full(len(rule), piece.bg_cell))
        olist.append(np.full(len(rule), piece.ov_cell))
    return CellQuadrature(
        np.concatenate(plist), np.concatenate(wlist), bg_cells=np.concatenate(blist), ov_cells=np.concatenate(olist)
    )


def interface_quadrature(geom, degree):
    plist, wlist, blist, olist, nlist, hlist = [], [], [], [], [], []
    for seg in geom.interface_segments:
        rule = segment_rule(seg.endpoints[0], seg.endpoints[1], degree)
        n = len(rule)
        plist.append(rule.points)
        wlist.append(rule.weights)
        blist.append(np.full(n, seg.bg_cell))
        olist.append(np.full(n, seg.ov_cell))
        nlist.append(np.broadcast_to(seg.normal, (n, 2)))
        hlist.append(np.full(n, seg.h_penalty))
    if not plist:
        raise GeometryError("no interface segments")
    return CellQuadrature(
        np.concatenate(plist),
        np.concatenate(wlist),
        bg_cells=np.concatenate(blist),
        ov_cells=np.concatenate(olist),
        normals=np.concatenate(nlist),
        h=np.concatenate(hlist),
    )
