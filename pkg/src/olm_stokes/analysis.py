"""Error norms, interface norms, rate fitting and the norm Gram matrix."""

from dataclasses import asdict, dataclass, fields

import numpy as np

from .assembly import _interface_basis, _Triplets
from .geometry import full_cell_quadrature, interface_quadrature, omega1_quadrature

ERROR_DEGREE = 4
ERROR_COLUMNS = ("level", "h_max", "ndofs", "err_u_h1", "err_u_l2", "err_p_l2", "err_jump")


@dataclass
class ErrorReport:
    h_max: float
    n_dofs: int
    err_u_h1: float
    err_u_l2: float
    err_p_l2: float
    err_jump: float
    level: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            setattr(self, f.name, int(v) if f.type is int else float(v))
            v = getattr(self, f.name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be finite and non-negative, got {v}")

    def as_row(self):
        d = asdict(self)
        d["ndofs"] = d.pop("n_dofs")
        return [d[c] for c in ERROR_COLUMNS]


def _side_values(space, which, cells, points, x):
    """Discrete velocity, velocity gradient and pressure on one mesh."""
    sub = space.bg if which == "1" else space.ov
    mesh = sub.mesh
    dofs = sub.cell_dofs(cells)
    u1, p1, u2, p2 = space.split(x)
    u, p = (u1, p1) if which == "1" else (u2, p2)
    lam = mesh.bary_const[cells] + np.einsum("kij,kj->ki", mesh.bary_grad[cells], points)
    grad = mesh.bary_grad[cells]
    uc = u[dofs]  # (n, 3, 2)
    uh = np.einsum("ki,kic->kc", lam, uc)
    guh = np.einsum("kic,kid->kcd", uc, grad)
    ph = np.einsum("ki,ki->k", lam, p[dofs])
    return uh, guh, ph


def _broken_cells(geom):
    bg, ov = geom.background, geom.overlapping
    return (("1", bg, geom.t1_star_cells), ("2", ov, np.arange(ov.n_cells)))


def broken_h1_error(u_exact_grad, x, space, geom, degree=ERROR_DEGREE):
    """‖∇(u - u_h)‖ summed over full active background cells and all
    overlapping cells; the overlap is counted from both sides."""
    total = 0.0
    for which, mesh, cells in _broken_cells(geom):
        pts, w, qc = full_cell_quadrature(mesh, cells, degree)
        _, guh, _ = _side_values(space, which, qc, pts, x)
        diff = np.asarray(u_exact_grad(pts)) - guh
        total += float(np.sum(w * np.sum(diff**2, axis=(1, 2))))
    return np.sqrt(total)


def velocity_l2_error(u_exact, x, space, geom, degree=ERROR_DEGREE):
    total = 0.0
    for which, mesh, cells in _broken_cells(geom):
        pts, w, qc = full_cell_quadrature(mesh, cells, degree)
        uh, _, _ = _side_values(space, which, qc, pts, x)
        total += float(np.sum(w * np.sum((np.asarray(u_exact(pts)) - uh) ** 2, axis=1)))
    return np.sqrt(total)


def composite_pressure_mean(x, space, geom, degree=ERROR_DEGREE):
    """Mean of the discrete pressure over Ω: p_h1 on Ω_1, p_h2 on Ω_2."""
    q = omega1_quadrature(geom, degree)
    _, _, ph = _side_values(space, "1", q.bg_cells, q.points, x)
    integral = float(np.dot(q.weights, ph))
    ov = geom.overlapping
    pts, w, qc = full_cell_quadrature(ov, np.arange(ov.n_cells), degree)
    _, _, ph = _side_values(space, "2", qc, pts, x)
    integral += float(np.dot(w, ph))
    return integral / geom.background.total_area()


def exact_mean(fn, mesh, degree=ERROR_DEGREE):
    pts, w, _ = full_cell_quadrature(mesh, np.arange(mesh.n_cells), degree)
    return float(np.dot(w, fn(pts)) / w.sum())


def pressure_l2_error(p_exact, x, space, geom, degree=ERROR_DEGREE):
    """Broken L2 pressure error after shifting both pressures to zero mean over Ω."""
    shift_exact = exact_mean(p_exact, geom.background, degree)
    shift_h = composite_pressure_mean(x, space, geom, degree)
    total = 0.0
    for which, mesh, cells in _broken_cells(geom):
        pts, w, qc = full_cell_quadrature(mesh, cells, degree)
        _, _, ph = _side_values(space, which, qc, pts, x)
        diff = (np.asarray(p_exact(pts)) - shift_exact) - (ph - shift_h)
        total += float(np.dot(w, diff**2))
    return np.sqrt(total)


def interface_jump_norm(x, space, geom, order=0.5, degree=ERROR_DEGREE):
    """sqrt( sum_segments h^(-2 order) ∫ |u_h2 - u_h1|^2 )."""
    if order not in (-0.5, 0.5):
        raise ValueError("order must be -1/2 or +1/2")
    q = interface_quadrature(geom, min(degree, 5))
    u1, _, _ = _side_values(space, "1", q.bg_cells, q.points, x)
    u2, _, _ = _side_values(space, "2", q.ov_cells, q.points, x)
    jump2 = np.sum((u2 - u1) ** 2, axis=1)
    return float(np.sqrt(np.sum(q.weights * q.h ** (-2 * order) * jump2)))


def fit_rate(h, e, drop_first=0):
    """Least-squares slope of log(e) against log(h)."""
    h = np.asarray(h, dtype=float)[drop_first:]
    e = np.asarray(e, dtype=float)[drop_first:]
    if len(h) < 2 or len(h) != len(e):
        raise ValueError("need at least two (h, e) pairs of equal length")
    if np.any(h <= 0) or np.any(e <= 0):
        raise ValueError("h and e must be positive")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def build_norm_gram(space, geom):
    """Gram matrix of the mesh-dependent product norm

        ‖∇v‖²_{T1* ∪ T2} + Σ h ‖n·∇v_2‖²_Γ + Σ h⁻¹ ‖[v]‖²_Γ + ‖q‖²_{T1* ∪ T2}

    with h the diameter of the overlapping cell owning each Γ segment.
    """
    out = _Triplets(space.total_dofs)
    for which, mesh, cells in _broken_cells(geom):
        sub = space.bg if which == "1" else space.ov
        pts, w, qc = full_cell_quadrature(mesh, cells, 2)
        dofs = sub.cell_dofs(qc)
        lam = mesh.bary_const[qc] + np.einsum("kij,kj->ki", mesh.bary_grad[qc], pts)
        grad = mesh.bary_grad[qc]
        stiff = w[:, None, None] * np.einsum("kid,kjd->kij", grad, grad)
        for d in range(2):
            rows = space.velocity_dofs(which, dofs, d)
            out.add(rows, rows, stiff)
        prow = space.pressure_dofs(which, dofs)
        out.add(prow, prow, w[:, None, None] * np.einsum("ki,kj->kij", lam, lam))

    q = interface_quadrature(geom, 2)
    jump, flux, _, dofs1, dofs2 = _interface_basis(space, geom, q)
    local = q.weights[:, None, None] * (
        q.h[:, None, None] * np.einsum("ki,kj->kij", flux, flux)
        + (1.0 / q.h)[:, None, None] * np.einsum("ki,kj->kij", jump, jump)
    )
    for d in range(2):
        rows = np.concatenate([space.velocity_dofs("1", dofs1, d), space.velocity_dofs("2", dofs2, d)], axis=1)
        out.add(rows, rows, local)
    return out.tocsr()


def compute_errors(x, space, geom, u, grad_u, p, level=0):
    return ErrorReport(
        h_max=max(geom.background.h_max, geom.overlapping.h_max),
        n_dofs=space.total_dofs,
        err_u_h1=broken_h1_error(grad_u, x, space, geom),
        err_u_l2=velocity_l2_error(u, x, space, geom),
        err_p_l2=pressure_l2_error(p, x, space, geom),
        err_jump=interface_jump_norm(x, space, geom, 0.5),
        level=level,
    )

