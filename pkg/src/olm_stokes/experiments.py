"""Experiment drivers: convergence, conditioning, inf-sup sweeps and single solves."""

import logging
import os
import time
from dataclasses import dataclass

import numpy as np

from .analysis import ERROR_COLUMNS, build_norm_gram, compute_errors, fit_rate
from .assembly import StokesProblem, assemble_system
from .geometry import build_cut_geometry
from .io import dump_geometry, dump_matrix, write_csv, write_vtk
from .linalg import SolverError, generalized_min_singular, solve, spectrum_summary
from .mesh import MeshTransform, build_structured_square_mesh, transform_mesh
from .validation import check_inner_box_parameter, check_positive

log = logging.getLogger(__name__)

L_SWEEP = (0.21, 0.201, 0.2001, 0.20001, 0.200001)
CONDITION_PAIRS = ((5, 3), (10, 6))
INNER_BOX = (0.3331, 0.6669)


@dataclass
class ManufacturedSolution:
    u: callable
    grad_u: callable
    p: callable
    f: callable


def _sin_solution():
    pi = np.pi

    def u(x):
        return np.column_stack([np.sin(pi * x[:, 1]), np.zeros(len(x))])

    def grad_u(x):
        g = np.zeros((len(x), 2, 2))
        g[:, 0, 1] = pi * np.cos(pi * x[:, 1])
        return g

    def p(x):
        return np.cos(pi * x[:, 0]) + 1.0

    def f(x):
        return np.column_stack([pi**2 * np.sin(pi * x[:, 1]) - pi * np.sin(pi * x[:, 0]), np.zeros(len(x))])

    return ManufacturedSolution(u, grad_u, p, f)


def _linear_solution():
    def u(x):
        return np.column_stack([x[:, 1], x[:, 0]])

    def grad_u(x):
        return np.broadcast_to(np.array([[0.0, 1.0], [1.0, 0.0]]), (len(x), 2, 2)).copy()

    def p(x):
        return 2.0 * x[:, 0] - 1.0

    def f(x):
        return np.tile([2.0, 0.0], (len(x), 1))

    return ManufacturedSolution(u, grad_u, p, f)


def _zero_solution():
    def zero_vec(x):
        return np.zeros((len(x), 2))

    def zero(x):
        return np.zeros(len(x))

    def grad_u(x):
        return np.zeros((len(x), 2, 2))

    return ManufacturedSolution(zero_vec, grad_u, zero, zero_vec)


SOLUTIONS = {"manufactured": _sin_solution, "patch": _linear_solution, "zero": _zero_solution}


def manufactured_solution(case="manufactured"):
    """Exact solution and matching body force.

    ``manufactured``: u = (sin πy, 0), p = cos πx + 1.
    ``patch``: u = (y, x), p = 2x - 1, reproduced exactly by P1.
    ``zero``: everything zero.
    """
    try:
        return SOLUTIONS[case]()
    except KeyError:
        raise ValueError(f"unknown case {case!r}; expected one of {sorted(SOLUTIONS)}") from None


@dataclass
class ExperimentConfig:
    subcommand: str = "convergence"
    levels: int = 4
    n: tuple = (5, 10)
    m: tuple = (3, 6)
    l: tuple = L_SWEEP
    angle: float = 0.35
    gamma: float = 10.0
    delta: float = 0.05
    beta: int = 1
    with_sh: bool = True
    output_dir: str = None
    seed: int = 0
    case: str = "manufactured"
    dump_matrix: bool = False
    dump_geometry: bool = False
    kappa: bool = False

    def __post_init__(self):
        if self.subcommand not in ("convergence", "condition", "infsup", "solve"):
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if int(self.levels) < 0 or (self.subcommand == "convergence" and int(self.levels) < 1):
            raise ValueError("levels must be >= 1")
        self.l = tuple(check_inner_box_parameter(v) for v in self.l)
        self.n, self.m = tuple(int(v) for v in self.n), tuple(int(v) for v in self.m)
        if len(self.n) != len(self.m):
            raise ValueError("--n and --m must list the same number of resolutions")
        check_positive(self.gamma, "gamma")
        check_positive(self.delta, "delta")

    def problem(self, solution):
        return StokesProblem(f=solution.f, g=solution.u, gamma=self.gamma, delta=self.delta, beta=self.beta)

    def path(self, name):
        if self.output_dir is None:
            return None
        os.makedirs(self.output_dir, exist_ok=True)
        return os.path.join(self.output_dir, name)


def rotated_mesh_pair(level, angle):
    """Background [0,1]² at 3·2^level per side and the rotated inner box at 2^level."""
    bg = build_structured_square_mesh((0.0, 0.0), (1.0, 1.0), 3 * 2**level, 3 * 2**level)
    lo, hi = INNER_BOX
    inner = build_structured_square_mesh((lo, lo), (hi, hi), 2**level, 2**level)
    center = (0.5 * (lo + hi), 0.5 * (lo + hi))
    return bg, transform_mesh(inner, MeshTransform(angle, center))


def box_mesh_pair(n, m, l):
    bg = build_structured_square_mesh((0.0, 0.0), (1.0, 1.0), n, n)
    ov = build_structured_square_mesh((l, l), (1.0 - l, 1.0 - l), m, m)
    return bg, ov


def _debug_dumps(config, system, geom, tag):
    if config.dump_matrix and config.output_dir:
        dump_matrix(config.path(f"matrix_{tag}.mtx"), system.matrix)
    if config.dump_geometry and config.output_dir:
        dump_geometry(config.path(f"geometry_{tag}.csv"), geom)


def solve_level(bg, ov, problem, with_sh=True):
    geom = build_cut_geometry(bg, ov)
    system = assemble_system(bg, ov, problem, with_sh=with_sh, geom=geom)
    result = solve(system)
    return geom, system, result


def run_convergence(config):
    """Solve the manufactured problem on levels 0..levels; returns the error
    reports and fitted slopes, and writes ``convergence.csv`` when an output
    directory is configured."""
    sol = manufactured_solution(config.case)
    problem = config.problem(sol)
    reports = []
    for level in range(int(config.levels) + 1):
        t0 = time.perf_counter()
        bg, ov = rotated_mesh_pair(level, config.angle)
        try:
            geom, system, result = solve_level(bg, ov, problem, config.with_sh)
        except SolverError as exc:
            raise SolverError(f"level {level}: {exc}") from exc
        _debug_dumps(config, system, geom, f"level{level}")
        rep = compute_errors(result.x, system.space, geom, sol.u, sol.grad_u, sol.p, level)
        reports.append(rep)
        log.info("level %d: %d dofs, residual %.2e, %.2fs", level, rep.n_dofs, result.residual, time.perf_counter() - t0)

    h = [r.h_max for r in reports]
    slopes = {}
    for key in ("err_u_h1", "err_p_l2"):
        errs = [getattr(r, key) for r in reports]
        slopes["slope_" + key[4:]] = fit_rate(h, errs) if min(errs) > 0 else float("nan")
    path = config.path("convergence.csv")
    if path:
        comment = " ".join(f"{k}={v!r}" for k, v in slopes.items())
        write_csv(path, ERROR_COLUMNS, [r.as_row() for r in reports], comment=comment)
    return reports, slopes


CONDITION_COLUMNS = ("l", "N", "M", "with_sh", "kappa", "kappa_h2")


@dataclass
class ConditionRecord:
    l: float
    N: int
    M: int
    with_sh: bool
    kappa: float
    kappa_h2: float
    n_zero: int

    def as_row(self):
        return [self.l, self.N, self.M, str(self.with_sh).lower(), self.kappa, self.kappa_h2]


def condition_case(n, m, l, with_sh, problem):
    bg, ov = box_mesh_pair(n, m, l)
    geom = build_cut_geometry(bg, ov)
    system = assemble_system(bg, ov, problem, with_sh=with_sh, geom=geom)
    spectrum = spectrum_summary(system.reduced_matrix())
    if spectrum.n_zero != 1:
        log.warning("l=%g N=%d M=%d: %d zero eigenvalues", l, n, m, spectrum.n_zero)
    h = ov.h_min
    return ConditionRecord(l, n, m, with_sh, spectrum.kappa, spectrum.kappa * h**2, spectrum.n_zero), system, geom


def run_condition(config):
    """Condition numbers of the Dirichlet-reduced matrix over the l sweep,
    with and without the overlap penalty."""
    problem = StokesProblem(gamma=config.gamma, delta=config.delta, beta=config.beta)
    records = []
    for n, m in zip(config.n, config.m):
        for with_sh in (True, False):
            for l in config.l:
                rec, system, geom = condition_case(n, m, l, with_sh, problem)
                _debug_dumps(config, system, geom, f"N{n}_M{m}_l{l}_{'sh' if with_sh else 'nosh'}")
                records.append(rec)
    path = config.path("condition.csv")
    if path:
        write_csv(path, CONDITION_COLUMNS, [r.as_row() for r in records])
    return records


INFSUP_COLUMNS = ("l", "with_sh", "c_infsup")


def infsup_case(n, m, l, with_sh, problem):
    bg, ov = box_mesh_pair(n, m, l)
    geom = build_cut_geometry(bg, ov)
    system = assemble_system(bg, ov, problem, with_sh=with_sh, geom=geom)
    gram = build_norm_gram(system.space, geom)
    free = system.free_dofs
    return generalized_min_singular(system.reduced_matrix(), gram[free][:, free], system.reduced_nullspace())


def run_infsup(config):
    """Numerical inf-sup constants over the l sweep for the first (N, M) pair."""
    problem = StokesProblem(gamma=config.gamma, delta=config.delta, beta=config.beta)
    n, m = config.n[0], config.m[0]
    rows = []
    for with_sh in (True, False):
        for l in config.l:
            rows.append((l, with_sh, infsup_case(n, m, l, with_sh, problem)))
    path = config.path("infsup.csv")
    if path:
        write_csv(path, INFSUP_COLUMNS, [(l, str(s).lower(), c) for l, s, c in rows])
    return rows


def run_solve(config):
    """Solve one rotated configuration at level ``config.levels`` and write
    ``background.vtk`` and ``overlapping.vtk``."""
    sol = manufactured_solution(config.case)
    bg, ov = rotated_mesh_pair(int(config.levels), config.angle)
    geom, system, result = solve_level(bg, ov, config.problem(sol), config.with_sh)
    _debug_dumps(config, system, geom, "solve")
    space = system.space
    u1, p1, u2, p2 = space.split(result.x)
    info = {"ndofs": space.total_dofs, "residual": result.residual}
    if config.kappa:
        info["kappa"] = spectrum_summary(system.reduced_matrix()).kappa
    if config.output_dir:
        vel = np.zeros((bg.n_vertices, 2))
        pre = np.zeros(bg.n_vertices)
        vel[space.bg.vertices] = u1
        pre[space.bg.vertices] = p1
        write_vtk(config.path("background.vtk"), bg, vel, pre, cells=geom.t1_star_cells, title="background mesh")
        write_vtk(config.path("overlapping.vtk"), ov, u2, p2, title="overlapping mesh")
    info["solution"] = result.x
    info["system"] = system
    info["geometry"] = geom
    return info
