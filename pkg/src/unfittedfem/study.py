"""Convergence, rotation and parameter studies with CSV/SVG output.

A study is a list of independent cases (scheme, mesh level, rotation angle,
parameters). Cases may run on a thread pool; rows are sorted by a total key
before output so the CSV does not depend on scheduling. Wall-clock timings
go to a separate ``*_timings.csv`` file to keep the main table byte-stable.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .assembly import SchemeParams, assemble_dirichlet, assemble_neumann, assemble_robin
from .cutfem import assemble_cutfem
from .errors import ConfigError, UnfittedError
from .geometry import classify_and_extract
from .mesh import build_crisscross
from .plotting import line_plot_svg
from .postprocess import convergence_slope, error_norms
from .problems import linear_exact, make_problem
from .solver import solve_direct
from .spaces import ScalarSpaceP1, VectorSpaceZ

SCHEMES = ("dirichlet", "neumann", "robin", "cutfem_lagrange", "cutfem_sym", "cutfem_asym", "cutfem_neumann")
CUTFEM_VARIANT = {
    "cutfem_lagrange": "lagrange_p0",
    "cutfem_sym": "nitsche_sym",
    "cutfem_asym": "nitsche_asym",
    "cutfem_neumann": "neumann",
}
MEAN_FREE_SCHEMES = ("neumann", "cutfem_neumann")

KEY_COLUMNS = ["scheme", "problem", "n", "h", "theta0", "gamma", "sigma", "gamma_div", "gamma_1",
               "kappa", "graddiv_scaling"]
CSV_COLUMNS = KEY_COLUMNS + ["l2_rel", "h1_rel", "l2_meanfree_rel", "gamma_l2", "triple_norm",
                             "dofs", "cut_cells", "residual", "status", "message", "sigma_monotone"]
TIMING_COLUMNS = KEY_COLUMNS + ["assemble_time", "solve_time"]
DEFAULT_ANGLES = 36
ROTATION_PERIOD = 2.0 * math.pi / 7.0


@dataclass
class StudyConfig:
    scheme: str = "dirichlet"
    problem: str = "flower"
    R: float = 0.47
    radius: float = 0.25
    kappa: float = 1.0
    exact: str = "sin_exp"  # or "linear"
    levels: tuple = (16, 32, 64, 128)
    theta0: tuple = None  # None: 0 for single-angle studies, the default grid for rotation sweeps
    gamma: tuple = (1.0,)
    sigma: tuple = (0.01,)
    gamma_div: tuple = (1.0,)
    gamma_1: tuple = (10.0,)
    graddiv_scaling: tuple = ("constant",)
    out: str = None
    threads: int = 1
    seed: int = 0
    compare_with: str = "cutfem_asym"

    def validate(self, min_levels=1):
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; known: {SCHEMES}")
        levels = list(self.levels)
        if len(levels) < min_levels:
            raise ConfigError(f"need at least {min_levels} mesh levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("mesh levels must be strictly increasing")
        if any(n < 8 for n in levels):
            raise ConfigError("mesh levels must be >= 8")
        if self.problem not in ("flower", "disk"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.exact not in ("sin_exp", "linear"):
            raise ConfigError(f"unknown exact solution {self.exact!r}")
        if isinstance(self.graddiv_scaling, str):
            self.graddiv_scaling = (self.graddiv_scaling,)
        for s in self.graddiv_scaling:
            if s not in ("constant", "h_squared"):
                raise ConfigError(f"unknown graddiv scaling {s!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        return self

    @property
    def schemes(self):
        return [self.scheme]

    def param_grid(self):
        grid = []
        scalings = (self.graddiv_scaling,) if isinstance(self.graddiv_scaling, str) else self.graddiv_scaling
        for g, s, gd, g1, sc in itertools.product(self.gamma, self.sigma, self.gamma_div, self.gamma_1, scalings):
            grid.append(SchemeParams(gamma=g, sigma=s, gamma_div=gd, gamma_1=g1, kappa=self.kappa,
                                     graddiv_scaling=sc))
        if not grid:
            raise ConfigError("empty parameter grid")
        return grid

    def first_params(self):
        return self.param_grid()[0]


@dataclass(frozen=True)
class Case:
    scheme: str
    n: int
    theta0: float
    params: SchemeParams
    problem: str = "flower"
    R: float = 0.47
    radius: float = 0.25
    exact: str = "sin_exp"

    def build_problem(self):
        p = make_problem(self.problem, R=self.R, radius=self.radius, theta0=self.theta0,
                         kappa=self.params.kappa)
        return linear_exact(p) if self.exact == "linear" else p


@dataclass
class StudyReport:
    kind: str
    rows: list
    slopes: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)
    joined: list = field(default_factory=list)

    @property
    def failures(self):
        return [r for r in self.rows if r["status"] != "ok"]


def _key_fields(case: Case, h):
    p = case.params
    return {
        "scheme": case.scheme, "problem": case.problem, "n": case.n, "h": h,
        "theta0": case.theta0, "gamma": p.gamma, "sigma": p.sigma, "gamma_div": p.gamma_div,
        "gamma_1": p.gamma_1, "kappa": p.kappa, "graddiv_scaling": p.graddiv_scaling,
    }


def run_case(case: Case) -> dict:
    """Build, assemble, solve and measure one case; failures become rows."""
    bg = build_crisscross(case.n)
    row = _key_fields(case, bg.h)
    row.update({c: math.nan for c in CSV_COLUMNS if c not in row})
    row.update(dofs=0, cut_cells=0, status="ok", message="", sigma_monotone="",
               assemble_time=math.nan, solve_time=math.nan)
    try:
        t0 = time.perf_counter()
        problem = case.build_problem()
        mesh = classify_and_extract(bg, problem)
        bdry = mesh.boundary
        space = ScalarSpaceP1(mesh)
        zspace = None
        if case.scheme == "dirichlet":
            system = assemble_dirichlet(problem, mesh, bdry, space, case.params)
        elif case.scheme in ("neumann", "robin"):
            zspace = VectorSpaceZ(mesh)
            assemble = assemble_neumann if case.scheme == "neumann" else assemble_robin
            system = assemble(problem, mesh, bdry, space, zspace, case.params)
        else:
            system = assemble_cutfem(problem, mesh, bdry, space, CUTFEM_VARIANT[case.scheme], case.params)
        t1 = time.perf_counter()
        report = solve_direct(system)
        u, y, _ = system.split(report.solution)
        kind = case.scheme if case.scheme in ("neumann", "robin") else "dirichlet"
        err = error_norms(problem, u, space, y_h=y, zspace=zspace, scheme=kind)
        row.update(
            l2_rel=err.l2_rel, h1_rel=err.h1_rel, l2_meanfree_rel=err.l2_meanfree_rel,
            gamma_l2=err.gamma_l2, triple_norm=err.triple_norm, dofs=system.n,
            cut_cells=len(mesh.cut_cells), residual=report.residual_norm,
            assemble_time=t1 - t0, solve_time=report.factor_time + report.solve_time,
        )
    except UnfittedError as exc:
        row.update(status="failed", message=f"n={case.n} theta0={case.theta0:.17g}: {type(exc).__name__}: {exc}")
    return row


def sort_key(row):
    return tuple(row[c] for c in ("scheme", "problem", "n", "theta0", "gamma", "sigma", "gamma_div", "gamma_1",
                                  "kappa", "graddiv_scaling"))


def run_cases(cases, threads=1):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run_case, cases))
    else:
        rows = [run_case(c) for c in cases]
    return sorted(rows, key=sort_key)


def _case(config: StudyConfig, scheme, n, theta0, params):
    return Case(scheme=scheme, n=n, theta0=float(theta0), params=params, problem=config.problem,
                R=config.R, radius=config.radius, exact=config.exact)


def l2_column(scheme):
    return "l2_meanfree_rel" if scheme in MEAN_FREE_SCHEMES else "l2_rel"


def _slopes(rows):
    out = {}
    groups = {}
    for r in rows:
        groups.setdefault((r["scheme"], r["theta0"]), []).append(r)
    for key, group in groups.items():
        ok = [r for r in group if r["status"] == "ok"]
        slopes = {}
        for col in ("h1_rel", "l2_rel", "l2_meanfree_rel"):
            pts = [(r["h"], r[col]) for r in ok]
            if len(pts) >= 3 and all(e > 1e-12 for _, e in pts):
                slopes[col] = convergence_slope(pts)
            else:
                slopes[col] = math.nan
        out[key] = slopes
    return out


def _single_angle(config):
    if not config.theta0:
        return 0.0
    if len(config.theta0) > 1:
        raise ConfigError("this study takes a single theta0")
    return float(config.theta0[0])


def run_convergence(config: StudyConfig) -> StudyReport:
    config.validate(min_levels=3)
    params = config.first_params()
    cases = [_case(config, config.scheme, n, _single_angle(config), params) for n in config.levels]
    rows = run_cases(cases, config.threads)
    return StudyReport("convergence", rows, slopes=_slopes(rows))


def default_angles(count=DEFAULT_ANGLES):
    return tuple(np.linspace(0.0, ROTATION_PERIOD, count, endpoint=False))


def _ratios(rows):
    out = {}
    groups = {}
    for r in rows:
        groups.setdefault((r["scheme"], r["n"]), []).append(r)
    for key, group in groups.items():
        ok = [r for r in group if r["status"] == "ok"]
        entry = {}
        for col in ("h1_rel", l2_column(key[0])):
            vals = [r[col] for r in ok]
            entry[col] = max(vals) / min(vals) if vals and min(vals) > 0 else math.inf
        entry["failed"] = len(group) - len(ok)
        out[key] = entry
    return out


def run_rotation_sweep(config: StudyConfig) -> StudyReport:
    config.validate()
    angles = default_angles() if config.theta0 is None else tuple(config.theta0)
    if len(angles) < 8:
        raise ConfigError("a rotation sweep needs at least 8 angles")
    params = config.first_params()
    cases = [_case(config, config.scheme, n, t, params) for n in config.levels for t in angles]
    rows = run_cases(cases, config.threads)
    return StudyReport("rotation", rows, ratios=_ratios(rows))


def _mark_sigma_monotone(rows):
    groups = {}
    for r in rows:
        key = (r["scheme"], r["n"], r["theta0"], r["gamma"], r["gamma_div"], r["gamma_1"], r["graddiv_scaling"])
        groups.setdefault(key, []).append(r)
    for key, group in groups.items():
        if key[3] > 1.0 or len(group) < 2:
            continue
        group = sorted(group, key=lambda r: r["sigma"])
        mono = all(
            all(b[c] >= a[c] for c in ("l2_rel", "h1_rel"))
            for a, b in zip(group, group[1:])
        ) and all(r["status"] == "ok" for r in group)
        for r in group:
            r["sigma_monotone"] = "true" if mono else "false"


def run_param_sweep(config: StudyConfig) -> StudyReport:
    config.validate()
    grid = config.param_grid()
    theta = _single_angle(config)
    cases = [_case(config, config.scheme, n, theta, p) for n in config.levels for p in grid]
    rows = run_cases(cases, config.threads)
    _mark_sigma_monotone(rows)
    return StudyReport("params", rows)


def run_compare(config: StudyConfig) -> StudyReport:
    """Run the configured scheme and a CutFEM baseline on the same (level, angle) sweep."""
    config.validate()
    other = config.compare_with
    if other not in SCHEMES:
        raise ConfigError(f"unknown comparison scheme {other!r}")
    params = config.first_params()
    base = {}
    if other in CUTFEM_VARIANT:
        from .cutfem import DEFAULT_PARAMS
        ref = DEFAULT_PARAMS[CUTFEM_VARIANT[other]]
        base = dict(gamma=ref.gamma, sigma=ref.sigma)
    other_params = replace(params, **base)
    angles = (0.0,) if config.theta0 is None else tuple(config.theta0)
    cases = []
    for n in config.levels:
        for t in angles:
            cases.append(_case(config, config.scheme, n, t, params))
            cases.append(_case(config, other, n, t, other_params))
    rows = run_cases(cases, config.threads)
    joined = []
    for n in config.levels:
        for t in angles:
            a = next(r for r in rows if r["scheme"] == config.scheme and r["n"] == n and r["theta0"] == float(t))
            b = next(r for r in rows if r["scheme"] == other and r["n"] == n and r["theta0"] == float(t))
            la, lb = l2_column(config.scheme), l2_column(other)
            joined.append({
                "n": n, "theta0": float(t), "scheme": config.scheme, "baseline": other,
                "h1_scheme": a["h1_rel"], "h1_baseline": b["h1_rel"],
                "l2_scheme": a[la], "l2_baseline": b[lb],
                "h1_ratio": b["h1_rel"] / a["h1_rel"] if a["h1_rel"] else math.nan,
                "l2_ratio": b[lb] / a[la] if a[la] else math.nan,
            })
    return StudyReport("compare", rows, ratios=_ratios(rows), joined=joined)


# --- output -----------------------------------------------------------------


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows, columns=CSV_COLUMNS):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _svg_for(report: StudyReport):
    rows = [r for r in report.rows if r["status"] == "ok"]
    series = {}
    if report.kind == "convergence":
        for r in rows:
            label_base = r["scheme"] if len({x["scheme"] for x in rows}) > 1 else ""
            for col, name in (("h1_rel", "H1"), (l2_column(r["scheme"]), "L2")):
                label = f"{label_base} {name}".strip()
                xs, ys = series.setdefault(label, ([], []))
                xs.append(r["h"])
                ys.append(r[col])
        return line_plot_svg(series, title="relative error vs h", xlabel="h", ylabel="relative error",
                             ref_slopes=(1, 2))
    if report.kind in ("rotation", "compare"):
        for r in rows:
            for col, name in (("h1_rel", "H1"), (l2_column(r["scheme"]), "L2")):
                label = f"{r['scheme']} n={r['n']} {name}"
                xs, ys = series.setdefault(label, ([], []))
                xs.append(r["theta0"])
                ys.append(r[col])
        return line_plot_svg(series, title="relative error vs rotation angle", xlabel="theta0",
                             ylabel="relative error", xlog=False, ylog=True)
    for r in rows:
        label = f"gamma={r['gamma']:g} H1"
        xs, ys = series.setdefault(label, ([], []))
        xs.append(r["sigma"])
        ys.append(r["h1_rel"])
        label = f"gamma={r['gamma']:g} L2"
        xs, ys = series.setdefault(label, ([], []))
        xs.append(r["sigma"])
        ys.append(r[l2_column(r["scheme"])])
    return line_plot_svg(series, title="relative error vs sigma", xlabel="sigma", ylabel="relative error")


def emit_outputs(report: StudyReport, out_dir, formats=("csv", "svg")):
    """Write ``<kind>.csv``, ``<kind>_timings.csv`` and ``<kind>.svg``; return the paths."""
    if not report.rows:
        raise ValueError("empty report: nothing to write")
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"output directory {out_dir!r} is not writable")
    paths = []

    def write(name, text):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        paths.append(path)

    if "csv" in formats:
        write(f"{report.kind}.csv", rows_to_csv(report.rows))
        write(f"{report.kind}_timings.csv", rows_to_csv(report.rows, TIMING_COLUMNS))
        if report.joined:
            write(f"{report.kind}_joined.csv", rows_to_csv(report.joined, list(report.joined[0])))
    if "svg" in formats:
        write(f"{report.kind}.svg", _svg_for(report))
    return paths
