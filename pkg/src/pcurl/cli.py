"""Experiment driver: config-described studies emitting CSV/JSON/SVG artifacts.

Subcommands
-----------
mesh        generate a disk mesh file or inspect an existing one
verify      manufactured-solution convergence studies (smooth family)
effectivity estimator reliability and effectivity studies (front family)
snapshot    per-element / per-edge field and indicator maps at chosen times
acloss      AC-loss values and error bounds per refinement level

Config files are flat ``key = value`` INI text; arrays are comma separated.
CSV artifacts carry a header row and 17-significant-digit floats.  Exit codes:
0 success, 2 configuration error, 3 solver non-convergence, 4 gate failure
(only when ``--gate`` is passed).
"""

import argparse
import json
import os
import sys
import time
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from .assembly import PowerLawParams
from .estimators import (
    ZeroErrorDenominator,
    ac_loss_error_bound,
    accumulate,
    effectivity_ratio,
    error_measures,
    step_estimators,
)
from .manufactured import ManufacturedCase, MovingFront, RadialSmooth
from .mesh import MeshError, disk_mesh, read_mesh, write_mesh
from .nedelec import l2_error, tables
from .stepper import NonConvergence, StepperConfig, TimeHistory, run


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


KINDS = (
    "verify",
    "convergence-h",
    "convergence-dt",
    "effectivity-h",
    "effectivity-T",
    "snapshot",
)


@dataclass
class ExperimentConfig:
    """Parsed study description; every field has a flat config key."""

    variant: str = "radial_smooth"
    a: float = 2.0
    b: float = 1.0
    p: float = 5.0
    alpha: float = 1.0
    kind: str = "verify"
    levels: tuple = (1, 2, 3, 4)
    dts: tuple = ()
    t_end: float = 5.0e-3
    t_ends: tuple = ()
    times: tuple = ()
    pairs: tuple = ((1, 1), (2, 1), (1, 2), (2, 2))
    newton_rel_tol: float = 1.0e-10
    newton_abs_tol: float = 1.0e-12
    newton_max_iter: int = 50
    line_search_max: int = 30
    p_continuation: bool = False
    svg: bool = False
    source_text: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown study kind {self.kind!r}; expected one of {KINDS}")
        if self.variant not in ("radial_smooth", "moving_front"):
            raise ConfigError(f"unknown case variant {self.variant!r}")
        if not self.levels:
            raise ConfigError("levels list must be nonempty")
        if not self.dts:
            self.dts = tuple(self.t_end / n for n in (4.0, 8.0, 16.0, 32.0))
        if self.kind == "effectivity-T":
            if len(self.t_ends) < 2:
                raise ConfigError("effectivity-T needs a t_ends list with >= 2 horizons")
            for T in self.t_ends:
                _check_divides(self.dts[0], T, "t_ends entry")
        else:
            for dt in self.dts:
                _check_divides(dt, self.t_end, "t_end")

    def stepper(self, dt, t_end):
        return StepperConfig(
            dt=dt,
            t_end=t_end,
            newton_rel_tol=self.newton_rel_tol,
            newton_abs_tol=self.newton_abs_tol,
            newton_max_iter=self.newton_max_iter,
            line_search_max=self.line_search_max,
            p_continuation=self.p_continuation,
        )

    def case(self, a=None, b=None, t_end=None):
        a = self.a if a is None else float(a)
        b = self.b if b is None else float(b)
        t_end = self.t_end if t_end is None else t_end
        params = PowerLawParams(p=self.p, alpha=self.alpha)
        try:
            if self.variant == "radial_smooth":
                return ManufacturedCase(RadialSmooth(a=a, b=b), params, t_end)
            return ManufacturedCase(MovingFront(a=a), params, t_end)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _check_divides(dt, t_end, what):
    n = round(t_end / dt)
    if n < 1 or abs(n * dt - t_end) > 1.0e-12 * t_end:
        raise ConfigError(f"{what} {t_end!r} is not an integral multiple of dt {dt!r}")


def _parse_list(raw, cast, key):
    out = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(cast(tok))
        except ValueError as exc:
            raise ConfigError(f"bad value {tok!r} in key {key!r}") from exc
    return tuple(out)


def load_config(path):
    """Read an experiment description from flat INI text."""
    parser = ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="ascii") as fh:
            text = fh.read()
        parser.read_string(text, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (ConfigParserError, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    kw = {"source_text": text}
    case = parser["case"] if parser.has_section("case") else {}
    study = parser["study"] if parser.has_section("study") else {}
    solver = parser["solver"] if parser.has_section("solver") else {}
    known_case = {"variant", "a", "b", "p", "alpha"}
    known_study = {"kind", "levels", "dts", "t_end", "t_ends", "times", "pairs", "svg"}
    known_solver = {
        "newton_rel_tol",
        "newton_abs_tol",
        "newton_max_iter",
        "line_search_max",
        "p_continuation",
    }
    for section, known in (("case", known_case), ("study", known_study), ("solver", known_solver)):
        if parser.has_section(section):
            for key in parser[section]:
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")

    def fget(sec, key, cast):
        if key in sec:
            raw = sec[key]
            try:
                if cast is bool:
                    low = raw.strip().lower()
                    if low in ("1", "true", "yes", "on"):
                        return True
                    if low in ("0", "false", "no", "off"):
                        return False
                    raise ValueError(raw)
                return cast(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r} for key {key!r}") from exc
        return None

    for key, cast in (("variant", str), ("a", float), ("b", float), ("p", float), ("alpha", float)):
        val = fget(case, key, cast)
        if val is not None:
            kw[key] = val
    for key, cast in (("kind", str), ("t_end", float), ("svg", bool)):
        val = fget(study, key, cast)
        if val is not None:
            kw[key] = val
    if "levels" in study:
        kw["levels"] = _parse_list(study["levels"], int, "levels")
    if "dts" in study:
        kw["dts"] = _parse_list(study["dts"], float, "dts")
    if "t_ends" in study:
        kw["t_ends"] = _parse_list(study["t_ends"], float, "t_ends")
    if "times" in study:
        kw["times"] = _parse_list(study["times"], float, "times")
    if "pairs" in study:
        pairs = []
        for tok in study["pairs"].split(","):
            tok = tok.strip()
            if not tok:
                continue
            parts = tok.split(":")
            if len(parts) != 2:
                raise ConfigError(f"bad pair {tok!r}; expected a:b")
            try:
                pairs.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"bad pair {tok!r}") from exc
        kw["pairs"] = tuple(pairs)
    for key, cast in (
        ("newton_rel_tol", float),
        ("newton_abs_tol", float),
        ("newton_max_iter", int),
        ("line_search_max", int),
        ("p_continuation", bool),
    ):
        val = fget(solver, key, cast)
        if val is not None:
            kw[key] = val
    try:
        return ExperimentConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# artifact emission
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_csv(path, header, rows):
    """Comma-separated artifact: header row, 17-significant-digit floats."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fit_slope(xs, ys):
    """Least-squares log-log slope with the residual norm of the fit."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    residual = float(np.sqrt(res[0])) if len(res) else 0.0
    return float(coef[0]), residual


@dataclass
class ConvergenceReport:
    """Ordered study rows plus fitted log-log slopes (needs >= 3 rows)."""

    study_var: str
    header: list
    rows: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def fit(self, name, xs, ys):
        if len(xs) >= 3:
            slope, residual = _fit_slope(xs, ys)
            self.slopes[name] = {"slope": slope, "residual": residual}


def _viridis_like(v):
    """Small hand-rolled blue-to-yellow ramp for SVG fills, v in [0, 1]."""
    stops = np.array(
        [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]],
        dtype=float,
    )
    x = np.clip(v, 0.0, 1.0) * (len(stops) - 1)
    i = np.minimum(x.astype(int), len(stops) - 2)
    frac = x - i
    rgb = stops[i] * (1.0 - frac[..., None]) + stops[i + 1] * frac[..., None]
    return rgb.astype(int)


def write_svg_triangle_map(path, mesh, values, title):
    """Filled triangle heat map; purely an optional artifact."""
    vmax = float(np.max(values)) if len(values) else 0.0
    vmin = float(np.min(values)) if len(values) else 0.0
    scale = (values - vmin) / (vmax - vmin) if vmax > vmin else np.zeros_like(values)
    rgb = _viridis_like(scale)
    size = 640
    half = size / 2.0

    def sx(x):
        return half + x * (half - 10.0)

    def sy(y):
        return half - y * (half - 10.0)

    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
        )
        fh.write(f"<title>{title} [{vmin:.3e}, {vmax:.3e}]</title>\n")
        for t in range(mesh.n_triangles):
            pts = " ".join(
                f"{sx(x):.2f},{sy(y):.2f}" for x, y in mesh.vertices[mesh.triangles[t]]
            )
            r, g, b = rgb[t]
            fh.write(
                f'<polygon points="{pts}" fill="rgb({r},{g},{b})" '
                'stroke="none"/>\n'
            )
        fh.write("</svg>\n")


def write_svg_edge_map(path, mesh, edge_indices, values, title):
    vmax = float(np.max(values)) if len(values) else 0.0
    vmin = float(np.min(values)) if len(values) else 0.0
    scale = (values - vmin) / (vmax - vmin) if vmax > vmin else np.zeros_like(values)
    rgb = _viridis_like(scale)
    size = 640
    half = size / 2.0

    def sx(x):
        return half + x * (half - 10.0)

    def sy(y):
        return half - y * (half - 10.0)

    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
        )
        fh.write(f"<title>{title} [{vmin:.3e}, {vmax:.3e}]</title>\n")
        for k, e in enumerate(edge_indices):
            (x0, y0), (x1, y1) = mesh.vertices[mesh.edges[e]]
            r, g, b = rgb[k]
            fh.write(
                f'<line x1="{sx(x0):.2f}" y1="{sy(y0):.2f}" x2="{sx(x1):.2f}" '
                f'y2="{sy(y1):.2f}" stroke="rgb({r},{g},{b})" stroke-width="2"/>\n'
            )
        fh.write("</svg>\n")


# ---------------------------------------------------------------------------
# study execution
# ---------------------------------------------------------------------------


def _run_case(case, mesh, dt, t_end, cfg):
    start = time.perf_counter()
    hist = run(
        case.initial_field(mesh),
        case.forcing,
        case.boundary_fn(mesh),
        case.params,
        cfg.stepper(dt, t_end),
    )
    wall = time.perf_counter() - start
    return hist, wall


def _sup_and_final_error(hist, case):
    errs = [l2_error(u, case.field, t) for t, u in zip(hist.times, hist.fields)]
    return max(errs), errs[-1]


def _wall(value, deterministic):
    # deterministic artifacts must be bit-identical across reruns
    return 0.0 if deterministic else value


def _mean_iters(hist):
    return float(np.mean(hist.newton_iters[1:])) if len(hist.newton_iters) > 1 else 0.0


def cmd_verify(config, outdir, deterministic):
    """Convergence studies of the smooth manufactured family."""
    if config.variant != "radial_smooth":
        raise ConfigError("verify requires variant = radial_smooth")
    summary = {"studies": {}}
    gates = {}

    def h_study(a, b, tag):
        dt = min(config.dts)
        report = ConvergenceReport(
            "h",
            ["level", "h", "dt", "err_l2_sup", "err_l2_final", "newton_iters_mean", "wall_time_s"],
        )
        hs, errs = [], []
        for level in sorted(config.levels):
            case = config.case(a=a, b=b)
            mesh = disk_mesh(level)
            hist, wall = _run_case(case, mesh, dt, config.t_end, config)
            sup, fin = _sup_and_final_error(hist, case)
            hs.append(mesh.mesh_size())
            errs.append(sup)
            report.rows.append(
                [level, mesh.mesh_size(), dt, sup, fin, _mean_iters(hist), _wall(wall, deterministic)]
            )
        report.fit("err_l2_sup", hs, errs)
        write_csv(os.path.join(outdir, f"{tag}.csv"), report.header, report.rows)
        summary["studies"][tag] = {"slopes": report.slopes, "max_error": max(errs)}
        return report, errs

    def dt_study(a, b, tag):
        level = max(config.levels)
        mesh = disk_mesh(level)
        report = ConvergenceReport(
            "dt",
            ["dt", "level", "h", "err_l2_sup", "err_l2_final", "newton_iters_mean", "wall_time_s"],
        )
        dts, errs = [], []
        for dt in sorted(config.dts, reverse=True):
            case = config.case(a=a, b=b)
            hist, wall = _run_case(case, mesh, dt, config.t_end, config)
            sup, fin = _sup_and_final_error(hist, case)
            dts.append(dt)
            errs.append(sup)
            report.rows.append(
                [dt, level, mesh.mesh_size(), sup, fin, _mean_iters(hist), _wall(wall, deterministic)]
            )
        report.fit("err_l2_sup", dts, errs)
        write_csv(os.path.join(outdir, f"{tag}.csv"), report.header, report.rows)
        summary["studies"][tag] = {"slopes": report.slopes, "max_error": max(errs)}
        return report, errs

    def slope_of(report):
        entry = report.slopes.get("err_l2_sup")
        return None if entry is None else entry["slope"]

    if config.kind == "convergence-h":
        report, _ = h_study(config.a, config.b, "convergence_h")
        gates["h_slope"] = _interval_gate(slope_of(report), 0.85, 1.15)
    elif config.kind == "convergence-dt":
        report, _ = dt_study(config.a, config.b, "convergence_dt")
        gates["dt_slope"] = _interval_gate(slope_of(report), 0.85, 1.15)
    else:
        for a, b in config.pairs:
            ia, ib = int(a), int(b)
            if (ia, ib) == (1, 1):
                _, errs = h_study(a, b, "verify_a1_b1_h")
                gates["exactness_max_error"] = _upper_gate(max(errs), 1.0e-10)
            if ib == 1 and ia != 1:
                report, _ = h_study(a, b, f"verify_a{ia}_b{ib}_h")
                lo, hi = (0.8, 1.2) if (ia, ib) == (2, 2) else (0.85, 1.15)
                gates[f"h_slope_a{ia}_b{ib}"] = _interval_gate(slope_of(report), lo, hi)
            if ib != 1:
                report, _ = dt_study(a, b, f"verify_a{ia}_b{ib}_dt")
                lo, hi = (0.8, 1.2) if (ia, ib) == (2, 2) else (0.85, 1.15)
                gates[f"dt_slope_a{ia}_b{ib}"] = _interval_gate(slope_of(report), lo, hi)
                if ia != 1:
                    report, _ = h_study(a, b, f"verify_a{ia}_b{ib}_h")
                    gates[f"h_slope_a{ia}_b{ib}"] = _interval_gate(
                        slope_of(report), 0.8, 1.2
                    )
    return summary, gates


def _interval_gate(value, lo, hi):
    ok = value is not None and lo <= value <= hi
    return {"value": value, "interval": [lo, hi], "passed": bool(ok)}


def _upper_gate(value, bound):
    ok = value is not None and value <= bound
    return {"value": value, "bound": bound, "passed": bool(ok)}


def _prefix_history(hist, n):
    return TimeHistory(
        times=hist.times[: n + 1],
        fields=hist.fields[: n + 1],
        newton_iters=hist.newton_iters[: n + 1],
        energy=hist.energy[: n + 1],
    )


def cmd_effectivity(config, outdir, deterministic):
    """Reliability (h sweep) and effectivity (h and T sweeps) studies."""
    if config.variant != "moving_front":
        raise ConfigError("effectivity requires variant = moving_front")
    dt = min(config.dts)
    summary = {}
    gates = {}
    if config.kind == "effectivity-T":
        level = config.levels[0]
        mesh = disk_mesh(level)
        horizon = max(config.t_ends)
        case = config.case(t_end=horizon)
        hist, wall = _run_case(case, mesh, dt, horizon, config)
        header = ["t_end", "level", "h", "dt", "kappa", "wall_time_s"]
        rows = []
        ts, kappas = [], []
        for T in sorted(config.t_ends):
            n = round(T / dt)
            sub = _prefix_history(hist, n)
            try:
                kap = effectivity_ratio(sub, case, case.params)
            except ZeroErrorDenominator:
                continue  # row skipped: error at round-off
            ts.append(T)
            kappas.append(kap)
            rows.append([T, level, mesh.mesh_size(), dt, kap, _wall(wall, deterministic)])
        write_csv(os.path.join(outdir, "effectivity_T.csv"), header, rows)
        exponent = _fit_slope(ts, kappas)[0] if len(ts) >= 3 else None
        summary["kappa_exponent"] = exponent
        summary["kappas"] = dict(zip(map(str, ts), kappas))
        gates["kappa_exponent"] = _interval_gate(exponent, -2.0, -1.3)
        return summary, gates

    header = [
        "level",
        "h",
        "dt",
        "sup_e_sq",
        "int_eta_i_q",
        "int_eta_t_q",
        "int_eta_n_sq",
        "int_curl_err_p",
        "estimator_total",
        "kappa",
        "newton_iters_mean",
        "wall_time_s",
    ]
    report = ConvergenceReport("h", header)
    hs, sup_sqs, eis, ens, ratios = [], [], [], [], []
    kappas = []
    for level in sorted(config.levels):
        mesh = disk_mesh(level)
        case = config.case()
        hist, wall = _run_case(case, mesh, dt, config.t_end, config)
        acc = accumulate(hist, case, case.params)
        sup_sq, int_curl = error_measures(hist, case, case.params)
        try:
            kap = effectivity_ratio(hist, case, case.params)
        except ZeroErrorDenominator:
            kap = np.nan
        hs.append(mesh.mesh_size())
        sup_sqs.append(sup_sq)
        eis.append(acc.int_eta_i_q)
        ens.append(acc.int_eta_n_sq)
        ratios.append((sup_sq + int_curl) / acc.estimator_integral)
        if np.isfinite(kap):
            kappas.append(kap)
        report.rows.append(
            [
                level,
                mesh.mesh_size(),
                dt,
                sup_sq,
                acc.int_eta_i_q,
                acc.int_eta_t_q,
                acc.int_eta_n_sq,
                int_curl,
                acc.total,
                kap,
                _mean_iters(hist),
                _wall(wall, deterministic),
            ]
        )
    report.fit("sup_e_sq", hs, sup_sqs)
    report.fit("int_eta_i_q", hs, eis)
    report.fit("int_eta_n_sq", hs, ens)
    write_csv(os.path.join(outdir, "effectivity_h.csv"), report.header, report.rows)
    summary["slopes"] = report.slopes
    kappa_ratio = max(kappas) / min(kappas) if kappas else None
    rel_ratio = max(ratios) / min(ratios) if ratios else None
    summary["kappa_ratio"] = kappa_ratio
    summary["reliability_ratio_spread"] = rel_ratio
    for name in ("sup_e_sq", "int_eta_i_q", "int_eta_n_sq"):
        entry = report.slopes.get(name)
        gates[f"slope_{name}"] = _interval_gate(
            None if entry is None else entry["slope"], 1.7, 2.3
        )
    gates["kappa_ratio"] = _upper_gate(kappa_ratio, 2.0)
    gates["reliability_ratio_spread"] = _upper_gate(rel_ratio, 3.0)
    return summary, gates


def snapshot_maps(case, hist, k):
    """Elementwise error norms and indicator maps at snapshot index ``k``.

    Returns (err_k, curl_err_k, eta_i_k, eta_n_f) with the edge array over
    all edges (zero on the boundary).
    """
    u = hist.fields[k]
    mesh = u.mesh
    t = hist.times[k]
    tab = tables(mesh)
    vals = kernels.field_at_quad(u.dofs, mesh.tri_edges, tab.basis_q)
    ref = np.asarray(case.field(tab.phys_q[..., 0], tab.phys_q[..., 1], t))
    err_k = np.sqrt(kernels.quad_vec_l2_sq_per_tri(vals - ref, tab.quad_w, mesh.areas))
    c = kernels.element_curls(u.dofs, mesh.tri_edges, tab.signed_curls)
    cref = np.asarray(case.curl(tab.phys_q[..., 0], tab.phys_q[..., 1], t))
    cerr = c[:, None] - cref
    curl_err_k = np.sqrt(2.0 * mesh.areas * np.einsum("q,tq->t", tab.quad_w, cerr**2))
    br = step_estimators(u, hist.fields[k - 1], hist.dt, t, case.forcing, case.params)
    return err_k, curl_err_k, br.eta_i_k, br.eta_n_f


def cmd_snapshot(config, outdir, deterministic):
    """Per-triangle and per-edge maps of errors and indicators."""
    if not config.times:
        raise ConfigError("snapshot needs a nonempty times list")
    dt = min(config.dts)
    level = config.levels[0]
    mesh = disk_mesh(level)
    case = config.case()
    horizon = config.t_end
    for t in config.times:
        if t > horizon + 1.0e-12:
            raise ConfigError(f"snapshot time {t!r} exceeds t_end {horizon!r}")
        k = round(t / dt)
        if k < 1 or abs(k * dt - t) > 1.0e-9 * max(1.0, abs(t)):
            raise ConfigError(f"snapshot time {t!r} is not a positive multiple of dt")
    hist, wall = _run_case(case, mesh, dt, horizon, config)
    centroids = mesh.vertices[mesh.triangles].mean(axis=1)
    interior = mesh.interior_edge_indices()
    midpoints = mesh.vertices[mesh.edges[interior]].mean(axis=1)
    summary = {"times": list(config.times), "wall_time_s": _wall(wall, deterministic)}
    gates = {}
    concentrations = []
    for t in config.times:
        k = round(t / dt)
        err_k, curl_err_k, eta_i_k, eta_n_f = snapshot_maps(case, hist, k)
        stem = f"t{k:05d}"
        for name, values in (
            ("element_err", err_k),
            ("element_curl_err", curl_err_k),
            ("element_eta_i", eta_i_k),
        ):
            write_csv(
                os.path.join(outdir, f"{name}_{stem}.csv"),
                ["element", "x", "y", "value"],
                [
                    [i, centroids[i, 0], centroids[i, 1], values[i]]
                    for i in range(mesh.n_triangles)
                ],
            )
            if config.svg:
                write_svg_triangle_map(
                    os.path.join(outdir, f"{name}_{stem}.svg"), mesh, values, name
                )
        eta_n_int = eta_n_f[interior]
        write_csv(
            os.path.join(outdir, f"edge_eta_n_{stem}.csv"),
            ["edge", "x", "y", "value"],
            [
                [int(e), midpoints[j, 0], midpoints[j, 1], eta_n_int[j]]
                for j, e in enumerate(interior)
            ],
        )
        if config.svg:
            write_svg_edge_map(
                os.path.join(outdir, f"edge_eta_n_{stem}.svg"),
                mesh,
                interior,
                eta_n_int,
                "edge_eta_n",
            )
        if config.variant == "moving_front":
            # top-decile indicator edges should hug the front radius 1 - t
            order = np.argsort(eta_n_int)
            top = order[-max(1, len(order) // 10) :]
            dist = np.abs(np.linalg.norm(midpoints[top], axis=1) - (1.0 - t))
            frac = float(np.mean(dist <= 2.0 * mesh.mesh_size()))
            concentrations.append(frac)
    if concentrations:
        summary["front_concentration"] = concentrations
        gates["front_concentration"] = {
            "value": min(concentrations),
            "bound": 0.9,
            "passed": bool(min(concentrations) >= 0.9),
        }
    return summary, gates


def cmd_acloss(config, outdir, deterministic):
    """AC loss per level with the constant-free and reliability bounds."""
    dt = min(config.dts)
    header = [
        "level",
        "h",
        "dt",
        "q_h",
        "q_exact_mesh",
        "q_exact_disk",
        "delta_q",
        "middle_bound",
        "reliability_bound",
        "m_value",
        "bound_ok",
        "wall_time_s",
    ]
    rows = []
    deltas = []
    bound_ok = []
    q_disk = None
    for level in sorted(config.levels):
        mesh = disk_mesh(level)
        case = config.case()
        hist, wall = _run_case(case, mesh, dt, config.t_end, config)
        rep = ac_loss_error_bound(hist, case, case.params)
        ok = rep.delta_q <= rep.middle_bound
        deltas.append(rep.delta_q)
        bound_ok.append(ok)
        q_disk = rep.q_exact
        rows.append(
            [
                level,
                mesh.mesh_size(),
                dt,
                rep.q_h,
                rep.q_exact_mesh,
                rep.q_exact,
                rep.delta_q,
                rep.middle_bound,
                rep.reliability_bound,
                rep.m_value,
                int(ok),
                _wall(wall, deterministic),
            ]
        )
    write_csv(os.path.join(outdir, "acloss.csv"), header, rows)
    monotone = all(deltas[i + 1] < deltas[i] for i in range(len(deltas) - 1))
    summary = {
        "q_exact_disk": q_disk,
        "delta_q": deltas,
        "middle_bound_ok": bound_ok,
        "delta_q_decreasing": monotone,
    }
    gates = {
        "middle_bound": {"passed": bool(all(bound_ok)), "value": bound_ok},
        "delta_q_decreasing": {"passed": bool(monotone), "value": deltas},
    }
    return summary, gates


def cmd_mesh(args):
    """Generate a disk mesh file or report statistics of an existing one."""
    if args.inspect is not None:
        mesh = read_mesh(args.inspect)
        stats = _mesh_stats(mesh)
        print(json.dumps(stats, indent=2))
        return 0
    if args.level is None:
        raise ConfigError("mesh requires --level N or --inspect PATH")
    if args.level < 0:
        raise ConfigError("--level must be non-negative")
    mesh = disk_mesh(args.level)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"disk_level{args.level}.mesh")
    write_mesh(mesh, path)
    stats = _mesh_stats(mesh)
    stats["path"] = path
    with open(os.path.join(args.out, "mesh_stats.json"), "w", encoding="ascii") as fh:
        json.dump(stats, fh, indent=2)
    print(json.dumps(stats, indent=2))
    return 0


def _mesh_stats(mesh):
    return {
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "edges": mesh.n_edges,
        "boundary_edges": int(mesh.boundary_edge.sum()),
        "mesh_size": mesh.mesh_size(),
        "shape_regularity": mesh.shape_regularity(),
        "area": float(mesh.areas.sum()),
    }


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcurl", description="p-curl finite element laboratory"
    )
    parser.add_argument("--version", action="version", version=f"pcurl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mesh_p = sub.add_parser("mesh", help="generate or inspect disk meshes")
    mesh_p.add_argument("--level", type=int, default=None)
    mesh_p.add_argument("--inspect", default=None, metavar="PATH")
    mesh_p.add_argument("--out", default="pcurl_out")

    for name, help_text in (
        ("verify", "manufactured-solution convergence studies"),
        ("effectivity", "estimator reliability and effectivity studies"),
        ("snapshot", "field and indicator maps at fixed times"),
        ("acloss", "AC loss values and bounds per level"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", default="pcurl_out")
        p.add_argument("--deterministic", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--gate", action="store_true")
    return parser


_COMMANDS = {
    "verify": cmd_verify,
    "effectivity": cmd_effectivity,
    "snapshot": cmd_snapshot,
    "acloss": cmd_acloss,
}


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    for var in ("OMP_NUM_THREADS", "MKL_NUM_THREADS", "OPENBLAS_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        import numba

        numba.set_num_threads(n)
    except (ImportError, ValueError):
        pass


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "mesh":
            return cmd_mesh(args)
        _set_threads(args.threads)
        config = load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        # echo the exact configuration used next to the artifacts
        with open(os.path.join(args.out, "config.ini"), "w", encoding="ascii") as fh:
            fh.write(config.source_text)
        start = time.perf_counter()
        summary, gates = _COMMANDS[args.command](config, args.out, args.deterministic)
        gate_passed = all(g["passed"] for g in gates.values()) if gates else True
        payload = {
            "version": __version__,
            "command": args.command,
            "kind": config.kind,
            "case": {
                "variant": config.variant,
                "a": config.a,
                "b": config.b,
                "p": config.p,
                "alpha": config.alpha,
            },
            "backend": kernels.current(),
            "deterministic": bool(args.deterministic),
            "summary": summary,
            "gates": gates,
            "gate_passed": gate_passed,
        }
        if not args.deterministic:
            payload["wall_time_s"] = time.perf_counter() - start
        with open(os.path.join(args.out, "summary.json"), "w", encoding="ascii") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        for name, gate in gates.items():
            state = "pass" if gate["passed"] else "FAIL"
            print(f"gate {name}: {state}")
        if args.gate and not gate_passed:
            print("gate failure", file=sys.stderr)
            return 4
        return 0
    except (ConfigError, MeshError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonConvergence as exc:
        print(f"solver non-convergence: {exc} (step {exc.step_index})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
