"""Command-line interface.

Every subcommand writes one JSON object

    {"command", "inputs", "outputs", "summary", "residuals", "provenance"}

where ``outputs`` is a list of row objects (one per sweep point), and
optionally a CSV file whose header lists the row keys. Floats are printed with
17 significant digits; non-finite values become ``null``.

Parameters come from flags, then ``key = value`` lines of ``--config``
(keys namespaced by command, e.g. ``gse.m = 9``), then defaults.

Exit codes: 0 success, 2 invalid input or violated precondition, 3 numerical
failure (or a verification command whose residuals exceed tolerance).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import PFError
from .numerics import Quadrature

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 2, 3


class UsageError(Exception):
    """Malformed flag or config value (maps to exit code 2)."""


# -- value parsers ---------------------------------------------------------


def _floats(text: str, sep: str = ":") -> List[float]:
    try:
        return [float(x) for x in text.split(sep)]
    except ValueError:
        raise UsageError(f"cannot parse numbers from {text!r}") from None


def parse_cutoff(text: str, power: float = 0.0, default_norm: float = 1.0):
    """``sharp:<λ>:<Λ>[:norm]`` or ``table:<path>``."""
    from .dispersion import CutoffProfile

    kind, _, rest = text.partition(":")
    if kind == "sharp":
        vals = _floats(rest)
        if len(vals) not in (2, 3):
            raise UsageError("sharp cutoff needs sharp:<lam>:<lam_max>[:norm]")
        norm = vals[2] if len(vals) == 3 else default_norm
        return CutoffProfile.sharp(vals[0], vals[1], 3, norm, power)
    if kind == "table":
        try:
            data = np.loadtxt(rest, ndmin=2)
        except OSError as exc:
            raise UsageError(f"cannot read cutoff table: {exc}") from None
        if data.shape[1] != 2:
            raise UsageError("cutoff table needs two columns r, value")
        return CutoffProfile.tabulated(data[:, 0], data[:, 1])
    raise UsageError(f"unknown cutoff {text!r}")


def parse_well(text: str):
    from .binding import PotentialSpec

    vals = _floats(text)
    if len(vals) != 2:
        raise UsageError("well needs <V0>:<R>")
    return PotentialSpec.well(vals[0], vals[1])


def parse_vector(text: str) -> Tuple[float, ...]:
    return tuple(_floats(text, ","))


def parse_sweep(text: str, geometric: bool) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("sweep needs <start>:<stop>:<count>")
    a, b = _floats(":".join(parts[:2]))
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError("sweep count must be an integer") from None
    if n < 0:
        raise UsageError("sweep count must be >= 0")
    if n == 0:
        return []
    if geometric:
        if a <= 0 or b <= 0:
            raise UsageError("geometric sweep needs positive endpoints")
        return [float(x) for x in np.geomspace(a, b, n)]
    return [float(x) for x in np.linspace(a, b, n)]


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


# -- parameter tables ------------------------------------------------------
# name -> (parser, default, help); defaults are strings so that they echo the
# same way as user input.

Param = Tuple[Callable[[str], Any], Optional[str], str]

COMMON: Dict[str, Param] = {
    "abs_tol": (_float, "1e-12", "quadrature absolute tolerance"),
    "rel_tol": (_float, "1e-10", "quadrature relative tolerance"),
    "max_subdivisions": (_int, "500", "quadrature subdivision limit"),
}

PARAMS: Dict[str, Dict[str, Param]] = {
    "effmass": {
        "cutoff": (str, "sharp:1:2", "cutoff profile"),
        "m": (_float, "1", "bare mass"),
        "alpha": (_float, "1", "coupling"),
        "eps_ph": (_float, "0", "photon mass shift"),
    },
    "dispersion": {
        "cutoff": (str, "sharp:1:2", "cutoff profile"),
        "m": (_float, "1", "bare mass"),
        "alpha": (_float, "1", "coupling"),
        "s": (_float, "2", "spectral point s >= 0"),
        "sweep_s": (str, None, "linear sweep of s"),
    },
    "gse": {
        "cutoff": (str, "sharp:1:2", "cutoff profile"),
        "m": (_float, "1", "bare mass"),
        "alpha": (_float, "1", "coupling"),
        "p": (parse_vector, "0,0,0", "total momentum"),
        "eps_ph": (_float, "0", "photon mass shift"),
        "sweep_lambda_max": (str, None, "geometric sweep of the UV edge"),
    },
    "lattice": {
        "cutoff": (str, "sharp:1:2", "cutoff profile"),
        "m": (_float, "1", "bare mass"),
        "alpha": (_float, "0.25", "coupling"),
        "p": (parse_vector, "1,0,0", "total momentum"),
        "a": (_float, "4", "box scale (spacing 2π/a)"),
        "L": (_float, "1", "momentum radius"),
        "eps_ph": (_float, "0.5", "photon mass shift"),
        "sampling": (str, "point", "point or cell"),
        "cap": (_int, "1500", "largest matrix order"),
    },
    "binding": {
        "well": (str, "1:1", "spherical well V0:R"),
        "cutoff": (str, "sharp:1:2", "cutoff profile"),
        "m": (_float, "0.5", "bare mass"),
        "alpha": (_float, "0.3", "coupling"),
        "eps": (_float, "0.1", "energy offset for m_eps"),
        "grid_size": (_int, "400", "radial Nyström nodes"),
        "sweep_alpha": (str, None, "linear sweep of the coupling"),
    },
    "nelson": {
        "well": (str, "0.6:1", "external spherical well V0:R"),
        "cutoff": (str, "sharp:1:2", "band of ρ; cutoff is ρ/√ω"),
        "m": (_float, "1", "particle mass"),
        "alpha": (_float, "10", "coupling"),
        "kappa_scale": (_float, "1", "scale in the stability margin"),
        "rel_r_max": (_float, "20", "relative-coordinate box"),
        "rel_nodes": (_int, "2000", "relative-coordinate nodes"),
        "cm_r_max": (_float, "20", "centre-of-mass box"),
        "cm_nodes": (_int, "2000", "centre-of-mass nodes"),
        "sweep_alpha": (str, None, "linear sweep of the coupling"),
    },
    "fock-verify": {
        "modes": (_int, "2", "number of modes"),
        "cap": (_int, "10", "particle-number cap"),
        "samples": (_int, "20", "random (f, g) pairs"),
        "seed": (_int, "0", "random seed"),
        "tol": (_float, "1e-8", "pass threshold"),
    },
    "symplectic-verify": {
        "theta": (_float, "0.2", "single-mode squeeze parameter"),
        "cap": (_int, "14", "particle-number cap"),
        "kappa": (_float, "0.5", "rank-one K for the determinant series"),
        "terms": (_int, "20", "determinant series terms"),
        "tol": (_float, "1e-6", "pass threshold"),
    },
}


def read_config(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"config line {n}: expected key = value")
        out[key.strip()] = val.strip()
    return out


def resolve(command: str, flags: Dict[str, Optional[str]], config: Dict[str, str]) -> Dict[str, str]:
    """Merge flags > config > defaults; reject unknown config keys."""
    table = {**PARAMS[command], **COMMON}
    for key in config:
        ns, _, name = key.partition(".")
        if not name:
            raise UsageError(f"config key {key!r} is not namespaced")
        if ns not in PARAMS:
            raise UsageError(f"unknown command namespace in {key!r}")
        if ns == command and name.replace("-", "_") not in table:
            raise UsageError(f"unknown key {key!r}")
    merged: Dict[str, str] = {}
    for name, (_, default, _) in table.items():
        val = flags.get(name)
        if val is None:
            val = config.get(f"{command}.{name}", config.get(f"{command}.{name.replace('_', '-')}"))
        if val is None:
            val = default
        if val is not None:
            merged[name] = val
    return merged


def typed(command: str, raw: Dict[str, str]) -> Dict[str, Any]:
    table = {**PARAMS[command], **COMMON}
    return {k: table[k][0](v) for k, v in raw.items()}


# -- JSON / CSV emitters ---------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    # keep a float marker so whole numbers read back as floats
    return s if any(c in s for c in ".e") else s + ".0"


def _plain(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x


def to_json(obj, indent: int = 0) -> str:
    """JSON text with 17-significant-digit floats; complex values are rejected."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {to_json(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if not math.isfinite(v) else "%.17g" % v
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def to_csv(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    lines = [",".join(columns)]
    for r in rows:
        lines.append(",".join(_csv_cell(r.get(c)) for c in columns))
    return "\n".join(lines) + "\n"


def emit(report: dict, json_path: Optional[str], csv_path: Optional[str],
         columns: Optional[Sequence[str]] = None, stream=None) -> None:
    text = to_json(report) + "\n"
    if json_path is None or json_path == "-":
        (stream or sys.stdout).write(text)
    else:
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(to_csv(report["outputs"], columns))


# -- commands --------------------------------------------------------------
# Each returns (rows, summary, residuals, provenance extras, passed).

Result = Tuple[List[dict], dict, dict, dict, bool]


def _quad(p: Dict[str, Any]) -> Quadrature:
    return Quadrature(p["abs_tol"], p["rel_tol"], p["max_subdivisions"])


def cmd_effmass(p, q) -> Result:
    from .gse import ModelParams, effective_mass, ir_criterion

    cut = parse_cutoff(p["cutoff"])
    prm = ModelParams(m=p["m"], alpha=p["alpha"], eps_ph=p["eps_ph"])
    ir = ir_criterion(cut, q)
    row = {"m_eff": effective_mass(cut, prm, q), "ir_regular": ir["regular"],
           "ir_integral": ir["value"]}
    return [row], {}, {}, {}, True


def cmd_dispersion(p, q) -> Result:
    from .dispersion import d_plus, h_rho, h_rho_sharp

    cut = parse_cutoff(p["cutoff"])
    pts = parse_sweep(p["sweep_s"], False) if "sweep_s" in p else [p["s"]]
    rows, worst = [], 0.0
    closed = cut.kind == "sharp" and cut.power == 0.0 and cut.normalization == 1.0
    for s in pts:
        res = d_plus(cut, p["m"], p["alpha"], s, q)
        hr = h_rho(cut, s, q)
        row = {"s": s, "h_rho": hr, "d_plus_re": res.D_plus.real, "d_plus_im": res.D_plus.imag}
        if closed:
            hc = h_rho_sharp(cut.lam, cut.lam_max, s)
            row["h_rho_closed"] = hc
            if math.isfinite(hc) and hc != 0.0:
                worst = max(worst, abs(hr - hc) / abs(hc))
        rows.append(row)
    resid = {"h_rho_max_rel": worst} if closed else {}
    return rows, {}, resid, {}, True


def cmd_gse(p, q) -> Result:
    from .gse import ModelParams, energy_breakdown, g_asymptotics, ground_energy

    cut = parse_cutoff(p["cutoff"])
    prm = ModelParams(m=p["m"], alpha=p["alpha"], p=p["p"], eps_ph=p["eps_ph"])
    if "sweep_lambda_max" not in p:
        eb = energy_breakdown(cut, prm, q)
        return [{"m_eff": eb.m_eff, "g": eb.g, "E_p": eb.E_p}], {}, {}, {}, True
    grid = parse_sweep(p["sweep_lambda_max"], True)
    plain = (cut.kind == "sharp" and cut.power == 0.0 and cut.normalization == 1.0
             and p["alpha"] == 1.0 and p["eps_ph"] == 0.0)
    if plain:
        res = g_asymptotics(cut.lam, p["m"], grid, q=q)
        rows = [{"lambda_max": L, "g": g, "g_over_lambda_max_3_2": r}
                for L, g, r in zip(res["lam_max"], res["g"], res["ratios"])]
        summary = {"band_lower": res["lower"], "band_upper": res["upper"],
                   "within_band": res["within_band"]}
        return rows, summary, {}, {}, True
    rows = []
    for L in grid:
        g = ground_energy(cut.with_band(cut.lam, L), prm, q)
        rows.append({"lambda_max": L, "g": g, "g_over_lambda_max_3_2": g / L ** 1.5})
    return rows, {}, {}, {}, True


def cmd_lattice(p, q) -> Result:
    from .lattice import LatticeConfig, build, energy_closed, energy_eigen

    cut = parse_cutoff(p["cutoff"])
    if p["sampling"] not in ("point", "cell"):
        raise UsageError("sampling must be point or cell")
    cfg = LatticeConfig(p["a"], p["L"], p["eps_ph"], cap=p["cap"])
    M = build(cut, p["m"], p["alpha"], p["p"], cfg, p["sampling"])
    ee = energy_eigen(M)
    ec = energy_closed(M, q)
    row = {"dimension": M.dim, "energy_eigen": ee, "energy_closed": ec}
    resid = {"closed_vs_eigen": abs(ec - ee)}
    return [row], {}, resid, {"matrix_order": M.dim}, True


def cmd_binding(p, q) -> Result:
    from .binding import bs_kernel, coupling_window, critical_mass, lieb_bound

    V = parse_well(p["well"])
    cut = parse_cutoff(p["cutoff"])
    n = p["grid_size"]
    alphas = parse_sweep(p["sweep_alpha"], False) if "sweep_alpha" in p else [p["alpha"]]
    rows = [dict(coupling_window(cut, V, p["m"], p["eps"], a, n, q).as_dict(), alpha=a)
            for a in alphas]
    cm = critical_mass(V, 0.0, n)
    energies = [float(x) for x in -np.geomspace(10.0, 1e-2, 10)]
    norms = [bs_kernel(V, E, n).norm() for E in energies]
    summary = {"m_c_extrapolated": cm["m_c_extrapolated"], "lieb_bound": lieb_bound(V, q),
               "kernel_energies": energies, "kernel_norms": norms,
               "norms_monotone": all(b >= a for a, b in zip(norms, norms[1:]))}
    return rows, summary, {}, {"grid_size": n}, True


def cmd_nelson(p, q) -> Result:
    from .nelson import NELSON_NORM, NelsonConfig, RadialGrid, alpha_sweep, stability_check

    V = parse_well(p["well"])
    cut = parse_cutoff(p["cutoff"], power=-0.5, default_norm=NELSON_NORM)
    rel = RadialGrid(p["rel_r_max"], p["rel_nodes"])
    cm = RadialGrid(p["cm_r_max"], p["cm_nodes"])
    cfg = NelsonConfig.identical(2, p["m"], p["alpha"], cut, V)
    keys = ("Xi_V", "E_V", "delta_p", "kappa_ok", "margin", "E_rel", "E_single", "E_cm",
            "variational_gap")
    if "sweep_alpha" in p:
        alphas = parse_sweep(p["sweep_alpha"], False)
        if len(alphas) < 2:
            return [], {"alpha_c": None}, {}, {}, True
        sw = alpha_sweep(cfg, alphas, p["kappa_scale"], rel, cm, q=q)
        rows = [dict({"alpha": a}, **{k: r[k] for k in keys}) for a, r in zip(alphas, sw["rows"])]
        summary = {"alpha_c": sw["alpha_c"], "bracket": sw["bracket"],
                   "W0": sw["rows"][0]["W0"]}
        return rows, summary, {}, {}, True
    r = stability_check(cfg, p["kappa_scale"], rel, cm, q)
    row = dict({"alpha": p["alpha"]}, **{k: r[k] for k in keys})
    return [row], {"W0": r["W0"], "G": r["G"]}, {}, {}, True


def cmd_fock_verify(p, q) -> Result:
    from .fock import FockSpace, ladder, vacuum_moment, wick_power

    sp = FockSpace(p["modes"], p["cap"])
    rng = np.random.default_rng(p["seed"])
    idx = sp.sector(sp.cap - 1)
    ccr = 0.0
    for _ in range(p["samples"]):
        f = rng.normal(size=sp.modes) + 1j * rng.normal(size=sp.modes)
        g = rng.normal(size=sp.modes) + 1j * rng.normal(size=sp.modes)
        C = ladder(sp, f, "annihilate").commutator(ladder(sp, g, "create")).matrix
        C = C - np.sum(f * g) * np.eye(sp.dim)
        ccr = max(ccr, float(np.abs(C[np.ix_(idx, idx)]).max()))
    f = np.zeros(sp.modes)
    f[0] = 1.0
    vm = abs(vacuum_moment(sp, f, 1j) - math.exp(-0.25))
    top = min(4, sp.cap)
    om = sp.vacuum()
    states = [wick_power(sp, f, n).matrix @ om for n in range(top + 1)]
    wick = 0.0
    for i, u in enumerate(states):
        for j, v in enumerate(states):
            want = math.factorial(i) * 0.5 ** i if i == j else 0.0
            wick = max(wick, abs(np.vdot(u, v) - want))
    resid = {"ccr": ccr, "vacuum_moment": vm, "wick_overlap": wick}
    ok = all(v <= p["tol"] for v in resid.values())
    return [dict(resid)], {"passed": ok}, resid, {"seed": p["seed"], "dimension": sp.dim}, ok


def cmd_symplectic_verify(p, q) -> Result:
    from .fock import FockSpace
    from .symplectic import SymplecticPair, det_series, intertwine_check, intertwiner

    pair = SymplecticPair.squeeze(p["theta"])
    sp = FockSpace(1, p["cap"])
    it = intertwiner(sp, pair)
    U = it["U"]
    vac = abs(U.matrix[0, 0] - it["det_factor"])
    sub = intertwine_check(sp, pair, [1.0], U=U, sector="subcap")
    full = intertwine_check(sp, pair, [1.0], U=U, sector="full")
    ds = det_series(np.array([[p["kappa"]]]), 1.0, p["terms"])
    resid = {"vacuum_overlap": vac, "intertwine_subcap": sub, "intertwine_full": full,
             "det_series": ds["residuals"][-1]}
    ok = vac <= p["tol"] and sub <= p["tol"] and ds["residuals"][-1] <= p["tol"]
    row = {"det_factor": it["det_factor"], "series_tail": it["tail"], **resid}
    return [row], {"passed": ok}, resid, {"dimension": sp.dim}, ok


COMMANDS: Dict[str, Callable[[Dict[str, Any], Quadrature], Result]] = {
    "effmass": cmd_effmass,
    "dispersion": cmd_dispersion,
    "gse": cmd_gse,
    "lattice": cmd_lattice,
    "binding": cmd_binding,
    "nelson": cmd_nelson,
    "fock-verify": cmd_fock_verify,
    "symplectic-verify": cmd_symplectic_verify,
}


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pfnelson", description="Spectral quantities of the "
                                 "dipole Pauli-Fierz and Nelson models.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, table in PARAMS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file")
        sp.add_argument("--json", dest="json_path", help="JSON output path (default stdout)")
        sp.add_argument("--csv", dest="csv_path", help="CSV output path")
        for key, (_, default, helptext) in {**table, **COMMON}.items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, default=None,
                            help=f"{helptext} (default {default})" if default else helptext)
    return ap


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        with contextlib.redirect_stderr(stderr):
            ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    command = ns.command
    try:
        config = read_config(ns.config) if ns.config else {}
        flags = {k: getattr(ns, k) for k in {**PARAMS[command], **COMMON}}
        raw = resolve(command, flags, config)
        params = typed(command, raw)
        q = _quad(params)
        rows, summary, resid, prov, ok = COMMANDS[command](params, q)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PRECONDITION
    except PFError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=stderr)
        return EXIT_NUMERICAL if exc.kind == "numerical" else EXIT_PRECONDITION
    provenance = {"version": __version__,
                  "tolerances": {"abs_tol": q.abs_tol, "rel_tol": q.rel_tol,
                                 "max_subdivisions": q.max_subdivisions}}
    provenance.update(prov)
    report = {"command": command, "inputs": raw, "outputs": rows, "summary": summary,
              "residuals": resid, "provenance": provenance}
    try:
        emit(report, ns.json_path, ns.csv_path, stream=stdout)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return EXIT_PRECONDITION
    return EXIT_OK if ok else EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
