"""``electric-ab`` command-line interface.

Commands: ``tables``, ``sweep``, ``fit``, ``budget``, ``plot`` and
``replay``. Each command that writes files also writes a run manifest
recording the inputs, the seed and the SHA-256 of every output; ``replay``
re-runs a manifest and checks the outputs bit for bit.

Exit codes: 0 success, 1 usage, 2 configuration or input file, 3 numerical
failure (degenerate design, non-convergence, domain errors).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import io as eio
from .analysis import design_matrix, expected_A, fit_sweep, kappa_upper_limit, weighted_lstsq
from .config import LIMITS, config_key, load_config
from .errors import ConfigError, FormatError
from .physics import CouplingParams
from .sim import run_sweep, shot_noise_sigma, sweep_grid
from .systematics import full_budget
from .tables import format_tables, phase_form_table, transit_table

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

PLOT_GRID_POINTS = 1000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class Run:
    """Collects the outputs of one command and writes its manifest."""

    def __init__(self, command, args, config=None):
        self.command = command
        self.args = args
        self.config = config
        self.inputs = {}
        self.outputs = {}
        self.started = _now()

    def input(self, path):
        path = Path(path).resolve()
        self.inputs[str(path)] = sha256_file(path)

    def write(self, path, data):
        path = Path(path)
        eio.atomic_write(path, data)
        self.outputs[path.name] = {"path": str(path.resolve()), "sha256": sha256_file(path)}
        return path

    def manifest(self, path):
        doc = {
            "format": "electric_ab.manifest",
            "toolkit_version": __version__,
            "command": self.command,
            "args": self.args,
            "seed": None if self.config is None else self.config.experiment.seed,
            "config_sha256": None if self.config is None else self.config.digest(),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "started_utc": self.started,
            "finished_utc": _now(),
        }
        eio.atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return Path(path)


def _load(path, seed=None):
    rc = load_config(path)
    return rc if seed is None else rc.with_seed(seed)


# --------------------------------------------------------------------------
# commands


def cmd_tables(args, out=sys.stdout):
    if args["json"]:
        doc = {
            "transit_times": [{"energy_ev": E, "velocity_m_s": v, "transit_time_s": T} for E, v, T in transit_table()],
            "phase_forms": phase_form_table(),
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = format_tables()
    out.write(text)
    if args.get("out"):
        run = Run("tables", args)
        odir = Path(args["out"])
        run.write(odir / ("tables.json" if args["json"] else "tables.txt"), text)
        run.manifest(odir / "tables.manifest.json")
    return EXIT_OK


def cmd_sweep(args, out=sys.stdout):
    rc = _load(args["config"], args.get("seed"))
    try:
        sweep = run_sweep(rc.experiment, rc.coupling)
    except ConfigError as exc:
        raise ConfigError(config_key(exc.field), exc.constraint, exc.value) from None
    odir = Path(args["out"])
    run = Run("sweep", args, rc)
    if args["config"] is not None:
        run.input(args["config"])
    stem = args["name"]
    run.write(odir / f"{stem}.tsv", eio.sweep_table_text(sweep))
    run.write(odir / f"{stem}.json", eio.sweep_to_json(sweep))
    man = run.manifest(odir / f"{stem}.manifest.json")
    out.write(f"wrote {len(sweep)} points to {odir / (stem + '.tsv')} and {odir / (stem + '.json')}\n")
    out.write(f"manifest: {man}\n")
    return EXIT_OK


def cmd_fit(args, out=sys.stdout):
    sweep = eio.read_sweep(args["input"])
    rc = _load(args["config"]) if args.get("config") else None
    basis = args["basis"] or (rc.analysis.basis if rc else "scaled")
    limit = args["limit"] or (rc.analysis.limit if rc else "1sigma")
    e_over_hbar = CouplingParams(**sweep.coupling).e_over_hbar if sweep.coupling else CouplingParams().e_over_hbar

    fixed = args["fix_a"]
    if fixed == "known":
        if sweep.amp is None:
            raise UsageError("--fix-a without a value needs a sweep that records its drive amplitude")
        fixed = expected_A(sweep.omega, sweep.omega_T, sweep.amp, basis, e_over_hbar)
    elif fixed is not None:
        try:
            fixed = float(fixed)
        except ValueError:
            raise UsageError(f"--fix-a expects a number, got {fixed!r}") from None
    fit = fit_sweep(sweep, fixed_a=fixed, basis=basis, e_over_hbar=e_over_hbar)

    table = eio.fit_table(fit)
    if sweep.amp is not None and sweep.amp > 0 and limit != "1sigma":
        table += f"kappa/hbar {limit}% one-sided limit [rad/V]  {kappa_upper_limit(fit, sweep.amp, LIMITS[limit]):.6g}\n"
    odir = Path(args["out"])
    run = Run("fit", args, rc)
    run.input(args["input"])
    if args.get("config"):
        run.input(args["config"])
    stem = args["name"]
    run.write(odir / f"{stem}.json", eio.fit_to_json(fit))
    run.write(odir / f"{stem}.txt", table)
    run.manifest(odir / f"{stem}.manifest.json")
    out.write(table)
    return EXIT_OK


def design_sigma_B(experiment, basis="scaled"):
    """sigma_B the configured sweep would deliver, from its design matrix and shot noise."""
    omega, T = sweep_grid(experiment)
    sigma = np.full(omega.size, shot_noise_sigma(experiment.electrons_per_point, experiment.fringe_visibility))
    X = design_matrix(omega, omega * T, basis)
    _, cov, _ = weighted_lstsq(X, np.zeros(omega.size), sigma)
    return math.sqrt(cov[1, 1])


def budget_report(rc):
    """Error budget at the configured drive frequency, compared against the sweep sensitivity."""
    exp = rc.experiment
    omega = exp.fixed_omega
    b = full_budget(exp.apparatus, exp.beam, rc.coupling, exp.amp, omega)
    sigma_phi = shot_noise_sigma(exp.electrons_per_point, exp.fringe_visibility)
    sensitivity = sigma_phi / math.sqrt(exp.n_points)
    sB = design_sigma_B(exp, rc.analysis.basis)
    centroid_sigma = exp.detector.envelope_sigma / math.sqrt(exp.electrons_per_point)
    rows = [
        ("skin depth", b.skin_depth, "m", None),
        ("quasi-static ratio (2L/c)/period", b.quasi_static_ratio, "", 0.1),
        ("centroid deflection", b.centroid_deflection, "m", centroid_sigma),
    ]
    rows += [
        ("div A phase", b.div_a_phase, "rad", sensitivity),
        ("fringe-field phase", b.fringe_phase, "rad", sensitivity),
        # random per point, so it competes with the per-point error rather than with sigma_B
        ("energy-smear phase (per point)", b.energy_smear_phase, "rad", sigma_phi),
    ]
    return b, rows, {"sigma_phi": sigma_phi, "sensitivity": sensitivity, "sigma_B_design": sB,
                     "centroid_sigma": centroid_sigma, "omega": omega}


def cmd_budget(args, out=sys.stdout):
    rc = _load(args["config"])
    b, rows, ref = budget_report(rc)
    lines = [
        f"Error budget at f = {ref['omega'] / (2 * math.pi):.6g} Hz, dPhi0 = {rc.experiment.amp:g} V",
        f"statistical sensitivity sigma_phi/sqrt(N) = {ref['sensitivity']:.4g} rad "
        f"(sigma_phi = {ref['sigma_phi']:.4g} rad, N = {rc.experiment.n_points})",
        f"design-matrix sigma_B = {ref['sigma_B_design']:.4g} rad",
        "",
        f"{'entry':<34}{'value':>12}  {'unit':<4}{'reference':>12}  status",
    ]
    for name, val, unit, refv in rows:
        if refv is None:
            status, refs = "", ""
        else:
            status, refs = ("ok" if val < refv else "EXCEEDS"), f"{refv:.4g}"
        lines.append(f"{name:<34}{val:>12.4g}  {unit:<4}{refs:>12}  {status}")
    lines.append(f"{'quasi-static regime':<34}{'yes' if b.quasi_static_ok else 'no':>12}")
    text = "\n".join(lines) + "\n"
    out.write(text)
    if args.get("out"):
        run = Run("budget", args, rc)
        if args["config"]:
            run.input(args["config"])
        odir = Path(args["out"])
        run.write(odir / "budget.txt", text)
        run.manifest(odir / "budget.manifest.json")
    return EXIT_OK


def model_zeros(fit, lo, hi):
    """Zero crossings of the fitted model inside ``[lo, hi]``."""
    from scipy.optimize import brentq

    if fit.A_hat == 0.0:
        if fit.B_hat == 0.0:
            return []
        # 1 - cos touches zero at 2 n pi without changing sign
        n = np.arange(math.ceil(lo / (2 * math.pi)), math.floor(hi / (2 * math.pi)) + 1)
        return [float(2 * math.pi * k) for k in n if k > 0]
    grid = np.linspace(lo, hi, 20 * PLOT_GRID_POINTS + 1)
    vals = fit.model(grid)
    zeros = [float(grid[i]) for i in np.nonzero(vals == 0.0)[0]]
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    f = lambda t: float(fit.model(t))  # noqa: E731
    zeros += [brentq(f, grid[i], grid[i + 1], xtol=1e-14) for i in idx]
    return sorted(zeros)


def cmd_plot(args, out=sys.stdout):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sweep = eio.read_sweep(args["sweep"])
    fit = eio.read_fit(args["fit"])
    lo, hi = 0.2 * math.pi, 10.0 * math.pi
    lo, hi = min(lo, float(sweep.omega_T[0])), max(hi, float(sweep.omega_T[-1]))
    grid = np.linspace(lo, hi, PLOT_GRID_POINTS)
    std = fit.A_hat * fit.standard_regressor(grid)
    sca = fit.B_hat * (1.0 - np.cos(grid))
    zeros = model_zeros(fit, lo, hi)

    svg_path = Path(args["out"])
    tsv_path = svg_path.with_suffix(".tsv")

    lines = [
        "# electric_ab plot data v1",
        f"# A_hat_rad: {fit.A_hat!r}",
        f"# B_hat_rad: {fit.B_hat!r}",
        f"# basis: {fit.basis}",
        "# model_zeros_omega_T: " + " ".join(repr(z) for z in zeros),
        "kind\tomega_T\tphase_rad\tphase_sigma_rad\tmodel_rad\tstandard_rad\tscalar_rad",
    ]
    theta = sweep.omega_T
    y = sweep.measured_phase
    if sweep.phase_wrapped:
        from .analysis import _resolve_offset, unwrap_phases

        fixed = None if fit.mode == "A_free" else fit.A_hat
        y = _resolve_offset(unwrap_phases(y), design_matrix(sweep.omega, theta, fit.basis), sweep.phase_sigma, fixed)
    d_std = fit.A_hat * fit.standard_regressor(theta)
    d_sca = fit.B_hat * (1.0 - np.cos(theta))
    for row in zip(theta, y, sweep.phase_sigma, d_std + d_sca, d_std, d_sca):
        lines.append("data\t" + "\t".join(repr(float(v)) for v in row))
    for row in zip(grid, std + sca, std, sca):
        t, m, s, c = (repr(float(v)) for v in row)
        lines.append(f"model\t{t}\tnan\tnan\t{m}\t{s}\t{c}")
    data_text = "\n".join(lines) + "\n"

    plt.rcParams["svg.hashsalt"] = "electric-ab"
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.errorbar(theta / math.pi, y, yerr=sweep.phase_sigma, fmt="o", ms=3, color="black", label="data", zorder=3)
    ax.plot(grid / math.pi, std + sca, color="black", lw=1.2, label="fit")
    ax.plot(grid / math.pi, std, color="tab:blue", lw=1.0, ls="--", label="standard component")
    ax.plot(grid / math.pi, sca, color="tab:red", lw=1.0, ls="--", label="scalar component")
    for z in zeros:
        ax.axvline(z / math.pi, color="0.6", lw=0.6, ls=":")
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel(r"$\omega T / \pi$")
    ax.set_ylabel("phase (rad)")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    import io as _io

    buf = _io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)

    run = Run("plot", args)
    run.input(args["sweep"])
    run.input(args["fit"])
    run.write(svg_path, buf.getvalue())
    run.write(tsv_path, data_text)
    run.manifest(svg_path.with_suffix(".manifest.json"))
    out.write(f"wrote {svg_path} and {tsv_path}\n")
    return EXIT_OK


def _retarget(command, args, new_dir):
    args = dict(args)
    if command == "plot":
        args["out"] = str(Path(new_dir) / Path(args["out"]).name)
    else:
        args["out"] = str(new_dir)
    return args


def cmd_replay(args, out=sys.stdout):
    path = Path(args["manifest"])
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read manifest: {exc}", path=path) from None
    if doc.get("format") != "electric_ab.manifest" or doc.get("command") not in COMMANDS:
        raise FormatError("not an electric_ab run manifest", path=path)
    for p, digest in doc.get("inputs", {}).items():
        if not Path(p).exists() or sha256_file(p) != digest:
            raise FormatError(f"input {p} is missing or has changed since the run", path=path)
    if doc["toolkit_version"] != __version__:
        out.write(f"note: manifest written by version {doc['toolkit_version']}, replaying with {__version__}\n")

    with tempfile.TemporaryDirectory() as tmp:
        target = Path(args["out"]) if args.get("out") else Path(tmp)
        rargs = _retarget(doc["command"], doc["args"], target)
        code = COMMANDS[doc["command"]](rargs, out=_Null())
        if code != EXIT_OK:
            return code
        ok = True
        for name, rec in sorted(doc["outputs"].items()):
            new = target / name
            same = new.exists() and sha256_file(new) == rec["sha256"]
            ok &= same
            out.write(f"{'identical' if same else 'DIFFERS'}  {name}\n")
    out.write("replay reproduced all outputs\n" if ok else "replay found differences\n")
    return EXIT_OK if ok else EXIT_NUMERIC


class _Null:
    def write(self, s):
        pass


COMMANDS = {
    "tables": cmd_tables,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "budget": cmd_budget,
    "plot": cmd_plot,
    "replay": cmd_replay,
}


def build_parser():
    p = _Parser(prog="electric-ab", description="Electric Aharonov-Bohm phase toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("tables", help="transit-time table and zeros/maxima of the pure phase forms")
    s.add_argument("--json", action="store_true", help="machine-readable output")
    s.add_argument("--out", help="also write the table and a manifest into this directory")

    s = sub.add_parser("sweep", help="simulate a frequency sweep")
    s.add_argument("--config", help="TOML config (default: bundled reference config)")
    s.add_argument("--seed", type=int, help="override the config seed")
    s.add_argument("--out", default=".", help="output directory (default: .)")
    s.add_argument("--name", default="sweep", help="output file stem (default: sweep)")

    s = sub.add_parser("fit", help="fit a sweep file")
    s.add_argument("--input", required=True, help="sweep file (.tsv columnar or .json)")
    s.add_argument("--fix-a", nargs="?", const="known", default=None, metavar="VALUE",
                   help="fix A (to VALUE, or to its known value when no VALUE is given) and fit B only")
    s.add_argument("--basis", choices=("scaled", "literal"), help="standard regressor (default: scaled)")
    s.add_argument("--limit", choices=tuple(LIMITS), help="confidence of the reported kappa limit")
    s.add_argument("--config", help="take analysis options from this config")
    s.add_argument("--out", default=".", help="output directory (default: .)")
    s.add_argument("--name", default="fit", help="output file stem (default: fit)")

    s = sub.add_parser("budget", help="systematic error budget for a config")
    s.add_argument("--config", help="TOML config (default: bundled reference config)")
    s.add_argument("--out", help="also write the report and a manifest into this directory")

    s = sub.add_parser("plot", help="plot a sweep with its fit")
    s.add_argument("--sweep", required=True)
    s.add_argument("--fit", required=True)
    s.add_argument("--out", required=True, help="SVG path; the data file is written next to it as .tsv")

    s = sub.add_parser("replay", help="re-run a manifest and compare outputs")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", help="write replayed outputs here instead of a temporary directory")
    return p


def _absolutise(args):
    for k in ("config", "input", "sweep", "fit", "manifest"):
        if args.get(k):
            args[k] = str(Path(args[k]).resolve())
    if args.get("out"):
        args["out"] = str(Path(args["out"]).resolve())
    return args


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help, --version and usage errors
        return exc.code
    args = _absolutise({k: v for k, v in vars(ns).items() if k != "command"})
    try:
        return COMMANDS[ns.command](args, out=out)
    except UsageError as exc:
        print(f"electric-ab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FormatError) as exc:
        print(f"electric-ab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"electric-ab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
