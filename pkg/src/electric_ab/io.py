"""Text and JSON formats for sweeps, fits and detector images.

Columnar sweep format (tab separated)::

    # electric_ab sweep v1
    # provenance: synthetic
    # amp_v: 0.001
    # phase_wrapped: false
    omega_rad_s  omega_T  phase_rad  phase_sigma_rad  centroid_m  centroid_sigma_m
    1.2e9 ...

Lines starting with ``#`` are metadata (``key: value``) or comments; the
first non-comment line is the column header. Floats are written with
``repr`` so that files round-trip exactly.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .analysis import FitResult
from .detector import DetectorImage
from .errors import DomainError, FormatError
from .sim import SweepResult

__all__ = [
    "atomic_write",
    "write_sweep_table",
    "read_sweep_table",
    "sweep_to_json",
    "sweep_from_json",
    "write_sweep_json",
    "read_sweep_json",
    "read_sweep",
    "fit_to_json",
    "fit_from_json",
    "fit_table",
    "write_image",
    "read_image",
]

SWEEP_COLUMNS = ("omega_rad_s", "omega_T", "phase_rad", "phase_sigma_rad", "centroid_m", "centroid_sigma_m")
_SWEEP_ATTRS = ("omega", "omega_T", "measured_phase", "phase_sigma", "centroid", "centroid_sigma")
IMAGE_COLUMNS = ("bin_center_m", "count")


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _f(x):
    return repr(float(x))


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite_or_none(obj)
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# sweeps


def sweep_table_text(sweep):
    lines = ["# electric_ab sweep v1", f"# provenance: {sweep.provenance}"]
    if sweep.amp is not None:
        lines.append(f"# amp_v: {_f(sweep.amp)}")
    lines.append(f"# phase_wrapped: {'true' if sweep.phase_wrapped else 'false'}")
    if sweep.A_true is not None:
        lines.append(f"# A_true_rad: {_f(sweep.A_true)}")
    if sweep.B_true is not None:
        lines.append(f"# B_true_rad: {_f(sweep.B_true)}")
    lines.append("\t".join(SWEEP_COLUMNS))
    cols = [getattr(sweep, a) for a in _SWEEP_ATTRS]
    for row in zip(*cols):
        lines.append("\t".join(_f(v) for v in row))
    return "\n".join(lines) + "\n"


def write_sweep_table(sweep, path):
    atomic_write(path, sweep_table_text(sweep))


def _parse_bool(s, lineno, path):
    s = s.strip().lower()
    if s in ("true", "1", "yes"):
        return True
    if s in ("false", "0", "no"):
        return False
    raise FormatError(f"expected true/false, got {s!r}", lineno, path)


def read_sweep_table(path):
    """Parse the columnar sweep format. Files without metadata import as ``imported``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read sweep file: {exc}", path=path) from exc
    meta = {}
    header = None
    rows = []
    row_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                meta[k.strip()] = (v.strip(), lineno)
            continue
        fields = line.split()
        if header is None:
            if tuple(fields) != SWEEP_COLUMNS:
                raise FormatError(f"expected column header {' '.join(SWEEP_COLUMNS)!r}, got {line!r}", lineno, path)
            header = fields
            continue
        if len(fields) != len(SWEEP_COLUMNS):
            raise FormatError(f"expected {len(SWEEP_COLUMNS)} columns, got {len(fields)}", lineno, path)
        try:
            rows.append([float(x) for x in fields])
        except ValueError as exc:
            raise FormatError(f"non-numeric value: {exc}", lineno, path) from None
        row_lines.append(lineno)
    if header is None:
        raise FormatError("missing column header", None, path)
    if not rows:
        raise FormatError("no data rows", None, path)
    data = np.array(rows)
    theta = data[:, 1]
    bad = np.nonzero(np.diff(theta) <= 0)[0]
    if bad.size:
        raise FormatError("omega_T must be strictly increasing", row_lines[bad[0] + 1], path)
    bad = np.nonzero(~(data[:, 3] > 0))[0]
    if bad.size:
        raise FormatError("phase_sigma_rad must be positive", row_lines[bad[0]], path)

    def num(key):
        if key not in meta:
            return None
        v, ln = meta[key]
        try:
            return float(v)
        except ValueError:
            raise FormatError(f"{key} must be a number, got {v!r}", ln, path) from None

    prov = meta.get("provenance", ("imported", None))[0]
    if prov not in ("synthetic", "imported"):
        raise FormatError(f"unknown provenance {prov!r}", meta["provenance"][1], path)
    wrapped = False
    if "phase_wrapped" in meta:
        wrapped = _parse_bool(meta["phase_wrapped"][0], meta["phase_wrapped"][1], path)
    return SweepResult(
        *data.T,
        amp=num("amp_v"),
        provenance=prov,
        phase_wrapped=wrapped,
        A_true=num("A_true_rad"),
        B_true=num("B_true_rad"),
    )


def sweep_to_json(sweep):
    doc = {
        "format": "electric_ab.sweep",
        "version": 1,
        "provenance": sweep.provenance,
        "amp_v": sweep.amp,
        "phase_wrapped": sweep.phase_wrapped,
        "truth": None if sweep.A_true is None else {"A_rad": sweep.A_true, "B_rad": sweep.B_true},
        "config": sweep.config,
        "coupling": sweep.coupling,
        "points": {col: getattr(sweep, a) for col, a in zip(SWEEP_COLUMNS, _SWEEP_ATTRS)},
    }
    return dumps(doc)


def sweep_from_json(text, path=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if doc.get("format") != "electric_ab.sweep":
        raise FormatError("not an electric_ab sweep document", None, path)
    try:
        pts = doc["points"]
        cols = [np.asarray(pts[c], dtype=float) for c in SWEEP_COLUMNS]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed points block: {exc}", None, path) from None
    truth = doc.get("truth") or {}
    try:
        return SweepResult(
            *cols,
            amp=doc.get("amp_v"),
            provenance=doc.get("provenance", "imported"),
            phase_wrapped=bool(doc.get("phase_wrapped", False)),
            A_true=truth.get("A_rad"),
            B_true=truth.get("B_rad"),
            config=doc.get("config"),
            coupling=doc.get("coupling"),
        )
    except DomainError as exc:
        raise FormatError(str(exc), None, path) from None


def write_sweep_json(sweep, path):
    atomic_write(path, sweep_to_json(sweep))


def _read_text(path, what):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read {what}: {exc}", path=path) from None


def read_sweep_json(path):
    path = Path(path)
    return sweep_from_json(_read_text(path, "sweep file"), path)


def read_sweep(path):
    """Read either sweep format, chosen by the ``.json`` suffix."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return read_sweep_json(path)
    return read_sweep_table(path)


# --------------------------------------------------------------------------
# fits


def fit_to_json(fit):
    doc = {"format": "electric_ab.fit", "version": 1}
    doc.update(fit.to_dict())
    return dumps(doc)


_NULLABLE = {"amp", "omega_fixed"}


def fit_from_json(text, path=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if doc.pop("format", None) != "electric_ab.fit":
        raise FormatError("not an electric_ab fit document", None, path)
    doc.pop("version", None)
    for k, v in doc.items():
        if v is None and k not in _NULLABLE:
            doc[k] = math.nan
    try:
        return FitResult.from_dict(doc)
    except TypeError as exc:
        raise FormatError(f"malformed fit document: {exc}", None, path) from None


def read_fit(path):
    path = Path(path)
    return fit_from_json(_read_text(path, "fit file"), path)


def fit_table(fit):
    """Human-readable summary of a fit."""

    def g(x, fmt=".6g"):
        return "n/a" if x is None or (isinstance(x, float) and not math.isfinite(x)) else format(x, fmt)

    zero, zero_sigma = fit.first_zero, fit.first_zero_sigma
    rows = [
        ("mode", fit.mode),
        ("basis", fit.basis),
        ("points", str(fit.n_points)),
        ("A_hat [rad]", f"{g(fit.A_hat)} ± {g(math.sqrt(fit.covariance[0, 0]))}"),
        ("B_hat [rad]", f"{g(fit.B_hat)} ± {g(math.sqrt(fit.covariance[1, 1]))}"),
        ("cov(A,B) [rad^2]", g(fit.covariance[0, 1])),
        ("chi2 / dof", f"{g(fit.chi2, '.4f')} / {fit.dof}"),
        ("A_expected [rad]", g(fit.A_expected)),
        ("A pull", g(fit.A_pull, ".3f")),
        ("B significance", g(fit.B_significance, ".3f")),
        ("kappa/hbar 1-sigma limit [rad/V]", g(fit.kappa_limit_1sigma)),
        ("first zero [omega T / pi]", f"{g(zero / math.pi, '.6f')} ± {g(zero_sigma / math.pi, '.2g')}"),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


# --------------------------------------------------------------------------
# detector images


def image_text(image):
    lines = [
        "# electric_ab detector image v1",
        f"# fringe_period_m: {_f(image.fringe_period)}",
        f"# visibility: {_f(image.visibility)}",
        f"# envelope_sigma_m: {_f(image.envelope_sigma)}",
        f"# electrons: {_f(image.electrons)}",
    ]
    if image.truth_phase is not None:
        lines.append(f"# truth_phase_rad: {_f(image.truth_phase)}")
    if image.shift is not None:
        lines.append(f"# shift_m: {_f(image.shift)}")
    lines.append("\t".join(IMAGE_COLUMNS))
    for x, n in zip(image.bin_centers, image.counts):
        lines.append(f"{_f(x)}\t{int(n)}")
    return "\n".join(lines) + "\n"


def write_image(image, path):
    atomic_write(path, image_text(image))


def read_image(path):
    path = Path(path)
    meta = {}
    xs, ns = [], []
    header = False
    for lineno, raw in enumerate(_read_text(path, "image file").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                try:
                    meta[k.strip()] = float(v)
                except ValueError:
                    raise FormatError(f"{k.strip()} must be a number", lineno, path) from None
            continue
        fields = line.split()
        if not header:
            if tuple(fields) != IMAGE_COLUMNS:
                raise FormatError(f"expected header {' '.join(IMAGE_COLUMNS)!r}", lineno, path)
            header = True
            continue
        if len(fields) != 2:
            raise FormatError(f"expected 2 columns, got {len(fields)}", lineno, path)
        try:
            x = float(fields[0])
            n = int(fields[1])
        except ValueError:
            raise FormatError("expected a float bin centre and an integer count", lineno, path) from None
        if n < 0:
            raise FormatError("counts must be non-negative", lineno, path)
        xs.append(x)
        ns.append(n)
    for key in ("fringe_period_m", "visibility", "envelope_sigma_m", "electrons"):
        if key not in meta:
            raise FormatError(f"missing metadata {key!r}", None, path)
    return DetectorImage(
        bin_centers=np.array(xs),
        counts=np.array(ns, dtype=np.int64),
        fringe_period=meta["fringe_period_m"],
        visibility=meta["visibility"],
        envelope_sigma=meta["envelope_sigma_m"],
        electrons=meta["electrons"],
        truth_phase=meta.get("truth_phase_rad"),
        shift=meta.get("shift_m"),
    )
