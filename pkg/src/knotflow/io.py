"""File formats: curve files, run configs, frames, diagnostics CSV, field CSV, manifests."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import re
from pathlib import Path

import numpy as np

from .curves import ClosedCurve, generate
from .diagnostics import DiagnosticsRecord, pinned_path
from .energy import EnergyParams, m_alpha
from .errors import ConfigError
from .flow import FlowConfig
from .fractional import q_symbols

CURVE_FIELDS = ("d", "N", "points")


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _load_json(text: str, what: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed {what}: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError(f"{what} must be a JSON object", 1)
    return data


def _reject_unknown(data: dict, allowed, text: str, what: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown field {key!r} in {what}", _line_of(text, key))


# --- curve files -----------------------------------------------------------

def curve_to_dict(curve: ClosedCurve) -> dict:
    return {"d": curve.d, "N": curve.N, "points": curve.samples.tolist()}


def write_curve(path: str | Path, curve: ClosedCurve) -> None:
    Path(path).write_text(json.dumps(curve_to_dict(curve)) + "\n")


def parse_curve(text: str) -> ClosedCurve:
    """Parse ``{"d": int, "N": int, "points": N x d}``; any other field is an error."""
    data = _load_json(text, "curve file")
    _reject_unknown(data, CURVE_FIELDS, text, "curve file")
    for key in CURVE_FIELDS:
        if key not in data:
            raise ConfigError(f"curve file lacks field {key!r}", 1)
    d, n, pts = data["d"], data["N"], data["points"]
    if not isinstance(d, int) or not isinstance(n, int):
        raise ConfigError("d and N must be integers", _line_of(text, "d"))
    try:
        arr = np.asarray(pts, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("points must be a numeric N x d array", _line_of(text, "points")) from None
    if arr.shape != (n, d):
        raise ConfigError(f"points has shape {arr.shape}, expected ({n}, {d})", _line_of(text, "points"))
    try:
        return ClosedCurve(arr)
    except ValueError as exc:
        raise ConfigError(str(exc), _line_of(text, "points")) from None


def read_curve(path: str | Path) -> ClosedCurve:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read curve file {path}: {exc.strerror}") from None
    return parse_curve(text)


# --- run configuration -----------------------------------------------------

_CURVE_SPEC_FIELDS = ("kind", "params", "file")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a flow run needs; JSON keys match the field names."""

    alpha: float = 2.5
    lam: float = 0.1
    N: int = 256
    integrator: str = "imex"
    dt0: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 50.0
    reparam_interval: int = 10
    tol: float = 1e-6
    t_max: float = 1e5
    max_steps: int = 20_000
    frame_stride: int = 10
    diagnostics_stride: int = 1
    seed: int = 0
    curve: dict = dataclasses.field(default_factory=lambda: {"kind": "circle", "params": {"r": 1.0}})
    sweep: dict = dataclasses.field(default_factory=dict)

    def energy_params(self) -> EnergyParams:
        return EnergyParams(self.alpha, self.lam)

    def flow_config(self) -> FlowConfig:
        return FlowConfig(
            params=self.energy_params(),
            integrator=self.integrator,
            dt0=self.dt0,
            dt_min=self.dt_min,
            dt_max=self.dt_max,
            reparam_interval=self.reparam_interval,
            tol=self.tol,
            t_max=self.t_max,
            max_steps=self.max_steps,
            frame_stride=self.frame_stride,
            diagnostics_stride=self.diagnostics_stride,
        )

    def initial_curve(self, base: Path | None = None) -> ClosedCurve:
        spec = self.curve
        if "file" in spec:
            p = Path(spec["file"])
            if base is not None and not p.is_absolute():
                p = base / p
            c = read_curve(p)
            if c.N != self.N:
                raise ConfigError(f"curve file has N={c.N} but config N={self.N}")
            return c
        params = dict(spec.get("params", {}))
        if spec["kind"] == "fourier_perturbed_circle":
            params.setdefault("seed", self.seed)
        try:
            return generate(spec["kind"], params, self.N)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad curve spec: {exc}") from None

    def echo(self) -> dict:
        return dataclasses.asdict(self)


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_FIELDS = ("N", "reparam_interval", "max_steps", "frame_stride", "diagnostics_stride", "seed")


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Validate a JSON run config fully; raises ConfigError (with a line number when known)."""
    data = _load_json(text, "config")
    _reject_unknown(data, _CONFIG_FIELDS, text, "config")
    for key, val in data.items():
        ln = _line_of(text, key)
        if key in _INT_FIELDS:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{key} must be an integer", ln)
        elif key in ("curve", "sweep"):
            if not isinstance(val, dict):
                raise ConfigError(f"{key} must be an object", ln)
        elif key == "integrator":
            if val not in ("imex", "explicit"):
                raise ConfigError("integrator must be 'imex' or 'explicit'", ln)
        elif isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{key} must be a number", ln)
    if "curve" in data:
        spec = data["curve"]
        _reject_unknown(spec, _CURVE_SPEC_FIELDS, text, "curve spec")
        if ("kind" in spec) == ("file" in spec):
            raise ConfigError("curve spec needs exactly one of 'kind' or 'file'", _line_of(text, "curve"))
    if "sweep" in data:
        for key, vals in data["sweep"].items():
            if key not in ("alpha", "lam", "N", "seed") or not isinstance(vals, list) or not vals:
                raise ConfigError(f"sweep axis {key!r} must be one of alpha/lam/N/seed with a non-empty list",
                                  _line_of(text, key))
    data.update(overrides or {})
    cfg = RunConfig(**data)
    try:
        cfg.flow_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.N < 16 or cfg.N % 2:
        raise ConfigError("N must be even and >= 16", _line_of(text, "N"))
    return cfg


def read_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides)


def run_id(config: RunConfig) -> str:
    """Deterministic id: hash of the canonical config echo."""
    blob = json.dumps(config.echo(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# --- run outputs -----------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_diagnostics_csv(path: str | Path, records: list[DiagnosticsRecord], rid: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run_id"] + DiagnosticsRecord.columns())
        for r in records:
            w.writerow([rid] + [_fmt(v) for v in r.row()])


def read_diagnostics_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in DiagnosticsRecord.columns()}


def write_frames(path: str | Path, frames, rid: str) -> None:
    with open(path, "w") as fh:
        for t, pts, res in frames:
            rec = {"run_id": rid, "t": float(t), "residual": float(res), "N": int(pts.shape[0]), "points": pts.tolist()}
            fh.write(json.dumps(rec) + "\n")


def read_frames(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_field_csv(path: str | Path, fields: dict[str, np.ndarray], rid: str | None = None) -> None:
    """One row per sample; columns ``name_j`` for each vector component."""
    names = list(fields)
    n = next(iter(fields.values())).shape[0]
    header, cols = ["i"], []
    for name in names:
        a = np.asarray(fields[name], dtype=float)
        a = a[:, None] if a.ndim == 1 else a
        if a.shape[0] != n:
            raise ValueError("all fields need the same sample count")
        header += [f"{name}_{j}" for j in range(a.shape[1])]
        cols.append(a)
    table = np.hstack(cols)
    with open(path, "w", newline="") as fh:
        if rid is not None:
            fh.write(f"# run_id={rid}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(table):
            w.writerow([i] + [_fmt(v) for v in row])


def read_field_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
    out: dict[str, list[int]] = {}
    for j, name in enumerate(header[1:], start=1):
        base = name.rsplit("_", 1)[0]
        out.setdefault(base, []).append(j)
    return {k: body[:, idx] for k, idx in out.items()}


def fixture_hashes(alpha: float, N: int, pinned: str | Path | None = None) -> dict:
    p = Path(pinned) if pinned else pinned_path()
    return {
        "pinned_json_sha256": hashlib.sha256(p.read_bytes()).hexdigest(),
        "m_alpha": m_alpha(alpha),
        "m_alpha_sha256": hashlib.sha256(np.float64(m_alpha(alpha)).tobytes()).hexdigest(),
        "symbol_table_sha256": hashlib.sha256(q_symbols(N, alpha).tobytes()).hexdigest(),
    }


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
