"""Command-line front end: Wigner scans, state preparation and regime checks.

Examples::

    cqedwigner scan --preset set2 --state cat:2,- --line -4:4:0.2 --engine exact --out results.csv
    cqedwigner prepare --kind fock1 --preset set2
    cqedwigner validate --preset set1 --state cat:2,- --alpha 3

Scan settings may also come from a ``key = value`` file (``--config``);
command-line flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dynamics import Engine, SystemParams
from .presets import PRESETS, get_preset
from .protocol import ProtocolParams, measure_wigner_point, to_ns, validate_regime
from .states import cat, coherent, fock, prepare_cat, prepare_coherent, prepare_fock_one, wigner_direct

logger = logging.getLogger(__name__)

WORKERS_ENV = "CQEDWIGNER_WORKERS"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

CSV_COLUMNS = [
    "point_re", "point_im", "w_est", "w_oracle", "abs_err",
    "p_e", "p_g", "tail_population", "flag_unreliable", "duration_ns",
]

CONFIG_KEYS = {
    "preset", "state", "line", "grid2d", "engine", "basis", "n_fock", "out", "json",
    "workers", "delta", "g", "eps_d", "m", "eps_half", "phi1", "phi2",
}


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return "%.17g" % x


# --- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class LineGrid:
    x_min: float
    x_max: float
    step: float

    def points(self) -> list[complex]:
        if self.x_max < self.x_min:
            return []
        count = int(math.floor((self.x_max - self.x_min) / self.step + 1e-9)) + 1
        return [complex(round(self.x_min + k * self.step, 12), 0.0) for k in range(count)]


@dataclass(frozen=True)
class Grid2D:
    re: LineGrid
    im: LineGrid

    def points(self) -> list[complex]:
        return [complex(x.real, y.real) for y in self.im.points() for x in self.re.points()]


@dataclass(frozen=True)
class ScanConfig:
    preset: str = "set2"
    state: str = "vacuum"
    grid: LineGrid | Grid2D | None = None
    engine: Engine = Engine.EXACT
    basis: str = "dressed"
    n_fock: int = 128
    out: str | None = None
    json_out: str | None = None
    workers: int = 1
    delta: float | None = None
    g: float | None = None
    eps_d: float | None = None
    m: int | None = None
    eps_half: float | None = None
    phi1: float = math.pi / 2
    phi2: float = 0.0

    def protocol(self) -> ProtocolParams:
        if self.preset == "custom":
            missing = [k for k in ("delta", "g", "eps_d") if getattr(self, k) is None]
            if self.m is None and self.eps_half is None:
                missing.append("m or eps_half")
            if missing:
                raise ConfigError(f"custom preset needs {', '.join(missing)}")
            return ProtocolParams(
                SystemParams(self.delta, self.g), self.eps_d, m=self.m,
                eps_half_mag=None if self.m else self.eps_half,
                phi1=self.phi1, phi2=self.phi2, n_fock=self.n_fock,
            )
        base = get_preset(self.preset)
        overrides = {k: v for k, v in (("delta", self.delta), ("g", self.g),
                                       ("eps_D", self.eps_d), ("m", self.m)) if v is not None}
        if overrides:
            base = replace(base, **overrides)
        return base.protocol(n_fock=self.n_fock, phi1=self.phi1, phi2=self.phi2)


def parse_range(text: str) -> LineGrid:
    try:
        x_min, x_max, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"range {text!r} must be x_min:x_max:step") from None
    if not step > 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    return LineGrid(x_min, x_max, step)


def parse_grid2d(text: str) -> Grid2D:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"grid2d {text!r} must be re_min:re_max:re_step,im_min:im_max:im_step")
    return Grid2D(parse_range(parts[0]), parse_range(parts[1]))


def parse_state(text: str, n_fock: int) -> tuple[np.ndarray, str]:
    """Field ket for ``vacuum``, ``fock:n``, ``coherent:re,im`` or ``cat:alpha0,sign``."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "vacuum" and not arg:
            return fock(0, n_fock), text
        if kind == "fock":
            return fock(int(arg), n_fock), text
        if kind == "coherent":
            re, _, im = arg.partition(",")
            return coherent(complex(float(re), float(im or 0.0)), n_fock), text
        if kind == "cat":
            amp, _, sign = arg.partition(",")
            return cat(complex(amp), 0.0, sign or "-", n_fock), text
    except ValueError as exc:
        raise ConfigError(f"bad state {text!r}: {exc}") from None
    raise ConfigError(f"unknown state {text!r}")


def _convert(key: str, value: str, where: str):
    try:
        if key in ("n_fock", "workers", "m"):
            return int(value)
        if key in ("delta", "g", "eps_d", "eps_half", "phi1", "phi2"):
            return float(value)
        if key == "engine":
            return Engine.parse(value)
        if key == "line":
            return parse_range(value)
        if key == "grid2d":
            return parse_grid2d(value)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    if key == "basis" and value not in ("dressed", "bare"):
        raise ConfigError(f"{where}: basis must be 'dressed' or 'bare'")
    return value


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        where = f"{path}:{lineno}"
        if not sep:
            raise ConfigError(f"{where}: expected key = value")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        values[key] = _convert(key, value.strip(), where)
    return values


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer") from None


def load_config(path: str | None = None, **flags) -> ScanConfig:
    """Resolve a scan configuration from an optional file plus flag overrides."""
    values = read_config_file(path) if path else {}
    for key, value in flags.items():
        if value is None:
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown option {key!r}")
        values[key] = _convert(key, value, f"--{key.replace('_', '-')}") if isinstance(value, str) else value
    if "line" in values and "grid2d" in values:
        raise ConfigError("give either line or grid2d, not both")
    grid = values.pop("line", None) or values.pop("grid2d", None)
    if grid is None:
        raise ConfigError("no grid given (use line = x_min:x_max:step or grid2d)")
    preset = values.get("preset", "set2")
    if preset != "custom" and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)} or custom")
    values.setdefault("workers", default_workers())
    if values["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    values["json_out"] = values.pop("json", None)
    cfg = ScanConfig(grid=grid, **values)
    try:
        cfg.protocol()
        parse_state(cfg.state, cfg.n_fock)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


# --- scanning ----------------------------------------------------------------

@dataclass
class ScanRow:
    point_re: float
    point_im: float
    w_est: float
    w_oracle: float
    abs_err: float
    p_e: float
    p_g: float
    tail_population: float
    flag_unreliable: bool
    duration_ns: float
    regime: str = "ok"


@dataclass
class ScanResult:
    header: dict
    rows: list[ScanRow] = field(default_factory=list)

    @property
    def n_unreliable(self) -> int:
        return sum(r.flag_unreliable for r in self.rows)


def _scan_point(rho: np.ndarray, p: ProtocolParams, point: complex, engine: Engine,
                basis: str) -> ScanRow:
    # W is sampled at -beta and beta == alpha for commensurate pulses
    out = measure_wigner_point(rho, p, -point, engine, basis=basis)
    w_oracle = wigner_direct(rho, out.point)
    return ScanRow(
        point_re=float(out.point.real) + 0.0,
        point_im=float(out.point.imag) + 0.0,
        w_est=out.w_est,
        w_oracle=w_oracle,
        abs_err=abs(out.w_est - w_oracle),
        p_e=out.p_e,
        p_g=out.p_g,
        tail_population=out.tail_population,
        flag_unreliable=out.unreliable,
        duration_ns=out.duration_ns,
        regime=out.regime.worst,
    )


def _header(cfg: ScanConfig, p: ProtocolParams) -> dict:
    preset = PRESETS.get(cfg.preset)
    grid = cfg.grid
    grid_desc = ({"line": asdict(grid)} if isinstance(grid, LineGrid)
                 else {"grid2d": {"re": asdict(grid.re), "im": asdict(grid.im)}})
    return {
        "preset": cfg.preset,
        "state": cfg.state,
        "engine": cfg.engine.value,
        "basis": cfg.basis,
        "n_fock": cfg.n_fock,
        "delta": p.sys.delta,
        "g": p.sys.g,
        "eps_D": abs(p.eps_D),
        "m": p.m,
        "eps_half_mag": p.eps_half_mag,
        "eps_half_table": preset.eps_half_table if preset else None,
        "phi1": p.phi1,
        "phi2": p.phi2,
        "kappa_inv_ns": p.kappa_inv,
        "gamma_inv_ns": p.gamma_inv,
        **grid_desc,
    }


def run_scan(cfg: ScanConfig) -> ScanResult:
    """Evaluate every grid point; rows keep grid order whatever the worker count."""
    p = cfg.protocol()
    rho, _ = parse_state(cfg.state, cfg.n_fock)
    rho = np.outer(rho, rho.conj())
    points = cfg.grid.points()
    rows: list[ScanRow | None] = [None] * len(points)

    def work(i: int) -> None:
        rows[i] = _scan_point(rho, p, points[i], cfg.engine, cfg.basis)

    if cfg.workers == 1 or len(points) < 2:
        for i in range(len(points)):
            work(i)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(work, range(len(points))))
    header = _header(cfg, p)
    summary = {"ok": 0, "marginal": 0, "violated": 0}
    for row in rows:
        summary[row.regime] += 1
    header["regime_summary"] = summary
    header["n_unreliable"] = sum(r.flag_unreliable for r in rows)
    return ScanResult(header=header, rows=rows)


# --- output ------------------------------------------------------------------

def _row_values(row: ScanRow) -> list[str]:
    out = []
    for col in CSV_COLUMNS:
        val = getattr(row, col)
        out.append(str(int(val)) if col == "flag_unreliable" else _fmt(val))
    return out


def format_csv(result: ScanResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in result.rows:
        writer.writerow(_row_values(row))
    return buf.getvalue()


def format_json(result: ScanResult) -> str:
    doc = {"header": result.header, "rows": [asdict(r) for r in result.rows]}
    return json.dumps(doc, indent=1, sort_keys=True)


def emit(result: ScanResult, path: str, fmt: str = "csv") -> None:
    text = {"csv": format_csv, "json": format_json}[fmt](result)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def load_json_result(path: str) -> ScanResult:
    with open(path) as fh:
        doc = json.load(fh)
    return ScanResult(header=doc["header"], rows=[ScanRow(**r) for r in doc["rows"]])


# --- commands ----------------------------------------------------------------

def _cmd_scan(args) -> int:
    flags = {
        "preset": args.preset, "state": args.state, "line": args.line,
        "grid2d": args.grid2d, "engine": args.engine, "basis": args.basis,
        "n_fock": args.n_fock, "out": args.out, "json": args.json,
        "workers": args.workers, "delta": args.delta, "g": args.g,
        "eps_d": args.eps_d, "m": args.m, "eps_half": args.eps_half,
        "phi1": args.phi1, "phi2": args.phi2,
    }
    cfg = load_config(args.config, **flags)
    result = run_scan(cfg)
    if cfg.out:
        emit(result, cfg.out, "csv")
    if cfg.json_out:
        emit(result, cfg.json_out, "json")
    if not cfg.out and not cfg.json_out:
        sys.stdout.write(format_csv(result))
    if result.n_unreliable:
        logger.warning("%d of %d points flagged unreliable (truncation tail > 1e-4)",
                       result.n_unreliable, len(result.rows))
    return EXIT_OK


def _protocol_from_args(args) -> ProtocolParams:
    try:
        return get_preset(args.preset).protocol(n_fock=args.n_fock)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_prepare(args) -> int:
    p = _protocol_from_args(args)
    engine = Engine.parse(args.engine)
    if args.kind != "cat" and engine is Engine.ANALYTIC:
        raise ConfigError(f"{args.kind} preparation needs the exact or effective engine")
    try:
        alpha = complex(args.alpha)
    except ValueError:
        raise ConfigError(f"bad --alpha {args.alpha!r}") from None
    if args.kind == "coherent":
        prep = prepare_coherent(p, alpha, engine)
        report = {"fidelity": prep.fidelity_vs_target, "duration_ns": to_ns(prep.duration)}
    elif args.kind == "fock1":
        try:
            prep = prepare_fock_one(p, args.eps_pi, args.m_pi, engine)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        report = {"fidelity": prep.fidelity_vs_target,
                  "duration_ns": to_ns(prep.duration),
                  "t_pi_ns": to_ns(prep.details["t_pi"]),
                  "t_ra_ns": to_ns(prep.details["t_ra"])}
    else:
        res = prepare_cat(p, alpha, engine)
        report = {
            key: {"probability": st.success_probability, "fidelity": st.fidelity_vs_target,
                  "fitted_relative_phase": st.details.get("fitted_relative_phase")}
            for key, st in (("even", res.even), ("odd", res.odd))
        }
        report["duration_ns"] = to_ns(res.even.duration)
    json.dump({"kind": args.kind, "preset": args.preset, **report}, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_validate(args) -> int:
    p = _protocol_from_args(args)
    psi, _ = parse_state(args.state, args.n_fock)
    try:
        alpha = complex(args.alpha)
    except ValueError:
        raise ConfigError(f"bad --alpha {args.alpha!r}") from None
    report = validate_regime(p, psi, alpha)
    json.dump({"preset": args.preset, "state": args.state, "alpha": str(alpha),
               **report.as_dict()}, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqedwigner", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="reconstruct W on a grid and compare with the direct value")
    scan.add_argument("--config")
    scan.add_argument("--preset", choices=sorted(PRESETS) + ["custom"])
    scan.add_argument("--state")
    grid = scan.add_mutually_exclusive_group()
    grid.add_argument("--line", help="x_min:x_max:step on the real axis")
    grid.add_argument("--grid2d", help="re_min:re_max:re_step,im_min:im_max:im_step")
    scan.add_argument("--engine", choices=[e.value for e in Engine])
    scan.add_argument("--basis", choices=["dressed", "bare"])
    scan.add_argument("--n-fock", type=int)
    scan.add_argument("--out", help="CSV output path (stdout if neither --out nor --json)")
    scan.add_argument("--json", help="JSON output path")
    scan.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")
    for name in ("delta", "g", "eps-d", "eps-half", "phi1", "phi2"):
        scan.add_argument(f"--{name}", type=float)
    scan.add_argument("--m", type=int)
    scan.set_defaults(func=_cmd_scan)

    prep = sub.add_parser("prepare", help="simulate state preparation")
    prep.add_argument("--kind", choices=["coherent", "fock1", "cat"], required=True)
    prep.add_argument("--preset", choices=sorted(PRESETS), default="set2")
    prep.add_argument("--alpha", default="1", help="coherent amplitude or cat alpha0")
    prep.add_argument("--eps-pi", type=float, default=None)
    prep.add_argument("--m-pi", type=int, default=15)
    prep.add_argument("--engine", choices=["exact", "effective", "analytic"], default="exact")
    prep.add_argument("--n-fock", type=int, default=128)
    prep.set_defaults(func=_cmd_prepare)

    val = sub.add_parser("validate", help="report approximation-regime ratios")
    val.add_argument("--preset", choices=sorted(PRESETS), default="set2")
    val.add_argument("--state", default="vacuum")
    val.add_argument("--alpha", default="0")
    val.add_argument("--n-fock", type=int, default=128)
    val.set_defaults(func=_cmd_validate)
    return parser


_VALUE_FLAGS = ("--line", "--grid2d", "--alpha")


def _join_values(argv: list[str]) -> list[str]:
    # ranges like -4:4:0.2 look like options to argparse
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
