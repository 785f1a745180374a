"""Command-line front end.

Subcommands:
    threshold  per-alpha margins and the overall verdict
    classify   zero-background regime of d = u_x, with a CSV of d(t)
    evolve     CSV of the indicator and solution along characteristics
    validate   closed-form versus oracle families

Exit codes: 0 global (or success), 2 breakdown, 3 indeterminate,
1 configuration error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .flowmap import IsotropicConfig, PastBlowupError, flow_point, indicator_trace
from .profiles import FULL_LINE, HALF_LINE, DomainError, InitialData, ProfileSyntaxError
from .thresholds_1d import (
    ConstantBackground,
    NoBlowupError,
    RelaxationStrong,
    RelaxationWeak,
    ZeroBackground,
    blowup_time_local,
    classify_regime,
    indicator_1d,
    threshold_margin,
    verdict_1d,
)
from .thresholds_multid import band, verdict_multid
from .validation import FAMILIES, FAULTS, ValidationConfig, run_family
from .verdicts import ModelConstraintError
from .viscous import envelope_from_data, verdict_viscous

__all__ = ["RunConfig", "ConfigError", "main", "build_parser", "load_config"]

MODELS = ("zero-bg", "const-bg", "relax", "viscous", "isotropic")
EXIT_CONFIG = 1
EXIT_VALIDATE = 4


class ConfigError(ValueError):
    """Invalid command-line or config-file input."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs.

    Grid fields left as ``None`` take model-dependent defaults.
    """

    model: str = "zero-bg"
    k: float = 1.0
    c: Optional[float] = None
    eps: Optional[float] = None
    nu: Optional[int] = None
    rho0: str = "1"
    u0: str = "0"
    d0: Optional[float] = None
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None
    alpha_count: Optional[int] = None
    spacing: str = "linear"
    t_end: float = 10.0
    samples: int = 201
    out: Optional[str] = None
    jobs: int = 1
    seed: int = 20240607
    scale: float = 1.0
    fault: Optional[str] = None
    families: Optional[str] = None

    def checked(self) -> "RunConfig":
        """Fill grid defaults and validate; raises :class:`ConfigError`."""
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        lo, hi, n = {
            "isotropic": (0.05, 5.0, 100),
            "viscous": (-10.0, 10.0, 401),
        }.get(self.model, (-5.0, 5.0, 201))
        rc = replace(
            self,
            alpha_min=lo if self.alpha_min is None else self.alpha_min,
            alpha_max=hi if self.alpha_max is None else self.alpha_max,
            alpha_count=n if self.alpha_count is None else self.alpha_count,
        )
        if rc.alpha_count < 1:
            raise ConfigError(f"alpha grid is empty (alpha-count={rc.alpha_count})")
        if rc.alpha_count > 1 and not rc.alpha_max > rc.alpha_min:
            raise ConfigError("alpha-max must exceed alpha-min")
        if rc.spacing not in ("linear", "log"):
            raise ConfigError("spacing must be 'linear' or 'log'")
        if rc.spacing == "log" and not rc.alpha_min > 0:
            raise ConfigError("log spacing needs alpha-min > 0")
        if not rc.t_end > 0:
            raise ConfigError("t-end must be positive")
        if rc.samples < 2:
            raise ConfigError("samples must be at least 2")
        if rc.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if rc.model == "isotropic" and rc.nu is None:
            raise ConfigError("model isotropic needs --nu")
        if rc.model in ("const-bg", "relax") and rc.c is None:
            raise ConfigError(f"model {rc.model} needs --c")
        if rc.model == "relax" and rc.eps is None:
            raise ConfigError("model relax needs --eps")
        if rc.fault is not None and rc.fault not in FAULTS:
            raise ConfigError(f"unknown fault {rc.fault!r}")
        if rc.d0 is not None:
            rc = replace(rc, u0=f"({rc.d0!r})*x")
        return rc

    def alphas(self) -> np.ndarray:
        if self.alpha_count == 1:
            return np.array([float(self.alpha_min)])
        if self.spacing == "log":
            return np.geomspace(self.alpha_min, self.alpha_max, self.alpha_count)
        return np.linspace(self.alpha_min, self.alpha_max, self.alpha_count)

    def data(self) -> InitialData:
        domain = HALF_LINE if self.model == "isotropic" else FULL_LINE
        try:
            return InitialData.from_text(self.rho0, self.u0, domain)
        except ProfileSyntaxError as e:
            raise ConfigError(f"cannot parse profile: {e}") from e


def model_1d(rc: RunConfig):
    if rc.model == "zero-bg":
        return ZeroBackground(rc.k)
    if rc.model == "const-bg":
        return ConstantBackground(rc.k, rc.c)
    if rc.model == "relax":
        split = 1.0 / (2.0 * math.sqrt(rc.c * rc.k)) if rc.c * rc.k > 0 else math.inf
        cls = RelaxationWeak if rc.eps > split else RelaxationStrong
        return cls(rc.k, rc.c, rc.eps)
    raise ConfigError(f"model {rc.model} is not a one-dimensional model")


def isotropic(rc: RunConfig) -> IsotropicConfig:
    return IsotropicConfig(rc.nu, rc.k, rc.data())


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------

_SECTIONS = {
    "model": ("model", "k", "c", "eps", "nu"),
    "profiles": ("rho0", "u0", "d0"),
    "grid": ("alpha_min", "alpha_max", "alpha_count", "spacing", "t_end", "samples"),
    "output": ("out", "jobs"),
    "validate": ("seed", "scale", "families"),
}


def _coerce(name: str, text: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = str(kinds[name])
    try:
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError as e:
        raise ConfigError(f"{name}: cannot read {text!r} as a number") from e
    return text.strip().strip("'\"")


def load_config(path: str) -> dict:
    """Read ``[model]``, ``[profiles]``, ``[grid]``, ``[output]`` key=value sections."""
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    out: dict = {}
    for section in cp.sections():
        allowed = _SECTIONS.get(section)
        if allowed is None:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in cp.items(section):
            name = key.replace("-", "_")
            if name not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            out[name] = _coerce(name, value)
    return out


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    if x is None or not math.isfinite(x):
        return ""
    return f"{x:.17g}"


def _write_csv(path: Optional[str], header: Sequence[str], rows: Sequence[Sequence], stream=None) -> None:
    """Write rows with 17 significant digits; non-finite values become empty fields."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, float) else v for v in row])
    if path is None or path == "-":
        (stream or sys.stdout).write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _map(fn: Callable, rc: RunConfig, alphas: Sequence[float]) -> list:
    """Per-alpha work, in alpha order, optionally on a process pool."""
    if rc.jobs == 1 or len(alphas) == 1:
        return [fn(rc, float(a)) for a in alphas]
    with ProcessPoolExecutor(max_workers=rc.jobs) as pool:
        return list(pool.map(fn, [rc] * len(alphas), [float(a) for a in alphas]))


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------

THRESHOLD_HEADER = ("alpha", "rho0", "du0", "margin", "lower_margin")


def _threshold_row(rc: RunConfig, a: float) -> tuple:
    data = rc.data()
    rho, du = data.rho0(a), data.u0.derivative(a)
    if rc.model == "viscous":
        m = du / rho + math.sqrt(2.0 * rc.k / rho)
        return (a, rho, du, m, m)
    if rc.model == "isotropic":
        b = band(isotropic(rc), a)
        return (a, rho, du, du - b.upper, du - b.lower)
    m = threshold_margin(model_1d(rc), rho, du)
    return (a, rho, du, m, m)


def cmd_threshold(rc: RunConfig) -> int:
    alphas = rc.alphas()
    rows = _map(_threshold_row, rc, alphas)
    if rc.model == "viscous":
        v = verdict_viscous(rc.data(), rc.k, alphas)
    elif rc.model == "isotropic":
        v = verdict_multid(isotropic(rc), alphas)
    else:
        v = verdict_1d(model_1d(rc), rc.data(), alphas)
    _write_csv(rc.out, THRESHOLD_HEADER, rows)
    print(f"verdict: {v.summary()}")
    if rc.model == "viscous":
        env, r_max, _ = envelope_from_data(rc.data(), rc.k, alphas)
        print(f"beta0 range: [{env.beta_inf0:.12g}, {env.beta_sup0:.12g}], max rho0 = {r_max:.12g}")
    return v.kind.exit_code


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

CLASSIFY_HEADER = ("alpha", "t", "d", "rho", "Gamma", "blowup")


def _classify_rows(rc: RunConfig, a: float) -> tuple[str, list]:
    data = rc.data()
    rho, d0 = data.rho0(a), data.u0.derivative(a)
    rcl = classify_regime(d0, rho, rc.k)
    parts = [f"alpha={a:.12g}", f"case {rcl.case_id}: {rcl.description}"]
    for name in ("d_max", "d_min", "t_e_plus", "t_e_minus", "t_zero", "t_c_minus"):
        val = getattr(rcl, name)
        if val is not None:
            parts.append(f"{name}={val:.12g}")
    model = ZeroBackground(rc.k)
    t_c = rcl.t_c_minus
    rows = []
    for t in np.linspace(0.0, rc.t_end, rc.samples):
        if t_c is not None and t >= t_c:
            break
        g, gt = indicator_1d(model, rho, d0, float(t))
        rows.append((a, float(t), gt / g, rho / g, g, 0))
    if t_c is not None and t_c <= rc.t_end:
        rows.append((a, t_c, math.inf, math.inf, 0.0, 1))
    return "  ".join(parts), rows


def cmd_classify(rc: RunConfig) -> int:
    if rc.k == 0:
        print("k = 0: decoupled Burgers; no critical threshold")
        return 0
    results = _map(_classify_rows, rc, rc.alphas())
    for line, _ in results:
        print(line)
    if rc.out:
        _write_csv(rc.out, CLASSIFY_HEADER, [r for _, rows in results for r in rows])
    return 0


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

EVOLVE_HEADER = ("alpha", "t", "r", "u", "Gamma", "Gamma_t", "n", "u_r", "blowup")


def _evolve_rows(rc: RunConfig, a: float) -> list:
    if rc.model == "isotropic":
        iso = isotropic(rc)
        tr = indicator_trace(iso, a, rc.t_end, rc.samples)
        rows = [
            (a, float(t), float(r), float(u), float(g), float(gt), float(n), float(gt / g), 0)
            for t, r, u, g, gt, n in zip(tr.t, tr.r, tr.u, tr.gamma, tr.gamma_t, tr.rho)
        ]
        if tr.t_c is not None:
            fp = flow_point(iso, a, tr.t_c)
            rows.append((a, tr.t_c, fp.r, fp.u, 0.0, math.nan, math.inf, math.inf, 1))
        return rows
    model = model_1d(rc)
    data = rc.data()
    rho, du = data.rho0(a), data.u0.derivative(a)
    try:
        t_c = blowup_time_local(model, rho, du)
    except NoBlowupError:
        t_c = None
    rows = []
    for t in np.linspace(0.0, rc.t_end, rc.samples):
        if t_c is not None and t >= t_c:
            break
        g, gt = indicator_1d(model, rho, du, float(t))
        rows.append((a, float(t), math.nan, math.nan, g, gt, rho / g, gt / g, 0))
    if t_c is not None and t_c <= rc.t_end:
        rows.append((a, t_c, math.nan, math.nan, 0.0, indicator_1d(model, rho, du, t_c)[1], math.inf, math.inf, 1))
    return rows


def cmd_evolve(rc: RunConfig) -> int:
    if rc.model == "viscous":
        raise ConfigError("evolve supports the zero-bg, const-bg, relax and isotropic models")
    results = _map(_evolve_rows, rc, rc.alphas())
    _write_csv(rc.out, EVOLVE_HEADER, [r for rows in results for r in rows])
    blown = [rows[-1][1] for rows in results if rows and rows[-1][-1] == 1]
    if blown:
        print(f"blow-up reached at t={min(blown):.12g}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(rc: RunConfig) -> int:
    names = list(FAMILIES) if not rc.families else [s.strip() for s in rc.families.split(",") if s.strip()]
    unknown = [n for n in names if n not in FAMILIES]
    if unknown:
        raise ConfigError(f"unknown families {unknown}; choose from {', '.join(FAMILIES)}")
    vc = ValidationConfig(seed=rc.seed, scale=rc.scale, fault=rc.fault)
    start = time.perf_counter()
    failed = []
    for name in names:
        r = run_family(name, vc)
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} [{r.seconds:.1f}s]", flush=True)
        if not r.passed:
            failed.append(r)
    print(f"{len(names) - len(failed)}/{len(names)} families passed in {time.perf_counter() - start:.1f}s")
    if failed:
        worst = max(failed, key=lambda r: r.worst)
        print(f"worst case ({worst.name}): euler-poisson-ct {worst.worst_case}", file=sys.stderr)
        return EXIT_VALIDATE
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

COMMANDS = {"threshold": cmd_threshold, "classify": cmd_classify, "evolve": cmd_evolve, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key=value config file; flags override it")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--k", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--eps", type=float)
    common.add_argument("--nu", type=int)
    common.add_argument("--rho0", help="density (number density for isotropic) expression in x")
    common.add_argument("--u0", help="velocity expression in x")
    common.add_argument("--d0", type=float, help="shorthand for --u0 'd0*x'")
    common.add_argument("--alpha-min", type=float)
    common.add_argument("--alpha-max", type=float)
    common.add_argument("--alpha-count", type=int)
    common.add_argument("--spacing", choices=("linear", "log"))
    common.add_argument("--t-end", type=float)
    common.add_argument("--samples", type=int)
    common.add_argument("--out", help="CSV output path ('-' for stdout)")
    common.add_argument("--jobs", type=int, help="worker processes for per-alpha work")
    p = argparse.ArgumentParser(prog="euler-poisson-ct", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("threshold", "classify", "evolve"):
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("validate", parents=[common])
    v.add_argument("--seed", type=int)
    v.add_argument("--scale", type=float, help="sample-count multiplier (1 = full suite)")
    v.add_argument("--families", help="comma-separated subset of families")
    v.add_argument("--fault", choices=FAULTS, help=argparse.SUPPRESS)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = load_config(ns.config) if ns.config else {}
    for f in fields(RunConfig):
        flag = getattr(ns, f.name, None)
        if flag is not None:
            values[f.name] = flag
    try:
        return RunConfig(**values).checked()
    except TypeError as e:
        raise ConfigError(str(e)) from e


_VALUE_FLAGS = ("--rho0", "--u0", "--d0", "--k", "--c", "--alpha-min", "--alpha-max")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Glue values such as ``-3*x`` to their flag so argparse does not read
    them as options."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = build_parser().parse_args(_join_negative_values(argv))
    try:
        rc = config_from_args(ns)
        return COMMANDS[ns.command](rc)
    except (ConfigError, ModelConstraintError, DomainError, PastBlowupError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
