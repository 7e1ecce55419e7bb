"""Command-line front end.

Commands: ``rates``, ``sweep``, ``simulate``, ``threshold``. Parameters come
from flags and/or a flat ``key = value`` config file; flags win. Output is
CSV (default) or an aligned text table.

Exit codes: 0 success, 2 invalid input, 3 statistical test failure,
4 no positive key rate.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import BoundMode, device_threshold, keyrate_imperfect, keyrate_perfect
from .devices import DeviceModel, MeasurementAngles, PreparationAngles, detection_flip_rate
from .edp import PauliChannel, combined_qber, imperfect_error_rates
from .exceptions import InfeasibleTargetError, NoKeyError, SdqkdError
from .simulate import Eve, ProtocolConfig, analytic_qber, expected_qber, run_protocol

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STATISTICAL = 3
EXIT_NO_KEY = 4

ANGLE_KEYS = ("alpha1", "alpha2", "alpha3", "alpha4", "beta1", "beta2", "beta3", "beta4")
CHANNEL_KEYS = ("p00", "p01", "p10", "p11")
CONFIG_KEYS = frozenset(ANGLE_KEYS + CHANNEL_KEYS + (
    "unit", "q_min", "q_max", "q_step", "n_pulses", "seed", "eve", "bound", "workers"))

SIGMA_LEVEL = 3.0


class InputError(ValueError):
    pass


def format_number(x: float) -> str:
    """Fixed notation with 12 significant digits, trailing zeros trimmed."""
    if isinstance(x, str):
        return x
    if math.isnan(x):
        return "nan"
    return np.format_float_positional(float(x), precision=12, unique=False,
                                      fractional=False, trim="-")


def read_config(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise InputError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: DeviceModel
    channel: PauliChannel
    bound: str
    q_min: float | None
    q_max: float
    q_step: float
    n_pulses: int
    seed: int
    eve: Eve
    workers: int
    out: str | None
    fmt: str


def _float(key: str, value) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{key} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise InputError(f"{key} must be finite, got {value!r}")
    return x


def _int(key: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InputError(f"{key} must be an integer, got {value!r}") from None


def _angles(source: dict, unit: str | None, origin: str) -> dict[str, float]:
    present = {k: source[k] for k in ANGLE_KEYS if source.get(k) is not None}
    if not present:
        return {}
    if unit is None:
        raise InputError(
            f"angles given {origin} but no unit; use --degrees or --radians"
            if origin == "on the command line"
            else f"angles given {origin} but no 'unit' key (degrees or radians)"
        )
    if unit not in ("degrees", "radians"):
        raise InputError(f"unit must be 'degrees' or 'radians', got {unit!r}")
    out = {}
    for k, v in present.items():
        x = _float(k, v)
        out[k] = math.radians(x) if unit == "degrees" else x
    return out


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_values = read_config(args.config) if args.config else {}
    flags = {k: getattr(args, k, None) for k in CONFIG_KEYS if k != "unit"}

    angles = _angles(file_values, file_values.get("unit"), "in the config file")
    angles.update(_angles(flags, args.unit, "on the command line"))

    def pick(key, default=None):
        if flags.get(key) is not None:
            return flags[key]
        return file_values.get(key, default)

    prep = PreparationAngles(*(angles.get(f"alpha{i}", 0.0) for i in range(1, 5)))
    meas = MeasurementAngles(*(angles.get(f"beta{i}", 0.0) for i in range(1, 5)))
    model = DeviceModel(prep, meas)

    given = {k: pick(k) for k in CHANNEL_KEYS}
    if all(v is None for v in given.values()):
        channel = PauliChannel.identity()
    else:
        channel = PauliChannel(*(_float(k, v) if v is not None else 0.0 for k, v in given.items()))

    bound = pick("bound", "auto")
    if bound == "auto":
        bound = (BoundMode.ANALYTIC_FAMILY_A if model.family_parameter() is not None
                 else BoundMode.EXACT_OPTIMIZER).value
    bound = BoundMode(bound).value

    q_min = pick("q_min")
    q_step = _float("q_step", pick("q_step", 0.005))
    if q_step <= 0:
        raise InputError("q_step must be positive")
    eve = pick("eve", "none")
    try:
        eve = Eve(eve)
    except ValueError:
        raise InputError(f"eve must be one of {[e.value for e in Eve]}, got {eve!r}") from None
    n_pulses = _int("n_pulses", pick("n_pulses", 100_000))
    seed = _int("seed", pick("seed", 0))
    if n_pulses < 1:
        raise InputError("n_pulses must be positive")
    if not 0 <= seed < 2**64:
        raise InputError("seed must be a 64-bit unsigned integer")

    return RunConfig(
        command=args.command,
        model=model,
        channel=channel,
        bound=bound,
        q_min=None if q_min is None else _float("q_min", q_min),
        q_max=_float("q_max", pick("q_max", 0.5)),
        q_step=q_step,
        n_pulses=n_pulses,
        seed=seed,
        eve=eve,
        workers=max(1, _int("workers", pick("workers", 1))),
        out=args.out,
        fmt=args.format,
    )


def render(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    cells = [[format_number(v) for v in row] for row in rows]
    if fmt == "csv":
        return "".join(",".join(line) + "\n" for line in [list(header), *cells])
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def cmd_rates(cfg: RunConfig) -> tuple[int, list[str], list[list]]:
    e_bit1 = detection_flip_rate(cfg.model.meas)
    rates = imperfect_error_rates(cfg.channel, cfg.model.prep)
    q = combined_qber(rates.e_bit, e_bit1)
    return EXIT_OK, ["e_bit1", "e_bit", "e_phase", "Q"], [[e_bit1, rates.e_bit, rates.e_phase, q]]


def sweep_grid(q_min: float, q_max: float, q_step: float) -> list[float]:
    n = int(math.floor((q_max - q_min) / q_step + 1e-9))
    return [q_min + k * q_step for k in range(n + 1)]


def cmd_sweep(cfg: RunConfig) -> tuple[int, list[str], list[list]]:
    e_bit1 = detection_flip_rate(cfg.model.meas)
    q_min = e_bit1 if cfg.q_min is None else cfg.q_min
    if q_min < e_bit1:
        raise InputError(
            f"q_min={q_min!r} is below the detection flip rate {e_bit1:.12g}; out of model")
    if cfg.q_max > 0.5 or cfg.q_max < q_min:
        raise InputError(f"q_max must lie in [q_min, 0.5], got {cfg.q_max!r}")
    rows = []
    for q in sweep_grid(q_min, cfg.q_max, cfg.q_step):
        try:
            r_imp = keyrate_imperfect(q, cfg.model, cfg.bound).rate
        except InfeasibleTargetError:
            r_imp = math.nan
        rows.append([q, keyrate_perfect(q).rate, r_imp])
    return EXIT_OK, ["Q", "R_perfect", "R_imperfect"], rows


def cmd_simulate(cfg: RunConfig) -> tuple[int, list[str], list[list]]:
    config = ProtocolConfig(cfg.n_pulses, cfg.seed, cfg.model, cfg.channel, cfg.eve)
    result = run_protocol(config, workers=cfg.workers)
    q_analytic = analytic_qber(cfg.model, cfg.channel)
    q_honest = expected_qber(cfg.model, cfg.channel, Eve.NONE)
    if cfg.eve is Eve.NONE:
        # 1e-12 absorbs rounding when both sides are exactly zero in theory
        ok = abs(result.qber - q_analytic) <= SIGMA_LEVEL * result.stderr + 1e-12
        verdict, code = ("PASS", EXIT_OK) if ok else ("FAIL", EXIT_STATISTICAL)
    else:
        ref_err = math.sqrt(q_honest * (1 - q_honest) / result.sifted) if result.sifted else 0.0
        detected = result.qber - q_honest > SIGMA_LEVEL * ref_err + 1e-12
        verdict, code = ("attack detected" if detected else "attack undetected"), EXIT_OK
    header = ["n_pulses", "sifted", "errors", "qber", "stderr", "Q_analytic", "Q_honest", "verdict"]
    row = [str(result.n_pulses), str(result.sifted), str(result.errors), result.qber,
           result.stderr, q_analytic, q_honest, verdict]
    return code, header, [row]


def cmd_threshold(cfg: RunConfig) -> tuple[int, list[str], list[list]]:
    header = ["bound", "Q_threshold"]
    try:
        q = device_threshold(cfg.model, cfg.bound)
    except NoKeyError as exc:
        print(f"no tolerated QBER: {exc}", file=sys.stderr)
        return EXIT_NO_KEY, header, [[cfg.bound, math.nan]]
    return EXIT_OK, header, [[cfg.bound, q]]


COMMANDS = {
    "rates": cmd_rates,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "threshold": cmd_threshold,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "table"), default="csv")
    unit = common.add_mutually_exclusive_group()
    unit.add_argument("--degrees", dest="unit", action="store_const", const="degrees")
    unit.add_argument("--radians", dest="unit", action="store_const", const="radians")
    for key in ANGLE_KEYS:
        common.add_argument(f"--{key}", type=float)
    for key in CHANNEL_KEYS:
        common.add_argument(f"--{key}", type=float)
    common.add_argument("--bound", choices=["auto"] + [m.value for m in BoundMode])
    common.add_argument("--q-min", dest="q_min", type=float)
    common.add_argument("--q-max", dest="q_max", type=float)
    common.add_argument("--q-step", dest="q_step", type=float)
    common.add_argument("--n-pulses", dest="n_pulses", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--eve", choices=[e.value for e in Eve])
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(
        prog="sdqkd", description="BB84 key rates with state-dependent device imperfections")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rates", parents=[common], help="error rates and QBER for one channel")
    sub.add_parser("sweep", parents=[common], help="key rate versus QBER, perfect and imperfect")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo run checked against the analysis")
    sub.add_parser("threshold", parents=[common], help="largest QBER with a positive key rate")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            cfg = build_run_config(args)
            code, header, rows = COMMANDS[cfg.command](cfg)
        except (OSError, ValueError, SdqkdError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        finally:
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
    text = render(header, rows, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
