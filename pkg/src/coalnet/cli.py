"""Scenario-driven command line: four sweep experiments and a one-shot solver.

Configs are TOML or JSON (decided by file extension) with the same structure
either way; command-line flags override file values. CSV output is fully
deterministic for a given config and seed: rows are emitted in sweep order
and floats printed with 12 significant digits.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import experiments
from .channel import ChannelModel, LinkInfeasible

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

CSV_COLUMNS = {
    "fig3": ["dest_distance", "N", "relay_distance", "mean_alpha"],
    "fig4": ["dest_distance", "N", "relay_distance", "mean_P0"],
    "fig5": ["node1_x", "node2_x", "alpha_1", "alpha_2"],
    "fig6": ["n", "B", "mode", "mean_connectivity", "stderr"],
}


class ConfigError(ValueError):
    """The scenario configuration cannot be parsed or validated."""


def _float_list(values) -> list[float]:
    return [float(v) for v in values]


@dataclasses.dataclass
class ScenarioConfig:
    """Everything an experiment run needs, with sensible sweep defaults."""

    # channel (dB-domain at this interface)
    exponent: float = 3.0
    noise_dbm: float = -60.0
    p_max_dbm: float = 10.0
    snr_target_db: float = 10.0
    reference_gain: float = 1.0
    # run
    fairness: str = "minmax"
    seed: int = 20240901
    # relay-distance sweep
    dest_distances_m: list[float] = dataclasses.field(
        default_factory=lambda: [100.0, 50.0]
    )
    relay_counts: list[int] = dataclasses.field(default_factory=lambda: [1, 2])
    relay_distances_m: list[float] = dataclasses.field(
        default_factory=lambda: [float(d) for d in range(5, 101, 5)]
    )
    iterations: int = 1000
    # two-relay location sweep
    fig5_node1_x_m: list[float] = dataclasses.field(
        default_factory=lambda: [20.0, 50.0]
    )
    fig5_node2_x_m: list[float] = dataclasses.field(
        default_factory=lambda: [float(d) for d in range(5, 101, 5)]
    )
    fig5_dest_x_m: float = -50.0
    # connectivity sweep
    node_counts: list[int] = dataclasses.field(default_factory=lambda: [100, 500])
    area_sides_m: list[float] = dataclasses.field(
        default_factory=lambda: [50.0, 150.0, 250.0, 350.0, 450.0, 550.0, 650.0, 750.0]
    )
    trials: int = 100
    # one-shot solver input
    solve: dict | None = None

    def channel_model(self) -> ChannelModel:
        try:
            return ChannelModel.from_db(
                exponent=self.exponent,
                noise_dbm=self.noise_dbm,
                snr_target_db=self.snr_target_db,
                p_max_dbm=self.p_max_dbm,
                reference_gain=self.reference_gain,
            )
        except ValueError as exc:
            raise ConfigError(f"invalid channel parameters: {exc}") from exc

    def validate(self) -> None:
        if self.fairness not in ("minmax", "shapley"):
            raise ConfigError(f"fairness must be 'minmax' or 'shapley', got {self.fairness!r}")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.iterations < 1 or self.trials < 1:
            raise ConfigError("iterations and trials must be at least 1")
        for name in (
            "dest_distances_m",
            "relay_counts",
            "relay_distances_m",
            "fig5_node1_x_m",
            "fig5_node2_x_m",
            "node_counts",
            "area_sides_m",
        ):
            if not getattr(self, name):
                raise ConfigError(f"sweep {name} must be nonempty")
        self.channel_model()


_SECTION_KEYS = {
    "channel": {
        "exponent": ("exponent", float),
        "noise_dbm": ("noise_dbm", float),
        "p_max_dbm": ("p_max_dbm", float),
        "snr_target_db": ("snr_target_db", float),
        "reference_gain": ("reference_gain", float),
    },
    "sweep": {
        "dest_distances_m": ("dest_distances_m", _float_list),
        "relay_counts": ("relay_counts", lambda v: [int(x) for x in v]),
        "relay_distances_m": ("relay_distances_m", _float_list),
        "iterations": ("iterations", int),
    },
    "fig5": {
        "node1_x_m": ("fig5_node1_x_m", _float_list),
        "node2_x_m": ("fig5_node2_x_m", _float_list),
        "dest_x_m": ("fig5_dest_x_m", float),
    },
    "fig6": {
        "node_counts": ("node_counts", lambda v: [int(x) for x in v]),
        "area_sides_m": ("area_sides_m", _float_list),
        "trials": ("trials", int),
    },
}
_TOP_KEYS = {"fairness": str, "seed": int}


def load_config(path: Path | None) -> ScenarioConfig:
    """Parse a TOML or JSON scenario config; None yields the defaults."""
    cfg = ScenarioConfig()
    if path is None:
        return cfg
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    else:
        try:
            data = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table/object")

    for key, value in data.items():
        if key in _TOP_KEYS:
            try:
                setattr(cfg, key, _TOP_KEYS[key](value))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: bad value for {key!r}: {exc}") from exc
        elif key == "solve":
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: 'solve' must be a table/object")
            cfg.solve = value
        elif key in _SECTION_KEYS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: section {key!r} must be a table/object")
            known = _SECTION_KEYS[key]
            for sub, sub_value in value.items():
                if sub not in known:
                    raise ConfigError(f"{path}: unknown key {key}.{sub}")
                attr, convert = known[sub]
                try:
                    setattr(cfg, attr, convert(sub_value))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{path}: bad value for {key}.{sub}: {exc}") from exc
        else:
            raise ConfigError(f"{path}: unknown key {key!r}")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _run_experiment(experiment: str, cfg: ScenarioConfig, out: Path) -> str:
    model = cfg.channel_model()
    if experiment in ("fig3", "fig4"):
        rows = experiments.ratio_distance_sweep(
            model,
            cfg.dest_distances_m,
            cfg.relay_counts,
            cfg.relay_distances_m,
            cfg.iterations,
            cfg.seed,
        )
        write_csv(out, CSV_COLUMNS[experiment], rows)
        return f"{len(rows)} sweep points, {cfg.iterations} iterations each"
    if experiment == "fig5":
        rows = experiments.shapley_location_sweep(
            model, cfg.fig5_node1_x_m, cfg.fig5_node2_x_m, cfg.fig5_dest_x_m
        )
        write_csv(out, CSV_COLUMNS["fig5"], rows)
        return f"{len(rows)} location pairs"
    if experiment == "fig6":
        rows, reports = experiments.connectivity_sweep(
            model,
            cfg.node_counts,
            cfg.area_sides_m,
            cfg.trials,
            cfg.seed,
            cfg.fairness,
        )
        write_csv(out, CSV_COLUMNS["fig6"], rows)
        report_path = out.with_name(out.stem + "_report.json")
        report_path.write_text(
            json.dumps([r.to_jsonable() for r in reports], indent=2) + "\n"
        )
        return (
            f"{len(rows)} rows, {cfg.trials} trials per point; "
            f"full report in {report_path}"
        )
    raise ValueError(experiment)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="coalnet",
        description="Cooperative-relaying coalition experiments and one-shot solves.",
    )
    parser.add_argument(
        "--experiment",
        required=True,
        choices=["fig3", "fig4", "fig5", "fig6", "solve"],
        help="which experiment to run",
    )
    parser.add_argument("--config", type=Path, default=None, help="TOML or JSON scenario file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", type=Path, default=None, help="output file (CSV, or JSON for solve)")
    parser.add_argument("--trials", type=int, default=None,
                        help="override iterations (fig3/fig4) or trials per point (fig6)")
    parser.add_argument("--fairness", choices=["minmax", "shapley"], default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.fairness is not None:
            cfg.fairness = args.fairness
        if args.trials is not None:
            cfg.iterations = args.trials
            cfg.trials = args.trials
        cfg.validate()
        if args.experiment == "solve" and cfg.solve is None:
            raise ConfigError("solve needs a config with a [solve] section")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    suffix = ".json" if args.experiment == "solve" else ".csv"
    out = args.out if args.out is not None else Path(f"{args.experiment}{suffix}")

    try:
        if args.experiment == "solve":
            result = experiments.solve_scenario(cfg.solve)
            out.write_text(json.dumps(result, indent=2) + "\n")
            summary = (
                f"{result['n_relays']} relays, direct power "
                f"{_fmt(result['p_d_mw'])} mW"
            )
        else:
            summary = _run_experiment(args.experiment, cfg, out)
    except LinkInfeasible as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        # covers malformed scenarios, bad gains, and the enumeration cap
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"{args.experiment}: {summary}")
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
