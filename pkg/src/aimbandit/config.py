"""Experiment configuration files and CSV output.

A configuration is an INI file.  The ``[experiment]`` section holds flat
key-value settings; each policy with a tunable constant may get its own
section named after it.  A ``[sweep]`` section lists ``;``-separated
alternatives for experiment keys and is only accepted by the sweep command::

    [experiment]
    family = gaussian
    policies = aim_gauss2, thompson
    means = 0.8, 0.79
    horizon = 1000
    runs = 10
    seed = 1

    [ucb_tuned]
    c = 2.1
"""

from __future__ import annotations

import configparser
import csv
import itertools
import re
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Optional

from .policies import POLICIES
from .sim import AggregatedTable, ExperimentConfig, MeanSource, PolicySpec

__all__ = [
    "ConfigError",
    "emit_csv",
    "parse_config",
    "parse_sweep",
    "read_csv",
]

CSV_HEADER = ("policy", "t", "mean_regret", "stderr", "runs")

_EXPERIMENT_KEYS = {
    "family": str,
    "sigma2": float,
    "policies": "names",
    "means": "floats",
    "sobol_pairs": int,
    "uniform_arms": int,
    "horizon": int,
    "runs": int,
    "seed": int,
    "checkpoints": "ints",
}
_MEAN_KEYS = ("means", "sobol_pairs", "uniform_arms")


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, path: Any, problems: list[str]):
        self.problems = problems
        super().__init__(f"{path}: " + "; ".join(problems))


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        head = re.match(r"\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return lineno
    return None


def _convert(kind: Any, raw: str) -> Any:
    if kind == "names":
        names = [p.strip() for p in raw.split(",") if p.strip()]
        if not names:
            raise ValueError("expected a comma-separated list of names")
        return names
    if kind == "floats":
        return [float(p) for p in raw.split(",")]
    if kind == "ints":
        return [int(p) for p in raw.split(",")]
    return kind(raw.strip())


def _read(path: Path) -> tuple[configparser.ConfigParser, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(path, [f"cannot read config: {exc.strerror}"]) from exc
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(path, [str(exc).replace("\n", " ")]) from exc
    return parser, text


def _build(
    path: Any,
    text: str,
    settings: Mapping[str, str],
    policy_sections: Mapping[str, Mapping[str, str]],
    overrides: Mapping[str, Any],
) -> ExperimentConfig:
    problems = []
    values: dict[str, Any] = {}
    unparsed = set()
    for key, raw in settings.items():
        where = _line_of(text, "experiment", key)
        loc = f"line {where}, " if where else ""
        if key not in _EXPERIMENT_KEYS:
            problems.append(f"{loc}[experiment] unknown key {key!r}")
            continue
        try:
            values[key] = _convert(_EXPERIMENT_KEYS[key], raw)
        except ValueError:
            unparsed.add(key)
            problems.append(f"{loc}[experiment] {key}: cannot parse {raw!r}")
    for key, value in overrides.items():
        if value is not None:
            values[key] = value

    for key in ("policies", "horizon", "runs"):
        if key not in values and key not in unparsed:
            problems.append(f"[experiment] missing required key {key!r}")
    sources = [k for k in _MEAN_KEYS if k in values]
    if len(sources) != 1:
        problems.append(
            "[experiment] exactly one of means, sobol_pairs, uniform_arms is required"
        )

    constants: dict[str, float] = {}
    for name, section in policy_sections.items():
        if name not in POLICIES:
            problems.append(f"unknown section [{name}]")
            continue
        for key, raw in section.items():
            where = _line_of(text, name, key)
            loc = f"line {where}, " if where else ""
            if key != "c" or POLICIES[name].default_c is None:
                problems.append(f"{loc}[{name}] unknown key {key!r}")
                continue
            try:
                constants[name] = float(raw)
            except ValueError:
                problems.append(f"{loc}[{name}] c: cannot parse {raw!r}")
    if problems:
        raise ConfigError(path, problems)

    if sources[0] == "means":
        source = MeanSource("fixed", values=tuple(values["means"]))
    elif sources[0] == "sobol_pairs":
        source = MeanSource("sobol", count=values["sobol_pairs"])
    else:
        source = MeanSource("uniform", arms=values["uniform_arms"])
    config = ExperimentConfig(
        policies=tuple(PolicySpec(n, constants.get(n)) for n in values["policies"]),
        family=values.get("family", "gaussian"),
        mean_source=source,
        horizon=values["horizon"],
        runs=values["runs"],
        base_seed=values.get("seed", 0),
        sigma2=values.get("sigma2", 1.0),
        checkpoints=tuple(values["checkpoints"]) if "checkpoints" in values else None,
    )
    problems = config.problems()
    if problems:
        raise ConfigError(path, problems)
    return config


def _sections(parser: configparser.ConfigParser, path: Any, allow_sweep: bool):
    if not parser.has_section("experiment"):
        raise ConfigError(path, ["missing [experiment] section"])
    policy_sections = {
        s: dict(parser[s]) for s in parser.sections() if s not in ("experiment", "sweep")
    }
    if parser.has_section("sweep") and not allow_sweep:
        raise ConfigError(path, ["[sweep] is only accepted by the sweep command"])
    return dict(parser["experiment"]), policy_sections


def parse_config(path: Any, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Read and validate a configuration.

    ``overrides`` may set ``horizon``, ``runs``, ``seed`` and ``policies``;
    ``None`` values are ignored.
    """
    parser, text = _read(Path(path))
    settings, policy_sections = _sections(parser, path, allow_sweep=False)
    return _build(path, text, settings, policy_sections, dict(overrides or {}))


def parse_sweep(path: Any) -> list[tuple[dict[str, str], ExperimentConfig]]:
    """Expand a configuration with a ``[sweep]`` section into its grid of experiments."""
    parser, text = _read(Path(path))
    settings, policy_sections = _sections(parser, path, allow_sweep=True)
    if not parser.has_section("sweep"):
        raise ConfigError(path, ["sweep needs a [sweep] section"])
    axes = {k: [v.strip() for v in raw.split(";")] for k, raw in parser["sweep"].items()}
    unknown = [k for k in axes if k not in _EXPERIMENT_KEYS]
    if unknown:
        raise ConfigError(path, [f"[sweep] unknown key {k!r}" for k in unknown])
    points = []
    for combo in itertools.product(*axes.values()):
        point = dict(zip(axes, combo))
        merged = dict(settings)
        # A swept mean source replaces whichever source the base section set.
        if any(k in _MEAN_KEYS for k in point):
            merged = {k: v for k, v in merged.items() if k not in _MEAN_KEYS}
        merged.update(point)
        points.append((point, _build(path, text, merged, policy_sections, {})))
    return points


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".9g")


def emit_csv(table: AggregatedTable, path: Any) -> None:
    """Write ``policy,t,mean_regret,stderr,runs`` rows sorted by policy then t."""
    if not table.mean:
        raise ValueError("cannot write an empty table")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for name in table.policies:
                for t, m, se in zip(table.checkpoints, table.mean[name], table.stderr[name]):
                    writer.writerow((name, int(t), _fmt(m), _fmt(se), table.runs))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path: Any) -> list[dict[str, Any]]:
    """Parse a file written by :func:`emit_csv`."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            {
                "policy": row["policy"],
                "t": int(row["t"]),
                "mean_regret": float(row["mean_regret"]),
                "stderr": float(row["stderr"]),
                "runs": int(row["runs"]),
            }
            for row in reader
        ]

