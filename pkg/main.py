import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog
from pydantic import ValidationError

from config import configure_logging, settings
from core.rng import RngStream, rng_fork
from datastream.csv_io import load_csv, write_points_csv
from datastream.preprocessing import preprocess_points
from errors import ConfigError, PoisonCtlError
from harness.recorder import trace_filename, write_manifest, write_summary_csv, write_trace_csv
from harness.suite import run_suite
from models import RunConfigFile
from theory.bounds import (
    verify_prop1,
    verify_simulation_lemma,
    verify_thm2,
    verify_thm2_gap,
    write_prop1_csv,
    write_simulation_lemma_csv,
    write_thm2_csv,
    write_thm2_gap_csv,
)

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SECTIONS = ("episode", "victim", "cost", "env", "trajopt")
THM2_GRID = [(N, n) for N in (2, 4) for n in (100, 1000, 10000)]
PROP1_TRIALS = 500
THM2_TRIALS = 10000


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def _field_names(section: str) -> List[str]:
    model = RunConfigFile.model_fields[section].annotation
    names = []
    for name, info in model.model_fields.items():
        names.append(info.alias or name)
    return names


def apply_override(data: Dict[str, Any], item: str) -> None:
    """KEY=VAL with KEY dotted (episode.T) or a bare field name found in exactly one section."""
    if "=" not in item:
        raise ConfigError(f"override must look like KEY=VAL, got {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    value = _parse_value(raw.strip())

    if "." in key:
        path = key.split(".")
    elif key in RunConfigFile.model_fields and key not in SECTIONS:
        path = [key]
    else:
        owners = [s for s in SECTIONS if key in _field_names(s)]
        if len(owners) != 1:
            where = "no section" if not owners else f"sections {', '.join(owners)}"
            raise ConfigError(f"override key {key!r} matches {where}; use the dotted form")
        path = [owners[0], key]

    node = data
    for part in path[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override key {key!r} does not name a config section")
    node[path[-1]] = value


def load_run_config(path: str, overrides: Sequence[str] = ()) -> RunConfigFile:
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        if config_path.suffix == ".json":
            data = json.loads(config_path.read_text(encoding="utf-8"))
            # a run manifest carries the resolved config under "config"
            if isinstance(data, dict) and "config" in data and "episodes" in data:
                data = data["config"]
        else:
            with config_path.open("rb") as handle:
                data = tomllib.load(handle)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot parse {path}: {e}")

    for item in overrides:
        apply_override(data, item)

    env = data.get("env")
    if isinstance(env, dict) and env.get("path"):
        env["path"] = str((config_path.parent / env["path"]).resolve())
    try:
        return RunConfigFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}: {e}")


def cmd_run(
    config_path: str,
    overrides: Sequence[str] = (),
    parallelism: Optional[int] = None,
    out: Optional[str] = None,
    seed: Optional[int] = None,
) -> int:
    try:
        config = load_run_config(config_path, overrides)
        if seed is not None:
            config = RunConfigFile.model_validate({**config.model_dump(by_alias=True), "seeds": [seed]})
    except (PoisonCtlError, ValidationError) as e:
        logger.error("Config rejected", path=config_path, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    output_dir = Path(out or config.output_dir or settings.output_dir)
    workers = parallelism or config.parallelism or settings.parallelism
    config = config.model_copy(update={"output_dir": str(output_dir)})

    episodes = config.episode_configs()
    logger.info("Run started", config=config_path, episodes=len(episodes), parallelism=workers, output_dir=str(output_dir))
    outcomes = run_suite(episodes, workers, keep_traces=True)

    traces = [o.trace for o in outcomes if o.trace is not None]
    if config.write_traces:
        for trace in traces:
            write_trace_csv(trace, output_dir / trace_filename(trace))
    summaries = [o.summary for o in outcomes]
    write_summary_csv(summaries, output_dir / "summary.csv")
    write_manifest(config, traces, output_dir / "manifest.json")

    for s in summaries:
        status = f"Jtilde_T={s.jtilde_T!r}" if s.ok else f"FAILED step={s.failed_step} {s.error}"
        print(f"{s.policy.value}\tseed={s.seed}\tT={s.T}\t{status}")
    failed = [s for s in summaries if not s.ok]
    logger.info("Run finished", episodes=len(summaries), failed=len(failed))
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_theory(
    N: Optional[int] = None,
    n: Optional[int] = None,
    delta: float = 0.05,
    trials: Optional[int] = None,
    seed: int = 0,
    out: Optional[str] = None,
    composed: bool = False,
) -> int:
    if trials is not None and trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if not 0.0 < delta < 1.0 or (N is not None and N < 2) or (n is not None and n < 1) or seed < 0:
        print("error: need N >= 2, n >= 1, 0 < delta < 1, seed >= 0", file=sys.stderr)
        return EXIT_USAGE

    root = RngStream.root(seed)
    out_dir = Path(out) if out else None
    grid = [(N or 2, n or 1000)] if (N is not None or n is not None) else THM2_GRID
    results = []

    prop1 = verify_prop1(trials or PROP1_TRIALS, rng_fork(root, 1))
    results.append(prop1.passed)
    print(
        f"prop1 {'PASS' if prop1.passed else 'FAIL'} trials={len(prop1.records)} "
        f"violations={prop1.violations} max_ratio={prop1.max_ratio:.6g} min_gap={prop1.min_gap:.3g}"
    )

    thm2_reports = []
    for index, (size, samples) in enumerate(grid):
        report = verify_thm2(size, samples, delta, trials or THM2_TRIALS, rng_fork(rng_fork(root, 2), index))
        thm2_reports.append(report)
    thm2_ok = all(r.passed for r in thm2_reports)
    results.append(thm2_ok)
    settings_text = " ".join(f"N={r.N},n={r.n}:{r.coverage:.4f}" for r in thm2_reports)
    print(f"thm2 {'PASS' if thm2_ok else 'FAIL'} delta={delta} coverage {settings_text}")

    if out_dir is not None:
        write_prop1_csv(prop1, out_dir / "prop1.csv")
        for r in thm2_reports:
            write_thm2_csv(r, out_dir / f"thm2_N{r.N}_n{r.n}.csv")

    if composed:
        lemma = verify_simulation_lemma(trials or PROP1_TRIALS, rng_fork(root, 3))
        results.append(lemma.passed)
        print(f"simulation_lemma {'PASS' if lemma.passed else 'FAIL'} violations={lemma.violations} max_ratio={lemma.max_ratio:.6g}")
        size, samples = grid[0]
        gap = verify_thm2_gap(size, samples, delta, trials or PROP1_TRIALS, rng_fork(root, 4))
        results.append(gap.passed)
        print(f"thm2_gap {'PASS' if gap.passed else 'FAIL'} N={gap.N} n={gap.n} coverage={gap.coverage:.4f}")
        if out_dir is not None:
            write_simulation_lemma_csv(lemma, out_dir / "simulation_lemma.csv")
            write_thm2_gap_csv(gap, out_dir / "thm2_gap.csv")

    return EXIT_OK if all(results) else EXIT_FAILURE


def _parse_label_map(items: Optional[Sequence[str]]) -> Optional[Dict[str, int]]:
    if not items:
        return None
    mapping = {}
    for item in items:
        raw, _, label = item.partition("=")
        if label.strip() not in ("-1", "1", "+1"):
            raise ConfigError(f"label map entry must be RAW=+1 or RAW=-1, got {item!r}")
        mapping[raw.strip()] = int(label)
    return mapping


def cmd_ingest(
    csv_path: str,
    out_path: str,
    label_column=None,
    d_target: int = 30,
    header: bool = True,
    label_map: Optional[Sequence[str]] = None,
) -> int:
    try:
        if d_target < 1:
            raise ConfigError("--d-target must be >= 1")
        points = load_csv(csv_path, label_column=label_column, header=header, label_map=_parse_label_map(label_map))
        processed, report = preprocess_points(points, d_target)
        write_points_csv(processed, out_path)
    except PoisonCtlError as e:
        logger.error("Ingest failed", path=csv_path, error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logger.info(
        "Ingest finished",
        rows=len(processed),
        input_dim=report.input_dim,
        output_dim=report.output_dim,
        pca_applied=report.projection is not None,
        out=out_path,
    )
    print(f"wrote {len(processed)} rows, d={report.output_dim} to {out_path}")
    return EXIT_OK


def _label_column(value: str):
    return int(value) if value.lstrip("-").isdigit() else value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poisonctl", description="Online data-poisoning control simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run every (policy, seed) episode in a config")
    run.add_argument("--config", required=True)
    run.add_argument("--override", action="append", default=[], metavar="KEY=VAL")
    run.add_argument("--parallelism", type=int)
    run.add_argument("--out")
    run.add_argument("--seed", type=int)

    theory = commands.add_parser("theory", help="numerically check the tabular bounds")
    theory.add_argument("--N", type=int)
    theory.add_argument("--n", type=int)
    theory.add_argument("--delta", type=float, default=0.05)
    theory.add_argument("--trials", type=int)
    theory.add_argument("--seed", type=int, default=0)
    theory.add_argument("--out")
    theory.add_argument("--composed", action="store_true")

    ingest = commands.add_parser("ingest", help="normalize a CSV dataset for the dataset environment")
    ingest.add_argument("--csv", required=True)
    ingest.add_argument("--out", required=True)
    ingest.add_argument("--label-column", type=_label_column)
    ingest.add_argument("--label-map", action="append", metavar="RAW=LABEL")
    ingest.add_argument("--header", action=argparse.BooleanOptionalAction, default=True)
    ingest.add_argument("--d-target", type=int, default=30)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    if args.command == "run":
        if args.parallelism is not None and args.parallelism < 1:
            print("error: --parallelism must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        return cmd_run(args.config, args.override, args.parallelism, args.out, args.seed)
    if args.command == "theory":
        return cmd_theory(args.N, args.n, args.delta, args.trials, args.seed, args.out, args.composed)
    return cmd_ingest(args.csv, args.out, args.label_column, args.d_target, args.header, args.label_map)


if __name__ == "__main__":
    sys.exit(main())
