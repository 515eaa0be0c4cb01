import csv
import json
from pathlib import Path
from typing import List, Sequence, Union

from harness.episode_runner import EpisodeTrace
from models import EpisodeSummary, RunConfigFile

SUMMARY_COLUMNS = ["policy", "seed", "T", "Jtilde_T", "wall_seconds"]


def _fmt(value: float) -> str:
    # shortest round-trip representation
    return repr(float(value))


def trace_filename(trace: EpisodeTrace) -> str:
    return f"trace_{trace.policy.value}_seed{trace.seed}.csv"


def trace_header(trace: EpisodeTrace) -> List[str]:
    first = trace.steps[0]
    return (
        ["t", "g", "Jtilde", "perturb_norm"]
        + [f"theta{j}" for j in range(first.theta.values.size)]
        + [f"z{j}" for j in range(first.z.dim)]
        + [f"a{j}" for j in range(first.a.dim)]
    )


def write_trace_csv(trace: EpisodeTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(trace_header(trace))
        for step in trace.steps:
            writer.writerow(
                [str(step.t), _fmt(step.g), _fmt(step.jtilde), _fmt(step.perturb_norm)]
                + [_fmt(v) for v in step.theta.flatten()]
                + [_fmt(v) for v in step.z.features]
                + [_fmt(v) for v in step.a.features]
            )
    return path


def read_trace_csv(path: Union[str, Path]) -> List[dict]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def write_summary_csv(summaries: Sequence[EpisodeSummary], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            jtilde = _fmt(s.jtilde_T) if s.jtilde_T is not None else "nan"
            writer.writerow([s.policy.value, str(s.seed), str(s.T), jtilde, _fmt(s.wall_seconds)])
    return path


def write_manifest(
    config: RunConfigFile, traces: Sequence[EpisodeTrace], path: Union[str, Path]
) -> Path:
    """Resolved config plus the realized theta0 and attack reference per episode.

    The `config` entry loads back as a run config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    episodes = []
    for trace in traces:
        goal = trace.cost.nefarious
        reference = getattr(goal, "target", None) or getattr(goal, "anchor", None)
        episodes.append(
            {
                "policy": trace.policy.value,
                "seed": trace.seed,
                "theta0": trace.theta0.values.tolist(),
                "reference": reference.values.tolist() if reference is not None else None,
            }
        )
    document = {"config": config.model_dump(mode="json", by_alias=True), "episodes": episodes}
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return path
