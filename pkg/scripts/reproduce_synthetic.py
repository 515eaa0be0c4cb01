import csv
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from main import main  # noqa: E402

REFERENCE = {"null": 3643.0, "greedy": 3372.0, "nlp": 1265.0, "clairvoyant": 1256.0}


def reproduce(out_dir: str = "results/synthetic_1d", parallelism: int = 4) -> int:
    code = main(["run", "--config", str(ROOT / "configs" / "synthetic_1d.cfg"), "--out", out_dir,
                 "--parallelism", str(parallelism)])
    if code != 0:
        return code

    with open(Path(out_dir) / "summary.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    print("\npolicy        Jtilde(T)   reference   rel.diff")
    for row in rows:
        value = float(row["Jtilde_T"])
        reference = REFERENCE[row["policy"]]
        print(f"{row['policy']:<12}{value:>10.1f}{reference:>12.1f}{(value - reference) / reference:>+11.1%}")
    return 0


if __name__ == "__main__":
    sys.exit(reproduce(*sys.argv[1:2]))
