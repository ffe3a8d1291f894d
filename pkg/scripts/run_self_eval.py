"""Forge a scenario, build ground truth, and run the self-mode evaluation.

Self mode feeds each ground-truth artifact back through the scorer, so
every row should sit at 1.000; anything lower points at a consistency
bug between the forge and the analysis modules.

Usage: python scripts/run_self_eval.py [--seed 7] [--noise 500] [--out-dir out/self-eval]
"""

import argparse
from pathlib import Path

from ftleval import forge, harness
from ftleval.timeline import read_timeline


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--noise", type=int, default=500)
    parser.add_argument("--out-dir", default="out/self-eval")
    parser.add_argument("--single-type", default="last-shutdown")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    result = forge.forge(forge.default_scenario(seed=args.seed, noise_rows=args.noise))
    forge.write_forge_outputs(result, out_dir / "scenario")

    timeline = read_timeline(out_dir / "scenario" / "timeline.csv")
    truth_dir = out_dir / "scenario" / "truth"
    single = harness.gen_ground_truth(
        "summarize", timeline, event_type=args.single_type
    )
    for name, text in single.items():
        (truth_dir / name).write_text(text, encoding="utf-8")

    config = harness.HarnessConfig()
    rows = harness.run_all(
        config,
        "self",
        timeline,
        truth_dir,
        out_dir / "run",
        single_type=args.single_type,
    )
    text, document = harness.report(rows)
    (out_dir / "run" / "report.txt").write_text(text, encoding="utf-8")
    (out_dir / "run" / "report.json").write_text(document, encoding="utf-8")
    print(text, end="")


if __name__ == "__main__":
    main()
