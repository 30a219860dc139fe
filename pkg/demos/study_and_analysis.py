#!/usr/bin/env python3
"""Run a small study and analyze the results.

Produces a results CSV in a temporary directory, then prints the headline
numbers: size summary, raw and transformed correlations, and the selected
variance-stabilizing transforms.
"""

import tempfile
from pathlib import Path

from pbekit import StudyConfig, analyze_records, read_records, run_study


def main():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "results.csv"
        config = StudyConfig(max_steps=4, programs_per_step=15, master_seed=3)
        summary = run_study(config, out)
        print(f"study: {summary['rows']} records, max size "
              f"{summary['max_size']} bytes")

        records = read_records(out)
        report = analyze_records(records)
        print(f"median size:  {report.median_size:.0f} bytes")
        print(f"stddev size:  {report.stddev_size:.1f} bytes")
        for label, pair in (
            ("size vs cases", report.size_vs_cases),
            ("size vs steps", report.size_vs_steps),
        ):
            print(f"{label}: r = {pair.pearson_raw:.3f} raw, "
                  f"{pair.pearson_transformed:.3f} after "
                  f"{pair.y_transform}/{pair.x_transform}")


if __name__ == "__main__":
    main()
