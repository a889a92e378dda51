"""
Four planted-partition settings at two graph sizes, clustered by setting.

The graphs differ in size, so no node correspondence is available and only
the size-free summaries apply: log moments, top eigenvalues and six graph
statistics. The script also prints the relative eigengap for each moment
order ``J``, which is what the ``tune`` subcommand uses to pick ``J``.

Takes about a minute per seed.

    python demos/theta_suite.py
"""
from pathlib import Path

from netclust.evaluation import compare_report, load_config, run_scenario

HERE = Path(__file__).parent


def main():
    cfg = load_config(HERE / "configs" / "theta_suite.toml")
    report = run_scenario(cfg)
    print(compare_report([report]).to_text())
    print()
    print(" J   gap       t")
    for row in report["gaps"]:
        mark = "  <- chosen" if row["chosen"] else ""
        print(f"{row['J']:2d}  {row['gap']:8.3f}  {row['t']:.4g}{mark}")
    for cell in report["cells"]:
        if cell["method"] == "nclm":
            print(f"\nmoment stage: {cell['time']['featurize']:.1f}s for "
                  f"{report['generation'][0]['graphs']} graphs")


if __name__ == "__main__":
    main()
