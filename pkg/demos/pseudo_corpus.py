"""
End-to-end command-line run on a corpus of sparse graphs of mixed size.

Four groups (modular, homogeneous sparse, core-periphery and ego-like
networks) with 350 to 4000 nodes each are written to disk, then clustered
from the edge lists with eighth-order log moments. Equivalent shell:

    netclust simulate demos/configs/pseudo_corpus.json corpus
    netclust cluster corpus/manifest.csv --method nclm --J 8 --K 4 --out corpus/nclm
"""
import json
import sys
import tempfile
from pathlib import Path

from netclust.cli import main as netclust

HERE = Path(__file__).parent


def main(workdir=None):
    work = Path(workdir or tempfile.mkdtemp(prefix="netclust-corpus-"))
    config = HERE / "configs" / "pseudo_corpus.json"
    if netclust(["simulate", str(config), str(work)]):
        sys.exit("simulate failed")
    code = netclust(["cluster", str(work / "manifest.csv"), "--method", "nclm", "--J", "8",
                     "--K", "4", "--out", str(work / "nclm")])
    if code:
        sys.exit(f"cluster failed with exit code {code}")
    summary = json.loads((work / "nclm" / "summary.json").read_text())
    print(f"\n{summary['T']} graphs, error {summary['error']:.3f}; outputs in {work / 'nclm'}")


if __name__ == "__main__":
    main(*sys.argv[1:])
