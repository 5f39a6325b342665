"""
CLI workflows and out-of-process models
=======================================

Everything in the library is reachable from the `fairprobe` command. Model
references are either native model files (fairprobe-model-v1) or
`external:<launch command>` for a child process speaking the line-delimited
JSON protocol, which lets you audit classifiers living in another process
or another ML stack (see the fairprobe-adapter package).
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from fairprobe import PlantedBiasSpec, make_planted, save_domain, save_model
from fairprobe.domain import InputDomain, ParameterSpec

work = Path(tempfile.mkdtemp(prefix="fairprobe-demo-"))
print(f"working in {work}\n")

domain = InputDomain([
    ParameterSpec("a", 0, 0, 999),
    ParameterSpec("b", 1, 0, 999),
    ParameterSpec("g", 2, 0, 1, protected=True),
])
save_domain(domain, str(work / "domain.txt"))
model = make_planted(domain, PlantedBiasSpec(region={1: (0, 49)}, biased_protected_value=1))
save_model(model, str(work / "subject.model"))


def cli(*args):
    cmd = [sys.executable, "-m", "fairprobe.cli", *[str(a) for a in args]]
    print("$ fairprobe " + " ".join(str(a) for a in args))
    subprocess.run(cmd, check=True)
    print()


cli(
    "audit", "--domain-file", work / "domain.txt", "--model-ref", work / "subject.model",
    "--strategy", "fully_directed", "--global-trials", "1000", "--local-trials", "2000",
    "--max-inputs", "3000", "--seed", "6", "--report-out", work / "audit.json",
)

cli(
    "estimate", "--domain-file", work / "domain.txt", "--model-ref", work / "subject.model",
    "--m", "500", "--K", "40", "--seed", "1", "--report-out", work / "estimate.json",
)

cli(
    "compare", "--domain-file", work / "domain.txt", "--model-ref", work / "subject.model",
    "--seeds", "6,7,8", "--budget", "4000", "--report-out", work / "compare.json",
)

# Auditing an out-of-process model works the same way; the model reference
# becomes the launch command. With the adapter package installed:
#
#   fairprobe audit --domain-file domain.txt \
#       --model-ref "external:fairprobe-adapter --model sklearn:decision_tree --train data.csv --seed 0" \
#       --strategy fully_directed --global-trials 1000 --local-trials 2000 \
#       --seed 6 --report-out audit.json
print("reports written to", work)
