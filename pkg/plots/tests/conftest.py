"""Generate CSV artifacts for the figure tests by driving the maxreg CLI.

The plots package consumes the solver package only through its external
interfaces: the command line and the documented CSV schemas.
"""

import subprocess
import sys

import pytest

SCALAR_CFG = """
[form]
kind = scalar
g = 1
T = 1.0

[initial]
u0 = 1
"""

ROBIN_CFG = """
[form]
kind = robin1d
n_elements = 8
beta = 1 + t
beta_lipschitz = 1
T = 1.0

[source]
f = 1

[initial]
u0 = x

[run]
steps = 16
"""


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "maxreg.cli", *args],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    base = tmp_path_factory.mktemp("artifacts")
    scalar_cfg = base / "scalar.cfg"
    scalar_cfg.write_text(SCALAR_CFG)
    robin_cfg = base / "robin.cfg"
    robin_cfg.write_text(ROBIN_CFG)

    conv = base / "conv.csv"
    run_cli("convergence", "--config", str(scalar_cfg),
            "--refinements", "10,20,40,80", "--out", str(conv))

    mr_random = base / "mr_random.csv"
    run_cli("verify-mr", "--random", "100", "--seed", "7",
            "--out", str(mr_random))

    mr_refine = base / "mr_refine.csv"
    run_cli("verify-mr", "--config", str(robin_cfg), "--refinements", "4",
            "--out", str(mr_refine))

    sqrt_csv = base / "sqrt.csv"
    run_cli("sqrt-probe", "--config", str(robin_cfg),
            "--refinements", "8,16,32,64", "--out", str(sqrt_csv))

    return {
        "convergence": str(conv),
        "mr_random": str(mr_random),
        "mr_refine": str(mr_refine),
        "sqrt": str(sqrt_csv),
        "dir": str(base),
    }
