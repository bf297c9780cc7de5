import os

import numpy as np
import pytest

from maxreg.cli import main


SCALAR_CFG = """
[form]
kind = scalar
g = 1
T = 1.0

[initial]
u0 = 1

[run]
steps = 40
theta = 1.0
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
steps = 32
"""

PIECEWISE_CFG = """
[form]
kind = piecewise
base_kind = scalar
breakpoints = 0 0.5 1
values = 1 | 2
T = 1.0

[initial]
u0 = 1
"""

NLCP_CFG = ROBIN_CFG + """
[quasilinear]
m = clip(1 + xi^2, 0.1, 10)
delta_m = 0.1
"""


@pytest.fixture
def scalar_cfg(tmp_path):
    path = tmp_path / "scalar.cfg"
    path.write_text(SCALAR_CFG)
    return str(path)


@pytest.fixture
def robin_cfg(tmp_path):
    path = tmp_path / "robin.cfg"
    path.write_text(ROBIN_CFG)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        schema = fh.readline().strip()
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return schema, header, rows


def read_summary(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.partition(" = ")
            out[key.strip()] = value.strip()
    return out


def test_convergence_on_the_analytic_decay_problem(scalar_cfg, tmp_path):
    out = str(tmp_path / "conv.csv")
    rc = main(["convergence", "--config", scalar_cfg,
               "--refinements", "10,20,40,80", "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=convergence-v1"
    assert header == ["n_steps", "dt", "error", "observed_order"]
    assert len(rows) == 4
    final_order = float(rows[-1][3])
    assert 0.8 <= final_order <= 1.2
    summary = read_summary(str(tmp_path / "conv.summary"))
    assert summary["errors_decreasing"] == "true"


def test_verify_bounds_on_constant_symmetric_form(tmp_path):
    cfg = tmp_path / "const.cfg"
    cfg.write_text("""
[form]
kind = constant
a1 = 2  2 0.5  0.5 3
T = 1.0
""")
    out = str(tmp_path / "bounds.csv")
    rc = main(["verify-bounds", "--config", str(cfg), "--times", "0,1",
               "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=bounds-v1"
    assert header == ["t", "lambda", "bound_name", "measured", "ceiling", "pass"]
    assert all(row[5] == "true" for row in rows)


def test_solve_writes_trajectory_and_summary(robin_cfg, tmp_path):
    out = str(tmp_path / "traj.csv")
    rc = main(["solve", "--config", robin_cfg, "--steps", "16", "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=trajectory-v1"
    assert header[0] == "t"
    assert len(rows) == 17
    assert len(header) == 1 + 2 * 9
    summary = read_summary(str(tmp_path / "traj.summary"))
    assert float(summary["final_norm_H"]) > 0


def test_solve_output_is_deterministic(robin_cfg, tmp_path):
    out1 = str(tmp_path / "a.csv")
    out2 = str(tmp_path / "b.csv")
    assert main(["solve", "--config", robin_cfg, "--out", out1]) == 0
    assert main(["solve", "--config", robin_cfg, "--out", out2]) == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_verify_mr_random_suite_is_deterministic(tmp_path):
    out1 = str(tmp_path / "mr1.csv")
    out2 = str(tmp_path / "mr2.csv")
    rc1 = main(["verify-mr", "--random", "3", "--seed", "5", "--out", out1])
    rc2 = main(["verify-mr", "--random", "3", "--seed", "5", "--out", out2])
    assert rc1 == rc2 == 0
    assert open(out1, "rb").read() == open(out2, "rb").read()
    summary = read_summary(str(tmp_path / "mr1.summary"))
    assert summary["all_satisfied"] == "true"


def test_verify_mr_refinement_mode(robin_cfg, tmp_path):
    out = str(tmp_path / "mr.csv")
    rc = main(["verify-mr", "--config", robin_cfg, "--refinements", "3",
               "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=mr-refinement-v1"
    assert header == ["n_steps", "norm_MR", "apriori_C", "rhs", "satisfied",
                      "energy_residual", "sup_V_norm"]
    assert len(rows) == 3
    assert rows[-1][4] == "true"


def test_spacetime_command(scalar_cfg, tmp_path):
    out = str(tmp_path / "st.csv")
    rc = main(["spacetime", "--config", scalar_cfg, "--cells", "16",
               "--out", out])
    assert rc == 0
    summary = read_summary(str(tmp_path / "st.summary"))
    assert float(summary["initial_value_V_gap"]) <= 1e-10


def test_glue_command(tmp_path):
    cfg = tmp_path / "pw.cfg"
    cfg.write_text(PIECEWISE_CFG)
    out = str(tmp_path / "glued.csv")
    rc = main(["glue", "--config", str(cfg), "--steps-per-piece", "40",
               "--out", out])
    assert rc == 0
    _, header, rows = read_csv(out)
    final = float(rows[-1][1])
    assert final == pytest.approx(np.exp(-1.5), abs=0.5 * (0.5 / 40))


def test_glue_rejects_single_forms(scalar_cfg, tmp_path, capsys):
    rc = main(["glue", "--config", scalar_cfg,
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "piecewise" in capsys.readouterr().err


def test_quasilinear_command(tmp_path):
    cfg = tmp_path / "nlcp.cfg"
    cfg.write_text(NLCP_CFG)
    out = str(tmp_path / "nlcp.csv")
    rc = main(["quasilinear", "--config", str(cfg), "--steps", "32",
               "--tol", "1e-9", "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=quasilinear-v1"
    assert header == ["iter", "distance", "sub_mr_norm", "apriori_satisfied"]
    summary = read_summary(str(tmp_path / "nlcp.summary"))
    assert summary["converged"] == "true"
    assert float(summary["residual"]) <= 1e-8
    assert os.path.exists(str(tmp_path / "nlcp_traj.csv"))


def test_sweep_command_with_jobs(scalar_cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    rc = main(["sweep", "--config", scalar_cfg, "--steps-list", "10,20",
               "--theta-list", "0.5,1.0", "--jobs", "2", "--out", out])
    assert rc == 0
    _, _, rows = read_csv(out)
    assert len(rows) == 4
    assert [r[0] for r in rows] == ["0", "1", "2", "3"]


def test_out_may_be_a_directory(scalar_cfg, tmp_path):
    out_dir = str(tmp_path / "artifacts") + os.sep
    rc = main(["solve", "--config", scalar_cfg, "--out", out_dir])
    assert rc == 0
    assert os.path.exists(os.path.join(out_dir, "traj.csv"))
    assert os.path.exists(os.path.join(out_dir, "traj.summary"))


def test_sqrt_probe_command(robin_cfg, tmp_path):
    out = str(tmp_path / "sqrt.csv")
    rc = main(["sqrt-probe", "--config", robin_cfg,
               "--refinements", "8,16,32", "--out", out])
    assert rc == 0
    schema, header, rows = read_csv(out)
    assert schema == "# schema=sqrt-ratio-v1"
    assert header == ["n", "r_upper", "r_lower", "route"]
    assert len(rows) == 3
    summary = read_summary(str(tmp_path / "sqrt.summary"))
    assert float(summary["spread"]) <= 4.0


def test_config_errors_exit_2_with_diagnostic(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[form]\nkind = nosuch\nT = 1\n")
    rc = main(["solve", "--config", str(cfg),
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "error:" in err and "nosuch" in err


def test_missing_config_file_is_reported(tmp_path, capsys):
    rc = main(["solve", "--config", str(tmp_path / "none.cfg"),
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "not found" in capsys.readouterr().err
