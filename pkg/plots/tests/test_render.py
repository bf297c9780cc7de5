import os

import numpy as np
import pytest

from maxreg_plots import (
    EmptyDataError,
    FigureSpec,
    SchemaError,
    read_artifact,
    render,
)
from maxreg_plots.cli import main


def test_all_four_kinds_render_from_primary_artifacts(artifacts, tmp_path):
    # [SECONDARY] acceptance: every figure kind renders from CSVs produced
    # by the primary runs, and the convergence figure's fitted slope matches
    # the CSV's observed order within 0.05.
    cases = [
        ("convergence", artifacts["convergence"]),
        ("mr_scatter", artifacts["mr_random"]),
        ("energy", artifacts["mr_refine"]),
        ("sqrt_ratio", artifacts["sqrt"]),
    ]
    results = {}
    for kind, csv in cases:
        out = str(tmp_path / f"{kind}.png")
        results[kind] = render(FigureSpec(kind=kind, csv_path=csv,
                                          out_path=out))
        assert os.path.exists(out)
        assert os.path.getsize(out) > 0
        print(f"[PASS] rendered {kind} from {os.path.basename(csv)}")

    _, _, columns = read_artifact(artifacts["convergence"])
    observed = float(columns["observed_order"][-1])
    fitted = results["convergence"].metadata["fitted_slope"]
    assert fitted == pytest.approx(observed, abs=0.05)
    print(f"[PASS] convergence slope {fitted:.3f} matches observed order "
          f"{observed:.3f} within 0.05")


def test_mr_scatter_points_stay_on_or_below_the_line(artifacts, tmp_path):
    out = str(tmp_path / "scatter.png")
    result = render(FigureSpec(kind="mr_scatter",
                               csv_path=artifacts["mr_random"],
                               out_path=out))
    assert result.n_points == 100
    assert result.metadata["points_above_line"] == 0


def test_exact_halving_gives_unit_slope(tmp_path):
    csv = tmp_path / "conv.csv"
    csv.write_text(
        "# schema=convergence-v1\n"
        "n_steps,dt,error,observed_order\n"
        "10,0.1,0.1,nan\n"
        "20,0.05,0.05,1\n"
        "40,0.025,0.025,1\n"
    )
    out = str(tmp_path / "conv.png")
    result = render(FigureSpec(kind="convergence", csv_path=str(csv),
                               out_path=out))
    assert result.metadata["fitted_slope"] == pytest.approx(1.0, abs=1e-12)


def test_empty_data_errors_and_writes_nothing(tmp_path):
    csv = tmp_path / "empty.csv"
    csv.write_text("# schema=convergence-v1\nn_steps,dt,error,observed_order\n")
    out = str(tmp_path / "never.png")
    with pytest.raises(EmptyDataError):
        render(FigureSpec(kind="convergence", csv_path=str(csv),
                          out_path=out))
    assert not os.path.exists(out)


def test_schema_mismatch_names_expected_and_found(tmp_path):
    csv = tmp_path / "wrong.csv"
    csv.write_text("# schema=sweep-v1\ncase,n_steps,theta,error,norm_MR\n"
                   "0,10,1,0.1,1\n")
    out = str(tmp_path / "never.png")
    with pytest.raises(SchemaError) as err:
        render(FigureSpec(kind="convergence", csv_path=str(csv),
                          out_path=out))
    msg = str(err.value)
    assert "convergence-v1" in msg and "sweep-v1" in msg
    assert not os.path.exists(out)


def test_missing_schema_comment_is_rejected(tmp_path):
    csv = tmp_path / "raw.csv"
    csv.write_text("n_steps,dt,error,observed_order\n10,0.1,0.1,nan\n")
    with pytest.raises(SchemaError, match="schema"):
        render(FigureSpec(kind="convergence", csv_path=str(csv),
                          out_path=str(tmp_path / "x.png")))


def test_rendering_is_deterministic(artifacts, tmp_path):
    out1 = str(tmp_path / "a.png")
    out2 = str(tmp_path / "b.png")
    render(FigureSpec(kind="sqrt_ratio", csv_path=artifacts["sqrt"],
                      out_path=out1))
    render(FigureSpec(kind="sqrt_ratio", csv_path=artifacts["sqrt"],
                      out_path=out2))
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_cli_render_roundtrip(artifacts, tmp_path, capsys):
    out = str(tmp_path / "cli.png")
    rc = main(["convergence", artifacts["convergence"], out,
               "--title", "decay study"])
    assert rc == 0
    assert os.path.exists(out)
    assert "wrote" in capsys.readouterr().out


def test_cli_reports_schema_errors(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    csv.write_text("# schema=bounds-v1\nt,lambda\n0,0\n")
    rc = main(["energy", str(csv), str(tmp_path / "x.png")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_input_csv_is_never_modified(artifacts, tmp_path):
    before = open(artifacts["sqrt"], "rb").read()
    render(FigureSpec(kind="sqrt_ratio", csv_path=artifacts["sqrt"],
                      out_path=str(tmp_path / "s.png")))
    assert open(artifacts["sqrt"], "rb").read() == before
