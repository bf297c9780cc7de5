import numpy as np
import pytest

import maxreg as mx
from maxreg.config import (
    ConfigError,
    ExperimentConfig,
    format_matrix_text,
    load_config,
    parse_config_text,
    parse_matrix_text,
)


def make_cfg(text, tmp_path=None):
    return ExperimentConfig(sections=parse_config_text(text))


def test_parse_sections_keys_and_comments():
    text = """
    # leading comment
    [form]
    kind = scalar   # inline comment
    g = 1 + t

    [run]
    steps = 20
    """
    sections = parse_config_text(text)
    assert sections["form"]["kind"] == "scalar"
    assert sections["form"]["g"] == "1 + t"
    assert sections["run"]["steps"] == "20"


def test_parse_reports_line_numbers():
    with pytest.raises(ConfigError, match=":3:"):
        parse_config_text("[form]\nkind = scalar\nbroken line\n", source="x")
    with pytest.raises(ConfigError, match="outside"):
        parse_config_text("key = 1\n")


def test_matrix_text_roundtrip():
    mat = np.array([[1.0, 0.25], [0.25, 2.0]])
    text = format_matrix_text(mat)
    assert text.split()[0] == "2"
    assert parse_matrix_text(text) == pytest.approx(mat)


def test_matrix_text_errors():
    with pytest.raises(ConfigError, match="entries"):
        parse_matrix_text("2 1 0 0")
    with pytest.raises(ConfigError, match="empty"):
        parse_matrix_text("  ")


def test_matrix_file_roundtrip_and_config_reference(tmp_path):
    from maxreg.config import read_matrix, write_matrix

    mat = np.array([[2.0, -1.0], [-1.0, 2.0]])
    path = tmp_path / "gram.txt"
    write_matrix(str(path), mat)
    assert read_matrix(str(path)) == pytest.approx(mat)

    cfg_path = tmp_path / "c.cfg"
    cfg_path.write_text(
        "[form]\nkind = constant\na1_file = gram.txt\nT = 1.0\n"
    )
    cfg = load_config(str(cfg_path))
    form = cfg.build_form()
    assert form.a1_matrix(0.0) == pytest.approx(mat)

    cfg_path.write_text(
        "[form]\nkind = constant\na1_file = missing.txt\nT = 1.0\n"
    )
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(cfg_path)).build_form()


def test_build_scalar_form_and_problem():
    cfg = make_cfg("""
    [form]
    kind = scalar
    g = 1 + t
    g_min = 1
    g_max = 2
    g_lipschitz = 1
    T = 1.0

    [initial]
    u0 = 1
    """)
    problem = cfg.build_problem()
    assert problem.dim == 1
    assert problem.u0 == pytest.approx([1.0])
    a1, _ = mx.assemble(problem.form, 1.0)
    assert a1 == pytest.approx(np.array([[2.0]]))


def test_build_robin_form_with_per_endpoint_expressions():
    cfg = make_cfg("""
    [form]
    kind = robin1d
    n_elements = 8
    beta0 = t
    beta1 = 1 + t
    beta_lipschitz = 1
    T = 1.0

    [initial]
    u0 = x * x
    """)
    form = cfg.build_form()
    assert form.triple.dim == 9
    a1_0 = form.a1_matrix(0.0)
    a1_1 = form.a1_matrix(1.0)
    assert a1_1[0, 0] - a1_0[0, 0] == pytest.approx(1.0)
    u0 = cfg.build_initial(form)
    assert u0 == pytest.approx(np.linspace(0, 1, 9) ** 2)


def test_build_robin_with_beta_table():
    cfg = make_cfg("""
    [form]
    kind = robin1d
    n_elements = 4
    beta_table = 0:0, 0.5:1, 1:1
    T = 1.0
    """)
    form = cfg.build_form()
    assert form.a1_matrix(0.25)[0, 0] - form.a1_matrix(0.0)[0, 0] == \
        pytest.approx(0.5)


def test_build_constant_form_from_inline_matrix():
    cfg = make_cfg("""
    [form]
    kind = constant
    a1 = 2  2 0.5  0.5 3
    T = 1.0
    """)
    form = cfg.build_form()
    assert form.a1_matrix(0.3) == pytest.approx(np.array([[2.0, 0.5], [0.5, 3.0]]))


def test_build_piecewise_scalar_values():
    cfg = make_cfg("""
    [form]
    kind = piecewise
    base_kind = scalar
    breakpoints = 0 0.5 1
    values = 1 | 2
    T = 1.0
    """)
    pw = cfg.build_form()
    assert isinstance(pw, mx.PiecewiseForm)
    assert pw.piece_at(0.25).a1_matrix(0.25) == pytest.approx(np.array([[1.0]]))
    assert pw.piece_at(0.75).a1_matrix(0.75) == pytest.approx(np.array([[2.0]]))


def test_build_piecewise_robin_boundary_jump():
    cfg = make_cfg("""
    [form]
    kind = piecewise
    base_kind = robin1d
    n_elements = 4
    breakpoints = 0 0.5 1
    values = 0 | 1
    beta_lipschitz = 0
    T = 1.0
    """)
    pw = cfg.build_form()
    assert isinstance(pw, mx.PiecewiseForm)
    before = pw.piece_at(0.25).a1_matrix(0.25)
    after = pw.piece_at(0.75).a1_matrix(0.75)
    assert after[0, 0] - before[0, 0] == pytest.approx(1.0)
    problem = mx.make_problem(pw, np.linspace(0, 1, 5))
    traj = mx.solve_glued(problem, 8, theta=1.0)
    assert np.all(np.isfinite(traj.states))


def test_build_perturbation_kinds():
    base = """
    [form]
    kind = scalar
    g = 1
    T = 1.0
    """
    cfg = make_cfg(base + "\n[perturbation]\nkind = identity\n")
    form = cfg.build_form()
    pert = cfg.build_perturbation(form)
    assert pert.beta0 == pert.beta1 == 1.0

    cfg = make_cfg(base + "\n[perturbation]\nkind = constant\nmatrix = 1 2\n")
    pert = cfg.build_perturbation(cfg.build_form())
    assert pert.beta0 == pytest.approx(2.0)

    cfg = make_cfg(base + "\n[perturbation]\nkind = expression\nb = 1 + t\n")
    pert = cfg.build_perturbation(cfg.build_form())
    assert pert.matrix(0.5) == pytest.approx(np.array([[1.5]]))


def test_build_source_expression_and_vector_initial():
    cfg = make_cfg("""
    [form]
    kind = constant
    a1 = 2  1 0  0 1
    T = 1.0

    [source]
    f = exp(-t)

    [initial]
    u0 = 0.5 -0.5
    """)
    form = cfg.build_form()
    f = cfg.build_source(form)
    assert f(0.0) == pytest.approx([1.0, 1.0])
    assert cfg.build_initial(form) == pytest.approx([0.5, -0.5])
    with pytest.raises(ConfigError, match="entries"):
        cfg2 = make_cfg("""
        [form]
        kind = constant
        a1 = 2  1 0  0 1
        T = 1.0

        [initial]
        u0 = 1 2 3
        """)
        cfg2.build_initial(cfg2.build_form())


def test_unknown_kind_and_missing_keys_error():
    with pytest.raises(ConfigError, match="unknown form.kind"):
        make_cfg("[form]\nkind = cubefem\n").build_form()
    with pytest.raises(ConfigError, match="missing"):
        make_cfg("[run]\nsteps = 2\n").build_form()


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/path.cfg")
