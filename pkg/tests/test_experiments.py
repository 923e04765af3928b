import subprocess
import sys

import pytest

from backhaul_mcp import asymptotics as asy
from backhaul_mcp import experiments as exp
from backhaul_mcp.oblivious import oblivious_rate
from backhaul_mcp.params import (
    Channel,
    Model,
    MonteCarloCfg,
    NumericError,
    Protocol,
    StructureError,
    SystemParams,
    UnsupportedCase,
    ValidationError,
)

SMALL_MC = MonteCarloCfg(n_cells=20, n_trials=40, seed=9)


def test_spec_validation(wyner):
    with pytest.raises(ValidationError):
        exp.SweepSpec(("oblivious",), "beta", wyner, (0.1,))
    with pytest.raises(ValidationError):
        exp.SweepSpec(("fastest",), "alpha", wyner, (0.1,))
    with pytest.raises(ValidationError):
        exp.SweepSpec((), "alpha", wyner, (0.1,))
    with pytest.raises(ValidationError):
        exp.SweepSpec(("oblivious",), "alpha", wyner, ())
    with pytest.raises(ValidationError):
        exp.SweepSpec(("oblivious",), "alpha", wyner, (0.5, 0.2))
    with pytest.raises(ValidationError):
        exp.SweepSpec(("oblivious",), "alpha", wyner, (0.5, 1.5))


def test_single_point_one_row_per_scheme(wyner):
    spec = exp.SweepSpec(exp.MAIN_SCHEMES, "c_bits", wyner, (3.0,))
    rows = exp.run_sweep(spec)
    assert [r.scheme for r in rows] == list(exp.MAIN_SCHEMES)
    by = {r.scheme: r.rate for r in rows}
    assert by["oblivious"] == pytest.approx(oblivious_rate(wyner).rate)
    assert by["cutset"] == 3.0
    assert all(r.wall_ms is None for r in rows)


def test_sweep_rows_ordered_by_axis(sh):
    grid = (0.0, 0.25, 0.5, 1.0)
    rows = exp.run_sweep(exp.SweepSpec(("oblivious", "unlimited"), "alpha", sh, grid))
    assert [r.axis for r in rows] == [x for x in grid for _ in range(2)]


def test_fig2_shape():
    rows = exp.figure_rows(2)
    assert len(rows) == 21 * len(exp.MAIN_SCHEMES)
    assert {r.scheme for r in rows} == set(exp.MAIN_SCHEMES)
    assert not any(r.error for r in rows)


def test_rayleigh_multi_protocol_dataset(tmp_path):
    base = SystemParams(model=Model.WYNER, alpha=0.5, p=10.0, c_backhaul=3.0,
                        channel=Channel.RAYLEIGH)
    rows = []
    for label, over in exp.FADING_SERIES:
        spec = exp.SweepSpec(("unlimited", "oblivious"), "c_bits", base.with_(**over),
                             (1.0, 3.0), SMALL_MC, label)
        rows += exp.run_sweep(spec)
    names = {r.scheme for r in rows}
    assert names == {f"{s}:{n}" for s in ("tdma", "wb_k5", "wb_kinf") for n in ("unlimited", "oblivious")}
    assert not any(r.error for r in rows)
    mc_rows = [r for r in rows if r.scheme.startswith("wb_k5")]
    assert all(r.uncertainty > 0 for r in mc_rows)


def test_error_rows_do_not_stop_the_run(wyner):
    # zero backhaul has no finite low-SNR characterization
    spec = exp.SweepSpec(("oblivious", "lowsnr_affine"), "c_bits", wyner, (0.0, 1.0))
    rows = exp.run_sweep(spec)
    assert rows[1].error == "validation" and rows[1].rate is None
    assert rows[0].rate == 0.0 and rows[2].rate > 0 and rows[3].rate > 0
    text = exp.csv_text(rows)
    assert "ERR:validation" in text.splitlines()[2]


@pytest.mark.parametrize("exc,code", [
    (StructureError("x"), "structure"),
    (ValidationError("x"), "validation"),
    (UnsupportedCase("x"), "unsupported"),
    (NumericError("x"), "numeric"),
    (ZeroDivisionError("x"), "numeric"),
])
def test_error_codes(exc, code):
    assert exp.error_code(exc) == code


def test_error_code_reraises_unknown():
    with pytest.raises(KeyError):
        exp.error_code(KeyError("bug"))


def test_unsupported_functional_falls_back_to_montecarlo():
    q = SystemParams(model=Model.WYNER, alpha=0.5, channel=Channel.RAYLEIGH, protocol=Protocol.TDMA)
    assert exp.rate_functional(q, SMALL_MC).stochastic


def test_reruns_are_byte_identical():
    base = SystemParams(model=Model.SOFT_HANDOFF, alpha=0.5, p=10.0, k_users=3, c_backhaul=2.0,
                        channel=Channel.RAYLEIGH)
    spec = exp.SweepSpec(exp.MAIN_SCHEMES, "alpha", base, (0.2, 0.6), SMALL_MC)
    first = exp.csv_text(exp.run_sweep(spec))
    assert exp.csv_text(exp.run_sweep(spec)) == first


def test_parallel_matches_serial(wyner):
    spec = exp.SweepSpec(("oblivious", "local_decoding"), "alpha", wyner, (0.1, 0.4, 0.7, 1.0))
    assert exp.csv_text(exp.run_sweep(spec, jobs=2)) == exp.csv_text(exp.run_sweep(spec))


def test_timing_column(wyner):
    rows = exp.run_sweep(exp.SweepSpec(("oblivious",), "alpha", wyner, (0.4,)), timing=True)
    assert rows[0].wall_ms is not None and rows[0].wall_ms >= 0


def test_csv_format_round_trip(tmp_path, wyner):
    rows = exp.run_sweep(exp.SweepSpec(("unlimited", "oblivious"), "p_db", wyner, (-10.0, 10.0)))
    path = tmp_path / "out.csv"
    path.write_text(exp.csv_text(rows))
    back = exp.read_csv(path)
    assert list(back[0]) == list(exp.HEADER)
    for row, parsed in zip(rows, back):
        assert parsed["rate_bits"] == f"{row.rate:.9g}"
        assert float(parsed["rate_bits"]) == pytest.approx(row.rate, rel=1e-8)


def test_eb_n0_axis_inverts_power():
    base = SystemParams(model=Model.WYNER, alpha=0.2, c_backhaul=2.0)
    spec = exp.SweepSpec(("oblivious",), "eb_n0_db", base, (-2.0, 0.0, 3.0))
    rows = exp.run_sweep(spec)
    eb_min_db = asy.lowsnr_oblivious(asy.lowsnr_unlimited(base), 2.0).eb_n0_min_db
    assert eb_min_db > -2.0
    assert rows[0].rate == 0.0
    for row in rows[1:]:
        # recover P from the row: P = R * Eb/N0
        p = row.rate * asy.from_db(row.axis)
        assert oblivious_rate(base.with_(p=p)).rate == pytest.approx(row.rate, rel=1e-8)


def test_affine_rows_on_eb_n0_axis():
    base = SystemParams(model=Model.WYNER, alpha=0.2, c_backhaul=4.0)
    rows = exp.run_sweep(exp.SweepSpec(("lowsnr_affine",), "eb_n0_db", base, (0.0, 2.0)))
    char = asy.lowsnr_oblivious(asy.lowsnr_unlimited(base), 4.0)
    assert [r.rate for r in rows] == pytest.approx(list(asy.affine_lowsnr_curve(char, (0.0, 2.0))))


# -- figure recipes -------------------------------------------------------------

RECIPES = {
    # fig: (axis, alpha, p_db, c_bits, channel)
    2: ("alpha", None, 10.0, 3.0, Channel.GAUSSIAN),
    3: ("alpha", None, 10.0, 6.0, Channel.GAUSSIAN),
    4: ("alpha", None, 10.0, 3.0, Channel.RAYLEIGH),
    5: ("alpha", None, 10.0, 6.0, Channel.RAYLEIGH),
    6: ("p_db", 0.15, None, 6.0, Channel.GAUSSIAN),
    7: ("p_db", 0.15, None, 6.0, Channel.RAYLEIGH),
    8: ("c_bits", 0.4, 10.0, None, Channel.GAUSSIAN),
    9: ("c_bits", 0.4, 10.0, None, Channel.RAYLEIGH),
    10: ("eb_n0_db", 0.2, None, 2.0, Channel.GAUSSIAN),
    11: ("eb_n0_db", 0.2, None, 4.0, Channel.GAUSSIAN),
    12: ("eb_n0_db", 0.2, None, 6.0, Channel.GAUSSIAN),
}


@pytest.mark.parametrize("fig_id", sorted(RECIPES))
def test_figure_bindings(fig_id):
    axis, alpha, p_db, c_bits, channel = RECIPES[fig_id]
    recipe = exp.FIGURES[fig_id]
    assert recipe.axis == axis and recipe.channel is channel
    if alpha is not None:
        assert recipe.alpha == alpha
    if p_db is not None:
        assert recipe.p_db == p_db
    if c_bits is not None:
        assert recipe.c_bits == c_bits
    assert recipe.base().model is Model.WYNER
    labels = [label for label, _ in recipe.series]
    assert labels == (["tdma", "wb_k5", "wb_kinf"] if channel is Channel.RAYLEIGH else [""])
    expected = exp.LOWSNR_SCHEMES if axis == "eb_n0_db" else exp.MAIN_SCHEMES
    assert recipe.schemes == expected
    for spec in recipe.specs(SMALL_MC):
        assert spec.axis == axis and spec.mc == SMALL_MC


def test_figure_rejects_unknown_id():
    with pytest.raises(ValidationError):
        exp.figure_rows(13)


def test_run_figure_writes_csv_script_and_png(tmp_path):
    paths = exp.run_figure(8, tmp_path, render=True)
    assert paths["csv"].name == "fig08.csv"
    script = paths["script"].read_text()
    assert "fig08.csv" in script and "render_csv" in script
    assert paths["png"].stat().st_size > 1000
    rows = exp.read_csv(paths["csv"])
    assert {r["scheme"] for r in rows} == set(exp.MAIN_SCHEMES)
    assert "alpha=0.4" in exp.figure_title(exp.FIGURES[8])


def test_plot_script_runs(tmp_path):
    paths = exp.run_figure(6, tmp_path)
    subprocess.run([sys.executable, str(paths["script"])], check=True, cwd=tmp_path)
    assert (tmp_path / "fig06.png").stat().st_size > 1000


def test_plot_loader_skips_error_rows(tmp_path, wyner):
    from backhaul_mcp.plotting import load_series

    rows = exp.run_sweep(exp.SweepSpec(("lowsnr_affine",), "c_bits", wyner, (0.0, 1.0)))
    path = tmp_path / "x.csv"
    path.write_text(exp.csv_text(rows))
    series = load_series(path)
    assert series["lowsnr_affine"][0] == [1.0]


def test_figure_upper_bound_column_dominates():
    rows = exp.figure_rows(11)
    table = {}
    for r in rows:
        table.setdefault(r.axis, {})[r.scheme] = r.rate
    for x, vals in table.items():
        for name in ("oblivious", "local_decoding"):
            assert vals[name] <= vals["cutset"] + 1e-9
        assert vals["oblivious"] <= vals["unlimited"] + 1e-9
