"""End-to-end checks of the command-line interface.

Everything runs in-process through ``main(argv)``; stdout/stderr are
captured with capsys.  Format contracts (metadata block, 17-digit
floats, byte determinism) are asserted on the emitted text itself.
"""

import json
import math

import numpy as np
import pytest

from lhsphere import rays
from lhsphere.cli import main
from lhsphere.core import Medium


def run_cli(argv, capsys, expect=0):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse's own usage failures
        code = exc.code
    out, err = capsys.readouterr()
    assert code == expect, f"exit {code}, stderr: {err}"
    return out, err


def parse_csv(text):
    meta, header, rows = {}, None, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


RATES_SMALL = ["rates", "--eps1", "-4", "--mu1", "-1.05",
               "--ka-min", "0.5", "--ka-max", "1.0", "--steps", "3",
               "--rho", "1.001"]


def test_rates_csv_schema(capsys):
    out, err = run_cli(RATES_SMALL, capsys)
    meta, header, rows = parse_csv(out)
    assert meta["command"] == "rates"
    assert meta["eps1"] == "-4+0j"
    assert meta["tool"].startswith("lhsphere ")
    assert "timestamp" not in meta and "date" not in meta
    assert header == ["ka", "gamma_e1_radial", "gamma_e1_tangential",
                      "gamma_m1_radial", "gamma_m1_tangential"]
    assert len(rows) == 3
    # metadata block is sorted for stable diffs
    keys = [l[1:].split("=")[0].strip() for l in out.splitlines()
            if l.startswith("#")]
    assert keys == sorted(keys)
    # 17 significant digits survive a parse round trip exactly
    v = float(rows[0][1])
    assert format(v, ".17g") == rows[0][1]
    assert err == ""


def test_rates_vacuum_is_unity(capsys):
    out, _ = run_cli(["rates", "--eps1", "1", "--mu1", "1", "--ka-min", "1",
                      "--ka-max", "2", "--steps", "2", "--rho", "1.5"], capsys)
    _, _, rows = parse_csv(out)
    vals = np.array([[float(v) for v in r[1:]] for r in rows])
    np.testing.assert_allclose(vals, 1.0, rtol=1e-12)


def test_rates_column_subset(capsys):
    out, _ = run_cli(RATES_SMALL + ["--transition", "m1",
                                    "--orientation", "radial"], capsys)
    _, header, rows = parse_csv(out)
    assert header == ["ka", "gamma_m1_radial"]
    assert all(len(r) == 2 for r in rows)


def test_rates_rho_sweep(capsys):
    out, _ = run_cli(["rates", "--eps1", "-4", "--mu1", "-1.05",
                      "--rho-min", "1.0", "--rho-max", "2.0", "--steps", "3",
                      "--ka", "1.0", "--transition", "e1",
                      "--orientation", "radial"], capsys)
    meta, header, rows = parse_csv(out)
    assert meta["variable"] == "rho"
    assert header[0] == "rho"
    assert [float(r[0]) for r in rows] == [1.0, 1.5, 2.0]


def test_jsonl_format(capsys):
    out, _ = run_cli(RATES_SMALL + ["--format", "jsonl"], capsys)
    lines = out.splitlines()
    head = json.loads(lines[0])
    assert head["meta"]["command"] == "rates"
    rows = [json.loads(l) for l in lines[1:]]
    assert len(rows) == 3
    assert set(rows[0]) == {"ka", "gamma_e1_radial", "gamma_e1_tangential",
                            "gamma_m1_radial", "gamma_m1_tangential"}
    assert rows[0]["ka"] == 0.5


def test_byte_determinism(capsys):
    first, _ = run_cli(RATES_SMALL, capsys)
    second, _ = run_cli(RATES_SMALL, capsys)
    assert first == second


def test_out_file_matches_stdout(tmp_path, capsys):
    stdout_text, _ = run_cli(RATES_SMALL, capsys)
    path = tmp_path / "sweep.csv"
    run_cli(RATES_SMALL + ["--out", str(path)], capsys)
    assert path.read_text() == stdout_text


def test_nan_cells_warn_but_exit_zero(capsys):
    # n_cap far below the ka ceiling: every column fails to converge
    out, err = run_cli(["rates", "--eps1", "-4", "--mu1", "-1.05",
                        "--ka-min", "40", "--ka-max", "41", "--steps", "2",
                        "--rho", "1.001", "--n-cap", "10"], capsys)
    _, _, rows = parse_csv(out)
    assert all(v == "nan" for r in rows for v in r[1:])
    assert err.count("warning:") == 8  # 4 columns x 2 points
    assert "not converged" in err


def test_config_file_layers_under_flags(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("eps1 = -4\nmu1 = -1.05\n# comment line\n"
                   "ka-min = 0.5\nka_max = 1.0\nsteps = 2\nrho = 1.001\n")
    base, _ = run_cli(["rates", "--config", str(cfg)], capsys)
    _, _, rows = parse_csv(base)
    assert len(rows) == 2
    override, _ = run_cli(["rates", "--config", str(cfg), "--steps", "3"],
                          capsys)
    _, _, rows = parse_csv(override)
    assert len(rows) == 3  # explicit flag beats the file


def test_config_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    _, err = run_cli(["rates", "--config", str(cfg)], capsys, expect=2)
    assert "unknown key" in err


def test_config_malformed_line_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just some words\n")
    _, err = run_cli(["rates", "--config", str(cfg)], capsys, expect=2)
    assert "key=value" in err


@pytest.mark.parametrize("argv,fragment", [
    (["rates", "--eps1", "-4", "--mu1", "-1.05", "--rho", "1.001"],
     "exactly one"),
    (["rates", "--eps1", "-4", "--mu1", "-1.05", "--ka-min", "1",
      "--ka-max", "0.5", "--steps", "3", "--rho", "1.001"], "min < max"),
    (["rates", "--eps1", "-4", "--mu1", "-1.05", "--ka-min", "0.5",
      "--ka-max", "1", "--steps", "1", "--rho", "1.001"], "steps"),
    (["rates", "--mu1", "-1.05", "--ka-min", "0.5", "--ka-max", "1",
      "--steps", "2", "--rho", "1.001"], "eps1"),
    (["mie", "--eps1", "-4", "--mu1", "-1.05", "--ka-min", "1",
      "--ka-max", "2", "--steps", "2"], "--n and --pol"),
    (["rays", "--eps1", "-4", "--mu1", "1.05"], "mixed-handedness"),
    (["rays", "--eps1", "-4", "--mu1", "-1.05", "--source-x", "0.5"], ""),
    (["modes", "--eps1", "-4", "--mu1", "-1.05", "--x-min", "-1"], "x-min"),
], ids=["no-sweep", "reversed-range", "steps-low", "missing-eps1",
        "mie-incomplete", "mixed-rays", "inside-source", "bad-window"])
def test_usage_errors_exit_two(argv, fragment, capsys):
    _, err = run_cli(argv, capsys, expect=2)
    assert fragment in err


def test_internal_failure_exits_three(capsys, monkeypatch):
    import lhsphere.cli as cli

    def boom(req):
        raise RuntimeError("synthetic fault")

    monkeypatch.setitem(cli._RATE_FNS, "gamma_e1_radial", boom)
    _, err = run_cli(RATES_SMALL, capsys, expect=3)
    assert "internal error" in err and "synthetic fault" in err


def test_threads_env_var(capsys, monkeypatch):
    argv = ["mie", "--eps1", "-4", "--mu1", "-1.05", "--n", "8",
            "--pol", "te", "--ka-min", "1.8", "--ka-max", "2.0",
            "--steps", "7"]
    monkeypatch.setenv("LHSPHERE_THREADS", "1")
    serial, _ = run_cli(argv, capsys)
    monkeypatch.setenv("LHSPHERE_THREADS", "4")
    threaded, _ = run_cli(argv, capsys)
    assert serial == threaded  # ordered emission regardless of pool size
    monkeypatch.setenv("LHSPHERE_THREADS", "0")
    _, err = run_cli(argv, capsys, expect=2)
    assert "LHSPHERE_THREADS" in err
    monkeypatch.setenv("LHSPHERE_THREADS", "many")
    _, err = run_cli(argv, capsys, expect=2)
    assert "not an integer" in err


def test_mie_vacuum_coefficient_is_zero(capsys):
    out, _ = run_cli(["mie", "--eps1", "1", "--mu1", "1", "--n", "3",
                      "--pol", "tm", "--ka-min", "0.5", "--ka-max", "2.5",
                      "--steps", "4"], capsys)
    _, header, rows = parse_csv(out)
    assert header == ["ka", "abs_coeff", "re_coeff", "im_coeff"]
    assert all(float(r[1]) == 0.0 for r in rows)


def test_modes_table_census(capsys):
    out, _ = run_cli(["modes", "--eps1", "-4", "--mu1", "-1.05"], capsys)
    meta, header, rows = parse_csv(out)
    assert float(meta["n_max_te"]) == pytest.approx(20.0, rel=1e-12)
    assert float(meta["n_max_tm"]) == pytest.approx(1 / 3, rel=1e-12)
    assert header[:4] == ["pol", "n", "asym_re_z", "asym_q"]
    assert [r[0] for r in rows] == ["TE"] * 19
    assert [int(r[1]) for r in rows] == list(range(1, 20))
    n8 = rows[7]
    assert float(n8[4]) == pytest.approx(1.9419437124465, rel=1e-10)
    assert float(n8[6]) > 1e7  # quality factor
    assert all(float(r[7]) < 1e-9 for r in rows)  # residuals
    # first order has no asymptotic estimate; the columns go NaN
    assert rows[0][2] == "nan" and math.isnan(float(rows[0][3]))


def test_modes_vacuum_empty(capsys):
    out, _ = run_cli(["modes", "--eps1", "1", "--mu1", "1"], capsys)
    meta, header, rows = parse_csv(out)
    assert rows == []
    assert float(meta["n_max_te"]) == -0.5


def test_rays_csv_roundtrip(capsys):
    out, _ = run_cli(["rays", "--eps1", "-4", "--mu1", "-1.05",
                      "--fan", "7", "--format", "csv"], capsys)
    meta, header, rows = parse_csv(out)
    assert header == ["ray", "vertex", "x", "y", "termination"]
    paths = rays.trace_fan((1.5, 0.0), Medium(-4.0, -1.05), fan_count=7)
    got = {}
    for r in rows:
        got.setdefault(int(r[0]), []).append((float(r[2]), float(r[3])))
        assert r[4] == "exited"
    assert len(got) == 7
    for i, p in enumerate(paths):
        np.testing.assert_array_equal(np.array(got[i]), p.vertices)


def test_rays_svg_document(capsys):
    out, _ = run_cli(["rays", "--eps1", "-4", "--mu1", "-1.05",
                      "--fan", "9"], capsys)
    assert out.startswith("<svg xmlns=")
    assert out.count("<polyline") == 9
    assert out.count("<circle") == 2  # sphere outline + source marker
    assert out.rstrip().endswith("</svg>")


def test_figure_fig4_two_branches(capsys):
    out, _ = run_cli(["figure", "fig4"], capsys)
    meta, header, rows = parse_csv(out)
    assert header == ["ka", "abs_p8_rh", "abs_p8_lh"]
    # uniform 4000-point base plus resonance-resolving cluster points
    assert len(rows) >= 4000
    kas = np.array([float(r[0]) for r in rows])
    assert kas[0] > 0.05 and kas[-1] == 10.0  # left-open window
    assert np.all(np.diff(kas) > 0)
    lh = np.array([float(r[2]) for r in rows])
    # the narrow surface-mode spike below ka=2.5 is actually sampled
    assert lh[kas < 2.5].max() > 0.9
    assert lh.max() > 0.9  # resonance reaches the unitarity ceiling


def test_figure_fig2_svg(capsys):
    out, _ = run_cli(["figure", "fig2"], capsys)
    assert out.startswith("<svg")
    assert out.count("<polyline") == 61


def test_figure_rejects_mismatched_format(capsys):
    _, err = run_cli(["figure", "fig2", "--format", "jsonl"], capsys,
                     expect=2)
    assert "svg or csv" in err
    _, err = run_cli(["figure", "fig4", "--format", "svg"], capsys, expect=2)
    assert "csv or jsonl" in err


def test_version_flag(capsys):
    _, _ = run_cli(["--version"], capsys, expect=0)


def test_unknown_subcommand(capsys):
    run_cli(["transmogrify"], capsys, expect=2)
