import csv
import io
import math
import shlex

import pytest

from euler_poisson_ct.cli import ConfigError, RunConfig, load_config, main
from euler_poisson_ct.flowmap import IsotropicConfig, flow_nu3
from euler_poisson_ct.profiles import InitialData


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_threshold_zero_background_breakdown(capsys):
    code, out, _ = run(capsys, "threshold", "--model", "zero-bg", "--k", "1", "--rho0", "1", "--u0", "-3*x")
    assert code == 2
    assert "t_c=0.354248688935" in out
    assert rows_of(out)[0] == ["alpha", "rho0", "du0", "margin", "lower_margin"]


def test_threshold_constant_background_global(capsys):
    code, _, _ = run(capsys, "threshold", "--model", "const-bg", "--k", "1", "--c", "1", "--rho0", "1", "--u0", "0")
    assert code == 0


def test_threshold_viscous_worked_example(capsys):
    code, out, _ = run(
        capsys, "threshold", "--model", "viscous", "--k", "1", "--rho0", "1/(1+x^2)", "--u0", "-2*atan(x)"
    )
    assert code == 2
    assert "t_bound=0.585786437627" in out


def test_threshold_indeterminate_exit_code(capsys):
    code, _, _ = run(
        capsys, "threshold", "--model", "isotropic", "--nu", "1", "--rho0", "1", "--u0", "2-(x-1)",
        "--alpha-min", "1", "--alpha-count", "1",
    )
    assert code == 3


def test_classify_cases(capsys):
    code, out, _ = run(capsys, "classify", "--k", "1", "--rho0", "1", "--d0", "0.5", "--alpha-min", "0", "--alpha-count", "1")
    assert code == 0 and "case 1ii" in out and "d_max=0.755928946018" in out
    _, out, _ = run(capsys, "classify", "--k", "1", "--rho0", "1", "--d0", "2", "--alpha-min", "0", "--alpha-count", "1")
    assert "case 1i:" in out
    _, out, _ = run(capsys, "classify", "--k", "0", "--rho0", "1", "--d0", "2")
    assert "decoupled Burgers; no critical threshold" in out


def test_evolve_nu3_matches_closed_form(capsys, tmp_path):
    path = tmp_path / "nu3.csv"
    code, _, _ = run(
        capsys, "evolve", "--model", "isotropic", "--nu", "3", "--rho0", "1", "--u0", "1",
        "--alpha-min", "0.5", "--alpha-max", "2", "--alpha-count", "3", "--t-end", "20", "--samples", "11",
        "--out", str(path),
    )
    assert code == 0
    rows = rows_of(path.read_text())
    iso = IsotropicConfig(3, 1.0, InitialData.from_text("1", "1"))
    for row in rows[1:]:
        a, t, r, u = map(float, row[:4])
        fp = flow_nu3(iso, a, t)
        assert abs(r - fp.r) <= 1e-8 * fp.r and abs(u - fp.u) <= 1e-8 * abs(fp.u)
        if t == 0.0:
            assert float(row[4]) == 1.0 and float(row[6]) == 1.0


def test_evolve_blowup_row_is_flagged_and_finite(capsys):
    code, out, err = run(
        capsys, "evolve", "--model", "isotropic", "--nu", "3", "--rho0", "0.2", "--u0", "2-x^2",
        "--alpha-min", "1", "--alpha-count", "1", "--t-end", "1", "--samples", "5",
    )
    assert code == 0 and "blow-up reached at t=0.504225485856" in err
    rows = rows_of(out)
    assert [r[-1] for r in rows[1:]] == ["0", "0", "0", "1"]
    assert rows[-1][4] == "0" and rows[-1][5:8] == ["", "", ""]
    assert not any(tok.lower() in ("nan", "inf", "-inf") for r in rows for tok in r)


def test_evolve_constant_background_ellipse_closes(capsys):
    period = 2 * math.pi
    code, out, _ = run(
        capsys, "evolve", "--model", "const-bg", "--k", "1", "--c", "1", "--rho0", "2", "--u0", "0.5*x",
        "--alpha-min", "0", "--alpha-count", "1", "--t-end", repr(period), "--samples", "65",
    )
    assert code == 0
    pts = [(float(r[4]), float(r[5])) for r in rows_of(out)[1:]]
    # (1/2) G'^2 + (c k / 2) (G - rho0/c)^2 is constant along the ellipse
    energies = [0.5 * gt * gt + 0.5 * (g - 2.0) ** 2 for g, gt in pts]
    assert max(energies) - min(energies) < 1e-12
    assert abs(pts[-1][0] - pts[0][0]) < 1e-6 and abs(pts[-1][1] - pts[0][1]) < 1e-6


def test_csv_is_deterministic_and_pool_independent(capsys, tmp_path):
    args = [
        "threshold", "--model", "isotropic", "--nu", "1", "--rho0", "exp(-x)", "--u0", "1+0.1*x",
        "--alpha-min", "0.2", "--alpha-max", "3", "--alpha-count", "6",
    ]
    outs = []
    for extra in ([], [], ["--jobs", "2"]):
        path = tmp_path / f"t{len(outs)}.csv"
        run(capsys, *args, *extra, "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_config_file_and_flag_override(capsys, tmp_path):
    cfgfile = tmp_path / "run.ini"
    cfgfile.write_text(
        "[model]\nmodel = zero-bg\nk = 1\n[profiles]\nrho0 = 1\nu0 = -3*x\n[grid]\nalpha-min = 0\nalpha-count = 1\n"
    )
    assert load_config(str(cfgfile))["alpha_count"] == 1
    code, _, _ = run(capsys, "threshold", "--config", str(cfgfile))
    assert code == 2
    code, _, _ = run(capsys, "threshold", "--config", str(cfgfile), "--u0", "x")
    assert code == 0


def test_config_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[nonsense]\na = 1\n")
    assert run(capsys, "threshold", "--config", str(bad))[0] == 1
    assert run(capsys, "threshold", "--alpha-count", "0")[0] == 1
    assert run(capsys, "threshold", "--rho0", "1+", "--u0", "x")[0] == 1
    assert run(capsys, "threshold", "--model", "const-bg")[0] == 1
    assert run(capsys, "validate", "--alpha-count", "0")[0] == 1
    code, _, err = run(capsys, "threshold", "--model", "isotropic", "--nu", "1", "--u0", "-1")
    assert code == 1 and err.startswith("error:")
    with pytest.raises(ConfigError):
        RunConfig(spacing="cubic").checked()


def test_validate_fault_exits_4_with_rerunnable_case(capsys):
    code, out, err = run(
        capsys, "validate", "--scale", "0.05", "--fault", "gamma-sign",
        "--families", "zero-background-oracle-equivalence",
    )
    assert code == 4 and "FAIL zero-background-oracle-equivalence" in out
    cmd = err.strip().split("euler-poisson-ct ", 1)[1]
    assert main(shlex.split(cmd)) in (0, 2)


def test_validate_subset_passes(capsys):
    code, out, _ = run(capsys, "validate", "--families", "cross-formula,singular-limit")
    assert code == 0 and "2/2 families passed" in out
    assert run(capsys, "validate", "--families", "bogus")[0] == 1
