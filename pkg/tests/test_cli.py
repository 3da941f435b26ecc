import csv
import json
import os

import pytest

from spinsim import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_unknown_scenario(capsys):
    code, _, err = run(["run", "bogus"], capsys)
    assert code == 1 and "unknown scenario" in err


def test_bad_flag_value(capsys):
    code, _, err = run(["adrf", "--j", "-1"], capsys)
    assert code == 1 and "half-integer" in err


def test_lattice_sums(tmp_path, capsys):
    code, _, _ = run(["lattice-sums", "--structure", "fcc", "--r-max", "6", "--out",
                      str(tmp_path)], capsys)
    assert code in (0, 2)
    files = sorted(os.listdir(tmp_path))
    data = [f for f in files if not f.endswith(".meta.json")]
    assert data and all(f + ".meta.json" in files for f in data)
    meta = json.loads((tmp_path / (data[0] + ".meta.json")).read_text())
    assert "units" in meta and meta["config"]["r_max"] == 6.0


def test_adrf_small_spin_converges(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, _, _ = run(["adrf", "--j", "0.5", "--polarization", "0.5", "--n-delta", "40",
                      "--structure", "fcc", "--out", str(out)], capsys)
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["delta_over_BL", "T_over_Tc", "beta", "converged"]
    assert len(rows) == 41 and all(r[3] == "true" for r in rows[1:])
    assert float(rows[-1][0]) == 0.0


def test_adrf_large_spin_non_convergence(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, stdout, _ = run(["adrf", "--j", "4.5", "--polarization", "0.5", "--order", "G1+G2",
                           "--n-delta", "60", "--out", str(out)], capsys)
    assert code == 2
    rows = read_csv(out)[1:]
    assert rows[-1][3] == "false" and rows[0][3] == "true"
    bad = [float(r[0]) for r in rows if r[3] == "false"]
    assert max(bad) < 1.0
    assert json.loads(stdout)["non_converged_points"] == len(bad)


def test_reproducible_artifacts(tmp_path, capsys):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert run(["adrf", "--j", "0.5", "--n-delta", "30", "--out", str(d)], capsys)[0] == 0
    a, b = (sorted(os.listdir(d)) for d in dirs)
    assert a == b
    for name in a:
        ta, tb = ((d / name).read_bytes() for d in dirs)
        if name.endswith(".meta.json"):
            ja, jb = json.loads(ta), json.loads(tb)
            ja["config"].pop("out"), jb["config"].pop("out")
            assert ja == jb
        else:
            assert ta == tb


def test_hte_json(capsys):
    code, stdout, _ = run(["hte", "--j", "0.5", "--beta", "0.05", "--eta", "0.1"], capsys)
    assert code == 0
    state = json.loads(stdout)
    assert state["eta"] == pytest.approx(0.1)
    assert 0 < state["entropy_per_spin"] < 0.7


def test_aht_exact(capsys):
    code, stdout, _ = run(["aht", "--sequence", "wahuha", "--coupling", "ising"], capsys)
    assert code == 0
    out = json.loads(stdout)
    assert out["n_frames"] == 5 and out["cyclic"]
    assert out["exact"] == [["1/3", "0", "0"], ["0", "1/3", "0"], ["0", "0", "1/3"]]


def test_validate_semiinv(capsys):
    code, stdout, _ = run(["validate", "semiinv"], capsys)
    assert code == 0 and stdout


def test_validate_aht_csv(capsys):
    code, stdout, _ = run(["validate", "aht", "--cluster", "1x1"], capsys)
    assert code == 0
    lines = stdout.strip().splitlines()
    assert lines[0] == "t_c,n_cycles,error"
    order = float(lines[-1].split(":")[1])
    assert order >= 1.0


def test_meanfield_dump(tmp_path, capsys):
    code, _, _ = run(["meanfield", "--grid", "8", "--r-max", "6", "--dump-bz", "--out",
                      str(tmp_path)], capsys)
    assert code in (0, 2)
    rows = read_csv(tmp_path / "bz_scan.csv")
    assert rows[0] == ["kx", "ky", "kz", "reA", "imA", "absA"] and len(rows) == 8 ** 3 + 1
    res = json.loads((tmp_path / "meanfield.json").read_text())
    assert 0 < res["p_c_S"] < res["p_c_I"] < 1


@pytest.mark.slow
def test_inp_walkthrough(tmp_path, capsys):
    code, _, _ = run(["inp-walkthrough", "--out", str(tmp_path)], capsys)
    assert code in (0, 2)
    summary = json.loads((tmp_path / "inp_walkthrough.json").read_text())
    head = summary["headline"]
    assert head["A0"] == pytest.approx(7.00, rel=0.01)
    assert head["sumA2"] == pytest.approx(13.238, rel=0.005)
    assert head["p_c_S_percent"] == 15 and head["p_c_I_percent"] == 49
    assert head["p_c_twin_percent"] == 56
    assert summary["adrf"]["j=4.5 G1+G2"]["non_converged_points"] > 0
    assert len([f for f in os.listdir(tmp_path) if f.startswith("adrf_")
                and f.endswith(".csv")]) == 6
