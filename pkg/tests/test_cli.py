import json
import subprocess
import sys

import numpy as np
import pytest

from qutrng import cli, qutrit


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_ideal_accepts(capsys, tmp_path):
    code, out, err = run(capsys, "generate", "--count", "2000", "--seed", "5")
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert all(len(l) == 64 for l in lines[:-1]) and 0 < len(lines[-1]) <= 64
    assert cli.parse_ascii(out).size == 2000
    assert "verdict=Accept" in err


def test_generate_zero_state_rejects(capsys):
    code, _, err = run(capsys, "generate", "--count", "2000", "--source", "state:zero")
    assert code == cli.EXIT_REJECT
    assert "verdict=Reject" in err


def test_generate_without_checks_is_inconclusive(capsys):
    code, out, _ = run(capsys, "generate", "--count", "100", "--check-rate", "0")
    assert code == cli.EXIT_INCONCLUSIVE
    assert cli.parse_ascii(out).size == 100


def test_generate_short_public_file_is_inconclusive(capsys, tmp_path):
    pub = tmp_path / "pub.txt"
    pub.write_text("012\n210\n")
    code, out, _ = run(capsys, "generate", "--count", "50", "--public-file", str(pub))
    assert code == cli.EXIT_INCONCLUSIVE
    assert cli.parse_ascii(out).size == 6


@pytest.mark.parametrize(
    "argv",
    [
        ["generate", "--epsilon", "0"],
        ["generate", "--delta", "1.5"],
        ["generate", "--check-rate", "1"],
        ["generate", "--count", "-1"],
        ["generate", "--seed", "-3"],
        ["generate", "--seed", "0x1" + "0" * 16],
        ["generate", "--source", "nonsense"],
        ["generate", "--source", "state:1,2"],
        ["generate", "--public-seed", "1", "--public-file", "x"],
        ["generate", "--format", "xml"],
        ["chsh", "--state", "0,0,0"],
        ["state-test"],
        ["state-test", "--state", "bogus"],
        ["verify", "--resolution", "8"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == cli.EXIT_USAGE


def test_missing_input_files(capsys, tmp_path):
    missing = str(tmp_path / "nope")
    assert run(capsys, "generate", "--source", "ensemble:" + missing)[0] == cli.EXIT_NOINPUT
    assert run(capsys, "generate", "--public-file", missing)[0] == cli.EXIT_NOINPUT
    assert run(capsys, "chsh", "--observables", missing)[0] == cli.EXIT_NOINPUT
    assert run(capsys, "generate", "--config", missing)[0] == cli.EXIT_NOINPUT


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "generate", "--count", "10", "--out", str(tmp_path / "no" / "dir" / "x"))
    assert code == cli.EXIT_CANTCREAT
    assert "cannot write" in err


def test_formats_agree(capsys, tmp_path):
    base = ["generate", "--count", "500", "--seed", "0xBEEF"]
    run(capsys, *base, "--format", "ascii", "--out", str(tmp_path / "a"))
    run(capsys, *base, "--format", "raw", "--out", str(tmp_path / "r"))
    run(capsys, *base, "--format", "json", "--out", str(tmp_path / "j"))
    a = cli.parse_ascii((tmp_path / "a").read_text())
    r = np.frombuffer((tmp_path / "r").read_bytes(), dtype=np.uint8)
    j = json.loads((tmp_path / "j").read_text())
    assert np.array_equal(a, r) and j["trits"] == a.tolist()
    assert j["report"]["seed"] == 0xBEEF
    assert j["report"]["verdict"] == "Accept"
    assert j["report"]["stats"]["n"] == 500


def test_hex_and_decimal_seeds_agree(capsys):
    a = run(capsys, "generate", "--count", "300", "--seed", "255")[1]
    b = run(capsys, "generate", "--count", "300", "--seed", "0xff")[1]
    c = run(capsys, "generate", "--count", "300", "--seed", "256")[1]
    assert a == b != c


def test_public_seed_changes_output(capsys):
    # the ideal state is uniform in every basis, so only a basis-sensitive source shows it
    args = ["generate", "--count", "300", "--seed", "1"]
    ideal = [run(capsys, *args, *extra)[1] for extra in ([], ["--public-seed", "2"])]
    assert ideal[0] == ideal[1]
    plus = [run(capsys, *args, "--source", "state:plus", *extra)[1] for extra in ([], ["--public-seed", "2"])]
    assert plus[0] != plus[1]


def test_jobs_do_not_change_output(capsys):
    a = run(capsys, "generate", "--count", "200000", "--format", "raw", "--jobs", "1")[1]
    b = run(capsys, "generate", "--count", "200000", "--format", "raw", "--jobs", "3")[1]
    assert a == b


def test_report_file(capsys, tmp_path):
    rep = tmp_path / "rep.json"
    run(capsys, "generate", "--count", "100", "--report", str(rep), "--seed", "9")
    d = json.loads(rep.read_text())
    assert d["output_count"] == 100 and d["checks"] >= d["required_checks"] == 1000
    assert d["public_seed"] == 9


def test_ensemble_file(capsys, tmp_path):
    f = tmp_path / "ens.txt"
    z, z3 = qutrit.ZETA, qutrit.ZETA**3
    s3 = 3**-0.5
    f.write_text(
        "# weight alpha beta gamma\n"
        f"0.5 {z.real * s3}:{z.imag * s3} {s3} {z3.real * s3}:{z3.imag * s3}\n"
        "\n"
        "0.5 0 1 0\n"
    )
    rep = tmp_path / "rep.json"
    code, _, _ = run(capsys, "generate", "--count", "1000", "--source", f"ensemble:{f}", "--report", str(rep))
    d = json.loads(rep.read_text())
    assert abs(d["Y"] - (0.5 + 0.5 / 3)) < 0.06
    assert code == cli.EXIT_REJECT


def test_bad_ensemble_weights(capsys, tmp_path):
    f = tmp_path / "ens.txt"
    f.write_text("0.5 0 1 0\n0.4 1 0 0\n")
    assert run(capsys, "generate", "--source", f"ensemble:{f}")[0] == cli.EXIT_USAGE


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "qutrng.conf"
    cfg.write_text("# session\ncount = 128\ncheck-rate = 0\nseed = 0x10\n")
    code, out, _ = run(capsys, "generate", "--config", str(cfg))
    assert code == cli.EXIT_INCONCLUSIVE
    assert cli.parse_ascii(out).size == 128
    direct = run(capsys, "generate", "--count", "128", "--check-rate", "0", "--seed", "16")[1]
    assert out == direct
    code, out, _ = run(capsys, "generate", "--config", str(cfg), "--count", "64")
    assert cli.parse_ascii(out).size == 64


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("count = 10\ncolour = blue\n")
    code, _, err = run(capsys, "generate", "--config", str(cfg))
    assert code == cli.EXIT_USAGE
    assert "colour" in err


def test_chsh_maximal_state(capsys):
    code, out, _ = run(capsys, "chsh", "--state", "1,0,1")
    assert code == 0
    assert out.split() == [
        "qubit_pair_chsh", "2.828427124746",
        "symmetrized_chsh", "2.828427124746",
        "spin_form_chsh", "2.828427124746",
    ]


def test_chsh_product_state(capsys):
    out = run(capsys, "chsh", "--state", "zero")[1].split()
    assert out[1::2] == ["0.000000000000", "1.414213562373", "1.414213562373"]


def test_chsh_observables_file(capsys, tmp_path):
    f = tmp_path / "obs.txt"
    r = 2**-0.5
    f.write_text(f"1 0 0 -1\n0 1 1 0\n{r} {r} {r} {-r}\n{r} {-r} {-r} {-r}\n")
    assert run(capsys, "chsh", "--state", "1,0,1", "--observables", str(f))[1] == run(capsys, "chsh")[1]
    f.write_text("1 0 0 1\n0 1 1 0\n1 0 0 -1\n2 0 0 -1\n")
    assert run(capsys, "chsh", "--observables", str(f))[0] == cli.EXIT_USAGE


def test_state_test_unbiased(capsys):
    code, out, _ = run(capsys, "state-test", "--state", "unbiased0")
    assert code == 0
    lines = out.splitlines()
    for axis, line in zip("ZXY", lines[:3]):
        assert line.split()[1:] == ["p(+1)=0.333333333333", "p(0)=0.333333333333", "p(-1)=0.333333333333"]
    assert lines[3].split() == ["concurrence", "1.000000000000"]
    assert lines[4].split() == ["fidelity", "1.000000000000"]
    assert lines[5].split() == ["<S^2>", "0.000000000000"]


def test_state_test_complex_spec(capsys):
    out = run(capsys, "state-test", "--state", "0,0,1,0,0,0")[1].splitlines()
    assert out[0].split()[1:] == ["p(+1)=0.000000000000", "p(0)=1.000000000000", "p(-1)=0.000000000000"]
    assert out[4].split() == ["fidelity", f"{1 / 3:.12f}"]


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--resolution", "16")
    assert code == 0
    assert out.splitlines()[-1].startswith("all ")
    assert "FAIL" not in out


def test_verify_detects_sign_error(capsys, monkeypatch):
    good = qutrit.spin_basic

    def broken(axis):
        obs = good(axis)
        if axis != "Y":
            return obs
        return qutrit.SpinObservable(-obs.matrix, obs.spectrum[::-1], obs.label)

    monkeypatch.setattr(qutrit, "spin_basic", broken)
    code, out, _ = run(capsys, "verify", "--resolution", "16")
    assert code == cli.EXIT_FAILED
    assert "FAIL" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qutrng", "chsh", "--state", "plus"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.split()[1::2] == ["1.414213562373", "2.121320343560", "2.121320343560"]


@pytest.mark.parametrize("text,value", [("1", 1), ("0.5:-2", 0.5 - 2j), ("-1e-3:1", -0.001 + 1j)])
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


def test_format_ascii_roundtrip():
    t = np.random.default_rng(0).integers(0, 3, 1000).astype(np.uint8)
    s = cli.format_ascii(t)
    assert s.endswith("\n") and max(len(l) for l in s.splitlines()) == 64
    assert np.array_equal(cli.parse_ascii(s), t)
    assert cli.format_ascii([]) == ""
    with pytest.raises(ValueError):
        cli.parse_ascii("0123")
