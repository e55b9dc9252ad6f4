import json

from riscr.cli import main

SMALL = ["--set", "N_t=16", "--set", "N_r=4", "--set", "N=4", "--set", "M=2",
         "--set", "max_outer_iterations=2", "--set", "rcg_max_iterations=20"]


# [TRIVIAL] determinism
def test_sweep_is_byte_identical(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["sweep", *SMALL, "--variable", "gamma", "--values", "0,10",
                     "--trials", "1", "--seed", "9", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0].count(b"\n") == 1 + 2 * 5


# [TRIVIAL] JSON contents
def test_single_dumps_trace(tmp_path):
    path = tmp_path / "s.json"
    assert main(["single", *SMALL, "--schemes", "hbf_bcd_dsvd", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert "bcd" in data["designs"] and "hbf_bcd_dsvd" in data["schemes"]


# [TRIVIAL] exit code
def test_bad_input_gives_nonzero_exit(tmp_path, capsys):
    assert main(["sweep", "--set", "bogus=1", "--variable", "N", "--values", "4",
                 "--out", str(tmp_path / "x.csv")]) != 0


# [TRIVIAL] exit code
def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "5/5 checks passed" in capsys.readouterr().out
