import json

from mpsocsim import cli, dse
from mpsocsim.errors import DeadlockError


def main(*argv):
    return cli.main(list(argv))


class TestVerbs:
    def test_presets_listing(self, capsys):
        assert main("presets") == 0
        out = capsys.readouterr().out
        for name in ("BASE", "BASE32", "C-64-8", "C-64-16",
                     "NOC_BASE", "NOC_SW", "NOC_SW_C"):
            assert name in out

    def test_run_writes_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        rc = main("run", "--preset", "BASE32", "--benchmark", "matmul",
                  "--matmul-n", "16", "--matmul-k", "16", "--matmul-m", "8",
                  "--arrangements", "1x1,1x2", "--out", str(out))
        assert rc == 0
        rows = dse.read_csv(out)
        assert len(rows) == 2

    def test_run_rerun_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ("run", "--preset", "BASE32", "--benchmark", "nbody",
                "--bodies", "32", "--timesteps", "2",
                "--arrangements", "1x1,1x4", "--seed", "9")
        assert main(*args, "--out", str(a)) == 0
        assert main(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_sweep_and_analyze(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        rc = main("sweep", "--preset", "BASE32", "--benchmark", "matmul",
                  "--matmul-n", "16", "--matmul-k", "16", "--matmul-m", "8",
                  "--axis", "cores=1,2,4", "--out", str(out))
        assert rc == 0
        rc = main("analyze", "--in", str(out))
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert "speedup" in report

    def test_config_file_round_trip(self, tmp_path, capsys):
        assert main("show-config", "--preset", "NOC_SW_C") == 0
        text = capsys.readouterr().out
        f = tmp_path / "cfg.ini"
        f.write_text(text)
        assert main("show-config", "--config", str(f)) == 0
        assert capsys.readouterr().out == text


class TestExitCodes:
    def test_validation_failure_is_1(self, tmp_path, capsys):
        f = tmp_path / "bad.ini"
        f.write_text("[cache]\nn_ways = 3\n")
        assert main("run", "--config", str(f)) == 1

    def test_unknown_preset_is_1(self, capsys):
        assert main("run", "--preset", "NOPE") == 1

    def test_missing_csv_is_3(self, capsys):
        assert main("analyze", "--in", "/nonexistent/x.csv") == 3

    def test_deadlock_is_2(self, monkeypatch, capsys):
        def boom(spec):
            raise DeadlockError({0: "recv"})
        monkeypatch.setattr(dse, "run_experiment", boom)
        assert main("run", "--preset", "BASE") == 2

    def test_bad_arrangement_is_1(self, capsys):
        assert main("run", "--preset", "BASE32", "--arrangements", "4x4") == 1
