import csv
import io
import json
from unittest.mock import patch

import pytest

from qutritcomm.protocol_engine import Protocol, VerificationResult
from qutritcomm.qutritcomm import build_parser, main


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Run every CLI test in an empty directory without user config or .env."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QUTRITCOMM_CONFIG", raising=False)
    monkeypatch.delenv("QUTRITCOMM_SEED", raising=False)
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path / "xdg"))
    with patch("qutritcomm.qutritcomm.load_dotenv"):
        yield


def _run(*argv):
    with patch("sys.argv", ["qutritcomm", *argv]):
        main()


def _exit_code(*argv):
    with pytest.raises(SystemExit) as exc_info:
        _run(*argv)
    return exc_info.value.code


class TestParser:
    """Tests for argument parsing."""

    def test_no_command_exits_one(self, capsys):
        """Without a subcommand help is printed and the exit code is 1."""
        assert _exit_code() == 1
        assert "simulate" in capsys.readouterr().out

    def test_settings_table_requires_protocol(self):
        """settings-table without --protocol is a usage error."""
        assert _exit_code("settings-table") == 2

    def test_simulate_defaults_defer_to_config(self):
        """Unset simulate flags parse as None so config files can supply them."""
        args = build_parser().parse_args(["simulate"])
        assert args.protocol is None
        assert args.seed is None
        assert args.format is None
        assert args.zero_noise is False

    def test_version(self, capsys):
        """--version prints and exits 0."""
        assert _exit_code("--version") == 0


class TestIdeal:
    """Tests for the ideal subcommand."""

    def test_all_protocols_pass(self, capsys):
        """Every exhaustive sweep passes."""
        _run("ideal")
        out = capsys.readouterr().out
        assert "729 cases checked, pass" in out
        assert "324 cases checked, pass" in out
        assert "243 cases checked, pass" in out

    def test_failure_exits_three(self, capsys):
        """A failed sweep exits with the verification code."""
        failing = VerificationResult(Protocol.CCP, 243, failures=["T mismatch at (0, 0, 0)"])
        with patch("qutritcomm.qutritcomm.verify_protocol", return_value=failing):
            assert _exit_code("ideal", "--protocol", "ccp") == 3
        assert "Error:" in capsys.readouterr().err


class TestClassicalBound:
    """Tests for the classical-bound subcommand."""

    def test_reports_seven_ninths(self, capsys):
        """The reduced-class optimum is 189/243."""
        _run("classical-bound", "--verify-optimal-strategy")
        out = capsys.readouterr().out
        assert "Reduced-class optimum: 189/243 = 7/9" in out
        assert "Optimal strategy: 189/243 = 7/9" in out

    def test_random_search(self, capsys):
        """--trials adds a random-search line."""
        _run("classical-bound", "--trials", "200", "--seed", "1")
        assert "over 200 strategies" in capsys.readouterr().out

    def test_random_search_ignores_campaign_file(self, tmp_path, capsys):
        """An invalid auto-discovered campaign file does not affect the bound."""
        (tmp_path / ".qutritcomm.toml").write_text("[noise]\nclick_prob = 2.0\n")
        _run("classical-bound", "--trials", "50", "--seed", "1")
        assert "over 50 strategies" in capsys.readouterr().out


class TestSettingsTable:
    """Tests for the settings-table subcommand."""

    def test_csv_to_stdout(self, capsys):
        """CSV is the default format."""
        _run("settings-table", "--protocol", "ccp")
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 10
        assert rows[0][0] == "setting"

    def test_json_to_file(self, tmp_path):
        """--out writes the table to a file."""
        out = tmp_path / "tables" / "ss.json"
        _run("settings-table", "--protocol", "ss", "--convention", "table-s1", "--format", "json", "--out", str(out))
        assert json.loads(out.read_text(encoding="utf-8"))["convention"] == "table-s1"

    def test_table_s1_convention(self, capsys):
        """--convention table-s1 emits the recorded hardware relay settings."""
        _run("settings-table", "--protocol", "ss", "--convention", "table-s1", "--format", "json")
        document = json.loads(capsys.readouterr().out)
        assert document["convention"] == "table-s1"
        row = next(r for r in document["rows"] if r["setting"] == [2, 1])
        assert row["relay"] == ["0", "0", "2π/3"]

    def test_main_text_is_default(self):
        """settings-table parses main-text when no convention is given."""
        args = build_parser().parse_args(["settings-table", "--protocol", "ss"])
        assert args.convention == "main-text"

    def test_alias_reported_as_canonical(self, capsys):
        """x0-on-v is accepted and reported as table-s1."""
        _run("settings-table", "--protocol", "ss", "--convention", "x0-on-v", "--format", "json")
        assert json.loads(capsys.readouterr().out)["convention"] == "table-s1"

    def test_unwritable_output_exits_four(self, tmp_path):
        """A directory in place of the output file exits with the I/O code."""
        (tmp_path / "busy").mkdir()
        assert _exit_code("settings-table", "--protocol", "dba", "--out", str(tmp_path / "busy")) == 4


class TestSimulate:
    """Tests for the simulate subcommand."""

    ARGS = ("simulate", "--protocol", "ccp", "--zero-noise", "--triggers", "20000", "--seed", "3")

    def test_csv_output(self, tmp_path):
        """A small zero-noise CCP campaign writes one row per recorded setting."""
        out = tmp_path / "ccp.csv"
        _run(*self.ARGS, "--out", str(out))
        rows = list(csv.DictReader(io.StringIO(out.read_text(encoding="utf-8"))))
        assert len(rows) == 18
        assert all(row["value_pct"] == "100.00" for row in rows)

    def test_same_seed_byte_identical(self, tmp_path):
        """Two runs with one seed write identical files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        _run(*self.ARGS, "--format", "json", "--out", str(first))
        _run(*self.ARGS, "--format", "json", "--out", str(second))
        assert first.read_bytes() == second.read_bytes()
        assert json.loads(first.read_text(encoding="utf-8"))["seed"] == 3

    def test_config_file(self, tmp_path, capsys):
        """Settings from a JSON config file are simulated."""
        config = tmp_path / "campaign.json"
        config.write_text(json.dumps({"protocol": "dba", "settings": [[0, 0, 0, 0, 0, 0]], "noise": {"triggers": 20000}}))
        _run("simulate", "--config", str(config), "--zero-noise")
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert [row["setting"] for row in rows] == ["0,0|0,0|0,0"]

    def test_bad_config_exits_two(self, tmp_path, capsys):
        """An unknown config key exits with the configuration code."""
        config = tmp_path / "campaign.json"
        config.write_text('{"protocl": "ss"}')
        assert _exit_code("simulate", "--config", str(config)) == 2
        assert "protocl" in capsys.readouterr().err


class TestCalibrateDrift:
    """Tests for the calibrate-drift subcommand."""

    def test_one_percent_target(self, capsys):
        """A 1% target needs roughly 0.15 rad of drift."""
        _run("calibrate-drift", "--target", "0.01")
        assert "Drift sigma for target 0.0100: 0.15" in capsys.readouterr().out

    def test_unreachable_target(self):
        """Targets outside [0, 0.5) exit non-zero."""
        assert _exit_code("calibrate-drift", "--target", "0.9") != 0


class TestSession:
    """Tests for the session subcommand."""

    def test_amplified_session(self, capsys):
        """The block size for p_cheat = 1/3 and p_bar = 1e-4 is 9."""
        _run("session", "--rounds", "600", "--p-cheat", "0.3333333333", "--p-bar", "1e-4", "--seed", "2")
        out = capsys.readouterr().out
        assert "Rounds: 600" in out
        assert "Privacy amplification: 9 rounds per trit" in out
        assert "QTER: 0.00%" in out

    def test_broken_campaign_file_is_ignored(self, tmp_path, capsys):
        """A session needs only a seed, so an invalid .qutritcomm.toml does not stop it."""
        (tmp_path / ".qutritcomm.toml").write_text('protocl = "ss"\n[noise]\ndrift_target = 0.9\n')
        _run("session", "--rounds", "60", "--seed", "1")
        assert "Rounds: 60" in capsys.readouterr().out

    def test_seed_from_environment(self, monkeypatch, capsys):
        """QUTRITCOMM_SEED seeds a session when --seed is omitted."""
        _run("session", "--rounds", "90", "--seed", "8")
        flagged = capsys.readouterr().out
        monkeypatch.setenv("QUTRITCOMM_SEED", "8")
        _run("session", "--rounds", "90")
        assert capsys.readouterr().out == flagged
