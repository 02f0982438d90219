"""
Tests for INI study configuration and override precedence
"""

from pathlib import Path

import pytest

from ..config import build_spec, parse_config, read_config_values
from ..stokes_types import CaseId, ConfigurationError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


@pytest.fixture
def write_config(tmp_path):
    def _write(text):
        path = tmp_path / "study.ini"
        path.write_text(text)
        return path
    return _write


class TestParseConfig:
    def test_no_file_gives_defaults(self):
        spec = parse_config()
        assert spec.case == CaseId.TEST1
        assert spec.solver.tol == 1e-10

    def test_empty_file_gives_defaults(self, write_config):
        spec = parse_config(write_config(""))
        assert spec.p == [1.6]
        assert spec.levels == [8, 16, 32, 64]

    def test_lists_and_nested_fields(self, write_config):
        spec = parse_config(write_config(
            "[case]\np = 2, 1.6\nlambda = 0.5\nkappa = 2\n"
            "[solver]\ntol = 1e-8\nsigma = 0, 1e-3\nwarm_start = true\n"
            "[mesh]\nlevels = 4, 8\n"
            "[output]\nout = somewhere\n"
        ))
        assert spec.p == [2.0, 1.6]
        assert spec.lam == 0.5
        assert spec.solver.kappa == 2.0
        assert spec.solver.tol == 1e-8
        assert spec.solver.warm_start is True
        assert spec.sigma == [0.0, 1e-3]
        assert spec.levels == [4, 8]
        assert spec.output_dir == Path("somewhere")

    def test_invalid_value_reports_line(self, write_config):
        path = write_config("# comment\n[solver]\nmax_iter = 10\ntol = -1\n")
        with pytest.raises(ConfigurationError, match="solver.tol") as exc:
            parse_config(path)
        assert exc.value.line == 4
        assert "line 4" in str(exc.value)

    def test_invalid_list_entry_reports_line(self, write_config):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(write_config("[case]\np = 1.6, 2.5\n"))
        assert exc.value.line == 2

    def test_unknown_key(self, write_config):
        with pytest.raises(ConfigurationError, match="unknown key 'tolerance'") as exc:
            parse_config(write_config("[solver]\n\ntolerance = 1e-8\n"))
        assert exc.value.line == 3

    def test_unknown_section(self, write_config):
        with pytest.raises(ConfigurationError, match="unknown section") as exc:
            parse_config(write_config("[case]\np = 1.6\n[plots]\nwidth = 3\n"))
        assert exc.value.line == 3

    def test_key_outside_section(self, write_config):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(write_config("tol = 1e-8\n"))
        assert exc.value.line == 1

    def test_duplicate_section(self, write_config):
        with pytest.raises(ConfigurationError):
            parse_config(write_config("[case]\np = 1.6\n[case]\np = 2\n"))

    def test_missing_file_is_an_io_error(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_config(tmp_path / "absent.ini")

    def test_overrides_take_precedence(self, write_config):
        path = write_config("[solver]\ntol = 1e-8\nmax_iter = 5\n")
        spec = parse_config(path, overrides={"solver.tol": 1e-6, "solver.max_iter": None})
        assert spec.solver.tol == 1e-6
        assert spec.solver.max_iter == 5

    def test_invalid_override_has_no_line(self, write_config):
        path = write_config("[solver]\ntol = 1e-8\n")
        with pytest.raises(ConfigurationError) as exc:
            parse_config(path, overrides={"solver.tol": -1.0})
        assert exc.value.line is None

    def test_eta_consistency(self, write_config):
        with pytest.raises(ConfigurationError, match="eta0 must exceed eta_inf"):
            parse_config(write_config("[case]\neta_inf = 2\neta0 = 1\n"))


class TestShippedConfigs:
    def test_test1(self):
        spec = parse_config(CONFIG_DIR / "test1.ini")
        assert spec.case == CaseId.TEST1
        assert spec.p == [2.0, 1.6, 1.2]
        assert spec.resolved_eta_inf == 0.5
        assert spec.sigma_values() == [0.0]

    def test_test2(self):
        spec = parse_config(CONFIG_DIR / "test2.ini")
        assert spec.case == CaseId.TEST2
        assert spec.resolved_eta_inf == 0.0
        assert spec.sigma_values() == [0.0, 1e-2, 1e-3, 1e-4, 1e-5]
        assert spec.solver.max_iter == 200
        assert spec.jobs == 2


class TestHelpers:
    def test_read_config_values(self):
        values, lines = read_config_values("[mesh]\ndegree = 3\nlevels = 2,4\n")
        assert values == {"degree": "3", "levels": ["2", "4"]}
        assert lines == {"degree": 2, "levels": 3}

    def test_build_spec_without_lines(self):
        spec = build_spec({"case": "test2", "solver.sigma": "0.1"})
        assert spec.case == CaseId.TEST2
        assert spec.solver.sigma == 0.1
