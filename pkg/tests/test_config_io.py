"""Configuration parsing, file formats, and atomic output."""

import os

import numpy as np
import pytest

from gpesolve import Grid, WaveField
from gpesolve import io
from gpesolve.config import ConfigError, RunConfig, apply_overrides, format_config, parse_config_text
from gpesolve.optim import IterationRecord

MINIMAL = """
# a comment
grid.d = 1
grid.L = 16     # trailing comment
grid.M = 64
model.eta = 250
solver.method = pcg
"""


class TestConfigParsing:
    def test_parse_and_types(self):
        cfg = RunConfig.from_text(MINIMAL)
        g = cfg.grid()
        assert (g.d, g.L, g.M) == (1, 16.0, 64)
        assert cfg.model_params().eta == 250.0
        assert cfg.method == "pcg"
        assert cfg.init_kind() == "tf"  # auto: eta > 0

    def test_round_trip_identity(self):
        cfg = RunConfig.from_text(MINIMAL)
        text = cfg.to_text()
        again = RunConfig.from_text(text)
        assert again.mapping == cfg.mapping
        assert parse_config_text(format_config(parse_config_text(MINIMAL))) == parse_config_text(MINIMAL)

    def test_missing_required_key(self):
        with pytest.raises(ConfigError, match="grid.L"):
            RunConfig.from_text("grid.d = 1\ngrid.M = 64\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="grid.spacing"):
            RunConfig.from_text(MINIMAL + "\ngrid.spacing = 0.1\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="solver.tol"):
            RunConfig.from_text(MINIMAL + "\nsolver.tol = tiny\n")

    def test_overrides(self):
        cfg = RunConfig.from_text(MINIMAL, overrides=["model.eta=0", "solver.precond=kinetic"])
        assert cfg.model_params().eta == 0.0
        assert cfg.solver_config().precond == "kinetic"
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["oops"])

    def test_scheme_methods(self):
        cfg = RunConfig.from_text(MINIMAL, overrides=["solver.method=be_lambda", "solver.dt=0.02"])
        scheme = cfg.scheme()
        assert scheme.scheme == "be_lambda"
        assert scheme.dt == 0.02

    def test_multigrid_schedule(self):
        cfg = RunConfig.from_text(MINIMAL + "multigrid.levels = 64:1e-10,128:1e-11,256:1e-12\n")
        assert cfg.multigrid_schedule() == [(64, 1e-10), (128, 1e-11), (256, 1e-12)]
        with pytest.raises(ConfigError, match="increasing"):
            RunConfig.from_text(MINIMAL + "multigrid.levels = 128,64\n")

    def test_init_kind_validation(self):
        with pytest.raises(ConfigError, match="init.kind"):
            RunConfig.from_text(MINIMAL + "init.kind = vortexlattice\n")


class TestFieldDump:
    def test_round_trip(self, tmp_path):
        g = Grid(2, 8.0, 16)
        rng = np.random.default_rng(3)
        phi = WaveField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        path = str(tmp_path / "field.gpef")
        io.save_field(path, phi)
        back = io.load_field(path)
        assert back.grid == g
        assert np.array_equal(back.values, phi.values)

    def test_header_layout(self, tmp_path):
        g = Grid(1, 4.0, 16)
        phi = WaveField(g, np.zeros(16, dtype=complex))
        path = str(tmp_path / "f.gpef")
        io.save_field(path, phi)
        raw = open(path, "rb").read()
        assert raw[:4] == b"GPEF"
        assert len(raw) == 4 + 4 + 24 + 16 * 16
        import struct
        assert struct.unpack_from("<I", raw, 4)[0] == 1
        assert struct.unpack_from("<3d", raw, 8) == (1.0, 16.0, 4.0)

    def test_bad_magic(self, tmp_path):
        path = str(tmp_path / "junk.gpef")
        open(path, "wb").write(b"NOPE" + b"\0" * 64)
        with pytest.raises(ValueError, match="GPEF"):
            io.load_field(path)


class TestCsvOutputs:
    def _records(self):
        return [IterationRecord(n=i, energy=1.0 - 0.1 * i, lam=2.0, r_inf=0.5**i,
                                step_inf=0.1, theta=0.2, beta=0.0, backtracks=0,
                                fft_count=5, wall_time=0.01 * i) for i in range(3)]

    def test_records_csv_layout(self, tmp_path):
        path = str(tmp_path / "conv.csv")
        io.write_records_csv(path, self._records())
        lines = open(path).read().splitlines()
        assert lines[0] == "n,energy,lam,r_inf,step_inf,theta,beta,backtracks,fft_count,wall_time"
        assert len(lines) == 4

    def test_numeric_payload_deterministic(self):
        a = io.records_csv_text(self._records())
        b = io.records_csv_text(self._records())
        assert a == b

    def test_density_csv(self, tmp_path):
        g = Grid(1, 2.0, 4)
        phi = WaveField(g, np.arange(4, dtype=complex))
        path = str(tmp_path / "density.csv")
        io.write_density_csv(path, phi)
        lines = open(path).read().splitlines()
        assert lines[0] == "x,density"
        assert len(lines) == 5
        x0, d0 = map(float, lines[1].split(","))
        assert (x0, d0) == (-2.0, 0.0)
        x3, d3 = map(float, lines[4].split(","))
        assert (x3, d3) == (1.0, 9.0)

    def test_atomic_write_leaves_no_partials(self, tmp_path):
        target = tmp_path / "out.txt"
        io.atomic_write_text(str(target), "hello")
        assert target.read_text() == "hello"
        leftovers = [p for p in os.listdir(tmp_path) if p != "out.txt"]
        assert leftovers == []
