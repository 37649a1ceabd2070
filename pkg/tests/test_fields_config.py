"""Field container, snapshot round trips, and config parsing/validation."""

import math

import numpy as np
import pytest

from couetteks.config import SimConfig, dump_config, parse_config
from couetteks.fields import Field, read_snapshot, write_snapshot


def test_field_validation():
    with pytest.raises(ValueError):
        Field(np.zeros((3, 4)), (0.1, 0.1), (0.0, 0.0))  # 3 not a power of two
    with pytest.raises(ValueError):
        Field(np.zeros((4, 4)), (0.1, -0.1), (0.0, 0.0))
    with pytest.raises(ValueError):
        Field(np.zeros(8), (0.1,), (0.0,))  # 1-D not allowed


def test_field_norms_and_mass():
    vals = np.full((8, 8), 2.0)
    f = Field(vals, (0.5, 0.25), (0.0, 0.0))
    area = 8 * 0.5 * 8 * 0.25
    assert f.mass() == pytest.approx(2.0 * area)
    assert f.lp_norm(2) == pytest.approx(math.sqrt(4.0 * area))
    assert f.lp_norm(math.inf) == 2.0
    assert f.is_finite()
    f2 = f.with_values(vals * np.nan)
    assert not f2.is_finite()


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    f = Field(rng.normal(size=(16, 8)), (0.2, 0.3), (-1.6, -1.2), time=2.5)
    base = tmp_path / "snap"
    write_snapshot(f, base, A=50.0, epsilon=1, frame="sheared")
    g, meta = read_snapshot(base)
    assert np.array_equal(g.values, f.values)
    assert g.spacing == f.spacing and g.origin == f.origin and g.time == 2.5
    assert meta["A"] == 50.0 and meta["epsilon"] == 1 and meta["frame"] == "sheared"


def test_snapshot_length_mismatch(tmp_path):
    f = Field(np.zeros((8, 8)), (0.1, 0.1), (0.0, 0.0))
    base = tmp_path / "snap"
    write_snapshot(f, base, A=0.0, epsilon=0)
    (tmp_path / "snap.bin").write_bytes(b"\x00" * 100)
    with pytest.raises(ValueError):
        read_snapshot(base)


def test_snapshot_rejects_bad_frame(tmp_path):
    f = Field(np.zeros((8, 8)), (0.1, 0.1), (0.0, 0.0))
    with pytest.raises(ValueError):
        write_snapshot(f, tmp_path / "s", A=0.0, epsilon=0, frame="weird")


def test_parse_config_basic():
    cfg = parse_config(
        """
        # comment
        epsilon = 0
        A = 100
        dims = 2
        box = 400 40
        resolution = 256 64
        dt = 0.005
        t_final = 10
        dealias = on
        remap = on
        init_shape = exponential
        C0 = 8
        Cstar = 2
        snapshot_times = 1 5 10
        """
    )
    assert cfg.A == 100.0 and cfg.resolution == (256, 64)
    assert cfg.init_shape == "exponential"
    assert cfg.snapshot_times == (1.0, 5.0, 10.0)
    assert cfg.spacing[0] == pytest.approx(400 / 256)


def test_config_round_trip():
    cfg = SimConfig(A=25.0, box=(80.0, 80.0), resolution=(64, 64), t_final=3.0)
    cfg2 = parse_config(dump_config(cfg))
    assert cfg2 == cfg


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        SimConfig(epsilon=2)
    with pytest.raises(ValueError):
        SimConfig(resolution=(100, 100))
    with pytest.raises(ValueError):
        SimConfig(box=(10.0, 40.0))  # < 20 * Cstar
    with pytest.raises(ValueError):
        parse_config("nonsense_key = 1")
    with pytest.raises(ValueError):
        parse_config("epsilon 0")


def test_config_remap_off_box_constraint():
    with pytest.raises(ValueError):
        SimConfig(A=100.0, t_final=10.0, box=(40.0, 40.0), remap=False)
    # remap on: same box accepted
    SimConfig(A=100.0, t_final=10.0, box=(40.0, 40.0), remap=True)


def test_config_shear_window_warning():
    cfg = SimConfig(epsilon=1, A=100.0, C0=1.0, C0star=0.5)
    assert any("shear window" in w for w in cfg.warnings)
    cfg2 = SimConfig(epsilon=1, A=100.0, C0=1.0, C0star=0.001)
    assert not cfg2.warnings
