import numpy as np
import pytest

from nearwave import chanfile
from nearwave.cli import main, parse_config


def test_synth_writes_preset_shape(tmp_path):
    assert main(["synth", "--preset", "ula32-single", "--out", str(tmp_path)]) == 0
    values = chanfile.read_channel(tmp_path / "channel.bin")
    assert values.shape == (1, 1, 32, 1, 1)
    meta = chanfile.read_metadata(tmp_path / "channel.bin.meta")
    assert meta["subcommand"] == "synth"
    assert meta["ntx"] == "32"


def test_synth_round_trip_bit_identical(tmp_path):
    main(["synth", "--preset", "ula8-ula8", "--out", str(tmp_path)])
    path = tmp_path / "channel.bin"
    values = chanfile.read_channel(path)
    second = tmp_path / "copy.bin"
    chanfile.write_channel(second, values)
    assert path.read_bytes()[40:] == second.read_bytes()[40:]
    assert np.array_equal(values, chanfile.read_channel(second))


def test_synth_missing_output_dir_exit_3(tmp_path, capsys):
    missing = tmp_path / "does" / "not" / "exist"
    assert main(["synth", "--out", str(missing)]) == 3
    assert "error" in capsys.readouterr().err


def test_unknown_preset_exit_2(tmp_path, capsys):
    assert main(["synth", "--preset", "nope", "--out", str(tmp_path)]) == 2
    assert "unknown" in capsys.readouterr().err


def test_estimate_round_trip(tmp_path, capsys):
    config = tmp_path / "synth.cfg"
    config.write_text("amplitude = unit\npose = fixed\npose_r = 0 0 9\n")
    main(["synth", "--preset", "ula8-single", "--config", str(config),
          "--out", str(tmp_path)])
    code = main(["estimate", "--input", str(tmp_path / "channel.bin"),
                 "--degree", "2", "--out", str(tmp_path)])
    assert code == 0
    rows = (tmp_path / "coefficients.csv").read_text().strip().splitlines()
    assert rows[0] == "m_rx,m_ry,m_tx,m_ty,m_f,a_cycles"
    assert len(rows) == 4  # 3 coefficients for a line at degree 2, plus header
    meta = chanfile.read_metadata(tmp_path / "coefficients.csv.meta")
    assert float(meta["reconstruction_mse_db"]) < -100.0


def test_estimate_requires_input(tmp_path, capsys):
    assert main(["estimate", "--out", str(tmp_path)]) == 2


def test_mse_row_count_and_determinism(tmp_path, capsys):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    out_a.mkdir()
    out_b.mkdir()
    for out in (out_a, out_b):
        code = main(["mse", "--preset", "fig5a", "--trials", "2",
                     "--seed", "7", "--out", str(out)])
        assert code == 0
    assert "warning" in capsys.readouterr().err  # low trial count
    rows = (out_a / "mse.csv").read_text().strip().splitlines()
    assert rows[0] == "snr_db,mse_db_1,mse_db_2,mse_db_3"
    assert len(rows) == 22
    assert (out_a / "mse.csv").read_bytes() == (out_b / "mse.csv").read_bytes()
    crb = (out_a / "crb.csv").read_text().strip().splitlines()
    assert crb[0] == "snr_db,crb_db_1,crb_db_2,crb_db_3,ls_db"


def test_mse_config_overrides(tmp_path):
    config = tmp_path / "mse.cfg"
    config.write_text("snr_grid = 0 10\ndegree_list = 1 2\ntrials = 2\n")
    assert main(["mse", "--preset", "fig5a", "--config", str(config),
                 "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "mse.csv").read_text().strip().splitlines()
    assert rows[0] == "snr_db,mse_db_1,mse_db_2"
    assert len(rows) == 3


def test_mse_rejects_unknown_config_key(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("bogus = 1\n")
    assert main(["mse", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_mle_trajectories(tmp_path):
    config = tmp_path / "mle.cfg"
    config.write_text("iterations = 8\nsnr_db = 10\n")
    code = main(["mle", "--preset", "fig3a", "--config", str(config),
                 "--starts", "3", "--seed", "1", "--out", str(tmp_path)])
    assert code == 0
    rows = (tmp_path / "trajectories.csv").read_text().strip().splitlines()
    assert rows[0] == "Iteration,Best_1_Cost_dB,Best_2_Cost_dB,Best_3_Cost_dB,Proxy_Cost_dB"
    assert len(rows) == 10  # iterations + initial cost + header


def test_landscape_output(tmp_path):
    config = tmp_path / "scan.cfg"
    config.write_text("d_range = 4.99 5.01\nstep = 0.0005\n")
    code = main(["landscape", "--preset", "fig9", "--config", str(config),
                 "--out", str(tmp_path)])
    assert code == 0
    rows = (tmp_path / "landscape.csv").read_text().strip().splitlines()
    assert rows[0] == "z,point,plane"
    values = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    assert values.shape == (41, 3)
    nearest = np.argmin(np.abs(values[:, 0] - 5.0))
    assert values[nearest, 1] < 1e-8
    assert values[nearest, 2] < 1e-8


def test_estimate_missing_input_file_exit_3(tmp_path, capsys):
    assert main(["estimate", "--input", str(tmp_path / "nope.bin"),
                 "--out", str(tmp_path)]) == 3


def test_landscape_rejects_bad_range(tmp_path, capsys):
    config = tmp_path / "scan.cfg"
    config.write_text("d_range = 5.4 4.6\n")
    code = main(["landscape", "--preset", "fig9", "--config", str(config),
                 "--out", str(tmp_path)])
    assert code == 2


def test_parse_config_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    from nearwave.cli import ConfigError
    with pytest.raises(ConfigError):
        parse_config(bad)
