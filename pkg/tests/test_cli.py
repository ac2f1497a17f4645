import math

import numpy as np
import pytest

from netdr.cli import ConfigError, load_config, main, run_experiment

REPLICATION = """\
# 20 x 40 standard normal data over six agents
data = generate
n = 20
p = 40
data_seed = 0
split = arbitrary-overlapping
split_seed = 0
network = random-walk
m = 6
network_seed = 0
f = l1
eps = 0.01
lambda = 0.02
rho = 1.9
max_iter = {max_iter}
stride = {stride}
output = out
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_replication_config_loads(tmp_path):
    cfg = load_config(write(tmp_path, REPLICATION.format(max_iter=4000, stride=1)))
    assert (cfg.n, cfg.p, cfg.m) == (20, 40, 6)
    assert (cfg.eps, cfg.lam, cfg.rho, cfg.f) == (0.01, 0.02, 1.9, "l1")
    assert cfg.stride == 1 and cfg.stop_tol == 0.0 and cfg.probe == 1
    assert cfg.output == tmp_path / "out"


def test_rho_out_of_range_named(tmp_path):
    text = REPLICATION.format(max_iter=10, stride=1).replace("rho = 1.9", "rho = 2.0")
    with pytest.raises(ConfigError, match="line 14: key 'rho'"):
        load_config(write(tmp_path, text))


def test_empty_config_lists_missing(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(write(tmp_path, ""))
    for key in ("data", "split", "network", "f", "eps", "lambda", "rho", "max_iter", "output"):
        assert key in str(info.value)


def test_unknown_regularizer(tmp_path):
    text = REPLICATION.format(max_iter=10, stride=1).replace("f = l1", "f = huber")
    with pytest.raises(ConfigError, match="key 'f'"):
        load_config(write(tmp_path, text))


def test_missing_conditional_key(tmp_path):
    text = REPLICATION.format(max_iter=10, stride=1).replace("m = 6\n", "")
    with pytest.raises(ConfigError, match="'m'"):
        load_config(write(tmp_path, text))


def test_run_writes_outputs_and_is_deterministic(tmp_path, capsys):
    cfg_path = write(tmp_path, REPLICATION.format(max_iter=25, stride=4))
    assert main(["run", str(cfg_path)]) == 0
    out = tmp_path / "out"
    files = ["trace.csv", "agents_beta.csv", "central_beta.csv", "ledger.txt", "summary.txt"]
    first = {name: (out / name).read_bytes() for name in files}
    trace_rows = first["trace.csv"].decode().splitlines()
    assert trace_rows[0] == "iter,rel_error,consensus_gap,feasibility_gap,step_norm"
    assert len(trace_rows) - 1 == math.ceil(25 / 4)
    assert np.loadtxt(out / "agents_beta.csv", delimiter=",").shape == (6, 40)
    assert "iterations=25" in capsys.readouterr().out

    assert main(["run", str(cfg_path)]) == 0
    assert {name: (out / name).read_bytes() for name in files} == first

    # the ledger written by the run audits clean
    assert main(["audit", str(out / "ledger.txt")]) == 0
    assert "0 violations" in capsys.readouterr().out


def test_replication_full_length_trace(tmp_path):
    cfg_path = write(tmp_path, REPLICATION.format(max_iter=4000, stride=1))
    assert main(["run", str(cfg_path)]) == 0
    rows = (tmp_path / "out" / "trace.csv").read_text().splitlines()
    assert len(rows) == 4001


def test_files_mode_identity_instance(tmp_path):
    np.savetxt(tmp_path / "X.csv", np.eye(2), delimiter=",")
    np.savetxt(tmp_path / "y.csv", [2.0, 0.0], delimiter=",")
    text = """\
data = files
x_path = X.csv
y_path = y.csv
split = rows
network = random-walk
m = 2
f = l1
eps = 0.5
lambda = 0.02
rho = 1.9
max_iter = 5000
stop_tol = 1e-13
output = out
"""
    assert main(["run", str(write(tmp_path, text))]) == 0
    betas = np.loadtxt(tmp_path / "out" / "agents_beta.csv", delimiter=",")
    assert np.allclose(betas, [[1.5, 0.0], [1.5, 0.0]], atol=1e-6)
    central = np.loadtxt(tmp_path / "out" / "central_beta.csv")
    assert np.allclose(central, [1.5, 0.0], atol=1e-9)


def test_missing_data_file_exit_3(tmp_path):
    text = REPLICATION.format(max_iter=5, stride=1).replace(
        "data = generate", "data = files\nx_path = nope.csv\ny_path = nope_y.csv"
    )
    assert main(["run", str(write(tmp_path, text))]) == 3


def test_bad_config_exit_2(tmp_path):
    assert main(["run", str(write(tmp_path, "rho = 3\n"))]) == 2
    assert main(["run", str(tmp_path / "absent.cfg")]) == 2


def test_central_nonconvergence_exit_4(tmp_path):
    text = REPLICATION.format(max_iter=5, stride=1) + "central_max_iter = 3\n"
    assert run_experiment(load_config(write(tmp_path, text))) == 4


def test_central_subcommand(tmp_path, capsys):
    cfg_path = write(tmp_path, REPLICATION.format(max_iter=5, stride=1))
    assert main(["central", str(cfg_path)]) == 0
    beta = np.loadtxt(tmp_path / "out" / "central_beta.csv")
    assert beta.shape == (40,)
    assert "converged=True" in capsys.readouterr().out


def test_gen_network(capsys):
    assert main(["gen-network", "6", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m 6" and all(line.startswith("edge ") for line in lines[1:])


def test_audit_detects_forged_ledger(tmp_path, capsys):
    path = write(tmp_path, "m 3\nedge 1 2\nedge 2 3\nmsg 1 1 2 4\nmsg 1 2 1 4\nmsg 1 2 3 4\nmsg 1 3 2 4\nmsg 1 1 3 4\n",
                 "ledger.txt")
    assert main(["audit", str(path)]) == 1
    assert "not an edge" in capsys.readouterr().out


def test_network_and_mask_files(tmp_path):
    (tmp_path / "net.txt").write_text("m 2\nedge 1 2\n")
    (tmp_path / "masks.txt").write_text(
        "agent 1 cell 1 1\nagent 1 cell 1 2\nagent 2 cell 1 2\nagent 1 label 1\n"
    )
    np.savetxt(tmp_path / "X.csv", [[1.0, 2.0]], delimiter=",")
    np.savetxt(tmp_path / "y.csv", [1.0], delimiter=",")
    text = """\
data = files
x_path = X.csv
y_path = y.csv
split = file
mask_path = masks.txt
network = file
network_path = net.txt
f = l1
eps = 0.1
lambda = 0.05
rho = 1.5
max_iter = 20
output = out
"""
    assert main(["run", str(write(tmp_path, text))]) == 0
