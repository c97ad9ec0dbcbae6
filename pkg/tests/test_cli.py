import json
import subprocess
import sys

import numpy as np
import pytest

from jnsc.bitmatrix import BitMatrix
from jnsc.cli import main
from jnsc.harness import read_csv
from jnsc.matio import load_matrix, save_matrix
from jnsc.netcode import NetworkSpec, save_network
from jnsc.rdcodec import LinearCode
from jnsc.syndrome import structured_ldpc


def combination_net() -> NetworkSpec:
    # one source, four relays, a terminal behind every relay pair
    edges = [(0, r) for r in (1, 2, 3, 4)]
    t = 5
    terminals = []
    for i in (1, 2, 3, 4):
        for j in range(i + 1, 5):
            edges += [(i, t), (j, t)]
            terminals.append(t)
            t += 1
    return NetworkSpec(nodes=tuple(range(t)), edges=tuple(edges), source=0,
                       terminals=tuple(terminals))


def test_sparsify_round_trip(tmp_path, capsys):
    A = LinearCode.random(24, 18, np.random.default_rng(3)).generator
    src = tmp_path / "a.txt"
    out = tmp_path / "s.txt"
    tr = tmp_path / "t.txt"
    save_matrix(A, src)
    assert main(["sparsify", "--in", str(src), "--trials", "10", "--passes", "2",
                 "--seed", "1", "--out", str(out), "--transform", str(tr)]) == 0
    S = load_matrix(out)
    T = load_matrix(tr)
    assert A @ T == S
    assert S.density <= A.density
    assert "density" in capsys.readouterr().out


def test_sparsify_bad_paths_and_rank(tmp_path):
    assert main(["sparsify", "--in", str(tmp_path / "missing.txt"),
                 "--seed", "1", "--out", str(tmp_path / "o.txt")]) == 2
    dup = BitMatrix.from_dense(np.array([[1, 1], [1, 1], [0, 0]], dtype=np.uint8))
    src = tmp_path / "dup.txt"
    save_matrix(dup, src)
    assert main(["sparsify", "--in", str(src), "--seed", "1",
                 "--out", str(tmp_path / "o.txt")]) == 3


def test_rd_bench(tmp_path, capsys):
    out = tmp_path / "rd.csv"
    assert main(["rd-bench", "--n", "24", "--rate", "0.5", "--draws", "1,2",
                 "--instances", "3", "--seed", "4", "--out", str(out)]) == 0
    kind, _, rows = read_csv(out)
    assert kind == "rd_gap" and len(rows) == 2
    assert "mean distortion" in capsys.readouterr().out


def test_netcode_butterfly_json(tmp_path, capsys):
    out = tmp_path / "code.json"
    assert main(["netcode", "--butterfly", "--m", "4", "--seed", "2",
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["m"] == 4 and payload["w"] == 2
    assert payload["maxflows"] == {"5": 2, "6": 2}
    assert len(payload["global_vectors"]) == len(payload["edges"])
    for rows in payload["transfer"].values():
        assert len(rows) == 8
        assert all(set(r) <= {"0", "1"} and len(r) == 8 for r in rows)
    for t, sel in payload["selected_edges"].items():
        assert len(sel) == payload["maxflows"][t]
    assert "rank 8" in capsys.readouterr().out


def test_netcode_random_dag(tmp_path):
    out = tmp_path / "code.json"
    assert main(["netcode", "--random", "40", "--m", "4", "--terminals", "2",
                 "--seed", "9", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["terminals"]) == 2


def test_netcode_field_too_small(tmp_path):
    net_path = tmp_path / "comb.net"
    save_network(combination_net(), net_path)
    # four relay vectors cannot be pairwise independent over GF(2)
    assert main(["netcode", "--network", str(net_path), "--m", "1",
                 "--seed", "1", "--out", str(tmp_path / "c.json")]) == 3
    assert main(["netcode", "--network", str(tmp_path / "nope.net"), "--m", "2",
                 "--seed", "1", "--out", str(tmp_path / "c.json")]) == 2


def test_ber_structured(tmp_path, capsys):
    out = tmp_path / "ber.csv"
    assert main(["ber", "--structured", "60", "--p-list", "0.02", "--bits",
                 "300", "--seed", "3", "--out", str(out)]) == 0
    kind, _, rows = read_csv(out)
    assert kind == "ber_sweep" and len(rows) == 1
    assert 0.0 <= float(rows[0]["ber"]) <= 0.05
    assert "converged" in capsys.readouterr().out


def test_ber_matrix_file_and_zero_bits(tmp_path, capsys):
    H = structured_ldpc(60, 5)
    mat = tmp_path / "H.txt"
    save_matrix(H, mat)
    out = tmp_path / "ber.csv"
    assert main(["ber", "--H", str(mat), "--p-list", "0.02", "--bits", "120",
                 "--seed", "3", "--out", str(out)]) == 0
    assert len(read_csv(out)[2]) == 1
    assert main(["ber", "--structured", "60", "--p-list", "0.02", "--bits", "0",
                 "--seed", "3", "--out", str(out)]) == 0
    assert read_csv(out)[2] == []
    assert "header only" in capsys.readouterr().out


def test_run_config(tmp_path, capsys):
    csv_path = tmp_path / "probs.csv"
    cfg = tmp_path / "probs.cfg"
    cfg.write_text(f"kind = entry_probabilities\nseed = 3\nn = 128\nlam = 4\n"
                   f"l_list = 1,2\nresamples = 50\nrows = 64\n"
                   f"csv = {csv_path}\n")
    assert main(["run", str(cfg)]) == 0
    assert read_csv(csv_path)[0] == "entry_probabilities"
    assert "2 rows" in capsys.readouterr().out
    override = tmp_path / "other.csv"
    assert main(["run", str(cfg), "--out", str(override)]) == 0
    assert override.exists()
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("kind = nope\nseed = 1\n")
    assert main(["run", str(bad)]) == 2


def test_compare_exit_codes(tmp_path):
    a, b, c = (str(tmp_path / n) for n in ("a.csv", "b.csv", "c.csv"))
    base = ["rd-bench", "--n", "24", "--rate", "0.5", "--draws", "1",
            "--instances", "3"]
    assert main(base + ["--seed", "5", "--out", a]) == 0
    assert main(base + ["--seed", "5", "--out", b]) == 0
    assert main(base + ["--seed", "6", "--out", c]) == 0
    assert main(["compare", a, b]) == 0
    assert main(["compare", a, c]) == 1
    assert main(["compare", a, c, "--tol", "1.0"]) == 0
    (tmp_path / "other.csv").write_text("# kind=ber_sweep\nx\n1\n")
    assert main(["compare", a, str(tmp_path / "other.csv")]) == 2
    assert main(["compare", a, str(tmp_path / "gone.csv")]) == 2


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["sparsify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "probs.cfg"
    cfg.write_text("kind = entry_probabilities\nseed = 3\nn = 64\nlam = 4\n"
                   "l_list = 1\nresamples = 20\nrows = 32\n")
    proc = subprocess.run([sys.executable, "-m", "jnsc", "run", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "1 rows" in proc.stdout
