import io
import json
import subprocess
import sys

import numpy as np
import pytest

from leezk.cli import cli_main
from leezk.problems import load_instance
from leezk.wire import HEADER, MsgType, read_frame

CLI = [sys.executable, "-m", "leezk.cli"]


def run(argv, capsys):
    code = cli_main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def inst_files(tmp_path, capsys):
    inst, wit = tmp_path / "inst.json", tmp_path / "wit.json"
    code, _, _ = run(["gen", "--n", 8, "--k", 4, "--m", 7, "--w", 8, "--seed", 3,
                      "--out", inst, "--witness-out", wit], capsys)
    assert code == 0
    return inst, wit


def test_bench_formula(capsys):
    code, out, err = run(["bench", "--n", 425, "--k", 229, "--m", 4], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["formula_bits"] == pytest.approx(1.008e6, rel=1e-3)
    assert "1.008e+06 bits" in err


def test_bench_measure_small(capsys):
    code, out, _ = run(["bench", "--n", 20, "--k", 10, "--m", 7, "--measure"], capsys)
    d = json.loads(out)
    assert code == 0 and set(d["response_bytes"]) == {"A", "B", "C"}
    assert d["worst_response_bits"] == 8 * d["response_bytes"]["A"]


def test_gen_prove_verify_transcript(tmp_path, inst_files, capsys):
    inst, wit = inst_files
    tr = tmp_path / "t.bin"
    code, out, _ = run(["prove", "--instance", inst, "--witness", wit, "--rounds", 16,
                        "--transcript-out", tr, "--seed", 1, "--verifier-seed", 2], capsys)
    assert code == 0 and json.loads(out)["accepted"]
    assert json.loads((tmp_path / "t.bin.json").read_text())["rounds"] == 16
    code, out, _ = run(["verify", "--instance", inst, "--rounds", 16, "--transcript-in", tr], capsys)
    assert code == 0 and json.loads(out)["accepted"]

    data = tr.read_bytes()
    stream = io.BytesIO(data)
    while True:
        start = stream.tell()
        if read_frame(stream).msg_type is MsgType.RESPONSE:
            break
    bad = bytearray(data)
    bad[start + HEADER.size + 40] ^= 0x10  # inside the first opening's salt
    tr.write_bytes(bytes(bad))
    code, _, err = run(["verify", "--instance", inst, "--transcript-in", tr], capsys)
    assert code == 1 and "rejected by check opening" in err

    tr.write_bytes(data[:-2])
    code, _, err = run(["verify", "--instance", inst, "--transcript-in", tr], capsys)
    assert code == 3 and "protocol error" in err


def test_usage_errors(tmp_path, inst_files, capsys):
    inst, wit = inst_files
    assert run(["prove", "--instance", inst, "--rounds", 2], capsys)[0] == 2
    assert run(["verify", "--instance", inst], capsys)[0] == 2
    assert run(["verify", "--instance", tmp_path / "missing.json", "--transcript-in", "x"], capsys)[0] == 2
    assert run(["gen", "--n", 4, "--k", 2, "--m", 7, "--w", 3, "--out", tmp_path / "x.json"], capsys)[0] == 2
    assert run(["bench", "--n", 4, "--k", 9, "--m", 7], capsys)[0] == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert run(["oracle", "--in", tmp_path / "junk.json"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2


def test_reduce_and_oracle(tmp_path, capsys):
    inst = tmp_path / "small.json"
    assert run(["gen", "--n", 3, "--k", 1, "--m", 5, "--w", 2, "--seed", 4, "--out", inst], capsys)[0] == 0
    code, out, _ = run(["oracle", "--in", inst, "--budget", 1000], capsys)
    assert code == 0 and json.loads(out)["decision"] == "yes"
    tern = tmp_path / "tern.json"
    assert run(["reduce", "--in", inst, "--mode", "ternary", "--out", tern], capsys)[0] == 0
    t, _ = load_instance(tern)
    assert t.variant.value == "ternary" and t.H.shape == (6, 2)
    code, out, _ = run(["oracle", "--in", tern, "--budget", 1000], capsys)
    assert code == 0 and json.loads(out)["decision"] == "yes"
    code, _, err = run(["oracle", "--in", tern, "--budget", 10], capsys)
    assert code == 2 and "budget" in err


def test_reduce_general_to_balanced(tmp_path, capsys):
    d = {"variant": "general", "m": 7, "n": 3, "k": 1, "w": 3,
         "H": [[1, 2], [0, 3], [-1, 1]], "s": [1, 2]}
    src = tmp_path / "g.json"
    src.write_text(json.dumps(d))
    code, out, _ = run(["reduce", "--in", src, "--mode", "balanced"], capsys)
    t = json.loads(out)
    assert code == 0 and t["variant"] == "balanced" and t["n"] == 2 * (3 + 2) and t["w"] == 6
    assert run(["reduce", "--in", src, "--mode", "balanced", "--c", 7], capsys)[0] == 2


def test_simulate(inst_files, capsys):
    inst, wit = inst_files
    code, out, _ = run(["simulate", "--instance", inst, "--challenge", "b", "--samples", 200,
                        "--witness", wit, "--seed", 1], capsys)
    d = json.loads(out)
    assert code == 0 and d["accepted"] == 200 == d["revealed_shape_ok"]
    assert 0 <= d["real_vs_simulated"]["p_value"] <= 1


def _network_session(inst, wit, prover_seed, verifier_seed, rounds=16):
    prover = subprocess.Popen(CLI + ["prove", "--instance", str(inst), "--witness", str(wit),
                                     "--rounds", str(rounds), "--listen", "127.0.0.1:0",
                                     "--seed", str(prover_seed)],
                              stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = prover.stderr.readline()
        assert line.startswith("listening on "), line
        addr = line.split()[-1]
        verifier = subprocess.run(CLI + ["verify", "--instance", str(inst), "--rounds", str(rounds),
                                         "--connect", addr, "--seed", str(verifier_seed)],
                                  capture_output=True, text=True, timeout=120)
        prover.wait(timeout=120)
    finally:
        prover.kill()
    return prover.returncode, verifier


def test_networked_session_matches_in_process(inst_files):
    from leezk.protocol import run_session

    inst, wit = inst_files
    pcode, verifier = _network_session(inst, wit, 11, 12)
    assert verifier.returncode == 0 and pcode == 0, verifier.stderr
    net = json.loads(verifier.stdout)
    loaded, _ = load_instance(inst)
    e = np.array(json.loads(wit.read_text())["e"])
    local = run_session(loaded, e, 16, np.random.default_rng(11), np.random.default_rng(12))
    assert net["verdicts"] == local.summary()["verdicts"]
    assert net["accepted"] is local.accepted is True


def test_networked_wrong_instance_is_protocol_error(tmp_path, inst_files, capsys):
    inst, wit = inst_files
    other = tmp_path / "other.json"
    run(["gen", "--n", 8, "--k", 4, "--m", 7, "--w", 8, "--seed", 4, "--out", other], capsys)
    prover = subprocess.Popen(CLI + ["prove", "--instance", str(inst), "--witness", str(wit),
                                     "--rounds", "4", "--listen", "127.0.0.1:0"],
                              stderr=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    try:
        addr = prover.stderr.readline().split()[-1]
        v = subprocess.run(CLI + ["verify", "--instance", str(other), "--rounds", "4", "--connect", addr],
                           capture_output=True, text=True, timeout=60)
        prover.wait(timeout=60)
    finally:
        prover.kill()
    assert v.returncode == 3 and prover.returncode == 3
