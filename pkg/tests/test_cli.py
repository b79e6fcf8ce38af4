import json
import os

from causal_channels import serialize
from causal_channels.channels import random_instrument
from causal_channels.cli import main
from causal_channels.procmat import random_process_mixture

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_discriminate_nine_passes(capsys):
    code, out = run(["discriminate-nine"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["pass"] and len(report["states"]) == 9


def test_verify_instrument(tmp_path, capsys):
    inst = random_instrument(2, 2, 2, 2, 1, 0)
    path = tmp_path / "inst.json"
    serialize.save(path, inst, "instrument")
    code, out = run(["verify-instrument", str(path)], capsys)
    assert code == 0 and json.loads(out)["pass"]

    # break trace preservation by dropping an element
    obj = json.loads(path.read_text())
    obj["elements"]["0"][0]["kraus"] = []
    path.write_text(json.dumps(obj))
    code, out = run(["verify-instrument", str(path)], capsys)
    assert code == 1


def test_compose_loop_on_checked_in_fixture(capsys):
    code, out = run(["compose", "loop", os.path.join(FIXTURES, "nine_state.json")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["pass"] and report["tp_defect"] <= 1e-9


def test_check_procmat_exit_codes(capsys):
    code, out = run(["check-procmat", os.path.join(FIXTURES, "loop_process.json")], capsys)
    assert code == 1
    report = json.loads(out)
    assert "witness" in report and "f" in report["witness"]
    code, _ = run(["check-procmat", os.path.join(FIXTURES, "one_way_process.json")], capsys)
    assert code == 0


def test_decompose_procmat(tmp_path, capsys):
    w = random_process_mixture(2, 2, 2, 2, 3)
    path = tmp_path / "w.json"
    serialize.save(path, w, "classical_process")
    code, out = run(["decompose-procmat", str(path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["recombination_error"] <= 1e-7
    code, _ = run(["decompose-procmat", os.path.join(FIXTURES, "loop_process.json")], capsys)
    assert code == 1


def test_check_causal_and_reconstruct(capsys):
    code, _ = run(
        [
            "check-causal",
            os.path.join(FIXTURES, "noisy_wiring.json"),
            os.path.join(FIXTURES, "order_ab.json"),
        ],
        capsys,
    )
    assert code == 0
    code, out = run(["reconstruct-locc", os.path.join(FIXTURES, "reconstruct_noisy.json")], capsys)
    assert code == 0
    assert json.loads(out)["choi_distance"] <= 1e-8


def test_probe_procmat(tmp_path, capsys):
    code, out = run(["probe-procmat", os.path.join(FIXTURES, "one_way_process.json")], capsys)
    assert code == 0
    code, out = run(["probe-procmat", os.path.join(FIXTURES, "loop_process.json")], capsys)
    assert code == 1


def test_input_errors_exit_2(tmp_path, capsys):
    code, _ = run(["verify-instrument", str(tmp_path / "missing.json")], capsys)
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"rows": 1}')
    code, _ = run(["check-procmat", str(bad)], capsys)
    assert code == 2
    assert main(["no-such-command"]) == 2


def test_tol_env_fallback(tmp_path, capsys, monkeypatch):
    inst = random_instrument(1, 1, 2, 2, 2, 1)
    path = tmp_path / "inst.json"
    serialize.save(path, inst, "instrument")
    monkeypatch.setenv("CAUSAL_CHANNELS_TOL", "1e-6")
    code, out = run(["verify-instrument", str(path)], capsys)
    assert code == 0
    assert json.loads(out)["tolerance"] == 1e-6


def test_reports_are_deterministic(tmp_path, capsys):
    w = random_process_mixture(2, 2, 2, 2, 11)
    path = tmp_path / "w.json"
    serialize.save(path, w, "classical_process")
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert main(["decompose-procmat", str(path), "--out", str(out1)]) == 0
    assert main(["decompose-procmat", str(path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_text_format(capsys):
    code, out = run(["discriminate-nine", "--format", "text"], capsys)
    assert code == 0
    assert out.startswith("PASS")
