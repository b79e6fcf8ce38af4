"""End-to-end acceptance checks: one test (and one pass/fail line) per criterion."""

import time

from causal_channels.cli import main
from causal_channels.selftest import (
    criterion_causal_reconstruction,
    criterion_channel_kernel,
    criterion_loop_form,
    criterion_nine_state,
    criterion_process_decomposition,
    criterion_rescaling,
    criterion_sep_compile,
)


def _report(label, rep, budget=None):
    line = f"{'PASS' if rep['pass'] else 'FAIL'} {label} ({rep['duration']:.2f}s)"
    print(line)
    for c in rep["checks"]:
        assert c["pass"], f"{label}: {c['name']} = {c['value']} > {c['threshold']}"
    assert rep["pass"], line
    if budget is not None:
        assert rep["duration"] < budget, f"{label} exceeded {budget}s"


def test_criterion_1_nine_state_discrimination():
    _report("criterion-1 nine-state discrimination <= 1e-9", criterion_nine_state(1e-9), 1.0)


def test_criterion_2_loop_form_rewrite():
    _report("criterion-2 loop-form rewrite, 20 specs <= 1e-8", criterion_loop_form(seed=1), 10.0)


def test_criterion_3_separable_compilation():
    _report(
        "criterion-3 separable compilation roundtrips, 20 maps <= 1e-8",
        criterion_sep_compile(seed=2),
        20.0,
    )


def test_criterion_4_rescaling_decomposition():
    _report(
        "criterion-4 rescaling decomposition, 10 maps <= 1e-8 with integer scale oracle",
        criterion_rescaling(seed=3),
    )


def test_criterion_5_causal_reconstruction():
    _report(
        "criterion-5 causal reconstruction and loop-wiring sweep <= 1e-8",
        criterion_causal_reconstruction(seed=4),
        60.0,
    )


def test_criterion_6_process_decomposition():
    _report(
        "criterion-6 classical process validation/decomposition <= 1e-7",
        criterion_process_decomposition(seed=5),
        30.0,
    )


def test_criterion_7_channel_kernel():
    _report(
        "criterion-7 Choi/Kraus roundtrips and completions <= 1e-9",
        criterion_channel_kernel(seed=6),
    )


def test_criterion_8_cli_selftest(capsys):
    start = time.monotonic()
    code = main(["selftest"])
    elapsed = time.monotonic() - start
    capsys.readouterr()
    print(f"{'PASS' if code == 0 else 'FAIL'} criterion-8 CLI selftest exit {code} ({elapsed:.1f}s)")
    assert code == 0
    assert elapsed < 180.0
