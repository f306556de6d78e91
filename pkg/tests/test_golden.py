"""Golden reports: the versioned JSON schema must not drift silently."""

import contextlib
import io
import json

from tiltlab.cli import run


def capture(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = run(argv)
    return code, buf.getvalue()


GOLDEN_TILT = (
    '{"command":"tilt","ok":true,"params":{"depth":3,"layer":0,'
    '"spec":{"depth":3,"ideal_exp":"1","kind":"pure","n_digits":6,'
    '"num_vars":0,"prime":5,"start_level":0,"var_degree_cap":"0"}},'
    '"report":{"depth":3,"generator_map":["0","T^{1/5}","T^{1/25}",'
    '"T^{1/125}"],"layer":0,"quotient_exponent":125},"schema":1}\n'
)

GOLDEN_SHARP = (
    '{"command":"sharp","ok":true,"params":{"depth":4,"element":"pflat",'
    '"layer":0,"spec":{"depth":4,"ideal_exp":"1","kind":"pure",'
    '"n_digits":6,"num_vars":0,"prime":5,"start_level":0,'
    '"var_degree_cap":"0"}},"report":{"depth":4,"effective_precision":"6",'
    '"element":"T","layer":0,"value":"5"},"schema":1}\n'
)


def test_tilt_report_golden_bytes():
    code, out = capture(
        ["tilt", "--prime", "5", "--prec", "6", "--depth", "3",
         "--layer", "0", "--tilt-depth", "3"]
    )
    assert code == 0
    assert out == GOLDEN_TILT


def test_sharp_report_golden_bytes():
    code, out = capture(
        ["sharp", "--prime", "5", "--prec", "6", "--depth", "4",
         "--layer", "0", "--element", "pflat"]
    )
    assert code == 0
    assert out == GOLDEN_SHARP


def test_axioms_report_stable_keys():
    code, out = capture(
        ["axioms", "--prime", "5", "--prec", "6", "--depth", "2",
         "--samples", "10", "--seed", "0"]
    )
    assert code == 0
    body = json.loads(out)
    assert body["schema"] == 1
    assert list(body) == sorted(body)  # envelope keys serialize sorted
    assert list(body["report"]["axioms"]) == list("abcdefg")
