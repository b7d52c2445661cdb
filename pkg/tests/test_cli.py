import io
import json
import math

import pytest

from striphyp.cli import (EXIT_NONCONVERGENCE, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION,
                          SCHEMA, run)
from striphyp.specs import (SpecError, parse_complex, parse_functional, parse_sequence,
                            parse_series, parse_test_function, parse_weight)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    recs = [json.loads(line) for line in text.splitlines() if line.strip()]
    assert all(r["schema"] == SCHEMA for r in recs)
    return recs


def summary(text):
    return [r for r in records(text) if r["record"] == "summary"][-1]


# ----------------------------------------------------------------- spec strings

def test_parse_complex_forms():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("-i") == -1j
    assert parse_complex("3") == 3
    with pytest.raises(SpecError):
        parse_complex("inf")
    with pytest.raises(SpecError):
        parse_complex("1+")


def test_parse_weight():
    assert parse_weight("power:s=0.5")(4.0) == pytest.approx(2.0)
    assert parse_weight("linear")(3.0) == 3.0
    with pytest.raises(SpecError):
        parse_weight("power")
    with pytest.raises(SpecError):
        parse_weight("power:s=0.5,q=1")
    with pytest.raises(SpecError):
        parse_weight("nonsense")
    w = parse_weight("assoc:factorial:s=1")
    assert w(2.0) == pytest.approx(math.log(2))


def test_parse_sequence():
    M = parse_sequence("explicit:[1,1,2,6];tail=factorial:s=1")
    assert M.log_M(range(6)) == pytest.approx([math.log(math.factorial(p)) for p in range(6)])
    with pytest.raises(SpecError):
        parse_sequence("explicit:[1]")
    with pytest.raises(SpecError):
        parse_sequence("loglog:s=1,q=2")


def test_parse_test_functions():
    g = parse_test_function("gaussian:a=2,shift=1+0.5i")
    assert g(1 + 0.5j) == pytest.approx(1.0)
    assert parse_test_function("zero").is_zero
    assert parse_test_function("const:c=2i")(0.3) == 2j
    p = parse_test_function("product:gaussian:a=1;const:c=3")
    assert p(0.0) == pytest.approx(3.0)
    r = parse_test_function("recip:power:s=0.5")
    assert parse_test_function(r.spec).spec == r.spec
    with pytest.raises(SpecError):
        parse_test_function("gaussian:b=1")


def test_parse_functional():
    f = parse_functional("atoms:[(0+0i, 0, 1), (2-0.1i, 1, 0.5+1i)] + density:exp_decay(2)")
    assert len(f.atoms) == 2 and f.atoms[1].loc == 2 - 0.1j and f.atoms[1].coef == 0.5 + 1j
    assert f.density.name == "exp_decay" and f.density.mu == 2
    assert parse_functional(f.spec).spec == f.spec
    with pytest.raises(SpecError):
        parse_functional("atoms:[(0, -1, 1)]")
    with pytest.raises(SpecError):
        parse_functional("density:uniform")


def test_parse_series():
    s = parse_series("# G = e^{i zeta}/2pi\n1 0 0.159154943\n-2, 1, 1i\n")
    assert s.terms == ((1, 0, 0.159154943), (-2, 1, 1j))
    with pytest.raises(SpecError):
        parse_series("1 x 2")


# ----------------------------------------------------------------- commands

def test_classify_example():
    code, out, _ = call("classify", "factorial:s=1")
    assert code == EXIT_OK
    assert summary(out)["status"] == "BeurlingAndRoumieu"


def test_pair_example():
    code, out, _ = call("pair", "atoms:[(0+0i,0,1)]", "gaussian:a=1", "--k", "0.5")
    assert code == EXIT_OK
    re, im = summary(out)["value"]
    assert abs(complex(re, im) - 1.0) < 1e-6


def test_check_weight_example():
    code, out, _ = call("check-weight", "exp", "--cond", "epsilon0")
    assert code == EXIT_OK
    assert summary(out)["status"] == "Fails"


def test_header_carries_provenance():
    _, out, _ = call("assoc", "factorial:s=1", "--t", "2,3")
    head = records(out)[0]
    assert head["record"] == "header"
    assert {"quad", "grid", "seed"} <= set(head["provenance"])
    vals = [r["value"] for r in records(out) if r["record"] == "result"]
    assert vals == pytest.approx([math.log(2), math.log(4.5)], abs=1e-9)


def test_negative_list_values():
    code, out, _ = call("fourier", "gaussian:a=1", "--xi", "-2,0,2")
    assert code == EXIT_OK
    xs = [r["x"] for r in records(out) if r["record"] == "result"]
    assert xs == [-2.0, 0.0, 2.0]


def test_csv_output():
    code, out, _ = call("--format", "csv", "fourier", "gaussian:a=1", "--xi", "0,2")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "x,value,value_imag"
    assert float(lines[1].split(",")[1]) == pytest.approx(math.sqrt(math.pi))


def test_laplace_reports_closed_form():
    code, out, _ = call("laplace", "atoms:[(1+0i,0,1)]", "--zeta", "1i,0")
    assert code == EXIT_OK
    assert summary(out)["max_difference"] < 1e-8


def test_pwcheck(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("1 0 0.15915494309189535\n")
    code, out, _ = call("pwcheck", str(f), "--a", "0", "--h", "0")
    assert code == EXIT_OK and summary(out)["status"] == "Holds"
    f.write_text("-2 0 0.15915494309189535\n")
    code, out, _ = call("pwcheck", str(f), "--a", "0", "--h", "0")
    assert code == EXIT_OK and summary(out)["status"] == "Fails"


def test_exit_codes():
    assert call("bogus")[0] == EXIT_PARSE
    assert call("norm", "gaussian:a=1", "nope")[0] == EXIT_PARSE
    code, out, _ = call("minorant", "exp")
    assert code == EXIT_PRECONDITION
    assert records(out)[0]["kind"] == "precondition"
    assert call("fourier", "recip:power:s=0.5", "--xi", "0", "--k", "2")[0] == EXIT_PRECONDITION
    assert EXIT_NONCONVERGENCE == 3


def test_json_is_strict():
    _, out, _ = call("norm", "gaussian:a=1", "exp", "--h", "1")
    for line in out.splitlines():
        json.loads(line, parse_constant=lambda c: pytest.fail(f"non-standard constant {c}"))


def test_reproducible_from_echoed_inputs():
    _, out, _ = call("pair", "atoms:[(0+0i,0,1),(1-0.1i,1,2)]", "gaussian:a=0.5,shift=0.2i", "--k", "0.5")
    head = records(out)[0]
    inp = head["inputs"]
    _, again, _ = call(*head["argv"])
    assert summary(again) == summary(out)
    _, rebuilt, _ = call("pair", inp["functional"], inp["testfn"], "--k", str(inp["k"]),
                         "--b", str(inp["b"]), "--R", str(inp["R"]))
    assert summary(rebuilt)["value"] == pytest.approx(summary(out)["value"], abs=1e-12)


def test_config_override(tmp_path):
    cfg = tmp_path / "fast.cfg"
    cfg.write_text("quad.abs_tol = 1e-6\nquad.rel_tol = 1e-6\n")
    code, out, _ = call("--config", str(cfg), "fourier", "gaussian:a=1", "--xi", "0")
    assert code == EXIT_OK
    assert records(out)[0]["provenance"]["quad"]["abs_tol"] == 1e-6
    cfg.write_text("quad.bogus = 1\n")
    assert call("--config", str(cfg), "fourier", "gaussian:a=1", "--xi", "0")[0] == EXIT_PARSE


def test_seed_fixes_jitter():
    argv = ("minorant", "power:s=0.5", "--verify", "--x", "0,5")
    a = summary(call("--seed", "3", *argv)[1])
    b = summary(call("--seed", "3", *argv)[1])
    assert a == b
    assert a["verify"]["sandwich_violations"] == 0 and a["verify"]["ok"]
