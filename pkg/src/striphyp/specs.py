"""Parsers for the textual spec strings accepted on the command line.

Grammars:

* weights: ``name(:key=value(,key=value)*)?`` plus ``assoc:<sequence-spec>``
* sequences: ``factorial:s=<f>``, ``loglog:s=<f>,r=<f>``,
  ``explicit:[v0,v1,...]`` with an optional ``;tail=<factorial|loglog spec>``
* test functions: ``gaussian:a=<f>,shift=<re>+<im>i``, ``recip:<weight-spec>``,
  ``product:<spec>;<spec>``, ``zero``, ``const:c=<complex>``
* functionals: ``atoms:[(re+imi, order, coef), ...]``, ``density:gauss_decay``,
  ``density:exp_decay(mu)``, joined with `` + ``
* series files: one ``c k coef`` term per line, ``#`` starts a comment
"""
from __future__ import annotations

import inspect
import re
from pathlib import Path

from . import reps, sequences, spaces, weights
from .config import QuadConfig
from .reps import Functional
from .sequences import WeightSequence
from .spaces import TestFunction
from .transforms import ExpSeries
from .weights import Weight


class SpecError(ValueError):
    """Raised for any malformed spec string."""


_NAME = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?::(.*))?$", re.S)


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if not t:
        raise SpecError("empty complex number")
    if t.lower() in ("inf", "+inf", "-inf", "nan"):
        raise SpecError(f"non-finite number {text!r}")
    if t.endswith("i") and not t.endswith("inf"):
        t = t[:-1] + "j"
        if t in ("j", "+j", "-j"):
            t = t.replace("j", "1j")
    try:
        return complex(t)
    except ValueError:
        raise SpecError(f"bad complex number {text!r}") from None


def parse_float(text: str) -> float:
    try:
        v = float(text.strip())
    except ValueError:
        raise SpecError(f"bad number {text!r}") from None
    return v


def _split_name(text: str) -> tuple[str, str | None]:
    m = _NAME.match(text.strip())
    if not m:
        raise SpecError(f"malformed spec {text!r}")
    return m.group(1), m.group(2)


def _keyvals(body: str | None, what: str) -> dict[str, str]:
    if body is None:
        return {}
    out: dict[str, str] = {}
    for item in body.split(","):
        if "=" not in item:
            raise SpecError(f"{what}: expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if not k or k in out:
            raise SpecError(f"{what}: empty or repeated key {k!r}")
        out[k] = v.strip()
    return out


# ----------------------------------------------------------------- weights

def parse_weight(text: str) -> Weight:
    name, body = _split_name(text)
    if name == "assoc":
        if not body:
            raise SpecError("assoc needs a sequence spec")
        return sequences.assoc_weight(parse_sequence(body))
    if name not in weights.CATALOG:
        raise SpecError(f"unknown weight {name!r}")
    ctor = weights.CATALOG[name]
    kv = _keyvals(body, name)
    allowed = set(inspect.signature(ctor).parameters)
    extra = set(kv) - allowed
    if extra:
        raise SpecError(f"{name}: unknown parameter(s) {sorted(extra)}")
    missing = {p for p, v in inspect.signature(ctor).parameters.items()
               if v.default is inspect.Parameter.empty} - set(kv)
    if missing:
        raise SpecError(f"{name}: missing parameter(s) {sorted(missing)}")
    try:
        return ctor(**{k: parse_float(v) for k, v in kv.items()})
    except weights.WeightError as exc:
        raise SpecError(str(exc)) from exc


# ----------------------------------------------------------------- sequences

def _generator(text: str) -> sequences.Generator:
    name, body = _split_name(text)
    if name not in ("factorial", "loglog"):
        raise SpecError(f"unknown tail rule {name!r}")
    kv = _keyvals(body, name)
    allowed = {"s"} if name == "factorial" else {"s", "r"}
    if set(kv) - allowed or "s" not in kv:
        raise SpecError(f"{name}: expected keys {sorted(allowed)}")
    try:
        return sequences.Generator(name, parse_float(kv["s"]), parse_float(kv.get("r", "1")))
    except sequences.SequenceError as exc:
        raise SpecError(str(exc)) from exc


def parse_sequence(text: str) -> WeightSequence:
    text = text.strip()
    name, body = _split_name(text)
    try:
        if name in ("factorial", "loglog"):
            g = _generator(text)
            return sequences.factorial(g.s) if name == "factorial" else sequences.loglog(g.s, g.r)
        if name == "explicit":
            m = re.fullmatch(r"\[([^\]]*)\](?:;tail=(.+))?", (body or "").strip(), re.S)
            if not m:
                raise SpecError("explicit sequence must look like explicit:[v0,v1,...]")
            vals = [parse_float(v) for v in m.group(1).split(",") if v.strip()]
            if len(vals) < 2:
                raise SpecError("explicit sequence needs at least two terms")
            tail = _generator(m.group(2)) if m.group(2) else None
            return sequences.explicit(vals, tail)
    except sequences.SequenceError as exc:
        raise SpecError(str(exc)) from exc
    raise SpecError(f"unknown sequence {name!r}")


# ----------------------------------------------------------------- test functions

def parse_test_function(text: str, h: float = 1.0, qcfg: QuadConfig | None = None) -> TestFunction:
    """``recip`` builds 1/F for the weight dominating every dilate, on the strip of half-width h."""
    text = text.strip()
    name, body = _split_name(text)
    if name == "zero" and body is None:
        return spaces.zero_function()
    if name == "const":
        kv = _keyvals(body, name)
        if set(kv) - {"c"}:
            raise SpecError("const: only key c")
        return spaces.const_function(parse_complex(kv.get("c", "1")))
    if name == "gaussian":
        kv = _keyvals(body, name)
        if set(kv) - {"a", "shift"}:
            raise SpecError("gaussian: keys are a and shift")
        try:
            return spaces.gaussian(parse_float(kv.get("a", "1")), parse_complex(kv.get("shift", "0")))
        except spaces.SpaceError as exc:
            raise SpecError(str(exc)) from exc
    if name == "recip":
        if not body:
            raise SpecError("recip needs a weight spec")
        return spaces.make_test_function(parse_weight(body), h, qcfg)
    if name == "product":
        if not body or ";" not in body:
            raise SpecError("product needs two specs separated by ';'")
        # the left factor may itself contain ';' (an explicit tail), so try every cut
        cuts = [i for i, ch in enumerate(body) if ch == ";"]
        last: Exception | None = None
        for i in cuts:
            try:
                left = parse_test_function(body[:i], h, qcfg)
                right = parse_test_function(body[i + 1:], h, qcfg)
            except SpecError as exc:
                last = exc
                continue
            return spaces.product(left, right)
        raise SpecError(f"product: could not split {body!r} ({last})")
    raise SpecError(f"unknown test function {name!r}")


# ----------------------------------------------------------------- functionals

_ATOM = re.compile(r"\(\s*([^,()]+?)\s*,\s*(\d+)\s*,\s*([^,()]+?)\s*\)")


def _top_level_split(text: str, sep: str) -> list[str]:
    parts, depth, start, i = [], 0, 0, 0
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            start = i + len(sep)
            i = start
            continue
        i += 1
    parts.append(text[start:])
    return parts


def _parse_atoms(body: str) -> Functional:
    m = re.fullmatch(r"\s*\[(.*)\]\s*", body, re.S)
    if not m:
        raise SpecError("atoms must look like atoms:[(re+imi, order, coef), ...]")
    inner = m.group(1).strip()
    atoms = []
    pos = 0
    while pos < len(inner):
        mm = _ATOM.match(inner, pos)
        if not mm:
            raise SpecError(f"bad atom near {inner[pos:pos + 20]!r}")
        try:
            atoms.append(reps.Atom(parse_complex(mm.group(1)), int(mm.group(2)),
                                   parse_complex(mm.group(3))))
        except reps.RepError as exc:
            raise SpecError(str(exc)) from exc
        pos = mm.end()
        rest = inner[pos:].lstrip()
        if rest.startswith(","):
            rest = rest[1:].lstrip()
        pos = len(inner) - len(rest)
    return Functional(tuple(atoms))


def _parse_density(body: str) -> Functional:
    body = body.strip()
    if body == "gauss_decay":
        return Functional((), reps.gauss_decay())
    m = re.fullmatch(r"exp_decay\(([^)]*)\)", body)
    if m:
        try:
            return Functional((), reps.exp_decay(parse_float(m.group(1))))
        except reps.RepError as exc:
            raise SpecError(str(exc)) from exc
    raise SpecError(f"unknown density {body!r}")


def parse_functional(text: str) -> Functional:
    total = Functional()
    for piece in _top_level_split(text.strip(), "+ "):
        piece = piece.strip()
        if not piece:
            raise SpecError("empty functional term")
        name, body = _split_name(piece)
        if name == "atoms":
            term = _parse_atoms(body or "")
        elif name == "density":
            term = _parse_density(body or "")
        else:
            raise SpecError(f"unknown functional {name!r}")
        try:
            total = total + term
        except reps.RepError as exc:
            raise SpecError(str(exc)) from exc
    return total


# ----------------------------------------------------------------- series files

def parse_series(text: str) -> ExpSeries:
    terms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        if len(fields) != 3:
            raise SpecError(f"series line {lineno}: expected 'c k coef'")
        c, k, coef = parse_complex(fields[0]), fields[1], parse_complex(fields[2])
        if not k.isdigit():
            raise SpecError(f"series line {lineno}: power must be a non-negative integer")
        terms.append((c, int(k), coef))
    return ExpSeries(tuple(terms))


def read_series(path: str | Path) -> ExpSeries:
    return parse_series(Path(path).read_text())
