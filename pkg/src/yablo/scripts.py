"""Plain-text proof script format.

Two script kinds share one surface: `theorem` files carry object-level
derivations, `meta-theorem` files carry provability/unprovability reasoning
about them.  Lines are one of

    theorem NAME "headline"            (or meta-theorem)
    var x, y                           optional variable declarations
    def Name(p, q) := BODY             fixed-point definition, `self` recurs
    assume-meta Con, OneCon            meta only: reflection strength used
    eigen k, a, b                      meta only: schematic number variables
    N. FORMULA by RULE ARGS
    N. assume FORMULA                  kernel: open a subproof
    N. qed-block M                     kernel: close the subproof opened at M
    N. suppose Prv: FORMULA            meta: open a refutation block
    N. meta-bot by RULE ARGS           meta: the block reached absurdity
    N. Prv: FORMULA by RULE ARGS       meta judgment forms
    conclusion FORMULA                 (meta: conclusion Prv:/NotPrv: FORMULA)

`#` starts a comment line.  Parsing is deliberately permissive about step
numbers and rule arity so that a damaged script still parses and the checker
can point at the offending step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .parser import ParseError, parse_formula, parse_term
from .syntax import Formula, Term


class ScriptError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[str, ...]
    body: Formula  # self-references spelled with the `self` predicate


@dataclass(frozen=True)
class KernelStep:
    index: int
    kind: str  # "derive" | "assume" | "qed"
    formula: Formula | None = None
    rule: str | None = None
    refs: tuple[int, ...] = ()
    term: Term | None = None
    var: str | None = None
    name: str | None = None
    target: int | None = None


@dataclass(frozen=True)
class KernelScript:
    name: str
    doc: str
    variables: tuple[str, ...]
    defs: tuple[Definition, ...]
    steps: tuple[KernelStep, ...]
    conclusion: Formula

    kind = "kernel"


@dataclass(frozen=True)
class MetaStep:
    index: int
    kind: str  # "suppose" | "judge" | "bot"
    judgment: str | None = None  # "Prv" | "NotPrv"
    formula: Formula | None = None
    rule: str | None = None
    refs: tuple[int, ...] = ()
    name: str | None = None
    bindings: tuple[tuple[str, Term], ...] = ()
    var: str | None = None


@dataclass(frozen=True)
class MetaScript:
    name: str
    doc: str
    assumptions: frozenset[str]  # subset of {"Con", "OneCon"}
    eigens: tuple[str, ...]
    defs: tuple[Definition, ...]
    steps: tuple[MetaStep, ...]
    conclusion_judgment: str
    conclusion: Formula

    kind = "meta"


_ZERO_ARG_RULES = {"numeval", "gd2", "gd3", "lob", "con-def"}
_NAME_ARG_RULES = {"arith", "unfold", "fold"}
_INDEX_RULES = {
    "taut", "mp", "andI", "andE1", "andE2", "orI1", "orI2", "orE",
    "negI", "negE", "allI", "gd1", "reiterate",
}

_IDENT = r"[A-Za-z][A-Za-z0-9_]*"


def _parse_indices(text: str, line: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece.isdigit():
            raise ScriptError(f"expected a step number, found {piece!r}", line)
        out.append(int(piece))
    return tuple(out)


def _formula(text: str, line: int) -> Formula:
    try:
        return parse_formula(text)
    except ParseError as e:
        raise ScriptError(str(e), line) from None


def _term(text: str, line: int) -> Term:
    try:
        return parse_term(text)
    except ParseError as e:
        raise ScriptError(str(e), line) from None


def _bindings(text: str, line: int) -> tuple[tuple[str, Term], ...]:
    out = []
    for piece in text.split(","):
        m = re.match(rf"^\s*({_IDENT})\s*:=\s*(.+?)\s*$", piece)
        if not m:
            raise ScriptError(f"expected `v := t`, found {piece.strip()!r}", line)
        out.append((m.group(1), _term(m.group(2), line)))
    return tuple(out)


def _split_justification(rest: str, line: int) -> tuple[str, str]:
    cut = rest.rfind(" by ")
    if cut < 0:
        raise ScriptError("step is missing a ` by RULE` justification", line)
    return rest[:cut].strip(), rest[cut + 4 :].strip()


def _parse_kernel_rule(justif: str, line: int) -> KernelStep:
    parts = justif.split(None, 1)
    rule = parts[0]
    args = parts[1].strip() if len(parts) > 1 else ""
    if rule in _INDEX_RULES:
        return KernelStep(0, "derive", rule=rule, refs=_parse_indices(args, line))
    if rule in _ZERO_ARG_RULES:
        if args:
            raise ScriptError(f"rule {rule} takes no arguments", line)
        return KernelStep(0, "derive", rule=rule)
    if rule in _NAME_ARG_RULES:
        if not re.fullmatch(_IDENT, args):
            raise ScriptError(f"rule {rule} needs one name argument", line)
        return KernelStep(0, "derive", rule=rule, name=args)
    if rule in ("allE", "exI"):
        m = re.match(r"^(\d+)\s+with\s+(.+)$", args)
        if not m:
            raise ScriptError(f"rule {rule} is used as `{rule} N with TERM`", line)
        return KernelStep(0, "derive", rule=rule, refs=(int(m.group(1)),),
                          term=_term(m.group(2), line))
    if rule == "exE":
        m = re.match(rf"^(\d+)\s*,\s*(\d+)\s+with\s+({_IDENT})$", args)
        if not m:
            raise ScriptError("rule exE is used as `exE N, M with y`", line)
        return KernelStep(0, "derive", rule=rule,
                          refs=(int(m.group(1)), int(m.group(2))), var=m.group(3))
    raise ScriptError(f"unknown rule {rule!r}", line)


def _parse_meta_rule(justif: str, line: int) -> MetaStep:
    parts = justif.split(None, 1)
    rule = parts[0]
    args = parts[1].strip() if len(parts) > 1 else ""
    if rule == "m-kernel":
        if not re.fullmatch(_IDENT, args):
            raise ScriptError("m-kernel cites one script name", line)
        return MetaStep(0, "judge", rule=rule, name=args)
    if rule in ("m-mp", "m-con"):
        refs = _parse_indices(args, line)
        return MetaStep(0, "judge", rule=rule, refs=refs)
    if rule in ("m-refl1", "m-g2", "m-raa"):
        refs = _parse_indices(args, line)
        return MetaStep(0, "judge", rule=rule, refs=refs)
    if rule == "m-inst":
        m = re.match(r"^(\d+)\s+with\s+(.+)$", args)
        if not m:
            raise ScriptError("m-inst is used as `m-inst N with v := t`", line)
        return MetaStep(0, "judge", rule=rule, refs=(int(m.group(1)),),
                        bindings=_bindings(m.group(2), line))
    if rule == "m-witness":
        m = re.match(rf"^(\d+)\s+with\s+({_IDENT})$", args)
        if not m:
            raise ScriptError("m-witness is used as `m-witness N with y`", line)
        return MetaStep(0, "judge", rule=rule, refs=(int(m.group(1)),), var=m.group(2))
    if rule == "lemma":
        m = re.match(rf"^({_IDENT})\s*,\s*(\d+)(?:\s+with\s+(.+))?$", args)
        if not m:
            raise ScriptError("lemma is used as `lemma NAME, N [with v := t, ...]`", line)
        binds = _bindings(m.group(3), line) if m.group(3) else ()
        return MetaStep(0, "judge", rule=rule, name=m.group(1),
                        refs=(int(m.group(2)),), bindings=binds)
    raise ScriptError(f"unknown meta rule {rule!r}", line)


def _iter_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_names(argtext: str, line: int) -> tuple[str, ...]:
    names = tuple(p.strip() for p in argtext.split(","))
    for n in names:
        if not re.fullmatch(_IDENT, n):
            raise ScriptError(f"bad name {n!r}", line)
    return names


def _parse_def(line_text: str, lineno: int) -> Definition:
    m = re.match(rf"^def\s+({_IDENT})\s*\(([^)]*)\)\s*:=\s*(.+)$", line_text)
    if not m:
        raise ScriptError("definition is written `def Name(p, q) := BODY`", lineno)
    params = tuple(p.strip() for p in m.group(2).split(",") if p.strip())
    return Definition(m.group(1), params, _formula(m.group(3), lineno))


def parse_definition(text: str) -> Definition:
    """One `Name(p, q) := BODY` clause; a leading `def` keyword is optional."""
    t = text.strip()
    if not t.startswith("def "):
        t = "def " + t
    return _parse_def(t, 1)


def parse_kernel_script(text: str) -> KernelScript:
    name = doc = None
    variables: tuple[str, ...] = ()
    defs: list[Definition] = []
    steps: list[KernelStep] = []
    conclusion: Formula | None = None
    for lineno, line in _iter_lines(text):
        if conclusion is not None:
            raise ScriptError("content after the conclusion line", lineno)
        m = re.match(rf'^theorem\s+({_IDENT})\s+"(.*)"\s*$', line)
        if m:
            if name is not None:
                raise ScriptError("duplicate theorem header", lineno)
            name, doc = m.group(1), m.group(2)
            continue
        if name is None:
            raise ScriptError("expected a `theorem NAME \"...\"` header first", lineno)
        if line.startswith("var "):
            variables += _parse_names(line[4:], lineno)
            continue
        if line.startswith("def "):
            defs.append(_parse_def(line, lineno))
            continue
        if line.startswith("conclusion "):
            conclusion = _formula(line[len("conclusion ") :], lineno)
            continue
        m = re.match(r"^(\d+)\.\s+(.*)$", line)
        if not m:
            raise ScriptError(f"unrecognized line {line!r}", lineno)
        index, rest = int(m.group(1)), m.group(2)
        if rest.startswith("assume "):
            steps.append(KernelStep(index, "assume", formula=_formula(rest[7:], lineno)))
            continue
        qm = re.match(r"^qed-block\s+(\d+)\s*$", rest)
        if qm:
            steps.append(KernelStep(index, "qed", target=int(qm.group(1))))
            continue
        ftext, justif = _split_justification(rest, lineno)
        proto = _parse_kernel_rule(justif, lineno)
        steps.append(
            KernelStep(index, "derive", formula=_formula(ftext, lineno), rule=proto.rule,
                       refs=proto.refs, term=proto.term, var=proto.var, name=proto.name)
        )
    if name is None:
        raise ScriptError("empty script", 1)
    if conclusion is None:
        raise ScriptError("script has no conclusion line", 1)
    return KernelScript(name, doc or "", variables, tuple(defs), tuple(steps), conclusion)


def parse_meta_script(text: str) -> MetaScript:
    name = doc = None
    assumptions: set[str] = set()
    eigens: tuple[str, ...] = ()
    defs: list[Definition] = []
    steps: list[MetaStep] = []
    conclusion = None
    conclusion_judgment = None
    for lineno, line in _iter_lines(text):
        if conclusion is not None:
            raise ScriptError("content after the conclusion line", lineno)
        m = re.match(rf'^meta-theorem\s+({_IDENT})\s+"(.*)"\s*$', line)
        if m:
            if name is not None:
                raise ScriptError("duplicate meta-theorem header", lineno)
            name, doc = m.group(1), m.group(2)
            continue
        if name is None:
            raise ScriptError("expected a `meta-theorem NAME \"...\"` header first", lineno)
        if line.startswith("assume-meta "):
            for a in _parse_names(line[len("assume-meta ") :], lineno):
                if a not in ("Con", "OneCon"):
                    raise ScriptError(f"unknown meta assumption {a!r}", lineno)
                assumptions.add(a)
            continue
        if line.startswith("eigen "):
            eigens += _parse_names(line[6:], lineno)
            continue
        if line.startswith("def "):
            defs.append(_parse_def(line, lineno))
            continue
        cm = re.match(r"^conclusion\s+(Prv|NotPrv):\s*(.+)$", line)
        if cm:
            conclusion_judgment = cm.group(1)
            conclusion = _formula(cm.group(2), lineno)
            continue
        m = re.match(r"^(\d+)\.\s+(.*)$", line)
        if not m:
            raise ScriptError(f"unrecognized line {line!r}", lineno)
        index, rest = int(m.group(1)), m.group(2)
        sm = re.match(r"^suppose\s+Prv:\s*(.+)$", rest)
        if sm:
            steps.append(MetaStep(index, "suppose", judgment="Prv",
                                  formula=_formula(sm.group(1), lineno)))
            continue
        bm = re.match(r"^meta-bot\s+by\s+(.+)$", rest)
        if bm:
            proto = _parse_meta_rule(bm.group(1), lineno)
            steps.append(MetaStep(index, "bot", rule=proto.rule, refs=proto.refs,
                                  name=proto.name, bindings=proto.bindings, var=proto.var))
            continue
        jm = re.match(r"^(Prv|NotPrv):\s*(.+)$", rest)
        if jm:
            ftext, justif = _split_justification(jm.group(2), lineno)
            proto = _parse_meta_rule(justif, lineno)
            steps.append(MetaStep(index, "judge", judgment=jm.group(1),
                                  formula=_formula(ftext, lineno), rule=proto.rule,
                                  refs=proto.refs, name=proto.name,
                                  bindings=proto.bindings, var=proto.var))
            continue
        raise ScriptError(f"unrecognized step form {rest!r}", lineno)
    if name is None:
        raise ScriptError("empty script", 1)
    if conclusion is None or conclusion_judgment is None:
        raise ScriptError("script has no conclusion line", 1)
    return MetaScript(name, doc or "", frozenset(assumptions), eigens, tuple(defs),
                      tuple(steps), conclusion_judgment, conclusion)


def parse_script(text: str) -> KernelScript | MetaScript:
    """Dispatch on the header keyword of the first contentful line."""
    for _, line in _iter_lines(text):
        if line.startswith("meta-theorem"):
            return parse_meta_script(text)
        if line.startswith("theorem"):
            return parse_kernel_script(text)
        break
    raise ScriptError("script must open with `theorem` or `meta-theorem`", 1)


def load_axioms(text: str) -> dict[str, Formula]:
    """`name: formula` lines; free variables are schematic."""
    out: dict[str, Formula] = {}
    for lineno, line in _iter_lines(text):
        m = re.match(rf"^({_IDENT})\s*:\s*(.+)$", line)
        if not m:
            raise ScriptError("axiom lines read `name: FORMULA`", lineno)
        if m.group(1) in out:
            raise ScriptError(f"duplicate axiom name {m.group(1)!r}", lineno)
        out[m.group(1)] = _formula(m.group(2), lineno)
    return out
