"""Injective numeric codes for terms and formulas, plus the fixed-point
constructor built on top of them.

Every node becomes pair(tag, payload) under a shifted Cantor pairing whose
image excludes 0, so 0 is never a code.  Pure successor towers get a dedicated
compact tag carrying the tower height directly; the successor tag only ever
wraps a non-tower argument.  Without that, the code of the numeral n would
grow exponentially in n.

decode is a left inverse of encode and validates as it goes: unknown tags,
malformed payloads, reserved binder names, and quotation substitutions that
miss or exceed the template's free variables all raise NotACode.  It is not
injective (a successor wrapped around a tower decodes fine but re-encodes
compactly), which is harmless for a left inverse.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .syntax import (
    And,
    Box,
    Eq,
    Exists,
    Falsum,
    ForAll,
    Formula,
    Imp,
    Lt,
    Not,
    Or,
    Plus,
    PredApp,
    Succ,
    SyntaxBuildError,
    Term,
    Times,
    Var,
    alpha_eq,
    iff,
    numeral,
    numeral_value,
    substitute_many,
)


class NotACode(ValueError):
    pass


def code_to_str(n: int) -> str:
    """Decimal rendering; codes routinely outgrow the int-to-str guard."""
    old = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        return str(n)
    finally:
        sys.set_int_max_str_digits(old)


def code_from_str(s: str) -> int:
    old = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        return int(s)
    finally:
        sys.set_int_max_str_digits(old)


# ---------------------------------------------------------------- pairing


def pair(a: int, b: int) -> int:
    """Cantor pairing shifted by one: the image is exactly the positives."""
    if a < 0 or b < 0:
        raise ValueError("pair is defined on naturals")
    return (a + b) * (a + b + 1) // 2 + b + 1


def unpair(p: int) -> tuple[int, int]:
    if p < 1:
        raise NotACode(f"{p} is not a pair code")
    m = p - 1
    w = (math.isqrt(8 * m + 1) - 1) // 2
    b = m - w * (w + 1) // 2
    return w - b, b


# ---------------------------------------------------------------- identifiers

_FIRST = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
_REST = _FIRST + "0123456789_"
_FIRST_RANK = {c: i for i, c in enumerate(_FIRST)}
_REST_RANK = {c: i for i, c in enumerate(_REST)}


def name_code(name: str) -> int:
    """Position of name in the length-then-lexicographic enumeration of
    identifiers (letter first, then letters, digits, underscores)."""
    if not name or name[0] not in _FIRST_RANK or any(c not in _REST_RANK for c in name[1:]):
        raise ValueError(f"not an identifier: {name!r}")
    offset = 0
    block = len(_FIRST)
    for _ in range(len(name) - 1):
        offset += block
        block *= len(_REST)
    rank = _FIRST_RANK[name[0]]
    for c in name[1:]:
        rank = rank * len(_REST) + _REST_RANK[c]
    return offset + rank


def decode_name(code: int) -> str:
    if code < 0:
        raise NotACode(f"{code} is not an identifier code")
    offset = 0
    block = len(_FIRST)
    length = 1
    while code >= offset + block:
        offset += block
        block *= len(_REST)
        length += 1
    rank = code - offset
    rest: list[str] = []
    for _ in range(length - 1):
        rest.append(_REST[rank % len(_REST)])
        rank //= len(_REST)
    return _FIRST[rank] + "".join(reversed(rest))


# ---------------------------------------------------------------- node tags

TAG_NUM = 1
TAG_VAR = 2
TAG_SUCC = 3
TAG_PLUS = 4
TAG_TIMES = 5
TAG_FALSUM = 6
TAG_EQ = 7
TAG_LT = 8
TAG_NOT = 9
TAG_IMP = 10
TAG_AND = 11
TAG_OR = 12
TAG_FORALL = 13
TAG_EXISTS = 14
TAG_PRED = 15
TAG_BOX = 16

_NIL = 0


def _cons_list(codes: list[int]) -> int:
    out = _NIL
    for c in reversed(codes):
        out = pair(c, out)
    return out


def _uncons_list(code: int) -> list[int]:
    out: list[int] = []
    while code != _NIL:
        head, code = unpair(code)
        out.append(head)
    return out


def encode_term(t: Term) -> int:
    n = numeral_value(t)
    if n is not None:
        return pair(TAG_NUM, n)
    match t:
        case Var(name):
            return pair(TAG_VAR, name_code(name))
        case Succ(a):
            return pair(TAG_SUCC, encode_term(a))
        case Plus(l, r):
            return pair(TAG_PLUS, pair(encode_term(l), encode_term(r)))
        case Times(l, r):
            return pair(TAG_TIMES, pair(encode_term(l), encode_term(r)))
    raise TypeError(f"not a term: {t!r}")


def encode(f: Formula) -> int:
    match f:
        case Falsum():
            return pair(TAG_FALSUM, 0)
        case Eq(l, r):
            return pair(TAG_EQ, pair(encode_term(l), encode_term(r)))
        case Lt(l, r):
            return pair(TAG_LT, pair(encode_term(l), encode_term(r)))
        case Not(s):
            return pair(TAG_NOT, encode(s))
        case Imp(l, r):
            return pair(TAG_IMP, pair(encode(l), encode(r)))
        case And(l, r):
            return pair(TAG_AND, pair(encode(l), encode(r)))
        case Or(l, r):
            return pair(TAG_OR, pair(encode(l), encode(r)))
        case ForAll(v, b):
            return pair(TAG_FORALL, pair(name_code(v), encode(b)))
        case Exists(v, b):
            return pair(TAG_EXISTS, pair(name_code(v), encode(b)))
        case PredApp(name, args):
            return pair(TAG_PRED, pair(name_code(name), _cons_list([encode_term(a) for a in args])))
        case Box(tpl, subst):
            entries = _cons_list([pair(name_code(v), encode_term(t)) for v, t in subst])
            return pair(TAG_BOX, pair(encode(tpl), entries))
    raise TypeError(f"not a formula: {f!r}")


def decode_term(code: int) -> Term:
    tag, payload = unpair(code)
    if tag == TAG_NUM:
        return numeral(payload)
    if tag == TAG_VAR:
        return _decoded_var(payload)
    if tag == TAG_SUCC:
        return Succ(decode_term(payload))
    if tag in (TAG_PLUS, TAG_TIMES):
        l, r = unpair(payload)
        cls = Plus if tag == TAG_PLUS else Times
        return cls(decode_term(l), decode_term(r))
    raise NotACode(f"tag {tag} is not a term tag")


def _decoded_var(name_payload: int) -> Var:
    name = decode_name(name_payload)
    try:
        return Var(name)
    except SyntaxBuildError as e:
        raise NotACode(str(e)) from None


def decode(code: int) -> Formula:
    tag, payload = unpair(code)
    if tag == TAG_FALSUM:
        if payload != 0:
            raise NotACode("falsum carries a payload")
        return Falsum()
    if tag in (TAG_EQ, TAG_LT):
        l, r = unpair(payload)
        cls = Eq if tag == TAG_EQ else Lt
        return cls(decode_term(l), decode_term(r))
    if tag == TAG_NOT:
        return Not(decode(payload))
    if tag in (TAG_IMP, TAG_AND, TAG_OR):
        l, r = unpair(payload)
        cls = {TAG_IMP: Imp, TAG_AND: And, TAG_OR: Or}[tag]
        return cls(decode(l), decode(r))
    if tag in (TAG_FORALL, TAG_EXISTS):
        v, b = unpair(payload)
        cls = ForAll if tag == TAG_FORALL else Exists
        return cls(_decoded_var(v).name, decode(b))
    if tag == TAG_PRED:
        nm, args = unpair(payload)
        name = decode_name(nm)
        try:
            return PredApp(name, tuple(decode_term(a) for a in _uncons_list(args)))
        except SyntaxBuildError as e:
            raise NotACode(str(e)) from None
    if tag == TAG_BOX:
        tpl, entries = unpair(payload)
        pairs = []
        for e in _uncons_list(entries):
            v, t = unpair(e)
            pairs.append((_decoded_var(v).name, decode_term(t)))
        try:
            return Box(decode(tpl), tuple(pairs))
        except SyntaxBuildError as e:
            raise NotACode(str(e)) from None
    raise NotACode(f"tag {tag} is not a formula tag")


def numeral_code(n: int) -> int:
    if n < 0:
        raise ValueError("numerals are non-negative")
    return pair(TAG_NUM, n)


# ---------------------------------------------------------------- code-level substitution


def sub_code(code: int, var: str, n: int) -> int:
    """Substitute the numeral for the variable, working directly on codes.

    Commutes with encode: sub_code(encode(f), v, n) equals
    encode(substitute(f, v, numeral(n))).  Successors whose argument becomes a
    tower are folded into the compact numeral form to keep that alignment, and
    binders for the substituted variable shadow it.  Quotation templates are
    untouched; only their substitution ranges are rewritten.
    """
    vcode = name_code(var)

    def go(k: int) -> int:
        tag, payload = unpair(k)
        if tag in (TAG_NUM, TAG_FALSUM):
            return k
        if tag == TAG_VAR:
            return pair(TAG_NUM, n) if payload == vcode else k
        if tag == TAG_SUCC:
            inner = go(payload)
            itag, ival = unpair(inner)
            if itag == TAG_NUM:
                return pair(TAG_NUM, ival + 1)
            return pair(TAG_SUCC, inner)
        if tag in (TAG_PLUS, TAG_TIMES, TAG_EQ, TAG_LT, TAG_IMP, TAG_AND, TAG_OR):
            l, r = unpair(payload)
            return pair(tag, pair(go(l), go(r)))
        if tag == TAG_NOT:
            return pair(tag, go(payload))
        if tag in (TAG_FORALL, TAG_EXISTS):
            v, b = unpair(payload)
            if v == vcode:
                return k
            return pair(tag, pair(v, go(b)))
        if tag == TAG_PRED:
            nm, args = unpair(payload)
            return pair(tag, pair(nm, _cons_list([go(a) for a in _uncons_list(args)])))
        if tag == TAG_BOX:
            tpl, entries = unpair(payload)
            new = []
            for e in _uncons_list(entries):
                v, t = unpair(e)
                new.append(pair(v, go(t)))
            return pair(tag, pair(tpl, _cons_list(new)))
        raise NotACode(f"tag {tag} is not a node tag")

    return go(code)


# ---------------------------------------------------------------- fixed points


class DiagonalError(ValueError):
    pass


@dataclass(frozen=True)
class DiagonalResult:
    """Outcome of introducing a predicate as the fixed point of a template.

    fixed_point is the defined atom (or the template itself when the template
    never mentions the hole).  biconditional is the definitional equivalence.
    trace is a replayable list of (label, code) checkpoints tying the
    construction to the numeric coding.
    """

    hole: str
    params: tuple[str, ...]
    template: Formula
    fixed_point: Formula
    biconditional: Formula
    trace: tuple[tuple[str, int], ...]


def _hole_positions(f: Formula, hole: str, under_box: bool, out: list[bool]) -> None:
    match f:
        case PredApp(name, _) if name == hole:
            out.append(under_box)
        case Not(s):
            _hole_positions(s, hole, under_box, out)
        case Imp(l, r) | And(l, r) | Or(l, r):
            _hole_positions(l, hole, under_box, out)
            _hole_positions(r, hole, under_box, out)
        case ForAll(_, b) | Exists(_, b):
            _hole_positions(b, hole, under_box, out)
        case Box(tpl, _):
            _hole_positions(tpl, hole, True, out)
        case _:
            pass


def _build_trace(template: Formula, hole: str, params: tuple[str, ...],
                 bicond: Formula, fixed_point: Formula) -> tuple[tuple[str, int], ...]:
    entries: list[tuple[str, int]] = [
        ("template", encode(template)),
        ("name", name_code(hole)),
        ("biconditional", encode(bicond)),
    ]
    tcode = encode(template)
    for p in params:
        entries.append((f"probe {p}:=0", sub_code(tcode, p, 0)))
    entries.append(("fixed-point", encode(fixed_point)))
    return tuple(entries)


def diagonalize(template: Formula, hole: str, params: tuple[str, ...]) -> DiagonalResult:
    """Fixed point of template in the hole predicate, by naming.

    The hole may occur only inside quotation templates; an occurrence in
    direct position is rejected.  When the hole never occurs the template is
    its own fixed point.
    """
    positions: list[bool] = []
    _hole_positions(template, hole, False, positions)
    if any(not p for p in positions):
        raise DiagonalError(f"predicate {hole} occurs outside every quotation")
    for p in params:
        Var(p)
    if positions:
        fixed_point: Formula = PredApp(hole, tuple(Var(p) for p in params))
    else:
        fixed_point = template
    bicond = iff(fixed_point, template)
    return DiagonalResult(
        hole=hole,
        params=tuple(params),
        template=template,
        fixed_point=fixed_point,
        biconditional=bicond,
        trace=_build_trace(template, hole, params, bicond, fixed_point),
    )


def replay_trace(result: DiagonalResult) -> bool:
    """Recompute every checkpoint of a diagonal trace from scratch.

    Raises DiagonalError on the first mismatch; substitution probes are
    checked both at the code level and through decode/substitute/encode.
    """
    expected = _build_trace(result.template, result.hole, result.params,
                            result.biconditional, result.fixed_point)
    if len(expected) != len(result.trace):
        raise DiagonalError("trace length mismatch")
    for (lbl_e, code_e), (lbl_g, code_g) in zip(expected, result.trace):
        if lbl_e != lbl_g or code_e != code_g:
            raise DiagonalError(f"trace entry {lbl_g!r} does not replay")
    tcode = encode(result.template)
    if decode(tcode) != result.template:
        raise DiagonalError("template code does not decode back")
    for p in result.params:
        via_code = sub_code(tcode, p, 0)
        via_ast = encode(substitute_many(result.template, {p: numeral(0)}))
        if via_code != via_ast:
            raise DiagonalError(f"substitution probe for {p} disagrees with the syntax route")
    if result.trace[-1][1] != encode(result.fixed_point):
        raise DiagonalError("final trace entry is not the fixed point's code")
    if not alpha_eq(result.biconditional, iff(result.fixed_point, result.template)):
        raise DiagonalError("biconditional does not tie fixed point to template")
    return True


def pred_rename(f: Formula, old: str, new: str) -> Formula:
    """Rename a predicate symbol everywhere, quotation templates included."""
    match f:
        case PredApp(name, args):
            return PredApp(new if name == old else name, args)
        case Not(s):
            return Not(pred_rename(s, old, new))
        case Imp(l, r):
            return Imp(pred_rename(l, old, new), pred_rename(r, old, new))
        case And(l, r):
            return And(pred_rename(l, old, new), pred_rename(r, old, new))
        case Or(l, r):
            return Or(pred_rename(l, old, new), pred_rename(r, old, new))
        case ForAll(v, b):
            return ForAll(v, pred_rename(b, old, new))
        case Exists(v, b):
            return Exists(v, pred_rename(b, old, new))
        case Box(tpl, subst):
            return Box(pred_rename(tpl, old, new), subst)
        case _:
            return f


def fix_intro(signature, name: str, params: tuple[str, ...], body_with_self: Formula) -> DiagonalResult:
    """Install name as the fixed point of a template written with `self`.

    The template's `self` applications become applications of name, the
    diagonal construction produces the definitional biconditional and its
    trace, and the definition is registered so proof scripts can unfold and
    fold it.
    """
    body = pred_rename(body_with_self, "self", name)
    result = diagonalize(body, name, params)
    signature.define(name, tuple(params), body)
    return result
