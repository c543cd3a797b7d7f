"""Object-language syntax: first-order arithmetic plus a structural provability
quotation.

Terms are built from zero, successor, plus, times, and variables.  Formulas add
the usual connectives and quantifiers, predicate applications resolved against a
Signature, and Box(template, subst): the provability assertion for the template
with the substitution's terms written into its dotted variables.  The subst
domain must cover the template's free variables exactly, so a Box node is closed
from the outside except through the subst range.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

IDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
PRED_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")
RESERVED = {"bot", "all", "exists", "by", "with", "self"}


class SyntaxBuildError(ValueError):
    """Raised when a constructor is handed ill-formed pieces."""


def _check_var(name: str) -> str:
    if not IDENT_RE.match(name) or name in RESERVED:
        raise SyntaxBuildError(f"bad variable name {name!r}")
    return name


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class Succ(Term):
    arg: Term


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Times(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __post_init__(self):
        _check_var(self.name)


def numeral(n: int) -> Term:
    """The n-fold successor tower over zero."""
    if n < 0:
        raise SyntaxBuildError("numerals are non-negative")
    t: Term = Zero()
    for _ in range(n):
        t = Succ(t)
    return t


def numeral_value(t: Term) -> int | None:
    """The n with t == numeral(n), or None if t is not a pure tower."""
    n = 0
    while isinstance(t, Succ):
        n += 1
        t = t.arg
    return n if isinstance(t, Zero) else None


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Falsum(Formula):
    pass


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Lt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var)


@dataclass(frozen=True)
class PredApp(Formula):
    name: str
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        if not PRED_RE.match(self.name):
            raise SyntaxBuildError(f"bad predicate name {self.name!r}")
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Box(Formula):
    """Provability of the template at the values supplied by subst.

    subst maps each free variable of the template (exactly those, no extras,
    no duplicates) to a term.  Entries are stored sorted by variable name.
    """

    template: Formula
    subst: tuple[tuple[str, Term], ...] = ()

    def __post_init__(self):
        entries = tuple(sorted(self.subst, key=lambda e: e[0]))
        names = [v for v, _ in entries]
        if len(set(names)) != len(names):
            raise SyntaxBuildError("duplicate variable in Box substitution")
        need = free_vars(self.template)
        have = set(names)
        if have != need:
            missing = sorted(need - have)
            extra = sorted(have - need)
            bits = []
            if missing:
                bits.append(f"uncovered template variables {missing}")
            if extra:
                bits.append(f"entries for non-template variables {extra}")
            raise SyntaxBuildError("Box substitution mismatch: " + "; ".join(bits))
        object.__setattr__(self, "subst", entries)

    def range_of(self, v: str) -> Term:
        for name, t in self.subst:
            if name == v:
                return t
        raise KeyError(v)


def iff(a: Formula, b: Formula) -> And:
    """A biconditional, spelled as the conjunction of both implications."""
    return And(Imp(a, b), Imp(b, a))


# ---------------------------------------------------------------- free variables


def term_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case Succ(a):
            return term_vars(a)
        case Plus(l, r) | Times(l, r):
            return term_vars(l) | term_vars(r)
        case _:
            return set()


def free_vars(f: Formula) -> set[str]:
    match f:
        case Falsum():
            return set()
        case Eq(l, r) | Lt(l, r):
            return term_vars(l) | term_vars(r)
        case Not(s):
            return free_vars(s)
        case Imp(l, r) | And(l, r) | Or(l, r):
            return free_vars(l) | free_vars(r)
        case ForAll(v, b) | Exists(v, b):
            return free_vars(b) - {v}
        case PredApp(_, args):
            out: set[str] = set()
            for a in args:
                out |= term_vars(a)
            return out
        case Box(_, subst):
            out = set()
            for _, t in subst:
                out |= term_vars(t)
            return out
    raise TypeError(f"not a formula: {f!r}")


def _template_var_order(f: Formula) -> list[str]:
    """Free variables of a Box template in first-occurrence order."""
    seen: list[str] = []

    def walk_term(t: Term, bound: frozenset[str]):
        match t:
            case Var(name):
                if name not in bound and name not in seen:
                    seen.append(name)
            case Succ(a):
                walk_term(a, bound)
            case Plus(l, r) | Times(l, r):
                walk_term(l, bound)
                walk_term(r, bound)

    def walk(g: Formula, bound: frozenset[str]):
        match g:
            case Eq(l, r) | Lt(l, r):
                walk_term(l, bound)
                walk_term(r, bound)
            case Not(s):
                walk(s, bound)
            case Imp(l, r) | And(l, r) | Or(l, r):
                walk(l, bound)
                walk(r, bound)
            case ForAll(v, b) | Exists(v, b):
                walk(b, bound | {v})
            case PredApp(_, args):
                for a in args:
                    walk_term(a, bound)
            case Box(_, subst):
                for _, t in subst:
                    walk_term(t, bound)

    walk(f, frozenset())
    return seen


# ---------------------------------------------------------------- alpha-equivalence

# Canonical forms use de-Bruijn-style levels for quantifier binders.  A Box
# template is its own scope: its free variables are bound by the subst domain,
# so they are canonicalized positionally (first-occurrence order) and the range
# terms are read in the enclosing scope.  Two quotations that differ only in
# the spelling of their dotted variables therefore compare equal, which is what
# the checked derivations rely on when a definition's quoted formula meets one
# produced by distributing Box over an implication.


def _canon_term(t: Term, env: dict[str, object]) -> tuple:
    match t:
        case Zero():
            return ("0",)
        case Succ(a):
            return ("s", _canon_term(a, env))
        case Plus(l, r):
            return ("+", _canon_term(l, env), _canon_term(r, env))
        case Times(l, r):
            return ("*", _canon_term(l, env), _canon_term(r, env))
        case Var(name):
            return ("v", env.get(name, ("free", name)))
    raise TypeError(f"not a term: {t!r}")


def _canon(f: Formula, env: dict[str, object], depth: int) -> tuple:
    match f:
        case Falsum():
            return ("bot",)
        case Eq(l, r):
            return ("=", _canon_term(l, env), _canon_term(r, env))
        case Lt(l, r):
            return ("<", _canon_term(l, env), _canon_term(r, env))
        case Not(s):
            return ("~", _canon(s, env, depth))
        case Imp(l, r):
            return ("->", _canon(l, env, depth), _canon(r, env, depth))
        case And(l, r):
            return ("&", _canon(l, env, depth), _canon(r, env, depth))
        case Or(l, r):
            return ("|", _canon(l, env, depth), _canon(r, env, depth))
        case ForAll(v, b):
            return ("all", _canon(b, {**env, v: ("q", depth)}, depth + 1))
        case Exists(v, b):
            return ("ex", _canon(b, {**env, v: ("q", depth)}, depth + 1))
        case PredApp(name, args):
            return ("p", name, tuple(_canon_term(a, env) for a in args))
        case Box(tpl, _):
            order = _template_var_order(tpl)
            tpl_env: dict[str, object] = {v: ("d", i) for i, v in enumerate(order)}
            ranges = tuple(_canon_term(f.range_of(v), env) for v in order)
            return ("box", _canon(tpl, tpl_env, 0), ranges)
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=65536)
def canonical(f: Formula) -> tuple:
    """A hashable key equal for exactly the alpha-equivalent formulas."""
    return _canon(f, {}, 0)


def alpha_eq(f: Formula, g: Formula) -> bool:
    return f == g or canonical(f) == canonical(g)


# ---------------------------------------------------------------- substitution


def substitute_term(t: Term, sigma: dict[str, Term]) -> Term:
    match t:
        case Var(name):
            return sigma.get(name, t)
        case Succ(a):
            return Succ(substitute_term(a, sigma))
        case Plus(l, r):
            return Plus(substitute_term(l, sigma), substitute_term(r, sigma))
        case Times(l, r):
            return Times(substitute_term(l, sigma), substitute_term(r, sigma))
        case _:
            return t


def fresh_name(base: str, avoid: set[str]) -> str:
    """base with the smallest unused numeric suffix appended."""
    i = 0
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def substitute_many(f: Formula, sigma: dict[str, Term]) -> Formula:
    """Capture-avoiding parallel substitution of terms for free variables.

    Inside a Box only the subst range terms are rewritten; the template is
    quoted material and never touched.
    """
    sigma = {v: t for v, t in sigma.items() if t != Var(v)}
    if not sigma:
        return f

    def go(g: Formula, sg: dict[str, Term]) -> Formula:
        if not sg:
            return g
        match g:
            case Falsum():
                return g
            case Eq(l, r):
                return Eq(substitute_term(l, sg), substitute_term(r, sg))
            case Lt(l, r):
                return Lt(substitute_term(l, sg), substitute_term(r, sg))
            case Not(s):
                return Not(go(s, sg))
            case Imp(l, r):
                return Imp(go(l, sg), go(r, sg))
            case And(l, r):
                return And(go(l, sg), go(r, sg))
            case Or(l, r):
                return Or(go(l, sg), go(r, sg))
            case PredApp(name, args):
                return PredApp(name, tuple(substitute_term(a, sg) for a in args))
            case Box(tpl, subst):
                return Box(tpl, tuple((v, substitute_term(t, sg)) for v, t in subst))
            case ForAll(v, b) | Exists(v, b):
                inner = {w: t for w, t in sg.items() if w != v and w in free_vars(b)}
                cls = ForAll if isinstance(g, ForAll) else Exists
                if not inner:
                    return cls(v, b)
                clash = set()
                for t in inner.values():
                    clash |= term_vars(t)
                if v in clash:
                    avoid = clash | free_vars(b) | set(inner)
                    v2 = fresh_name(v, avoid)
                    b = go(b, {v: Var(v2)})
                    v = v2
                return cls(v, go(b, inner))
        raise TypeError(f"not a formula: {g!r}")

    return go(f, sigma)


def substitute(f: Formula, v: str, t: Term) -> Formula:
    return substitute_many(f, {v: t})


def apply_box_subst(b: Box) -> Formula:
    """The template with its subst written in: what the quotation asserts."""
    return substitute_many(b.template, {v: t for v, t in b.subst})


def identity_box(f: Formula) -> Box:
    """Box(f) with every free variable dotted at itself."""
    return Box(f, tuple((v, Var(v)) for v in sorted(free_vars(f))))


# ---------------------------------------------------------------- sigma-1


def sigma1(f: Formula) -> bool:
    """Membership in the existential class the provable-completeness scheme
    accepts: atomic (in)equalities and Box atoms, closed under conjunction,
    disjunction, bounded universal quantification, and unbounded existential
    quantification."""
    match f:
        case Eq(_, _) | Lt(_, _) | Box(_, _):
            return True
        case And(l, r) | Or(l, r):
            return sigma1(l) and sigma1(r)
        case Exists(_, b):
            return sigma1(b)
        case ForAll(v, Imp(Lt(Var(w), bound), b)) if w == v and v not in term_vars(bound):
            return sigma1(b)
        case _:
            return False


# ---------------------------------------------------------------- printing


def _term_prec(t: Term) -> int:
    # atom/succ/numeral 3, times 2, plus 1
    match t:
        case Plus(_, _):
            return 1
        case Times(_, _):
            return 2
        case _:
            return 3


def print_term(t: Term) -> str:
    n = numeral_value(t)
    if n is not None:
        return str(n)
    match t:
        case Var(name):
            return name
        case Succ(a):
            return f"S({print_term(a)})"
        case Plus(l, r):
            ls = print_term(l) if _term_prec(l) >= 1 else f"({print_term(l)})"
            rs = print_term(r) if _term_prec(r) >= 2 else f"({print_term(r)})"
            return f"{ls} + {rs}"
        case Times(l, r):
            ls = print_term(l) if _term_prec(l) >= 2 else f"({print_term(l)})"
            rs = print_term(r) if _term_prec(r) >= 3 else f"({print_term(r)})"
            return f"{ls} * {rs}"
        case Zero():
            return "0"
    raise TypeError(f"not a term: {t!r}")


def _prec(f: Formula) -> int:
    # -> 1, | 2, & 3, ~ 4, atoms 5; quantifiers print parenthesized as operands
    match f:
        case Imp(_, _):
            return 1
        case Or(_, _):
            return 2
        case And(_, _):
            return 3
        case Not(_):
            return 4
        case ForAll(_, _) | Exists(_, _):
            return 0
        case _:
            return 5


def print_formula(f: Formula) -> str:
    def operand(g: Formula, minimum: int) -> str:
        s = print_formula(g)
        return s if _prec(g) >= minimum else f"({s})"

    match f:
        case Falsum():
            return "bot"
        case Eq(l, r):
            return f"{print_term(l)} = {print_term(r)}"
        case Lt(l, r):
            return f"{print_term(l)} < {print_term(r)}"
        case Not(s):
            return f"~{operand(s, 4)}"
        case And(l, r):
            return f"{operand(l, 4)} & {operand(r, 3)}"
        case Or(l, r):
            return f"{operand(l, 3)} | {operand(r, 2)}"
        case Imp(l, r):
            return f"{operand(l, 2)} -> {operand(r, 1)}"
        case ForAll(v, b):
            return f"all {v}. {print_formula(b)}"
        case Exists(v, b):
            return f"exists {v}. {print_formula(b)}"
        case PredApp(name, args):
            if not args:
                return name
            return f"{name}({', '.join(print_term(a) for a in args)})"
        case Box(tpl, subst):
            inner = print_formula(tpl)
            if not subst:
                return f"Prov[{inner} ;]"
            entries = ", ".join(f"{v} := {print_term(t)}" for v, t in subst)
            return f"Prov[{inner} ; {entries}]"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- signature


@dataclass
class Signature:
    """Registry of predicate symbols: arity, and for defined ones the body.

    A definition, once set, is immutable; re-registering the identical
    definition is a no-op so independent scripts can share fixed points.
    """

    _entries: dict[str, tuple[tuple[str, ...], Formula | None]] = field(default_factory=dict)

    def declare(self, name: str, arity: int) -> None:
        if name in self._entries:
            params, _ = self._entries[name]
            if len(params) != arity:
                raise SyntaxBuildError(f"predicate {name} re-declared with different arity")
            return
        self._entries[name] = (tuple(f"p{i}" for i in range(arity)), None)

    def define(self, name: str, params: tuple[str, ...], body: Formula) -> None:
        if name in self._entries:
            old_params, old_body = self._entries[name]
            if old_body is None and len(old_params) == len(params):
                self._entries[name] = (tuple(params), body)
                return
            if old_body is not None and len(old_params) == len(params):
                theirs = substitute_many(
                    old_body, {p: Var(q) for p, q in zip(old_params, params)}
                )
                if alpha_eq(theirs, body):
                    return
            raise SyntaxBuildError(f"conflicting redefinition of {name}")
        self._entries[name] = (tuple(params), body)

    def arity(self, name: str) -> int | None:
        e = self._entries.get(name)
        return None if e is None else len(e[0])

    def definition(self, name: str) -> tuple[tuple[str, ...], Formula] | None:
        e = self._entries.get(name)
        if e is None or e[1] is None:
            return None
        return e

    def instantiate(self, name: str, args: tuple[Term, ...]) -> Formula:
        """The definition body of name with args written in for its parameters."""
        d = self.definition(name)
        if d is None:
            raise SyntaxBuildError(f"predicate {name} has no definition")
        params, body = d
        if len(params) != len(args):
            raise SyntaxBuildError(f"arity mismatch applying {name}")
        return substitute_many(body, dict(zip(params, args)))

    def names(self) -> list[str]:
        return sorted(self._entries)

    def copy(self) -> "Signature":
        return Signature(dict(self._entries))


CON = PredApp("Con")
CON_BODY = Not(Box(Falsum()))


def base_signature() -> Signature:
    """Fresh signature with the consistency sentence pre-defined."""
    sig = Signature()
    sig.define("Con", (), CON_BODY)
    return sig
