"""Checker for object-level derivations.

Steps live in a block discipline: `assume` opens a subproof, `qed-block`
discharges it into an implication, and a step may cite an earlier step only if
that step's block is still open around the citing one.  Every rule compares
formulas up to renaming of bound variables, which includes the dotted
variables of a quotation's substitution.

The provability-specific rules are: introduction of a quotation for an
already-derived line (gd1, top level only), distribution of quotation over
implication (gd2), quotation of any formula in the existential fragment (gd3),
the quoted-soundness-to-truth collapse (lob), the definitional unfolding and
folding implications, and the consistency sentence's definition (con-def).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coding import DiagonalError, fix_intro
from .scripts import KernelScript, KernelStep
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
    Signature,
    Succ,
    SyntaxBuildError,
    Term,
    Times,
    Var,
    Zero,
    alpha_eq,
    canonical,
    free_vars,
    identity_box,
    iff,
    print_formula,
    print_term,
    sigma1,
    substitute,
)

MAX_TAUT_ATOMS = 16


@dataclass(frozen=True)
class Violation:
    step: int | None
    message: str

    def __str__(self) -> str:
        where = f"step {self.step}" if self.step is not None else "script"
        return f"{where}: {self.message}"


@dataclass
class CheckReport:
    name: str
    ok: bool
    violations: list[Violation] = field(default_factory=list)
    conclusion: Formula | None = None
    steps_checked: int = 0

    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None


class _Fail(Exception):
    def __init__(self, message: str):
        self.message = message


@dataclass(frozen=True)
class _Record:
    formula: Formula
    path: tuple[int, ...]
    is_assume: bool


# ---------------------------------------------------------------- helpers


def eval_closed_term(t: Term) -> int | None:
    """Value of a variable-free term, or None if a variable occurs."""
    match t:
        case Zero():
            return 0
        case Succ(a):
            v = eval_closed_term(a)
            return None if v is None else v + 1
        case Plus(l, r):
            lv, rv = eval_closed_term(l), eval_closed_term(r)
            return None if lv is None or rv is None else lv + rv
        case Times(l, r):
            lv, rv = eval_closed_term(l), eval_closed_term(r)
            return None if lv is None or rv is None else lv * rv
        case Var(_):
            return None
    raise TypeError(f"not a term: {t!r}")


def _collect_atoms(f: Formula, order: list, index: dict) -> None:
    match f:
        case Falsum():
            return
        case Not(s):
            _collect_atoms(s, order, index)
        case Imp(l, r) | And(l, r) | Or(l, r):
            _collect_atoms(l, order, index)
            _collect_atoms(r, order, index)
        case _:
            key = canonical(f)
            if key not in index:
                index[key] = len(order)
                order.append(f)


def taut_consequence(premises: list[Formula], goal: Formula) -> tuple[bool, dict | None]:
    """Truth-table check that goal follows from premises treating every
    non-connective subformula as an opaque atom.  Returns (True, None) or
    (False, countervaluation keyed by printed atom)."""
    form: Formula = goal
    for p in reversed(premises):
        form = Imp(p, form)
    order: list[Formula] = []
    index: dict = {}
    _collect_atoms(form, order, index)
    if len(order) > MAX_TAUT_ATOMS:
        raise _Fail(f"too many distinct atoms for a truth-table check ({len(order)})")

    def ev(g: Formula, bits: int) -> bool:
        match g:
            case Falsum():
                return False
            case Not(s):
                return not ev(s, bits)
            case Imp(l, r):
                return (not ev(l, bits)) or ev(r, bits)
            case And(l, r):
                return ev(l, bits) and ev(r, bits)
            case Or(l, r):
                return ev(l, bits) or ev(r, bits)
            case _:
                return bool(bits >> index[canonical(g)] & 1)

    for bits in range(1 << len(order)):
        if not ev(form, bits):
            witness = {print_formula(a): bool(bits >> i & 1) for i, a in enumerate(order)}
            return False, witness
    return True, None


def match_schema(pattern: Formula, instance: Formula) -> dict[str, Term] | None:
    """One-sided match of a quantifier-free axiom schema against a formula,
    assigning terms to the schema's free variables."""
    env: dict[str, Term] = {}

    def mt(p: Term, i: Term) -> bool:
        match p:
            case Var(name):
                if name in env:
                    return env[name] == i
                env[name] = i
                return True
            case Zero():
                return isinstance(i, Zero)
            case Succ(a):
                return isinstance(i, Succ) and mt(a, i.arg)
            case Plus(l, r):
                return isinstance(i, Plus) and mt(l, i.left) and mt(r, i.right)
            case Times(l, r):
                return isinstance(i, Times) and mt(l, i.left) and mt(r, i.right)
        return False

    def mf(p: Formula, i: Formula) -> bool:
        match p:
            case Falsum():
                return isinstance(i, Falsum)
            case Eq(l, r):
                return isinstance(i, Eq) and mt(l, i.left) and mt(r, i.right)
            case Lt(l, r):
                return isinstance(i, Lt) and mt(l, i.left) and mt(r, i.right)
            case Not(s):
                return isinstance(i, Not) and mf(s, i.sub)
            case Imp(l, r):
                return isinstance(i, Imp) and mf(l, i.left) and mf(r, i.right)
            case And(l, r):
                return isinstance(i, And) and mf(l, i.left) and mf(r, i.right)
            case Or(l, r):
                return isinstance(i, Or) and mf(l, i.left) and mf(r, i.right)
        return False

    return env if mf(pattern, instance) else None


def _restrict(subst: tuple[tuple[str, Term], ...], names: set[str]) -> tuple[tuple[str, Term], ...]:
    return tuple((v, t) for v, t in subst if v in names)


def arity_violation(f: Formula, sig: Signature) -> str | None:
    """First predicate-usage problem in f (quotation templates included)."""
    match f:
        case PredApp(name, args):
            known = sig.arity(name)
            if known is None:
                return f"unknown predicate {name}"
            if known != len(args):
                return f"predicate {name} expects {known} arguments, got {len(args)}"
            return None
        case Not(s):
            return arity_violation(s, sig)
        case Imp(l, r) | And(l, r) | Or(l, r):
            return arity_violation(l, sig) or arity_violation(r, sig)
        case ForAll(_, b) | Exists(_, b):
            return arity_violation(b, sig)
        case Box(tpl, _):
            return arity_violation(tpl, sig)
        case _:
            return None


# ---------------------------------------------------------------- checker


class _KernelChecker:
    def __init__(self, script: KernelScript, signature: Signature, axioms: dict[str, Formula]):
        self.script = script
        self.sig = signature
        self.axioms = axioms
        self.records: dict[int, _Record] = {}
        self.order: list[int] = []
        self.open_blocks: list[int] = []

    # -- record access

    def get(self, ref: int) -> Formula:
        rec = self.records.get(ref)
        if rec is None:
            raise _Fail(f"cites step {ref}, which does not exist")
        here = tuple(self.open_blocks)
        if rec.path != here[: len(rec.path)]:
            raise _Fail(f"cites step {ref}, which sits in a closed block")
        return rec.formula

    def arity_check(self, f: Formula) -> None:
        problem = arity_violation(f, self.sig)
        if problem:
            raise _Fail(problem)

    def active_assumptions(self) -> list[Formula]:
        return [self.records[i].formula for i in self.open_blocks]

    # -- rule handlers; each raises _Fail or returns None

    def rule_taut(self, step: KernelStep) -> None:
        premises = [self.get(r) for r in step.refs]
        ok, witness = taut_consequence(premises, step.formula)
        if not ok:
            raise _Fail(f"not a tautological consequence; countervaluation {witness}")

    def rule_mp(self, step: KernelStep) -> None:
        fi, fj = self._two(step)
        if not isinstance(fi, Imp):
            raise _Fail("first cited step is not an implication")
        if not alpha_eq(fj, fi.left):
            raise _Fail("second cited step does not match the antecedent")
        if not alpha_eq(step.formula, fi.right):
            raise _Fail("stated formula does not match the consequent")

    def rule_andI(self, step: KernelStep) -> None:
        fi, fj = self._two(step)
        if not isinstance(step.formula, And):
            raise _Fail("stated formula is not a conjunction")
        if not (alpha_eq(step.formula.left, fi) and alpha_eq(step.formula.right, fj)):
            raise _Fail("conjuncts do not match the cited steps")

    def rule_andE1(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(fi, And):
            raise _Fail("cited step is not a conjunction")
        if not alpha_eq(step.formula, fi.left):
            raise _Fail("stated formula is not the left conjunct")

    def rule_andE2(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(fi, And):
            raise _Fail("cited step is not a conjunction")
        if not alpha_eq(step.formula, fi.right):
            raise _Fail("stated formula is not the right conjunct")

    def rule_orI1(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(step.formula, Or) or not alpha_eq(step.formula.left, fi):
            raise _Fail("stated formula is not a disjunction whose left side is the cited step")

    def rule_orI2(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(step.formula, Or) or not alpha_eq(step.formula.right, fi):
            raise _Fail("stated formula is not a disjunction whose right side is the cited step")

    def rule_orE(self, step: KernelStep) -> None:
        if len(step.refs) != 3:
            raise _Fail("orE cites a disjunction and two implications")
        fi, fj, fk = (self.get(r) for r in step.refs)
        if not isinstance(fi, Or):
            raise _Fail("first cited step is not a disjunction")
        if not (isinstance(fj, Imp) and alpha_eq(fj.left, fi.left)):
            raise _Fail("second cited step does not discharge the left disjunct")
        if not (isinstance(fk, Imp) and alpha_eq(fk.left, fi.right)):
            raise _Fail("third cited step does not discharge the right disjunct")
        if not (alpha_eq(fj.right, step.formula) and alpha_eq(fk.right, step.formula)):
            raise _Fail("stated formula does not match both case conclusions")

    def rule_negI(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not (isinstance(fi, Imp) and isinstance(fi.right, Falsum)):
            raise _Fail("cited step is not an implication into absurdity")
        if not alpha_eq(step.formula, Not(fi.left)):
            raise _Fail("stated formula is not the negation of the refuted formula")

    def rule_negE(self, step: KernelStep) -> None:
        fi, fj = self._two(step)
        if not isinstance(step.formula, Falsum):
            raise _Fail("stated formula must be absurdity")
        if not (isinstance(fj, Not) and alpha_eq(fj.sub, fi)):
            raise _Fail("second cited step is not the negation of the first")

    def rule_allI(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(step.formula, ForAll):
            raise _Fail("stated formula is not universally quantified")
        v, body = step.formula.var, step.formula.body
        if not alpha_eq(fi, body):
            raise _Fail("cited step does not match the quantified body")
        for a in self.active_assumptions():
            if v in free_vars(a):
                raise _Fail(f"variable {v} is free in an active assumption")

    def rule_allE(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(fi, ForAll):
            raise _Fail("cited step is not universally quantified")
        want = substitute(fi.body, fi.var, step.term)
        if not alpha_eq(step.formula, want):
            raise _Fail(f"stated formula is not the instance at {print_term(step.term)}")

    def rule_exI(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not isinstance(step.formula, Exists):
            raise _Fail("stated formula is not existentially quantified")
        want = substitute(step.formula.body, step.formula.var, step.term)
        if not alpha_eq(fi, want):
            raise _Fail(f"cited step is not the instance at {print_term(step.term)}")

    def rule_exE(self, step: KernelStep) -> None:
        fi, fj = self._two(step)
        if not isinstance(fi, Exists):
            raise _Fail("first cited step is not existentially quantified")
        if not isinstance(fj, Imp):
            raise _Fail("second cited step is not an implication")
        y = step.var
        want_left = substitute(fi.body, fi.var, Var(y))
        if not alpha_eq(fj.left, want_left):
            raise _Fail(f"implication antecedent is not the witness instance at {y}")
        if not alpha_eq(step.formula, fj.right):
            raise _Fail("stated formula does not match the implication consequent")
        banned = free_vars(fi) | free_vars(step.formula)
        for a in self.active_assumptions():
            banned |= free_vars(a)
        if y in banned:
            raise _Fail(f"witness variable {y} is not fresh here")

    def rule_arith(self, step: KernelStep) -> None:
        axiom = self.axioms.get(step.name)
        if axiom is None:
            raise _Fail(f"no axiom named {step.name}")
        if match_schema(axiom, step.formula) is None:
            raise _Fail(f"stated formula is not an instance of axiom {step.name}")

    def rule_numeval(self, step: KernelStep) -> None:
        f = step.formula
        negated = isinstance(f, Not)
        atom = f.sub if negated else f
        match atom:
            case Eq(l, r):
                op = int.__eq__
            case Lt(l, r):
                op = int.__lt__
            case _:
                raise _Fail("numeric evaluation applies to equalities and inequalities only")
        lv, rv = eval_closed_term(l), eval_closed_term(r)
        if lv is None or rv is None:
            raise _Fail("terms are not closed")
        if bool(op(lv, rv)) == negated:
            raise _Fail(f"evaluates to {lv} and {rv}; the stated formula is false")

    def rule_unfold(self, step: KernelStep) -> None:
        self._definitional(step, folded_on_left=True)

    def rule_fold(self, step: KernelStep) -> None:
        self._definitional(step, folded_on_left=False)

    def _definitional(self, step: KernelStep, folded_on_left: bool) -> None:
        d = self.sig.definition(step.name)
        if d is None:
            raise _Fail(f"predicate {step.name} has no definition")
        if not isinstance(step.formula, Imp):
            raise _Fail("stated formula is not an implication")
        app = step.formula.left if folded_on_left else step.formula.right
        body = step.formula.right if folded_on_left else step.formula.left
        if not (isinstance(app, PredApp) and app.name == step.name):
            side = "antecedent" if folded_on_left else "consequent"
            raise _Fail(f"{side} is not an application of {step.name}")
        try:
            want = self.sig.instantiate(step.name, app.args)
        except SyntaxBuildError as e:
            raise _Fail(str(e)) from None
        if not alpha_eq(body, want):
            raise _Fail("other side does not match the instantiated definition body")

    def rule_gd1(self, step: KernelStep) -> None:
        if len(step.refs) != 1:
            raise _Fail("gd1 cites exactly one step")
        ref = step.refs[0]
        rec = self.records.get(ref)
        if rec is None:
            raise _Fail(f"cites step {ref}, which does not exist")
        if rec.path != ():
            raise _Fail("quotation introduction may only cite a step outside every assumption block")
        if not alpha_eq(step.formula, identity_box(rec.formula)):
            raise _Fail("stated formula is not the self-substituted quotation of the cited step")

    def rule_gd2(self, step: KernelStep) -> None:
        f = step.formula
        if not (isinstance(f, Imp) and isinstance(f.left, Box) and isinstance(f.right, Imp)
                and isinstance(f.right.left, Box) and isinstance(f.right.right, Box)):
            raise _Fail("shape must be: quoted implication implies (quoted antecedent implies quoted consequent)")
        outer = f.left
        if not isinstance(outer.template, Imp):
            raise _Fail("outermost quotation does not contain an implication")
        a, b = outer.template.left, outer.template.right
        try:
            want1 = Box(a, _restrict(outer.subst, free_vars(a)))
            want2 = Box(b, _restrict(outer.subst, free_vars(b)))
        except SyntaxBuildError as e:
            raise _Fail(str(e)) from None
        if not alpha_eq(f.right.left, want1):
            raise _Fail("quoted antecedent does not carry the restricted substitution")
        if not alpha_eq(f.right.right, want2):
            raise _Fail("quoted consequent does not carry the restricted substitution")

    def rule_gd3(self, step: KernelStep) -> None:
        f = step.formula
        if not isinstance(f, Imp):
            raise _Fail("stated formula is not an implication")
        psi = f.left
        if not sigma1(psi):
            raise _Fail("antecedent is outside the existential fragment")
        if not alpha_eq(f.right, identity_box(psi)):
            raise _Fail("consequent is not the self-substituted quotation of the antecedent")

    def rule_lob(self, step: KernelStep) -> None:
        f = step.formula
        if not (isinstance(f, Imp) and isinstance(f.left, Box) and isinstance(f.right, Box)):
            raise _Fail("shape must be: quoted soundness-assertion implies quoted formula")
        target = f.right
        try:
            expected = Imp(
                Box(Imp(identity_box(target.template), target.template), target.subst),
                target,
            )
        except SyntaxBuildError as e:
            raise _Fail(str(e)) from None
        if not alpha_eq(f, expected):
            raise _Fail("antecedent does not quote `if provable then true` for the consequent's formula")

    def rule_con_def(self, step: KernelStep) -> None:
        want = iff(PredApp("Con"), Not(Box(Falsum())))
        if not alpha_eq(step.formula, want):
            raise _Fail("stated formula is not the definitional equivalence for Con")

    def rule_reiterate(self, step: KernelStep) -> None:
        fi = self._one(step)
        if not alpha_eq(step.formula, fi):
            raise _Fail("stated formula differs from the cited step")

    def _one(self, step: KernelStep) -> Formula:
        if len(step.refs) != 1:
            raise _Fail(f"{step.rule} cites exactly one step")
        return self.get(step.refs[0])

    def _two(self, step: KernelStep) -> tuple[Formula, Formula]:
        if len(step.refs) != 2:
            raise _Fail(f"{step.rule} cites exactly two steps")
        return self.get(step.refs[0]), self.get(step.refs[1])

    # -- driver

    _HANDLERS = {
        "taut": rule_taut,
        "mp": rule_mp,
        "andI": rule_andI,
        "andE1": rule_andE1,
        "andE2": rule_andE2,
        "orI1": rule_orI1,
        "orI2": rule_orI2,
        "orE": rule_orE,
        "negI": rule_negI,
        "negE": rule_negE,
        "allI": rule_allI,
        "allE": rule_allE,
        "exI": rule_exI,
        "exE": rule_exE,
        "arith": rule_arith,
        "numeval": rule_numeval,
        "unfold": rule_unfold,
        "fold": rule_fold,
        "gd1": rule_gd1,
        "gd2": rule_gd2,
        "gd3": rule_gd3,
        "lob": rule_lob,
        "con-def": rule_con_def,
        "reiterate": rule_reiterate,
    }

    def run(self) -> CheckReport:
        report = CheckReport(self.script.name, ok=False)
        for d in self.script.defs:
            try:
                fix_intro(self.sig, d.name, d.params, d.body)
            except (SyntaxBuildError, DiagonalError) as e:
                report.violations.append(Violation(None, f"definition {d.name}: {e}"))
                return report
        last_index = 0
        for step in self.script.steps:
            try:
                if step.index <= last_index:
                    raise _Fail(f"step numbers must increase (previous was {last_index})")
                last_index = step.index
                self._check_step(step)
            except _Fail as e:
                report.violations.append(Violation(step.index, e.message))
                report.steps_checked = len(self.records)
                return report
            report.steps_checked += 1
        if self.open_blocks:
            report.violations.append(
                Violation(None, f"assumption block opened at step {self.open_blocks[-1]} is never closed")
            )
            return report
        if not self.order:
            report.violations.append(Violation(None, "script has no steps"))
            return report
        last = self.records[self.order[-1]]
        if not alpha_eq(last.formula, self.script.conclusion):
            report.violations.append(
                Violation(self.order[-1],
                          f"final step proves {print_formula(last.formula)}, "
                          f"not the stated conclusion")
            )
            return report
        report.ok = True
        report.conclusion = self.script.conclusion
        return report

    def _check_step(self, step: KernelStep) -> None:
        if step.kind == "assume":
            self.arity_check(step.formula)
            self.open_blocks.append(step.index)
            self._record(step.index, step.formula, is_assume=True)
            return
        if step.kind == "qed":
            if not self.open_blocks:
                raise _Fail("no assumption block is open")
            if step.target != self.open_blocks[-1]:
                raise _Fail(
                    f"block to close is the one opened at step {self.open_blocks[-1]}, not {step.target}"
                )
            block_path = tuple(self.open_blocks)
            inner = [i for i in self.order if self.records[i].path == block_path]
            assumption = self.records[step.target].formula
            result = Imp(assumption, self.records[inner[-1]].formula)
            self.open_blocks.pop()
            self._record(step.index, result, is_assume=False)
            return
        self.arity_check(step.formula)
        handler = self._HANDLERS.get(step.rule)
        if handler is None:
            raise _Fail(f"unknown rule {step.rule!r}")
        handler(self, step)
        self._record(step.index, step.formula, is_assume=False)

    def _record(self, index: int, formula: Formula, is_assume: bool) -> None:
        self.records[index] = _Record(formula, tuple(self.open_blocks), is_assume)
        self.order.append(index)


def check_kernel_script(script: KernelScript, signature: Signature,
                        axioms: dict[str, Formula]) -> CheckReport:
    return _KernelChecker(script, signature, axioms).run()


# ---------------------------------------------------------------- soundness-to-truth composer


def apply_glt(sub: KernelScript, signature: Signature,
              axioms: dict[str, Formula]) -> KernelScript:
    """Extend a derivation of `Prov[phi] -> phi` (self-substituted quotation)
    into a derivation of phi, via quotation introduction and the lob scheme.

    The input script must check, and its conclusion must have exactly that
    reflection shape; the returned script ends in phi and checks under the
    same signature and axioms.
    """
    report = check_kernel_script(sub, signature.copy(), axioms)
    if not report.ok:
        raise ValueError(f"input script does not check: {report.first()}")
    concl = sub.conclusion
    if not (isinstance(concl, Imp) and isinstance(concl.left, Box)):
        raise ValueError("conclusion is not of the form `Prov[...] -> ...`")
    phi = concl.right
    if not alpha_eq(concl.left, identity_box(phi)):
        raise ValueError("antecedent is not the self-substituted quotation of the consequent")
    m = sub.steps[-1].index
    n = m + 1
    boxed_concl = identity_box(concl)
    lob_step = Imp(boxed_concl, identity_box(phi))
    new_steps = (
        KernelStep(n, "derive", formula=boxed_concl, rule="gd1", refs=(m,)),
        KernelStep(n + 1, "derive", formula=lob_step, rule="lob"),
        KernelStep(n + 2, "derive", formula=identity_box(phi), rule="mp", refs=(n + 1, n)),
        KernelStep(n + 3, "derive", formula=phi, rule="mp", refs=(m, n + 2)),
    )
    return KernelScript(
        name=f"{sub.name}_collapsed",
        doc=sub.doc,
        variables=sub.variables,
        defs=sub.defs,
        steps=sub.steps + new_steps,
        conclusion=phi,
    )
