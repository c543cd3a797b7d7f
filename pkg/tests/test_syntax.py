import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from astgen import rand_formula, sample_formulas
from yablo.parser import ParseError, parse_formula, parse_term
from yablo.syntax import (
    And,
    Box,
    Falsum,
    ForAll,
    Imp,
    Lt,
    Not,
    Plus,
    PredApp,
    Succ,
    SyntaxBuildError,
    Var,
    Zero,
    alpha_eq,
    apply_box_subst,
    base_signature,
    canonical,
    free_vars,
    fresh_name,
    identity_box,
    iff,
    numeral,
    numeral_value,
    print_formula,
    print_term,
    sigma1,
    substitute,
    substitute_many,
)


def f(text: str):
    return parse_formula(text)


def t(text: str):
    return parse_term(text)


class TestTerms:
    def test_numeral_round_trip(self):
        for n in (0, 1, 2, 17):
            assert numeral_value(numeral(n)) == n

    def test_numeral_value_rejects_open_terms(self):
        assert numeral_value(Succ(Var("x"))) is None
        assert numeral_value(Plus(Zero(), Zero())) is None

    def test_reserved_variable_names(self):
        for bad in ("bot", "all", "self", "with"):
            with pytest.raises(SyntaxBuildError):
                Var(bad)

    def test_print_term_precedence(self):
        assert print_term(t("x * (y + z)")) == "x * (y + z)"
        assert print_term(t("x * y + z")) == "x * y + z"
        assert print_term(t("S(x + 1)")) == "S(x + 1)"


class TestBoxWellFormedness:
    def test_domain_must_cover_free_variables(self):
        with pytest.raises(SyntaxBuildError):
            Box(Lt(Var("x"), Var("y")), ((("x"), Var("x")),))

    def test_domain_must_not_exceed_free_variables(self):
        with pytest.raises(SyntaxBuildError):
            Box(Falsum(), (("x", Var("x")),))

    def test_duplicate_domain_entries_rejected(self):
        with pytest.raises(SyntaxBuildError):
            Box(Lt(Var("x"), numeral(1)), (("x", Zero()), ("x", Var("y"))))

    def test_free_vars_are_the_range_variables(self):
        b = f("Prov[ x < y ; x := u + 1, y := 0 ]")
        assert free_vars(b) == {"u"}

    def test_apply_box_subst(self):
        b = f("Prov[ x < y ; x := u + 1, y := 0 ]")
        assert apply_box_subst(b) == f("u + 1 < 0")

    def test_identity_box(self):
        g = f("P & x < y")
        assert identity_box(g) == f("Prov[ P & x < y ; x := x, y := y ]")


class TestAlphaEquivalence:
    def test_quantifier_renaming(self):
        assert alpha_eq(f("all x. x < y"), f("all z. z < y"))
        assert not alpha_eq(f("all x. x < y"), f("all z. z < x"))

    def test_box_domain_is_a_binder(self):
        assert alpha_eq(f("Prov[ ~Q(a) ; a := x ]"), f("Prov[ ~Q(b) ; b := x ]"))
        assert not alpha_eq(f("Prov[ ~Q(a) ; a := x ]"), f("Prov[ ~Q(b) ; b := y ]"))

    def test_box_template_shape_matters(self):
        one_var = f("Prov[ x < x + 1 ; x := x ]")
        two_var = f("Prov[ a < b ; a := x, b := x + 1 ]")
        assert not alpha_eq(one_var, two_var)

    def test_nested_binders(self):
        assert alpha_eq(
            f("all x. exists y. x < y"),
            f("all u. exists x. u < x"),
        )

    def test_canonical_is_hashable_and_stable(self):
        g = f("all x. (k < x) -> Prov[ ~Q(x) ; x := x ]")
        assert canonical(g) == canonical(f("all z. (k < z) -> Prov[ ~Q(u) ; u := z ]"))
        hash(canonical(g))


class TestSubstitution:
    def test_capture_avoidance_renames_binder(self):
        out = substitute(f("all y. x < y"), "x", Var("y"))
        assert alpha_eq(out, f("all u. y < u"))
        assert out != f("all y. y < y")

    def test_not_free_is_identity(self):
        g = f("all x. x < k")
        assert substitute(g, "x", numeral(3)) == g

    def test_parallel_swap(self):
        out = substitute_many(f("x < y"), {"x": Var("y"), "y": Var("x")})
        assert out == f("y < x")

    def test_box_ranges_only(self):
        g = f("Prov[ x < 1 ; x := x ]")
        out = substitute(g, "x", numeral(4))
        assert out == f("Prov[ x < 1 ; x := 4 ]")

    def test_shadowed_binder_untouched(self):
        g = f("(all x. x < k) & x < k")
        out = substitute(g, "x", numeral(2))
        assert out == f("(all x. x < k) & 2 < k")

    def test_fresh_name_avoids(self):
        assert fresh_name("x", {"x", "x0"}) == "x1"
        assert fresh_name("y", set()) == "y0"


class TestSigmaOne:
    def test_atoms_and_boxes_are_existential_fragment(self):
        assert sigma1(f("x < y"))
        assert sigma1(f("x = y"))
        assert sigma1(f("Prov[ bot ; ]"))

    def test_closure(self):
        assert sigma1(f("x < y & exists z. z = x"))
        assert sigma1(f("all u. (u < k) -> u < S(k)"))

    def test_unbounded_universal_is_not(self):
        assert not sigma1(f("all u. u < k"))
        assert not sigma1(f("P -> Q(x)"))


class TestPrinting:
    def test_golden_strings(self):
        cases = [
            "k < k + 1",
            "(Con -> YG(k)) & (YG(k) -> Con)",
            "all x. k < x -> Prov[~YJ(x) ; x := x]",
            "~Prov[bot ;]",
            "exists x. k < x & ~Prov[~YJ(z) ; z := x]",
        ]
        for text in cases:
            assert print_formula(f(text)) == text

    def test_round_trip_samples(self):
        for g in sample_formulas(300, seed=20250819):
            assert parse_formula(print_formula(g)) == g

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32))
    def test_round_trip_property(self, seed):
        rng = random.Random(seed)
        g = rand_formula(rng, rng.randrange(1, 5))
        assert parse_formula(print_formula(g)) == g


class TestParser:
    def test_implication_is_right_associative(self):
        assert f("P -> Q(x) -> R(x, y)") == f("P -> (Q(x) -> R(x, y))")

    def test_quantifier_body_extends_right(self):
        assert f("all x. x < y -> P") == ForAll("x", Imp(Lt(Var("x"), Var("y")), PredApp("P")))

    def test_omitted_box_subst_completed(self):
        assert f("Prov[ x < y ]") == f("Prov[ x < y ; x := x, y := y ]")

    def test_greater_than_flips(self):
        assert f("x > y") == Lt(Var("y"), Var("x"))

    def test_error_position(self):
        with pytest.raises(ParseError) as e:
            parse_formula("x < ")
        assert "column" in str(e.value)

    def test_trailing_garbage_rejected(self):
        with pytest.raises(ParseError):
            parse_formula("x < y y")

    def test_bad_box_subst_rejected(self):
        with pytest.raises((ParseError, SyntaxBuildError)):
            parse_formula("Prov[ x < y ; x := 0 ]")


class TestSignature:
    def test_base_declarations(self):
        sig = base_signature()
        assert sig.arity("Con") == 0
        assert alpha_eq(sig.instantiate("Con", ()), Not(Box(Falsum())))

    def test_define_and_instantiate(self):
        sig = base_signature()
        sig.define("D", ("k",), Lt(Var("k"), numeral(1)))
        assert sig.instantiate("D", (numeral(0),)) == f("0 < 1")

    def test_redefinition_must_be_alpha_equal(self):
        sig = base_signature()
        sig.define("D", ("k",), f("all x. k < x"))
        sig.define("D", ("k",), f("all z. k < z"))
        with pytest.raises(SyntaxBuildError):
            sig.define("D", ("k",), f("all x. x < k"))

    def test_iff_shape(self):
        assert iff(f("P"), f("Q(x)")) == And(Imp(f("P"), f("Q(x)")), Imp(f("Q(x)"), f("P")))
