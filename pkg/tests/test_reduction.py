from fractions import Fraction

import pytest

from camchoi.expr import (
    DEPENDENT,
    EXP_N,
    Exponent,
    Expr,
    Func,
    N_SYMBOL,
    REDUCED,
    Sym,
    ONE,
    ZERO,
)
from camchoi.jet import Context, total_derivative
from camchoi.modelfile import AnsatzBlock, IntegralBlock, PdeBlock, SolutionBlock
from camchoi.reduction import (
    Ansatz,
    FirstIntegralCandidate,
    ReducedEquation,
    ReductionError,
    UnsupportedField,
    check_first_integral,
    compare_reduced,
    compose_ansatz,
    invariants_for,
    pullback,
    verify_closed_form,
)
from camchoi.symmetry import VectorField


def pde(doc, name):
    return doc.block(PdeBlock, name).pde


def ansatz(doc, name):
    return doc.block(AnsatzBlock, name).ansatz


# -- invariants_for ----------------------------------------------------------


def test_invariants_of_x_translation(doc):
    ctx = pde(doc, "cc").ctx
    t, x, y = ctx.independents
    a = invariants_for(VectorField(ctx, {x: ONE}, ZERO, "X3p"), dep_name="V")
    names = [v.name for v, _ in a.new_independent]
    assert names == ["t", "y"]
    assert a.dependent_rule == Expr.atom(Func("V", (t, y)))


def test_invariants_of_diagonal_translation_match_catalogued_ansatz(doc, case_results):
    assert case_results["cc.18"].verdict == "pass"


def test_invariants_of_scaling_z2(doc):
    ctx = pde(doc, "cc19").ctx
    t, w = ctx.independents
    U = Expr.atom(ctx.dependent)
    h0 = Expr.atom(doc.params["h0"])
    Z2 = VectorField(ctx, {t: 2 * Expr.atom(t), w: Expr.atom(w)}, h0 + 1 - U, "Z2")
    a = invariants_for(Z2, names=["sigma"], dep_name="Y")
    blk = ansatz(doc, "z2red")
    assert [e for _v, e in a.new_independent] == [e for _v, e in blk.new_independent]
    assert a.dependent_rule == blk.dependent_rule
    for inv in a.invariant_exprs():
        assert Z2.apply_to(inv).is_zero


def test_invariants_unsupported_projective(doc):
    ctx = pde(doc, "cc19").ctx
    t, w = ctx.independents
    U = Expr.atom(ctx.dependent)
    h0 = Expr.atom(doc.params["h0"])
    Z3 = VectorField(
        ctx,
        {t: Expr.atom(t) ** 2, w: Expr.atom(t) * Expr.atom(w)},
        (h0 + 1 - U) * Expr.atom(t) + Expr.atom(w),
        "Z3",
    )
    with pytest.raises(UnsupportedField, match="unsupported field shape"):
        invariants_for(Z3)


# -- pullback -----------------------------------------------------------------


def test_pullback_cc_matches_hand_oracle(doc):
    red = pullback(pde(doc, "cc"), ansatz(doc, "cc18"))
    rctx = red.ctx
    rj = rctx.jet_expr
    U = Expr.atom(rctx.dependent)
    alpha = Expr.atom(doc.params["alpha"])
    hand = rj((0, 3)) + rj((1, 1)) + rj((0, 1)) ** 2 + (U - 1 - alpha) * rj((0, 2))
    assert red.lhs == hand.content_normalized()


def test_pullback_gcc_matches_hand_oracle(doc):
    red = pullback(pde(doc, "gcc"), ansatz(doc, "gccw"))
    rctx = red.ctx
    rj = rctx.jet_expr
    U = Expr.atom(rctx.dependent)
    alpha = Expr.atom(doc.params["alpha"])
    beta = Expr.atom(doc.params["beta"])
    n = Expr.atom(N_SYMBOL)
    hand = (
        beta * rj((0, 3))
        + rj((1, 1))
        - n * U.pow_exponent(Exponent(-2, 1)) * rj((0, 1)) ** 2
        + (1 + alpha - U.pow_exponent(EXP_N)) * rj((0, 2))
    )
    assert red.lhs == hand.content_normalized()


def test_pullback_identity_ansatz(doc):
    cc = pde(doc, "cc")
    ctx = cc.ctx
    t, x, y = ctx.independents
    fn = Func("u", (t, x, y))
    ida = Ansatz(
        ctx,
        [(t, Expr.atom(t)), (x, Expr.atom(x)), (y, Expr.atom(y))],
        ctx.dependent,
        fn,
        Expr.atom(fn),
        name="identity",
    )
    assert pullback(cc, ida).lhs == cc.lhs.content_normalized()


def test_pullback_scaling_ansatz_z2(doc):
    red = pullback(pde(doc, "cc19"), ansatz(doc, "z2red"))
    sctx = red.ctx
    sj = sctx.jet_expr
    Y = Expr.atom(sctx.dependent)
    sigma = Expr.atom(sctx.independents[0])
    hand = 2 * sj((3,)) + 2 * sj((1,)) ** 2 + 2 * Y * sj((2,)) - sigma * sj((2,)) - 2 * sj((1,))
    assert red.lhs == hand.content_normalized()


def test_pullback_rank_deficient_rejected(doc):
    cc = pde(doc, "cc")
    ctx = cc.ctx
    t, x, y = ctx.independents
    w1 = Sym("w1", REDUCED)
    w2 = Sym("w2", REDUCED)
    fn = Func("F", (w1, w2))
    bad = Ansatz(
        ctx,
        [(w1, Expr.atom(x) + Expr.atom(y)), (w2, 2 * Expr.atom(x) + 2 * Expr.atom(y))],
        Sym("F", DEPENDENT),
        fn,
        Expr.atom(fn),
        name="bad",
    )
    with pytest.raises(ReductionError, match="Jacobian"):
        pullback(cc, bad)


def test_pullback_residual_old_variable(doc):
    cc19 = pde(doc, "cc19")
    ctx = cc19.ctx
    t, w = ctx.independents
    sg = Sym("sigma", REDUCED)
    fn = Func("Y", (sg,))
    # missing inverse hint: w cannot be eliminated
    a = Ansatz(
        ctx,
        [(sg, Expr.atom(w) * Expr.atom(t).pow_exponent(Exponent(-1, 0)))],
        Sym("Y", DEPENDENT),
        fn,
        1 + Expr.atom(doc.params["h0"]) + Expr.atom(t).pow_exponent(Exponent(-1, 0)) * Expr.atom(fn),
        name="nohints",
    )
    with pytest.raises(ReductionError, match="residual old variable"):
        pullback(cc19, a)


def test_compare_reduced_verdicts(doc):
    printed = doc.equation_of(doc.find("cc19"))
    assert compare_reduced(printed, printed).verdict == "exact"
    scaled = ReducedEquation(printed.ctx, 3 * printed.lhs, "scaled")
    assert compare_reduced(scaled, printed).verdict == "constant-multiple"
    red = pullback(pde(doc, "cc"), ansatz(doc, "cc18"))
    rep = compare_reduced(red, printed, substitutions=[(doc.params["h0"], Expr.atom(doc.params["alpha"]))])
    assert rep.verdict == "under-substitution"
    rep2 = compare_reduced(red, printed)
    assert rep2.verdict == "mismatch"
    assert not rep2.residual.is_zero


def test_chain_and_composition(doc, case_results):
    assert case_results["chain"].verdict == "pass"


def test_two_step_equals_composed_explicitly(doc):
    cc = pde(doc, "cc")
    a1 = ansatz(doc, "cc18")
    mid = pullback(cc, a1).to_pde()
    alpha = Expr.atom(doc.params["alpha"])
    s = Sym("s", REDUCED)
    fY = Func("Y", (s,))
    t, w = mid.ctx.independents
    a2 = Ansatz(mid.ctx, [(s, Expr.atom(w) - Expr.atom(t))], Sym("Y", DEPENDENT), fY,
                Expr.atom(fY) + 1 + alpha, name="travel")
    assert pullback(mid, a2).lhs == pullback(cc, compose_ansatz(a1, a2)).lhs


# -- first integrals -----------------------------------------------------------


def test_first_integral_synthetic_pair(doc):
    w = Sym("w", REDUCED)
    Y = Sym("Y", DEPENDENT)
    ctx = Context((w,), Y, ())
    fi_lhs = ctx.jet_expr((1,)) + Expr.rational(Fraction(1, 2)) * Expr.atom(Y) ** 2
    fi = FirstIntegralCandidate(ctx, fi_lhs, (), "syn")
    eq = ReducedEquation(ctx, total_derivative(fi_lhs, w, ctx), "syn-eq")
    assert check_first_integral(eq, fi).is_zero


def test_first_integral_cc26_golden(doc):
    eq = doc.equation_of(doc.find("cc25"))
    fi = doc.block(IntegralBlock, "cc26").candidate
    r = check_first_integral(eq, fi)
    assert str(r) == "Y^2*Y[w] + Y0*Y"


def test_first_integral_eq35_golden(doc):
    eq = doc.equation_of(doc.find("eq34"))
    fi = doc.block(IntegralBlock, "eq35").candidate
    r = check_first_integral(eq, fi)
    # (n+1)(A + alpha + 4) Y_sigma_sigma, expanded
    ctx = fi.ctx
    A = Expr.atom(doc.params["A"])
    alpha = Expr.atom(doc.params["alpha"])
    n = Expr.atom(N_SYMBOL)
    expected = ((n + 1) * (A + alpha + 4) * ctx.jet_expr((2,))).content_normalized()
    assert r == expected


def test_first_integral_eq38_nonzero(doc, case_results):
    r = case_results["eq.38"]
    assert r.verdict == "mismatch-recorded"
    assert r.detail["eq38"] != "0"
    assert r.detail["eq38alt"] != "0"
    assert r.detail["eq38"] != r.detail["eq38alt"]


def test_first_integral_order_gap_validation(doc):
    eq = doc.equation_of(doc.find("cc25"))
    fi = doc.block(IntegralBlock, "cc26").candidate
    bad = FirstIntegralCandidate(fi.ctx, fi.lhs + fi.ctx.jet_expr((3,)), (), "bad")
    with pytest.raises(ReductionError, match="order gap"):
        check_first_integral(eq, bad)


# -- closed forms ----------------------------------------------------------------


def test_verify_cc24_exact(doc, case_results):
    assert case_results["cc.24"].verdict == "pass"


def test_verify_constant_solution(doc):
    cc = pde(doc, "cc")
    res, _ = verify_closed_form(cc.as_reduced(), Expr.atom(doc.params["Y0"]))
    assert res.is_zero


def test_tanh_amplitude_constraint(doc):
    blk = doc.block(SolutionBlock, "cc27")
    target = doc.equation_of(doc.find(blk.on))
    res, cons = verify_closed_form(target, blk.sol)
    assert not res.is_zero
    a_sym = doc.params["A"]
    c_sym = doc.params["c"]
    # every collected constraint vanishes exactly at A = 1/c
    for coeff in cons.values():
        assert coeff.subst(a_sym, ONE / Expr.atom(c_sym)).is_zero
    res2, _ = verify_closed_form(target, blk.sol.subst(a_sym, ONE / Expr.atom(c_sym)))
    assert res2.is_zero


def test_cc32_certifies_with_riccati_rule(doc, case_results):
    assert case_results["cc.33"].verdict == "pass"
