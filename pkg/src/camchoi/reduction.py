"""Change-of-variables engine: invariants of generators, pullback of equations
under a similarity ansatz, printed-form comparison, first integrals, and
closed-form solution checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .expr import (
    DEPENDENT,
    EXP_ONE,
    Exponent,
    Expr,
    ExprError,
    Func,
    Jet,
    REDUCED,
    Sym,
    ONE,
    ZERO,
)
from .jet import Context, Pde, expand_pde, total_derivative
from .symmetry import VectorField


class ReductionError(ExprError):
    pass


class UnsupportedField(ReductionError):
    """Raised by invariants_for when the generator shape is out of scope."""


@dataclass
class Ansatz:
    """New independent variables as expressions of the old, plus a dependent rule.

    ``dependent_rule`` expresses the old dependent variable through a new
    function symbol applied to the new variables.  It may be None for
    catalogued substitutions that fall outside the representable fragment;
    such an ansatz cannot be pulled back.
    """

    src: Context
    new_independent: List[Tuple[Sym, Expr]]
    new_dep: Optional[Sym]
    func: Optional[Func]
    dependent_rule: Optional[Expr]
    inverse_hints: List[Tuple[Sym, Expr]] = field(default_factory=list)
    name: str = ""
    note: str = ""

    def new_context(self) -> Context:
        if self.new_dep is None:
            raise ReductionError("ansatz %s has no dependent rule" % self.name)
        return Context(
            tuple(v for v, _ in self.new_independent),
            self.new_dep,
            self.src.parameters,
        )

    def invariant_exprs(self) -> List[Expr]:
        out = [e for _, e in self.new_independent]
        if self.dependent_rule is not None:
            out.append(self.dependent_expression())
        return out

    def dependent_expression(self) -> Expr:
        """The dependent invariant F solved from u = rule(F), when rule is affine in F."""
        if self.dependent_rule is None:
            raise ReductionError("ansatz %s has no dependent rule" % self.name)
        f_atom = Expr.atom(self.func)
        parts = self.dependent_rule.collect([self.func])
        coeff = parts.get(f_atom, ZERO)
        rest = parts.get(ONE, ZERO)
        if coeff.is_zero:
            raise ReductionError("dependent rule does not involve the new function")
        return (Expr.atom(self.src.dependent) - rest) / coeff


def jacobian_rank_ok(a: Ansatz) -> bool:
    """Full row rank of d(new)/d(old), certified by a nonzero maximal minor."""
    rows = []
    for _, e in a.new_independent:
        rows.append([e.diff(v) for v in a.src.independents])
    m = len(rows)
    k = len(a.src.independents)
    if m > k:
        return False
    import itertools

    for cols in itertools.combinations(range(k), m):
        det = _det([[rows[i][j] for j in cols] for i in range(m)])
        if not det.is_zero:
            return True
    return False


def _det(mat: List[List[Expr]]) -> Expr:
    if len(mat) == 1:
        return mat[0][0]
    out = ZERO
    sign = 1
    for j in range(len(mat)):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        out = out + Expr.rational(sign) * mat[0][j] * _det(minor)
        sign = -sign
    return out


@dataclass
class ReducedEquation:
    ctx: Context
    lhs: Expr
    name: str = ""

    def normalized(self) -> Expr:
        return self.lhs.content_normalized()

    def to_pde(self) -> Pde:
        return expand_pde(self.ctx, self.lhs, name=self.name)


@dataclass
class FirstIntegralCandidate:
    ctx: Context
    lhs: Expr
    constants: Tuple[Sym, ...] = ()
    name: str = ""


# -- invariants of translation and scaling generators -------------------------


def invariants_for(
    X: VectorField,
    names: Optional[List[str]] = None,
    dep_name: str = "F",
) -> Ansatz:
    """Zeroth-order invariants for diagonal affine generators.

    Supports pure translations and scalings with constant shifts.  Raises
    UnsupportedField for anything else (projective coefficients, mixed
    translation and scaling across variables, exponents outside the
    half-integer lattice), in which case the ansatz must be supplied by hand.
    """
    ctx = X.ctx
    lin: Dict[Sym, Tuple[Expr, Expr]] = {}
    for v in ctx.independents:
        a, b = _affine_parts(X.coefficient(v), v, ctx)
        lin[v] = (a, b)
    e_coeff, f_coeff = _affine_parts(X.eta, ctx.dependent, ctx)

    moving = [v for v in ctx.independents if not (lin[v][0].is_zero and lin[v][1].is_zero)]
    if not moving:
        raise UnsupportedField("unsupported field shape: zero base motion")
    scaling = [v for v in moving if not lin[v][0].is_zero]
    if scaling and len(scaling) != len(moving):
        raise UnsupportedField("unsupported field shape: mixed translation and scaling")

    if names is None:
        names = ["w%d" % i for i in range(1, len(ctx.independents))]
    new_vars: List[Tuple[Sym, Expr]] = []
    hints: List[Tuple[Sym, Expr]] = []
    name_iter = iter(names)

    if not scaling:
        pivot = moving[0]
        bp = lin[pivot][1]
        if not bp.is_monomial():
            raise UnsupportedField("unsupported field shape: non-monomial translation speed")
        for v in ctx.independents:
            if v == pivot:
                continue
            if v not in moving:
                new_vars.append((v, Expr.atom(v)))
            else:
                w = Sym(next(name_iter), REDUCED)
                expr = Expr.atom(v) - (lin[v][1] / bp) * Expr.atom(pivot)
                new_vars.append((w, expr))
                hints.append((v, Expr.atom(w) + (lin[v][1] / bp) * Expr.atom(pivot)))
        if not e_coeff.is_zero:
            raise UnsupportedField("unsupported field shape: dependent scaling under translation")
        if f_coeff.is_zero:
            rule_shift = ZERO
        else:
            rule_shift = (f_coeff / bp) * Expr.atom(pivot)
    else:
        pivot = scaling[0]
        ap = lin[pivot][0]
        if not ap.is_rational():
            raise UnsupportedField("unsupported field shape: non-rational scaling weight")
        apq = ap.as_rational()
        shifted: Dict[Sym, Expr] = {}
        for v in moving:
            a, b = lin[v]
            if not a.is_rational():
                raise UnsupportedField("unsupported field shape: non-rational scaling weight")
            shifted[v] = Expr.atom(v) + b / a
        for v in ctx.independents:
            if v == pivot:
                continue
            if v not in moving:
                new_vars.append((v, Expr.atom(v)))
                continue
            r = lin[v][0].as_rational() / apq
            ex = Fraction(-r)
            if (2 * ex).denominator != 1:
                raise UnsupportedField(
                    "unsupported field shape: exponent %s outside the half-integer lattice" % ex
                )
            w = Sym(next(name_iter), REDUCED)
            expo = Exponent(int(2 * ex), 0)
            new_vars.append((w, shifted[v] * shifted[pivot].pow_exponent(expo)))
            if lin[pivot][1].is_zero:
                back = Expr.atom(w) * Expr.atom(pivot).pow_exponent(expo.neg()) - lin[v][1] / lin[v][0]
                hints.append((v, back))
        if e_coeff.is_zero and not f_coeff.is_zero:
            raise UnsupportedField("unsupported field shape: dependent translation under scaling")
        if e_coeff.is_zero:
            rule_shift = ZERO
            dep_scale = None
        else:
            if not e_coeff.is_rational():
                raise UnsupportedField("unsupported field shape: non-rational dependent weight")
            r = e_coeff.as_rational() / apq
            if (2 * Fraction(r)).denominator != 1:
                raise UnsupportedField(
                    "unsupported field shape: exponent %s outside the half-integer lattice" % r
                )
            dep_scale = Exponent(int(2 * Fraction(r)), 0)

    dep = Sym(dep_name, DEPENDENT)
    fn = Func(dep_name, tuple(v for v, _ in new_vars))
    f_atom = Expr.atom(fn)
    if not scaling:
        rule = f_atom + rule_shift
    else:
        if e_coeff.is_zero:
            rule = f_atom
        else:
            shift = -(f_coeff / e_coeff)
            rule = shift + f_atom * shifted[pivot].pow_exponent(dep_scale)
    return Ansatz(ctx, new_vars, dep, fn, rule, hints, name="invariants(%s)" % (X.name or "X"))


def _affine_parts(e: Expr, v: Sym, ctx: Context) -> Tuple[Expr, Expr]:
    """Split e = a*v + b; reject any other dependence on context variables."""
    parts = e.collect([v])
    a = parts.get(Expr.atom(v), ZERO)
    b = parts.get(ONE, ZERO)
    for key in parts:
        if key != Expr.atom(v) and key != ONE:
            raise UnsupportedField("unsupported field shape: %s in a coefficient" % key)
    banned = set(ctx.independents) | {ctx.dependent}
    for piece in (a, b):
        for atom in piece.atoms():
            if isinstance(atom, Sym) and atom in banned:
                raise UnsupportedField("unsupported field shape: off-diagonal coefficient %s" % e)
            if isinstance(atom, (Jet, Func)):
                raise UnsupportedField("unsupported field shape: non-affine coefficient %s" % e)
    return a, b


# -- pullback ------------------------------------------------------------------


def _chain_derivative(a: Ansatz, e: Expr, v: Sym) -> Expr:
    """d/d(old v) of an expression written in old variables and new functions."""
    out = e.diff(v)
    for w, wexpr in a.new_independent:
        if w == v:
            continue  # pass-through variable, already covered by the direct term
        dw = wexpr.diff(v)
        if dw.is_zero:
            continue
        d = e.diff(w)
        if not d.is_zero:
            out = out + d * dw
    return out


def pullback(pde: Pde, a: Ansatz) -> ReducedEquation:
    """Rewrite pde.lhs under the ansatz and cancel the overall monomial factor."""
    if a.dependent_rule is None:
        raise ReductionError("ansatz %s has no dependent rule; cannot pull back" % a.name)
    if not jacobian_rank_ok(a):
        raise ReductionError("ansatz %s has a rank-deficient Jacobian" % a.name)
    ctx = pde.ctx
    express: Dict[tuple, Expr] = {tuple(0 for _ in ctx.independents): a.dependent_rule}

    def get(counts: tuple) -> Expr:
        if counts in express:
            return express[counts]
        nz = [i for i, c in enumerate(counts) if c > 0]
        i = nz[-1]
        prev = tuple(c - (1 if k == i else 0) for k, c in enumerate(counts))
        val = _chain_derivative(a, get(prev), ctx.independents[i])
        express[counts] = val
        return val

    out = pde.lhs
    jets = [at for at in set(pde.lhs.atoms()) if isinstance(at, Jet) and at.dep == ctx.dependent]
    jets.sort(key=lambda at: at.sort_key())
    for at in jets:
        out = out.subst(at, get(at.counts))
    if out.contains(ctx.dependent):
        out = out.subst(ctx.dependent, a.dependent_rule)

    for v, hint in a.inverse_hints:
        out = out.subst(v, hint)

    new_ctx = a.new_context()
    out = _funcs_to_jets(out, a, new_ctx)
    out = _cancel_common_monomial(out)

    passthrough = {v for v, _ in a.new_independent}
    for atom in out.atoms():
        if isinstance(atom, Sym) and atom in set(ctx.independents) and atom not in passthrough:
            raise ReductionError("residual old variable %s in the reduced equation" % atom.name)
        if atom == ctx.dependent and atom != new_ctx.dependent:
            raise ReductionError("residual old variable %s in the reduced equation" % atom.name)
    return ReducedEquation(new_ctx, out.content_normalized(), name="%s|%s" % (pde.name, a.name))


def _funcs_to_jets(e: Expr, a: Ansatz, new_ctx: Context) -> Expr:
    fn = a.func
    targets = [
        at
        for at in set(e.atoms())
        if isinstance(at, Func)
        and at.name == fn.name
        and len(at.args) == len(fn.args)
        and all(x == y for x, y in zip(at.args, fn.args))
    ]
    targets.sort(key=lambda at: at.sort_key())
    for at in targets:
        e = e.subst(at, new_ctx.jet_expr(at.orders))
    return e


def _cancel_common_monomial(e: Expr) -> Expr:
    if e.is_zero or len(e.terms) == 0:
        return e
    common: Dict[object, Exponent] = {}
    first = True
    for mono, _c in e.terms:
        exps = {a: x for a, x in mono}
        if first:
            common = dict(exps)
            first = False
        else:
            for atom in list(common):
                if atom in exps and exps[atom].n == common[atom].n:
                    if exps[atom].num2 < common[atom].num2:
                        common[atom] = exps[atom]
                elif common[atom].n == 0:
                    common[atom] = Exponent(min(0, common[atom].num2), 0)
                else:
                    del common[atom]
    common = {a: x for a, x in common.items() if not x.is_zero()}
    if not common:
        return e
    factor = ONE
    for atom, x in common.items():
        factor = factor * Expr.atom(atom, x)
    return e / factor


def compose_ansatz(a1: Ansatz, a2: Ansatz, name: str = "") -> Ansatz:
    """Composite change of variables for successive reductions."""
    if a1.dependent_rule is None or a2.dependent_rule is None:
        raise ReductionError("cannot compose partial ansatz records")
    mid_vars = a1.new_independent

    def to_old(e: Expr) -> Expr:
        for v, vexpr in mid_vars:
            if e.contains(v):
                e = e.subst(v, vexpr)
        return e

    new_independent = [(w, to_old(wexpr)) for w, wexpr in a2.new_independent]
    rule = a1.dependent_rule.subst_func(a1.func.name, a1.func.args, a2.dependent_rule)
    rule = to_old(rule)
    return Ansatz(
        a1.src,
        new_independent,
        a2.new_dep,
        a2.func,
        rule,
        [],
        name=name or "%s*%s" % (a1.name, a2.name),
    )


# -- comparison against printed forms -----------------------------------------


@dataclass
class CompareReport:
    verdict: str  # exact | constant-multiple | under-substitution | mismatch
    residual: Expr
    substitution: Optional[List[Tuple[Sym, Expr]]] = None

    @property
    def matched(self) -> bool:
        return self.verdict != "mismatch"


def compare_reduced(
    derived: ReducedEquation,
    printed: ReducedEquation,
    substitutions: Optional[List[Tuple[Sym, Expr]]] = None,
) -> CompareReport:
    if derived.lhs == printed.lhs:
        return CompareReport("exact", ZERO)
    d = derived.normalized()
    p = printed.normalized()
    if d == p:
        return CompareReport("constant-multiple", ZERO)
    if substitutions:
        ps = printed.lhs
        for s, val in substitutions:
            ps = ps.subst(s, val)
        if d == ps.content_normalized():
            return CompareReport("under-substitution", ZERO, substitutions)
        residual = (d - ps.content_normalized())
    else:
        residual = d - p
    return CompareReport("mismatch", residual.content_normalized(), substitutions)


# -- first integrals -----------------------------------------------------------


def _single_var(ctx: Context) -> Sym:
    if len(ctx.independents) != 1:
        raise ReductionError("first-integral checks need a single reduced variable")
    return ctx.independents[0]


def _top_jet_coeff(e: Expr, ctx: Context, order: int) -> Expr:
    jet = ctx.jet((order,))
    parts = e.collect([jet])
    for key, val in parts.items():
        if key == ONE:
            continue
        mono, _ = key.leading()
        (atom, ex), = mono
        if ex != EXP_ONE:
            raise ReductionError("nonlinear top derivative in %s" % e)
        return val
    return ZERO


def _solve_for_top(fi: FirstIntegralCandidate) -> Optional[Tuple[Jet, Expr]]:
    ctx = fi.ctx
    order = fi.lhs.max_jet_order()
    if order == 0:
        return None
    jet = ctx.jet((order,))
    try:
        coeff = _top_jet_coeff(fi.lhs, ctx, order)
    except ReductionError:
        return None  # nonlinear in its own top derivative; skip elimination
    if coeff.is_zero or not coeff.is_monomial():
        return None
    rest = fi.lhs - coeff * Expr.atom(jet)
    return jet, (-rest) / coeff


def check_first_integral(eq, fi: FirstIntegralCandidate) -> Expr:
    """Residual certifying fi as a first integral of eq (zero when it is one).

    The candidate is differentiated down to the order of the equation, the
    top derivative is cancelled by cross multiplication with the equation's
    top coefficient, and the remainder is reduced modulo fi itself.
    """
    ctx = fi.ctx
    var = _single_var(ctx)
    eq_lhs = eq.lhs
    eq_order = eq_lhs.max_jet_order()
    fi_order = fi.lhs.max_jet_order()
    k = eq_order - fi_order
    if k not in (1, 2):
        raise ReductionError("order gap %d outside {1, 2}" % k)
    r = fi.lhs
    for _ in range(k):
        r = total_derivative(r, var, ctx)
    c_eq = _top_jet_coeff(eq_lhs, ctx, eq_order)
    c_r = _top_jet_coeff(r, ctx, eq_order)
    raw = c_eq * r - c_r * eq_lhs
    solved = _solve_for_top(fi)
    if solved is not None:
        jet, rhs = solved
        guard = 0
        while raw.contains(jet):
            raw = raw.subst(jet, rhs)
            guard += 1
            if guard > 10:
                raise ReductionError("first-integral reduction did not terminate")
    return raw.content_normalized()


# -- closed-form verification ---------------------------------------------------


@dataclass
class SolutionRule:
    """Defining relation for an opaque helper: D^orders f = expr."""

    func: Func  # carries the base derivative orders
    expr: Expr


def verify_closed_form(
    target,
    sol: Expr,
    rules: Tuple[SolutionRule, ...] = (),
    bindings: Optional[List[Tuple[Sym, Expr]]] = None,
) -> Tuple[Expr, Dict[Expr, Expr]]:
    """Substitute a candidate solution into an equation.

    ``bindings`` declare composite inner variables (new symbol -> expression
    in the context variables) so chain rules apply through opaque functions
    of a similarity variable.  ``rules`` are defining relations applied
    repeatedly until no matching derivative atoms remain.  Returns the
    residual and, when nonzero, its coefficients collected over elementary
    function monomials (the constraint equations on the free constants).
    """
    ctx = target.ctx
    lhs = target.lhs
    bindings = bindings or []

    def dd(e: Expr, v: Sym) -> Expr:
        out = e.diff(v)
        for w, wexpr in bindings:
            dw = wexpr.diff(v)
            if dw.is_zero:
                continue
            d = e.diff(w)
            if not d.is_zero:
                out = out + d * dw
        return out

    express: Dict[tuple, Expr] = {tuple(0 for _ in ctx.independents): sol}

    def get(counts: tuple) -> Expr:
        if counts in express:
            return express[counts]
        nz = [i for i, c in enumerate(counts) if c > 0]
        i = nz[-1]
        prev = tuple(c - (1 if kk == i else 0) for kk, c in enumerate(counts))
        val = dd(get(prev), ctx.independents[i])
        express[counts] = val
        return val

    out = lhs
    jets = [a for a in set(lhs.atoms()) if isinstance(a, Jet) and a.dep == ctx.dependent]
    jets.sort(key=lambda a: a.sort_key())
    for a in jets:
        out = out.subst(a, get(a.counts))
    if out.contains(ctx.dependent):
        out = out.subst(ctx.dependent, sol)

    for _ in range(12):
        before = out
        for rule in rules:
            out = out.subst_func(rule.func.name, rule.func.args, rule.expr, rule.func.orders)
        if out == before:
            break
    else:
        raise ReductionError("solution rules did not stabilize")

    residual = out
    constraints: Dict[Expr, Expr] = {}
    if not residual.is_zero:
        apps = {a for a in residual.atoms() if a.__class__.__name__ == "App"}
        if apps:
            constraints = residual.collect(apps)
        else:
            constraints = {ONE: residual}
    return residual, constraints
