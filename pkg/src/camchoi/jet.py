"""Jet coordinates, the total-derivative operator, and PDE solution manifolds."""

from __future__ import annotations

from dataclasses import dataclass
from .expr import (
    EXP_ONE,
    Expr,
    ExprError,
    Func,
    Jet,
    Sym,
    ZERO,
    as_expr,
)

MAX_JET_ORDER = 4  # third-order equations plus one total-derivative margin


class JetError(ExprError):
    pass


@dataclass(frozen=True)
class Context:
    """One dependent variable over an ordered tuple of base variables."""

    independents: tuple
    dependent: Sym
    parameters: tuple = ()

    def __post_init__(self):
        names = [v.name for v in self.independents] + [self.dependent.name]
        if len(set(names)) != len(names):
            raise JetError("variable names must be unique within a context")

    def jet(self, counts) -> object:
        counts = tuple(counts)
        if len(counts) != len(self.independents):
            raise JetError("jet index does not match the context")
        if sum(counts) == 0:
            return self.dependent
        if sum(counts) > MAX_JET_ORDER:
            raise JetError("jet order beyond the internal cap of %d" % MAX_JET_ORDER)
        return Jet(self.dependent, self.independents, counts)

    def jet_expr(self, counts) -> Expr:
        a = self.jet(counts)
        return Expr.atom(a) if not isinstance(a, Expr) else a

    def var_index(self, v: Sym) -> int:
        for i, w in enumerate(self.independents):
            if w == v:
                return i
        raise JetError("%s is not an independent variable of the context" % v.name)

    def unit(self, v: Sym) -> tuple:
        i = self.var_index(v)
        return tuple(1 if j == i else 0 for j in range(len(self.independents)))

    def jets_present(self, e: Expr):
        """Jet atoms of this context occurring in e, plus the dependent if used."""
        seen = []
        found = set()
        dep_used = False
        for a in e.atoms():
            if isinstance(a, Jet) and a.dep == self.dependent and a not in found:
                found.add(a)
                seen.append(a)
            elif isinstance(a, Sym) and a == self.dependent:
                dep_used = True
            elif isinstance(a, Func) and any(x == self.dependent for x in a.args):
                dep_used = True
        return seen, dep_used


def total_derivative(e: Expr, v: Sym, ctx: Context) -> Expr:
    """D_v e = d_v e + sum over jets u_J of u_{J+v} * d e / d u_J."""
    e = as_expr(e)
    out = e.diff(v)
    jets, dep_used = ctx.jets_present(e)
    unit = ctx.unit(v)
    if dep_used:
        d = e.diff(ctx.dependent)
        if not d.is_zero:
            out = out + ctx.jet_expr(unit) * d
    for a in jets:
        d = e.diff(a)
        if d.is_zero:
            continue
        bumped = tuple(c + u for c, u in zip(a.counts, unit))
        out = out + ctx.jet_expr(bumped) * d
    return out


@dataclass
class Pde:
    """lhs = 0 with a designated leading derivative solved as leading = leading_rhs."""

    ctx: Context
    lhs: Expr
    leading: Jet
    leading_coeff: Expr
    leading_rhs: Expr
    name: str = ""

    def with_parameter(self, p: Sym, value) -> "Pde":
        return expand_pde(self.ctx, self.lhs.subst(p, as_expr(value)), name=self.name)

    def as_reduced(self):
        from .reduction import ReducedEquation

        return ReducedEquation(self.ctx, self.lhs, name=self.name)


def expand_pde(ctx: Context, lhs: Expr, name: str = "") -> Pde:
    """Select the leading derivative of an expanded lhs and solve for it.

    The leading jet is the one of highest order, ties broken by the variable
    word under the context order, and must occur linearly with a coefficient
    that is a nonzero rational or parameter monomial.
    """
    lhs = as_expr(lhs)
    jets = [a for a in set(lhs.atoms()) if isinstance(a, Jet) and a.dep == ctx.dependent]
    if not jets:
        raise JetError("no jet variables in the equation")
    leading = max(jets, key=lambda a: (a.order, a.word()))
    parts = lhs.collect([leading])
    rest = ZERO
    coeff = None
    for keyexpr, val in parts.items():
        if keyexpr == Expr.rational(1):
            rest = val
            continue
        mono, _c = keyexpr.leading()
        (atom, e), = mono
        if e != EXP_ONE:
            raise JetError("nonlinear in leading derivative: %s appears with power %s" % (atom, e))
        coeff = val
    if coeff is None:
        raise JetError("leading derivative vanished during collection")
    if not coeff.is_monomial():
        raise JetError("nonlinear in leading derivative: coefficient %s of %s" % (coeff, leading))
    for a in coeff.atoms():
        if not (isinstance(a, Sym) and a.kind == "parameter"):
            raise JetError("leading coefficient %s is not a parameter monomial" % coeff)
    leading_rhs = (-rest) / coeff
    return Pde(ctx, lhs, leading, coeff, leading_rhs, name=name)


def on_manifold(e: Expr, pde: Pde) -> Expr:
    """Replace the leading derivative by its solved form until absent."""
    e = as_expr(e)
    guard = 0
    while e.contains(pde.leading):
        e = e.subst(pde.leading, pde.leading_rhs)
        guard += 1
        if guard > 8:
            raise JetError("manifold restriction did not terminate")
    return e
