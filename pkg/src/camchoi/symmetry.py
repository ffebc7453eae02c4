"""Vector fields, prolongation, symmetry residuals, determining equations,
commutators, and Lie-algebra closure analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .expr import (
    Expr,
    ExprError,
    Func,
    Jet,
    PARAMETER,
    Sym,
    ZERO,
    ONE,
    as_expr,
)
from .jet import Context, Pde, on_manifold, total_derivative


class SymmetryError(ExprError):
    pass


@dataclass
class VectorField:
    """Infinitesimal generator xi^i d_i + eta d_u on a base context."""

    ctx: Context
    xi: Dict[Sym, Expr]
    eta: Expr
    name: str = ""

    def __post_init__(self):
        self.eta = as_expr(self.eta)
        clean = {}
        for v in self.ctx.independents:
            e = as_expr(self.xi.get(v, ZERO))
            if not e.is_zero:
                clean[v] = e
        self.xi = clean
        for e in list(self.xi.values()) + [self.eta]:
            if any(isinstance(a, Jet) for a in e.atoms()):
                raise SymmetryError("point-symmetry coefficients must be jet free")

    def coefficient(self, v: Sym) -> Expr:
        return self.xi.get(v, ZERO)

    def components(self) -> List[Tuple[object, Expr]]:
        out = [(v, self.coefficient(v)) for v in self.ctx.independents]
        out.append((self.ctx.dependent, self.eta))
        return out

    def apply_to(self, f: Expr) -> Expr:
        """Act as a first-order operator on a base-space function."""
        f = as_expr(f)
        out = ZERO
        for v, c in self.xi.items():
            out = out + c * f.diff(v)
        out = out + self.eta * f.diff(self.ctx.dependent)
        return out

    def is_zero_field(self) -> bool:
        return self.eta.is_zero and all(c.is_zero for c in self.xi.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return (
            self.ctx.independents == other.ctx.independents
            and self.ctx.dependent == other.ctx.dependent
            and self.eta == other.eta
            and all(self.coefficient(v) == other.coefficient(v) for v in self.ctx.independents)
        )

    def __str__(self) -> str:
        parts = []
        for v, c in self.components():
            if not c.is_zero:
                parts.append("(%s) d_%s" % (c, v.name))
        return " + ".join(parts) if parts else "0"


def field_lincomb(pairs, ctx: Context, name: str = "") -> VectorField:
    """Rational or expression combination sum(c * X) of fields."""
    xi: Dict[Sym, Expr] = {}
    eta = ZERO
    for c, X in pairs:
        c = as_expr(c)
        for v, e in X.xi.items():
            xi[v] = xi.get(v, ZERO) + c * e
        eta = eta + c * X.eta
    return VectorField(ctx, xi, eta, name=name)


@dataclass
class ProlongedField:
    base: VectorField
    order: int
    eta_ext: Dict[tuple, Expr]


def _indices_up_to(nvars: int, order: int):
    for total in range(1, order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), total):
            counts = [0] * nvars
            for i in combo:
                counts[i] += 1
            yield tuple(counts)


def prolong(X: VectorField, order: int, direction: str = "last") -> ProlongedField:
    """Extend a point generator to jet space through the usual recursion.

    eta^[J+i] = D_i eta^[J] - sum_j u_{J+j} D_i xi^j.  The result does not
    depend on the decomposition of J; ``direction`` picks which variable is
    peeled off first and exists so tests can exercise that independence.
    """
    if order > 3:
        raise SymmetryError("prolongation beyond order 3 is not needed")
    ctx = X.ctx
    nvars = len(ctx.independents)
    ext: Dict[tuple, Expr] = {tuple(0 for _ in range(nvars)): X.eta}
    dxi: Dict[Tuple[Sym, Sym], Expr] = {}
    for i, vi in enumerate(ctx.independents):
        for vj in ctx.independents:
            dxi[(vi, vj)] = total_derivative(X.coefficient(vj), vi, ctx)

    for counts in _indices_up_to(nvars, order):
        nz = [i for i, c in enumerate(counts) if c > 0]
        pick = nz[-1] if direction == "last" else nz[0]
        prev = tuple(c - (1 if i == pick else 0) for i, c in enumerate(counts))
        vi = ctx.independents[pick]
        e = total_derivative(ext[prev], vi, ctx)
        for j, vj in enumerate(ctx.independents):
            bump = tuple(c + (1 if k == j else 0) for k, c in enumerate(prev))
            e = e - ctx.jet_expr(bump) * dxi[(vi, vj)]
        ext[counts] = e
    del ext[tuple(0 for _ in range(nvars))]
    return ProlongedField(X, order, ext)


def apply_prolonged(P: ProlongedField, e: Expr) -> Expr:
    """eta d_u e + xi^i d_i e + sum_J eta^[J] d e / d u_J."""
    e = as_expr(e)
    ctx = P.base.ctx
    out = P.base.eta * e.diff(ctx.dependent)
    for v in ctx.independents:
        c = P.base.coefficient(v)
        if not c.is_zero:
            out = out + c * e.diff(v)
    for counts, coeff in P.eta_ext.items():
        target = ctx.jet(counts)
        d = e.diff(target)
        if not d.is_zero:
            out = out + coeff * d
    return out


def check_symmetry(X: VectorField, pde: Pde) -> Expr:
    """Symmetry residual on the solution manifold; zero certifies a symmetry."""
    order = max(pde.lhs.max_jet_order(), 1)
    cond = apply_prolonged(prolong(X, order), pde.lhs)
    return on_manifold(cond, pde)


@dataclass
class DeterminingSystem:
    unknowns: List[Func]
    equations: List[Expr]
    pde: Pde

    def substitute_solution(self, rules: Dict[str, Expr]) -> List[Expr]:
        """Substitute concrete coefficient expressions for the unknown functions."""
        out = []
        for eq in self.equations:
            e = eq
            for fn in self.unknowns:
                if fn.name in rules:
                    e = e.subst_func(fn.name, fn.args, rules[fn.name])
            out.append(e)
        return out


def determining_equations(pde: Pde) -> DeterminingSystem:
    """Split the symmetry condition for opaque coefficients by jet monomials."""
    ctx = pde.ctx
    args = tuple(ctx.independents) + (ctx.dependent,)
    unknowns = []
    xi: Dict[Sym, Expr] = {}
    for v in ctx.independents:
        f = Func("xi_%s" % v.name, args)
        unknowns.append(f)
        xi[v] = Expr.atom(f)
    eta_f = Func("eta", args)
    unknowns.append(eta_f)
    X = VectorField(ctx, xi, Expr.atom(eta_f), name="generic")
    residual = check_symmetry(X, pde)
    jets = sorted(
        {a for a in residual.atoms() if isinstance(a, Jet)},
        key=lambda a: a.sort_key(),
    )
    equations = []
    seen = set()
    if jets:
        groups = residual.collect(jets)
    else:
        groups = {ONE: residual} if not residual.is_zero else {}
    for _key, val in groups.items():
        eq = val.content_normalized()
        if eq.is_zero or eq in seen:
            continue
        seen.add(eq)
        equations.append(eq)
    equations.sort(key=lambda e: e.key())
    return DeterminingSystem(unknowns, equations, pde)


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] acting componentwise as first-order operators on the base space."""
    ctx = X.ctx
    xi = {}
    for v in ctx.independents:
        xi[v] = X.apply_to(Y.coefficient(v)) - Y.apply_to(X.coefficient(v))
    eta = X.apply_to(Y.eta) - Y.apply_to(X.eta)
    return VectorField(ctx, xi, eta, name="[%s,%s]" % (X.name or "X", Y.name or "Y"))


# -- exact linear solving over expression fractions ---------------------------


class _Frac:
    """num/den pair of Exprs; division-free elimination over the Expr domain."""

    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr = ONE):
        self.num = num
        self.den = den

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def mul(self, other: "_Frac") -> "_Frac":
        return _Frac(self.num * other.num, self.den * other.den)

    def sub(self, other: "_Frac") -> "_Frac":
        return _Frac(self.num * other.den - other.num * self.den, self.den * other.den)

    def div(self, other: "_Frac") -> "_Frac":
        return _Frac(self.num * other.den, self.den * other.num)


def solve_linear_exprs(rows: List[List[Expr]], rhs: List[Expr]) -> Optional[List[Tuple[Expr, Expr]]]:
    """Solve A c = b exactly; returns (num, den) pairs or None when inconsistent.

    Free unknowns are set to zero.  Works over the fraction field of the
    expression domain, so no divisibility assumptions are needed.
    """
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    a = [[_Frac(x) for x in row] + [_Frac(b)] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = None
        for rr in range(r, m):
            if not a[rr][c].is_zero:
                pivot_row = rr
                break
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        piv = a[r][c]
        for rr in range(m):
            if rr == r or a[rr][c].is_zero:
                continue
            factor = a[rr][c].div(piv)
            a[rr] = [a[rr][k].sub(factor.mul(a[r][k])) for k in range(ncols + 1)]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    # inconsistent if a zero row has nonzero rhs
    pivot_rows = {pr for pr, _ in pivots}
    for rr in range(m):
        if rr not in pivot_rows and not a[rr][ncols].is_zero:
            if all(a[rr][k].is_zero for k in range(ncols)):
                return None
    sol: List[Tuple[Expr, Expr]] = [(ZERO, ONE)] * ncols
    for pr, pc in pivots:
        val = a[pr][ncols].div(a[pr][pc])
        sol[pc] = (val.num, val.den)
    return sol


@dataclass
class Decomposition:
    ok: bool
    coefficients: Optional[List[Tuple[Expr, Expr]]] = None

    def coefficient_strings(self) -> List[str]:
        out = []
        for num, den in self.coefficients or []:
            if num.is_zero:
                out.append("0")
            elif den == ONE:
                out.append(str(num))
            elif den.is_monomial():
                out.append(str(num / den))
            else:
                out.append("(%s)/(%s)" % (num, den))
        return out


def _component_rows(fields: List[VectorField], target: VectorField):
    """Linear system matching monomials in everything except parameters."""
    rows: List[List[Expr]] = []
    rhs: List[Expr] = []
    ctx = target.ctx
    slots = list(ctx.independents) + [ctx.dependent]
    for k, slot in enumerate(slots):
        comps = [f.eta if k == len(slots) - 1 else f.coefficient(slot) for f in fields]
        tcomp = target.eta if k == len(slots) - 1 else target.coefficient(slot)
        keys = set()
        splits = []
        for e in comps + [tcomp]:
            split = _split_by_nonparameters(e)
            splits.append(split)
            keys.update(split.keys())
        for key in sorted(keys, key=lambda kk: tuple((a.sort_key(), x.key()) for a, x in kk)):
            rows.append([splits[i].get(key, ZERO) for i in range(len(fields))])
            rhs.append(splits[-1].get(key, ZERO))
    return rows, rhs


def _split_by_nonparameters(e: Expr) -> dict:
    out: dict = {}
    for mono, coeff in e.terms:
        key = tuple((a, x) for a, x in mono if not (isinstance(a, Sym) and a.kind == PARAMETER))
        rest = tuple((a, x) for a, x in mono if isinstance(a, Sym) and a.kind == PARAMETER)
        cur = out.get(key, ZERO)
        out[key] = cur + Expr(((rest, coeff),))
    return {k: v for k, v in out.items() if not v.is_zero}


def decompose_field(target: VectorField, basis: List[VectorField]) -> Decomposition:
    """Write target as a constant combination of the basis, parameters allowed."""
    rows, rhs = _component_rows(basis, target)
    sol = solve_linear_exprs(rows, rhs)
    if sol is None:
        return Decomposition(False)
    # exact verification of sum(num_i/den_i * basis_i) == target, cross multiplied
    ctx = target.ctx
    total_den = ONE
    for _num, den in sol:
        total_den = total_den * den
    complements = []
    for i in range(len(sol)):
        c = ONE
        for j, (_n, d) in enumerate(sol):
            if j != i:
                c = c * d
        complements.append(c)
    slots = list(ctx.independents) + [ctx.dependent]
    for k, slot in enumerate(slots):
        lhs = ZERO
        for (num, _den), comp_den, f in zip(sol, complements, basis):
            comp = f.eta if k == len(slots) - 1 else f.coefficient(slot)
            lhs = lhs + num * comp_den * comp
        tcomp = target.eta if k == len(slots) - 1 else target.coefficient(slot)
        if not (lhs - total_den * tcomp).is_zero:
            return Decomposition(False)
    return Decomposition(True, sol)


@dataclass
class ClosureReport:
    basis: List[VectorField]
    table: Dict[Tuple[int, int], Tuple[VectorField, Decomposition]]
    witnesses: List[Tuple[int, int, VectorField]]

    @property
    def closed(self) -> bool:
        return not self.witnesses


def closure_table(fields: List[VectorField]) -> ClosureReport:
    """Pairwise commutators decomposed over the given basis."""
    if not fields:
        raise SymmetryError("closure analysis needs at least one field")
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            if fields[i] == fields[j]:
                raise SymmetryError(
                    "underdetermined decomposition: duplicate basis fields %d and %d" % (i, j)
                )
    table = {}
    witnesses = []
    for i, X in enumerate(fields):
        for j, Y in enumerate(fields):
            if j <= i:
                continue
            Z = commutator(X, Y)
            if Z.is_zero_field():
                dec = Decomposition(True, [(ZERO, ONE)] * len(fields))
            else:
                dec = decompose_field(Z, fields)
            table[(i, j)] = (Z, dec)
            if not dec.ok:
                witnesses.append((i, j, Z))
    return ClosureReport(fields, table, witnesses)
