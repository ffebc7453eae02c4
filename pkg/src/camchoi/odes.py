"""Compile reduced ODEs to numeric right-hand sides and integrate them with
an embedded adaptive Runge-Kutta pair or classic fixed-step RK4."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .expr import (
    EXP_ONE,
    Expr,
    ExprError,
    N_SYMBOL,
    RatPow,
    Sym,
    ONE,
    ZERO,
    as_expr,
)
from .jet import Context


class OdeError(ExprError):
    pass


@dataclass
class OdeSystem:
    ctx: Context
    order: int
    rhs: List[Expr]  # d state_i / d indep as expressions in state, indep, params
    state_atoms: List[object]
    params: Dict[Sym, float]
    name: str = ""
    _fn: Optional[Callable] = None

    @property
    def dimension(self) -> int:
        return self.order

    def compiled(self) -> Callable:
        if self._fn is None:
            self._fn = _compile_callable(self)
        return self._fn


def compile_rhs(ctx: Context, lhs: Expr, params: Dict[Sym, object], name: str = "") -> OdeSystem:
    """Turn lhs = 0 into a first-order system for (state, derivative, ...).

    The symbolic exponent parameter must be bound to a concrete integer so
    powers compile to repeated multiplication.  Every remaining parameter
    needs a numeric value.
    """
    if len(ctx.independents) != 1:
        raise OdeError("ODE compilation needs a single independent variable")
    var = ctx.independents[0]
    e = as_expr(lhs)
    if e.contains(N_SYMBOL):
        if N_SYMBOL not in params:
            raise OdeError("unbound parameter n")
        nval = Fraction(params[N_SYMBOL])
        if nval.denominator != 1:
            raise OdeError("exponent parameter n must be an integer")
        e = e.subst(N_SYMBOL, Expr.rational(nval))
    order = e.max_jet_order()
    if order == 0:
        raise OdeError("no derivatives present in the equation")
    top = ctx.jet((order,))
    parts = e.collect([top])
    coeff = None
    rest = ZERO
    for key, val in parts.items():
        if key == ONE:
            rest = val
            continue
        mono, _ = key.leading()
        (_atom, ex), = mono
        if ex != EXP_ONE:
            raise OdeError("nonlinear in highest derivative")
        coeff = val
    if coeff is None:
        raise OdeError("highest derivative vanished")
    if not coeff.is_monomial():
        raise OdeError("nonlinear in highest derivative: coefficient %s" % coeff)
    solved = (-rest) / coeff

    state_atoms: List[object] = [ctx.dependent]
    for k in range(1, order):
        state_atoms.append(ctx.jet((k,)))
    rhs = [Expr.atom(a) for a in state_atoms[1:]] + [solved]

    values: Dict[Sym, float] = {}
    for p, v in params.items():
        if p == N_SYMBOL:
            continue
        values[p] = float(v)
    allowed = set(state_atoms) | {var} | set(values.keys())
    for expr in rhs:
        for a in expr.atoms():
            if isinstance(a, RatPow):
                continue
            if a not in allowed:
                raise OdeError("unbound parameter %s" % a)
    return OdeSystem(ctx, order, rhs, state_atoms, values, name=name)


def _compile_callable(sys: OdeSystem) -> Callable:
    """Generate a plain Python function for the right-hand side."""
    var = sys.ctx.independents[0]
    names: Dict[object, str] = {var: "x"}
    for i, a in enumerate(sys.state_atoms):
        names[a] = "y%d" % i
    for p, v in sys.params.items():
        names[p] = repr(v)

    def emit(e: Expr) -> str:
        if e.is_zero:
            return "0.0"
        chunks = []
        for mono, coeff in e.terms:
            parts = [repr(float(coeff))]
            for a, ex in mono:
                if isinstance(a, RatPow):
                    base = repr(float(a.base))
                else:
                    base = names[a]
                if not ex.is_integer():
                    if ex.n:
                        raise OdeError("unbound exponent parameter in compiled expression")
                    parts.append("math.sqrt(%s)**%d" % (base, ex.num2))
                    continue
                k = ex.int_value()
                if k == 1:
                    parts.append(base)
                elif 2 <= k <= 6:
                    parts.append("(" + "*".join([base] * k) + ")")
                else:
                    parts.append("%s**%d" % (base, k))
            chunks.append("*".join(parts))
        return " + ".join(chunks)

    args = ", ".join(["x"] + ["y%d" % i for i in range(sys.order)])
    body = ", ".join(emit(e) for e in sys.rhs)
    src = "def _rhs(%s):\n    return (%s,)\n" % (args, body)
    ns: Dict[str, object] = {"math": math}
    exec(src, ns)
    return ns["_rhs"]


@dataclass
class IntegratorConfig:
    method: str = "adaptive-rk45"  # or "fixed-rk4"
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    initial_step: float = 1e-3
    max_step: float = 0.0  # 0 means span length
    step: float = 1e-4  # fixed-rk4 step
    span: Tuple[float, float] = (0.0, 1.0)
    dense: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise OdeError("tolerances must be positive")
        if self.span[0] == self.span[1]:
            raise OdeError("degenerate integration span")


@dataclass
class Trajectory:
    samples: List[Tuple[float, Tuple[float, ...]]]
    method: str
    config: IntegratorConfig
    params: Dict[str, float]
    accepted: int = 0
    rejected: int = 0
    flag: str = ""

    def endpoint(self) -> Tuple[float, Tuple[float, ...]]:
        return self.samples[-1]

    def at(self, x: float, tol: float = 1e-12) -> Tuple[float, ...]:
        for t, yv in self.samples:
            if abs(t - x) <= tol:
                return yv
        raise OdeError("no sample at %s" % x)


# Fehlberg 4(5) embedded pair.
_RKF_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
# 5th-order weights are propagated (local extrapolation); the 4th/5th
# difference drives the step controller.
_RKF_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF_ERR = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)

_UNDERFLOW_FRACTION = 1e-14
_SAFETY = 0.7


def integrate(sys: OdeSystem, ic: Sequence[float], cfg: IntegratorConfig) -> Trajectory:
    if len(ic) != sys.dimension:
        raise OdeError("initial condition dimension mismatch")
    f = sys.compiled()
    y0 = tuple(float(v) for v in ic)
    start = float(cfg.span[0])
    for v in f(start, *y0):
        if not math.isfinite(v):
            raise OdeError("right-hand side not finite at the initial point")
    if cfg.method == "fixed-rk4":
        traj = _integrate_rk4(f, y0, cfg)
    elif cfg.method == "adaptive-rk45":
        traj = _integrate_rkf45(f, y0, cfg)
    else:
        raise OdeError("unknown method %r" % cfg.method)
    traj.params = {k.name: v for k, v in sys.params.items()}
    return traj


def _integrate_rk4(f, y0, cfg: IntegratorConfig) -> Trajectory:
    a, b = cfg.span
    nsteps = max(1, int(math.ceil(abs(b - a) / cfg.step)))
    h = (b - a) / nsteps
    t = a
    y = y0
    samples = [(t, y)]
    for _ in range(nsteps):
        y = _rk4_step(f, t, y, h)
        t += h
        samples.append((t, y))
    samples[-1] = (b, samples[-1][1])
    return Trajectory(samples, "fixed-rk4", cfg, {}, accepted=nsteps)


def _rk4_step(f, t, y, h):
    k1 = f(t, *y)
    k2 = f(t + h / 2, *(yi + h / 2 * ki for yi, ki in zip(y, k1)))
    k3 = f(t + h / 2, *(yi + h / 2 * ki for yi, ki in zip(y, k2)))
    k4 = f(t + h, *(yi + h * ki for yi, ki in zip(y, k3)))
    return tuple(
        yi + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        for yi, a1, a2, a3, a4 in zip(y, k1, k2, k3, k4)
    )


def _integrate_rkf45(f, y0, cfg: IntegratorConfig) -> Trajectory:
    a, b = cfg.span
    direction = 1.0 if b > a else -1.0
    span_len = abs(b - a)
    hmax = cfg.max_step if cfg.max_step > 0 else span_len
    h = direction * min(abs(cfg.initial_step), hmax)
    t = a
    y = y0
    dense = sorted(cfg.dense, reverse=direction < 0) if cfg.dense else []
    dense_i = 0
    samples: List[Tuple[float, Tuple[float, ...]]] = [(t, y)]
    accepted = 0
    rejected = 0
    flag = ""
    fnow = f(t, *y)
    while (t - b) * direction < 0:
        if abs(h) < _UNDERFLOW_FRACTION * span_len:
            flag = "step-underflow"
            break
        if (t + h - b) * direction > 0:
            h = b - t
        ks = [fnow]
        failed = False
        for i in range(1, 6):
            ti = t + _RKF_C[i] * h
            yi = tuple(
                yv + h * sum(_RKF_A[i][j] * ks[j][m] for j in range(i))
                for m, yv in enumerate(y)
            )
            ki = f(ti, *yi)
            if any(not math.isfinite(v) for v in ki):
                failed = True
                break
            ks.append(ki)
        if failed:
            h *= 0.5
            rejected += 1
            continue
        ynew = tuple(
            yv + h * sum(_RKF_B5[j] * ks[j][m] for j in range(6))
            for m, yv in enumerate(y)
        )
        err = [h * sum(_RKF_ERR[j] * ks[j][m] for j in range(6)) for m in range(len(y))]
        norm = 0.0
        for m in range(len(y)):
            sc = cfg.abs_tol + cfg.rel_tol * max(abs(y[m]), abs(ynew[m]))
            norm = max(norm, abs(err[m]) / sc)
        if norm <= 1.0 or not math.isfinite(norm):
            if not math.isfinite(norm) or any(not math.isfinite(v) for v in ynew):
                h *= 0.5
                rejected += 1
                continue
            tnew = t + h
            fnew = f(tnew, *ynew)
            while dense_i < len(dense) and (dense[dense_i] - tnew) * direction <= 0:
                xq = dense[dense_i]
                if (xq - t) * direction > 0:
                    samples.append((xq, _hermite(t, y, fnow, tnew, ynew, fnew, xq)))
                dense_i += 1
            t, y, fnow = tnew, ynew, fnew
            if not samples or samples[-1][0] != t:
                samples.append((t, y))
            accepted += 1
            factor = 5.0 if norm == 0 else min(5.0, max(0.2, _SAFETY * norm ** -0.2))
            h = direction * min(abs(h) * factor, hmax)
        else:
            rejected += 1
            h = direction * max(abs(h) * max(0.2, _SAFETY * norm ** -0.2), 0.0)
    if not flag and samples and samples[-1][0] != b:
        if abs(samples[-1][0] - b) < 1e-9 * span_len:
            samples[-1] = (b, samples[-1][1])
    return Trajectory(samples, "adaptive-rk45", cfg, {}, accepted, rejected, flag)


def _hermite(t0, y0, f0, t1, y1, f1, xq):
    h = t1 - t0
    s = (xq - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return tuple(
        h00 * a + h10 * h * fa + h01 * b + h11 * h * fb
        for a, fa, b, fb in zip(y0, f0, y1, f1)
    )


def write_csv(traj: Trajectory, path: str, names: Sequence[str]) -> None:
    """One sample per line at full double precision."""
    lines = [",".join(names)]
    for t, y in traj.samples:
        lines.append(",".join("%.17g" % v for v in (t,) + tuple(y)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> Tuple[List[str], List[Tuple[float, ...]]]:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.strip() for line in fh if line.strip()]
    header = rows[0].split(",")
    data = [tuple(float(v) for v in r.split(",")) for r in rows[1:]]
    return header, data
