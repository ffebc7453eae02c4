import math
import os

import pytest

from camchoi.expr import DEPENDENT, EXP_N, Expr, N_SYMBOL, PARAMETER, REDUCED, Sym
from camchoi.jet import Context
from camchoi.library import FIG1_RUNS, fig1_trajectory
from camchoi.odes import (
    IntegratorConfig,
    OdeError,
    Trajectory,
    compile_rhs,
    integrate,
    read_csv,
    write_csv,
)
from camchoi.svgplot import write_svg

zeta = Sym("zeta", REDUCED)
H = Sym("H", DEPENDENT)
H1 = Sym("H1", PARAMETER)
zctx = Context((zeta,), H, (H1, N_SYMBOL))


def zj(counts):
    return zctx.jet_expr(counts)


def eq38_lhs():
    HH = Expr.atom(H)
    Z = Expr.atom(zeta)
    n = Expr.atom(N_SYMBOL)
    return zj((2,)) - HH / (2 * n) + (HH.pow_exponent(EXP_N) - Z * HH / 2) * zj((1,)) + Expr.atom(H1)


def test_compile_trivial_second_order():
    sys = compile_rhs(zctx, zj((2,)), {})
    assert sys.dimension == 2
    assert [str(e) for e in sys.rhs] == ["H[zeta]", "0"]


def test_compile_binds_exponent_and_params():
    sys = compile_rhs(zctx, eq38_lhs(), {N_SYMBOL: 2, H1: 0})
    f = sys.compiled()
    # H'' = H/4 - (H^2 - zeta H / 2) H'
    val = f(0.0, 1.0, -0.5)
    assert val[0] == -0.5
    assert abs(val[1] - (0.25 - (1.0) * (-0.5))) < 1e-15


def test_compile_unbound_parameter_rejected():
    with pytest.raises(OdeError, match="unbound parameter"):
        compile_rhs(zctx, eq38_lhs(), {N_SYMBOL: 2})


def test_compile_nonlinear_highest_rejected():
    bad = zj((2,)) ** 2 + Expr.atom(H)
    with pytest.raises(OdeError, match="nonlinear in highest derivative"):
        compile_rhs(zctx, bad, {})


def test_compile_riccati_is_one_dimensional(doc):
    from camchoi.modelfile import OdeBlock

    blk = doc.block(OdeBlock, "cc33ode")
    sys = compile_rhs(blk.ctx, blk.lhs, {doc.params["Y0"]: 1, doc.params["Y1"]: 0})
    assert sys.dimension == 1


def test_linear_growth_exact():
    sys = compile_rhs(zctx, zj((2,)), {})
    tr = integrate(sys, [1.0, 2.0], IntegratorConfig(span=(0.0, 3.0)))
    for tval, yval in tr.samples:
        assert abs(yval[0] - (1 + 2 * tval)) < 1e-12


def test_exponential_growth_to_e():
    sys = compile_rhs(zctx, zj((1,)) - Expr.atom(H), {})
    tr = integrate(sys, [1.0], IntegratorConfig(span=(0.0, 1.0)))
    assert abs(tr.endpoint()[1][0] - math.e) < 1e-9


def test_rk4_order_of_convergence():
    sys = compile_rhs(zctx, zj((1,)) - Expr.atom(H), {})
    errs = []
    for h in (0.01, 0.005):
        cfg = IntegratorConfig(method="fixed-rk4", step=h, span=(0.0, 1.0))
        errs.append(abs(integrate(sys, [1.0], cfg).endpoint()[1][0] - math.e))
    ratio = errs[0] / errs[1]
    assert 12.0 <= ratio <= 20.0


def test_cross_method_agreement_all_n(doc):
    for rn in FIG1_RUNS:
        _s, tra, _c = fig1_trajectory(doc, rn)
        _s, trf, _c = fig1_trajectory(doc, rn, method="fixed-rk4", step=1e-3)
        scale = max(abs(v) for v in tra.endpoint()[1])
        bound = 10 * max(1e-9, 1e-9 * scale)
        diff = max(abs(a - b) for a, b in zip(tra.endpoint()[1], trf.endpoint()[1]))
        assert diff < max(bound, 1e-8)


def test_trajectory_invariants(doc):
    sys = compile_rhs(zctx, eq38_lhs(), {N_SYMBOL: 3, H1: 0})
    tr = integrate(sys, [1.0, -0.5], IntegratorConfig(span=(0.0, 4.0), dense=[0.5, 1.5, 2.5]))
    ts = [s[0] for s in tr.samples]
    assert ts[0] == 0.0 and tr.samples[0][1] == (1.0, -0.5)
    assert all(b > a for a, b in zip(ts, ts[1:]))
    for q in (0.5, 1.5, 2.5):
        tr.at(q)


def test_time_reversal():
    sys = compile_rhs(zctx, eq38_lhs(), {N_SYMBOL: 2, H1: 0})
    fwd = integrate(sys, [1.0, -0.5], IntegratorConfig(span=(0.0, 5.0)))
    back = integrate(sys, list(fwd.endpoint()[1]), IntegratorConfig(span=(5.0, 0.0)))
    ts = [s[0] for s in back.samples]
    assert all(b < a for a, b in zip(ts, ts[1:]))
    assert max(abs(a - b) for a, b in zip(back.endpoint()[1], (1.0, -0.5))) < 1e-7


def test_step_underflow_flagged():
    # 1/(1-t) blows up at t=1; the controller must give up and flag it
    Y = Expr.atom(H)
    sys = compile_rhs(zctx, zj((1,)) - Y * Y, {})
    tr = integrate(sys, [1.0], IntegratorConfig(span=(0.0, 2.0)))
    assert tr.flag == "step-underflow"
    assert tr.samples[0] == (0.0, (1.0,))
    assert tr.samples[-1][0] < 2.0


def test_csv_round_trip(tmp_path):
    sys = compile_rhs(zctx, zj((2,)), {})
    tr = integrate(sys, [1.0, 2.0], IntegratorConfig(span=(0.0, 1.0)))
    path = os.path.join(tmp_path, "t.csv")
    write_csv(tr, path, ["zeta", "H", "Hp"])
    header, rows = read_csv(path)
    assert header == ["zeta", "H", "Hp"]
    assert len(rows) == len(tr.samples)
    for row, (tval, yval) in zip(rows, tr.samples):
        assert row == (tval,) + tuple(yval)


def test_csv_header_only_for_empty(tmp_path):
    tr = Trajectory([], "fixed-rk4", IntegratorConfig(span=(0, 1)), {})
    path = os.path.join(tmp_path, "e.csv")
    write_csv(tr, path, ["zeta", "H", "Hp"])
    with open(path) as fh:
        assert fh.read() == "zeta,H,Hp\n"


def test_svg_output(tmp_path, doc):
    trajs = []
    colors = ["red", "blue", "yellow"]
    for rn in FIG1_RUNS:
        _s, tr, color = fig1_trajectory(doc, rn, span=(0.0, 2.0))
        trajs.append(tr)
    path = os.path.join(tmp_path, "f.svg")
    write_svg(trajs, colors, path, labels=["n2", "n3", "n5"])
    body = open(path).read()
    assert body.startswith("<svg")
    assert body.count("<polyline") == 3
    for color in colors:
        assert 'stroke="%s"' % color in body


def test_svg_empty_axes_only(tmp_path):
    path = os.path.join(tmp_path, "empty.svg")
    write_svg([], [], path)
    body = open(path).read()
    assert "<polyline" not in body
    assert body.count("<line") == 2


def test_pinned_regression_values(doc):
    pins = {
        "fig1n2": (0.726015312108, (5.498589497144, 0.498257058497)),
        "fig1n3": (0.680358633883, (-0.527191522595, -0.037095175742)),
        "fig1n5": (0.629009794269, (-0.849816666544, -0.022968517021)),
    }
    for rn, (h1, end) in pins.items():
        _s, tr, _c = fig1_trajectory(doc, rn)
        assert abs(tr.at(1.0)[0] - h1) < 1e-6
        assert abs(tr.endpoint()[1][0] - end[0]) < 1e-6
        assert abs(tr.endpoint()[1][1] - end[1]) < 1e-6


def test_svg_flat_line(tmp_path):
    path = os.path.join(tmp_path, "flat.svg")
    cfg = IntegratorConfig(span=(0.0, 1.0))
    flat = Trajectory([(0.0, (1.0,)), (0.5, (1.0,)), (1.0, (1.0,))], "fixed-rk4", cfg, {})
    write_svg([flat], ["red"], path)
    body = open(path).read()
    assert body.count("<polyline") == 1


def test_svg_records_description(tmp_path):
    path = os.path.join(tmp_path, "d.svg")
    write_svg([], [], path, description="damping-factor grouping: default")
    assert "<desc>damping-factor grouping: default</desc>" in open(path).read()
