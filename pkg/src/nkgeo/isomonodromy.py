"""Trace-free 2x2 Lax pencils: matrix flows, gauges, and flatness.

The central system is the matrix ODE

    P' = 0,    Q' = [R, Q]/2 + P/2,    R' = [P, Q]/2          (*)

for trace-free 2x2 matrices P, Q, R of t.  It is the compatibility
condition of the linear pencil pair

    A(t, lam) = Q + lam R + lam^2 P,    B(t, lam) = R/2 + lam P/2,

meaning d_t A - d_lam B + [A, B] = 0 holds per power of lam exactly when
(*) does.  Constant conjugation normal forms of P split the system into
three families: P diagonalisable leads to Painleve II, P nilpotent with
Tr(PR) != 0 to Painleve I (after a gauge moving B to (R + y L2)/2 +
lam P/2, with y = Tr(R^2)/8), and P nilpotent with Tr(PR) = 0 to a system
solvable in closed form.  classify_gauge decides the family, the three
*_parametrization / *_solution constructors produce the explicit states,
and flatness_check validates compatibility numerically as
path-independence of the fundamental solution Psi around rectangles in the
(lam, t) plane.

A variant flow

    P' = [P, R]/4,    Q' = [R, Q]/4 + P/2,    R' = [P, Q]/2

(Lax pair with B = R/4 + lam P/2) is equivalent to (*) through the
t-dependent conjugation X -> g X g^{-1} where g solves g^{-1} g' = R/4;
alt_frame_flow and alt_frame_equivalence cover it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from .expr import (
    Expr,
    EvalError,
    ONE,
    ZERO,
    add,
    compile_exprs,
    cosh,
    diff,
    div,
    evaluate,
    is_zero,
    mul,
    neg,
    parse,
    proves_zero,
    rational,
    simplify,
    sinh,
    sym,
    tanh,
    to_str,
)
from .geometry import (
    AuxRule,
    Chart,
    mat_add,
    mat_comm,
    mat_mul,
    mat_scale,
    mat_sub,
    mat_trace,
    sym_inverse,
)
from .nullkahler import as_expr

__all__ = [
    "AmbiguousClassificationError",
    "BlowUpError",
    "DegenerateGaugeError",
    "SingularBranchError",
    "SingularGaugeError",
    "Sl2Matrix",
    "IsomonodromyState",
    "LaxPair",
    "AuxTrajectory",
    "FlowTrajectory",
    "flow_rhs",
    "alt_frame_flow",
    "compatibility_residual",
    "classify_gauge",
    "pii_rules",
    "pii_parametrization",
    "pi_rules",
    "pi_parametrization",
    "solvable_solution",
    "solvable_residuals",
    "gauge_transform",
    "integrate_aux",
    "integrate_flow",
    "state_flow_residual",
    "lax_callables",
    "pencil_residual_on_trajectory",
    "flow_pencil_residual",
    "flatness_check",
    "alt_frame_equivalence",
]

NUMERIC_TRACE_TOL = 1e-12
BLOWUP_LIMIT = 1e6


class BlowUpError(RuntimeError):
    """A numeric trajectory left the safe region (movable singularity)."""


class DegenerateGaugeError(ValueError):
    """P = 0 admits no gauge normal form."""


class AmbiguousClassificationError(ValueError):
    """Discriminant or trace too close to the classification boundary."""


class SingularGaugeError(ValueError):
    """The gauge matrix is not invertible."""


class SingularBranchError(ValueError):
    """The constant branch of the solvable system is rejected."""


def _half(e) -> Expr:
    return mul(rational(1, 2), e)


class Sl2Matrix:
    """A 2x2 trace-free matrix of expressions.

    Entries are coerced through the expression kernel; the trace must
    vanish (exactly for symbolic entries, below 1e-12 for numeric ones).
    """

    __slots__ = ("m",)

    def __init__(self, entries):
        if len(entries) != 2 or any(len(row) != 2 for row in entries):
            raise ValueError("need a 2x2 entry array")
        rows = tuple(
            tuple(simplify(as_expr(entries[i][j])) for j in range(2))
            for i in range(2))
        tr = simplify(add(rows[0][0], rows[1][1]))
        if tr != ZERO and not proves_zero(tr):
            if tr.free:
                raise ValueError(
                    f"matrix is not trace-free: trace = {to_str(tr)}")
            if abs(evaluate(tr, {})) > NUMERIC_TRACE_TOL:
                raise ValueError(
                    f"matrix is not trace-free: trace = {to_str(tr)}")
        self.m = rows

    @classmethod
    def from_basis(cls, c1, c2, c3) -> "Sl2Matrix":
        """c1 L1 + c2 L2 + c3 L3 with L1 = diag(1/2,-1/2), L2, L3 nilpotent."""
        c1, c2, c3 = as_expr(c1), as_expr(c2), as_expr(c3)
        return cls([[_half(c1), c2], [c3, neg(_half(c1))]])

    @classmethod
    def zero(cls) -> "Sl2Matrix":
        return cls([[ZERO, ZERO], [ZERO, ZERO]])

    def basis_coefficients(self) -> Tuple[Expr, Expr, Expr]:
        """(c1, c2, c3) such that self = c1 L1 + c2 L2 + c3 L3."""
        return (simplify(add(self.m[0][0], neg(self.m[1][1]))),
                self.m[0][1], self.m[1][0])

    def rows(self) -> list:
        return [list(self.m[0]), list(self.m[1])]

    @property
    def free(self) -> set:
        out: set = set()
        for row in self.m:
            for e in row:
                out |= e.free
        return out

    def numeric(self, env: Optional[Mapping[str, complex]] = None) -> np.ndarray:
        env = dict(env or {})
        return np.array([[evaluate(e, env) for e in row] for row in self.m])

    def map(self, f) -> "Sl2Matrix":
        return Sl2Matrix([[f(e) for e in row] for row in self.m])

    def __add__(self, other: "Sl2Matrix") -> "Sl2Matrix":
        return Sl2Matrix(mat_add(self.rows(), other.rows()))

    def __sub__(self, other: "Sl2Matrix") -> "Sl2Matrix":
        return Sl2Matrix(mat_sub(self.rows(), other.rows()))

    def scale(self, c) -> "Sl2Matrix":
        return Sl2Matrix(mat_scale(as_expr(c), self.rows()))

    def comm(self, other: "Sl2Matrix") -> "Sl2Matrix":
        return Sl2Matrix(mat_comm(self.rows(), other.rows()))

    def __eq__(self, other) -> bool:
        return isinstance(other, Sl2Matrix) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(to_str(e) for e in row) for row in self.m)
        return f"Sl2Matrix[{rows}]"

    def to_json(self) -> list:
        return [[to_str(e) for e in row] for row in self.m]


def _coerce_matrix(x) -> Sl2Matrix:
    return x if isinstance(x, Sl2Matrix) else Sl2Matrix(x)


def _t_chart() -> Chart:
    return Chart(("t",))


@dataclass(frozen=True)
class IsomonodromyState:
    """P, Q, R at a common time; chart.diff supplies d/dt for bound symbols."""

    P: Sl2Matrix
    Q: Sl2Matrix
    R: Sl2Matrix
    chart: Chart = field(default_factory=_t_chart)
    t: Union[Expr, float] = field(default_factory=lambda: sym("t"))

    def __post_init__(self):
        object.__setattr__(self, "P", _coerce_matrix(self.P))
        object.__setattr__(self, "Q", _coerce_matrix(self.Q))
        object.__setattr__(self, "R", _coerce_matrix(self.R))

    def with_chart(self, chart: Chart) -> "IsomonodromyState":
        return replace(self, chart=chart)

    def to_json(self) -> dict:
        return {"P": self.P.to_json(), "Q": self.Q.to_json(),
                "R": self.R.to_json()}


@dataclass(frozen=True)
class LaxPair:
    """Polynomial pencils A = sum a_k lam^k (deg <= 2) and B = sum b_k lam^k."""

    chart: Chart
    a: Tuple[Sl2Matrix, ...]
    b: Tuple[Sl2Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "a",
                           tuple(_coerce_matrix(m) for m in self.a))
        object.__setattr__(self, "b",
                           tuple(_coerce_matrix(m) for m in self.b))
        if len(self.a) > 3:
            raise ValueError("A must have degree <= 2 in lam")

    @classmethod
    def default_gauge(cls, state: IsomonodromyState) -> "LaxPair":
        """A = Q + lam R + lam^2 P, B = R/2 + lam P/2."""
        return cls(state.chart, (state.Q, state.R, state.P),
                   (state.R.scale(rational(1, 2)),
                    state.P.scale(rational(1, 2))))

    @classmethod
    def alternative_gauge(cls, state: IsomonodromyState) -> "LaxPair":
        """A = Q + lam R + lam^2 P, B = R/4 + lam P/2 (variant flow)."""
        return cls(state.chart, (state.Q, state.R, state.P),
                   (state.R.scale(rational(1, 4)),
                    state.P.scale(rational(1, 2))))

    def compatibility(self) -> List[list]:
        return compatibility_residual(self.a, self.b, self.chart)


def flow_rhs(state: IsomonodromyState
             ) -> Tuple[Sl2Matrix, Sl2Matrix, Sl2Matrix]:
    """(P', Q', R') = (0, [R,Q]/2 + P/2, [P,Q]/2)."""
    half = rational(1, 2)
    return (Sl2Matrix.zero(),
            state.R.comm(state.Q).scale(half) + state.P.scale(half),
            state.P.comm(state.Q).scale(half))


def alt_frame_flow(state: IsomonodromyState
                   ) -> Tuple[Sl2Matrix, Sl2Matrix, Sl2Matrix]:
    """(P', Q', R') = ([P,R]/4, [R,Q]/4 + P/2, [P,Q]/2)."""
    quarter, half = rational(1, 4), rational(1, 2)
    return (state.P.comm(state.R).scale(quarter),
            state.R.comm(state.Q).scale(quarter) + state.P.scale(half),
            state.P.comm(state.Q).scale(half))


def _pencil_rows(pencil) -> List[list]:
    out = []
    for coeff in pencil:
        if isinstance(coeff, Sl2Matrix):
            out.append(coeff.rows())
        else:
            out.append([[simplify(as_expr(coeff[i][j])) for j in range(2)]
                        for i in range(2)])
    return out


def compatibility_residual(a, b, chart: Optional[Chart] = None) -> List[list]:
    """Coefficients of d_t A - d_lam B + [A, B] per power of lam.

    a and b are sequences of 2x2 matrices (ascending powers of lam); the
    chart supplies the total t-derivative for bound symbols.  The result is
    a list of plain 2x2 matrices of expressions, one per power of lam, and
    vanishes identically exactly when the pencils are compatible.
    """
    ch = chart if chart is not None else _t_chart()
    arows = _pencil_rows(a)
    brows = _pencil_rows(b)
    degree = max(len(arows) - 1 + len(brows) - 1,
                 len(arows) - 1, len(brows) - 2, 0)
    zero2 = [[ZERO, ZERO], [ZERO, ZERO]]
    out = [[[ZERO, ZERO], [ZERO, ZERO]] for _ in range(degree + 1)]
    for k, mat in enumerate(arows):
        for i in range(2):
            for j in range(2):
                out[k][i][j] = add(out[k][i][j],
                                   ch.diff(mat[i][j], "t"))
    for k in range(1, len(brows)):
        for i in range(2):
            for j in range(2):
                out[k - 1][i][j] = add(out[k - 1][i][j],
                                       neg(mul(k, brows[k][i][j])))
    for ka, ma in enumerate(arows):
        for kb, mb in enumerate(brows):
            c = mat_comm(ma, mb)
            for i in range(2):
                for j in range(2):
                    out[ka + kb][i][j] = add(out[ka + kb][i][j], c[i][j])
    return [[[simplify(e) for e in row] for row in mat] for mat in out]


def _sampled_magnitude(e: Expr) -> float:
    e = simplify(e)
    if e == ZERO or proves_zero(e):
        return 0.0
    if not e.free:
        return abs(evaluate(e, {}))
    verdict = is_zero(e, n_points=20, seed=0)
    return 0.0 if verdict.ok else verdict.max_abs


def classify_gauge(p, r, *, tol: float = 1e-10,
                   border: float = 1e-6) -> str:
    """Gauge class of a constant P: "PII", "PI", or "solvable".

    PII when P has two distinct eigenvalues (discriminant Tr(P^2) != 0),
    PI when P is nilpotent with Tr(PR) != 0, solvable when P is nilpotent
    with Tr(PR) = 0.  Magnitudes are normalized by the matrix scale;
    values below tol count as zero, values above border as nonzero, and
    the gap in between is rejected: the classification is discontinuous,
    so near-boundary inputs have no reliable answer.
    """
    p = _coerce_matrix(p)
    r = _coerce_matrix(r)
    p_scale = max(_sampled_magnitude(e) for row in p.m for e in row)
    if p_scale <= tol:
        raise DegenerateGaugeError("P = 0 admits no gauge normal form")
    r_scale = max(_sampled_magnitude(e) for row in r.m for e in row)

    disc = _sampled_magnitude(mat_trace(mat_mul(p.rows(), p.rows())))
    disc_rel = disc / p_scale ** 2
    if disc_rel >= border:
        return "PII"
    if disc_rel > tol:
        raise AmbiguousClassificationError(
            f"discriminant Tr(P^2) is borderline (relative size "
            f"{disc_rel:.3e}); cannot classify reliably")

    trace = _sampled_magnitude(mat_trace(mat_mul(p.rows(), r.rows())))
    trace_rel = trace / (p_scale * r_scale) if r_scale > 0 else 0.0
    if trace_rel >= border:
        return "PI"
    if trace_rel > tol:
        raise AmbiguousClassificationError(
            f"Tr(PR) is borderline (relative size {trace_rel:.3e}); "
            "cannot classify reliably")
    return "solvable"


def pii_rules(alpha=0, u: str = "u", y: str = "y",
              z: str = "z") -> Tuple[AuxRule, ...]:
    """u' = -yu, z' = -2yz + alpha - 1/2, y' = z + y^2 + t/2."""
    alpha = as_expr(alpha)
    uu, yy, zz, tt = sym(u), sym(y), sym(z), sym("t")
    return (
        AuxRule(u, "t", simplify(neg(mul(yy, uu)))),
        AuxRule(y, "t", simplify(add(zz, mul(yy, yy), mul(rational(1, 2), tt)))),
        AuxRule(z, "t", simplify(add(mul(-2, mul(yy, zz)), alpha,
                                     rational(-1, 2)))),
    )


def pii_parametrization(u="u", y="y", z="z", t: str = "t",
                        alpha=0) -> IsomonodromyState:
    """State with P = 2 L1 whose flow is Painleve II with parameter alpha.

    P = 2 L1, R = u L2 - (2z/u) L3,
    Q = (2z + t) L1 - uy L2 - ((2yz + 1 - 2 alpha)/u) L3;
    the chart binds u' = -yu, z' = -2yz + alpha - 1/2, y' = z + y^2 + t/2,
    which combine to y'' = 2y^3 + ty + alpha.
    """
    uu, yy, zz = as_expr(u), as_expr(y), as_expr(z)
    alpha_e = as_expr(alpha)
    if simplify(uu) == ZERO or proves_zero(uu):
        raise ValueError("u must not vanish: the state has u in denominators")
    tt = sym(t)
    p = Sl2Matrix.from_basis(2, 0, 0)
    r = Sl2Matrix.from_basis(0, uu, neg(div(mul(2, zz), uu)))
    q_l3 = neg(div(add(mul(2, mul(yy, zz)), ONE, mul(-2, alpha_e)), uu))
    q = Sl2Matrix.from_basis(add(mul(2, zz), tt), neg(mul(uu, yy)), q_l3)
    names = [e.name if hasattr(e, "name") else None for e in (uu, yy, zz)]
    if all(names):
        chart = Chart((t,), aux=pii_rules(alpha_e, *names))
    else:
        chart = Chart((t,))
    return IsomonodromyState(P=p, Q=q, R=r, chart=chart, t=tt)


def pi_rules(y: str = "y", z: str = "z") -> Tuple[AuxRule, ...]:
    """y' = z, z' = 6y^2 + t."""
    yy, tt = sym(y), sym("t")
    return (AuxRule(y, "t", sym(z)),
            AuxRule(z, "t", simplify(add(mul(6, mul(yy, yy)), tt))))


def pi_parametrization(y="y", z="z", t: str = "t"
                       ) -> Tuple[IsomonodromyState, LaxPair]:
    """State with nilpotent P whose flow is Painleve I, plus its Lax pair.

    P = L2, R = y L2 + 4 L3, Q = -2z L1 + (y^2 + t/2) L2 - 4y L3; the
    returned pair carries the shifted B = (R + y L2)/2 + lam P/2 whose
    compatibility with A is exactly y' = z, z' = 6y^2 + t.  The
    normalization satisfies Tr(R^2)/8 = y.
    """
    yy, zz, tt = as_expr(y), as_expr(z), sym(t)
    p = Sl2Matrix.from_basis(0, 1, 0)
    r = Sl2Matrix.from_basis(0, yy, 4)
    q = Sl2Matrix.from_basis(
        mul(-2, zz),
        add(mul(yy, yy), mul(rational(1, 2), tt)),
        mul(-4, yy))
    names = [e.name if hasattr(e, "name") else None for e in (yy, zz)]
    if all(names):
        chart = Chart((t,), aux=pi_rules(*names))
    else:
        chart = Chart((t,))
    state = IsomonodromyState(P=p, Q=q, R=r, chart=chart, t=tt)
    b0 = (r + p.scale(yy)).scale(rational(1, 2))
    lax = LaxPair(chart, (q, r, p), (b0, p.scale(rational(1, 2))))
    return state, lax


def solvable_solution(a=0, b=0, c=0, t: str = "t",
                      branch: str = "regular") -> IsomonodromyState:
    """Closed-form state with P = L2 nilpotent and Tr(PR) = 0.

    R = r1 L1 + r2 L2 and Q = q1 L1 + q2 L2 + q3 L3 with

        r1 = 4 tanh t,          r2 = (a + bt) r1 - 4b,
        q1 = -2 r2',  q3 = r1',
        q2 = sinh(2t)/4 - d/dt((a + bt) r2) + c cosh(t)^2,

    which solve 2 r1'' + r1' r1 = 0, 2 r2'' + r1' r2 = 0 and
    2 q2' - 2 r2 r2' - q2 r1 - 1 = 0 identically.  The constant branch
    r1 = const of the first equation produces a degenerate frame and is
    rejected.
    """
    if branch != "regular":
        raise SingularBranchError(
            "the constant branch r1 = const produces a degenerate frame; "
            "only the regular branch r1 = 4 tanh(t) is supported")
    aa, bb, cc, tt = as_expr(a), as_expr(b), as_expr(c), sym(t)
    affine = add(aa, mul(bb, tt))
    r1 = mul(4, tanh(tt))
    r2 = simplify(add(mul(affine, r1), mul(-4, bb)))
    q1 = simplify(mul(-2, diff(r2, t)))
    q3 = simplify(diff(r1, t))
    q2 = simplify(add(
        mul(rational(1, 4), sinh(mul(2, tt))),
        neg(diff(mul(affine, r2), t)),
        mul(cc, mul(cosh(tt), cosh(tt)))))
    return IsomonodromyState(
        P=Sl2Matrix.from_basis(0, 1, 0),
        Q=Sl2Matrix.from_basis(q1, q2, q3),
        R=Sl2Matrix.from_basis(r1, r2, 0),
        chart=Chart((t,)), t=tt)


def solvable_residuals(state: IsomonodromyState) -> Dict[str, Expr]:
    """Scalar residuals of the closed-form system for a P = L2 state.

    Returns r1_ode: 2 r1'' + r1' r1, r2_ode: 2 r2'' + r1' r2,
    q2_ode: 2 q2' - 2 r2 r2' - q2 r1 - 1, and the eliminations
    q1 + 2 r2' and q3 - r1'.
    """
    ch = state.chart
    r1, r2, r3 = state.R.basis_coefficients()
    q1, q2, q3 = state.Q.basis_coefficients()
    if not (simplify(r3) == ZERO or proves_zero(r3)):
        raise ValueError("state is not in the Tr(PR) = 0 family (r3 != 0)")

    def dt(e):
        return ch.diff(e, "t")

    return {
        "r1_ode": simplify(add(mul(2, dt(dt(r1))), mul(dt(r1), r1))),
        "r2_ode": simplify(add(mul(2, dt(dt(r2))), mul(dt(r1), r2))),
        "q2_ode": simplify(add(mul(2, dt(q2)), mul(-2, mul(r2, dt(r2))),
                               neg(mul(q2, r1)), neg(ONE))),
        "q1_elim": simplify(add(q1, mul(2, dt(r2)))),
        "q3_elim": simplify(add(q3, neg(dt(r1)))),
    }


def gauge_transform(a, b, gamma, chart: Optional[Chart] = None
                    ) -> Tuple[List[list], List[list]]:
    """Apply A -> g A g^{-1}, B -> g B g^{-1} + g' g^{-1} for g = g(t).

    a, b are pencils in ascending powers of lam; gamma must be an
    invertible 2x2 matrix of expressions in t (lam-free, so the d_lam g
    term of the general transformation law vanishes).  The result is a
    pair of plain pencils: when det(gamma) is not constant the transformed
    B picks up a trace part, so no trace-free coercion is applied.  The
    compatibility residual transforms covariantly:
    residual' = g residual g^{-1}.
    """
    ch = chart if chart is not None else _t_chart()
    g = [[simplify(as_expr(gamma[i][j])) for j in range(2)] for i in range(2)]
    lam_free = set().union(*(e.free for row in g for e in row))
    if "lam" in lam_free:
        raise ValueError("gamma must not depend on lam")
    try:
        ginv = sym_inverse(g)
    except ZeroDivisionError as exc:
        raise SingularGaugeError(f"gamma is not invertible: {exc}") from exc
    det = simplify(add(mul(g[0][0], g[1][1]), neg(mul(g[0][1], g[1][0]))))
    if is_zero(det, n_points=20, seed=0).ok:
        raise SingularGaugeError("gamma is not invertible: det vanishes")

    def conj(mat):
        return mat_mul(mat_mul(g, mat), ginv)

    a_rows = _pencil_rows(a)
    b_rows = _pencil_rows(b)
    a_out = [[[simplify(e) for e in row] for row in conj(m)] for m in a_rows]
    gdot = [[ch.diff(g[i][j], "t") for j in range(2)] for i in range(2)]
    shift = mat_mul(gdot, ginv)
    b_out = []
    for k, m in enumerate(b_rows):
        new = conj(m)
        if k == 0:
            new = mat_add(new, shift)
        b_out.append([[simplify(e) for e in row] for row in new])
    return a_out, b_out


# ---------------------------------------------------------------------------
# numeric trajectories


def _require_real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ValueError(f"{what} produced a non-real value {value}")
    return float(value.real)


@dataclass(frozen=True)
class AuxTrajectory:
    """Dense numeric solution of a chart's bound-symbol ODE system."""

    chart: Chart
    names: Tuple[str, ...]
    t_span: Tuple[float, float]
    sol: object

    def env(self, t: float) -> Dict[str, float]:
        values = self.sol(t)
        out = {"t": float(t)}
        out.update({n: float(v) for n, v in zip(self.names, values)})
        return out

    def grid(self, n: int) -> List[Dict[str, float]]:
        ts = np.linspace(self.t_span[0], self.t_span[1], n)
        return [self.env(t) for t in ts]


def integrate_aux(chart: Chart, init: Mapping[str, float],
                  t_span: Tuple[float, float], *, rtol: float = 1e-10,
                  atol: float = 1e-10, max_step: Optional[float] = None,
                  limit: float = BLOWUP_LIMIT) -> AuxTrajectory:
    """Integrate the chart's auxiliary rules var' = rhs(t, vars).

    init maps every bound symbol to its value at t_span[0].  Adaptive
    RK45 with the given tolerances; |value| > limit aborts with
    BlowUpError (movable poles).
    """
    names = tuple(rule.var for rule in chart.aux)
    if not names:
        raise ValueError("chart has no bound symbols to integrate")
    missing = set(names) - set(init)
    if missing:
        raise ValueError(f"missing initial values for {sorted(missing)}")
    for rule in chart.aux:
        if rule.wrt != "t":
            raise ValueError("auxiliary rules must be ODEs in t")
    fns = compile_exprs([rule.rhs for rule in chart.aux], ("t",) + names)

    def rhs(t, yvec):
        if np.max(np.abs(yvec)) > limit:
            raise BlowUpError(
                f"trajectory exceeded |value| = {limit:g} near t = {t:.6g}")
        vals = fns(t, *yvec)
        return [_require_real(v, "auxiliary rhs") for v in vals]

    y0 = [float(init[n]) for n in names]
    if max_step is None:
        # dense-output interpolation error limits downstream
        # finite-difference residual checks, so keep steps short
        max_step = abs(t_span[1] - t_span[0]) / 400 or np.inf
    sol = solve_ivp(rhs, t_span, y0, method="RK45", rtol=rtol, atol=atol,
                    max_step=max_step, dense_output=True)
    if not sol.success:
        raise BlowUpError(f"integration failed: {sol.message}")
    return AuxTrajectory(chart=chart, names=names,
                         t_span=(float(t_span[0]), float(t_span[1])),
                         sol=sol.sol)


def _check_numeric_traceless(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2")
    scale = max(np.max(np.abs(mat)), 1.0)
    if abs(np.trace(mat)) > NUMERIC_TRACE_TOL * scale:
        raise ValueError(f"{name} is not trace-free")
    return mat


def _pack(mats: Sequence[np.ndarray]) -> np.ndarray:
    flat = np.concatenate([np.asarray(m, dtype=complex).ravel()
                           for m in mats])
    return np.concatenate([flat.real, flat.imag])


def _unpack(vec: np.ndarray, count: int) -> List[np.ndarray]:
    half = len(vec) // 2
    flat = vec[:half] + 1j * vec[half:]
    return [flat[4 * k: 4 * k + 4].reshape(2, 2) for k in range(count)]


@dataclass(frozen=True)
class FlowTrajectory:
    """Dense numeric solution of the matrix flow for (P, Q, R)."""

    system: str
    t_span: Tuple[float, float]
    sol: object

    def matrices(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        p, q, r = _unpack(self.sol(t), 3)
        return p, q, r

    def p_drift(self, n: int = 20) -> float:
        ts = np.linspace(self.t_span[0], self.t_span[1], n)
        p0 = self.matrices(ts[0])[0]
        return max(float(np.linalg.norm(self.matrices(t)[0] - p0))
                   for t in ts)

    def max_trace(self, n: int = 20) -> float:
        ts = np.linspace(self.t_span[0], self.t_span[1], n)
        return max(abs(np.trace(m)) for t in ts for m in self.matrices(t))

    def residual_norms(self, t: float, h: float = 1e-3
                       ) -> Tuple[float, float, float]:
        """Finite-difference defect of each flow equation at time t."""
        lo, hi = min(self.t_span), max(self.t_span)
        h = min(h, (hi - lo) / 10)
        s = max(lo + 2 * h, min(hi - 2 * h, t))
        dots = _stencil_derivative(self.matrices, s, h)
        rhs = _numeric_rhs(self.system, *self.matrices(s))
        return tuple(float(np.linalg.norm(d - r))
                     for d, r in zip(dots, rhs))

    def rows(self, n: int = 20) -> List[Dict[str, float]]:
        """Tabulated trajectory: entries (re/im) and residual norms."""
        out = []
        for t in np.linspace(self.t_span[0], self.t_span[1], n):
            row: Dict[str, float] = {"t": float(t)}
            p, q, r = self.matrices(t)
            for label, m in (("P", p), ("Q", q), ("R", r)):
                for i in range(2):
                    for j in range(2):
                        row[f"{label}{i+1}{j+1}_re"] = float(m[i, j].real)
                        row[f"{label}{i+1}{j+1}_im"] = float(m[i, j].imag)
            res = self.residual_norms(t)
            row["residual_P"], row["residual_Q"], row["residual_R"] = res
            out.append(row)
        return out


def _stencil_derivative(fn: Callable[[float], tuple], s: float,
                        h: float) -> list:
    """Fourth-order five-point derivative of a tuple-valued function."""
    f2m, f1m, f1p, f2p = fn(s - 2 * h), fn(s - h), fn(s + h), fn(s + 2 * h)
    return [(-a2 + 8 * a1 - 8 * b1 + b2) / (12 * h)
            for a2, a1, b1, b2 in zip(f2p, f1p, f1m, f2m)]


def _numeric_rhs(system: str, p: np.ndarray, q: np.ndarray, r: np.ndarray
                 ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    def comm(x, y):
        return x @ y - y @ x

    if system == "default":
        return (np.zeros((2, 2), dtype=complex),
                0.5 * comm(r, q) + 0.5 * p,
                0.5 * comm(p, q))
    if system == "alternative":
        return (0.25 * comm(p, r),
                0.25 * comm(r, q) + 0.5 * p,
                0.5 * comm(p, q))
    raise ValueError(f"unknown system {system!r}")


def integrate_flow(p0, q0, r0, t_span: Tuple[float, float], *,
                   system: str = "default", rtol: float = 1e-10,
                   atol: float = 1e-10, max_step: Optional[float] = None,
                   limit: float = BLOWUP_LIMIT) -> FlowTrajectory:
    """Integrate the matrix flow from numeric trace-free initial data."""
    mats = [_check_numeric_traceless(m, name)
            for m, name in ((p0, "P"), (q0, "Q"), (r0, "R"))]
    if system not in ("default", "alternative"):
        raise ValueError(f"unknown system {system!r}")

    def rhs(t, vec):
        if np.max(np.abs(vec)) > limit:
            raise BlowUpError(
                f"trajectory exceeded |value| = {limit:g} near t = {t:.6g}")
        p, q, r = _unpack(vec, 3)
        return _pack(_numeric_rhs(system, p, q, r))

    if max_step is None:
        max_step = abs(t_span[1] - t_span[0]) / 100 or np.inf
    sol = solve_ivp(rhs, t_span, _pack(mats), method="RK45",
                    rtol=rtol, atol=atol, max_step=max_step,
                    dense_output=True)
    if not sol.success:
        raise BlowUpError(f"integration failed: {sol.message}")
    return FlowTrajectory(system=system,
                          t_span=(float(t_span[0]), float(t_span[1])),
                          sol=sol.sol)


def state_flow_residual(state: IsomonodromyState,
                        trajectory: AuxTrajectory, *, n_samples: int = 20,
                        h: float = 1e-3) -> float:
    """Max finite-difference defect of the default flow along a trajectory.

    The state's P, Q, R are evaluated through the trajectory's bound-symbol
    values; their t-derivatives are formed with a fourth-order stencil and
    compared against ([R,Q]/2 + P/2, [P,Q]/2, 0).
    """
    names = trajectory.names
    entries = []
    for m in (state.P, state.Q, state.R):
        for row in m.m:
            entries.extend(row)
    fn = compile_exprs(entries, ("t",) + names)

    def mats(t: float):
        env = trajectory.env(t)
        vals = fn(*[env[p] for p in ("t",) + names])
        arr = np.array(vals, dtype=complex).reshape(3, 2, 2)
        return arr[0], arr[1], arr[2]

    lo, hi = sorted(trajectory.t_span)
    step = min(h, (hi - lo) / (10 * n_samples))
    worst = 0.0
    for t in np.linspace(lo, hi, n_samples):
        s = min(max(t, lo + 2 * step), hi - 2 * step)
        dots = _stencil_derivative(mats, s, step)
        want = _numeric_rhs("default", *mats(s))
        worst = max(worst, max(float(np.linalg.norm(d - w))
                               for d, w in zip(dots, want)))
    return worst


def _pencil_fun(chart: Chart, pencil,
                trajectory: Optional[AuxTrajectory],
                env: Optional[Mapping[str, float]],
                dlam: bool) -> Callable[[float, complex], np.ndarray]:
    """Compile sum_k pencil[k] lam^k (or its lam-derivative) to a callable."""
    names = tuple(rule.var for rule in chart.aux)
    static = dict(env or {})
    params = ("t", "lam") + names + tuple(k for k in static if k not in names)
    lam = sym("lam")
    rows = _pencil_rows(pencil)
    entries = []
    for i in range(2):
        for j in range(2):
            total = ZERO
            for k, mat in enumerate(rows):
                if dlam:
                    if k == 0:
                        continue
                    term = mul(k, mat[i][j])
                    power = k - 1
                else:
                    term = mat[i][j]
                    power = k
                for _ in range(power):
                    term = mul(lam, term)
                total = add(total, term)
            entries.append(simplify(total))
    fn = compile_exprs(entries, params)

    def call(t: float, lam_val: complex) -> np.ndarray:
        base = trajectory.env(t) if trajectory is not None else {"t": t}
        base.update(static)
        base["lam"] = lam_val
        vals = fn(*[base[p] for p in params])
        return np.array(vals, dtype=complex).reshape(2, 2)

    return call


def lax_callables(lax: LaxPair,
                  trajectory: Optional[AuxTrajectory] = None,
                  env: Optional[Mapping[str, float]] = None
                  ) -> Tuple[Callable, Callable]:
    """Numeric evaluators (t, lam) -> 2x2 complex for A and B.

    Bound symbols are supplied by the trajectory (time-dependent) or a
    static env mapping.
    """
    return (_pencil_fun(lax.chart, lax.a, trajectory, env, False),
            _pencil_fun(lax.chart, lax.b, trajectory, env, False))


DEFAULT_LAM_SAMPLES = (0.0, 0.37, -0.61, 1.0)


def _pencil_defect(a_fun, b_fun, dlam_b_fun, t_window, lam_values,
                   n_samples: int, h: float) -> float:
    lo, hi = sorted(t_window)
    step = min(h, (hi - lo) / (10 * n_samples))
    worst = 0.0
    for t in np.linspace(lo, hi, n_samples):
        s = min(max(t, lo + 2 * step), hi - 2 * step)
        for lam in lam_values:
            (da,) = _stencil_derivative(
                lambda x: (a_fun(x, lam),), s, step)
            a_val = a_fun(s, lam)
            b_val = b_fun(s, lam)
            res = da - dlam_b_fun(s, lam) + a_val @ b_val - b_val @ a_val
            worst = max(worst, float(np.linalg.norm(res)))
    return worst


def pencil_residual_on_trajectory(lax: LaxPair, trajectory: AuxTrajectory,
                                  *, lam_values=DEFAULT_LAM_SAMPLES,
                                  n_samples: int = 20,
                                  h: float = 1e-3) -> float:
    """Max norm of d_t A - d_lam B + [A, B] along a numeric trajectory.

    d_t A is a fourth-order finite difference through the trajectory
    values, so the result is independent of the symbolic derivative rules.
    """
    a_fun = _pencil_fun(lax.chart, lax.a, trajectory, None, False)
    b_fun = _pencil_fun(lax.chart, lax.b, trajectory, None, False)
    db_fun = _pencil_fun(lax.chart, lax.b, trajectory, None, True)
    return _pencil_defect(a_fun, b_fun, db_fun, trajectory.t_span,
                          lam_values, n_samples, h)


def flow_pencil_residual(traj: FlowTrajectory, *,
                         lam_values=DEFAULT_LAM_SAMPLES,
                         n_samples: int = 20, h: float = 1e-3) -> float:
    """Max pencil residual norm along an integrated matrix-flow trajectory.

    Builds A = Q + lam R + lam^2 P and the system's B from the dense
    solution and differences A in t with a fourth-order stencil.
    """
    def a_fun(t, lam):
        p, q, r = traj.matrices(t)
        return q + lam * r + lam ** 2 * p

    if traj.system == "default":
        b_scale = 0.5
    elif traj.system == "alternative":
        b_scale = 0.25
    else:
        raise ValueError(f"unknown system {traj.system!r}")

    def b_fun(t, lam):
        p, _, r = traj.matrices(t)
        return b_scale * r + 0.5 * lam * p

    def db_fun(t, lam):
        p = traj.matrices(t)[0]
        return 0.5 * p

    return _pencil_defect(a_fun, b_fun, db_fun, traj.t_span, lam_values,
                          n_samples, h)


def _transport(fun: Callable[[float], np.ndarray],
               span: Tuple[float, float], psi0: np.ndarray, *,
               rtol: float, atol: float, limit: float) -> np.ndarray:
    if span[0] == span[1]:
        return psi0

    def rhs(s, vec):
        if np.max(np.abs(vec)) > limit:
            raise BlowUpError(
                f"fundamental solution exceeded |value| = {limit:g}")
        (psi,) = _unpack(vec, 1)
        return _pack([fun(s) @ psi])

    sol = solve_ivp(rhs, span, _pack([psi0]), method="RK45",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise BlowUpError(f"transport failed: {sol.message}")
    return _unpack(sol.y[:, -1], 1)[0]


def flatness_check(a_fun: Callable[[float, complex], np.ndarray],
                   b_fun: Callable[[float, complex], np.ndarray],
                   lam_range: Tuple[float, float],
                   t_range: Tuple[float, float], *, rtol: float = 1e-10,
                   atol: float = 1e-10,
                   limit: float = BLOWUP_LIMIT) -> float:
    """Path-independence defect of Psi around a (lam, t) rectangle.

    Psi solves d_lam Psi = A Psi along lam edges and d_t Psi = B Psi along
    t edges, starting from Psi = I at (lam0, t0).  The two edge orders
    (lam then t, t then lam) are compared at the opposite corner; the
    Frobenius norm of the difference vanishes to integration accuracy
    exactly when the pencils are compatible, and scales with the rectangle
    area otherwise.
    """
    lam0, lam1 = lam_range
    t0, t1 = t_range
    eye = np.eye(2, dtype=complex)
    opts = {"rtol": rtol, "atol": atol, "limit": limit}

    psi = _transport(lambda lam: a_fun(t0, lam), (lam0, lam1), eye, **opts)
    psi1 = _transport(lambda t: b_fun(t, lam1), (t0, t1), psi, **opts)

    psi = _transport(lambda t: b_fun(t, lam0), (t0, t1), eye, **opts)
    psi2 = _transport(lambda lam: a_fun(t1, lam), (lam0, lam1), psi, **opts)

    return float(np.linalg.norm(psi1 - psi2))


def alt_frame_equivalence(p0, q0, r0, t_span: Tuple[float, float], *,
                          n_samples: int = 15, rtol: float = 1e-10,
                          atol: float = 1e-10,
                          limit: float = BLOWUP_LIMIT) -> Dict[str, float]:
    """Numeric check that the variant flow is a conjugate of the default one.

    Integrates the variant system together with g' = g R/4 from g = I,
    forms the conjugates X~ = g X g^{-1}, and reports
    p_drift: max ||P~(t) - P~(t0)||, and flow_residual: the largest
    finite-difference defect of the default flow equations for (Q~, R~).
    """
    mats = [_check_numeric_traceless(m, name)
            for m, name in ((p0, "P"), (q0, "Q"), (r0, "R"))]
    eye = np.eye(2, dtype=complex)

    def rhs(t, vec):
        if np.max(np.abs(vec)) > limit:
            raise BlowUpError(
                f"trajectory exceeded |value| = {limit:g} near t = {t:.6g}")
        p, q, r, g = _unpack(vec, 4)
        dp, dq, dr = _numeric_rhs("alternative", p, q, r)
        dg = g @ (0.25 * r)
        return _pack([dp, dq, dr, dg])

    sol = solve_ivp(rhs, t_span, _pack(mats + [eye]), method="RK45",
                    rtol=rtol, atol=atol,
                    max_step=abs(t_span[1] - t_span[0]) / 100 or np.inf,
                    dense_output=True)
    if not sol.success:
        raise BlowUpError(f"integration failed: {sol.message}")

    def conjugates(t):
        p, q, r, g = _unpack(sol.sol(t), 4)
        ginv = np.linalg.inv(g)
        return g @ p @ ginv, g @ q @ ginv, g @ r @ ginv

    ts = np.linspace(t_span[0], t_span[1], n_samples)
    p_ref = conjugates(ts[0])[0]
    p_drift = max(float(np.linalg.norm(conjugates(t)[0] - p_ref))
                  for t in ts)

    h = min(1e-3, (t_span[1] - t_span[0]) / (10 * n_samples))
    residual = 0.0
    for t in ts:
        s = min(max(t, t_span[0] + 2 * h), t_span[1] - 2 * h)
        dots = _stencil_derivative(conjugates, s, h)
        want = _numeric_rhs("default", *conjugates(s))
        residual = max(residual,
                       float(np.linalg.norm(dots[1] - want[1])),
                       float(np.linalg.norm(dots[2] - want[2])))
    return {"p_drift": p_drift, "flow_residual": residual}
