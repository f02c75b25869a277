"""Null-Kahler structures generated by a single potential on R^{4n}.

In adapted coordinates (x^1..x^{2n}, y^1..y^{2n}) a null-Kahler structure
(g, N) is built from one potential function Theta:

    g     = (1/2) w_ij (dx^i o dy^j + dy^j o dx^i)
            + Theta_{y^i y^j} dx^i o dx^j,
    N     = sum_i dx^i (x) d/dy^i,
    Omega = g(N., .),

where w is the constant antisymmetric block matrix [[0, I_n], [-I_n, 0]].
The endomorphism N squares to zero, has rank 2n, is parallel for the
Levi-Civita connection of g, and its kernel makes g a Walker metric; the
fundamental 2-form Omega is closed and parallel, and its n-th wedge power is
the last nonvanishing one.  ``verify_structure`` checks all of this on any
given structure.  The remaining operations implement the potential-level
gauge freedom (coordinate flows that preserve the normal form), restricted
conformal rescalings by functions of the x-variables, and the
pseudo-quaternionic matrix algebra generated by a complementary pair of
square-zero endomorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .expr import (
    Const,
    Expr,
    ONE,
    ZERO,
    Var,
    add,
    compile_exprs,
    diff,
    is_zero,
    mul,
    neg,
    parse,
    pw,
    rational,
    sample_points,
    simplify,
    to_str,
)
from .geometry import Chart, Form, Metric, covariant_derivative, lie_bracket
from .reporting import CheckReport, CheckResult

ExprLike = Union[Expr, str, int, float, Fraction]

__all__ = [
    "NullKahlerStructure",
    "GaugeTransform",
    "ConformalRescaling",
    "PseudoQuaternionicTriple",
    "as_expr",
    "omega_matrix",
    "omega_inverse",
    "normal_form_chart",
    "build_normal_form",
    "verify_structure",
    "kernel_integrability_residuals",
    "gauge_transform",
    "gauge_defect",
    "restricted_conformal_rescale",
    "pseudo_quaternionic_triple",
]


def as_expr(v: ExprLike) -> Expr:
    """Coerce a string, number or Expr into an Expr."""
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        return parse(v)
    return add(v)


def omega_matrix(n: int) -> List[List[int]]:
    """The 2n x 2n integer block matrix [[0, I_n], [-I_n, 0]]."""
    m = 2 * n
    w = [[0] * m for _ in range(m)]
    for i in range(n):
        w[i][n + i] = 1
        w[n + i][i] = -1
    return w


def omega_inverse(n: int) -> List[List[int]]:
    """Inverse of omega_matrix(n), i.e. [[0, -I_n], [I_n, 0]]."""
    return [[-v for v in row] for row in omega_matrix(n)]


def normal_form_chart(n: int) -> Chart:
    """The 4n-dimensional chart (x1..x{2n}, y1..y{2n})."""
    m = 2 * n
    names = tuple(f"x{i}" for i in range(1, m + 1)) + \
        tuple(f"y{i}" for i in range(1, m + 1))
    return Chart(names)


@dataclass(frozen=True, eq=False)
class NullKahlerStructure:
    """A potential-generated structure (g, N, Omega) on a 4n-chart."""

    n: int
    theta: Expr
    chart: Chart
    metric: Metric
    endomorphism: List[List[Expr]]  # N^a_b, constant entries
    fundamental_form: Form          # Omega_ab = g_cb N^c_a
    theta_hessian: List[List[Expr]]  # Theta_{y^i y^j}

    @property
    def dim(self) -> int:
        return 4 * self.n

    @property
    def x_names(self) -> tuple:
        return self.chart.coords[: 2 * self.n]

    @property
    def y_names(self) -> tuple:
        return self.chart.coords[2 * self.n:]

    @property
    def omega(self) -> List[List[int]]:
        return omega_matrix(self.n)

    def to_json(self, report: Optional[CheckReport] = None) -> dict:
        out = {
            "n": self.n,
            "theta": to_str(self.theta),
            "metric": [[to_str(v) for v in row] for row in self.metric.g],
        }
        if report is not None:
            out["checks"] = {c.name: c.to_json() for c in report.checks}
        return out


def build_normal_form(n: int, theta: ExprLike) -> NullKahlerStructure:
    """Build the structure (g, N, Omega) generated by the potential theta.

    The metric carries the y-Hessian of theta on the dx o dx block and the
    constant (1/2) w_ij pairing between dy^i and dx^j; its inverse is
    supplied in closed block form so curvature works at any n.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("n must be a positive integer")
    theta = as_expr(theta)
    ch = normal_form_chart(n)
    m = 2 * n
    d = 4 * n
    foreign = sorted(theta.free - set(ch.coords))
    if foreign:
        raise ValueError(
            f"potential depends on variables outside the chart: {foreign}")
    xs = ch.coords[:m]
    ys = ch.coords[m:]

    dy = [diff(theta, y) for y in ys]
    hess = [[ZERO] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            val = simplify(diff(dy[i], ys[j]))
            hess[i][j] = val
            hess[j][i] = val

    w = omega_matrix(n)
    g = [[ZERO] * d for _ in range(d)]
    for i in range(m):
        for j in range(m):
            g[i][j] = hess[i][j]
            if w[i][j]:
                half = rational(w[i][j], 2)
                g[m + i][j] = half
                g[j][m + i] = half

    # closed-form inverse: [[0, -2w], [2w, 4 w A w]] with A the y-Hessian
    ginv = [[ZERO] * d for _ in range(d)]
    for i in range(m):
        for j in range(m):
            if w[i][j]:
                ginv[i][m + j] = rational(-2 * w[i][j])
                ginv[m + i][j] = rational(2 * w[i][j])
    for i in range(m):
        for j in range(m):
            pieces = []
            for k in range(m):
                if not w[i][k]:
                    continue
                for l in range(m):
                    if not w[l][j] or hess[k][l] == ZERO:
                        continue
                    pieces.append(mul(4 * w[i][k] * w[l][j], hess[k][l]))
            if pieces:
                ginv[m + i][m + j] = add(*pieces)

    metric = Metric(ch, g, inverse=ginv)

    endo = [[ZERO] * d for _ in range(d)]
    for i in range(m):
        endo[m + i][i] = ONE

    omega_form = Form(ch, 2, {(i, n + i): rational(1, 2) for i in range(n)})

    return NullKahlerStructure(
        n=n, theta=theta, chart=ch, metric=metric, endomorphism=endo,
        fundamental_form=omega_form, theta_hessian=hess,
    )


def _flatten(nested) -> list:
    out = []
    stack = [nested]
    while stack:
        item = stack.pop()
        if isinstance(item, list):
            stack.extend(item)
        else:
            out.append(item)
    return out


def verify_structure(
    s: NullKahlerStructure,
    *,
    n_points: int = 50,
    tol: float = 1e-9,
    seed: int = 0,
    low: float = -2.0,
    high: float = 2.0,
    exclude: Optional[Callable[[Mapping[str, float]], bool]] = None,
) -> CheckReport:
    """Run the eight structural identity checks and report residuals.

    (a) compatibility g(NX,Y) + g(X,NY) = 0
    (b) parallel endomorphism  nabla N = 0
    (c) fundamental form closed and parallel  dOmega = 0, nabla Omega = 0
    (d) curvature commutes with N  R^a_bcd N^b_e - N^a_b R^b_ecd = 0
    (e) Ricci vanishes on the image of N  r_ab N^b_c = 0
    (f) scalar curvature = 0
    (g) Omega^n != 0 while Omega^(n+1) = 0
    (h) Walker property: covariant derivatives of Im(N) stay in Ker N

    Curvature checks are symbolic; for n > 1 they can be slow and the
    finite-difference curvature oracle is the recommended route.
    """
    report = CheckReport(
        title=f"null-Kahler structure checks (n={s.n})",
        meta={"n": s.n, "theta": to_str(s.theta)},
    )
    kw = dict(n_points=n_points, tol=tol, seed=seed, low=low, high=high,
              exclude=exclude)
    ch = s.chart
    g = s.metric
    N = s.endomorphism
    d = s.dim
    m = 2 * s.n
    coords = list(ch.coords)

    # (a) compatibility: N^c_a g_cb + g_ac N^c_b = 0
    resid = []
    for a in range(d):
        for b in range(a, d):
            pieces = []
            if a < m:
                pieces.append(g.g[m + a][b])
            if b < m:
                pieces.append(g.g[a][m + b])
            if pieces:
                resid.append(add(*pieces))
    report.add(CheckResult.from_verdict(
        "compatibility", is_zero(resid, coords, **kw)))

    # (b) nabla N = 0
    nabla_n = covariant_derivative(g, N, "ud")
    report.add(CheckResult.from_verdict(
        "parallel_endomorphism", is_zero(_flatten(nabla_n), coords, **kw)))

    # (c) dOmega = 0 and nabla Omega = 0
    closed = list(s.fundamental_form.d().comps.values())
    nabla_om = covariant_derivative(g, s.fundamental_form.matrix(), "dd")
    report.add(CheckResult.from_verdict(
        "closed_parallel_form",
        is_zero(closed + _flatten(nabla_om), coords, **kw)))

    # (d) R^a_bcd N^b_e - N^a_b R^b_ecd = 0
    riem = g.riemann()
    resid = []
    for a in range(d):
        for e in range(d):
            for c in range(d):
                for dd in range(c + 1, d):
                    t1 = riem[a][m + e][c][dd] if e < m else ZERO
                    t2 = riem[a - m][e][c][dd] if a >= m else ZERO
                    if t1 == ZERO and t2 == ZERO:
                        continue
                    resid.append(add(t1, neg(t2)))
    report.add(CheckResult.from_verdict(
        "curvature_commutes_with_n", is_zero(resid, coords, **kw)))

    # (e) r_ab N^b_c = 0
    ric = g.ricci()
    resid = [ric[a][m + c] for a in range(d) for c in range(m)]
    report.add(CheckResult.from_verdict(
        "ricci_vanishes_on_image", is_zero(resid, coords, **kw)))

    # (f) S = 0
    report.add(CheckResult.from_verdict(
        "scalar_curvature_zero", is_zero([g.scalar_curvature()], coords, **kw)))

    # (g) Omega^n nonzero, Omega^(n+1) zero (exact)
    power = s.fundamental_form
    for _ in range(s.n - 1):
        power = power.wedge(s.fundamental_form)
    power_next = power.wedge(s.fundamental_form)
    ok = (not power.is_zero_form()) and power_next.is_zero_form()
    report.add(CheckResult(
        name="volume_degeneracy", passed=ok,
        max_residual=0.0 if ok else 1.0, tolerance=0.0, symbolic=True,
        detail=(f"Omega^{s.n} has {len(power.comps)} nonzero components; "
                f"Omega^{s.n + 1} has {len(power_next.comps)}"),
    ))

    # (h) Walker: Gamma^{x^j}_{c, y^i} = 0
    gam = g.christoffel()
    resid = [gam[j][c][m + i]
             for j in range(m) for c in range(d) for i in range(m)]
    report.add(CheckResult.from_verdict(
        "walker_parallel_distribution", is_zero(resid, coords, **kw)))

    return report


def kernel_integrability_residuals(s: NullKahlerStructure) -> List[Expr]:
    """Residuals N([NX, NY]) for coordinate fields X, Y (all identically 0).

    The image of N is spanned by the constant fields d/dy^i, so the brackets
    vanish identically; the residuals certify Frobenius integrability of the
    kernel/image distribution.
    """
    ch = s.chart
    d = s.dim
    N = s.endomorphism
    out: List[Expr] = []
    for a in range(d):
        va = [N[r][a] for r in range(d)]
        for b in range(a + 1, d):
            vb = [N[r][b] for r in range(d)]
            bracket = lie_bracket(ch, va, vb)
            for r in range(d):
                out.append(simplify(
                    add(*[mul(N[r][c], bracket[c]) for c in range(d)])))
    return out


# ---------------------------------------------------------------------------
# gauge freedom
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """First-order coordinate flow preserving the normal form.

    ``new_coordinates`` maps each coordinate name to its image under the
    epsilon-flow of the generator; ``delta_theta`` is the total first-order
    change of the potential, so the pulled-back metric agrees with the
    normal-form metric of theta + epsilon*delta_theta up to O(epsilon^2).
    """

    epsilon: Expr
    generator: Dict[str, Expr]
    new_coordinates: Dict[str, Expr]
    delta_theta: Expr


def gauge_transform(
    s: NullKahlerStructure,
    H: ExprLike,
    T: Optional[Sequence[ExprLike]],
    Q: Optional[Sequence[ExprLike]],
    Rf: ExprLike,
    epsilon: ExprLike,
) -> GaugeTransform:
    """Gauge freedom of the normal form, generated by x-dependent data.

    H is a Hamiltonian for an area-preserving motion of the x-variables,
    T translates the y-variables, and Q, Rf shift the potential by terms
    linear in y and by a pure x-function (neither changes the metric).
    The generator is

        Y = w_{il} H_{x^l} d/dx^i + (y^k d(xi^i)/dx^k + T^i) d/dy^i,

    and the total first-order potential change is

        delta_theta = Y(theta) + (1/6) y^i y^j y^k H_{x^i x^j x^k}
                      + (1/2) y^i y^j w_{ki} T^k_{x^j} + y^i Q_i + Rf.

    The index pairing is fixed by first-order invariance: with these signs
    the pulled-back metric matches the normal form of theta +
    epsilon*delta_theta to O(epsilon^2) (see ``gauge_defect``).
    """
    m = 2 * s.n
    xs = s.chart.coords[:m]
    ys = s.chart.coords[m:]
    x_set = set(xs)

    H = as_expr(H)
    T = [as_expr(t) for t in (T if T is not None else [0] * m)]
    Q = [as_expr(q) for q in (Q if Q is not None else [0] * m)]
    Rf = as_expr(Rf)
    eps = as_expr(epsilon)
    if len(T) != m or len(Q) != m:
        raise ValueError(f"T and Q must each provide {m} components")
    for label, e in [("H", H), ("Rf", Rf)] + \
            [(f"T[{i}]", t) for i, t in enumerate(T)] + \
            [(f"Q[{i}]", q) for i, q in enumerate(Q)]:
        bad = sorted(e.free - x_set)
        if bad:
            raise ValueError(
                f"gauge data {label} must depend only on the x-variables; "
                f"found {bad}")

    w = omega_matrix(s.n)
    hx = [diff(H, x) for x in xs]

    xi = [add(*[mul(w[i][l], hx[l]) for l in range(m) if w[i][l]])
          for i in range(m)]
    eta = [add(T[i], *[mul(Var(ys[k]), diff(xi[i], xs[k])) for k in range(m)])
           for i in range(m)]

    transport = add(
        *[mul(xi[i], diff(s.theta, xs[i])) for i in range(m)],
        *[mul(eta[i], diff(s.theta, ys[i])) for i in range(m)])

    cubic_pieces = []
    for i in range(m):
        for j in range(m):
            hij = diff(hx[i], xs[j])
            for k in range(m):
                hijk = diff(hij, xs[k])
                if hijk == ZERO:
                    continue
                cubic_pieces.append(
                    mul(rational(1, 6), Var(ys[i]), Var(ys[j]), Var(ys[k]),
                        hijk))
    quad_pieces = []
    for i in range(m):
        for j in range(m):
            inner = add(*[mul(w[k][i], diff(T[k], xs[j]))
                          for k in range(m) if w[k][i]])
            if inner == ZERO:
                continue
            quad_pieces.append(
                mul(rational(1, 2), Var(ys[i]), Var(ys[j]), inner))

    delta = simplify(add(
        transport,
        *cubic_pieces,
        *quad_pieces,
        *[mul(Var(ys[i]), Q[i]) for i in range(m)],
        Rf,
    ))

    generator = {}
    new_coords = {}
    for i in range(m):
        generator[xs[i]] = simplify(xi[i])
        generator[ys[i]] = simplify(eta[i])
    for name in s.chart.coords:
        new_coords[name] = simplify(add(Var(name), mul(eps, generator[name])))

    return GaugeTransform(
        epsilon=eps, generator=generator, new_coordinates=new_coords,
        delta_theta=delta,
    )


def gauge_defect(
    s: NullKahlerStructure,
    H: ExprLike,
    T: Optional[Sequence[ExprLike]],
    Q: Optional[Sequence[ExprLike]],
    Rf: ExprLike,
    epsilon: float,
    *,
    n_points: int = 20,
    seed: int = 0,
    low: float = -1.0,
    high: float = 1.0,
) -> float:
    """Max deviation between the pulled-back metric under the epsilon-flow
    and the normal-form metric of theta + epsilon*delta_theta.

    The defect is O(epsilon^2): halving epsilon divides it by about four,
    and defect(1e-3)/defect(1e-4) is about 100.
    """
    gt = gauge_transform(s, H, T, Q, Rf, epsilon)
    target = build_normal_form(
        s.n, add(s.theta, mul(gt.epsilon, gt.delta_theta)))
    coords = list(s.chart.coords)
    d = len(coords)

    phi = [gt.new_coordinates[c] for c in coords]
    jac = [[diff(phi[a], coords[b]) for b in range(d)] for a in range(d)]
    fn_phi = compile_exprs(phi, coords)
    fn_jac = compile_exprs(_flatten(jac), coords)
    fn_g = compile_exprs(_flatten(s.metric.g), coords)
    fn_target = compile_exprs(_flatten(target.metric.g), coords)

    points = sample_points(coords, n_points, seed=seed, low=low, high=high)
    worst = 0.0
    for p in points:
        args = [p[c] for c in coords]
        image = fn_phi(*args)
        g_at = np.array(fn_g(*image), dtype=complex).reshape(d, d)
        j_at = np.array(fn_jac(*args), dtype=complex).reshape(d, d)
        pulled = j_at.T @ g_at @ j_at
        want = np.array(fn_target(*args), dtype=complex).reshape(d, d)
        worst = max(worst, float(np.max(np.abs(pulled - want))))
    return worst


# ---------------------------------------------------------------------------
# restricted conformal rescaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConformalRescaling:
    """Rescaled pair (F^2 g, F^3 Omega) with its parallelism check."""

    factor: Expr
    metric: Metric
    fundamental_form: Form
    parallel_check: CheckResult

    @property
    def passed(self) -> bool:
        return self.parallel_check.passed


def restricted_conformal_rescale(
    s: NullKahlerStructure,
    F: ExprLike,
    *,
    n_points: int = 50,
    tol: float = 1e-9,
    seed: int = 0,
    low: float = -2.0,
    high: float = 2.0,
    exclude: Optional[Callable[[Mapping[str, float]], bool]] = None,
) -> ConformalRescaling:
    """Rescale an n=1 structure by ghat = F^2 g and Omegahat = F^3 Omega.

    For a factor F(x1, x2) the rescaled form stays parallel for the
    Levi-Civita connection of ghat; the returned check certifies
    nablahat Omegahat = 0.  A factor depending on the y-variables breaks
    parallelism and the check reports the failure (it is not an error).
    """
    if s.n != 1:
        raise ValueError("restricted conformal rescaling requires n = 1")
    F = as_expr(F)
    foreign = sorted(F.free - set(s.chart.coords))
    if foreign:
        raise ValueError(
            f"conformal factor depends on variables outside the chart: "
            f"{foreign}")
    d = s.dim
    f2 = pw(F, 2)
    f2_inv = pw(F, -2)
    ghat_comps = [[mul(f2, s.metric.g[a][b]) for b in range(d)]
                  for a in range(d)]
    ghat_inv = [[mul(f2_inv, s.metric.inverse()[a][b]) for b in range(d)]
                for a in range(d)]
    ghat = Metric(s.chart, ghat_comps, inverse=ghat_inv)
    omhat = s.fundamental_form.scale(pw(F, 3))

    nabla = covariant_derivative(ghat, omhat.matrix(), "dd")
    verdict = is_zero(_flatten(nabla), list(s.chart.coords),
                      n_points=n_points, tol=tol, seed=seed, low=low,
                      high=high, exclude=exclude)
    check = CheckResult.from_verdict("rescaled_form_parallel", verdict)
    return ConformalRescaling(
        factor=F, metric=ghat, fundamental_form=omhat, parallel_check=check)


# ---------------------------------------------------------------------------
# pseudo-quaternionic algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PseudoQuaternionicTriple:
    """The triple (I, S, T) built from two square-zero endomorphisms."""

    I: List[List[Fraction]]
    S: List[List[Fraction]]
    T: List[List[Fraction]]
    report: CheckReport

    @property
    def passed(self) -> bool:
        return self.report.passed


def _fraction_matrix(M, label: str) -> List[List[Fraction]]:
    rows = [list(r) for r in M]
    d = len(rows)
    if d == 0 or any(len(r) != d for r in rows):
        raise ValueError(f"{label} must be a nonempty square matrix")
    try:
        return [[Fraction(v) for v in r] for r in rows]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{label} must have exact rational entries") from exc


def _fm_mul(A, B):
    d = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(d)), Fraction(0))
             for j in range(d)] for i in range(d)]


def _fm_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _fm_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _fm_neg(A):
    return [[-a for a in row] for row in A]


def _fm_eye(d):
    return [[Fraction(1) if i == j else Fraction(0) for j in range(d)]
            for i in range(d)]


def _fm_iszero(A) -> bool:
    return all(v == 0 for row in A for v in row)


def pseudo_quaternionic_triple(N1, N2) -> PseudoQuaternionicTriple:
    """Build (I, S, T) = (N1+N2, N1-N2, [N1, N2]) and check its algebra.

    Preconditions (validated): N1^2 = N2^2 = 0 and N1 N2 + N2 N1 = -Id.
    The report certifies, in exact rational arithmetic,
    I^2 = -Id, S^2 = T^2 = Id, IS = -T = -SI, IT = S = -TI, ST = I = -TS.
    """
    A = _fraction_matrix(N1, "N1")
    B = _fraction_matrix(N2, "N2")
    d = len(A)
    if len(B) != d:
        raise ValueError("N1 and N2 must have the same dimension")
    if not _fm_iszero(_fm_mul(A, A)):
        raise ValueError("N1 does not square to zero")
    if not _fm_iszero(_fm_mul(B, B)):
        raise ValueError("N2 does not square to zero")
    anti = _fm_add(_fm_mul(A, B), _fm_mul(B, A))
    if anti != _fm_neg(_fm_eye(d)):
        raise ValueError("N1 N2 + N2 N1 must equal minus the identity")

    I = _fm_add(A, B)
    S = _fm_sub(A, B)
    T = _fm_sub(_fm_mul(A, B), _fm_mul(B, A))
    eye = _fm_eye(d)

    identities = [
        ("I_squared_is_minus_identity", _fm_mul(I, I), _fm_neg(eye)),
        ("S_squared_is_identity", _fm_mul(S, S), eye),
        ("T_squared_is_identity", _fm_mul(T, T), eye),
        ("IS_equals_minus_T", _fm_mul(I, S), _fm_neg(T)),
        ("SI_equals_T", _fm_mul(S, I), T),
        ("IT_equals_S", _fm_mul(I, T), S),
        ("TI_equals_minus_S", _fm_mul(T, I), _fm_neg(S)),
        ("ST_equals_I", _fm_mul(S, T), I),
        ("TS_equals_minus_I", _fm_mul(T, S), _fm_neg(I)),
    ]
    report = CheckReport(title="pseudo-quaternionic algebra",
                         meta={"dimension": d})
    for name, got, want in identities:
        delta = _fm_sub(got, want)
        worst = max(abs(v) for row in delta for v in row)
        report.add(CheckResult(
            name=name, passed=(worst == 0), max_residual=float(worst),
            tolerance=0.0, symbolic=True))
    return PseudoQuaternionicTriple(I=I, S=S, T=T, report=report)
