"""SL(2)-invariant frames and cohomogeneity-one metric assembly.

The group chart (p, q, r) covers a dense open set of SL(2) through

    G(p, q, r) = exp(p L3) exp(q L1) exp(r L2)

(lower-triangular x diagonal x upper-triangular), realized by 2x2 matrices

    L1 = [[1/2, 0], [0, -1/2]],   L2 = [[0, 1], [0, 0]],   L3 = [[0, 0], [1, 0]],

so that [L1, L2] = L2, [L1, L3] = -L3, [L2, L3] = 2 L1.  The left-invariant
coframe sigma^a is read off from G^{-1} dG = sum_a sigma^a L_a, the
right-invariant coframe rho^a from dG G^{-1}, and the vector fields L_a, R_a
are their duals.  In coordinates,

    sigma^1 = dq - 2 r e^q dp        L_1 = d_q - r d_r
    sigma^2 = dr + r dq - r^2 e^q dp L_2 = d_r
    sigma^3 = e^q dp                 L_3 = e^{-q} d_p + 2 r d_q - r^2 d_r,

and everything downstream relies only on the structure equations

    d sigma^1 = 2 sigma^3 ^ sigma^2,  d sigma^2 = sigma^2 ^ sigma^1,
    d sigma^3 = sigma^1 ^ sigma^3,

together with [L_a, R_b] = 0.  Sign convention: the group volume form
sigma^1 ^ sigma^2 ^ sigma^3 = e^q dp^dq^dr evaluates to +1 on both
(L_1, L_2, L_3) and (R_1, R_2, R_3); that plus sign is fixed here once and
inherited by the quartic.

Cohomogeneity-one metrics on a chart (t, p, q, r) are assembled as

    g = gamma_{ab}(t) sigma^a x sigma^b + n_a(t) (sigma^a x dt + dt x sigma^a),

and carry a closed-form inverse obtained by inverting the 4x4 frame-basis
matrix [[0, n], [n^T, gamma]] (entries in t only) instead of the coordinate
matrix.

The quartic attached to an invariant frame E_ij with lambda-cubics (f_1, f_2)
is computed in the affine chart pi = (1, -lambda), i.e. lambda = -pi^2/pi^1:

    q(lambda) = f_1 (T_21 - lambda T_22) - f_2 (T_11 - lambda T_12),

where T_ij is the dt-component of E_ij, normalized so that the volume form
takes the value 1 on (E_11, E_21, E_12, E_22).  A second route evaluates
(dlambda ^ dt ^ sigma^1 ^ sigma^2 ^ sigma^3) on (l_1, l_2, R_1, R_2, R_3)
with l_i = (E_i1 - lambda E_i2) + f_i d_lambda; the two routes are asserted
to agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

from .expr import (
    Expr,
    ONE,
    ZERO,
    add,
    diff,
    div,
    evaluate,
    exp,
    is_zero,
    mul,
    neg,
    parse,
    proves_zero,
    rational,
    simplify,
    substitute,
    sym,
    to_str,
)
from .expr.poly import expand_in
from .geometry import (
    Chart,
    Form,
    Metric,
    coordinate_differential,
    lie_bracket,
    mat_comm,
    mat_mul,
    one_form,
    sym_det,
    sym_inverse,
)
from .nullkahler import as_expr

__all__ = [
    "DegenerateFrameError",
    "LeftInvariantFrame",
    "CohomogeneityOneMetric",
    "FrameField",
    "sl2_matrices",
    "group_matrix",
    "build_sl2_frame",
    "lie_derivative_metric",
    "lie_derivative_one_form",
    "cohomogeneity_metric",
    "killing_residuals",
    "metric_from_coframe",
    "frame_from_vectors",
    "quartic_from_frame",
]

GROUP_COORDS = ("p", "q", "r")
DEFAULT_COORDS = ("t",) + GROUP_COORDS


class DegenerateFrameError(ValueError):
    """A frame or assembled metric is singular where it must not be."""


def sl2_matrices() -> tuple:
    """The 2x2 realization (L1, L2, L3) of the sl(2) basis."""
    half = rational(1, 2)
    l1 = [[half, ZERO], [ZERO, neg(half)]]
    l2 = [[ZERO, ONE], [ZERO, ZERO]]
    l3 = [[ZERO, ZERO], [ONE, ZERO]]
    return l1, l2, l3


def group_matrix(p: Expr, q: Expr, r: Expr) -> list:
    """G(p,q,r) = exp(p L3) exp(q L1) exp(r L2); det G = 1 identically."""
    gain = exp(mul(rational(1, 2), q))
    drop = exp(mul(rational(-1, 2), q))
    return [
        [gain, mul(r, gain)],
        [mul(p, gain), add(mul(p, r, gain), drop)],
    ]


def _sl2_coefficients(m: list) -> tuple:
    """Decompose a trace-free 2x2 matrix as a L1 + b L2 + c L3."""
    trace = simplify(add(m[0][0], m[1][1]))
    if trace != ZERO and not proves_zero(trace):
        raise RuntimeError(
            "matrix is not trace-free; the Maurer-Cartan decomposition "
            f"does not apply (trace = {to_str(trace)})")
    return add(m[0][0], neg(m[1][1])), m[0][1], m[1][0]


# Closed forms of the invariant coframes over (dp, dq, dr), re-derived from
# the Maurer-Cartan matrices at every build; a drifted group matrix fails
# loudly instead of producing a frame with bloated raw coefficients.
_SIGMA_CLOSED = (
    ("-2*r*exp(q)", "1", "0"),
    ("-r^2*exp(q)", "r", "1"),
    ("exp(q)", "0", "0"),
)
_RHO_CLOSED = (
    ("0", "1", "-2*p*exp(q)"),
    ("0", "0", "exp(q)"),
    ("1", "p", "-p^2*exp(q)"),
)


def _dual_vectors(ch: Chart, rows: Sequence[Sequence[Expr]]) -> tuple:
    """Vector fields dual to three one-forms supported on (p, q, r)."""
    idx = [ch.index(c) for c in GROUP_COORDS]
    block = [[rows[a][j] for j in idx] for a in range(3)]
    inv = sym_inverse(block)
    vecs = []
    for a in range(3):
        comp = [ZERO] * ch.dim
        for k, j in enumerate(idx):
            comp[j] = simplify(inv[k][a])
        vecs.append(tuple(comp))
    return tuple(vecs)


@dataclass(frozen=True)
class LeftInvariantFrame:
    """Left/right invariant coframes and vector fields on a group chart."""

    chart: Chart
    matrix: tuple  # G(p, q, r) as a 2x2 nested tuple of Exprs
    sigma: tuple   # left-invariant one-forms (sigma^1, sigma^2, sigma^3)
    rho: tuple     # right-invariant one-forms
    left: tuple    # L_a vector-field components
    right: tuple   # R_a vector-field components

    def volume3(self) -> Form:
        """sigma^1 ^ sigma^2 ^ sigma^3 (equals +1 on both L and R triples)."""
        return self.sigma[0].wedge(self.sigma[1]).wedge(self.sigma[2])

    def residuals(self) -> Dict[str, List[Expr]]:
        """Residual families whose vanishing certifies the frame.

        structure:  d sigma^1 - 2 sigma^3^sigma^2,
                    d sigma^2 - sigma^2^sigma^1, d sigma^3 - sigma^1^sigma^3;
        duality:    sigma^b(L_a) - delta_a^b and rho^b(R_a) - delta_a^b;
        brackets:   [L1,L2] - L2, [L1,L3] + L3, [L2,L3] - 2 L1;
        left_right: all nine brackets [L_a, R_b];
        invariance: Lie derivatives of each sigma^b along each R_a;
        matrix:     the same three brackets for the 2x2 realization.
        """
        ch = self.chart
        s1, s2, s3 = self.sigma
        out: Dict[str, List[Expr]] = {}

        structure: List[Expr] = []
        for got, want in (
            (s1.d(), s3.wedge(s2).scale(2)),
            (s2.d(), s2.wedge(s1)),
            (s3.d(), s1.wedge(s3)),
        ):
            structure.extend((got - want).comps.values())
        out["structure"] = structure

        duality: List[Expr] = []
        for a in range(3):
            for b in range(3):
                delta = ONE if a == b else ZERO
                duality.append(simplify(
                    add(self.sigma[b](list(self.left[a])), neg(delta))))
                duality.append(simplify(
                    add(self.rho[b](list(self.right[a])), neg(delta))))
        out["duality"] = duality

        l1, l2, l3 = (list(v) for v in self.left)
        targets = (
            (lie_bracket(ch, l1, l2), l2, 1),
            (lie_bracket(ch, l1, l3), l3, -1),
            (lie_bracket(ch, l2, l3), l1, 2),
        )
        brackets: List[Expr] = []
        for got, want, factor in targets:
            for mu in range(ch.dim):
                brackets.append(simplify(
                    add(got[mu], mul(-factor, want[mu]))))
        out["brackets"] = brackets

        left_right: List[Expr] = []
        for la in self.left:
            for rb in self.right:
                left_right.extend(
                    simplify(c) for c in lie_bracket(ch, list(la), list(rb)))
        out["left_right"] = left_right

        invariance: List[Expr] = []
        for rb in self.right:
            for s in self.sigma:
                invariance.extend(lie_derivative_one_form(ch, s, list(rb)))
        out["invariance"] = invariance

        mat_l1, mat_l2, mat_l3 = sl2_matrices()
        matrix: List[Expr] = []
        for got, want in (
            (mat_comm(mat_l1, mat_l2), mat_l2),
            (mat_comm(mat_l1, mat_l3), [[neg(v) for v in row] for row in mat_l3]),
            (mat_comm(mat_l2, mat_l3), [[mul(2, v) for v in row] for row in mat_l1]),
        ):
            for row_got, row_want in zip(got, want):
                for x, y in zip(row_got, row_want):
                    matrix.append(simplify(add(x, neg(y))))
        out["matrix"] = matrix
        return out

    def to_json(self) -> dict:
        def strings(rows):
            return [[to_str(simplify(c)) for c in row] for row in rows]

        return {
            "coords": list(self.chart.coords),
            "matrix": strings(self.matrix),
            "sigma": [
                [to_str(f.comps.get((mu,), ZERO)) for mu in range(self.chart.dim)]
                for f in self.sigma
            ],
            "left": strings(self.left),
            "right": strings(self.right),
        }


def build_sl2_frame(ch: Optional[Chart] = None) -> LeftInvariantFrame:
    """Derive the invariant frame on a chart containing (p, q, r).

    The default chart is (t, p, q, r); any chart with the three group
    coordinates (and possibly extra transverse ones) is accepted.  The
    one-forms are extracted from the Maurer-Cartan matrices G^{-1} dG and
    dG G^{-1} rather than hard-coded, so a wrong group matrix cannot pass
    the structure-equation residuals silently.
    """
    if ch is None:
        ch = Chart(DEFAULT_COORDS)
    missing = [c for c in GROUP_COORDS if c not in ch.coords]
    if missing:
        raise ValueError(
            f"chart must contain the group coordinates p, q, r; missing {missing}")

    g = group_matrix(sym("p"), sym("q"), sym("r"))
    # det G = 1, so the inverse is the 2x2 adjugate.
    ginv = [[g[1][1], neg(g[0][1])], [neg(g[1][0]), g[0][0]]]

    sig = [[ZERO] * ch.dim for _ in range(3)]
    rho = [[ZERO] * ch.dim for _ in range(3)]
    for gi, name in enumerate(GROUP_COORDS):
        mu = ch.index(name)
        dg = [[diff(g[i][j], name) for j in range(2)] for i in range(2)]
        left_mc = mat_mul(ginv, dg)
        right_mc = mat_mul(dg, ginv)
        for a, coeff in enumerate(_sl2_coefficients(left_mc)):
            closed = parse(_SIGMA_CLOSED[a][gi])
            if not proves_zero(simplify(add(coeff, neg(closed)))):
                raise RuntimeError(
                    f"sigma^{a + 1} component along d{name} does not match "
                    "its closed form; the group matrix has drifted")
            sig[a][mu] = closed
        for a, coeff in enumerate(_sl2_coefficients(right_mc)):
            closed = parse(_RHO_CLOSED[a][gi])
            if not proves_zero(simplify(add(coeff, neg(closed)))):
                raise RuntimeError(
                    f"rho^{a + 1} component along d{name} does not match "
                    "its closed form; the group matrix has drifted")
            rho[a][mu] = closed

    return LeftInvariantFrame(
        chart=ch,
        matrix=tuple(tuple(row) for row in g),
        sigma=tuple(one_form(ch, comps) for comps in sig),
        rho=tuple(one_form(ch, comps) for comps in rho),
        left=_dual_vectors(ch, sig),
        right=_dual_vectors(ch, rho),
    )


def lie_derivative_one_form(ch: Chart, form: Form, v: Sequence[Expr]) -> List[Expr]:
    """Components of L_v omega for a one-form: v^c d_c w_a + w_c d_a v^c."""
    if form.degree != 1:
        raise ValueError("lie_derivative_one_form expects a one-form")
    out = []
    for a in range(ch.dim):
        pieces = []
        for c in range(ch.dim):
            wc = form.comps.get((c,), ZERO)
            if v[c] != ZERO:
                pieces.append(mul(v[c], ch.diff(form.comps.get((a,), ZERO),
                                                ch.coords[c])))
            if wc != ZERO:
                pieces.append(mul(wc, ch.diff(v[c], ch.coords[a])))
        out.append(simplify(add(*pieces)))
    return out


def lie_derivative_metric(ch: Chart, g: Sequence[Sequence[Expr]],
                          v: Sequence[Expr]) -> list:
    """(L_v g)_{ab} = v^c d_c g_{ab} + g_{cb} d_a v^c + g_{ac} d_b v^c."""
    n = ch.dim
    out = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            pieces = []
            for c in range(n):
                if v[c] != ZERO:
                    pieces.append(mul(v[c], ch.diff(g[a][b], ch.coords[c])))
                if g[c][b] != ZERO:
                    pieces.append(mul(g[c][b], ch.diff(v[c], ch.coords[a])))
                if g[a][c] != ZERO:
                    pieces.append(mul(g[a][c], ch.diff(v[c], ch.coords[b])))
            val = simplify(add(*pieces))
            out[a][b] = val
            out[b][a] = val
    return out


@dataclass(frozen=True)
class CohomogeneityOneMetric:
    """g = gamma_{ab}(t) sigma^a sigma^b + n_a(t) (sigma^a dt + dt sigma^a)."""

    frame: LeftInvariantFrame
    gamma: tuple   # symmetric 3x3 of Exprs in t
    n: tuple       # 3-vector of Exprs in t
    metric: Metric

    def to_json(self) -> dict:
        return {
            "gamma": [[to_str(v) for v in row] for row in self.gamma],
            "n": [to_str(v) for v in self.n],
            "coords": list(self.metric.chart.coords),
        }


def _t_only(entry: Expr, allowed: set, what: str) -> Expr:
    entry = simplify(entry)
    extra = entry.free - allowed
    if extra:
        raise ValueError(
            f"{what} may depend only on t and bound auxiliary symbols; "
            f"found {sorted(extra)}")
    return entry


def _frame_basis(frame: LeftInvariantFrame):
    """Coframe (dt, sigma^a) and its dual frame (d_t, L_a) as components."""
    ch = frame.chart
    t_idx = ch.index("t")
    dt_comp = [ZERO] * ch.dim
    dt_comp[t_idx] = ONE
    coframe = [dt_comp] + [
        [f.comps.get((mu,), ZERO) for mu in range(ch.dim)] for f in frame.sigma
    ]
    dt_vec = [ZERO] * ch.dim
    dt_vec[t_idx] = ONE
    vectors = [dt_vec] + [list(v) for v in frame.left]
    return coframe, vectors


def cohomogeneity_metric(gamma, n, frame: LeftInvariantFrame, *,
                         check: bool = True) -> CohomogeneityOneMetric:
    """Assemble the invariant metric from gamma(t), n(t) on (t, p, q, r).

    Raises DegenerateFrameError when the assembled metric is singular as an
    identity (e.g. gamma = I, n = 0, which has no dt x dt part at all).  With
    check=True a light numeric Killing check (Lie derivative of g along each
    right-invariant field) guards against convention drift; it is a theorem
    for t-only data, so a failure means the inputs were malformed.
    """
    ch = frame.chart
    if "t" not in ch.coords:
        raise ValueError("the frame chart has no transverse coordinate t")
    allowed = {"t"} | {rule.var for rule in ch.aux}

    gamma = [[_t_only(as_expr(v), allowed, "gamma entries") for v in row]
             for row in gamma]
    if len(gamma) != 3 or any(len(row) != 3 for row in gamma):
        raise ValueError("gamma must be a 3x3 matrix")
    n = [_t_only(as_expr(v), allowed, "n entries") for v in n]
    if len(n) != 3:
        raise ValueError("n must have three components")
    for a in range(3):
        for b in range(a + 1, 3):
            if simplify(add(gamma[a][b], neg(gamma[b][a]))) != ZERO:
                raise ValueError(f"gamma must be symmetric; entries ({a+1},{b+1}) "
                                 "and transpose differ")
            gamma[b][a] = gamma[a][b]

    # Frame-basis matrix in the coframe (dt, sigma^1, sigma^2, sigma^3).
    basis = [[ZERO] * 4 for _ in range(4)]
    for a in range(3):
        basis[0][1 + a] = n[a]
        basis[1 + a][0] = n[a]
        for b in range(3):
            basis[1 + a][1 + b] = gamma[a][b]

    det_basis = simplify(sym_det(basis))
    if det_basis == ZERO:
        raise DegenerateFrameError(
            "assembled metric is degenerate: the frame-basis matrix "
            "[[0, n], [n, gamma]] has identically zero determinant")
    verdict = is_zero(det_basis, n_points=20, seed=0)
    if verdict.ok:
        raise DegenerateFrameError(
            "assembled metric is degenerate: det of the frame-basis matrix "
            f"vanishes at all {verdict.n_points} sampled points "
            f"(max |det| = {verdict.max_abs:.3e})")
    basis_inv = sym_inverse(basis)

    coframe, vectors = _frame_basis(frame)
    dim = ch.dim
    g = [[ZERO] * dim for _ in range(dim)]
    ginv = [[ZERO] * dim for _ in range(dim)]
    for mu in range(dim):
        for nu in range(mu, dim):
            cov = []
            con = []
            for a in range(4):
                for b in range(4):
                    if basis[a][b] != ZERO:
                        cov.append(mul(basis[a][b], coframe[a][mu],
                                       coframe[b][nu]))
                    if basis_inv[a][b] != ZERO:
                        con.append(mul(basis_inv[a][b], vectors[a][mu],
                                       vectors[b][nu]))
            g[mu][nu] = g[nu][mu] = simplify(add(*cov))
            ginv[mu][nu] = ginv[nu][mu] = simplify(add(*con))

    metric = Metric(ch, g, inverse=ginv)
    built = CohomogeneityOneMetric(frame=frame, gamma=tuple(map(tuple, gamma)),
                                   n=tuple(n), metric=metric)
    if check:
        flat = [v for block in killing_residuals(built).values() for v in block]
        verdict = is_zero(flat, n_points=10, tol=1e-8, seed=0)
        if not verdict.ok:
            raise RuntimeError(
                "cohomogeneity-one assembly lost SL(2) invariance: Killing "
                f"residual {verdict.max_abs:.3e} at {verdict.witness}")
    return built


def killing_residuals(com: CohomogeneityOneMetric) -> Dict[str, List[Expr]]:
    """Lie derivative of the metric along each right-invariant field."""
    ch = com.metric.chart
    out: Dict[str, List[Expr]] = {}
    for a, vec in enumerate(com.frame.right):
        lg = lie_derivative_metric(ch, com.metric.g, list(vec))
        out[f"R{a + 1}"] = [lg[mu][nu] for mu in range(ch.dim)
                            for nu in range(mu, ch.dim)]
    return out


_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))  # (i, j) for E_{i+1, j+1}


def metric_from_coframe(e11: Form, e12: Form, e21: Form, e22: Form) -> Metric:
    """g = (1/2)(e11 sym e22 - e12 sym e21) with sym the symmetric product."""
    forms = (e11, e12, e21, e22)
    ch = forms[0].chart
    for f in forms:
        if f.degree != 1:
            raise ValueError("the co-frame must consist of one-forms")
        if f.chart.coords != ch.coords:
            raise ValueError("the co-frame one-forms must share one chart")
    if ch.dim != 4:
        raise ValueError("co-frame metrics live on four-dimensional charts")

    comp = [[f.comps.get((mu,), ZERO) for mu in range(4)] for f in forms]
    det = simplify(sym_det(comp))
    if det == ZERO or is_zero(det, n_points=20, seed=0).ok:
        raise DegenerateFrameError(
            "the co-frame is linearly dependent (determinant of the "
            "component matrix vanishes)")

    half = rational(1, 2)
    g = [[ZERO] * 4 for _ in range(4)]
    for mu in range(4):
        for nu in range(mu, 4):
            val = simplify(mul(half, add(
                mul(comp[0][mu], comp[3][nu]), mul(comp[3][mu], comp[0][nu]),
                neg(mul(comp[1][mu], comp[2][nu])),
                neg(mul(comp[2][mu], comp[1][nu])))))
            g[mu][nu] = g[nu][mu] = val
    return Metric(ch, g)


@dataclass(frozen=True)
class FrameField:
    """Four vector fields E_ij with their dual co-frame e^{ij}."""

    chart: Chart
    vectors: tuple  # ((E11, E12), (E21, E22)); component tuples
    coframe: tuple  # ((e11, e12), (e21, e22)); Forms dual to the vectors

    def metric(self) -> Metric:
        e = self.coframe
        return metric_from_coframe(e[0][0], e[0][1], e[1][0], e[1][1])

    def contravariant(self) -> list:
        """g^{mu nu} = 2 (E11 sym E22 - E12 sym E21), inverse to metric()."""
        v = self.vectors
        dim = self.chart.dim
        out = [[ZERO] * dim for _ in range(dim)]
        for mu in range(dim):
            for nu in range(mu, dim):
                val = simplify(mul(2, add(
                    mul(v[0][0][mu], v[1][1][nu]), mul(v[1][1][mu], v[0][0][nu]),
                    neg(mul(v[0][1][mu], v[1][0][nu])),
                    neg(mul(v[1][0][mu], v[0][1][nu])))))
                out[mu][nu] = out[nu][mu] = val
        return out

    def t_components(self) -> list:
        """T_ij = dt-component of E_ij (the frame acting on t)."""
        t_idx = self.chart.index("t")
        return [[self.vectors[i][j][t_idx] for j in range(2)] for i in range(2)]


def frame_from_vectors(ch: Chart, vectors,
                       frame: Optional[LeftInvariantFrame] = None) -> FrameField:
    """Package [[E11, E12], [E21, E22]] with the dual co-frame.

    When the invariant frame is supplied and every E_ij is a t-only
    combination of (d_t, L_1, L_2, L_3), the dual co-frame is produced by
    inverting the small 4x4 coefficient matrix in the (dt, sigma) basis;
    otherwise the coordinate component matrix is inverted directly.
    """
    if ch.dim != 4:
        raise ValueError("frame fields live on four-dimensional charts")
    if len(vectors) != 2 or any(len(row) != 2 for row in vectors):
        raise ValueError("vectors must form a 2x2 array [[E11, E12], [E21, E22]]")
    vecs = [[tuple(simplify(as_expr(c)) for c in vectors[i][j])
             for j in range(2)] for i in range(2)]
    for i in range(2):
        for j in range(2):
            if len(vecs[i][j]) != ch.dim:
                raise ValueError(f"E{i+1}{j+1} needs {ch.dim} components")

    flat = [vecs[i][j] for i, j in _LABELS]

    structured = None
    if frame is not None and frame.chart.coords == ch.coords:
        coframe_rows, basis_vectors = _frame_basis(frame)
        allowed = {"t"} | {rule.var for rule in ch.aux}
        at_identity = {name: ZERO for name in GROUP_COORDS}
        coeff = []
        ok = True
        for vec in flat:
            row = []
            for cf in coframe_rows:
                c = simplify(add(*[mul(cf[mu], vec[mu])
                                   for mu in range(ch.dim)]))
                # An invariant coefficient is constant on the group, so its
                # value at the identity is the whole story; checking the
                # difference vanishes tolerates unexpanded products of
                # group-coordinate factors that cancel.
                reduced = simplify(substitute(c, at_identity))
                if reduced.free <= allowed and (
                        c is reduced
                        or proves_zero(simplify(add(c, neg(reduced))))):
                    row.append(reduced)
                else:
                    ok = False
                    break
            if not ok:
                break
            coeff.append(row)
        if ok:
            structured = (coeff, coframe_rows)

    if structured is not None:
        coeff, coframe_rows = structured
        det = simplify(sym_det(coeff))
        if det == ZERO or is_zero(det, n_points=20, seed=0).ok:
            raise DegenerateFrameError("frame vectors are linearly dependent")
        inv = sym_inverse(coeff)
        # dual coframe rows: f^k = sum_a (C^{-T})[k][a] (dt, sigma)^a
        dual_rows = []
        for k in range(4):
            comps = []
            for mu in range(ch.dim):
                comps.append(simplify(add(
                    *[mul(inv[a][k], coframe_rows[a][mu]) for a in range(4)])))
            dual_rows.append(comps)
    else:
        comp = [list(vec) for vec in flat]
        det = simplify(sym_det(comp))
        if det == ZERO or is_zero(det, n_points=20, seed=0).ok:
            raise DegenerateFrameError("frame vectors are linearly dependent")
        inv = sym_inverse(comp)
        dual_rows = [[simplify(inv[mu][k]) for mu in range(ch.dim)]
                     for k in range(4)]

    forms = [one_form(ch, comps) for comps in dual_rows]
    coframe = ((forms[0], forms[1]), (forms[2], forms[3]))
    return FrameField(chart=ch, vectors=tuple(tuple(row) for row in vecs),
                      coframe=coframe)


def _extend_to_lambda(ch: Chart) -> Chart:
    if "lam" in ch.coords:
        return ch
    return Chart(ch.coords + ("lam",), ch.aux)


def quartic_from_frame(e_frame: FrameField, f1, f2, point,
                       frame: LeftInvariantFrame, *,
                       cross_check: bool = True) -> list:
    """Affine quartic coefficients [c0, c1, ...] ascending in lambda.

    point = None keeps the coefficients as Exprs in t (and any bound
    symbols); a float substitutes t; a mapping substitutes any symbols
    (useful when trajectory values for bound symbols are known) and the
    coefficients come back as complex numbers.  The zero polynomial returns
    the empty list.  Coefficients are normalized so that the volume form
    dt ^ sigma^1 ^ sigma^2 ^ sigma^3 takes the value 1 on
    (E_11, E_21, E_12, E_22); a frame with identically vanishing volume is
    rejected as degenerate.
    """
    ch = e_frame.chart
    if "t" not in ch.coords:
        raise ValueError("the frame chart needs the transverse coordinate t")
    if frame.chart.coords != ch.coords:
        raise ValueError("frame and vector fields must share one chart")
    lam = sym("lam")
    allowed = {"t", "lam"} | {rule.var for rule in ch.aux}
    f1 = _t_only(as_expr(f1), allowed, "f1")
    f2 = _t_only(as_expr(f2), allowed, "f2")

    tcomp = e_frame.t_components()
    for i in range(2):
        for j in range(2):
            tcomp[i][j] = _t_only(
                tcomp[i][j], {"t"} | {rule.var for rule in ch.aux},
                "frame dt-components (invariance)")

    # q(lambda) = f1 (T21 - lam T22) - f2 (T11 - lam T12), pi = (1, -lambda).
    quartic = simplify(add(
        mul(f1, add(tcomp[1][0], neg(mul(lam, tcomp[1][1])))),
        neg(mul(f2, add(tcomp[0][0], neg(mul(lam, tcomp[0][1])))))))

    # Normalization: value of dt ^ sigma^1 ^ sigma^2 ^ sigma^3 on the frame.
    vol4 = coordinate_differential(ch, "t").wedge(frame.volume3())
    vflat = e_frame.vectors
    scale = simplify(vol4(list(vflat[0][0]), list(vflat[1][0]),
                          list(vflat[0][1]), list(vflat[1][1])))
    # The volume is invariant under the group action, so it is constant on
    # each orbit; evaluating at the identity removes group-coordinate
    # factors that only cancel after expansion.
    at_identity = {name: ZERO for name in GROUP_COORDS
                   if name in ch.coords}
    if at_identity:
        reduced = simplify(substitute(scale, at_identity))
        if proves_zero(simplify(add(scale, neg(reduced)))):
            scale = reduced
    if scale == ZERO or is_zero(scale, n_points=20, seed=0).ok:
        raise DegenerateFrameError(
            "degenerate frame: vol(E11, E21, E12, E22) vanishes identically")

    if cross_check:
        ext = _extend_to_lambda(ch)
        lam_idx = ext.index("lam")

        def lift_vec(comps, lam_part):
            out = list(comps) + [ZERO] * (ext.dim - len(comps))
            out[lam_idx] = lam_part
            return out

        sigma_ext = [
            Form(ext, 1, dict(f.comps)) for f in frame.sigma
        ]
        vol5 = coordinate_differential(ext, "lam").wedge(
            coordinate_differential(ext, "t")).wedge(
            sigma_ext[0]).wedge(sigma_ext[1]).wedge(sigma_ext[2])
        l_fields = []
        for i in range(2):
            combo = [simplify(add(vflat[i][0][mu],
                                  neg(mul(lam, vflat[i][1][mu]))))
                     for mu in range(ch.dim)]
            l_fields.append(lift_vec(combo, (f1, f2)[i]))
        r_fields = [lift_vec(list(v), ZERO) for v in frame.right]
        direct = vol5(*(l_fields + r_fields))
        verdict = is_zero(add(direct, neg(quartic)), n_points=20, seed=0,
                          tol=1e-8)
        if not verdict.ok:
            raise RuntimeError(
                "quartic routes disagree (coefficient formula vs volume-form "
                f"determinant): residual {verdict.max_abs:.3e}")

    normalized = simplify(div(quartic, scale))
    coeffs = expand_in(normalized, "lam")
    if not coeffs:
        return []
    degree = max(coeffs)
    out = [simplify(coeffs.get(k, ZERO)) for k in range(degree + 1)]

    if point is None:
        return out
    if isinstance(point, Mapping):
        env = {k: complex(v) for k, v in point.items()}
    else:
        env = {"t": complex(point)}
        missing = set().union(*(c.free for c in out)) - {"t"}
        if missing:
            raise ValueError(
                "coefficients depend on bound symbols "
                f"{sorted(missing)}; pass a mapping with their values")
    return [evaluate(c, env) for c in out]
