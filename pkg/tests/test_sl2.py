"""Left-invariant SL(2,R) frames, cohomogeneity-one metrics, quartics.

The Maurer-Cartan coframe is checked symbolically against the structure
equations and numerically for duality / commutation of the left and right
actions; the quartic extractor is validated on a frame whose answer is a
closed form.
"""

from __future__ import annotations

import numpy as np
import pytest

from nkgeo.expr import (
    ONE,
    ZERO,
    add,
    evaluate,
    is_zero,
    mul,
    neg,
    parse,
    proves_zero,
    rational,
    sample_points,
    simplify,
    sym,
)
from nkgeo.geometry import AuxRule, Chart, coordinate_differential, one_form
from nkgeo.sl2 import (
    CohomogeneityOneMetric,
    DegenerateFrameError,
    build_sl2_frame,
    cohomogeneity_metric,
    frame_from_vectors,
    group_matrix,
    killing_residuals,
    metric_from_coframe,
    quartic_from_frame,
    sl2_matrices,
)


def symbolically_zero(e):
    e = simplify(e)
    return e == ZERO or proves_zero(e)


@pytest.fixture(scope="module")
def frame():
    return build_sl2_frame()


@pytest.fixture(scope="module")
def pi_chart():
    return Chart(("t", "p", "q", "r"),
                 aux=(AuxRule("y", "t", parse("z")),
                      AuxRule("z", "t", parse("6*y^2 + t"))))


@pytest.fixture(scope="module")
def pi_frame_field(pi_chart):
    """Frame E11 = Q, E22 = P, E12 = -2 d_t + y L2, E21 = 2 d_t - R - y L2.

    Q, R, P are the t-dependent sl(2) combinations whose flow is the first
    Painleve equation; the dual co-frame has closed-form components.
    """
    frc = build_sl2_frame(pi_chart)
    left = [list(v) for v in frc.left]

    def combo(t_part, c1, c2, c3):
        return [
            add(t_part if mu == 0 else 0,
                mul(c1, left[0][mu]), mul(c2, left[1][mu]),
                mul(c3, left[2][mu]))
            for mu in range(4)
        ]

    y, z = sym("y"), sym("z")
    q_vec = combo(0, mul(-2, z), parse("y^2 + t/2"), mul(-4, y))
    p_vec = combo(0, 0, 1, 0)
    e12 = combo(-2, 0, y, 0)
    e21 = combo(2, 0, mul(-2, y), -4)
    return frc, frame_from_vectors(
        pi_chart, [[q_vec, e12], [e21, p_vec]], frame=frc)


class TestMatrices:
    def test_commutators(self):
        """[L1,L2] = L2, [L1,L3] = -L3, [L2,L3] = 2 L1 in the 2x2 realization."""
        l1, l2, l3 = sl2_matrices()

        def comm(a, b):
            out = []
            for i in range(2):
                row = []
                for j in range(2):
                    row.append(simplify(add(
                        *[mul(a[i][k], b[k][j]) for k in range(2)],
                        *[neg(mul(b[i][k], a[k][j])) for k in range(2)])))
                out.append(row)
            return out

        for got, want, factor in ((comm(l1, l2), l2, 1),
                                  (comm(l1, l3), l3, -1),
                                  (comm(l2, l3), l1, 2)):
            for i in range(2):
                for j in range(2):
                    assert symbolically_zero(
                        add(got[i][j], mul(-factor, want[i][j])))

    def test_group_matrix_unimodular(self):
        """det G = 1 identically."""
        p, q, r = sym("p"), sym("q"), sym("r")
        g = group_matrix(p, q, r)
        det = add(mul(g[0][0], g[1][1]), neg(mul(g[0][1], g[1][0])))
        assert symbolically_zero(add(det, neg(ONE)))


class TestFrameConstruction:
    def test_structure_equations(self, frame):
        """d sigma^1 = 2 sigma^3 ^ sigma^2 and cyclic variants, exactly."""
        for res in frame.residuals()["structure"]:
            assert symbolically_zero(res)

    def test_duality_symbolic(self, frame):
        """sigma^b(L_a) = delta and rho^b(R_a) = delta, exactly."""
        for res in frame.residuals()["duality"]:
            assert symbolically_zero(res)

    def test_vector_brackets(self, frame):
        """The coordinate vector fields satisfy the sl(2) bracket table."""
        res = frame.residuals()
        for family in ("brackets", "matrix"):
            for r in res[family]:
                assert symbolically_zero(r)

    def test_left_right_commute_symbolic(self, frame):
        for res in frame.residuals()["left_right"]:
            assert symbolically_zero(res)

    def test_duality_and_commutation_numeric(self, frame):
        """Duality defects and [L_a, R_b] below 1e-10 at 50 points."""
        res = frame.residuals()
        v = is_zero(res["duality"] + res["left_right"],
                    n_points=50, tol=1e-10, try_symbolic=False)
        assert v.ok, v.max_abs

    def test_right_invariance_of_coframe(self, frame):
        """Lie_{R_a} sigma^b = 0: the left coframe is right-invariant."""
        for res in frame.residuals()["invariance"]:
            assert symbolically_zero(res)

    def test_coframe_at_identity(self, frame):
        """At p = q = r = 0 the coframe is (dq, dr, dp)."""
        ch = frame.chart
        origin = {"p": 0.0, "q": 0.0, "r": 0.0, "t": 0.0}
        want = ["q", "r", "p"]
        for a, s in enumerate(frame.sigma):
            for mu, name in enumerate(ch.coords):
                val = evaluate(s.comps.get((mu,), ZERO), origin)
                assert val == pytest.approx(1.0 if name == want[a] else 0.0)

    def test_volume_normalization(self, frame):
        """sigma^1^sigma^2^sigma^3 takes the value +1 on both frames."""
        vol = frame.volume3()
        for triple in (frame.left, frame.right):
            val = simplify(vol(*[list(v) for v in triple]))
            assert symbolically_zero(add(val, neg(ONE)))

    def test_chart_must_contain_group_coordinates(self):
        with pytest.raises(ValueError, match="p"):
            build_sl2_frame(Chart(("t", "x", "q", "r")))


class TestCohomogeneityMetric:
    def test_round_orbit_with_transverse_mix(self, frame):
        """gamma = I, n = (1, 0, 0) gives an invariant nondegenerate metric."""
        eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        com = cohomogeneity_metric(eye, [1, 0, 0], frame)
        assert isinstance(com, CohomogeneityOneMetric)
        flat_res = [r for row in killing_residuals(com).values() for r in row]
        v = is_zero(flat_res, n_points=20, tol=1e-10)
        assert v.ok, v.max_abs

    def test_metric_times_inverse_is_identity(self, frame):
        com = cohomogeneity_metric(
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 0], frame)
        g, ginv = com.metric.g, com.metric.inverse()
        for mu in range(4):
            for nu in range(4):
                entry = add(*[mul(g[mu][k], ginv[k][nu]) for k in range(4)])
                delta = ONE if mu == nu else ZERO
                assert symbolically_zero(add(entry, neg(delta)))

    def test_pure_orbit_metric_is_degenerate(self, frame):
        """gamma = I, n = 0 has no dt^2 term and must be rejected."""
        with pytest.raises(DegenerateFrameError):
            cohomogeneity_metric(
                [[1, 0, 0], [0, 1, 0], [0, 0, 1]], [0, 0, 0], frame)

    def test_group_coordinates_rejected_in_data(self, frame):
        with pytest.raises(ValueError, match="only on t"):
            cohomogeneity_metric(
                [[sym("p"), 0, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 0], frame)

    def test_asymmetric_gamma_rejected(self, frame):
        with pytest.raises(ValueError, match="symmetric"):
            cohomogeneity_metric(
                [[1, 1, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 0], frame)


class TestMetricFromCoframe:
    def test_flat_coframe_constant_metric(self):
        """g = (e11 sym e22 - e12 sym e21)/2 for coordinate differentials."""
        ch = Chart(("a", "b", "c", "d"))
        e = [coordinate_differential(ch, n) for n in ch.coords]
        g = metric_from_coframe(e[0], e[2], e[3], e[1]).g
        half = rational(1, 2)
        want = {(0, 1): half, (2, 3): neg(half)}
        for mu in range(4):
            for nu in range(4):
                target = want.get((mu, nu)) or want.get((nu, mu)) or ZERO
                assert simplify(add(g[mu][nu], neg(target))) == ZERO

    def test_signature_two_two(self, pi_frame_field):
        """The frame metric has signature (2, 2) at 20 sample points."""
        _, ff = pi_frame_field
        g = ff.metric().g
        pts = sample_points(("t", "p", "q", "r", "y", "z"), 20, seed=3,
                            low=0.3, high=1.5)
        for pt in pts:
            mat = np.array([[evaluate(g[mu][nu], pt).real
                             for nu in range(4)] for mu in range(4)])
            eig = np.linalg.eigvalsh(mat)
            assert np.sum(eig > 0) == 2 and np.sum(eig < 0) == 2, eig

    def test_dependent_coframe_rejected(self):
        ch = Chart(("a", "b", "c", "d"))
        da = coordinate_differential(ch, "a")
        db = coordinate_differential(ch, "b")
        with pytest.raises(DegenerateFrameError):
            metric_from_coframe(da, db, db, da)


class TestFrameField:
    def test_coframe_closed_forms(self, pi_frame_field):
        """e^11 = -(1/2z) sigma^1 and partners match the frame duality."""
        frc, ff = pi_frame_field
        y, z = sym("y"), sym("z")
        s1, s2, s3 = frc.sigma
        dt = coordinate_differential(frc.chart, "t")
        want = {
            (0, 0): s1.scale(parse("-1/(2*z)")),
            (1, 0): s1.scale(parse("y/(2*z)")) - s3.scale(rational(1, 4)),
            (0, 1): (s1.scale(parse("y/(2*z)")) - s3.scale(rational(1, 4))
                     - dt.scale(rational(1, 2))),
            (1, 1): (s1.scale(parse("(y^2 + t/4)/z")) + s2
                     - s3.scale(parse("y/4")) + dt.scale(parse("y/2"))),
        }
        for (i, j), target in want.items():
            diff_form = ff.coframe[i][j] - target
            for c in diff_form.comps.values():
                assert symbolically_zero(c)

    def test_duality(self, pi_frame_field):
        """e^{ij}(E_kl) = delta^i_k delta^j_l."""
        _, ff = pi_frame_field
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        val = ff.coframe[i][j](list(ff.vectors[k][l]))
                        delta = ONE if (i, j) == (k, l) else ZERO
                        assert symbolically_zero(add(val, neg(delta)))

    def test_contravariant_inverts_metric(self, pi_frame_field):
        _, ff = pi_frame_field
        g = ff.metric().g
        ginv = ff.contravariant()
        prods = []
        for mu in range(4):
            for nu in range(4):
                entry = add(*[mul(g[mu][k], ginv[k][nu]) for k in range(4)])
                delta = ONE if mu == nu else ZERO
                prods.append(add(entry, neg(delta)))
        v = is_zero(prods, n_points=10, seed=1, low=0.3, high=1.5)
        assert v.ok, v.max_abs

    def test_dependent_vectors_rejected(self, pi_chart):
        frc = build_sl2_frame(pi_chart)
        l2 = list(frc.left[1])
        with pytest.raises(DegenerateFrameError):
            frame_from_vectors(pi_chart, [[l2, l2], [l2, l2]], frame=frc)


class TestQuartic:
    def test_painleve_one_sections_give_constant(self, pi_frame_field):
        """f1 = -1, f2 = 0 yields the nonvanishing degree-0 quartic -1/(8z)."""
        frc, ff = pi_frame_field
        coeffs = quartic_from_frame(ff, -1, 0, None, frc)
        assert len(coeffs) == 1
        assert symbolically_zero(add(coeffs[0], parse("1/(8*z)")))

    def test_zero_sections_give_zero_polynomial(self, pi_frame_field):
        frc, ff = pi_frame_field
        assert quartic_from_frame(ff, 0, 0, None, frc) == []

    def test_cubic_sections_give_quartic_with_simple_roots(
            self, pi_frame_field):
        """Generic cubics in lam produce four distinct roots."""
        frc, ff = pi_frame_field
        coeffs = quartic_from_frame(
            ff, "lam^3 - 2*lam + 1", "lam^3 + lam^2 - 3",
            {"t": 0.5, "y": 0.3, "z": 0.7}, frc)
        assert len(coeffs) == 5 and abs(coeffs[4]) > 1e-3
        roots = np.roots(np.array(coeffs[::-1], dtype=complex))
        gaps = [abs(a - b) for i, a in enumerate(roots)
                for b in roots[i + 1:]]
        assert min(gaps) > 1e-6

    def test_numeric_point_requires_bound_values(self, pi_frame_field):
        frc, ff = pi_frame_field
        with pytest.raises(ValueError, match="mapping"):
            quartic_from_frame(ff, -1, 0, 0.5, frc)

    def test_degenerate_frame_rejected(self, pi_chart):
        frc = build_sl2_frame(pi_chart)
        left = [list(v) for v in frc.left]
        dt_vec = [ONE, ZERO, ZERO, ZERO]
        with pytest.raises(DegenerateFrameError):
            quartic_from_frame(
                frame_from_vectors(
                    pi_chart,
                    [[left[0], dt_vec], [dt_vec, left[0]]], frame=frc),
                -1, 0, None, frc)
