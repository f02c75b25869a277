"""Null-Kahler normal form: structure checks, gauge freedom, rescalings.

Closed forms anchor the tests: the flat and Sparling-Tod potentials have
known metrics, the block inverse is checked against numpy, and symbolic
Christoffel/curvature output is cross-checked against the independent
finite-difference oracle before the structure verifier's claims are
trusted on random potentials.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import chart_names
from nkgeo.expr import (
    ZERO,
    add,
    away_from,
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
    sym,
)
from nkgeo.geometry import (
    Metric,
    fd_christoffel,
    fd_curvature_oracle,
    star_two_form,
    sym_det,
    weyl_split,
)
from nkgeo.nullkahler import (
    NullKahlerStructure,
    build_normal_form,
    gauge_defect,
    gauge_transform,
    kernel_integrability_residuals,
    normal_form_chart,
    omega_inverse,
    omega_matrix,
    pseudo_quaternionic_triple,
    restricted_conformal_rescale,
    verify_structure,
)
from nkgeo.reporting import canonical_json

ST_THETA = "2/(y1*x2 - y2*x1)"


def st_exclude(p, radius=0.5):
    """Stay away from the rho = 0 singular locus of the Sparling-Tod form."""
    return abs(p["y1"] * p["x2"] - p["y2"] * p["x1"]) < radius


@pytest.fixture(scope="module")
def flat():
    return build_normal_form(1, 0)


@pytest.fixture(scope="module")
def sparling_tod():
    return build_normal_form(1, ST_THETA)


@pytest.fixture(scope="module")
def plane_wave():
    return build_normal_form(1, "sinh(y1)/x1")


class TestNormalForm:
    def test_omega_matrix(self):
        """w is antisymmetric with w^2 = -Id, and omega_inverse is -w."""
        for n in (1, 2, 3):
            w = np.array(omega_matrix(n))
            m = 2 * n
            assert w.shape == (m, m)
            assert np.array_equal(w.T, -w)
            assert np.array_equal(w @ w, -np.eye(m, dtype=int))
            assert np.array_equal(np.array(omega_inverse(n)), -w)

    def test_chart_layout(self):
        """The 4n-chart orders coordinates x1..x2n, y1..y2n."""
        assert normal_form_chart(1).coords == ("x1", "x2", "y1", "y2")
        assert normal_form_chart(2).coords == tuple(chart_names(2))

    def test_flat_metric_entries(self, flat):
        """For theta = 0 only the mixed block survives: g(dy1, dx2) = 1/2."""
        g = flat.metric.g
        half = rational(1, 2)
        assert g[2][1] == half          # g(y1, x2) = w_12 / 2
        assert g[1][2] == half
        assert g[3][0] == neg(half)     # g(y2, x1) = w_21 / 2
        for i in range(2):
            for j in range(2):
                assert g[i][j] == ZERO          # dx block
                assert g[2 + i][2 + j] == ZERO  # dy block
        assert g[0][2] == ZERO and g[1][3] == ZERO

    def test_theta_block_is_y_hessian(self, poly_theta):
        """The dx-dx block of g carries the second y-derivatives of theta."""
        theta = poly_theta(11)
        s = build_normal_form(1, theta)
        ys = ["y1", "y2"]
        for i in range(2):
            for j in range(2):
                want = diff(diff(theta, ys[i]), ys[j])
                assert simplify(add(s.metric.g[i][j], neg(want))) == ZERO
                assert s.theta_hessian[i][j] == s.metric.g[i][j]

    def test_mixed_block_independent_of_theta(self, poly_theta):
        """The off-diagonal block is the constant w/2 whatever theta is."""
        s = build_normal_form(1, poly_theta(12))
        w = omega_matrix(1)
        for i in range(2):
            for j in range(2):
                want = rational(w[i][j], 2)
                assert s.metric.g[2 + i][j] == want
                assert s.metric.g[j][2 + i] == want

    def test_endomorphism_is_square_zero(self, sparling_tod):
        """N maps d/dx^i to d/dy^i and satisfies N^2 = 0 with rank 2n."""
        s = sparling_tod
        d = s.dim
        nmat = np.array([[0.0 if e == ZERO else float(e.re)
                          for e in row] for row in s.endomorphism])
        assert np.array_equal(nmat @ nmat, np.zeros((d, d)))
        assert np.linalg.matrix_rank(nmat) == 2 * s.n

    def test_fundamental_form_matches_contraction(self, poly_theta):
        """Omega_ab = N^c_a g_cb holds entrywise for the built form."""
        s = build_normal_form(1, poly_theta(13))
        d = s.dim
        om = s.fundamental_form.matrix()
        for a in range(d):
            for b in range(d):
                want = add(*[mul(s.endomorphism[c][a], s.metric.g[c][b])
                             for c in range(d)])
                assert simplify(add(om[a][b], neg(want))) == ZERO

    def test_fundamental_form_components(self):
        """Omega = (1/2) w_ij dx^i ^ dx^j for n = 1 and n = 2."""
        half = rational(1, 2)
        assert build_normal_form(1, 0).fundamental_form.comps == {(0, 1): half}
        assert build_normal_form(2, 0).fundamental_form.comps == {
            (0, 2): half, (1, 3): half}

    def test_closed_form_inverse(self, poly_theta):
        """g . g^-1 = Id symbolically for the block closed-form inverse."""
        for n, seed in [(1, 14), (2, 15)]:
            s = build_normal_form(n, poly_theta(seed, n=n, degree=3, terms=4))
            g, ginv = s.metric.g, s.metric.inverse()
            d = s.dim
            for a in range(d):
                for b in range(d):
                    entry = add(*[mul(g[a][c], ginv[c][b]) for c in range(d)])
                    want = 1 if a == b else 0
                    assert simplify(add(entry, -want)) == ZERO

    def test_sparling_tod_inverse_numeric(self, sparling_tod):
        """The closed-form inverse matches numpy inversion to 1e-9 relative."""
        s = sparling_tod
        coords = list(s.chart.coords)
        d = s.dim
        fn_g = compile_exprs([e for row in s.metric.g for e in row], coords)
        fn_inv = compile_exprs(
            [e for row in s.metric.inverse() for e in row], coords)
        pts = sample_points(coords, 20, seed=7, exclude=st_exclude)
        for p in pts:
            args = [p[c] for c in coords]
            g = np.array(fn_g(*args), dtype=complex).reshape(d, d).real
            got = np.array(fn_inv(*args), dtype=complex).reshape(d, d).real
            want = np.linalg.inv(g)
            assert np.max(np.abs(got - want) / (1.0 + np.abs(want))) < 1e-9

    def test_sparling_tod_theta_block(self, sparling_tod):
        """The c/rho potential gives the rank-one block 2c v_i v_j / rho^3."""
        s = sparling_tod
        rho = parse("y1*x2 - y2*x1")
        v = [sym("x2"), neg(sym("x1"))]  # d(rho)/dy^i
        coords = list(s.chart.coords)
        resid = []
        for i in range(2):
            for j in range(2):
                want = mul(4, v[i], v[j], pw(rho, -3))  # 2c with c = 2
                resid.append(add(s.theta_hessian[i][j], neg(want)))
        verdict = is_zero(resid, coords, n_points=25, seed=8,
                          exclude=st_exclude)
        assert verdict.ok

    def test_rejects_bad_arguments(self):
        """Foreign variables, n < 1, and non-integer n are all rejected."""
        with pytest.raises(ValueError):
            build_normal_form(1, "x3*y1")
        with pytest.raises(ValueError):
            build_normal_form(2, "z")
        with pytest.raises(ValueError):
            build_normal_form(0, 0)
        with pytest.raises(ValueError):
            build_normal_form(True, 0)

    def test_structure_json(self, flat):
        """to_json reports n, the potential, the metric, and check outcomes."""
        report = verify_structure(flat, n_points=5)
        js = flat.to_json(report)
        assert js["n"] == 1
        assert js["theta"] == "0"
        assert parse(js["metric"][2][1]) == rational(1, 2)
        assert js["checks"]["compatibility"]["passed"] is True
        text = canonical_json(js)
        assert text == canonical_json(json.loads(text))
        assert text.endswith("\n")


class TestStructureChecks:
    def test_flat_structure_symbolic(self, flat):
        """Every identity holds exactly for the flat potential."""
        report = verify_structure(flat)
        assert report.passed
        assert all(c.symbolic for c in report.checks)
        assert len(report.checks) == 8

    def test_flat_eight_dimensional(self):
        """The n = 2 flat structure passes all checks on the 8-chart."""
        report = verify_structure(build_normal_form(2, 0))
        assert report.passed
        assert "n=2" in report.title

    def test_random_polynomial_potentials(self, poly_theta):
        """Any polynomial potential satisfies all eight identities."""
        for seed in (0, 1, 2):
            s = build_normal_form(1, poly_theta(seed))
            report = verify_structure(s, tol=1e-9)
            assert report.passed, str(report)

    def test_plane_wave_potential(self, plane_wave):
        """sinh(y1)/x1 passes all checks away from the x1 = 0 wall."""
        report = verify_structure(plane_wave, seed=4,
                                  exclude=away_from(x1=0.3))
        assert report.passed, str(report)

    def test_plane_wave_is_curved(self, plane_wave):
        """sinh(y1)/x1 is Ricci-flat but not flat: some R^a_bcd != 0."""
        g = plane_wave.metric
        coords = list(plane_wave.chart.coords)
        ric = [e for row in g.ricci() for e in row]
        assert is_zero(ric, coords, exclude=away_from(x1=0.3)).status == \
            "symbolic"
        riem = g.riemann()
        flat_r = [riem[a][b][c][d]
                  for a in range(4) for b in range(4)
                  for c in range(4) for d in range(4)]
        nonzero = [e for e in flat_r if e != ZERO]
        assert nonzero
        fn = compile_exprs(nonzero, coords)
        assert max(abs(v) for v in fn(1.5, 0.4, 0.8, -0.6)) > 1e-3

    def test_doubled_potential_block_is_still_valid(self, poly_theta):
        """Doubling the whole theta-block is the normal form of 2*theta."""
        theta = poly_theta(21)
        s = build_normal_form(1, theta)
        g2 = [row[:] for row in s.metric.g]
        for i in range(2):
            for j in range(2):
                g2[i][j] = simplify(mul(2, s.metric.g[i][j]))
        doubled = NullKahlerStructure(
            n=1, theta=s.theta, chart=s.chart, metric=Metric(s.chart, g2),
            endomorphism=s.endomorphism,
            fundamental_form=s.fundamental_form,
            theta_hessian=s.theta_hessian)
        report = verify_structure(doubled, n_points=30)
        assert report.passed  # it is build_normal_form(1, 2*theta) in disguise

    def test_corrupted_block_entry_fails_parallelism(self):
        """Scaling a single Hessian entry breaks nabla N = 0 with a witness."""
        s = build_normal_form(1, "y1*y1*y2*y2")
        g2 = [row[:] for row in s.metric.g]
        g2[0][0] = simplify(mul(2, s.metric.g[0][0]))
        bad = NullKahlerStructure(
            n=1, theta=s.theta, chart=s.chart, metric=Metric(s.chart, g2),
            endomorphism=s.endomorphism,
            fundamental_form=s.fundamental_form,
            theta_hessian=s.theta_hessian)
        report = verify_structure(bad, n_points=30)
        check = report["parallel_endomorphism"]
        assert not check.passed
        assert check.max_residual > check.tolerance
        assert check.witness is not None

    def test_kernel_integrability(self, sparling_tod):
        """N([NX, NY]) = 0 identically: the image distribution integrates."""
        assert all(r == ZERO
                   for r in kernel_integrability_residuals(sparling_tod))

    def test_scalar_curvature_symbolically_zero(self, poly_theta):
        """The scalar curvature cancels exactly for ten random potentials."""
        coords = chart_names(1)
        for seed in range(10):
            s = build_normal_form(
                1, poly_theta(100 + seed, degree=3, terms=5))
            verdict = is_zero([s.metric.scalar_curvature()], coords)
            assert verdict.status == "symbolic"

    def test_volume_degeneracy_n2(self):
        """For n = 2 the form satisfies Omega^2 != 0 but Omega^3 = 0."""
        s = build_normal_form(2, 0)
        om = s.fundamental_form
        sq = om.wedge(om)
        assert not sq.is_zero_form()
        assert sq.wedge(om).is_zero_form()

    def test_determinant_independent_of_theta(self, poly_theta, sparling_tod):
        """det g = 1/16 for every n = 1 potential."""
        s = build_normal_form(1, poly_theta(22))
        for struct in (s, sparling_tod):
            assert simplify(sym_det(struct.metric.g)) == rational(1, 16)

    def test_fundamental_form_self_dual(self, poly_theta):
        """star(Omega) = +Omega in the orientation fixed by the normal form."""
        for theta in (poly_theta(23), parse("sinh(y1)/x1")):
            s = build_normal_form(1, theta)
            starred = star_two_form(s.metric, s.fundamental_form)
            resid = [add(starred.comps.get(pair, ZERO), neg(val))
                     for pair, val in s.fundamental_form.comps.items()]
            resid += [val for pair, val in starred.comps.items()
                      if pair not in s.fundamental_form.comps]
            verdict = is_zero(resid, chart_names(1),
                              exclude=away_from(x1=0.3))
            assert verdict.ok


class TestCurvatureCrossChecks:
    def test_christoffel_matches_finite_differences(self, sparling_tod):
        """Symbolic Gamma agrees with central differences to 1e-5 relative."""
        s = sparling_tod
        coords = list(s.chart.coords)
        gam = s.metric.christoffel()
        fn = compile_exprs(
            [gam[a][b][c] for a in range(4) for b in range(4)
             for c in range(4)], coords)
        pts = sample_points(coords, 5, seed=9,
                            exclude=lambda p: st_exclude(p, radius=1.0))
        for p in pts:
            args = [p[c] for c in coords]
            want = np.array(fn(*args), dtype=complex).reshape(4, 4, 4).real
            got = fd_christoffel(s.metric, args, h=1e-4)
            assert np.max(np.abs(got - want) / (1.0 + np.abs(want))) < 1e-5

    def test_ricci_flat_eight_dimensional(self):
        """Theta = 1/rho^3 on the n = 2 chart is Ricci-flat but curved."""
        names = chart_names(2)
        xs, ys = names[:4], names[4:]
        w = omega_matrix(2)
        rho = add(*[mul(w[i][j], sym(ys[i]), sym(xs[j]))
                    for i in range(4) for j in range(4) if w[i][j]])
        s = build_normal_form(2, pw(rho, -3))
        fn_rho = compile_exprs([rho], names)
        rng = np.random.default_rng(5)
        found, curved = 0, 0.0
        while found < 10:
            p = rng.uniform(-2.0, 2.0, size=8)
            if abs(fn_rho(*p)[0]) < 1.5:
                continue
            found += 1
            tables = fd_curvature_oracle(s.metric, p, h=1e-3)
            assert np.max(np.abs(tables["ricci"])) < 1e-6
            curved = max(curved, float(np.max(np.abs(tables["riemann"]))))
        assert curved > 1e-3

    def test_sparling_tod_weyl_is_anti_self_dual(self, sparling_tod):
        """C+ = 0 for the c/rho metric while C- carries the curvature."""
        cp, cm = weyl_split(sparling_tod.metric)
        coords = list(sparling_tod.chart.coords)
        verdict = is_zero([e for row in cp for e in row], coords,
                          n_points=20, tol=1e-7, seed=2, exclude=st_exclude)
        assert verdict.ok
        fn = compile_exprs([e for row in cm for e in row], coords)
        assert max(abs(v) for v in fn(1.3, 0.7, -0.9, 1.1)) > 1e-3

    def test_cubic_potential_weyl_is_self_dual(self):
        """C- = 0 whenever theta is cubic in the y-variables."""
        s = build_normal_form(1, "x1*y1*y1*y2 + x2*y2*y2*y2 + y1*y1*y1")
        cp, cm = weyl_split(s.metric)
        verdict = is_zero([e for row in cm for e in row],
                          chart_names(1), n_points=20, tol=1e-7, seed=3)
        assert verdict.ok

    def test_quartic_potential_weyl_not_self_dual(self):
        """A quartic pure-y potential has C- != 0."""
        s = build_normal_form(1, "y1*y1*y1*y1")
        _, cm = weyl_split(s.metric)
        fn = compile_exprs([e for row in cm for e in row], chart_names(1))
        assert max(abs(v) for v in fn(0.5, -0.3, 0.8, 0.2)) > 1e-3


class TestGaugeFreedom:
    def test_pure_potential_shift(self, poly_theta):
        """H = 0, T = 0 leaves coordinates fixed and adds y^i Q_i + R."""
        s = build_normal_form(1, poly_theta(31))
        gt = gauge_transform(s, 0, None, ["x1", "x2"], "x1*x2", sym("eps"))
        want = parse("y1*x1 + y2*x2 + x1*x2")
        assert simplify(add(gt.delta_theta, neg(want))) == ZERO
        for name in s.chart.coords:
            assert gt.generator[name] == ZERO
            assert gt.new_coordinates[name] == sym(name)
        # the metric cannot see a shift that is affine in y
        for yi in ("y1", "y2"):
            for yj in ("y1", "y2"):
                assert diff(diff(gt.delta_theta, yi), yj) == ZERO

    def test_cubic_term_from_hamiltonian(self):
        """H = x1^2 x2 on the flat structure produces delta = y1^2 y2."""
        s = build_normal_form(1, 0)
        gt = gauge_transform(s, "x1*x1*x2", None, None, 0, sym("eps"))
        assert simplify(add(gt.delta_theta, neg(parse("y1*y1*y2")))) == ZERO

    def test_quadratic_hamiltonian_is_linear_symplectic(self):
        """H = x1 x2 moves coordinates linearly and leaves theta = 0 fixed."""
        s = build_normal_form(1, 0)
        gt = gauge_transform(s, "x1*x2", None, None, 0, sym("eps"))
        assert gt.delta_theta == ZERO
        assert gt.generator["x1"] == sym("x1")
        assert simplify(add(gt.generator["x2"], sym("x2"))) == ZERO
        assert gt.generator["y1"] == sym("y1")
        assert simplify(add(gt.generator["y2"], sym("y2"))) == ZERO
        d3 = gauge_defect(s, "x1*x2", None, None, 0, 1e-3, n_points=10)
        d4 = gauge_defect(s, "x1*x2", None, None, 0, 1e-4, n_points=10)
        assert 80.0 < d3 / d4 < 120.0

    def test_defect_scales_quadratically(self, poly_theta):
        """The pulled-back metric matches to O(eps^2): ratio near 100."""
        s = build_normal_form(1, poly_theta(32, degree=3, terms=4))
        args = ("x1*x1*x1 + x1*x2*x2", ["x2", "x1*x1"], ["x1", "0"],
                "x1*x2*x2")
        d3 = gauge_defect(s, *args, 1e-3, n_points=10, seed=1)
        d4 = gauge_defect(s, *args, 1e-4, n_points=10, seed=1)
        assert d3 > 0
        assert 80.0 < d3 / d4 < 120.0

    def test_transport_included_in_delta(self, poly_theta):
        """delta_theta includes Y(theta): dropping it leaves an O(eps) error."""
        s = build_normal_form(1, poly_theta(33, degree=3, terms=4))
        gt = gauge_transform(s, "x1*x1*x2", None, None, 0, sym("eps"))
        transport = add(*[mul(gt.generator[c], diff(s.theta, c))
                          for c in s.chart.coords])
        assert simplify(transport) != ZERO
        leftover = simplify(add(gt.delta_theta, neg(transport)))
        assert simplify(add(leftover, neg(parse("y1*y1*y2")))) == ZERO

    def test_rejects_y_dependent_data(self, flat):
        """Gauge data must be functions of the x-variables only."""
        with pytest.raises(ValueError, match="x-variables"):
            gauge_transform(flat, "y1", None, None, 0, 1)
        with pytest.raises(ValueError, match="x-variables"):
            gauge_transform(flat, 0, ["y2", "0"], None, 0, 1)
        with pytest.raises(ValueError, match="x-variables"):
            gauge_transform(flat, 0, None, ["0", "y1"], 0, 1)
        with pytest.raises(ValueError, match="x-variables"):
            gauge_transform(flat, 0, None, None, "y1", 1)

    def test_rejects_wrong_lengths(self, flat):
        """T and Q must each supply 2n components."""
        with pytest.raises(ValueError, match="2 components"):
            gauge_transform(flat, 0, ["x1"], None, 0, 1)
        with pytest.raises(ValueError, match="2 components"):
            gauge_transform(flat, 0, None, ["x1", "x2", "x1"], 0, 1)


class TestConformalRescaling:
    def test_identity_factor(self, poly_theta):
        """F = 1 returns the original pair and the check passes exactly."""
        s = build_normal_form(1, poly_theta(41))
        rc = restricted_conformal_rescale(s, 1)
        assert rc.passed and rc.parallel_check.symbolic
        for a in range(4):
            for b in range(4):
                assert simplify(add(rc.metric.g[a][b],
                                    neg(s.metric.g[a][b]))) == ZERO
        assert rc.fundamental_form.comps == s.fundamental_form.comps

    def test_x_dependent_factor_passes(self, poly_theta):
        """F = exp(x1) keeps F^3 Omega parallel for the F^2 g connection."""
        s = build_normal_form(1, poly_theta(42))
        rc = restricted_conformal_rescale(s, "exp(x1)", tol=1e-9)
        assert rc.passed, str(rc.parallel_check)

    def test_scaled_objects(self, flat):
        """The rescaled pair is exactly (F^2 g, F^3 Omega)."""
        F = parse("x1*x1 + 1")
        rc = restricted_conformal_rescale(flat, F)
        assert rc.passed
        for a in range(4):
            for b in range(4):
                want = mul(pw(F, 2), flat.metric.g[a][b])
                assert simplify(add(rc.metric.g[a][b], neg(want))) == ZERO
        want = mul(pw(F, 3), rational(1, 2))
        got = rc.fundamental_form.comps[(0, 1)]
        assert simplify(add(got, neg(want))) == ZERO

    def test_y_dependent_factor_fails(self, poly_theta):
        """F = exp(y1) breaks parallelism: the check fails with a witness."""
        s = build_normal_form(1, poly_theta(43))
        rc = restricted_conformal_rescale(s, "exp(y1)", seed=1)
        assert not rc.passed
        assert rc.parallel_check.witness is not None

    def test_requires_n_equal_one(self):
        """Rescaling is only defined for the four-dimensional normal form."""
        with pytest.raises(ValueError, match="n = 1"):
            restricted_conformal_rescale(build_normal_form(2, 0), "exp(x1)")

    def test_rejects_foreign_variables(self, flat):
        """A factor in variables off the chart is an error, not a failure."""
        with pytest.raises(ValueError, match="outside the chart"):
            restricted_conformal_rescale(flat, "exp(t)")


def _block_pair(a_matrix):
    """Partner family for N1 = [[0, I], [0, 0]]: N2 = [[A, A^2], [-I, -A]]."""
    a = np.array(a_matrix, dtype=object)
    a2 = a @ a
    top = np.hstack([a, a2])
    bottom = np.hstack([-np.eye(2, dtype=object), -a])
    return np.vstack([top, bottom]).tolist()


class TestPseudoQuaternionic:
    N1 = [[0, 0, 1, 0],
          [0, 0, 0, 1],
          [0, 0, 0, 0],
          [0, 0, 0, 0]]

    def test_partner_recovered_by_linear_solve(self):
        """numpy's least-squares partner for N1 is [[0, 0], [-I, 0]]."""
        a = np.array(self.N1, dtype=float)
        k = np.kron(a, np.eye(4)) + np.kron(np.eye(4), a.T)
        sol, *_ = np.linalg.lstsq(k, -np.eye(4).reshape(-1), rcond=None)
        x = sol.reshape(4, 4)
        want = np.array(_block_pair([[0, 0], [0, 0]]), dtype=float)
        assert np.max(np.abs(x - want)) < 1e-12
        assert np.max(np.abs(x @ x)) < 1e-12

    def test_standard_pair(self):
        """The canonical pair yields I^2 = -Id, S^2 = T^2 = Id exactly."""
        trip = pseudo_quaternionic_triple(
            self.N1, _block_pair([[0, 0], [0, 0]]))
        assert trip.passed
        assert all(c.symbolic for c in trip.report.checks)
        assert len(trip.report.checks) == 9
        one = Fraction(1)
        assert trip.I == [[0, 0, one, 0], [0, 0, 0, one],
                          [-one, 0, 0, 0], [0, -one, 0, 0]]
        assert trip.S == [[0, 0, one, 0], [0, 0, 0, one],
                          [one, 0, 0, 0], [0, one, 0, 0]]
        assert trip.T == [[-one, 0, 0, 0], [0, -one, 0, 0],
                          [0, 0, one, 0], [0, 0, 0, one]]

    def test_partner_family(self):
        """Every N2 = [[A, A^2], [-I, -A]] anticommutes correctly with N1."""
        rng = np.random.default_rng(6)
        for _ in range(3):
            a = rng.integers(-3, 4, size=(2, 2)).tolist()
            trip = pseudo_quaternionic_triple(self.N1, _block_pair(a))
            assert trip.passed

    def test_exact_rational_arithmetic(self):
        """Fraction-valued pairs are accepted and checked exactly."""
        half = Fraction(1, 2)
        n1 = [[0, 0, half, 0], [0, 0, 0, half],
              [0, 0, 0, 0], [0, 0, 0, 0]]
        n2 = [[0, 0, 0, 0], [0, 0, 0, 0],
              [-2, 0, 0, 0], [0, -2, 0, 0]]
        trip = pseudo_quaternionic_triple(n1, n2)
        assert trip.passed
        assert trip.I[0][2] == half
        assert isinstance(trip.T[0][0], Fraction)

    def test_rejects_bad_pairs(self):
        """Violated preconditions raise with a pointed message."""
        with pytest.raises(ValueError, match="minus the identity"):
            pseudo_quaternionic_triple(self.N1, self.N1)
        eye = np.eye(4, dtype=int).tolist()
        with pytest.raises(ValueError, match="square to zero"):
            pseudo_quaternionic_triple(eye, self.N1)
        with pytest.raises(ValueError, match="square matrix"):
            pseudo_quaternionic_triple([[0, 1]], [[0, 1]])
        with pytest.raises(ValueError, match="same dimension"):
            pseudo_quaternionic_triple(self.N1, [[0, 1], [0, 0]])
