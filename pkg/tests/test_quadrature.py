import math

import numpy as np
import pytest
from scipy import integrate

import oracles
from resrelax import (
    CutoffTooSmall,
    Envelope,
    InsufficientSamples,
    NonConvergent,
    PoleOnBoundary,
    QuadratureConfig,
    SubdivisionLimit,
    halfline_cos_transform,
    halfline_sin_transform,
    kk_real_from_imag,
    pv_integral,
    richardson_extrapolate,
)
from resrelax.quadrature import batch_halfline_transform, extrapolate_regulator


def decaying(u, eps):
    return np.exp(-np.asarray(u))


EXP_ENV = Envelope(kind="exp", amplitude=1.0, rate=1.0)


class TestHalflineTransforms:
    def test_cos_of_exponential(self):
        # int_0^inf e^-u cos(wu) du = 1 / (1 + w^2)
        for w in (0.0, 0.3, 2.0, 17.0):
            res = halfline_cos_transform(
                decaying, w, QuadratureConfig(), u_max=60.0, u_scale=1.0,
                envelope=EXP_ENV,
            )
            exact = 1.0 / (1.0 + w * w)
            assert res.value == pytest.approx(exact, rel=1e-10)
            assert abs(res.value - exact) <= 10.0 * res.error_estimate + 1e-14

    def test_sin_of_exponential(self):
        for w in (0.5, 4.0):
            res = halfline_sin_transform(
                decaying, w, QuadratureConfig(), u_max=60.0, u_scale=1.0,
                envelope=EXP_ENV,
            )
            assert res.value == pytest.approx(w / (1.0 + w * w), rel=1e-10)

    def test_power_law_tail_closed_form(self):
        # int_0^inf cos(wu)/(1+u)^2 du
        #   = 1 - w [cos w (pi/2 - Si w) + sin w Ci w]
        from scipy.special import sici

        def f(u, eps):
            return 1.0 / (1.0 + np.asarray(u)) ** 2

        w = 3.0
        si, ci = sici(w)
        exact = 1.0 - w * (math.cos(w) * (0.5 * math.pi - si)
                           + math.sin(w) * ci)
        res = halfline_cos_transform(
            f, w, QuadratureConfig(), u_max=400.0, u_scale=1.0,
            envelope=Envelope(kind="power", amplitude=1.0),
        )
        assert res.value == pytest.approx(exact, rel=1e-7)
        assert abs(res.value - exact) <= 10.0 * res.error_estimate

    def test_error_estimate_covers_truncation(self):
        # truncating a slow tail early must be reflected in the estimate
        def f(u, eps):
            return 1.0 / (1.0 + np.asarray(u)) ** 2

        res = halfline_cos_transform(
            f, 0.0, QuadratureConfig(), u_max=50.0, u_scale=1.0,
            envelope=Envelope(kind="power", amplitude=1.0),
        )
        exact = 1.0  # integral of (1+u)^-2 over the half line
        assert abs(res.value - exact) <= 2.0 * res.error_estimate

    def test_carrier_beat_handled(self):
        # f itself oscillates near the transform frequency: the effective
        # modulation is the slow beat, which the truncation bound must use
        def f(u, eps):
            u = np.asarray(u)
            return np.cos(5.0 * u) * np.exp(-0.02 * u)

        w = 4.9
        res = halfline_cos_transform(
            f, w, QuadratureConfig(), u_max=900.0, u_scale=1.0,
            envelope=Envelope(kind="exp", amplitude=1.0, rate=0.02),
            carrier=5.0,
        )
        # exact: half-sum of Lorentzians at w +- 5
        s = 0.02
        exact = 0.5 * (s / (s * s + (w - 5.0) ** 2)
                       + s / (s * s + (w + 5.0) ** 2))
        assert res.value == pytest.approx(exact, rel=1e-6)


class TestExtrapolation:
    def test_linear_sequence_recovered(self):
        samples = [(1e-2, 3.0 + 5.0 * 1e-2), (5e-3, 3.0 + 5.0 * 5e-3),
                   (2.5e-3, 3.0 + 5.0 * 2.5e-3)]
        v0, residual = richardson_extrapolate(samples)
        assert v0 == pytest.approx(3.0, abs=1e-12)
        assert residual < 1e-12

    def test_quadratic_sequence_recovered(self):
        def v(eps):
            return 2.0 - 4.0 * eps + 9.0 * eps * eps

        samples = [(e, v(e)) for e in (1e-2, 5e-3, 2.5e-3)]
        v0, residual, _ = extrapolate_regulator(samples, order=2)
        assert v0 == pytest.approx(2.0, abs=1e-13)
        # curvature shows up as disagreement with the two-point linear
        # extrapolation, and that spread is the reported uncertainty
        assert residual > 1e-9

    def test_requires_two_samples(self):
        with pytest.raises(InsufficientSamples):
            richardson_extrapolate([(1e-2, 1.0)])


class TestFailureModes:
    def test_subdivision_limit(self):
        cfg = QuadratureConfig(max_subdivisions=4, abs_tol=1e-14,
                               rel_tol=1e-13)

        def nasty(u, eps):
            return np.sin(40.0 * np.asarray(u) ** 2)

        with pytest.raises(SubdivisionLimit):
            halfline_cos_transform(
                nasty, 1.0, cfg, u_max=2000.0, u_scale=1.0,
                envelope=Envelope(kind="power", amplitude=1e6),
            )

    def test_nonconvergent_regulator(self):
        # an epsilon schedule deep in the nonlinear regime cannot be
        # extrapolated; the engine must refuse rather than guess
        from resrelax import InertialVacuum, gamma_rf

        cfg = QuadratureConfig(epsilon_schedule=(0.9, 0.45, 0.225))
        with pytest.raises(NonConvergent):
            gamma_rf(InertialVacuum(), 9.0, 1.0, cfg)


class TestPrincipalValue:
    def test_matches_cauchy_weight_oracle(self):
        def h(x):
            return 1.0 / (np.asarray(x) ** 2 + 1.0)

        for pole in (0.5, -1.2):
            ref, _ = oracles.quad_pv(lambda x: 1.0 / (x * x + 1.0), pole,
                                     -3.0, 3.0)
            res = pv_integral(h, pole, -3.0, 3.0, QuadratureConfig())
            assert res.value == pytest.approx(ref, rel=1e-9)

    def test_asymmetric_interval(self):
        def h(x):
            return np.exp(-0.3 * np.asarray(x))

        ref, _ = oracles.quad_pv(lambda x: math.exp(-0.3 * x), 1.0, 0.0, 7.0)
        res = pv_integral(h, 1.0, 0.0, 7.0, QuadratureConfig())
        assert res.value == pytest.approx(ref, rel=1e-9)

    def test_pole_on_boundary_rejected(self):
        with pytest.raises(PoleOnBoundary):
            pv_integral(lambda x: np.ones_like(x), 3.0, -3.0, 3.0,
                        QuadratureConfig())

    def test_smooth_through_pole(self):
        # h vanishing at the pole: PV integral equals the ordinary one
        def h(x):
            return np.asarray(x) - 1.0

        res = pv_integral(h, 1.0, 0.0, 2.0, QuadratureConfig())
        assert res.value == pytest.approx(2.0, rel=1e-12)


class TestDispersion:
    def test_lorentzian_pair(self):
        eta = 0.1
        cfg = QuadratureConfig(omega_cutoff=250.0 * eta)
        for w in (0.05, 0.2, 1.0):
            res = kk_real_from_imag(
                lambda x: oracles.lorentz_imag(x, eta), w, cfg
            )
            exact = float(oracles.lorentz_real(w, eta))
            assert res.value == pytest.approx(exact, rel=1e-4)
            assert abs(res.value - exact) <= 10.0 * res.error_estimate

    def test_odd_imag_gives_zero_at_origin(self):
        eta = 0.1
        cfg = QuadratureConfig(omega_cutoff=25.0)
        res = kk_real_from_imag(
            lambda x: oracles.lorentz_imag(x, eta), 0.0, cfg
        )
        assert abs(res.value) < 1e-12

    def test_requires_cutoff(self):
        with pytest.raises(CutoffTooSmall):
            kk_real_from_imag(lambda x: np.zeros_like(x), 1.0,
                              QuadratureConfig())


class TestBatch:
    def test_matches_pointwise_transform(self):
        def f(u, eps):
            return np.exp(-0.8 * np.asarray(u))

        omegas = np.array([0.3, 1.1, 2.4, 6.0])
        vals, errs = batch_halfline_transform(
            f, omegas, "cos", QuadratureConfig(), 0.0, u_max=80.0,
            u_scale=1.0, envelope=Envelope(kind="exp", amplitude=1.0,
                                           rate=0.8),
        )
        for w, v in zip(omegas, vals):
            exact = 0.8 / (0.64 + w * w)
            assert v == pytest.approx(exact, rel=1e-8)
        assert np.all(errs >= 0.0)

    def test_sin_batch_is_odd_ready(self):
        vals, _ = batch_halfline_transform(
            decaying, np.array([0.0, 1.0]), "sin", QuadratureConfig(), 0.0,
            u_max=60.0, u_scale=1.0, envelope=EXP_ENV,
        )
        assert vals[0] == pytest.approx(0.0, abs=1e-12)
        assert vals[1] == pytest.approx(0.5, rel=1e-8)


class TestEnvelope:
    def test_exponential_tail_integral(self):
        env = Envelope(kind="exp", amplitude=2.0, rate=0.5)
        assert env.integral_beyond(4.0) == pytest.approx(
            integrate.quad(lambda u: 2.0 * math.exp(-0.5 * u), 4.0,
                           np.inf)[0]
        )

    def test_power_tail_integral(self):
        env = Envelope(kind="power", amplitude=3.0)
        # amplitude / u^2 beyond U integrates to amplitude / U
        assert env.integral_beyond(6.0) == pytest.approx(0.5)

    def test_config_validation(self):
        with pytest.raises(Exception):
            QuadratureConfig(epsilon_schedule=())
        with pytest.raises(Exception):
            QuadratureConfig(abs_tol=-1.0)
