import math
import pathlib

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from mellinbarnes.laplace_american import (
    AmericanConstants,
    LaplaceSymbol,
    UnreliableInversionError,
    _invl_w_pow_over_p,
    _sqrt,
    american_kernel_oracle,
    american_kernel_series,
    boundary_symbol,
    exercise_boundary,
    f_power,
    f_shifted,
    format_golden_line,
    inverse_laplace,
    laguerre_coefficients,
    laguerre_gen,
    parse_golden_line,
    regularized_gamma_p,
    talbot_inverse,
    vertical_inverse,
)
from mellinbarnes.special_functions import PoleError

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"
CONSTS = AmericanConstants.from_rates(0.1, 0.3)


# ---------------------------------------------------------------------------
# constants and closed forms
# ---------------------------------------------------------------------------

def test_constants_from_rates():
    c = CONSTS
    assert c.gamma_c == pytest.approx(2 * 0.1 / 0.09, rel=1e-15)
    assert c.a == pytest.approx((1 + c.gamma_c) / 2, rel=1e-15)
    assert c.b == pytest.approx((1 - c.gamma_c) / 2, rel=1e-15)
    assert abs(c.a * c.a - c.b * c.b - c.gamma_c) <= 1e-14 * c.a * c.a


def test_constants_invalid():
    with pytest.raises(ValueError):
        AmericanConstants.from_rates(0.0, 0.3)
    with pytest.raises(ValueError):
        AmericanConstants(gamma_c=1.0, a=2.0, b=0.5)  # a^2 != b^2 + gamma


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.5), st.floats(min_value=0.01, max_value=2.0))
def test_constants_identity_property(r, sigma):
    c = AmericanConstants.from_rates(r, sigma)
    assert abs(c.a * c.a - (c.b * c.b + c.gamma_c)) <= 1e-14 * max(1.0, c.a * c.a)


def test_f_power_values():
    assert f_power(1.0, 0.5) == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-14)
    for x in (0.2, 1.0, 3.7):
        assert f_power(x, 0.5) == pytest.approx(1.0 / math.sqrt(math.pi * x), rel=1e-14)
        assert f_power(x, 1.0) == pytest.approx(1.0, rel=1e-14)
        assert f_power(x, 2.0) == pytest.approx(x, rel=1e-14)
    with pytest.raises(PoleError):
        f_power(1.0, 0.0)
    with pytest.raises(PoleError):
        f_power(1.0, -2.0)


def test_laguerre_low_orders():
    # l_0 = x^nu; l_1 = nu x^{nu-1} - alpha x^nu (derivative convention)
    for alpha in (0.0, 0.5, 1.3):
        for nu in (0.5, 2.0, 3.7):
            for x in (0.4, 1.7):
                assert laguerre_gen(0, alpha, x, nu) == pytest.approx(x**nu, rel=1e-14)
                want1 = nu * x ** (nu - 1.0) - alpha * x**nu
                assert laguerre_gen(1, alpha, x, nu) == pytest.approx(want1, rel=1e-13)
    # n=2, alpha=0, nu=2: second derivative of x^2 is the constant 2
    assert laguerre_gen(2, 0.0, 1.9, 2.0) == pytest.approx(2.0, rel=1e-14)


def test_laguerre_coefficient_recurrence():
    # L_{n+1} = d/dx L_n translates to l_{n+1} = l_n' - alpha l_n on coefficients
    alpha, nu = 0.7, 2.5
    for n in range(6):
        cur = dict(laguerre_coefficients(n, alpha, nu))
        nxt = dict(laguerre_coefficients(n + 1, alpha, nu))
        derived: dict = {}
        for k, c in cur.items():
            derived[k] = derived.get(k, 0.0) - alpha * c
            derived[k + 1] = derived.get(k + 1, 0.0) + (nu - k) * c
        derived = {k: v for k, v in derived.items() if v != 0.0}
        assert set(derived) == set(nxt)
        for k in derived:
            assert derived[k] == pytest.approx(nxt[k], rel=1e-13)


def test_f_shifted_closed_forms():
    for x in (0.3, 1.0, 4.2):
        assert f_shifted(0, 1.0, 0.5, x) == pytest.approx(
            math.exp(-x) / math.sqrt(math.pi * x), rel=1e-13)
        assert f_shifted(0, 0.0, 1.5, x) == pytest.approx(f_power(x, 1.5), rel=1e-13)


def test_f_shifted_against_bromwich():
    sym = LaplaceSymbol(func=lambda p: p / (p + 1.0) ** 3, mu=1.0)
    got = inverse_laplace(sym, 1.0, tol=1e-9).value
    assert f_shifted(1, 1.0, 3.0, 1.0) == pytest.approx(got, abs=1e-8)


def test_laplace_identity_fixes_sign_convention():
    # this grid is the test that freezes the Laguerre sign convention
    for (n, nu) in [(1, 3.0), (2, 4.0), (3, 5.0)]:
        for alpha in (0.5, 1.0):
            for x in (0.5, 1.0, 2.0):
                sym = LaplaceSymbol(func=lambda p, n=n, a=alpha, v=nu: p**n / (p + a) ** v, mu=1.0)
                want = inverse_laplace(sym, x, tol=1e-9).value
                assert f_shifted(n, alpha, nu, x) == pytest.approx(want, abs=1e-7, rel=1e-7)


# ---------------------------------------------------------------------------
# Bromwich machinery
# ---------------------------------------------------------------------------

def test_inverse_laplace_basics():
    one_over_p = LaplaceSymbol(func=lambda p: 1 / p, mu=1.0)
    res = inverse_laplace(one_over_p, 2.0)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.spread < 1e-9
    inv_sqrt = LaplaceSymbol(func=lambda p: 1 / _sqrt(p), mu=1.0)
    assert inverse_laplace(inv_sqrt, 1.0).value == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    ramp = LaplaceSymbol(func=lambda p: 1 / p**2, mu=1.0)
    assert inverse_laplace(ramp, 2.5).value == pytest.approx(2.5, rel=1e-11)


def test_inverse_laplace_detects_branch_right_of_talbot_contour():
    # sqrt branch point at p = 5 lies right of the Talbot contour for x = 4
    # (rightmost point 2M/(5x) = 4.8) but left of the vertical line at mu = 6:
    # the methods disagree and the oracle refuses
    sym = LaplaceSymbol(func=lambda p: 1 / (p * _sqrt(p - 5.0)), mu=6.0, mu_min=5.0)
    with pytest.raises(UnreliableInversionError):
        inverse_laplace(sym, 4.0)


def test_talbot_and_vertical_agree_on_decaying_kernel():
    f = lambda p: 1 / _sqrt(p + 1.0)
    for x in (0.1, 1.0, 2.5, 10.0):
        want = math.exp(-x) / math.sqrt(math.pi * x)
        assert talbot_inverse(f, x) == pytest.approx(want, rel=1e-12)
        # the vertical method's error scale is set by e^{mu x}, so its
        # *relative* accuracy degrades as the value decays at large x
        assert vertical_inverse(f, x, mu=1.0) == pytest.approx(want, rel=1e-6, abs=1e-9)


def test_regularized_gamma_p_against_mpmath():
    for s in (0.5, 1.0, 1.7, 3.0, 7.5, 12.0):
        for x in (0.05, 0.5, 1.0, 2.6, 8.0, 30.0):
            want = float(mpmath.gammainc(s, 0, x, regularized=True))
            assert regularized_gamma_p(s, x) == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_invl_w_pow_over_p_against_bromwich():
    a = 1.3
    for k in (0, 1, 2, 3, 4, 5):
        sym = LaplaceSymbol(
            func=lambda p, k=k: _sqrt(p + a * a) ** k / p, mu=max(1.0, a * a + 1.0))
        for tau in (0.4, 1.0):
            want = talbot_inverse(sym.func, tau)
            assert _invl_w_pow_over_p(k, tau, a) == pytest.approx(want, rel=1e-9)


# ---------------------------------------------------------------------------
# American kernel
# ---------------------------------------------------------------------------

def test_kernel_series_matches_oracle_grid():
    for tau in (0.25, 1.0):
        for n in (1, 2, 3):
            for m in (1, 2, 3):
                s = american_kernel_series(n, m, tau, CONSTS, tol=1e-12)
                o = american_kernel_oracle(n, m, tau, CONSTS)
                assert s.converged
                assert abs(s.value - o) / abs(o) <= 1e-4, (n, m, tau)


def test_kernel_series_other_rate_regimes():
    # gamma < 1 flips the sign of b (geometric ratio |b|/a larger); larger
    # order gaps exercise deeper binomial tails
    low = AmericanConstants.from_rates(0.02, 0.4)
    assert low.b > 0.0
    for (n, m, tau) in ((2, 1, 0.5), (3, 1, 1.5), (1, 2, 0.75)):
        s = american_kernel_series(n, m, tau, low, tol=1e-12)
        o = american_kernel_oracle(n, m, tau, low)
        assert s.converged
        assert s.value == pytest.approx(o, rel=1e-6)
    s = american_kernel_series(6, 1, 2.0, CONSTS, tol=1e-12)
    o = american_kernel_oracle(6, 1, 2.0, CONSTS)
    assert s.value == pytest.approx(o, rel=1e-6)


def test_kernel_degenerate_b_zero_single_term():
    # 2r = sigma^2 -> gamma = 1, b = 0: the series collapses to its first term
    c = AmericanConstants.from_rates(0.045, 0.3)
    assert c.b == 0.0
    s = american_kernel_series(3, 1, 1.0, c)
    assert s.terms_used == 1 and s.converged
    o = american_kernel_oracle(3, 1, 1.0, c)
    assert s.value == pytest.approx(o, rel=1e-9)
    # n = m: constant kernel (-1)^m
    s11 = american_kernel_series(1, 1, 0.7, c)
    assert s11.value == pytest.approx(-1.0, abs=1e-15)


def test_kernel_small_tau_limit():
    # for n > m the 1/p-smoothed transform vanishes at tau -> 0+
    for (n, m) in ((2, 1), (3, 1), (3, 2)):
        v = american_kernel_series(n, m, 1e-4, CONSTS).value
        assert abs(v) < 5e-2
        v2 = american_kernel_series(n, m, 1e-6, CONSTS).value
        assert abs(v2) < abs(v)


def test_kernel_derivative_consistency():
    # d/dtau of the kernel matches inversion without the 1/p factor
    n, m, tau = 2, 1, 1.0
    g, a2, b = CONSTS.gamma_c, CONSTS.a ** 2, CONSTS.b

    def phi_no_smoothing(p):
        w = _sqrt(p + a2)
        return (p + g) ** m / ((b + w) ** n * (b - w) ** m)

    want = talbot_inverse(phi_no_smoothing, tau)
    h = 1e-3
    fd = (american_kernel_series(n, m, tau + h, CONSTS).value
          - american_kernel_series(n, m, tau - h, CONSTS).value) / (2 * h)
    assert fd == pytest.approx(want, abs=1e-4, rel=1e-4)


def test_kernel_series_tol_scaling():
    for tol in (1e-6, 1e-7):
        a = american_kernel_series(2, 1, 1.0, CONSTS, tol=tol).value
        b = american_kernel_series(2, 1, 1.0, CONSTS, tol=tol / 10.0).value
        assert abs(a - b) < 10.0 * tol


def test_kernel_input_validation():
    with pytest.raises(ValueError):
        american_kernel_series(0, 1, 1.0, CONSTS)
    with pytest.raises(ValueError):
        american_kernel_oracle(1, 1, -1.0, CONSTS)


# ---------------------------------------------------------------------------
# exercise boundary
# ---------------------------------------------------------------------------

def test_boundary_dual_method_agreement_and_monotonicity():
    taus = [0.05, 0.1, 0.25, 0.5, 1.0]
    values = []
    for tau in taus:
        inv = exercise_boundary(tau, 0.1, 0.3)
        assert abs(inv.talbot - inv.vertical) / abs(inv.talbot) <= 1e-5
        values.append(inv.value)
    for earlier, later in zip(values, values[1:]):
        assert later <= earlier + 1e-6


def test_boundary_limits():
    # tau -> 0+: approaches 1 (value at expiry, units of strike); this limit
    # study sits below the dual-method range, so it uses the Talbot oracle
    phi = boundary_symbol(0.1, 0.3).func
    b_small = talbot_inverse(phi, 0.01)
    b_tiny = talbot_inverse(phi, 0.002)
    assert 0.7 < b_small < 1.0
    assert b_small < b_tiny < 1.0
    # tau -> inf: perpetual boundary gamma/(1+gamma)
    g = CONSTS.gamma_c
    assert talbot_inverse(phi, 60.0) == pytest.approx(g / (1 + g), abs=1e-6)


def test_boundary_symbol_large_p_normalization():
    # p phi(p) -> 1 as p -> +inf: boundary value 1 at expiry
    phi = boundary_symbol(0.1, 0.3).func
    assert complex(1e8 * phi(complex(1e8, 0.0))).real == pytest.approx(1.0, abs=1e-3)


def test_boundary_branch_check_clean_for_valid_rates():
    for (r, sigma) in ((0.1, 0.3), (0.02, 0.4), (0.3, 0.2)):
        inv = exercise_boundary(0.5, r, sigma)
        assert inv.value > 0.0


# ---------------------------------------------------------------------------
# golden records
# ---------------------------------------------------------------------------

def test_golden_line_round_trip():
    params = {"n": 1.0, "m": 2.0, "tau": 0.25, "r": 0.1, "sigma": 0.3}
    line = format_golden_line(params, -0.781061, "talbot+vertical", 1e-5)
    back, value, method, tol = parse_golden_line(line)
    assert back == params and value == -0.781061
    assert method == "talbot+vertical" and tol == 1e-5


def test_golden_kernel_regression():
    path = GOLDEN_DIR / "american_kernel.txt"
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        params, value, method, tol = parse_golden_line(line)
        c = AmericanConstants.from_rates(params["r"], params["sigma"])
        got = american_kernel_oracle(int(params["n"]), int(params["m"]), params["tau"], c)
        assert got == pytest.approx(value, rel=tol)


def test_golden_boundary_regression():
    path = GOLDEN_DIR / "exercise_boundary.txt"
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        params, value, method, tol = parse_golden_line(line)
        got = exercise_boundary(params["tau"], params["r"], params["sigma"]).value
        assert got == pytest.approx(value, rel=tol)
