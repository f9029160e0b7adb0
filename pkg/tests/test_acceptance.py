"""End-to-end acceptance checks, one test per criterion.

Each test prints a single summary line with the measured margin so a
plain ``pytest -v -s tests/test_acceptance.py`` reads as a checklist.
All tolerances are hard bounds; nothing here is tuned to pass.
"""

from __future__ import annotations

import random

from conftest import grid_variation, poly, rand_problem
from hahnvar import (
    HahnParams,
    LatticePoint,
    Origin,
    Problem,
    el_report,
    el_residual,
    first_variation,
    first_variation_fd,
    functional_value,
    h_el_residual,
    hahn_derivative,
    integral,
    integral_from_fixed,
    minimize_direct,
    q_el_residual,
    sigma_cell_integral,
    sigma_pow,
)
from hahnvar.demos import (
    double_well_problem,
    random_admissible_grid,
    run_beam,
    ystar,
)


def test_01_reference_solution_minimizes_double_well():
    # the built-in candidate zeroes the integrand at every lattice node,
    # so the functional must come out exactly zero, not just small
    prob = double_well_problem()
    res = functional_value(prob, ystar)
    assert res.converged
    assert abs(res.value) <= 1e-12

    report = el_report(prob, ystar, depth=40)
    assert report.max_abs_residual <= 1e-9
    assert report.boundary_violations == []
    assert report.passed
    print(f"PASS 01 functional={res.value!r} max|residual|={report.max_abs_residual:.3e}")


def test_02_functional_is_bounded_below_on_admissible_grids():
    prob = double_well_problem()
    rng = random.Random(404)
    lo = min(
        functional_value(prob, random_admissible_grid(prob, rng, depth=48)).value
        for _ in range(100)
    )
    assert lo >= -1e-10
    print(f"PASS 02 min functional over 100 admissible grids = {lo:.6e}")


def test_03_derivative_and_integral_invert_each_other():
    # 10 parameter draws x 5 polynomials of degree <= 5; differentiate
    # the running integral back at 20 lattice points per case, and
    # integrate the derivative across the whole interval
    rng = random.Random(12345)
    worst_d = 0.0
    worst_i = 0.0
    for _ in range(10):
        q = rng.uniform(0.3, 0.9)
        omega = rng.uniform(0.2, 1.0)
        p = HahnParams(q, omega)
        w0 = p.omega0
        a = w0 - rng.uniform(1.5, 3.0)
        b = w0 + rng.uniform(1.5, 3.0)
        for _ in range(5):
            coeffs = [rng.uniform(-1.0, 1.0) for _ in range(6)]
            dcoeffs = [i * c for i, c in enumerate(coeffs)][1:]
            f = poly(coeffs)
            fprime = poly(dcoeffs)

            def F(x, p=p, f=f):
                return integral_from_fixed(p, f, x, tol=1e-12).value

            for s in (a, b):
                for n in range(10):
                    t = sigma_pow(p, n, s)
                    worst_d = max(worst_d, abs(hahn_derivative(p, F, t) - f(t)))

            # deep nodes merge with the fixed point in floats; there the
            # quotient degenerates and the classical value is the limit
            def Df(t, p=p, f=f, fprime=fprime):
                return fprime(t) if p.sigma(t) == t else hahn_derivative(p, f, t)

            res = integral(p, Df, a, b, tol=1e-12)
            worst_i = max(worst_i, abs(res.value - (f(b) - f(a))))
    assert worst_d <= 1e-8
    assert worst_i <= 1e-8
    print(f"PASS 03 worst |D[F]-f|={worst_d:.3e} worst roundtrip={worst_i:.3e}")


def test_04_operator_identities_hold_pointwise():
    rng = random.Random(5150)
    worst = {k: 0.0 for k in ("product", "quotient", "shift", "sigpow", "chain", "parts", "cell")}
    f = lambda t: 0.3 * t**3 - 0.5 * t + 0.7
    fp = lambda t: 0.9 * t**2 - 0.5
    g = lambda t: 0.2 * t**2 + 1.5
    gp = lambda t: 0.4 * t
    for _ in range(30):
        q = rng.uniform(0.3, 0.9)
        omega = rng.uniform(0.2, 1.0)
        p = HahnParams(q, omega)
        w0 = p.omega0
        t = w0 + rng.uniform(-2.0, 2.0)
        if p.sigma(t) == t:
            continue
        Df, Dg = hahn_derivative(p, f, t), hahn_derivative(p, g, t)
        st = p.sigma(t)

        prod = hahn_derivative(p, lambda s: f(s) * g(s), t)
        worst["product"] = max(worst["product"], abs(prod - (Df * g(t) + f(st) * Dg)))

        quot = hahn_derivative(p, lambda s: f(s) / g(s), t)
        worst["quotient"] = max(
            worst["quotient"], abs(quot - (Df * g(t) - f(t) * Dg) / (g(t) * g(st)))
        )

        worst["shift"] = max(worst["shift"], abs(f(st) - (f(t) + p.denominator(t) * Df)))

        it = t
        for k in range(31):
            worst["sigpow"] = max(worst["sigpow"], abs(sigma_pow(p, k, t) - it))
            it = p.sigma(it)

        chain = hahn_derivative(p, lambda s: f(p.sigma(s)), t)
        worst["chain"] = max(worst["chain"], abs(chain - q * hahn_derivative(p, f, st)))

        def Df_any(s, p=p):
            return fp(s) if p.sigma(s) == s else hahn_derivative(p, f, s)

        def Dg_any(s, p=p):
            return gp(s) if p.sigma(s) == s else hahn_derivative(p, g, s)

        a, b = w0 - rng.uniform(0.5, 2.0), w0 + rng.uniform(0.5, 2.0)
        lhs = integral(p, lambda s: f(s) * Dg_any(s), a, b).value
        rhs = (f(b) * g(b) - f(a) * g(a)) - integral(
            p, lambda s: Df_any(s) * g(p.sigma(s)), a, b
        ).value
        worst["parts"] = max(worst["parts"], abs(lhs - rhs))

        cell = sigma_cell_integral(p, f, t)
        direct = integral(p, f, st, t).value
        worst["cell"] = max(worst["cell"], abs(cell - direct))
    for name, err in worst.items():
        assert err <= 1e-10, f"{name} identity off by {err:.3e}"
    summary = " ".join(f"{k}={v:.1e}" for k, v in worst.items())
    print(f"PASS 04 {summary}")


def test_05_signed_integral_can_exceed_integral_of_abs():
    # the two-sided integral is a difference of signed series, not a
    # positive measure, so |integral of f| can beat integral of |f|;
    # a randomized search over sign tables finds a witness immediately
    rng = random.Random(31337)
    p = HahnParams(0.5, 0.5)
    w0 = p.omega0
    witness = None
    for trial in range(10_000):
        a = w0 - rng.uniform(0.5, 2.5)
        b = a + rng.uniform(0.25, 1.0)
        table: dict[float, float] = {}
        for x in (a, b):
            t = x
            for _ in range(60):
                table.setdefault(t, rng.choice((-1.0, 1.0)))
                t = p.q * t + p.omega
            table.setdefault(t, rng.choice((-1.0, 1.0)))
        signed = integral(p, lambda s: table[s], a, b, tol=1e-9)
        unsigned = integral(p, lambda s: abs(table[s]), a, b, tol=1e-9)
        if signed.converged and unsigned.converged and abs(signed.value) > unsigned.value + 1e-6:
            witness = (trial, abs(signed.value) - unsigned.value)
            break
    assert witness is not None
    print(f"PASS 05 witness at trial {witness[0]} with margin {witness[1]:.6f}")


def test_06_first_variation_matches_finite_differences():
    # both series run to the same fixed truncation so the comparison
    # sees the integrand error, not two different stopping points
    caps = {1: 25, 2: 10, 3: 5}
    rng = random.Random(2024)
    worst = 0.0
    for k in range(20):
        r = [1, 2, 3][k % 3]
        prob = rand_problem(rng, r)
        y = poly([rng.uniform(-0.5, 0.5) for _ in range(4)])
        eta = grid_variation(prob, rng, 120)
        n = caps[r]
        fv = first_variation(prob, y, eta, tol=1e-12, max_terms=n).value
        fd = first_variation_fd(prob, y, eta, eps=1e-5, tol=1e-12, max_terms=n)
        worst = max(worst, abs(fv - fd) / (1.0 + abs(fd)))
    assert worst <= 1e-6
    print(f"PASS 06 worst relative gap over 20 problems = {worst:.3e}")


def test_07_first_order_residual_agrees_with_direct_form():
    # at r=1 the general alternating-sum residual must collapse to
    # D[dL/du1] - dL/du0 evaluated independently
    rng = random.Random(1234)
    worst = 0.0
    for _ in range(20):
        q = rng.uniform(0.35, 0.7)
        omega = rng.uniform(0.3, 1.0)
        p = HahnParams(q, omega)
        w0 = p.omega0
        a, b = w0 - rng.uniform(1.0, 2.5), w0 + rng.uniform(1.0, 2.5)
        terms = [f"{rng.uniform(-0.5, 0.5)!r}*t"]
        for i in (0, 1):
            terms.append(f"{rng.uniform(-0.6, 0.6)!r}*u{i}^2")
            terms.append(f"{rng.uniform(-0.4, 0.4)!r}*u{i}")
        terms.append(f"{rng.uniform(-0.3, 0.3)!r}*u0*u1")
        prob = Problem(p, 1, a, b, (0.0,), (0.0,), " + ".join(terms))
        L = prob.lagrangian
        y = poly([rng.uniform(-0.5, 0.5) for _ in range(4)])

        def g(s, p=p, L=L, y=y):
            return L.partial(1, s, (y(p.sigma(s)), hahn_derivative(p, y, s)))

        lat = prob.lattice(64)
        for origin in (Origin.A, Origin.B):
            for n in range(5):
                pt = LatticePoint(origin, n)
                t = lat.realize(pt)
                lhs = el_residual(prob, y, pt)
                rhs = hahn_derivative(p, g, t) - L.partial(
                    0, t, (y(p.sigma(t)), hahn_derivative(p, y, t))
                )
                worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12
    print(f"PASS 07 worst two-path gap = {worst:.3e}")


def test_08_residuals_degenerate_to_limit_calculi():
    y = poly([0.3, -0.4, 0.2, 0.05])
    src = "0.5*u1^2 + 0.2*u0^2 + 0.1*t*u0"

    pq = HahnParams(0.5, 1e-8)
    prob_q = Problem(pq, 1, 1.0, 3.0, (0.0,), (0.0,), src)
    worst_q = max(
        abs(el_residual(prob_q, y, LatticePoint(o, n)) - q_el_residual(prob_q, y, LatticePoint(o, n)))
        for o in (Origin.A, Origin.B)
        for n in range(6)
    )
    assert worst_q <= 1e-5

    ph = HahnParams(1.0 - 1e-6, 0.25)
    prob_h = Problem(ph, 1, 1.0, 3.0, (0.0,), (0.0,), src)
    worst_h = max(
        abs(el_residual(prob_h, y, LatticePoint(o, n)) - h_el_residual(prob_h, y, LatticePoint(o, n)))
        for o in (Origin.A, Origin.B)
        for n in range(6)
    )
    assert worst_h <= 1e-4

    d = hahn_derivative(HahnParams(0.999, 0.001), lambda t: t**3, 2.0)
    assert abs(d - 12.0) <= 0.05
    print(f"PASS 08 dilation gap={worst_q:.3e} shift gap={worst_h:.3e} pointwise={abs(d - 12.0):.3e}")


def test_09_beam_residual_shrinks_toward_continuum():
    out = run_beam()
    residuals = [case["max_abs_residual"] for case in out["cases"]]
    assert len(residuals) == 3
    assert residuals[0] > residuals[1] > residuals[2]
    assert out["passed"]
    print("PASS 09 residuals " + " > ".join(f"{r:.6f}" for r in residuals))


def test_10_direct_minimizer_reaches_known_minima():
    quad = Problem(HahnParams(0.5, 0.5), 1, -1.0, 2.0, (0.0,), (0.0,), "u1^2")
    res_q = minimize_direct(quad, depth=12, seed=7, max_iters=5000)
    assert res_q.objective <= 1e-6

    res_w = minimize_direct(double_well_problem(), depth=12, seed=7, max_iters=5000)
    assert res_w.objective <= 1e-2
    print(f"PASS 10 quadratic={res_q.objective:.3e} double-well={res_w.objective:.3e}")
