#include "pscur/quad.hpp"
#include "pscur/form.hpp"
#include "support/radial.hpp"

#include <doctest.h>

using namespace pscur;

namespace {

Integrand scalar_integrand(const ExprPtr& e, int cdim) {
    Integrand ig;
    ig.tape = Tape::compile(e, cdim);
    ig.cdim = cdim;
    return ig;
}

}  // namespace

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
    const auto& [x, w] = gauss_legendre(8);
    double s = 0.0, s6 = 0.0;
    for (int i = 0; i < 8; ++i) {
        s += w[i];
        s6 += w[i] * std::pow(x[i], 6);
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s6 == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("normalized bump area form integrates to one") {
    // density (3/4) pi R^2 for a radius-R ball bump; normalize by it
    double R = 1.0;
    ExprPtr b = ex_bump(1, {{0.0, 0.0}}, R);
    double mass_exact = 0.75 * M_PI * R * R;
    Integrand ig = scalar_integrand(ex_scale({1.0 / mass_exact, 0.0}, b), 1);
    // the raw integral of a (0,0) coefficient over C needs the dz^dzbar slot;
    // here we integrate the plain Lebesgue density, measure factor 1
    QuadSpec spec;
    spec.order = 8;
    spec.est_order = 4;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-9;
    QuadResult r = integrate(ig, Box::centered(1, 1.05), spec, 1);
    CHECK(r.value.real() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(r.value.imag()) < 1e-12);
    CHECK(r.estimate < 1e-6);
    CHECK(!r.flagged);
}

TEST_CASE("ddc log(|z|^2+eps) against the exact radial antiderivative") {
    for (double eps : {0.2, 0.05}) {
        Poly z = Poly::variable(1, 0);
        ExprPtr u = ex_log(ex_add(ex_const({eps, 0.0}), ex_mul(ex_poly(z), ex_poly_conj(z))));
        FormExpr w = form_ddc(1, u);
        ExprPtr phi = ex_bump(1, {{0.0, 0.0}}, 0.8);
        ExprPtr top = w.scaled(phi).top_coefficient();
        Integrand ig = scalar_integrand(top, 1);
        ig.measure = {0.0, -2.0};  // dz^dzbar -> Lebesgue
        QuadSpec spec;
        spec.abs_tol = 1e-9;
        spec.rel_tol = 1e-8;
        QuadResult r = integrate(ig, Box::centered(1, 0.85), spec, 1);
        double expect = oracle::simpson(
            [&](double rr) {
                double b = 1.0 - cutoff::chi(2.0 * rr * rr / 0.64);
                return b * eps / (M_PI * std::pow(rr * rr + eps, 2)) * 2 * M_PI * rr;
            },
            0.0, 0.85, 1e-12);
        CHECK(r.value.real() == doctest::Approx(expect).epsilon(1e-6));
        CHECK(r.estimate < 1e-5);
    }
}

TEST_CASE("linearity and box additivity on smooth integrands") {
    ExprPtr b = ex_bump(1, {{0.1, 0.0}}, 0.7);
    Poly z = Poly::variable(1, 0);
    ExprPtr f = ex_mul(b, ex_add(ex_one(), ex_mul(ex_poly(z), ex_poly_conj(z))));
    QuadSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-12;
    Box whole = Box::centered(1, 1.0);
    Box left = whole, right = whole;
    left.iv[0].hi = 0.0;
    right.iv[0].lo = 0.0;
    QuadResult rw = integrate(scalar_integrand(f, 1), whole, spec, 1);
    QuadResult rl = integrate(scalar_integrand(f, 1), left, spec, 1);
    QuadResult rr = integrate(scalar_integrand(f, 1), right, spec, 1);
    CHECK(std::abs(rw.value - rl.value - rr.value) <= 1e-12 * std::abs(rw.value));

    QuadResult r2 = integrate(scalar_integrand(ex_scale({2.0, 0.5}, f), 1), whole, spec, 1);
    CHECK(std::abs(r2.value - std::complex<double>{2.0, 0.5} * rw.value) <=
          1e-12 * std::abs(r2.value));
}

TEST_CASE("results are identical across worker counts") {
    std::vector<Poly> psi = {Poly::variable(2, 0), Poly::variable(2, 1)};
    ExprPtr s = ex_norm_sq(psi);
    double eps = 0.01;
    ExprPtr integrand = ex_mul(ex_chi(ex_scale({1.0 / eps, 0.0}, s), 1),
                               ex_bump(2, {{0, 0}, {0, 0}}, 1.0));
    Integrand ig = scalar_integrand(integrand, 2);
    ShellConstraint sc;
    sc.norm_sq = Tape::compile(s, 2);
    sc.kind = ShellKind::ChiPrime;
    sc.eps_fixed = eps;
    ig.shells.push_back(std::move(sc));
    QuadSpec spec;
    spec.order = 6;
    spec.est_order = 3;
    spec.abs_tol = 1e-8;
    spec.rel_tol = 1e-6;
    Box box = Box::centered(2, 1.1);
    QuadResult r1 = integrate(ig, box, spec, 1);
    QuadResult r8 = integrate(ig, box, spec, 8);
    CHECK(r1.value.real() == r8.value.real());
    CHECK(r1.value.imag() == r8.value.imag());
    CHECK(r1.estimate == r8.estimate);
    CHECK(r1.cells == r8.cells);
    CHECK(r1.cells > 8);  // the shell actually drove refinement
}

TEST_CASE("budget exhaustion is flagged, never silent") {
    std::vector<Poly> psi = {Poly::variable(2, 0), Poly::variable(2, 1)};
    ExprPtr s = ex_norm_sq(psi);
    double eps = 1e-5;
    ExprPtr integrand = ex_chi(ex_scale({1.0 / eps, 0.0}, s), 1);
    Integrand ig = scalar_integrand(integrand, 2);
    ShellConstraint sc;
    sc.norm_sq = Tape::compile(s, 2);
    sc.kind = ShellKind::ChiPrime;
    sc.eps_fixed = eps;
    ig.shells.push_back(std::move(sc));
    QuadSpec spec;
    spec.order = 3;
    spec.est_order = 2;
    spec.max_cells = 40;  // far too small for this shell
    QuadResult r = integrate(ig, Box::centered(2, 1.0), spec, 1);
    CHECK(r.flagged);
}

TEST_CASE("zero-dimensional boxes evaluate the integrand once") {
    Integrand ig = scalar_integrand(ex_const({2.5, -1.0}), 0);
    QuadSpec spec;
    QuadResult r = integrate(ig, Box{}, spec, 1);
    CHECK(r.value == std::complex<double>{2.5, -1.0});
    CHECK(r.estimate == 0.0);
}
