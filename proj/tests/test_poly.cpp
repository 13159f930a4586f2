#include "pscur/poly.hpp"

#include <doctest.h>

#include <random>

using namespace pscur;

namespace {

Poly random_poly(std::mt19937_64& rng, int nvars, int max_terms = 5, int max_deg = 3,
                 int coeff_range = 9) {
    std::uniform_int_distribution<int> nterms(0, max_terms);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<int> coeff(-coeff_range, coeff_range);
    std::uniform_int_distribution<int> den(1, 4);
    Poly p(nvars);
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        ExpVec ev;
        for (int v = 0; v < nvars; ++v) ev.e[v] = std::uint8_t(deg(rng));
        GaussRat c{Rational(coeff(rng), den(rng)), Rational(coeff(rng), den(rng))};
        p.add_term(ev, c);
    }
    return p;
}

std::vector<std::complex<double>> random_point(std::mt19937_64& rng, int nvars) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::complex<double>> z(nvars);
    for (auto& zi : z) zi = {u(rng), u(rng)};
    return z;
}

}  // namespace

TEST_CASE("poly parsing and evaluation") {
    auto vars = std::vector<std::string>{"z1", "z2"};
    Poly p = parse_poly("z1*z2", vars);
    CHECK(p.eval(std::vector<std::complex<double>>{{2, 0}, {3, 0}}) == std::complex<double>{6, 0});

    auto wvars = std::vector<std::string>{"w", "z1", "z2"};
    Poly q = parse_poly("w - z1*z2", wvars);
    CHECK(q.eval(std::vector<std::complex<double>>{{6, 0}, {2, 0}, {3, 0}}) ==
          std::complex<double>{0, 0});

    // root check against the factored divisor of Example-style data:
    // (z1 z2)^2 - z2^2 vanishes on z2 = 0 and z1 = +-1
    Poly r = parse_poly("(z1*z2)^2 - z2^2", vars);
    CHECK(std::abs(r.eval(std::vector<std::complex<double>>{{1, 0}, {5, 0}})) == 0.0);
    CHECK(std::abs(r.eval(std::vector<std::complex<double>>{{-1, 0}, {0.37, 0.11}})) < 1e-15);
    CHECK(std::abs(r.eval(std::vector<std::complex<double>>{{0.3, 0.4}, {0, 0}})) == 0.0);

    // rational and imaginary literals
    Poly s = parse_poly("3/2 + 2*i*z1", vars);
    auto v = s.eval(std::vector<std::complex<double>>{{1, 0}, {0, 0}});
    CHECK(v == std::complex<double>{1.5, 2.0});

    CHECK_THROWS_AS(parse_poly("z3", vars), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_poly("z1", vars).eval(std::vector<std::complex<double>>{}),
                    std::invalid_argument);
}

TEST_CASE("poly differentiation") {
    auto vars = std::vector<std::string>{"z1", "z2"};
    Poly p = parse_poly("z1^2*z2", vars);
    CHECK(p.diff(0) == parse_poly("2*z1*z2", vars));
    CHECK(parse_poly("7/3", vars).diff(1).is_zero());

    auto wvars = std::vector<std::string>{"w", "z2"};
    Poly q = parse_poly("w^2 - z2^2", wvars);
    CHECK(q.diff(0) == parse_poly("2*w", wvars));

    CHECK_THROWS_AS(p.diff(5), std::out_of_range);
}

TEST_CASE("ring axioms hold exactly on random polynomials") {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 1100; ++iter) {
        int nvars = 1 + int(rng() % 3);
        Poly a = random_poly(rng, nvars);
        Poly b = random_poly(rng, nvars);
        Poly c = random_poly(rng, nvars);
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * b == b * a);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
    }
}

TEST_CASE("degree is additive and evaluation commutes with arithmetic") {
    std::mt19937_64 rng(43);
    for (int iter = 0; iter < 300; ++iter) {
        int nvars = 1 + int(rng() % 3);
        Poly a = random_poly(rng, nvars);
        Poly b = random_poly(rng, nvars);
        if (!a.is_zero() && !b.is_zero()) CHECK((a * b).degree() == a.degree() + b.degree());
        auto z = random_point(rng, nvars);
        std::complex<double> lhs = (a * b).eval(z);
        std::complex<double> rhs = a.eval(z) * b.eval(z);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("mixed partials commute exactly") {
    std::mt19937_64 rng(44);
    for (int iter = 0; iter < 300; ++iter) {
        int nvars = 2 + int(rng() % 2);
        Poly a = random_poly(rng, nvars, 6, 4);
        int i = int(rng() % nvars), j = int(rng() % nvars);
        CHECK(a.diff(i).diff(j) == a.diff(j).diff(i));
    }
}

TEST_CASE("poly map composition is exact substitution") {
    auto v1 = std::vector<std::string>{"z1"};
    PolyMap f2 = parse_poly_map("z1, z1^2", v1, 2);
    PolyMap g = parse_poly_map("z1*z2, z2^2", {"z1", "z2"}, 2);
    PolyMap h = g.after(PolyMap::identity(2));
    CHECK(h.components[0] == g.components[0]);
    std::mt19937_64 rng(7);
    auto z = random_point(rng, 1);
    auto direct = f2.eval(z);
    PolyMap idf2 = PolyMap::identity(2).after(f2);
    auto composed = idf2.eval(z);
    CHECK(std::abs(direct[0] - composed[0]) < 1e-15);
    CHECK(std::abs(direct[1] - composed[1]) < 1e-15);
}
