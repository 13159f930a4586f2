#include "pscur/pullback.hpp"
#include "pscur/scenario.hpp"
#include "support/radial.hpp"

#include <doctest.h>

using namespace pscur;

namespace {

PairOptions opts(int order = 8, int est = 4, double abstol = 1e-7, double reltol = 1e-5) {
    PairOptions o;
    o.quad.order = order;
    o.quad.est_order = est;
    o.quad.abs_tol = abstol;
    o.quad.rel_tol = reltol;
    o.workers = 1;
    return o;
}

Schedule fast_sched(double eps0 = 0.05, int steps = 5) {
    return Schedule{eps0, 0.25, steps, 1, 0.9, 1e-2};
}

}  // namespace

TEST_CASE("identity pullback reproduces the current") {
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    PullbackProblem p = make_pullback(PolyMap::identity(1), Box::centered(1, 1.2), mu, fast_sched());
    Current fmu = pullback(p);
    TestForm phi = scalar_bump_test(1, {{0.2, 0.0}, }, 1.0, 1.2);
    PairResult pr = fmu.pair(phi, opts());
    double expect = ex_eval(phi.form.comps().begin()->second,
                            std::vector<std::complex<double>>{{0, 0}})
                        .real();
    CHECK(pr.converged);
    CHECK(pr.value.real() == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("pullback commutes with d within the error estimate") {
    // f(x) = x^2 on C; mu = b dzbar (not closed), test against <f* d mu - d f* mu, xi> = 0
    PolyMap f = parse_poly_map("z1^2", default_vars(1), 1);
    ExprPtr b = ex_bump(1, {{0.2, 0.0}}, 0.7);
    Current mu = Current::smooth(1, FormExpr::dzbar(1, 0).scaled(b), Box::centered(1, 1.0));
    Schedule sched = fast_sched(0.04);
    Box xbox = Box::centered(1, 1.25);

    Current f_dmu = pullback(make_pullback(f, xbox, mu.d(), sched));
    Current f_mu = pullback(make_pullback(f, xbox, mu, sched));
    TestForm xi;
    xi.form = FormExpr::scalar(1, ex_bump(1, {{0.0, 0.0}}, 1.1));
    xi.box = xbox;
    TestForm dxi;
    dxi.form = xi.form.d();
    dxi.box = xbox;
    auto o = opts(7, 3, 1e-6, 1e-4);
    PairResult a = f_dmu.pair(xi, o);
    PairResult c = f_mu.pair(dxi, o);
    // <d nu, xi> = -<nu, d xi> for the (1,1)-degree bookkeeping here
    CHECK(a.converged);
    CHECK(std::abs(a.value + c.value) <= a.estimate + c.estimate + 2e-3);
}

TEST_CASE("module property: f^*(phi ^ mu) = f^* phi ^ f^* mu") {
    PolyMap f = parse_poly_map("z1^2 + z1", default_vars(1), 1);
    ExprPtr b = ex_bump(1, {{0.0, 0.0}}, 0.9);
    Current mu = Current::smooth(1, FormExpr::scalar(1, b), Box::centered(1, 1.0));
    FormExpr phi = FormExpr::scalar(
        1, ex_add(ex_one(), ex_mul(ex_poly(Poly::variable(1, 0)),
                                   ex_poly_conj(Poly::variable(1, 0)))));
    Schedule sched = fast_sched(0.04);
    Box xbox = Box::centered(1, 1.1);

    Current lhs = pullback(make_pullback(f, xbox, mu.wedge_smooth(phi), sched));
    Current rhs = pullback(make_pullback(f, xbox, mu, sched)).wedge_smooth(phi.pullback(f));
    TestForm xi;
    xi.form = area_form(1, 0).scaled(ex_bump(1, {{0.1, 0.0}}, 0.9));
    xi.box = xbox;
    auto o = opts(7, 3, 1e-6, 1e-4);
    PairResult a = lhs.pair(xi, o);
    PairResult c = rhs.pair(xi, o);
    CHECK(a.converged);
    CHECK(c.converged);
    CHECK(std::abs(a.value - c.value) <= a.estimate + c.estimate + 2e-3);
}

TEST_CASE("locality: pairings only see the chart data under the test support") {
    // two maps agreeing on the support of xi give the same pairings
    PolyMap f1 = parse_poly_map("z1", default_vars(1), 1);
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    Schedule sched = fast_sched();
    Current a = pullback(make_pullback(f1, Box::centered(1, 0.6), mu, sched));
    Current b = pullback(make_pullback(f1, Box::centered(1, 1.4), mu, sched));
    TestForm phi = scalar_bump_test(1, {{0.0, 0.0}}, 0.5, 0.6);
    auto o = opts();
    std::complex<double> va = a.pair(phi, o).value;
    std::complex<double> vb = b.pair(phi, o).value;
    CHECK(std::abs(va - vb) <= 2e-4 * (1.0 + std::abs(va)));
}

TEST_CASE("submersion pullback: fiber extension and agreement with the graph route") {
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    Current direct = submersion_pullback(2, {0}, mu);
    REQUIRE(direct.terms().size() == 1);
    CHECK(direct.terms()[0].free.size() == 1);

    TestForm xi;
    xi.form = area_form(2, 1).scaled(ex_bump(2, {{0, 0}, {0, 0}}, 1.2));
    xi.box = Box::centered(2, 1.3);
    std::complex<double> vd = direct.pair(xi, opts()).value;
    // exact radial value: (3/4) pi R^2 with R = 1.2
    CHECK(vd.real() == doctest::Approx(0.75 * M_PI * 1.44).epsilon(1e-5));

    PolyMap proj = parse_poly_map("z1", default_vars(2), 1);
    Current graph = pullback(make_pullback(proj, Box::centered(2, 1.3), mu, fast_sched(0.04, 6)));
    PairResult pg = graph.pair(xi, opts(6, 3, 1e-6, 1e-5));
    CHECK(pg.converged);
    CHECK(pg.value.real() == doctest::Approx(vd.real()).epsilon(0.01));

    CHECK_THROWS_AS(submersion_pullback(2, {0, 0}, mu), std::invalid_argument);
    CHECK_THROWS_AS(submersion_pullback(1, {0, 1}, mu), std::invalid_argument);
}

TEST_CASE("equidimensional surjections: only the top M_k contributes") {
    // f(x) = x^2 on C is surjective with fiber dimension 0; the k=0 component
    // of the full pullback of a smooth bump current must vanish in the limit
    PolyMap f = parse_poly_map("z1^2", default_vars(1), 1);
    ExprPtr b = ex_bump(1, {{0.0, 0.0}}, 0.8);
    Current mu = Current::smooth(1, area_form(1, 0).scaled(b), Box::centered(1, 0.9));
    Current full = full_pullback(make_pullback(f, Box::centered(1, 1.0), mu, fast_sched(0.04)));
    // k=0 term has bidegree (1,1)-(1,1)=(0,0)? keep the (0,0)-paired part:
    // pair against a (0,0)-complement, i.e. a (0,0) current needs (1,1) xi;
    // the k=0 piece pairs with scalar phi only
    TestForm scalar_phi = scalar_bump_test(1, {{0.0, 0.0}}, 0.9, 1.0);
    PairResult p0 = full.pair(scalar_phi, opts(7, 3, 1e-6, 1e-4));
    CHECK(std::abs(p0.value) <= p0.estimate + 2e-3);
}

TEST_CASE("correspondence route agrees with the graph pullback") {
    // Gamma = graph of f(x) = x^2 in C x C; mu = [0]
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    Correspondence corr;
    corr.x_dim = 1;
    corr.y_dim = 1;
    CorrComponent gc;
    gc.param = parse_poly_map("z1, z1^2", default_vars(1), 2);
    gc.mult = 1.0;
    gc.weight = FormExpr::one(1);
    gc.box = Box::centered(1, 1.1);
    corr.comps = {gc};
    Current via_corr = correspondence_pullback(corr, mu, fast_sched(0.03, 6));
    TestForm phi = scalar_bump_test(1, {{0.0, 0.0}}, 0.9, 1.1);
    PairResult pc = via_corr.pair(phi, opts(5, 3, 1e-5, 1e-4));
    CHECK(pc.converged);

    PolyMap f = parse_poly_map("z1^2", default_vars(1), 1);
    Current via_graph = pullback(make_pullback(f, Box::centered(1, 1.1), mu, fast_sched(0.03, 6)));
    PairResult pg = via_graph.pair(phi, opts(7, 3, 1e-6, 1e-5));
    CHECK(pg.converged);
    // both equal 2 phi(0) = 2
    CHECK(pc.value.real() == doctest::Approx(2.0).epsilon(0.03));
    CHECK(pg.value.real() == doctest::Approx(2.0).epsilon(0.02));
    CHECK(std::abs(pc.value - pg.value) <= pc.estimate + pg.estimate + 0.06);

    // identity graph gives mu back
    CorrComponent gid;
    gid.param = parse_poly_map("z1, z1", default_vars(1), 2);
    gid.mult = 1.0;
    gid.weight = FormExpr::one(1);
    gid.box = Box::centered(1, 1.1);
    Correspondence cid{1, 1, {gid}};
    Current idc = correspondence_pullback(cid, mu, fast_sched(0.03, 6));
    PairResult pi = idc.pair(phi, opts(5, 3, 1e-5, 1e-4));
    CHECK(pi.value.real() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("graph factorization identity on a 2-dim instance") {
    // j_* M^{Phi1} = c(N) ^ M^{p^*Phi1 + Phi2} with flat c(N) = 1 on
    // Sigma = C, Omega = C, q(s) = s^3, Phi1 = s^2 - 1, Phi2 = w - s^3.
    // Left: M_1^{Phi1} = [s=1] + [s=-1] pushed to the graph; right: the top
    // M_2 of the joint section on C^2.
    Schedule sched = fast_sched(0.03, 6);
    PolySection phi1;
    phi1.name = "phi1";
    phi1.nvars = 2;
    phi1.comps = {parse_poly("z1^2 - 1", default_vars(2))};
    PolySection phi2;
    phi2.name = "phi2";
    phi2.nvars = 2;
    phi2.comps = {parse_poly("z2 - z1^3", default_vars(2))};

    Current one2 = Current::smooth(2, FormExpr::one(2), Box::centered(2, 1.6));
    Current rhs = m_limit(section_join(phi1, phi2), one2, 2, sched);

    // left side: M_1 of s^2-1 on C, then graph-pushforward s -> (s, s^3)
    PolySection p1s;
    p1s.name = "p1";
    p1s.nvars = 1;
    p1s.comps = {parse_poly("z1^2 - 1", default_vars(1))};
    Current one1 = Current::smooth(1, FormExpr::one(1), Box::centered(1, 1.6));
    Current m1 = m_limit(p1s, one1, 1, sched);
    PolyMap graph = parse_poly_map("z1, z1^3", default_vars(1), 2);
    Current lhs = m1.pushforward(graph);

    TestForm xi = scalar_bump_test(2, {{0.4, 0.0}, {0.2, 0.0}}, 2.0, 1.7);
    auto o = opts(6, 3, 1e-6, 1e-5);
    PairResult pl = lhs.pair(xi, o);
    PairResult prr = rhs.pair(xi, o);
    CHECK(pl.converged);
    CHECK(prr.converged);
    CHECK(std::abs(pl.value - prr.value) <= pl.estimate + prr.estimate + 0.02);
    // cross-check against the explicit two-point cycle
    auto at = [&](double s_re, double w_re) {
        return ex_eval(xi.form.comps().begin()->second,
                       std::vector<std::complex<double>>{{s_re, 0}, {w_re, 0}})
            .real();
    };
    double expect = at(1.0, 1.0) + at(-1.0, -1.0);
    CHECK(pl.value.real() == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("composition with the identity has zero defect") {
    // f1: x -> x^2, f2 = id: the chained and direct routes agree
    ChartSpec f1c;
    f1c.f = parse_poly_map("z1^2", default_vars(1), 1);
    f1c.weight = ex_one();
    f1c.box = Box::centered(1, 1.0);
    f1c.label = "f1";
    ChartSpec f2c;
    f2c.f = PolyMap::identity(1);
    f2c.weight = ex_one();
    f2c.box = Box::centered(1, 1.1);
    f2c.label = "id";
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    CompositionRoutes routes =
        composition_difference(f1c, f2c, mu, fast_sched(0.03, 5), fast_sched(0.03, 5));
    TestForm phi = scalar_bump_test(1, {{0.0, 0.0}}, 0.8, 1.0);
    auto o = opts(5, 3, 1e-5, 1e-4);
    PairResult pl = routes.chained.pair(phi, o);
    PairResult pd = routes.direct.pair(phi, o);
    CHECK(pl.converged);
    CHECK(pd.converged);
    CHECK(std::abs(pl.value - pd.value) <= pl.estimate + pd.estimate + 0.05);
    CHECK(pd.value.real() == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("transverse linear maps have zero defect") {
    // f1, f2 linear surjections; mu a hyperplane cycle: Cor. 7.5 situation
    ChartSpec f1c;
    f1c.f = parse_poly_map("z1, z2", default_vars(2), 2);  // identity C^2
    f1c.weight = ex_one();
    f1c.box = Box::centered(2, 1.0);
    f1c.label = "f1";
    ChartSpec f2c;
    f2c.f = parse_poly_map("z1 + z2, z2", default_vars(2), 2);
    f2c.weight = ex_one();
    f2c.box = Box::centered(2, 2.1);
    f2c.label = "f2";
    PolyMap param = parse_poly_map("0, z1", default_vars(1), 2);
    Current mu = Current::cycle(2, param, 1.0, FormExpr::one(1), Box::centered(1, 2.3));
    CompositionRoutes routes =
        composition_difference(f1c, f2c, mu, fast_sched(0.03, 5), fast_sched(0.03, 5));
    TestForm xi;
    xi.form = area_form(2, 1).scaled(ex_bump(2, {{0, 0}, {0, 0}}, 0.9));
    xi.box = Box::centered(2, 1.0);
    auto o = opts(4, 2, 1e-4, 1e-3);
    PairResult pl = routes.chained.pair(xi, o);
    PairResult pd = routes.direct.pair(xi, o);
    CHECK(std::abs(pl.value - pd.value) <= pl.estimate + pd.estimate + 0.05);
}
