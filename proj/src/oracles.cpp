#include "pscur/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace pscur {

namespace {

// Shared geometry of the worked examples. Several expected values below are
// exact because the cutoff satisfies chi(1.5+x) + chi(1.5-x) = 1, so
// int_0^inf (1 - chi) = 3/2 and a ball bump of radius R has plane integral
// (3/4) pi R^2.
constexpr double kPi = 3.14159265358979323846;

PolySection make_section(const std::string& name, int nvars, const std::string& text,
                         const std::vector<std::string>& vars) {
    PolySection s;
    s.name = name;
    s.nvars = nvars;
    s.comps = parse_poly_map(text, vars).components;
    return s;
}

Current unit_current(int dim, double box_r) {
    return Current::smooth(dim, FormExpr::one(dim), Box::centered(dim, box_r));
}

Expectation expect_value(std::complex<double> want, double tol, const std::string& mode = "rel",
                         const std::string& target = "value") {
    Expectation e;
    e.target = target;
    e.want = want;
    e.tol = tol;
    e.mode = mode;
    return e;
}

// ---- sturm family: Psi = (z1^a, z2) on C^2, M_2 against bump tests --------

Scenario sturm_scenario(const std::string& name, int a, int which_phi, double want, double tol) {
    Scenario sc;
    sc.name = name;
    sc.kind = "m-limit";
    sc.ambient = 2;
    std::string comp1 = a == 1 ? "z1" : "z1^" + std::to_string(a);
    sc.sections["Psi"] = make_section("Psi", 2, comp1 + ", z2", default_vars(2));
    sc.currents["mu"] = unit_current(2, 1.4);

    TestForm tf;
    if (which_phi == 1) {
        tf = scalar_bump_test(2, {{0.0, 0.0}, {0.0, 0.0}}, 1.1, 1.4);
    } else if (which_phi == 2) {
        // center placed so the chi argument at the origin is exactly 3/2:
        // phi(0) = 1 - chi(3/2) = 1/2
        double c2 = 0.13;
        double r = std::sqrt(2.0 * c2 / 1.5);
        tf = scalar_bump_test(2, {{0.3, 0.0}, {0.2, 0.0}}, r, 1.4);
    } else {
        TestForm base = scalar_bump_test(2, {{0.0, 0.0}, {0.0, 0.0}}, 0.9, 1.4);
        ExprPtr lin = ex_add(ex_one(), ex_scale({0.25, 0.0},
                                                ex_add(ex_poly(Poly::variable(2, 0)),
                                                       ex_poly_conj(Poly::variable(2, 0)))));
        tf.form = base.form.scaled(lin);
        tf.box = base.box;
    }
    sc.testforms["phi"] = tf;

    sc.schedule = Schedule{0.08, 0.25, 6, 1, 0.9, 1e-2};
    sc.quad.order = 8;
    sc.quad.est_order = 4;
    sc.quad.max_cells = 20000;
    sc.quad.abs_tol = 2e-6;
    sc.quad.rel_tol = 2e-5;
    sc.run = {{"section", "Psi"}, {"k", "2"}, {"mu", "mu"}, {"test", "phi"}};
    sc.expects = {expect_value({want, 0.0}, tol)};
    return sc;
}

// ---- Mex2: joint and iterated M-products on C^3 ----------------------------

std::vector<std::string> wz_vars() { return {"w", "z1", "z2"}; }

TestForm mex2_testform(bool variant_a) {
    // (i/2) bump * (dw^dwbar + dz^dzbar) with a radius-2 ball bump
    FormExpr f = area_form(3, 0) + area_form(3, variant_a ? 1 : 2);
    ExprPtr b = ex_bump(3, {{0, 0}, {0, 0}, {0, 0}}, 2.0);
    TestForm tf;
    tf.form = f.scaled(b);
    tf.box = Box::centered(3, 2.1);
    return tf;
}

Current mex2_cycles() {
    // 2[w=z2=0] + [w=v2,v1=1] + [w=-v2,v1=-1] in coordinates (w, z1, z2)
    Current c(3);
    auto t = default_vars(1);
    PolyMap c1 = parse_poly_map("0, z1, 0", {"z1"});
    PolyMap c2 = parse_poly_map("z1, 1, z1", {"z1"});
    PolyMap c3 = parse_poly_map("-z1, -1, z1", {"z1"});
    c = c + Current::cycle(3, c1, 2.0, FormExpr::one(1), Box::centered(1, 2.05));
    c = c + Current::cycle(3, c2, 1.0, FormExpr::one(1), Box::centered(1, 1.05));
    c = c + Current::cycle(3, c3, 1.0, FormExpr::one(1), Box::centered(1, 1.05));
    return c;
}

double mex2_expected(bool variant_a) {
    // closed-form radial integrals of the three cycle pairings (R = 2)
    return variant_a ? 8.0 * kPi : 4.0 * kPi;
}

void mex2_common(Scenario& sc) {
    sc.ambient = 3;
    sc.vars = wz_vars();
    sc.currents["mu"] = unit_current(3, 2.15);
    sc.quad.order = 3;
    sc.quad.est_order = 2;
    sc.quad.max_cells = 16000;
    sc.quad.abs_tol = 2e-4;
    sc.quad.rel_tol = 4e-4;
}

Scenario mex2_joint(const std::string& name, bool variant_a) {
    Scenario sc;
    sc.name = name;
    sc.kind = "m-limit";
    mex2_common(sc);
    sc.sections["joint"] = make_section("joint", 3, "w - z1*z2, w^2 - z2^2", wz_vars());
    sc.testforms["xi"] = mex2_testform(variant_a);
    sc.schedule = Schedule{0.04, 0.25, 5, 1, 0.9, 1e-2};
    sc.run = {{"section", "joint"}, {"k", "2"}, {"mu", "mu"}, {"test", "xi"}};
    sc.expects = {expect_value({mex2_expected(variant_a), 0.0}, 0.02)};
    return sc;
}

Scenario mex2_iterated(const std::string& name, bool variant_a) {
    Scenario sc;
    sc.name = name;
    sc.kind = "m-iterated";
    mex2_common(sc);
    sc.sections["Phi"] = make_section("Phi", 3, "w - z1*z2", wz_vars());
    sc.sections["Psi"] = make_section("Psi", 3, "w^2 - z2^2", wz_vars());
    sc.testforms["xi"] = mex2_testform(variant_a);
    sc.schedule = Schedule{0.04, 0.25, 4, 1, 0.9, 1e-2};
    sc.schedule_inner = Schedule{0.04, 0.25, 4, 1, 0.9, 1e-2};
    sc.run = {{"outer", "Psi"}, {"kouter", "1"}, {"inner", "Phi"}, {"kinner", "1"},
              {"mu", "mu"},     {"test", "xi"}};
    sc.expects = {expect_value({mex2_expected(variant_a), 0.0}, 0.03)};
    return sc;
}

Scenario mex2_cycles_scenario(const std::string& name, bool variant_a) {
    Scenario sc;
    sc.name = name;
    sc.kind = "pair";
    sc.ambient = 3;
    sc.vars = wz_vars();
    sc.currents["cycles"] = mex2_cycles();
    sc.testforms["xi"] = mex2_testform(variant_a);
    sc.quad.order = 8;
    sc.quad.est_order = 4;
    sc.quad.max_cells = 4000;
    sc.quad.abs_tol = 1e-8;
    sc.quad.rel_tol = 1e-7;
    sc.run = {{"mu", "cycles"}, {"test", "xi"}};
    sc.expects = {expect_value({mex2_expected(variant_a), 0.0}, 0.005)};
    return sc;
}

// ---- strutt: blowdown of C^2, pullback of the Dirac mass -------------------

ExprPtr fs_partition_arg(int dim, int var) {
    // 3 |z_var|^2 / (1 + |z_var|^2), smooth on the whole chart
    Poly z = Poly::variable(dim, var);
    ExprPtr n2 = ex_mul(ex_poly(z), ex_poly_conj(z));
    return ex_prod({ex_const({3.0, 0.0}), n2, ex_pow(ex_add(ex_one(), n2), -1)});
}

ExprPtr fs_partition_arg_inverted(int dim, int var) {
    // the same function through the transition z -> 1/z: 3 / (1 + |z_var|^2)
    Poly z = Poly::variable(dim, var);
    ExprPtr n2 = ex_mul(ex_poly(z), ex_poly_conj(z));
    return ex_prod({ex_const({3.0, 0.0}), ex_pow(ex_add(ex_one(), n2), -1)});
}

ExprPtr one_var_bump(int dim, int var, double radius) {
    Poly z = Poly::variable(dim, var);
    ExprPtr n2 = ex_mul(ex_poly(z), ex_poly_conj(z));
    return ex_add(ex_one(),
                  ex_scale({-1.0, 0.0}, ex_chi(ex_scale({2.0 / (radius * radius), 0.0}, n2))));
}

void strutt_charts(Scenario& sc) {
    sc.maps["fA"] = parse_poly_map("z1, z1*z2", default_vars(2), 2);
    sc.maps["fB"] = parse_poly_map("z1*z2, z2", default_vars(2), 2);
    ChartSpec a;
    a.f = sc.maps["fA"];
    a.weight = ex_add(ex_one(), ex_scale({-1.0, 0.0}, ex_chi(fs_partition_arg(2, 1))));
    Box ba;
    ba.iv = {{-0.7, 0.7}, {-0.7, 0.7}, {-1.7, 1.7}, {-1.7, 1.7}};
    a.box = ba;
    a.label = "fA";
    ChartSpec b;
    b.f = sc.maps["fB"];
    b.weight = ex_chi(fs_partition_arg_inverted(2, 0));
    Box bb;
    bb.iv = {{-1.2, 1.2}, {-1.2, 1.2}, {-0.7, 0.7}, {-0.7, 0.7}};
    b.box = bb;
    b.label = "fB";
    sc.charts = {a, b};
}

Scenario strutt_scenario(const std::string& name, bool mass) {
    Scenario sc;
    sc.name = name;
    sc.kind = "pullback";
    sc.ambient = 2;
    strutt_charts(sc);
    sc.currents["mu"] = Current::dirac(2, {{0.0, 0.0}, {0.0, 0.0}});

    // chart-A test: bump(x1) * u(x2); chart-B: bump(y2) * u(1/y1); the two
    // agree on the exceptional set, which carries the limit current
    Poly x2 = Poly::variable(2, 1);
    ExprPtr n2A = ex_mul(ex_poly(x2), ex_poly_conj(x2));
    ExprPtr uA = mass ? ex_one() : ex_mul(n2A, ex_pow(ex_add(ex_one(), n2A), -1));
    Poly y1 = Poly::variable(2, 0);
    ExprPtr n2B = ex_mul(ex_poly(y1), ex_poly_conj(y1));
    ExprPtr uB = mass ? ex_one() : ex_pow(ex_add(ex_one(), n2B), -1);

    TestForm tA;
    tA.form = FormExpr::scalar(2, ex_mul(one_var_bump(2, 0, 0.6), uA));
    tA.box = sc.charts[0].box;
    TestForm tB;
    tB.form = FormExpr::scalar(2, ex_mul(one_var_bump(2, 1, 0.6), uB));
    tB.box = sc.charts[1].box;
    sc.testforms["phiA"] = tA;
    sc.testforms["phiB"] = tB;

    sc.schedule = Schedule{0.02, 0.25, 6, 1, 0.9, 1e-2};
    sc.quad.order = 6;
    sc.quad.est_order = 3;
    sc.quad.max_cells = 20000;
    sc.quad.abs_tol = 2e-6;
    sc.quad.rel_tol = 2e-5;
    sc.run = {{"mu", "mu"}, {"test", "phiA,phiB"}};
    sc.expects = {expect_value({mass ? 1.0 : 0.5, 0.0}, mass ? 0.01 : 0.02)};
    return sc;
}

// ---- burger: functoriality defect ------------------------------------------

Scenario burger_scenario(const std::string& name, bool wide) {
    Scenario sc;
    sc.name = name;
    sc.kind = "compose-defect";
    sc.ambient = 2;

    double r = wide ? 2.2 : 0.9;
    double vb = wide ? 2.3 : 1.0;
    // mu = g_* alpha with g(v1,v2) = (v1 v2, v2^2)
    PolyMap g = parse_poly_map("z1*z2, z2^2", default_vars(2), 2);
    sc.maps["g"] = g;
    Current mu =
        Current::cycle(2, g, 1.0, FormExpr::scalar(2, ex_bump(2, {{0, 0}, {0, 0}}, r)),
                       Box::centered(2, vb));
    // the parameterization is 2:1 onto its image, but as a pushforward term
    // that is exactly g_* alpha
    sc.currents["mu"] = mu;

    // f1: pt -> C at 0; f2: w -> (w, w^2)
    PolyMap f1;
    f1.source_dim = 0;
    f1.target_dim = 1;
    f1.components = {Poly::constant(0, GaussRat(0L))};
    PolyMap f2 = parse_poly_map("z1, z1^2", default_vars(1), 2);
    sc.maps["f1"] = f1;
    sc.maps["f2"] = f2;
    ChartSpec c1;
    c1.f = f1;
    c1.weight = ex_one();
    c1.box = Box{};
    c1.label = "f1";
    ChartSpec c2;
    c2.f = f2;
    c2.weight = ex_one();
    c2.box = Box::centered(1, 0.8);
    c2.label = "f2";
    sc.charts = {c1, c2};

    TestForm tf;
    tf.form = FormExpr::one(0);
    tf.box = Box{};
    sc.testforms["one"] = tf;

    sc.schedule = Schedule{0.02, 0.25, 5, 1, 0.9, 1e-2};
    sc.schedule_inner = Schedule{0.02, 0.25, 5, 1, 0.9, 1e-2};
    sc.quad.order = wide ? 4 : 4;
    sc.quad.est_order = 2;
    sc.quad.max_cells = 20000;
    sc.quad.abs_tol = 2e-4;
    sc.quad.rel_tol = 5e-4;
    sc.run = {{"mu", "mu"}, {"test", "one"}};
    if (wide) {
        sc.expects = {expect_value({2.0, 0.0}, 0.02, "rel", "lhs"),
                      expect_value({2.0, 0.0}, 0.02, "rel", "rhs")};
    } else {
        sc.expects = {expect_value({0.0, 0.0}, 0.05, "abs", "lhs"),
                      expect_value({2.0, 0.0}, 0.02, "rel", "rhs"),
                      expect_value({-2.0, 0.0}, 0.05, "rel", "defect"),
                      expect_value({0.0, 0.0}, 0.2, "nonzero", "defect")};
    }
    return sc;
}

// ---- small pullback oracles -------------------------------------------------

Scenario ex_id_scenario() {
    Scenario sc;
    sc.name = "ex_id";
    sc.kind = "pullback";
    sc.ambient = 1;
    sc.maps["id"] = PolyMap::identity(1);
    ChartSpec c;
    c.f = sc.maps["id"];
    c.weight = ex_one();
    c.box = Box::centered(1, 1.2);
    c.label = "id";
    sc.charts = {c};
    sc.currents["mu"] = Current::dirac(1, {{0.0, 0.0}});
    sc.testforms["phi"] = scalar_bump_test(1, {{0.0, 0.0}}, 1.0, 1.2);
    sc.schedule = Schedule{0.05, 0.25, 6, 1, 0.9, 1e-2};
    sc.quad.order = 8;
    sc.quad.est_order = 4;
    sc.quad.max_cells = 8000;
    sc.quad.abs_tol = 1e-7;
    sc.quad.rel_tol = 1e-6;
    sc.run = {{"mu", "mu"}, {"test", "phi"}};
    sc.expects = {expect_value({1.0, 0.0}, 0.01)};
    return sc;
}

// 27 pi / 25: exact ball-bump mass of radius 6/5 against [z1 = 0]
constexpr double kSubmersionWant = 27.0 * kPi / 25.0;

TestForm submersion_testform() {
    TestForm tf;
    tf.form = area_form(2, 1).scaled(ex_bump(2, {{0, 0}, {0, 0}}, 1.2));
    tf.box = Box::centered(2, 1.3);
    return tf;
}

Scenario submersion_graph_scenario() {
    Scenario sc;
    sc.name = "submersion_graph";
    sc.kind = "pullback";
    sc.ambient = 1;
    sc.maps["proj"] = parse_poly_map("z1", default_vars(2), 1);
    ChartSpec c;
    c.f = sc.maps["proj"];
    c.weight = ex_one();
    c.box = Box::centered(2, 1.3);
    c.label = "proj";
    sc.charts = {c};
    sc.currents["mu"] = Current::dirac(1, {{0.0, 0.0}});
    sc.testforms["xi"] = submersion_testform();
    sc.schedule = Schedule{0.05, 0.25, 6, 1, 0.9, 1e-2};
    sc.quad.order = 6;
    sc.quad.est_order = 3;
    sc.quad.max_cells = 20000;
    sc.quad.abs_tol = 2e-6;
    sc.quad.rel_tol = 2e-5;
    sc.run = {{"mu", "mu"}, {"test", "xi"}};
    sc.expects = {expect_value({kSubmersionWant, 0.0}, 0.02)};
    return sc;
}

Scenario submersion_direct_scenario() {
    Scenario sc;
    sc.name = "submersion_direct";
    sc.kind = "pair";
    sc.ambient = 2;
    Current mu = Current::dirac(1, {{0.0, 0.0}});
    sc.currents["fmu"] = submersion_pullback(2, {0}, mu);
    sc.testforms["xi"] = submersion_testform();
    sc.quad.order = 8;
    sc.quad.est_order = 4;
    sc.quad.max_cells = 4000;
    sc.quad.abs_tol = 1e-8;
    sc.quad.rel_tol = 1e-7;
    sc.run = {{"mu", "fmu"}, {"test", "xi"}};
    sc.expects = {expect_value({kSubmersionWant, 0.0}, 0.005)};
    return sc;
}

Scenario segre_strutt_scenario() {
    Scenario sc;
    sc.name = "segre_strutt";
    sc.kind = "pair";
    sc.ambient = 2;
    SegreInput in;
    in.phi = make_section("Phi", 2, "z1, z1*z2", default_vars(2));
    in.phi_prime = parse_poly_map("1, z2", default_vars(2)).components;
    DivisorComponent dc;
    dc.mult = 1.0;
    dc.sigma = parse_poly("z1", default_vars(2));
    dc.param = parse_poly_map("0, z1", default_vars(1), 2);
    dc.weight = FormExpr::one(1);
    dc.box = Box::centered(1, 5.1);
    in.divisor = {dc};
    in.max_k = 1;
    auto shat = segre_principal(in);
    sc.currents["shat1"] = shat[1];
    sc.testforms["phi"] = scalar_bump_test(2, {{0.0, 0.0}, {0.0, 0.0}}, 5.0, 5.1);
    sc.quad.order = 8;
    sc.quad.est_order = 4;
    sc.quad.max_cells = 6000;
    sc.quad.abs_tol = 1e-8;
    sc.quad.rel_tol = 1e-7;
    sc.run = {{"mu", "shat1"}, {"test", "phi"}};
    // frozen from the independent radial oracle (see tests):
    // int_0^inf (1 - chi(2r^2/25)) 2r/(1+r^2)^2 dr
    sc.expects = {expect_value({0.945136695143457, 0.0}, 1e-3)};
    return sc;
}

Scenario correspondence_line_scenario() {
    Scenario sc;
    sc.name = "correspondence_line";
    sc.kind = "correspondence";
    sc.ambient = 1;  // Y chart
    sc.maps["graph"] = parse_poly_map("z1, z1^2", default_vars(1), 2);
    CorrComponent gc;
    gc.param = sc.maps["graph"];
    gc.mult = 1.0;
    gc.weight = FormExpr::one(1);
    gc.box = Box::centered(1, 1.1);
    sc.gamma = {gc};
    sc.currents["mu"] = Current::dirac(1, {{0.0, 0.0}});
    sc.testforms["phi"] = scalar_bump_test(1, {{0.0, 0.0}}, 0.9, 1.1);
    sc.schedule = Schedule{0.03, 0.25, 6, 1, 0.9, 1e-2};
    sc.quad.order = 5;
    sc.quad.est_order = 3;
    sc.quad.max_cells = 24000;
    sc.quad.abs_tol = 2e-5;
    sc.quad.rel_tol = 2e-4;
    sc.run = {{"mu", "mu"}, {"test", "phi"}};
    sc.expects = {expect_value({2.0, 0.0}, 0.025)};
    return sc;
}

Scenario cohom_scenario() {
    Scenario sc;
    sc.name = "cohom_identities";
    sc.kind = "cohom-verify";
    sc.ambient = 0;
    return sc;
}

}  // namespace

std::vector<std::string> oracle_names() {
    return {"sturm1",        "sturm2",        "sturm3",        "sturm_a2",
            "sturm_a3",      "mex2_cycles_a", "mex2_cycles_b", "mex2_joint_a",
            "mex2_joint_b",  "mex2_iter_a",   "mex2_iter_b",   "strutt_mass",
            "strutt_phi",    "burger_wide",   "burger_narrow", "ex_id",
            "submersion_direct", "submersion_graph", "segre_strutt",
            "correspondence_line", "cohom_identities"};
}

Scenario make_oracle(const std::string& name) {
    if (name == "sturm1") return sturm_scenario(name, 1, 1, 1.0, 0.01);
    if (name == "sturm2") return sturm_scenario(name, 1, 2, 0.5, 0.01);
    if (name == "sturm3") return sturm_scenario(name, 1, 3, 1.0, 0.01);
    if (name == "sturm_a2") return sturm_scenario(name, 2, 1, 2.0, 0.02);
    if (name == "sturm_a3") return sturm_scenario(name, 3, 1, 3.0, 0.02);
    if (name == "mex2_cycles_a") return mex2_cycles_scenario(name, true);
    if (name == "mex2_cycles_b") return mex2_cycles_scenario(name, false);
    if (name == "mex2_joint_a") return mex2_joint(name, true);
    if (name == "mex2_joint_b") return mex2_joint(name, false);
    if (name == "mex2_iter_a") return mex2_iterated(name, true);
    if (name == "mex2_iter_b") return mex2_iterated(name, false);
    if (name == "strutt_mass") return strutt_scenario(name, true);
    if (name == "strutt_phi") return strutt_scenario(name, false);
    if (name == "burger_wide") return burger_scenario(name, true);
    if (name == "burger_narrow") return burger_scenario(name, false);
    if (name == "ex_id") return ex_id_scenario();
    if (name == "submersion_direct") return submersion_direct_scenario();
    if (name == "submersion_graph") return submersion_graph_scenario();
    if (name == "segre_strutt") return segre_strutt_scenario();
    if (name == "correspondence_line") return correspondence_line_scenario();
    if (name == "cohom_identities") return cohom_scenario();
    throw std::invalid_argument("unknown oracle: " + name);
}

}  // namespace pscur
