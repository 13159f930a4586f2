#include "pscur/pullback.hpp"

#include <random>
#include <stdexcept>

namespace pscur {

namespace {

// widening substitution for scalar expressions on the x chart into the
// combined (x, v) chart
PolyMap widen_map(int from_dim, int combined_dim, int shift) {
    PolyMap w;
    w.source_dim = combined_dim;
    w.target_dim = from_dim;
    for (int i = 0; i < from_dim; ++i)
        w.components.push_back(Poly::variable(combined_dim, i + shift));
    return w;
}

void probe_graph_section(const ChartSpec& c, int n) {
    // the zero set of Psi(x,y) = f(x) - y must be exactly the graph: zero on
    // it, nonzero at displaced points, finite on the chart box
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int m = c.f.source_dim;
    for (int it = 0; it < 4; ++it) {
        std::vector<std::complex<double>> x(m);
        for (int i = 0; i < m; ++i) {
            double lo = c.box.iv[2 * i].lo, hi = c.box.iv[2 * i].hi;
            double re = lo + (hi - lo) * 0.5 * (u(rng) + 1.0);
            lo = c.box.iv[2 * i + 1].lo;
            hi = c.box.iv[2 * i + 1].hi;
            double im = lo + (hi - lo) * 0.5 * (u(rng) + 1.0);
            x[i] = {re, im};
        }
        auto fx = c.f.eval(x);
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(fx[j].real()) || !std::isfinite(fx[j].imag()))
                throw std::logic_error("pullback: chart map not finite on its box");
            std::complex<double> on_graph = fx[j] - fx[j];
            std::complex<double> off_graph = fx[j] - (fx[j] + std::complex<double>{0.25, 0.0});
            if (std::abs(on_graph) > 1e-12 || std::abs(off_graph) < 1e-12)
                throw std::logic_error("pullback: graph section probe failed");
        }
    }
}

Current pullback_impl(const PullbackProblem& p, bool full) {
    int n = p.mu.amb_dim();
    int m = p.x_dim;
    if (p.atlas.empty()) throw std::invalid_argument("pullback: empty atlas");
    auto chern = chern_forms(p.metric, n);
    Current out(m);
    std::map<const LimitChain*, ChainPtr> extended;
    for (size_t chart_idx = 0; chart_idx < p.atlas.size(); ++chart_idx) {
        const ChartSpec& c = p.atlas[chart_idx];
        c.f.check();
        if (c.f.source_dim != m || c.f.target_dim != n)
            throw std::invalid_argument("pullback: chart map dims");
        if (c.box.real_dim() != 2 * m) throw std::invalid_argument("pullback: chart box dims");
        probe_graph_section(c, n);
        for (const Term& t : p.mu.terms()) {
            if (!t.free.empty())
                throw std::invalid_argument("pullback: mu must have bounded term boxes");
            int d = t.src_dim;
            int sd = m + d;
            if (sd > kMaxVars)
                throw std::invalid_argument("pullback: combined source exceeds variable cap");
            // graph section on the combined (x, v) chart: f(x) - g'(v)
            std::vector<Poly> S;
            for (int j = 0; j < n; ++j)
                S.push_back(c.f.components[j].embedded(sd, 0) -
                            t.g.components[j].embedded(sd, m));
            bool van = Term::section_vanishes_on(S);

            ChainPtr chain;
            int slot = -1;
            {
                auto it = extended.find(t.chain.get());
                if (it == extended.end())
                    it = extended.emplace(t.chain.get(), chain_append(t.chain, p.schedule)).first;
                chain = it->second;
                slot = int(chain->size()) - 1;
            }

            FormExpr alpha_v = t.alpha.embedded(sd, m);
            ExprPtr shifted_weight = ex_compose(c.weight, widen_map(m, sd, 0));

            for (int k = 0; k <= std::min(sd, n); ++k) {
                for (int l = 0; l <= n; ++l) {
                    if (!full && l != n - k) continue;
                    const FormExpr& cl = chern[l];
                    if (cl.is_zero()) continue;
                    FormExpr cpull =
                        l == 0 ? FormExpr::one(sd)
                               : cl.pullback(c.f).embedded(sd, 0);
                    if (cpull.is_zero()) continue;

                    Term nt;
                    nt.src_dim = sd;
                    nt.g.source_dim = sd;
                    nt.g.target_dim = m;
                    for (int i = 0; i < m; ++i) nt.g.components.push_back(Poly::variable(sd, i));
                    nt.box = c.box.product(t.box);
                    nt.chain = chain;
                    for (const TermShell& sh : t.shells) {
                        TermShell ns = sh;
                        ns.section.clear();
                        for (const Poly& q : sh.section) ns.section.push_back(q.embedded(sd, m));
                        nt.shells.push_back(std::move(ns));
                    }
                    if (van) {
                        if (k != 0) continue;
                        nt.alpha = cpull.wedge(alpha_v).scaled(shifted_weight);
                    } else {
                        FormExpr mf = m_factor(S, sd, k, ex_param(slot));
                        if (mf.is_zero()) continue;
                        nt.alpha = cpull.wedge(mf).wedge(alpha_v).scaled(shifted_weight);
                        TermShell sh;
                        sh.section = S;
                        sh.kind = k == 0 ? ShellKind::OneMinusChi : ShellKind::ChiPrime;
                        sh.slot = slot;
                        nt.shells.push_back(std::move(sh));
                    }
                    if (nt.alpha.is_zero()) continue;
                    nt.chart_tag = int(chart_idx);
                    nt.label = c.label + "/k" + std::to_string(k) + "/" + t.label;
                    out.add_term(std::move(nt));
                }
            }
        }
    }
    return out;
}

}  // namespace

PullbackProblem make_pullback(PolyMap f, Box x_box, Current mu, Schedule sched,
                              MetricModel metric) {
    PullbackProblem p;
    p.x_dim = f.source_dim;
    ChartSpec c;
    c.f = std::move(f);
    c.weight = ex_one();
    c.box = std::move(x_box);
    c.label = "chart0";
    p.atlas.push_back(std::move(c));
    p.mu = std::move(mu);
    p.metric = metric;
    p.schedule = sched;
    return p;
}

Current pullback(const PullbackProblem& p) { return pullback_impl(p, false); }

Current full_pullback(const PullbackProblem& p) { return pullback_impl(p, true); }

Current submersion_pullback(int x_dim, const std::vector<int>& idx, const Current& mu) {
    int n = mu.amb_dim();
    if (int(idx.size()) != n) throw std::invalid_argument("submersion: index count");
    std::vector<bool> used(x_dim, false);
    for (int j : idx) {
        if (j < 0 || j >= x_dim || used[j])
            throw std::invalid_argument("submersion: not a declared projection");
        used[j] = true;
    }
    std::vector<int> others;
    for (int j = 0; j < x_dim; ++j)
        if (!used[j]) others.push_back(j);
    int fdim = int(others.size());  // fiber dimension

    Current out(x_dim);
    for (const Term& t : mu.terms()) {
        int d = t.src_dim;
        int sd = fdim + d;
        if (sd > kMaxVars) throw std::invalid_argument("submersion: variable cap");
        Term nt;
        nt.src_dim = sd;
        nt.g.source_dim = sd;
        nt.g.target_dim = x_dim;
        nt.g.components.assign(x_dim, Poly(sd));
        for (int b = 0; b < fdim; ++b) nt.g.components[others[b]] = Poly::variable(sd, b);
        for (int a = 0; a < n; ++a) nt.g.components[idx[a]] = t.g.components[a].embedded(sd, fdim);
        nt.alpha = t.alpha.embedded(sd, fdim);
        nt.box = Box::cube(2 * fdim, 0.0, 0.0).product(t.box);
        for (int b = 0; b < fdim; ++b) nt.free.push_back(FreeDim{b, others[b]});
        for (const FreeDim& f : t.free) nt.free.push_back(FreeDim{f.src + fdim, idx[f.amb]});
        nt.chain = t.chain;
        for (const TermShell& sh : t.shells) {
            TermShell ns = sh;
            ns.section.clear();
            for (const Poly& q : sh.section) ns.section.push_back(q.embedded(sd, fdim));
            nt.shells.push_back(std::move(ns));
        }
        nt.label = "sub/" + t.label;
        out.add_term(std::move(nt));
    }
    return out;
}

Current correspondence_pullback(const Correspondence& corr, const Current& mu,
                                const Schedule& sched) {
    int mx = corr.x_dim, ny = corr.y_dim;
    if (mu.amb_dim() != ny) throw std::invalid_argument("correspondence: mu chart");
    Current out(mx);
    std::map<const LimitChain*, ChainPtr> extended;
    for (const CorrComponent& gc : corr.comps) {
        gc.param.check();
        if (gc.param.target_dim != mx + ny)
            throw std::invalid_argument("correspondence: component target dim");
        if (gc.param.source_dim != mx)
            throw std::invalid_argument("correspondence: dim Gamma must equal dim X");
        for (const Term& t : mu.terms()) {
            if (!t.free.empty())
                throw std::invalid_argument("correspondence: mu must have bounded term boxes");
            int dg = gc.param.source_dim;
            int d = t.src_dim;
            int sd = dg + mx + d;
            if (sd > kMaxVars) throw std::invalid_argument("correspondence: variable cap");
            ChainPtr chain;
            int slot;
            {
                auto it = extended.find(t.chain.get());
                if (it == extended.end())
                    it = extended.emplace(t.chain.get(), chain_append(t.chain, sched)).first;
                chain = it->second;
                slot = int(chain->size()) - 1;
            }
            // diagonal section on (X x Y)^2 pulled to (gamma, x, v):
            // P(gamma) - (x, g'(v))
            std::vector<Poly> S;
            for (int j = 0; j < mx; ++j)
                S.push_back(gc.param.components[j].embedded(sd, 0) - Poly::variable(sd, dg + j));
            for (int j = 0; j < ny; ++j)
                S.push_back(gc.param.components[mx + j].embedded(sd, 0) -
                            t.g.components[j].embedded(sd, dg + mx));
            if (Term::section_vanishes_on(S)) continue;  // would need dim Gamma > dim X
            int k = mx + ny;                             // top Gysin degree, flat metric
            if (k > sd) continue;
            FormExpr mf = m_factor(S, sd, k, ex_param(slot));
            if (mf.is_zero()) continue;

            Term nt;
            nt.src_dim = sd;
            nt.g.source_dim = sd;
            nt.g.target_dim = mx;
            for (int i = 0; i < mx; ++i) nt.g.components.push_back(Poly::variable(sd, dg + i));
            FormExpr wg = gc.weight.embedded(sd, 0).scaled(std::complex<double>{gc.mult, 0.0});
            nt.alpha = mf.wedge(wg).wedge(t.alpha.embedded(sd, dg + mx));
            if (nt.alpha.is_zero()) continue;
            nt.box = gc.box.product(Box::cube(2 * mx, 0.0, 0.0)).product(t.box);
            for (int i = 0; i < mx; ++i) nt.free.push_back(FreeDim{dg + i, i});
            nt.chain = chain;
            for (const TermShell& sh : t.shells) {
                TermShell ns = sh;
                ns.section.clear();
                for (const Poly& q : sh.section) ns.section.push_back(q.embedded(sd, dg + mx));
                nt.shells.push_back(std::move(ns));
            }
            TermShell sh;
            sh.section = S;
            sh.kind = ShellKind::ChiPrime;
            sh.slot = slot;
            nt.shells.push_back(std::move(sh));
            nt.label = "corr/" + t.label;
            out.add_term(std::move(nt));
        }
    }
    return out;
}

CompositionRoutes composition_difference(const ChartSpec& f1_chart, const ChartSpec& f2_chart,
                                         const Current& mu, const Schedule& outer,
                                         const Schedule& inner) {
    PullbackProblem p2;
    p2.atlas = {f2_chart};
    p2.x_dim = f2_chart.f.source_dim;
    p2.mu = mu;
    p2.schedule = inner;
    Current nu = pullback(p2);

    PullbackProblem p1;
    p1.atlas = {f1_chart};
    p1.x_dim = f1_chart.f.source_dim;
    p1.mu = nu;
    p1.schedule = outer;
    Current chained = pullback(p1);

    PullbackProblem pd;
    ChartSpec comp;
    comp.f = f2_chart.f.after(f1_chart.f);
    comp.weight = f1_chart.weight;
    comp.box = f1_chart.box;
    comp.label = "composed";
    pd.atlas = {comp};
    pd.x_dim = f1_chart.f.source_dim;
    pd.mu = mu;
    pd.schedule = outer;
    Current direct = pullback(pd);

    return {std::move(chained), std::move(direct)};
}

}  // namespace pscur
