#include "pscur/ma.hpp"

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace pscur {

void PolySection::check() const {
    if (comps.empty()) throw std::invalid_argument("section: no components");
    for (const Poly& p : comps)
        if (p.nvars() != nvars) throw std::invalid_argument("section: component nvars");
}

std::string PolySection::canonical() const {
    std::string s = "section(" + name + ";m=" + std::to_string(nvars) + ";";
    auto names = default_vars(nvars);
    for (const Poly& p : comps) s += p.str(names) + ",";
    s += std::string(";metric=") + metric_model_name(metric);
    return s + ")";
}

PolySection section_join(const PolySection& a, const PolySection& b) {
    if (a.nvars != b.nvars) throw std::invalid_argument("section_join: nvars");
    PolySection j;
    j.nvars = a.nvars;
    j.comps = a.comps;
    j.comps.insert(j.comps.end(), b.comps.begin(), b.comps.end());
    j.metric = a.metric;
    j.name = a.name + "+" + b.name;
    return j;
}

FormExpr m_factor(const std::vector<Poly>& section, int src_dim, int k, const ExprPtr& inv_eps) {
    ExprPtr s = ex_norm_sq(section);
    if (k == 0) {
        ExprPtr chi = ex_chi(ex_mul(s, inv_eps));
        return FormExpr::scalar(src_dim, ex_add(ex_one(), ex_scale({-1.0, 0.0}, chi)));
    }
    FormExpr dbar_s(src_dim), d_s(src_dim);
    for (int i = 0; i < src_dim; ++i) {
        dbar_s.add(CompKey{0, 1u << i}, d_anti(s, i));
        d_s.add(CompKey{1u << i, 0}, d_hol(s, i));
    }
    ExprPtr chi1 = ex_chi(ex_mul(s, inv_eps), 1);
    FormExpr dbar_chi = dbar_s.scaled(ex_mul(chi1, inv_eps));
    FormExpr dlog = d_s.scaled(ex_pow(s, -1));
    FormExpr acc = dbar_chi.wedge(dlog).scaled(1.0 / (2.0 * M_PI * std::complex<double>{0.0, 1.0}));
    if (k > 1) {
        FormExpr ddc_log = form_ddc(src_dim, ex_log(s));
        for (int j = 1; j < k && !acc.is_zero(); ++j) acc = acc.wedge(ddc_log);
    }
    return acc;
}

namespace {

Current m_apply(const PolySection& psi, const Current& mu, int k, double eps_fixed,
                const Schedule* sched) {
    psi.check();
    if (psi.nvars != mu.amb_dim()) throw std::invalid_argument("m: section chart != current chart");
    if (k < 0) throw std::invalid_argument("m: negative k");
    Current r(mu.amb_dim());
    std::map<const LimitChain*, ChainPtr> extended;
    for (const Term& t : mu.terms()) {
        std::vector<Poly> s;
        for (const Poly& p : psi.comps) s.push_back(p.compose(t.g.components));
        if (Term::section_vanishes_on(s)) {
            // g^*Psi = 0 on this component: it contributes through M_0 only
            if (k == 0) r.add_term(t);
            continue;
        }
        if (k > t.src_dim) continue;  // factor is a form of degree above the chart
        Term nt = t;
        ExprPtr inv_eps;
        int slot = -1;
        if (sched) {
            auto it = extended.find(t.chain.get());
            if (it == extended.end())
                it = extended.emplace(t.chain.get(), chain_append(t.chain, *sched)).first;
            nt.chain = it->second;
            slot = int(nt.chain->size()) - 1;
            inv_eps = ex_param(slot);
        } else {
            inv_eps = ex_const({1.0 / eps_fixed, 0.0});
        }
        FormExpr factor = m_factor(s, t.src_dim, k, inv_eps);
        if (factor.is_zero()) continue;
        nt.alpha = factor.wedge(t.alpha);
        if (nt.alpha.is_zero()) continue;
        TermShell sh;
        sh.section = std::move(s);
        sh.kind = k == 0 ? ShellKind::OneMinusChi : ShellKind::ChiPrime;
        sh.slot = slot;
        sh.eps_fixed = eps_fixed;
        nt.shells.push_back(std::move(sh));
        r.add_term(std::move(nt));
    }
    return r;
}

}  // namespace

Current m_eps(const PolySection& psi, const Current& mu, int k, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("m_eps: eps must be positive");
    return m_apply(psi, mu, k, eps, nullptr);
}

Current m_limit(const PolySection& psi, const Current& mu, int k, const Schedule& sched) {
    return m_apply(psi, mu, k, 0.0, &sched);
}

Current m_iterated(const PolySection& outer, int k_outer, const PolySection& inner, int k_inner,
                   const Current& mu, const Schedule& outer_sched, const Schedule& inner_sched) {
    Current in = m_limit(inner, mu, k_inner, inner_sched);
    return m_limit(outer, in, k_outer, outer_sched);
}

std::vector<Current> segre_principal(const SegreInput& in) {
    in.phi.check();
    int m = in.phi.nvars;
    for (const Poly& p : in.phi_prime)
        if (p.nvars() != m) throw std::invalid_argument("segre: phi_prime nvars");
    if (in.divisor.empty()) throw std::invalid_argument("segre: empty divisor");

    // Residual probe: |Phi| must equal prod_j |sigma_j|^{a_j} * |Phi'| everywhere.
    {
        std::mt19937_64 rng(in.probe_seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        int accepted = 0, tries = 0;
        while (accepted < 12 && tries < 4000) {
            ++tries;
            std::vector<std::complex<double>> z(m);
            for (int i = 0; i < m; ++i) z[i] = {u(rng), u(rng)};
            double phi2 = 0.0;
            for (const Poly& p : in.phi.comps) phi2 += std::norm(p.eval(z));
            double prime2 = 0.0;
            for (const Poly& p : in.phi_prime) prime2 += std::norm(p.eval(z));
            double sig = 1.0;
            bool near_zero = false;
            for (const DivisorComponent& dc : in.divisor) {
                double sv = std::abs(dc.sigma.eval(z));
                if (sv < 1e-3) near_zero = true;
                sig *= std::pow(sv, dc.mult);
            }
            if (near_zero || prime2 < 1e-12) continue;
            ++accepted;
            double ratio = std::sqrt(phi2) / (sig * std::sqrt(prime2));
            if (std::abs(ratio - 1.0) > in.residual_tol)
                throw std::domain_error("segre: divisor decomposition does not match section (residual " +
                                        std::to_string(ratio) + ")");
        }
        if (accepted < 4) throw std::domain_error("segre: could not probe divisor decomposition");
    }

    FormExpr c1_lstar = form_ddc(m, ex_log(ex_norm_sq(in.phi_prime)));
    std::vector<Current> out;
    for (int k = 0; k <= in.max_k; ++k) {
        Current sk(m);
        FormExpr ck = FormExpr::one(m);
        for (int j = 0; j < k; ++j) ck = ck.wedge(c1_lstar);
        for (const DivisorComponent& dc : in.divisor) {
            FormExpr w = dc.weight.wedge(ck.pullback(dc.param)).scaled({dc.mult, 0.0});
            if (w.is_zero()) continue;
            Term t;
            t.src_dim = dc.param.source_dim;
            t.g = dc.param;
            t.alpha = std::move(w);
            t.box = dc.box;
            sk.add_term(std::move(t));
        }
        out.push_back(std::move(sk));
    }
    return out;
}

}  // namespace pscur
