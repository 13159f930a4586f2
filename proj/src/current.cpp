#include "pscur/current.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace pscur {

std::string Schedule::canonical() const {
    char buf[192];
    snprintf(buf, sizeof buf, "sched(eps0=%.9g,r=%.9g,n=%d,rich=%d,contr=%.9g,nest=%.9g)", eps0,
             ratio, steps, richardson, contraction, nest_factor);
    return buf;
}

Extrapolated extrapolate(const std::vector<LadderRow>& rows, const Schedule& sched) {
    Extrapolated out;
    if (rows.empty()) return out;
    size_t n = rows.size();
    double equad = 0.0;
    for (const LadderRow& r : rows) equad = std::max(equad, r.err);
    out.value = rows[n - 1].value;
    if (n == 1) {
        out.estimate = equad;
        return out;
    }
    std::complex<double> dlast = rows[n - 1].value - rows[n - 2].value;
    double scale = 0.0;
    for (const LadderRow& r : rows) scale = std::max(scale, std::abs(r.value));
    double noise = 4.0 * equad + 1e-14 * scale + 1e-300;
    if (std::abs(dlast) <= noise) {
        // differences are at the quadrature noise floor: already converged
        out.estimate = std::abs(dlast) + equad;
        return out;
    }
    if (n == 2 || sched.richardson == 0) {
        out.estimate = std::abs(dlast) + equad;
        return out;
    }
    std::complex<double> dprev = rows[n - 2].value - rows[n - 3].value;
    if (std::abs(dprev) <= noise) {
        // previous step had converged; treat the last wiggle as the bound
        out.estimate = std::abs(dlast) + equad;
        return out;
    }
    std::complex<double> rho = dlast / dprev;
    if (std::abs(rho) >= sched.contraction) {
        out.converged = false;
        out.estimate = 3.0 * std::abs(dlast) + equad;
        return out;
    }
    std::complex<double> tail = dlast * rho / (1.0 - rho);
    out.value = rows[n - 1].value + tail;
    out.estimate = 1.5 * std::abs(tail) + std::abs(dlast) * std::abs(rho) * std::abs(rho) + equad;
    return out;
}

ChainPtr chain_append(const ChainPtr& chain, const Schedule& s) {
    auto next = std::make_shared<LimitChain>(chain ? *chain : LimitChain{});
    next->push_back(s);
    return next;
}

bool Term::section_vanishes_on(const std::vector<Poly>& section_after_g) {
    for (const Poly& p : section_after_g)
        if (!p.is_zero()) return false;
    return true;
}

std::pair<int, int> Term::pushed_bidegree() const {
    auto bd = alpha.pure_bidegree();
    if (!bd) throw std::logic_error("term: mixed-bidegree alpha has no single bidegree");
    int shift = g.target_dim - src_dim;
    return {bd->first + shift, bd->second + shift};
}

std::string Term::canonical() const {
    std::string s = "term(src=" + std::to_string(src_dim) + ";g=";
    auto names = default_vars(src_dim);
    for (const Poly& c : g.components) s += c.str(names) + ",";
    s += ";alpha=" + alpha.canonical() + ";box=" + box.str() + ";free=";
    for (const FreeDim& f : free) s += std::to_string(f.src) + ":" + std::to_string(f.amb) + ",";
    s += ";shells=";
    for (const TermShell& sh : shells) {
        s += "{";
        for (const Poly& p : sh.section) s += p.str(names) + ",";
        s += "k" + std::to_string(int(sh.kind)) + "s" + std::to_string(sh.slot) + "e";
        char buf[32];
        snprintf(buf, sizeof buf, "%.9g", sh.eps_fixed);
        s += buf;
        s += "}";
    }
    if (chain) {
        s += ";chain=";
        for (const Schedule& c : *chain) s += c.canonical();
    }
    s += ";tag=" + std::to_string(chart_tag);
    return s + ")";
}

std::string TestForm::canonical() const { return "test(" + form.canonical() + ";" + box.str() + ")"; }

void Current::add_term(Term t) {
    if (t.g.target_dim != amb_dim_) throw std::invalid_argument("current: term ambient mismatch");
    t.g.check();
    if (t.label.empty()) t.label = "t" + std::to_string(terms_.size());
    terms_.push_back(std::move(t));
}

Current Current::operator+(const Current& o) const {
    if (amb_dim_ != o.amb_dim_ && !o.terms_.empty() && !terms_.empty())
        throw std::invalid_argument("current: ambient mismatch in +");
    Current r = *this;
    if (r.terms_.empty()) r.amb_dim_ = o.amb_dim_;
    for (const Term& t : o.terms_) r.add_term(t);
    return r;
}

Current Current::scaled(std::complex<double> c) const {
    Current r(amb_dim_);
    for (const Term& t : terms_) {
        Term nt = t;
        nt.alpha = t.alpha.scaled(c);
        r.add_term(std::move(nt));
    }
    return r;
}

Current Current::smooth(int amb_dim, FormExpr alpha, Box box) {
    Current c(amb_dim);
    Term t;
    t.src_dim = amb_dim;
    t.g = PolyMap::identity(amb_dim);
    t.alpha = std::move(alpha);
    t.box = std::move(box);
    c.add_term(std::move(t));
    return c;
}

Current Current::cycle(int amb_dim, const PolyMap& param, double mult, FormExpr weight, Box box) {
    if (param.target_dim != amb_dim) throw std::invalid_argument("cycle: target dim");
    Current c(amb_dim);
    Term t;
    t.src_dim = param.source_dim;
    t.g = param;
    t.alpha = weight.scaled(std::complex<double>{mult, 0.0});
    t.box = std::move(box);
    c.add_term(std::move(t));
    return c;
}

Current Current::dirac(int amb_dim, std::vector<std::complex<double>> at) {
    if (int(at.size()) != amb_dim) throw std::invalid_argument("dirac: point dimension");
    PolyMap g;
    g.source_dim = 0;
    g.target_dim = amb_dim;
    for (int i = 0; i < amb_dim; ++i)
        g.components.push_back(
            Poly::constant(0, GaussRat(Rational(at[i].real()), Rational(at[i].imag()))));
    Current c(amb_dim);
    Term t;
    t.src_dim = 0;
    t.g = std::move(g);
    t.alpha = FormExpr::one(0);
    t.box = Box{};
    c.add_term(std::move(t));
    return c;
}

std::optional<std::pair<int, int>> Current::pure_bidegree() const {
    std::optional<std::pair<int, int>> deg;
    for (const Term& t : terms_) {
        auto bd = t.alpha.pure_bidegree();
        if (!bd) return std::nullopt;
        int shift = amb_dim_ - t.src_dim;
        std::pair<int, int> pq{bd->first + shift, bd->second + shift};
        if (!deg)
            deg = pq;
        else if (*deg != pq)
            return std::nullopt;
    }
    return deg;
}

namespace {

std::complex<double> measure_factor(int cdim) {
    // converts the coefficient of dz_1^..^dz_d^dzbar_1^..^dzbar_d to Lebesgue
    std::complex<double> f{1.0, 0.0};
    for (int i = 0; i < cdim; ++i) f *= std::complex<double>{0.0, -2.0};
    if ((cdim * (cdim - 1) / 2) % 2 == 1) f = -f;
    return f;
}

struct PreparedTerm {
    Integrand ig;
    Box box;
    bool zero = false;
};

PreparedTerm prepare_term(const Term& t, const TestForm& xi, size_t nparams) {
    PreparedTerm out;
    FormExpr pulled = xi.form.pullback(t.g);
    FormExpr total = t.alpha.wedge(pulled);
    ExprPtr top = total.top_coefficient();
    if (ex_is_zero(top)) {
        out.zero = true;
        return out;
    }
    out.ig.tape = Tape::compile(top, t.src_dim);
    out.ig.cdim = t.src_dim;
    out.ig.measure = measure_factor(t.src_dim);
    out.ig.params.assign(nparams, 0.0);
    for (const TermShell& sh : t.shells) {
        ShellConstraint sc;
        sc.norm_sq = Tape::compile(ex_norm_sq(sh.section), t.src_dim);
        sc.kind = sh.kind;
        sc.param_slot = sh.slot;
        sc.eps_fixed = sh.eps_fixed;
        out.ig.shells.push_back(std::move(sc));
    }
    out.box = t.box;
    for (const FreeDim& f : t.free) {
        if (f.amb < 0 || 2 * f.amb + 1 >= xi.box.real_dim())
            throw std::invalid_argument("pair: free direction not covered by test form box");
        out.box.iv[2 * f.src] = xi.box.iv[2 * f.amb];
        out.box.iv[2 * f.src + 1] = xi.box.iv[2 * f.amb + 1];
    }
    for (const Interval& iv : out.box.iv)
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
            throw std::invalid_argument("pair: unbounded support box");
    return out;
}

struct GroupEvaluator {
    std::vector<PreparedTerm>* terms;
    const LimitChain* chain;
    const PairOptions* opt;
    PairResult* sink;

    std::pair<std::complex<double>, double> integrate_all(const std::vector<double>& params,
                                                          bool* conv) {
        std::complex<double> v{0.0, 0.0};
        double e = 0.0;
        for (PreparedTerm& pt : *terms) {
            if (pt.zero) continue;
            pt.ig.params = params;
            QuadResult qr = integrate(pt.ig, pt.box, opt->quad, opt->workers);
            v += qr.value;
            e += qr.estimate;
            sink->cells += qr.cells;
            if (qr.flagged) sink->quad_flagged = true;
        }
        (void)conv;
        return {v, e};
    }

    // level: index into chain; evaluates that ladder with everything outer fixed
    Extrapolated eval_level(int level, double outer_eps, std::vector<double>& params,
                            std::vector<LadderRow>* rows_out) {
        const Schedule& s = (*chain)[level];
        double start = s.eps0;
        if (std::isfinite(outer_eps)) start = std::min(start, outer_eps * s.nest_factor);
        std::vector<LadderRow> rows;
        bool inner_ok = true;
        double eps = start;
        for (int j = 0; j < s.steps; ++j, eps *= s.ratio) {
            params[level] = 1.0 / eps;
            LadderRow row;
            row.eps = eps;
            if (level == 0) {
                auto [v, e] = integrate_all(params, nullptr);
                row.value = v;
                row.err = e;
            } else {
                Extrapolated inner = eval_level(level - 1, eps, params, nullptr);
                row.value = inner.value;
                row.err = inner.estimate;
                inner_ok = inner_ok && inner.converged;
            }
            rows.push_back(row);
        }
        Extrapolated ex = extrapolate(rows, s);
        ex.converged = ex.converged && inner_ok;
        if (rows_out) *rows_out = std::move(rows);
        return ex;
    }
};

}  // namespace

PairResult Current::pair(const TestForm& xi, const PairOptions& opt) const {
    return pair_atlas(std::span<const TestForm>(&xi, 1), opt);
}

PairResult Current::pair_atlas(std::span<const TestForm> xi_by_chart,
                               const PairOptions& opt) const {
    if (xi_by_chart.empty()) throw std::invalid_argument("pair: no test form");
    for (const TestForm& xi : xi_by_chart)
        if (xi.box.real_dim() != 2 * amb_dim_)
            throw std::invalid_argument("pair: test form box dimension");
    if (opt.strict_bidegree) {
        auto bmu = pure_bidegree();
        auto bxi = xi_by_chart[0].form.pure_bidegree();
        if (bmu && bxi &&
            (bmu->first + bxi->first != amb_dim_ || bmu->second + bxi->second != amb_dim_))
            throw std::invalid_argument("pair: bidegree mismatch");
    }

    PairResult res;
    // group terms by chain identity, first-seen order
    std::vector<const LimitChain*> group_keys;
    std::map<const LimitChain*, std::vector<size_t>> groups;
    for (size_t i = 0; i < terms_.size(); ++i) {
        const LimitChain* key = terms_[i].chain.get();
        if (!groups.count(key)) group_keys.push_back(key);
        groups[key].push_back(i);
    }

    for (const LimitChain* key : group_keys) {
        std::vector<PreparedTerm> prepared;
        size_t nparams = key ? key->size() : 0;
        for (size_t i : groups[key]) {
            const Term& t = terms_[i];
            if (t.chart_tag < 0 || t.chart_tag >= int(xi_by_chart.size()))
                throw std::invalid_argument("pair: term chart has no test form representative");
            prepared.push_back(prepare_term(t, xi_by_chart[t.chart_tag], nparams));
        }

        GroupEvaluator ge{&prepared, key, &opt, &res};
        if (!key || key->empty()) {
            std::vector<double> params;
            auto [v, e] = ge.integrate_all(params, nullptr);
            res.value += v;
            res.estimate += e;
        } else {
            std::vector<double> params(nparams, 0.0);
            GroupTable table;
            table.label = "group" + std::to_string(res.tables.size());
            Extrapolated ex = ge.eval_level(int(nparams) - 1,
                                            std::numeric_limits<double>::infinity(), params,
                                            &table.rows);
            res.value += ex.value;
            res.estimate += ex.estimate;
            res.converged = res.converged && ex.converged;
            res.tables.push_back(std::move(table));
        }
    }
    return res;
}

Current Current::d() const {
    Current r(amb_dim_);
    for (const Term& t : terms_) {
        Term nt = t;
        nt.alpha = t.alpha.d();
        if (!nt.alpha.is_zero()) r.add_term(std::move(nt));
    }
    return r;
}

Current Current::partial() const {
    Current r(amb_dim_);
    for (const Term& t : terms_) {
        Term nt = t;
        nt.alpha = t.alpha.partial();
        if (!nt.alpha.is_zero()) r.add_term(std::move(nt));
    }
    return r;
}

Current Current::dbar() const {
    Current r(amb_dim_);
    for (const Term& t : terms_) {
        Term nt = t;
        nt.alpha = t.alpha.dbar();
        if (!nt.alpha.is_zero()) r.add_term(std::move(nt));
    }
    return r;
}

Current Current::wedge_smooth(const FormExpr& phi) const {
    if (phi.chart_dim() != amb_dim_) throw std::invalid_argument("wedge_smooth: chart dim");
    Current r(amb_dim_);
    for (const Term& t : terms_) {
        Term nt = t;
        nt.alpha = phi.pullback(t.g).wedge(t.alpha);
        if (!nt.alpha.is_zero()) r.add_term(std::move(nt));
    }
    return r;
}

Current Current::pushforward(const PolyMap& h, const Box* image_box) const {
    if (h.source_dim != amb_dim_) throw std::invalid_argument("pushforward: map source dim");
    Current r(h.target_dim);
    for (const Term& t : terms_) {
        if (!t.free.empty())
            throw std::invalid_argument("pushforward: term has free directions");
        if (image_box) {
            // properness modeled by declared boxes: spot-check that sampled
            // support points land inside the declared image region
            int rd = t.box.real_dim();
            std::vector<std::vector<double>> probes;
            std::vector<double> c(rd);
            for (int d2 = 0; d2 < rd; ++d2) c[d2] = t.box.iv[d2].mid();
            probes.push_back(c);
            for (int d2 = 0; d2 < rd; ++d2) {
                auto lo = c, hi = c;
                lo[d2] = t.box.iv[d2].lo;
                hi[d2] = t.box.iv[d2].hi;
                probes.push_back(lo);
                probes.push_back(hi);
            }
            for (const auto& x : probes) {
                std::vector<std::complex<double>> z(t.src_dim);
                for (int i = 0; i < t.src_dim; ++i) z[i] = {x[2 * i], x[2 * i + 1]};
                auto y = h.after(t.g).eval(z);
                for (int i = 0; i < h.target_dim; ++i) {
                    double slack = 1e-9;
                    if (y[i].real() < image_box->iv[2 * i].lo - slack ||
                        y[i].real() > image_box->iv[2 * i].hi + slack ||
                        y[i].imag() < image_box->iv[2 * i + 1].lo - slack ||
                        y[i].imag() > image_box->iv[2 * i + 1].hi + slack)
                        throw std::domain_error("pushforward: support leaves declared image box");
                }
            }
        }
        Term nt = t;
        nt.g = h.after(t.g);
        r.add_term(std::move(nt));
    }
    return r;
}

Current Current::cross_with(int x_dim) const {
    Current r(x_dim + amb_dim_);
    for (const Term& t : terms_) {
        Term nt;
        nt.src_dim = x_dim + t.src_dim;
        nt.g.source_dim = nt.src_dim;
        nt.g.target_dim = x_dim + amb_dim_;
        for (int i = 0; i < x_dim; ++i) nt.g.components.push_back(Poly::variable(nt.src_dim, i));
        for (const Poly& c : t.g.components) nt.g.components.push_back(c.embedded(nt.src_dim, x_dim));
        nt.alpha = t.alpha.embedded(nt.src_dim, x_dim);
        nt.box = Box::cube(2 * x_dim, 0.0, 0.0).product(t.box);
        for (int i = 0; i < x_dim; ++i) nt.free.push_back(FreeDim{i, i});
        for (const FreeDim& f : t.free) nt.free.push_back(FreeDim{f.src + x_dim, f.amb + x_dim});
        nt.chain = t.chain;
        for (const TermShell& sh : t.shells) {
            TermShell ns = sh;
            ns.section.clear();
            for (const Poly& p : sh.section) ns.section.push_back(p.embedded(nt.src_dim, x_dim));
            nt.shells.push_back(std::move(ns));
        }
        nt.label = t.label;
        r.add_term(std::move(nt));
    }
    return r;
}

Current Current::restrict(const std::vector<Poly>& w, RestrictSide side, double eps) const {
    return restrict_impl(w, side, eps, nullptr);
}

Current Current::restrict(const std::vector<Poly>& w, RestrictSide side,
                          const Schedule& sched) const {
    return restrict_impl(w, side, 0.0, &sched);
}

Current Current::restrict_impl(const std::vector<Poly>& w, RestrictSide side, double eps_fixed,
                               const Schedule* sched) const {
    for (const Poly& p : w)
        if (p.nvars() != amb_dim_) throw std::invalid_argument("restrict: cutting tuple nvars");
    Current r(amb_dim_);
    std::map<const LimitChain*, ChainPtr> extended;
    for (const Term& t : terms_) {
        std::vector<Poly> composed;
        for (const Poly& p : w) composed.push_back(p.compose(t.g.components));
        if (Term::section_vanishes_on(composed)) {
            // component inside W: kept by 1_W, killed by 1_{V\W}
            if (side == RestrictSide::OnW) r.add_term(t);
            continue;
        }
        Term nt = t;
        ExprPtr s = ex_norm_sq(composed);
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
        ExprPtr chi = ex_chi(ex_mul(s, inv_eps));
        ExprPtr factor = side == RestrictSide::OffW
                             ? chi
                             : ex_add(ex_one(), ex_scale({-1.0, 0.0}, chi));
        nt.alpha = t.alpha.scaled(factor);
        TermShell sh;
        sh.section = std::move(composed);
        sh.kind = side == RestrictSide::OffW ? ShellKind::ChiFactor : ShellKind::OneMinusChi;
        sh.slot = slot;
        sh.eps_fixed = eps_fixed;
        nt.shells.push_back(std::move(sh));
        r.add_term(std::move(nt));
    }
    return r;
}

std::string Current::canonical() const {
    std::string s = "current(m=" + std::to_string(amb_dim_) + ";";
    for (const Term& t : terms_) s += t.canonical();
    return s + ")";
}

}  // namespace pscur
