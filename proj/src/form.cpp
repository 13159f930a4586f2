#include "pscur/form.hpp"

#include <stdexcept>

namespace pscur {

namespace {

// Parity of inversions when concatenating two ascending index lists X,Y
// (all of X before all of Y) and sorting: counts pairs x>y.
int merge_inversions(std::uint32_t x, std::uint32_t y) {
    int inv = 0;
    while (y) {
        int b = __builtin_ctz(y);
        inv += __builtin_popcount(x >> (b + 1));
        y &= y - 1;
    }
    return inv;
}

int sign_of(int inversions) { return (inversions % 2 == 0) ? 1 : -1; }

}  // namespace

FormExpr FormExpr::scalar(int m, ExprPtr c) {
    FormExpr f(m);
    f.add(CompKey{}, c);
    return f;
}

FormExpr FormExpr::dz(int m, int i) {
    if (i < 0 || i >= m) throw std::out_of_range("formexpr: dz index");
    FormExpr f(m);
    f.add(CompKey{1u << i, 0}, ex_one());
    return f;
}

FormExpr FormExpr::dzbar(int m, int i) {
    if (i < 0 || i >= m) throw std::out_of_range("formexpr: dzbar index");
    FormExpr f(m);
    f.add(CompKey{0, 1u << i}, ex_one());
    return f;
}

void FormExpr::add(const CompKey& k, const ExprPtr& c) {
    if (!c || ex_is_zero(c)) return;
    auto it = comps_.find(k);
    if (it == comps_.end()) {
        comps_.emplace(k, c);
    } else {
        ExprPtr s = ex_add(it->second, c);
        if (ex_is_zero(s))
            comps_.erase(it);
        else
            it->second = s;
    }
}

FormExpr FormExpr::operator+(const FormExpr& o) const {
    if (m_ != o.m_) throw std::invalid_argument("formexpr: chart dim mismatch in +");
    FormExpr r = *this;
    for (const auto& [k, c] : o.comps_) r.add(k, c);
    return r;
}

FormExpr FormExpr::operator-(const FormExpr& o) const { return *this + o.scaled({-1.0, 0.0}); }

FormExpr FormExpr::wedge(const FormExpr& o) const {
    if (m_ != o.m_) throw std::invalid_argument("formexpr: chart dim mismatch in wedge");
    FormExpr r(m_);
    for (const auto& [ka, ca] : comps_) {
        for (const auto& [kb, cb] : o.comps_) {
            if ((ka.hol & kb.hol) || (ka.anti & kb.anti)) continue;
            int inv = merge_inversions(ka.hol, kb.hol) + merge_inversions(ka.anti, kb.anti);
            // move dz-block of b left past dzbar-block of a
            int cross = kb.p() * ka.q();
            int s = sign_of(inv + cross);
            CompKey k{ka.hol | kb.hol, ka.anti | kb.anti};
            ExprPtr c = ex_mul(ca, cb);
            if (s < 0) c = ex_scale({-1.0, 0.0}, c);
            r.add(k, c);
        }
    }
    return r;
}

FormExpr FormExpr::scaled(std::complex<double> c) const { return scaled(ex_const(c)); }

FormExpr FormExpr::scaled(const ExprPtr& c) const {
    FormExpr r(m_);
    for (const auto& [k, v] : comps_) r.add(k, ex_mul(c, v));
    return r;
}

FormExpr FormExpr::partial() const {
    FormExpr r(m_);
    for (const auto& [k, c] : comps_) {
        for (int i = 0; i < m_; ++i) {
            if (k.hol & (1u << i)) continue;
            ExprPtr dc = d_hol(c, i);
            if (ex_is_zero(dc)) continue;
            int inv = __builtin_popcount(k.hol & ((1u << i) - 1));
            if (sign_of(inv) < 0) dc = ex_scale({-1.0, 0.0}, dc);
            r.add(CompKey{k.hol | (1u << i), k.anti}, dc);
        }
    }
    return r;
}

FormExpr FormExpr::dbar() const {
    FormExpr r(m_);
    for (const auto& [k, c] : comps_) {
        int p = k.p();
        for (int i = 0; i < m_; ++i) {
            if (k.anti & (1u << i)) continue;
            ExprPtr dc = d_anti(c, i);
            if (ex_is_zero(dc)) continue;
            int inv = p + __builtin_popcount(k.anti & ((1u << i) - 1));
            if (sign_of(inv) < 0) dc = ex_scale({-1.0, 0.0}, dc);
            r.add(CompKey{k.hol, k.anti | (1u << i)}, dc);
        }
    }
    return r;
}

FormExpr FormExpr::d() const { return partial() + dbar(); }

std::optional<std::pair<int, int>> FormExpr::pure_bidegree() const {
    std::optional<std::pair<int, int>> deg;
    for (const auto& [k, c] : comps_) {
        std::pair<int, int> pq{k.p(), k.q()};
        if (!deg)
            deg = pq;
        else if (*deg != pq)
            return std::nullopt;
    }
    return deg;
}

std::set<std::pair<int, int>> FormExpr::bidegrees() const {
    std::set<std::pair<int, int>> out;
    for (const auto& [k, c] : comps_) out.insert({k.p(), k.q()});
    return out;
}

FormExpr FormExpr::component(int p, int q) const {
    FormExpr r(m_);
    for (const auto& [k, c] : comps_)
        if (k.p() == p && k.q() == q) r.add(k, c);
    return r;
}

ExprPtr FormExpr::top_coefficient() const {
    std::uint32_t full = m_ == 32 ? ~0u : ((1u << m_) - 1);
    auto it = comps_.find(CompKey{full, full});
    return it == comps_.end() ? ex_zero() : it->second;
}

FormExpr FormExpr::pullback(const PolyMap& g) const {
    if (g.target_dim != m_) throw std::invalid_argument("formexpr: pullback target dim");
    int s = g.source_dim;
    FormExpr r(s);
    for (const auto& [k, c] : comps_) {
        FormExpr acc = FormExpr::scalar(s, ex_compose(c, g));
        for (int a = 0; a < m_ && !acc.is_zero(); ++a) {
            if (!(k.hol & (1u << a))) continue;
            FormExpr w(s);
            for (int i = 0; i < s; ++i) {
                Poly dg = g.components[a].diff(i);
                if (dg.is_zero()) continue;
                w.add(CompKey{1u << i, 0}, ex_poly(dg));
            }
            acc = acc.wedge(w);
        }
        for (int b = 0; b < m_ && !acc.is_zero(); ++b) {
            if (!(k.anti & (1u << b))) continue;
            FormExpr w(s);
            for (int i = 0; i < s; ++i) {
                Poly dg = g.components[b].diff(i);
                if (dg.is_zero()) continue;
                w.add(CompKey{0, 1u << i}, ex_poly_conj(dg));
            }
            acc = acc.wedge(w);
        }
        for (const auto& [kk, cc] : acc.comps()) r.add(kk, cc);
    }
    return r;
}

FormExpr FormExpr::embedded(int new_dim, int shift) const {
    if (shift < 0 || m_ + shift > new_dim) throw std::invalid_argument("formexpr: embed range");
    FormExpr r(new_dim);
    PolyMap widen;  // coefficient substitution z_i -> z_{i+shift}
    widen.source_dim = new_dim;
    widen.target_dim = m_;
    for (int i = 0; i < m_; ++i) widen.components.push_back(Poly::variable(new_dim, i + shift));
    for (const auto& [k, c] : comps_)
        r.add(CompKey{k.hol << shift, k.anti << shift}, ex_compose(c, widen));
    return r;
}

std::complex<double> FormExpr::eval_comp(const CompKey& k, std::span<const std::complex<double>> z,
                                         std::span<const double> params) const {
    auto it = comps_.find(k);
    if (it == comps_.end()) return {0.0, 0.0};
    return ex_eval(it->second, z, params);
}

std::string FormExpr::canonical() const {
    std::string out = "form(m=" + std::to_string(m_) + ";";
    for (const auto& [k, c] : comps_) {
        out += "[" + std::to_string(k.hol) + "," + std::to_string(k.anti) + "]=";
        ex_print(c, out);
        out += ";";
    }
    out += ")";
    return out;
}

FormExpr form_dc(int m, const ExprPtr& u) {
    FormExpr p(m), q(m);
    for (int i = 0; i < m; ++i) {
        p.add(CompKey{1u << i, 0}, d_hol(u, i));
        q.add(CompKey{0, 1u << i}, d_anti(u, i));
    }
    const std::complex<double> c = 1.0 / (4.0 * M_PI * std::complex<double>{0.0, 1.0});
    return (p - q).scaled(c);
}

FormExpr form_ddc(int m, const ExprPtr& u) {
    // dd^c u = (i/2pi) partial dbar u
    FormExpr db(m);
    for (int i = 0; i < m; ++i) db.add(CompKey{0, 1u << i}, d_anti(u, i));
    FormExpr pdb = db.partial();
    return pdb.scaled(std::complex<double>{0.0, 1.0} / (2.0 * M_PI));
}

std::vector<FormExpr> chern_forms(MetricModel model, int chart_dim) {
    std::vector<FormExpr> out;
    out.push_back(FormExpr::one(chart_dim));
    switch (model) {
        case MetricModel::Flat:
            for (int k = 1; k <= chart_dim; ++k) out.push_back(FormExpr(chart_dim));
            break;
        case MetricModel::FubiniStudyP1: {
            if (chart_dim != 1)
                throw std::invalid_argument("chern_forms: fubini_study_P1 needs a 1-dim chart");
            Poly t = Poly::variable(1, 0);
            ExprPtr u = ex_log(ex_add(ex_one(), ex_mul(ex_poly(t), ex_poly_conj(t))));
            out.push_back(form_ddc(1, u));
            break;
        }
    }
    return out;
}

const char* metric_model_name(MetricModel m) {
    switch (m) {
        case MetricModel::Flat:
            return "flat";
        case MetricModel::FubiniStudyP1:
            return "fubini_study_P1";
    }
    return "?";
}

}  // namespace pscur
