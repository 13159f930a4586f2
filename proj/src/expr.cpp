#include "pscur/expr.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace pscur {

namespace cutoff {

namespace {

// Q_k coefficient rows for B^(k)(s) = Q_k(1/s) exp(-1/s); Q_0 = 1.
const std::vector<double>& q_row(int k) {
    static std::vector<std::vector<double>> rows = {{1.0}};
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    while (int(rows.size()) <= k) {
        const auto& q = rows.back();
        // Q_{k+1}(u) = u^2 (Q_k(u) - Q_k'(u))
        std::vector<double> next(q.size() + 2, 0.0);
        for (size_t j = 0; j < q.size(); ++j) {
            next[j + 2] += q[j];
            if (j >= 1) next[j + 1] -= double(j) * q[j];
        }
        rows.push_back(std::move(next));
    }
    return rows[k];
}

double bexp(double s, int k) {
    if (s <= 0.0) return 0.0;
    const auto& q = q_row(k);
    double u = 1.0 / s;
    double acc = 0.0;
    for (size_t j = q.size(); j-- > 0;) acc = acc * u + q[j];
    return acc * std::exp(-u);
}

}  // namespace

double chi(double t, int deriv) {
    if (t <= 1.0) return 0.0;
    if (t >= 2.0) return deriv == 0 ? 1.0 : 0.0;
    // chi = N/D with N = B(t-1), D = B(t-1) + B(2-t); derivatives by the
    // quotient recurrence chi^(k) = (N^(k) - sum_{j=1..k} C(k,j) D^(j) chi^(k-j)) / D.
    std::vector<double> n(deriv + 1), d(deriv + 1);
    for (int j = 0; j <= deriv; ++j) {
        double b1 = bexp(t - 1.0, j);
        double b2 = bexp(2.0 - t, j);
        n[j] = b1;
        d[j] = b1 + (j % 2 == 0 ? b2 : -b2);
    }
    std::vector<double> c(deriv + 1);
    for (int k = 0; k <= deriv; ++k) {
        double acc = n[k];
        double binom = 1.0;
        for (int j = 1; j <= k; ++j) {
            binom = binom * double(k - j + 1) / double(j);
            acc -= binom * d[j] * c[k - j];
        }
        c[k] = acc / d[0];
    }
    return c[deriv];
}

}  // namespace cutoff

namespace {

ExprPtr make(SmoothExpr e) { return std::make_shared<const SmoothExpr>(std::move(e)); }

const ExprPtr& cached_zero() {
    static ExprPtr z = [] { SmoothExpr e; e.kind = NodeKind::Const; e.cval = {0.0, 0.0}; return make(std::move(e)); }();
    return z;
}
const ExprPtr& cached_one() {
    static ExprPtr o = [] { SmoothExpr e; e.kind = NodeKind::Const; e.cval = {1.0, 0.0}; return make(std::move(e)); }();
    return o;
}

}  // namespace

ExprPtr ex_const(std::complex<double> c) {
    if (c == std::complex<double>{0.0, 0.0}) return cached_zero();
    if (c == std::complex<double>{1.0, 0.0}) return cached_one();
    SmoothExpr e;
    e.kind = NodeKind::Const;
    e.cval = c;
    return make(std::move(e));
}

ExprPtr ex_zero() { return cached_zero(); }
ExprPtr ex_one() { return cached_one(); }

ExprPtr ex_param(int slot) {
    SmoothExpr e;
    e.kind = NodeKind::Param;
    e.param_slot = slot;
    return make(std::move(e));
}

ExprPtr ex_poly(Poly p) {
    if (p.is_zero()) return cached_zero();
    if (p.is_constant()) return ex_const(p.constant_value().to_complex());
    SmoothExpr e;
    e.kind = NodeKind::PolyH;
    e.poly = std::move(p);
    return make(std::move(e));
}

ExprPtr ex_poly_conj(Poly p) {
    if (p.is_zero()) return cached_zero();
    if (p.is_constant()) return ex_const(std::conj(p.constant_value().to_complex()));
    SmoothExpr e;
    e.kind = NodeKind::PolyA;
    e.poly = std::move(p);
    return make(std::move(e));
}

bool ex_is_zero(const ExprPtr& e) {
    return e->kind == NodeKind::Const && e->cval == std::complex<double>{0.0, 0.0};
}

bool ex_is_const(const ExprPtr& e, std::complex<double>* out) {
    if (e->kind != NodeKind::Const) return false;
    if (out) *out = e->cval;
    return true;
}

ExprPtr ex_sum(std::vector<ExprPtr> kids) {
    std::vector<ExprPtr> flat;
    std::complex<double> cacc{0.0, 0.0};
    for (auto& k : kids) {
        if (!k) throw std::invalid_argument("ex_sum: null child");
        if (k->kind == NodeKind::Const) {
            cacc += k->cval;
        } else if (k->kind == NodeKind::Sum) {
            for (const auto& kk : k->kids) flat.push_back(kk);
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (cacc != std::complex<double>{0.0, 0.0}) flat.push_back(ex_const(cacc));
    if (flat.empty()) return cached_zero();
    if (flat.size() == 1) return flat[0];
    SmoothExpr e;
    e.kind = NodeKind::Sum;
    e.kids = std::move(flat);
    return make(std::move(e));
}

ExprPtr ex_prod(std::vector<ExprPtr> kids) {
    std::vector<ExprPtr> flat;
    std::complex<double> cacc{1.0, 0.0};
    for (auto& k : kids) {
        if (!k) throw std::invalid_argument("ex_prod: null child");
        if (ex_is_zero(k)) return cached_zero();
        if (k->kind == NodeKind::Const) {
            cacc *= k->cval;
        } else if (k->kind == NodeKind::Prod) {
            for (const auto& kk : k->kids) flat.push_back(kk);
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (cacc != std::complex<double>{1.0, 0.0}) flat.push_back(ex_const(cacc));
    if (flat.empty()) return cached_one();
    if (flat.size() == 1) return flat[0];
    SmoothExpr e;
    e.kind = NodeKind::Prod;
    e.kids = std::move(flat);
    return make(std::move(e));
}

ExprPtr ex_pow(ExprPtr base, int k) {
    if (k == 0) return cached_one();
    if (k == 1) return base;
    if (ex_is_zero(base)) {
        if (k < 0) throw std::domain_error("ex_pow: zero to negative power");
        return cached_zero();
    }
    std::complex<double> c;
    if (ex_is_const(base, &c)) return ex_const(std::pow(c, k));
    if (base->kind == NodeKind::Pow) {
        int kk = base->ipow * k;
        return ex_pow(base->kids[0], kk);
    }
    SmoothExpr e;
    e.kind = NodeKind::Pow;
    e.kids = {std::move(base)};
    e.ipow = k;
    return make(std::move(e));
}

ExprPtr ex_log(ExprPtr arg) {
    std::complex<double> c;
    if (ex_is_const(arg, &c)) return ex_const(std::log(c));
    SmoothExpr e;
    e.kind = NodeKind::Log;
    e.kids = {std::move(arg)};
    return make(std::move(e));
}

ExprPtr ex_chi(ExprPtr arg, int deriv) {
    std::complex<double> c;
    if (ex_is_const(arg, &c)) return ex_const({cutoff::chi(c.real(), deriv), 0.0});
    SmoothExpr e;
    e.kind = NodeKind::Chi;
    e.kids = {std::move(arg)};
    e.chi_deriv = deriv;
    return make(std::move(e));
}

ExprPtr ex_scale(std::complex<double> c, ExprPtr a) { return ex_mul(ex_const(c), std::move(a)); }

ExprPtr ex_norm_sq(const std::vector<Poly>& section) {
    std::vector<ExprPtr> parts;
    for (const Poly& p : section) parts.push_back(ex_mul(ex_poly(p), ex_poly_conj(p)));
    return ex_sum(std::move(parts));
}

ExprPtr ex_bump(int nvars, const std::vector<std::complex<double>>& center, double radius) {
    if (int(center.size()) != nvars) throw std::invalid_argument("ex_bump: center dimension");
    if (radius <= 0.0) throw std::invalid_argument("ex_bump: radius");
    std::vector<Poly> shifted;
    for (int i = 0; i < nvars; ++i) {
        Rational re(center[i].real()), im(center[i].imag());
        shifted.push_back(Poly::variable(nvars, i) - Poly::constant(nvars, GaussRat(re, im)));
    }
    ExprPtr s = ex_norm_sq(shifted);
    ExprPtr arg = ex_scale({2.0 / (radius * radius), 0.0}, s);
    return ex_add(ex_one(), ex_scale({-1.0, 0.0}, ex_chi(arg)));
}

ExprPtr d_hol(const ExprPtr& e, int var) {
    switch (e->kind) {
        case NodeKind::Const:
        case NodeKind::Param:
        case NodeKind::PolyA:
            return ex_zero();
        case NodeKind::PolyH:
            return ex_poly(e->poly.diff(var));
        case NodeKind::Sum: {
            std::vector<ExprPtr> parts;
            for (const auto& k : e->kids) parts.push_back(d_hol(k, var));
            return ex_sum(std::move(parts));
        }
        case NodeKind::Prod: {
            std::vector<ExprPtr> parts;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                ExprPtr dk = d_hol(e->kids[i], var);
                if (ex_is_zero(dk)) continue;
                std::vector<ExprPtr> fac;
                for (size_t j = 0; j < e->kids.size(); ++j) fac.push_back(j == i ? dk : e->kids[j]);
                parts.push_back(ex_prod(std::move(fac)));
            }
            return ex_sum(std::move(parts));
        }
        case NodeKind::Pow: {
            ExprPtr du = d_hol(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_prod({ex_const({double(e->ipow), 0.0}), ex_pow(e->kids[0], e->ipow - 1),
                            std::move(du)});
        }
        case NodeKind::Log: {
            ExprPtr du = d_hol(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_mul(ex_pow(e->kids[0], -1), std::move(du));
        }
        case NodeKind::Chi: {
            ExprPtr du = d_hol(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_mul(ex_chi(e->kids[0], e->chi_deriv + 1), std::move(du));
        }
    }
    throw std::logic_error("d_hol: bad node");
}

ExprPtr d_anti(const ExprPtr& e, int var) {
    switch (e->kind) {
        case NodeKind::Const:
        case NodeKind::Param:
        case NodeKind::PolyH:
            return ex_zero();
        case NodeKind::PolyA:
            return ex_poly_conj(e->poly.diff(var));
        case NodeKind::Sum: {
            std::vector<ExprPtr> parts;
            for (const auto& k : e->kids) parts.push_back(d_anti(k, var));
            return ex_sum(std::move(parts));
        }
        case NodeKind::Prod: {
            std::vector<ExprPtr> parts;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                ExprPtr dk = d_anti(e->kids[i], var);
                if (ex_is_zero(dk)) continue;
                std::vector<ExprPtr> fac;
                for (size_t j = 0; j < e->kids.size(); ++j) fac.push_back(j == i ? dk : e->kids[j]);
                parts.push_back(ex_prod(std::move(fac)));
            }
            return ex_sum(std::move(parts));
        }
        case NodeKind::Pow: {
            ExprPtr du = d_anti(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_prod({ex_const({double(e->ipow), 0.0}), ex_pow(e->kids[0], e->ipow - 1),
                            std::move(du)});
        }
        case NodeKind::Log: {
            ExprPtr du = d_anti(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_mul(ex_pow(e->kids[0], -1), std::move(du));
        }
        case NodeKind::Chi: {
            ExprPtr du = d_anti(e->kids[0], var);
            if (ex_is_zero(du)) return ex_zero();
            return ex_mul(ex_chi(e->kids[0], e->chi_deriv + 1), std::move(du));
        }
    }
    throw std::logic_error("d_anti: bad node");
}

ExprPtr ex_compose(const ExprPtr& e, const PolyMap& g) {
    switch (e->kind) {
        case NodeKind::Const:
        case NodeKind::Param:
            return e;
        case NodeKind::PolyH:
            return ex_poly(e->poly.compose(g.components));
        case NodeKind::PolyA:
            return ex_poly_conj(e->poly.compose(g.components));
        case NodeKind::Sum: {
            std::vector<ExprPtr> kids;
            for (const auto& k : e->kids) kids.push_back(ex_compose(k, g));
            return ex_sum(std::move(kids));
        }
        case NodeKind::Prod: {
            std::vector<ExprPtr> kids;
            for (const auto& k : e->kids) kids.push_back(ex_compose(k, g));
            return ex_prod(std::move(kids));
        }
        case NodeKind::Pow:
            return ex_pow(ex_compose(e->kids[0], g), e->ipow);
        case NodeKind::Log:
            return ex_log(ex_compose(e->kids[0], g));
        case NodeKind::Chi:
            return ex_chi(ex_compose(e->kids[0], g), e->chi_deriv);
    }
    throw std::logic_error("ex_compose: bad node");
}

std::complex<double> ex_eval(const ExprPtr& e, std::span<const std::complex<double>> z,
                             std::span<const double> params) {
    switch (e->kind) {
        case NodeKind::Const:
            return e->cval;
        case NodeKind::Param:
            if (e->param_slot < 0 || e->param_slot >= int(params.size()))
                throw std::out_of_range("ex_eval: parameter slot");
            return {params[e->param_slot], 0.0};
        case NodeKind::PolyH:
            return e->poly.eval(z);
        case NodeKind::PolyA:
            return std::conj(e->poly.eval(z));
        case NodeKind::Sum: {
            std::complex<double> acc{0.0, 0.0};
            for (const auto& k : e->kids) acc += ex_eval(k, z, params);
            return acc;
        }
        case NodeKind::Prod: {
            std::complex<double> acc{1.0, 0.0};
            for (const auto& k : e->kids) {
                std::complex<double> v = ex_eval(k, z, params);
                if (v == std::complex<double>{0.0, 0.0}) return {0.0, 0.0};
                acc *= v;
            }
            return acc;
        }
        case NodeKind::Pow: {
            std::complex<double> b = ex_eval(e->kids[0], z, params);
            int k = e->ipow;
            bool inv = k < 0;
            if (inv) k = -k;
            std::complex<double> acc{1.0, 0.0};
            std::complex<double> p = b;
            for (; k; k >>= 1) {
                if (k & 1) acc *= p;
                if (k > 1) p *= p;
            }
            return inv ? 1.0 / acc : acc;
        }
        case NodeKind::Log:
            return std::log(ex_eval(e->kids[0], z, params));
        case NodeKind::Chi:
            return {cutoff::chi(ex_eval(e->kids[0], z, params).real(), e->chi_deriv), 0.0};
    }
    throw std::logic_error("ex_eval: bad node");
}

int ex_chart_dim(const ExprPtr& e) {
    switch (e->kind) {
        case NodeKind::PolyH:
        case NodeKind::PolyA:
            return e->poly.nvars();
        case NodeKind::Sum:
        case NodeKind::Prod: {
            int d = 0;
            for (const auto& k : e->kids) d = std::max(d, ex_chart_dim(k));
            return d;
        }
        case NodeKind::Pow:
        case NodeKind::Log:
        case NodeKind::Chi:
            return ex_chart_dim(e->kids[0]);
        default:
            return 0;
    }
}

void ex_print(const ExprPtr& e, std::string& out) {
    char buf[64];
    switch (e->kind) {
        case NodeKind::Const:
            snprintf(buf, sizeof buf, "c(%.17g,%.17g)", e->cval.real(), e->cval.imag());
            out += buf;
            return;
        case NodeKind::Param:
            out += "par" + std::to_string(e->param_slot);
            return;
        case NodeKind::PolyH:
            out += "p[" + e->poly.str(default_vars(e->poly.nvars())) + "]";
            return;
        case NodeKind::PolyA:
            out += "pc[" + e->poly.str(default_vars(e->poly.nvars())) + "]";
            return;
        case NodeKind::Sum:
        case NodeKind::Prod:
            out += e->kind == NodeKind::Sum ? "(+ " : "(* ";
            for (const auto& k : e->kids) {
                ex_print(k, out);
                out += ' ';
            }
            out += ')';
            return;
        case NodeKind::Pow:
            out += "(^" + std::to_string(e->ipow) + " ";
            ex_print(e->kids[0], out);
            out += ')';
            return;
        case NodeKind::Log:
            out += "(log ";
            ex_print(e->kids[0], out);
            out += ')';
            return;
        case NodeKind::Chi:
            out += "(chi" + std::to_string(e->chi_deriv) + " ";
            ex_print(e->kids[0], out);
            out += ')';
            return;
    }
}

}  // namespace pscur
