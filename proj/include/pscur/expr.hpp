#pragma once

#include "pscur/poly.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace pscur {

/// The fixed smooth step chi: 0 on (-inf,1], 1 on [2,inf),
/// chi(t) = B(t-1)/(B(t-1)+B(2-t)) with B(s) = exp(-1/s) for s>0 else 0.
/// Derivatives of any order are available through the exact recurrence
/// B^(k)(s) = Q_k(1/s) B(s), Q_{k+1}(u) = u^2 (Q_k(u) - Q_k'(u)).
namespace cutoff {
double chi(double t, int deriv = 0);
}

enum class NodeKind : std::uint8_t {
    Const,   // fixed complex value
    Param,   // runtime parameter (holds 1/eps for a pending limit level)
    PolyH,   // p(z), holomorphic
    PolyA,   // conj(p(z)), antiholomorphic
    Sum,
    Prod,
    Pow,     // integer power, possibly negative
    Log,     // natural log; arguments are positive real by construction
    Chi,     // chi^(deriv) applied to a real-valued argument
};

struct SmoothExpr;
using ExprPtr = std::shared_ptr<const SmoothExpr>;

/// Closed expression tree for a smooth scalar function on a chart of C^m.
/// Immutable after construction; shared freely across threads.
struct SmoothExpr {
    NodeKind kind = NodeKind::Const;
    std::complex<double> cval{};   // Const
    int param_slot = -1;           // Param
    Poly poly;                     // PolyH / PolyA
    std::vector<ExprPtr> kids;     // Sum / Prod; single child for Pow/Log/Chi
    int ipow = 0;                  // Pow
    int chi_deriv = 0;             // Chi
};

ExprPtr ex_const(std::complex<double> c);
ExprPtr ex_one();
ExprPtr ex_zero();
ExprPtr ex_param(int slot);
ExprPtr ex_poly(Poly p);        // holomorphic
ExprPtr ex_poly_conj(Poly p);   // antiholomorphic
ExprPtr ex_sum(std::vector<ExprPtr> kids);
ExprPtr ex_prod(std::vector<ExprPtr> kids);
ExprPtr ex_pow(ExprPtr base, int k);
ExprPtr ex_log(ExprPtr arg);
ExprPtr ex_chi(ExprPtr arg, int deriv = 0);

inline ExprPtr ex_add(ExprPtr a, ExprPtr b) { return ex_sum({std::move(a), std::move(b)}); }
inline ExprPtr ex_mul(ExprPtr a, ExprPtr b) { return ex_prod({std::move(a), std::move(b)}); }
ExprPtr ex_scale(std::complex<double> c, ExprPtr a);

bool ex_is_zero(const ExprPtr& e);
bool ex_is_const(const ExprPtr& e, std::complex<double>* out = nullptr);

/// |sigma|^2 = sum sigma_i conj(sigma_i) as an expression on the chart of the polys.
ExprPtr ex_norm_sq(const std::vector<Poly>& section);

/// A C^infinity bump equal to 1 on |z-center| <= radius/sqrt(2) and 0 outside
/// |z-center| >= radius, built as 1 - chi(2|z-center|^2/radius^2).
ExprPtr ex_bump(int nvars, const std::vector<std::complex<double>>& center, double radius);

/// d/dz_var and d/dzbar_var, exact expression rewriting.
ExprPtr d_hol(const ExprPtr& e, int var);
ExprPtr d_anti(const ExprPtr& e, int var);

/// Substitute g into the expression: result lives on g's source chart.
ExprPtr ex_compose(const ExprPtr& e, const PolyMap& g);

/// Slow reference evaluation (tests); production path compiles to a tape.
std::complex<double> ex_eval(const ExprPtr& e, std::span<const std::complex<double>> z,
                             std::span<const double> params = {});

/// Number of variables any polynomial leaf expects (0 if none found).
int ex_chart_dim(const ExprPtr& e);

/// Canonical serialization; used for scenario/cache hashing.
void ex_print(const ExprPtr& e, std::string& out);

}  // namespace pscur
