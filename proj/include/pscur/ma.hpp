#pragma once

#include "pscur/current.hpp"

#include <string>
#include <vector>

namespace pscur {

/// Holomorphic section of a trivial bundle over an ambient chart. Only the
/// flat metric enters |Psi|^2; explicit Chern-form models live in form.hpp.
struct PolySection {
    std::vector<Poly> comps;
    int nvars = 0;
    MetricModel metric = MetricModel::Flat;
    std::string name;

    void check() const;
    std::string canonical() const;
};

PolySection section_join(const PolySection& a, const PolySection& b);

/// Regularized factor of M_k^{s,eps} on a d-dimensional source chart:
/// k = 0:   1 - chi(S/eps)
/// k >= 1:  dbar chi(S/eps) ^ (partial log S)/(2 pi i) ^ (dd^c log S)^{k-1}
/// with S = |s|^2; inv_eps supplies 1/eps (constant or parameter).
FormExpr m_factor(const std::vector<Poly>& section, int src_dim, int k, const ExprPtr& inv_eps);

/// M_k^{Psi,eps} ^ mu at a fixed eps (no pending limit).
Current m_eps(const PolySection& psi, const Current& mu, int k, double eps);

/// M_k^Psi ^ mu as a pending-limit evaluator over the schedule's ladder.
Current m_limit(const PolySection& psi, const Current& mu, int k, const Schedule& sched);

/// M^Phi_kout ^ (M^Psi_kin ^ mu): inner limit taken first, outer eps ladder on
/// top, inner eps forced below outer eps * nest_factor.
Current m_iterated(const PolySection& outer, int k_outer, const PolySection& inner, int k_inner,
                   const Current& mu, const Schedule& outer_sched, const Schedule& inner_sched);

/// User-declared divisor datum for the principal-ideal Segre route.
struct DivisorComponent {
    double mult = 1.0;
    Poly sigma;        // defining polynomial of this component
    PolyMap param;     // parameterization of the component
    FormExpr weight;   // on parameter space (compactly supported)
    Box box;
};

struct SegreInput {
    PolySection phi;                // = sigma * phi_prime, sigma = prod sigma_j^{a_j}
    std::vector<Poly> phi_prime;    // non-vanishing factor; c1(L*) = dd^c log|phi'|^2
    std::vector<DivisorComponent> divisor;
    int max_k = 1;
    double residual_tol = 1e-6;
    unsigned probe_seed = 20240901;
};

/// Segre currents s_hat_k = sum_j a_j [W_j] ^ c1(L*)^k for a principal-ideal
/// section. Validates the decomposition numerically at probe points:
/// |Phi| / (prod |sigma_j|^{a_j} |Phi'|) must be 1.
std::vector<Current> segre_principal(const SegreInput& in);

}  // namespace pscur
