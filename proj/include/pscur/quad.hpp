#pragma once

#include "pscur/box.hpp"
#include "pscur/tape.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace pscur {

/// How a regularization factor constrains the integrand support near {S ~ eps}.
enum class ShellKind : std::uint8_t {
    ChiPrime,     // chi'(S/eps): support eps <= S <= 2 eps
    OneMinusChi,  // 1 - chi(S/eps): support S <= 2 eps
    ChiFactor,    // chi(S/eps): vanishes on S <= eps, nontrivial on the shell
};

/// Shell oracle input: the squared-norm evaluator of a section on the source
/// chart plus where its eps lives (a runtime parameter slot holding 1/eps, or
/// a fixed value).
struct ShellConstraint {
    Tape norm_sq;        // evaluates |section|^2 at a chart point
    ShellKind kind = ShellKind::ChiPrime;
    int param_slot = -1; // >= 0: eps = 1/params[slot]
    double eps_fixed = 0.0;

    double eps(std::span<const double> params) const {
        return param_slot >= 0 ? 1.0 / params[param_slot] : eps_fixed;
    }
};

/// A compiled top-degree integrand over a complex chart.
struct Integrand {
    Tape tape;                      // coefficient of the canonical top form
    int cdim = 0;                   // complex dimension of the chart
    std::complex<double> measure{1.0, 0.0};  // applied to the raw Lebesgue value
    std::vector<double> params;     // 1/eps per pending-limit level
    std::vector<ShellConstraint> shells;
};

struct QuadSpec {
    int order = 8;       // Gauss-Legendre points per real dimension
    int est_order = 4;   // embedded lower-order rule for the error estimate
    long max_cells = 60000;
    int max_depth = 48;
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double shell_var_factor = 0.5;  // refine while |S|^2 varies more than this*eps
    double shell_safety = 1.5;      // margin multiplier on probe spread

    std::string canonical() const;
};

struct QuadResult {
    std::complex<double> value{0.0, 0.0};
    double estimate = 0.0;
    long cells = 0;
    bool flagged = false;  // budget exhausted before tolerance
};

/// Deterministic adaptive tensor Gauss-Legendre integration of `f` over `box`
/// (real dimension must be 2*f.cdim). Results are identical for any worker
/// count: cells are refined by rules that depend only on per-cell values, and
/// the final reduction is a fixed-order pairwise tree.
QuadResult integrate(const Integrand& f, const Box& box, const QuadSpec& spec, int workers = 1);

/// Deterministic parallel loop used by the cell evaluator (exposed for reuse).
void parallel_for(int workers, size_t n, const std::function<void(size_t)>& body);

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1] (cached).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

}  // namespace pscur
