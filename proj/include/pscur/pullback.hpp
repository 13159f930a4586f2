#pragma once

#include "pscur/ma.hpp"

namespace pscur {

/// One source chart of X with its map to the ambient Y chart, a declared
/// partition-of-unity weight, and the integration box for the chart.
struct ChartSpec {
    PolyMap f;       // chart C^m -> Y chart C^n
    ExprPtr weight;  // smooth weight on the chart; the atlas weights sum to 1
    Box box;         // 2m real intervals
    std::string label;
};

/// Data of f^* mu via the graph-embedding Gysin route: the section
/// Psi(x,y) = f(x) - y over chart x Y drives M_k, then pi_1 pushforward and
/// the Chern-form weights of TY.
struct PullbackProblem {
    std::vector<ChartSpec> atlas;
    int x_dim = 0;
    Current mu;  // on the Y chart
    MetricModel metric = MetricModel::Flat;
    Schedule schedule;
};

/// Single-chart convenience constructor (weight 1).
PullbackProblem make_pullback(PolyMap f, Box x_box, Current mu, Schedule sched,
                              MetricModel metric = MetricModel::Flat);

/// f^* mu: the component of the full pullback with mu's bidegree,
/// f^* mu = sum_k f^* c_{n-k}(TY) ^ pi_1_* (M_k^Psi ^ pi_2^* mu).
Current pullback(const PullbackProblem& p);

/// f^{<>} mu: all bidegree components (no Chern truncation to mu's bidegree).
Current full_pullback(const PullbackProblem& p);

/// Pullback under a plain coordinate projection x -> (x_{idx[0]},...,x_{idx[n-1]}):
/// the fiberwise extension 1 (x) mu, no regularization. Throws if idx is not a
/// valid projection declaration.
Current submersion_pullback(int x_dim, const std::vector<int>& idx, const Current& mu);

/// A correspondence: a parameterized cycle Gamma in X x Y with dim Gamma = dim X.
struct CorrComponent {
    PolyMap param;  // C^{dim X} -> C^{x_dim + y_dim}
    double mult = 1.0;
    FormExpr weight;  // on parameter space
    Box box;
};

struct Correspondence {
    int x_dim = 0;
    int y_dim = 0;
    std::vector<CorrComponent> comps;
};

/// pi_1_* iota^! ([Gamma] (x) mu(y)) through the diagonal section
/// (x,y) - (x',y') of (X x Y)^2 with the flat product metric.
Current correspondence_pullback(const Correspondence& corr, const Current& mu,
                                const Schedule& sched);

/// Both routes of the functoriality comparison: lhs = f1^* f2^* mu (chained,
/// nesting depth 2), rhs = (f2 o f1)^* mu (direct). The defect is the
/// difference of pairings.
struct CompositionRoutes {
    Current chained;
    Current direct;
};

CompositionRoutes composition_difference(const ChartSpec& f1_chart, const ChartSpec& f2_chart,
                                         const Current& mu, const Schedule& outer,
                                         const Schedule& inner);

}  // namespace pscur
