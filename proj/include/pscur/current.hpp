#pragma once

#include "pscur/form.hpp"
#include "pscur/quad.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pscur {

/// Geometric eps ladder with extrapolation policy for a regularized limit.
struct Schedule {
    double eps0 = 0.1;
    double ratio = 0.25;
    int steps = 6;
    int richardson = 1;          // 0 disables extrapolation
    double contraction = 0.9;    // non-convergence flag threshold on |d_j+1/d_j|
    double nest_factor = 1e-2;   // inner eps forced <= outer eps * nest_factor

    std::string canonical() const;
};

struct LadderRow {
    double eps = 0.0;
    std::complex<double> value{0.0, 0.0};
    double err = 0.0;  // error of this row's value (quadrature or inner estimate)
};

struct Extrapolated {
    std::complex<double> value{0.0, 0.0};
    double estimate = 0.0;
    bool converged = true;
};

Extrapolated extrapolate(const std::vector<LadderRow>& rows, const Schedule& sched);

/// Ordered stack of pending limits attached to current terms. Level 0 is the
/// innermost (first-applied) limit; evaluation ladders the last level
/// outermost. Level k's eps enters expressions through parameter slot k
/// (slots hold 1/eps).
using LimitChain = std::vector<Schedule>;
using ChainPtr = std::shared_ptr<const LimitChain>;

ChainPtr chain_append(const ChainPtr& chain, const Schedule& s);

/// A source complex dimension whose box is taken from the test form at pairing
/// time; the term's map must restrict to the identity on this coordinate.
struct FreeDim {
    int src;  // complex index on the source chart
    int amb;  // complex index on the ambient chart
};

/// Support annotation feeding the shell-aware quadrature refinement.
struct TermShell {
    std::vector<Poly> section;  // on the source chart
    ShellKind kind = ShellKind::ChiPrime;
    int slot = -1;              // chain level, or -1 with fixed eps
    double eps_fixed = 0.0;
};

/// One pushforward summand g_* alpha. Weighted cycles are the same data with
/// a parameterization as g and the weight form (times multiplicity) as alpha.
struct Term {
    int src_dim = 0;
    PolyMap g;
    FormExpr alpha;
    Box box;                 // 2*src_dim real intervals; entries under `free` ignored
    std::vector<FreeDim> free;
    ChainPtr chain;
    std::vector<TermShell> shells;
    int chart_tag = 0;       // which atlas chart of the ambient this term lives over
    std::string label;

    /// True when the composed image lies in {section = 0} identically.
    static bool section_vanishes_on(const std::vector<Poly>& section_after_g);

    std::pair<int, int> pushed_bidegree() const;  // bidegree as an ambient current
    std::string canonical() const;
};

struct TestForm {
    FormExpr form;
    Box box;  // 2*amb_dim real intervals bounding the support
    std::string canonical() const;
};

struct PairOptions {
    QuadSpec quad;
    int workers = 1;
    bool strict_bidegree = false;
};

struct GroupTable {
    std::string label;
    std::vector<LadderRow> rows;  // outermost ladder
};

struct PairResult {
    std::complex<double> value{0.0, 0.0};
    double estimate = 0.0;
    bool converged = true;
    bool quad_flagged = false;
    long cells = 0;
    std::vector<GroupTable> tables;
};

/// Pseudosmooth current on an ambient chart: a finite list of pushforward
/// terms, each possibly wrapping pending regularization limits. Immutable in
/// practice; all operations return new values.
class Current {
  public:
    Current() = default;
    explicit Current(int amb_dim) : amb_dim_(amb_dim) {}

    int amb_dim() const { return amb_dim_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add_term(Term t);
    Current operator+(const Current& o) const;
    Current scaled(std::complex<double> c) const;

    /// Smooth current given by a global form on the ambient chart, supported
    /// in `box` (the identity pushforward term).
    static Current smooth(int amb_dim, FormExpr alpha, Box box);

    /// Parameterized cycle with integer multiplicity and a weight form.
    static Current cycle(int amb_dim, const PolyMap& param, double mult, FormExpr weight, Box box);

    /// Dirac mass at a point as a top-bidegree current.
    static Current dirac(int amb_dim, std::vector<std::complex<double>> at);

    std::optional<std::pair<int, int>> pure_bidegree() const;

    /// <mu, xi> = sum over terms of the source-chart integral of
    /// alpha ^ g^* xi; pending limits are laddered and extrapolated.
    PairResult pair(const TestForm& xi, const PairOptions& opt) const;

    /// Pairing against a test form given per atlas chart; term chart_tag picks
    /// the representative. The charted representatives must agree on overlaps.
    PairResult pair_atlas(std::span<const TestForm> xi_by_chart, const PairOptions& opt) const;

    Current d() const;
    Current partial() const;
    Current dbar() const;

    /// phi ^ mu via the projection formula: alpha <- g^* phi ^ alpha.
    Current wedge_smooth(const FormExpr& phi) const;

    /// h_* mu; composes maps exactly. When `image_box` is given, sampled
    /// support points must land inside it (properness check).
    Current pushforward(const PolyMap& h, const Box* image_box = nullptr) const;

    /// 1 (x) mu on C^{x_dim} x C^{amb_dim}; the new factor is a free direction.
    Current cross_with(int x_dim) const;

    enum class RestrictSide { OnW, OffW };
    /// 1_W mu (OnW) and 1_{V\W} mu (OffW) at a fixed eps, or laddered when a
    /// schedule is supplied. Terms mapping identically into {W=0} are kept or
    /// dropped exactly.
    Current restrict(const std::vector<Poly>& w_ambient, RestrictSide side, double eps) const;
    Current restrict(const std::vector<Poly>& w_ambient, RestrictSide side,
                     const Schedule& sched) const;

    std::string canonical() const;

  private:
    Current restrict_impl(const std::vector<Poly>& w, RestrictSide side, double eps_fixed,
                          const Schedule* sched) const;

    int amb_dim_ = 0;
    std::vector<Term> terms_;
};

}  // namespace pscur
