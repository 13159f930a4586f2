#pragma once

#include "pscur/expr.hpp"

#include <map>
#include <optional>
#include <set>
#include <utility>

namespace pscur {

/// Index sets of a form component, encoded as bitmasks over chart variables.
struct CompKey {
    std::uint32_t hol = 0;   // dz_i factors, ascending
    std::uint32_t anti = 0;  // dzbar_j factors, ascending

    friend bool operator<(const CompKey& a, const CompKey& b) {
        return a.hol != b.hol ? a.hol < b.hol : a.anti < b.anti;
    }
    friend bool operator==(const CompKey& a, const CompKey& b) {
        return a.hol == b.hol && a.anti == b.anti;
    }
    int p() const { return __builtin_popcount(hol); }
    int q() const { return __builtin_popcount(anti); }
};

/// Smooth form on a chart of C^m with SmoothExpr coefficients. Components are
/// stored against ascending index order dz_{i1}^..^dz_{ip}^dzbar_{j1}^..^dzbar_{jq}.
/// Possibly inhomogeneous (mixed bidegrees), which the pullback machinery uses.
class FormExpr {
  public:
    FormExpr() : m_(0) {}
    explicit FormExpr(int chart_dim) : m_(chart_dim) {}

    static FormExpr scalar(int m, ExprPtr c);
    static FormExpr one(int m) { return scalar(m, ex_one()); }
    static FormExpr dz(int m, int i);
    static FormExpr dzbar(int m, int i);

    int chart_dim() const { return m_; }
    bool is_zero() const { return comps_.empty(); }
    const std::map<CompKey, ExprPtr>& comps() const { return comps_; }

    void add(const CompKey& k, const ExprPtr& c);

    FormExpr operator+(const FormExpr& o) const;
    FormExpr operator-(const FormExpr& o) const;
    FormExpr wedge(const FormExpr& o) const;
    FormExpr scaled(std::complex<double> c) const;
    FormExpr scaled(const ExprPtr& c) const;

    FormExpr partial() const;  // holomorphic exterior derivative
    FormExpr dbar() const;     // antiholomorphic exterior derivative
    FormExpr d() const;

    /// Bidegree if homogeneous, nullopt for 0 or mixed forms.
    std::optional<std::pair<int, int>> pure_bidegree() const;
    std::set<std::pair<int, int>> bidegrees() const;
    FormExpr component(int p, int q) const;

    /// Coefficient of dz_1^..^dz_m^dzbar_1^..^dzbar_m (zero expr if absent).
    ExprPtr top_coefficient() const;

    /// Pullback under g (source chart -> this chart), exact Jacobian.
    FormExpr pullback(const PolyMap& g) const;

    /// Widen to a larger chart, shifting variable indices by `shift`.
    FormExpr embedded(int new_dim, int shift) const;

    std::complex<double> eval_comp(const CompKey& k, std::span<const std::complex<double>> z,
                                   std::span<const double> params = {}) const;

    std::string canonical() const;

  private:
    int m_;
    std::map<CompKey, ExprPtr> comps_;
};

/// d^c u with the convention d^c = (partial - dbar)/(4 pi i).
FormExpr form_dc(int m, const ExprPtr& u);

/// dd^c u = (i/2pi) partial dbar u; normalized so dd^c log|z|^2 = [0] on C.
FormExpr form_ddc(int m, const ExprPtr& u);

/// Named Hermitian metric models shipping explicit Chern forms.
enum class MetricModel { Flat, FubiniStudyP1 };

/// [c_0, c_1, ..., c_dim] on a chart; Flat gives [1, 0, ...],
/// FubiniStudyP1 gives c_1 = dd^c log(1+|t|^2) on a 1-dimensional chart.
std::vector<FormExpr> chern_forms(MetricModel model, int chart_dim);

const char* metric_model_name(MetricModel m);

}  // namespace pscur
