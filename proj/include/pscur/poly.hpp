#pragma once

#include "pscur/rational.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pscur {

/// Hard cap on chart dimension for the dense exponent encoding.
inline constexpr int kMaxVars = 8;

/// Dense exponent vector, one slot per variable.
struct ExpVec {
    std::array<std::uint8_t, kMaxVars> e{};

    friend bool operator<(const ExpVec& a, const ExpVec& b) { return a.e < b.e; }
    friend bool operator==(const ExpVec& a, const ExpVec& b) { return a.e == b.e; }

    int total() const {
        int s = 0;
        for (auto x : e) s += x;
        return s;
    }
};

/// Exact multivariate polynomial over Gaussian rationals.
/// Invariant: no zero coefficients are stored.
class Poly {
  public:
    Poly() : nvars_(0) {}
    explicit Poly(int nvars);

    static Poly constant(int nvars, GaussRat c);
    static Poly variable(int nvars, int idx);

    int nvars() const { return nvars_; }
    const std::map<ExpVec, GaussRat>& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    GaussRat constant_value() const;  // 0 if zero poly; requires is_constant()
    int degree() const;               // -1 for the zero polynomial

    void add_term(const ExpVec& ev, const GaussRat& c);

    Poly operator-() const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly scaled(const GaussRat& c) const;

    friend bool operator==(const Poly& a, const Poly& b) {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }

    /// Exact formal partial derivative with respect to variable `var`.
    Poly diff(int var) const;

    /// Substitute args[j] for variable j; exact. args.size() must equal nvars().
    Poly compose(const std::vector<Poly>& args) const;

    /// Widen to a chart with more variables, placing variable j at j + shift.
    Poly embedded(int new_nvars, int shift) const;

    /// Evaluate at a point, coefficients converted to double precision.
    /// Summation order is the term order (deterministic).
    std::complex<double> eval(std::span<const std::complex<double>> pt) const;

    std::string str(const std::vector<std::string>& names) const;

  private:
    int nvars_;
    std::map<ExpVec, GaussRat> terms_;
};

/// Tuple of polynomials seen as a holomorphic map between charts.
struct PolyMap {
    int source_dim = 0;
    int target_dim = 0;
    std::vector<Poly> components;  // each in source_dim variables

    static PolyMap identity(int dim);
    /// this ∘ inner (exact polynomial substitution).
    PolyMap after(const PolyMap& inner) const;
    std::vector<std::complex<double>> eval(std::span<const std::complex<double>> pt) const;
    void check() const;  // components.size() == target_dim, consistent nvars
};

/// Variable names "z1".."zn".
std::vector<std::string> default_vars(int n, const std::string& base = "z");

/// Parse an ASCII infix polynomial over the given ordered variable names.
/// Grammar: sums/differences of products of powers of variables,
/// integer or rational literals (e.g. "3/2"), the imaginary unit "i",
/// parentheses, unary minus, '^' with nonnegative integer exponents.
Poly parse_poly(const std::string& text, const std::vector<std::string>& vars);

/// Parse a comma-separated list of polynomials as a map source_dim -> list size.
PolyMap parse_poly_map(const std::string& text, const std::vector<std::string>& vars,
                       int target_dim_check = -1);

}  // namespace pscur
