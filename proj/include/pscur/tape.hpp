#pragma once

#include "pscur/expr.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace pscur {

/// Flat instruction program for fast repeated evaluation of a SmoothExpr DAG.
/// Shared subtrees are evaluated once. Multiplication short-circuits on an
/// exact zero factor, which keeps cutoff-killed singular factors (log poles on
/// {S=0}) out of the arithmetic.
class Tape {
  public:
    static Tape compile(const ExprPtr& root, int chart_dim);

    std::complex<double> eval(std::span<const std::complex<double>> z,
                              std::span<const double> params,
                              std::vector<std::complex<double>>& slots) const;

    int chart_dim() const { return chart_dim_; }
    size_t num_slots() const { return nslots_; }
    bool trivially_zero() const { return instrs_.empty() && const_result_ == std::complex<double>{}; }
    size_t size() const { return instrs_.size(); }

  private:
    enum class Op : std::uint8_t { Const, Param, PolyH, PolyA, Sum, Prod, Pow, Log, Chi };
    struct Instr {
        Op op;
        std::int32_t out;
        std::int32_t a = 0;     // poly index / param slot / first operand / ipow base
        std::int32_t b = 0;     // ipow exponent / chi derivative
        std::int32_t argc = 0;  // operand count in args_
        std::int32_t argo = 0;  // operand offset in args_
        std::complex<double> cval{};
    };
    struct NumMono {
        std::complex<double> c;
        std::array<std::uint8_t, kMaxVars> e;
    };
    struct NumPoly {
        int nvars;
        std::vector<NumMono> mono;
    };

    int chart_dim_ = 0;
    size_t nslots_ = 0;
    std::vector<Instr> instrs_;
    std::vector<std::int32_t> args_;
    std::vector<NumPoly> polys_;
    std::complex<double> const_result_{};
    bool const_only_ = false;
};

}  // namespace pscur
