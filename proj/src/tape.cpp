#include "pscur/tape.hpp"

#include <map>
#include <stdexcept>

namespace pscur {

namespace {

std::complex<double> ipow(std::complex<double> b, int k) {
    bool inv = k < 0;
    unsigned e = inv ? unsigned(-long(k)) : unsigned(k);
    std::complex<double> acc{1.0, 0.0};
    std::complex<double> p = b;
    while (e) {
        if (e & 1u) acc *= p;
        e >>= 1u;
        if (e) p *= p;
    }
    return inv ? 1.0 / acc : acc;
}

}  // namespace

Tape Tape::compile(const ExprPtr& root, int chart_dim) {
    Tape t;
    t.chart_dim_ = chart_dim;
    if (ex_is_zero(root)) {
        t.const_only_ = true;
        t.const_result_ = {0.0, 0.0};
        return t;
    }
    std::map<const SmoothExpr*, std::int32_t> memo;

    // iterative post-order to avoid recursion limits on deep sums
    struct Frame {
        const SmoothExpr* node;
        size_t next_kid = 0;
    };
    std::vector<Frame> stack{{root.get()}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        const SmoothExpr* n = f.node;
        if (memo.count(n)) {
            stack.pop_back();
            continue;
        }
        if (f.next_kid < n->kids.size()) {
            const SmoothExpr* kid = n->kids[f.next_kid].get();
            ++f.next_kid;
            if (!memo.count(kid)) stack.push_back({kid});
            continue;
        }
        std::int32_t out = std::int32_t(t.nslots_++);
        Instr ins{};
        ins.out = out;
        switch (n->kind) {
            case NodeKind::Const:
                ins.op = Op::Const;
                ins.cval = n->cval;
                break;
            case NodeKind::Param:
                ins.op = Op::Param;
                ins.a = n->param_slot;
                break;
            case NodeKind::PolyH:
            case NodeKind::PolyA: {
                ins.op = n->kind == NodeKind::PolyH ? Op::PolyH : Op::PolyA;
                NumPoly np;
                np.nvars = n->poly.nvars();
                if (np.nvars > chart_dim)
                    throw std::invalid_argument("tape: poly leaf exceeds chart dim");
                for (const auto& [ev, c] : n->poly.terms()) np.mono.push_back({c.to_complex(), ev.e});
                ins.a = std::int32_t(t.polys_.size());
                t.polys_.push_back(std::move(np));
                break;
            }
            case NodeKind::Sum:
            case NodeKind::Prod: {
                ins.op = n->kind == NodeKind::Sum ? Op::Sum : Op::Prod;
                ins.argo = std::int32_t(t.args_.size());
                ins.argc = std::int32_t(n->kids.size());
                for (const auto& k : n->kids) t.args_.push_back(memo.at(k.get()));
                break;
            }
            case NodeKind::Pow:
                ins.op = Op::Pow;
                ins.a = memo.at(n->kids[0].get());
                ins.b = n->ipow;
                break;
            case NodeKind::Log:
                ins.op = Op::Log;
                ins.a = memo.at(n->kids[0].get());
                break;
            case NodeKind::Chi:
                ins.op = Op::Chi;
                ins.a = memo.at(n->kids[0].get());
                ins.b = n->chi_deriv;
                break;
        }
        t.instrs_.push_back(ins);
        memo.emplace(n, out);
        stack.pop_back();
    }
    return t;
}

std::complex<double> Tape::eval(std::span<const std::complex<double>> z,
                                std::span<const double> params,
                                std::vector<std::complex<double>>& slots) const {
    if (const_only_) return const_result_;
    if (slots.size() < nslots_) slots.resize(nslots_);
    for (const Instr& ins : instrs_) {
        std::complex<double> v;
        switch (ins.op) {
            case Op::Const:
                v = ins.cval;
                break;
            case Op::Param:
                v = {params[ins.a], 0.0};
                break;
            case Op::PolyH:
            case Op::PolyA: {
                const NumPoly& np = polys_[ins.a];
                std::complex<double> acc{0.0, 0.0};
                for (const NumMono& m : np.mono) {
                    std::complex<double> mv = m.c;
                    for (int i = 0; i < np.nvars; ++i) {
                        std::uint8_t e = m.e[i];
                        if (!e) continue;
                        std::complex<double> zi = z[i];
                        for (std::uint8_t k2 = 0; k2 < e; ++k2) mv *= zi;
                    }
                    acc += mv;
                }
                v = ins.op == Op::PolyA ? std::conj(acc) : acc;
                break;
            }
            case Op::Sum: {
                std::complex<double> acc{0.0, 0.0};
                for (int j = 0; j < ins.argc; ++j) acc += slots[args_[ins.argo + j]];
                v = acc;
                break;
            }
            case Op::Prod: {
                std::complex<double> acc{1.0, 0.0};
                for (int j = 0; j < ins.argc; ++j) {
                    const std::complex<double>& f = slots[args_[ins.argo + j]];
                    if (f == std::complex<double>{0.0, 0.0}) {
                        acc = {0.0, 0.0};
                        break;
                    }
                    acc *= f;
                }
                v = acc;
                break;
            }
            case Op::Pow:
                v = ipow(slots[ins.a], ins.b);
                break;
            case Op::Log:
                v = std::log(slots[ins.a]);
                break;
            case Op::Chi:
                v = {cutoff::chi(slots[ins.a].real(), ins.b), 0.0};
                break;
        }
        slots[ins.out] = v;
    }
    return slots[nslots_ - 1];
}

}  // namespace pscur
