#include "pscur/quad.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

namespace pscur {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            if (n == 1) p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

void parallel_for(int workers, size_t n, const std::function<void(size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    int nt = std::min<size_t>(size_t(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

namespace {

struct Cell {
    Box box;
    int depth = 0;
    std::complex<double> value{0.0, 0.0};
    double err = 0.0;
    bool evaluated = false;
};

struct Probe {
    double smin, smax;
    std::vector<double> axis_delta;  // per real axis
};

// Probe a squared-norm tape at the cell center and the per-axis face centers.
Probe probe_shell(const Tape& tape, const Box& box, std::span<const double> params,
                  std::vector<std::complex<double>>& slots,
                  std::vector<std::complex<double>>& zbuf) {
    int rd = box.real_dim();
    int cd = rd / 2;
    Probe pr;
    pr.axis_delta.assign(rd, 0.0);
    auto eval_at = [&](const std::vector<double>& x) {
        zbuf.resize(cd);
        for (int i = 0; i < cd; ++i) zbuf[i] = {x[2 * i], x[2 * i + 1]};
        return tape.eval(zbuf, params, slots).real();
    };
    std::vector<double> c(rd);
    for (int d = 0; d < rd; ++d) c[d] = box.iv[d].mid();
    double v0 = eval_at(c);
    pr.smin = pr.smax = v0;
    for (int d = 0; d < rd; ++d) {
        std::vector<double> lo = c, hi = c;
        lo[d] = box.iv[d].lo;
        hi[d] = box.iv[d].hi;
        double vl = eval_at(lo), vh = eval_at(hi);
        pr.smin = std::min({pr.smin, vl, vh});
        pr.smax = std::max({pr.smax, vl, vh});
        // compare faces against the center: face-to-face differences vanish
        // under symmetry even when the variation inside the cell is large
        pr.axis_delta[d] = std::max(std::abs(vh - v0), std::abs(vl - v0));
    }
    return pr;
}

enum class ShellVerdict { Keep, Prune, Refine };

struct ShellDecision {
    ShellVerdict verdict = ShellVerdict::Keep;
    int axis = -1;
};

ShellDecision judge_cell(const Integrand& f, const Box& box, const QuadSpec& spec,
                         std::vector<std::complex<double>>& slots,
                         std::vector<std::complex<double>>& zbuf) {
    ShellDecision out;
    if (f.shells.empty() || box.real_dim() == 0) return out;
    double best_delta = -1.0;
    bool want_refine = false;
    for (const ShellConstraint& sc : f.shells) {
        double eps = sc.eps(f.params);
        Probe pr = probe_shell(sc.norm_sq, box, f.params, slots, zbuf);
        double spread = (pr.smax - pr.smin) * spec.shell_safety;
        double lo = pr.smin - spread, hi = pr.smax + spread;
        switch (sc.kind) {
            case ShellKind::ChiPrime:
                if (lo > 2.0 * eps || hi < eps) return {ShellVerdict::Prune, -1};
                break;
            case ShellKind::OneMinusChi:
                if (lo > 2.0 * eps) return {ShellVerdict::Prune, -1};
                break;
            case ShellKind::ChiFactor:
                if (hi < eps) return {ShellVerdict::Prune, -1};
                break;
        }
        // Near the chi transition band the integrand varies on scale eps:
        // refine until the section norm moves by at most shell_var_factor*eps
        // across the cell.
        bool touches_band = !(lo > 2.0 * eps || hi < eps);
        if (touches_band && (pr.smax - pr.smin) > spec.shell_var_factor * eps) {
            want_refine = true;
            for (int d = 0; d < box.real_dim(); ++d) {
                if (pr.axis_delta[d] > best_delta) {
                    best_delta = pr.axis_delta[d];
                    out.axis = d;
                }
            }
        }
    }
    if (want_refine) out.verdict = ShellVerdict::Refine;
    return out;
}

std::complex<double> tensor_rule(const Integrand& f, const Box& box, int order,
                                 std::vector<std::complex<double>>& slots,
                                 std::vector<std::complex<double>>& zbuf) {
    int rd = box.real_dim();
    int cd = f.cdim;
    if (rd == 0) {
        return f.tape.eval({}, f.params, slots);
    }
    const auto& [gx, gw] = gauss_legendre(order);
    std::vector<int> idx(rd, 0);
    std::vector<double> x(rd);
    std::complex<double> acc{0.0, 0.0};
    zbuf.resize(cd);
    for (;;) {
        double w = 1.0;
        for (int d = 0; d < rd; ++d) {
            const Interval& I = box.iv[d];
            double half = 0.5 * I.width();
            x[d] = I.mid() + half * gx[idx[d]];
            w *= half * gw[idx[d]];
        }
        for (int i = 0; i < cd; ++i) zbuf[i] = {x[2 * i], x[2 * i + 1]};
        acc += w * f.tape.eval(zbuf, f.params, slots);
        int d = 0;
        while (d < rd) {
            if (++idx[d] < order) break;
            idx[d] = 0;
            ++d;
        }
        if (d == rd) break;
    }
    return acc;
}

int integrand_split_axis(const Integrand& f, const Box& box,
                         std::vector<std::complex<double>>& slots,
                         std::vector<std::complex<double>>& zbuf) {
    int rd = box.real_dim();
    int cd = f.cdim;
    std::vector<double> c(rd);
    for (int d = 0; d < rd; ++d) c[d] = box.iv[d].mid();
    auto eval_at = [&](const std::vector<double>& x) {
        zbuf.resize(cd);
        for (int i = 0; i < cd; ++i) zbuf[i] = {x[2 * i], x[2 * i + 1]};
        std::complex<double> v = f.tape.eval(zbuf, f.params, slots);
        return std::abs(v);
    };
    int best = 0;
    double best_delta = -1.0;
    double v0 = eval_at(c);
    for (int d = 0; d < rd; ++d) {
        std::vector<double> lo = c, hi = c;
        lo[d] = c[d] - 0.25 * box.iv[d].width();
        hi[d] = c[d] + 0.25 * box.iv[d].width();
        double delta = std::max(std::abs(eval_at(hi) - v0), std::abs(eval_at(lo) - v0));
        // weight by width so repeated splits rotate through axes of equal variation
        delta *= box.iv[d].width();
        if (delta > best_delta) {
            best_delta = delta;
            best = d;
        }
    }
    if (best_delta <= 0.0) {
        // flat probe: widest axis
        for (int d = 0; d < rd; ++d)
            if (box.iv[d].width() > box.iv[best].width()) best = d;
    }
    return best;
}

std::pair<Box, Box> split_box(const Box& b, int axis) {
    Box lo = b, hi = b;
    double m = b.iv[axis].mid();
    lo.iv[axis].hi = m;
    hi.iv[axis].lo = m;
    return {lo, hi};
}

std::complex<double> pairwise_sum(const std::vector<std::complex<double>>& v, size_t lo, size_t hi) {
    if (hi - lo == 0) return {0.0, 0.0};
    if (hi - lo == 1) return v[lo];
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

std::string QuadSpec::canonical() const {
    char buf[256];
    snprintf(buf, sizeof buf, "quad(order=%d,est=%d,maxcells=%ld,depth=%d,abs=%.9g,rel=%.9g,svf=%.9g,ss=%.9g)",
             order, est_order, max_cells, max_depth, abs_tol, rel_tol, shell_var_factor,
             shell_safety);
    return buf;
}

QuadResult integrate(const Integrand& f, const Box& box, const QuadSpec& spec, int workers) {
    QuadResult res;
    if (box.real_dim() != 2 * f.cdim)
        throw std::invalid_argument("integrate: box real dimension != 2*cdim");
    box.check();
    if (f.tape.trivially_zero()) {
        res.cells = 0;
        return res;
    }
    if (f.cdim == 0) {
        std::vector<std::complex<double>> slots, zbuf;
        res.value = f.measure * f.tape.eval({}, f.params, slots);
        res.cells = 1;
        return res;
    }

    // Phase A: shell-driven refinement (breadth-first, deterministic).
    std::vector<Cell> cells;
    {
        std::vector<std::complex<double>> slots, zbuf;
        std::vector<std::pair<Box, int>> queue{{box, 0}};
        size_t head = 0;
        while (head < queue.size()) {
            auto [b, depth] = queue[head++];
            if (long(cells.size() + (queue.size() - head)) >= spec.max_cells) {
                cells.push_back({b, depth});
                res.flagged = true;
                continue;
            }
            ShellDecision d = judge_cell(f, b, spec, slots, zbuf);
            if (d.verdict == ShellVerdict::Prune) continue;
            if (d.verdict == ShellVerdict::Refine && depth < spec.max_depth) {
                auto [lo, hi] = split_box(b, d.axis);
                queue.push_back({lo, depth + 1});
                queue.push_back({hi, depth + 1});
                continue;
            }
            cells.push_back({b, depth});
        }
    }
    if (cells.empty()) {
        res.cells = 0;
        return res;
    }

    auto evaluate_wave = [&](std::vector<Cell>& cs, const std::vector<size_t>& which) {
        parallel_for(workers, which.size(), [&](size_t i) {
            thread_local std::vector<std::complex<double>> slots, zbuf;
            Cell& c = cs[which[i]];
            std::complex<double> hi = tensor_rule(f, c.box, spec.order, slots, zbuf);
            std::complex<double> lo = tensor_rule(f, c.box, spec.est_order, slots, zbuf);
            c.value = hi;
            c.err = std::abs(hi - lo);
            c.evaluated = true;
        });
    };

    {
        std::vector<size_t> all(cells.size());
        for (size_t i = 0; i < all.size(); ++i) all[i] = i;
        evaluate_wave(cells, all);
    }

    // Phase B: error-driven subdivision in deterministic waves.
    auto total = [&]() {
        std::complex<double> v{0.0, 0.0};
        double e = 0.0;
        for (const Cell& c : cells) {
            v += c.value;
            e += c.err;
        }
        return std::make_pair(v, e);
    };
    for (;;) {
        auto [v, e] = total();
        double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(v));
        if (e <= tol) break;
        if (long(cells.size()) >= spec.max_cells) {
            res.flagged = true;
            break;
        }
        // pick the worst cells (up to a wave), deterministic order
        std::vector<size_t> order_idx(cells.size());
        for (size_t i = 0; i < order_idx.size(); ++i) order_idx[i] = i;
        std::sort(order_idx.begin(), order_idx.end(), [&](size_t a, size_t b) {
            if (cells[a].err != cells[b].err) return cells[a].err > cells[b].err;
            return a < b;
        });
        // wave size is independent of worker count to keep results bit-identical
        size_t wave = std::min<size_t>(order_idx.size(), 16);
        std::vector<size_t> split_list;
        double covered = 0.0;
        for (size_t i = 0; i < order_idx.size() && split_list.size() < wave; ++i) {
            const Cell& c = cells[order_idx[i]];
            if (c.depth >= spec.max_depth || c.err == 0.0) continue;
            split_list.push_back(order_idx[i]);
            covered += c.err;
            if (covered > 0.5 * e) break;  // enough mass queued this wave
        }
        if (split_list.empty()) {
            res.flagged = e > tol;
            break;
        }
        std::vector<size_t> fresh;
        {
            std::vector<std::complex<double>> slots, zbuf;
            for (size_t ci : split_list) {
                int axis = integrand_split_axis(f, cells[ci].box, slots, zbuf);
                auto [blo, bhi] = split_box(cells[ci].box, axis);
                int nd = cells[ci].depth + 1;
                cells[ci] = Cell{blo, nd};
                cells.push_back(Cell{bhi, nd});
                fresh.push_back(ci);
                fresh.push_back(cells.size() - 1);
            }
        }
        evaluate_wave(cells, fresh);
    }

    std::vector<std::complex<double>> vals(cells.size());
    double esum = 0.0;
    for (size_t i = 0; i < cells.size(); ++i) {
        vals[i] = cells[i].value;
        esum += cells[i].err;
    }
    res.value = f.measure * pairwise_sum(vals, 0, vals.size());
    res.estimate = std::abs(f.measure) * esum;
    res.cells = long(cells.size());
    return res;
}

}  // namespace pscur
