#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pscur {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

/// Axis-aligned box over the real coordinates of a chart; complex coordinate
/// z_i occupies real dims 2i (Re) and 2i+1 (Im).
struct Box {
    std::vector<Interval> iv;

    int real_dim() const { return int(iv.size()); }

    double volume() const {
        double v = 1.0;
        for (const Interval& i : iv) v *= i.width();
        return v;
    }

    void check() const {
        for (const Interval& i : iv)
            if (!(i.lo <= i.hi)) throw std::invalid_argument("box: empty interval");
    }

    static Box cube(int real_dim, double lo, double hi) {
        Box b;
        b.iv.assign(real_dim, Interval{lo, hi});
        return b;
    }
    /// Symmetric complex polydisc-style box: |Re z_i|,|Im z_i| <= r.
    static Box centered(int complex_dim, double r) { return cube(2 * complex_dim, -r, r); }

    Box product(const Box& o) const {
        Box b = *this;
        b.iv.insert(b.iv.end(), o.iv.begin(), o.iv.end());
        return b;
    }

    std::string str() const {
        std::string s = "[";
        for (size_t i = 0; i < iv.size(); ++i) {
            if (i) s += ";";
            s += std::to_string(iv[i].lo) + "," + std::to_string(iv[i].hi);
        }
        return s + "]";
    }
};

}  // namespace pscur
