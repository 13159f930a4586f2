#include "pscur/poly.hpp"

#include <cctype>
#include <stdexcept>

namespace pscur {

Poly::Poly(int nvars) : nvars_(nvars) {
    if (nvars < 0 || nvars > kMaxVars)
        throw std::invalid_argument("poly: nvars out of range 0.." + std::to_string(kMaxVars));
}

Poly Poly::constant(int nvars, GaussRat c) {
    Poly p(nvars);
    if (!c.is_zero()) p.terms_.emplace(ExpVec{}, std::move(c));
    return p;
}

Poly Poly::variable(int nvars, int idx) {
    if (idx < 0 || idx >= nvars) throw std::out_of_range("poly: variable index");
    Poly p(nvars);
    ExpVec ev;
    ev.e[idx] = 1;
    p.terms_.emplace(ev, GaussRat(1));
    return p;
}

bool Poly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == ExpVec{});
}

GaussRat Poly::constant_value() const {
    if (terms_.empty()) return GaussRat(0);
    if (!is_constant()) throw std::logic_error("poly: not a constant");
    return terms_.begin()->second;
}

int Poly::degree() const {
    int d = -1;
    for (const auto& [ev, c] : terms_) d = std::max(d, ev.total());
    return d;
}

void Poly::add_term(const ExpVec& ev, const GaussRat& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(ev);
    if (it == terms_.end()) {
        terms_.emplace(ev, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Poly Poly::operator-() const {
    Poly r(nvars_);
    for (const auto& [ev, c] : terms_) r.terms_.emplace(ev, -c);
    return r;
}

Poly& Poly::operator+=(const Poly& o) {
    if (nvars_ != o.nvars_) throw std::invalid_argument("poly: nvars mismatch in +");
    for (const auto& [ev, c] : o.terms_) add_term(ev, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    if (nvars_ != o.nvars_) throw std::invalid_argument("poly: nvars mismatch in -");
    for (const auto& [ev, c] : o.terms_) add_term(ev, -c);
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    if (a.nvars_ != b.nvars_) throw std::invalid_argument("poly: nvars mismatch in *");
    Poly r(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            ExpVec ev;
            for (int i = 0; i < kMaxVars; ++i) {
                int s = int(ea.e[i]) + int(eb.e[i]);
                if (s > 255) throw std::overflow_error("poly: exponent overflow");
                ev.e[i] = std::uint8_t(s);
            }
            r.add_term(ev, ca * cb);
        }
    }
    return r;
}

Poly Poly::scaled(const GaussRat& c) const {
    Poly r(nvars_);
    if (c.is_zero()) return r;
    for (const auto& [ev, k] : terms_) r.terms_.emplace(ev, k * c);
    return r;
}

Poly Poly::diff(int var) const {
    if (var < 0 || var >= nvars_) throw std::out_of_range("poly: diff variable index");
    Poly r(nvars_);
    for (const auto& [ev, c] : terms_) {
        if (ev.e[var] == 0) continue;
        ExpVec de = ev;
        de.e[var] -= 1;
        r.add_term(de, c * GaussRat(long(ev.e[var])));
    }
    return r;
}

Poly Poly::compose(const std::vector<Poly>& args) const {
    if (int(args.size()) < nvars_) throw std::invalid_argument("poly: compose arity");
    int out_vars = nvars_ == 0 ? 0 : args[0].nvars();
    for (int j = 0; j < nvars_; ++j)
        if (args[j].nvars() != out_vars) throw std::invalid_argument("poly: compose nvars mismatch");
    Poly r(out_vars);
    for (const auto& [ev, c] : terms_) {
        Poly t = Poly::constant(out_vars, c);
        for (int j = 0; j < nvars_; ++j)
            for (int k = 0; k < ev.e[j]; ++k) t = t * args[j];
        r += t;
    }
    return r;
}

Poly Poly::embedded(int new_nvars, int shift) const {
    if (shift < 0 || nvars_ + shift > new_nvars || new_nvars > kMaxVars)
        throw std::invalid_argument("poly: embed out of range");
    Poly r(new_nvars);
    for (const auto& [ev, c] : terms_) {
        ExpVec ne;
        for (int i = 0; i < nvars_; ++i) ne.e[i + shift] = ev.e[i];
        r.terms_.emplace(ne, c);
    }
    return r;
}

std::complex<double> Poly::eval(std::span<const std::complex<double>> pt) const {
    if (int(pt.size()) < nvars_) throw std::invalid_argument("poly: eval point dimension");
    std::complex<double> acc{0.0, 0.0};
    for (const auto& [ev, c] : terms_) {
        std::complex<double> m = c.to_complex();
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < ev.e[i]; ++k) m *= pt[i];
        acc += m;
    }
    return acc;
}

std::string Poly::str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [ev, c] : terms_) {
        if (!first) out += " + ";
        first = false;
        out += c.str();
        for (int i = 0; i < nvars_; ++i) {
            if (ev.e[i] == 0) continue;
            out += "*" + (i < int(names.size()) ? names[i] : "x" + std::to_string(i + 1));
            if (ev.e[i] > 1) out += "^" + std::to_string(int(ev.e[i]));
        }
    }
    return out;
}

PolyMap PolyMap::identity(int dim) {
    PolyMap m;
    m.source_dim = m.target_dim = dim;
    for (int i = 0; i < dim; ++i) m.components.push_back(Poly::variable(dim, i));
    return m;
}

PolyMap PolyMap::after(const PolyMap& inner) const {
    if (inner.target_dim != source_dim) throw std::invalid_argument("polymap: composition dims");
    PolyMap r;
    r.source_dim = inner.source_dim;
    r.target_dim = target_dim;
    for (const Poly& c : components) r.components.push_back(c.compose(inner.components));
    return r;
}

std::vector<std::complex<double>> PolyMap::eval(std::span<const std::complex<double>> pt) const {
    std::vector<std::complex<double>> out;
    out.reserve(components.size());
    for (const Poly& c : components) out.push_back(c.eval(pt));
    return out;
}

void PolyMap::check() const {
    if (int(components.size()) != target_dim) throw std::invalid_argument("polymap: bad arity");
    for (const Poly& c : components)
        if (c.nvars() != source_dim) throw std::invalid_argument("polymap: bad component nvars");
}

std::vector<std::string> default_vars(int n, const std::string& base) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back(base + std::to_string(i));
    return v;
}

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;
    const std::vector<std::string>& vars;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("parse error at offset " + std::to_string(pos) + ": " + msg +
                                    " in \"" + s + "\"");
    }

    Poly expr() {
        Poly acc = eat('-') ? -term() : term();
        for (;;) {
            skip();
            if (eat('+'))
                acc += term();
            else if (eat('-'))
                acc -= term();
            else
                break;
        }
        return acc;
    }

    Poly term() {
        Poly acc = factor();
        for (;;) {
            skip();
            if (eat('*'))
                acc = acc * factor();
            else
                break;
        }
        return acc;
    }

    Poly factor() {
        Poly b = base();
        skip();
        if (eat('^')) {
            long e = integer();
            if (e < 0) fail("negative exponent");
            Poly r = Poly::constant(int(vars.size()), GaussRat(1));
            for (long k = 0; k < e; ++k) r = r * b;
            return r;
        }
        return b;
    }

    long integer() {
        skip();
        bool neg = eat('-');
        size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) fail("expected integer");
        long v = std::stol(s.substr(start, pos - start));
        return neg ? -v : v;
    }

    Poly base() {
        skip();
        int n = int(vars.size());
        if (eat('(')) {
            Poly p = expr();
            if (!eat(')')) fail("expected ')'");
            return p;
        }
        if (eat('-')) return -base();
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            long num = integer();
            if (eat('/')) {
                long den = integer();
                if (den == 0) fail("zero denominator");
                return Poly::constant(n, GaussRat(Rational(num, den)));
            }
            return Poly::constant(n, GaussRat(num));
        }
        if (pos < s.size() &&
            (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
            size_t start = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == "i") return Poly::constant(n, GaussRat::unit_i());
            for (int j = 0; j < n; ++j)
                if (vars[j] == name) return Poly::variable(n, j);
            fail("unknown variable '" + name + "'");
        }
        fail("unexpected character");
    }
};

}  // namespace

Poly parse_poly(const std::string& text, const std::vector<std::string>& vars) {
    if (int(vars.size()) > kMaxVars) throw std::invalid_argument("parse_poly: too many variables");
    Parser p{text, 0, vars};
    Poly r = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    return r;
}

PolyMap parse_poly_map(const std::string& text, const std::vector<std::string>& vars,
                       int target_dim_check) {
    PolyMap m;
    m.source_dim = int(vars.size());
    size_t start = 0;
    int depth = 0;
    std::vector<std::string> pieces;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || (text[i] == ',' && depth == 0)) {
            pieces.push_back(text.substr(start, i - start));
            start = i + 1;
        } else if (text[i] == '(') {
            ++depth;
        } else if (text[i] == ')') {
            --depth;
        }
    }
    for (const std::string& piece : pieces) m.components.push_back(parse_poly(piece, vars));
    m.target_dim = int(m.components.size());
    if (target_dim_check >= 0 && m.target_dim != target_dim_check)
        throw std::invalid_argument("parse_poly_map: wrong number of components");
    return m;
}

}  // namespace pscur
