#include "pscur/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pscur {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// smooth scalar expression mini-language
// ---------------------------------------------------------------------------

namespace {

struct ExprCtx {
    int dim = 0;
    const std::vector<std::string>* vars = nullptr;
};

struct Cursor {
    const std::string& s;
    size_t pos = 0;

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
    bool peek(char c) {
        skip();
        return pos < s.size() && s[pos] == c;
    }
    char cur() { return pos < s.size() ? s[pos] : '\0'; }
    [[noreturn]] void fail(const std::string& m) {
        throw std::invalid_argument("scenario parse error at '" +
                                    s.substr(pos, std::min<size_t>(24, s.size() - pos)) + "': " + m);
    }
    std::string ident() {
        skip();
        size_t st = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_' || s[pos] == '-'))
            ++pos;
        if (st == pos) fail("expected identifier");
        return s.substr(st, pos - st);
    }
    double number() {
        skip();
        size_t st = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                                  s[pos] == 'e' || s[pos] == 'E' ||
                                  ((s[pos] == '+' || s[pos] == '-') &&
                                   (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
            ++pos;
        if (st == pos) fail("expected number");
        return std::stod(s.substr(st, pos - st));
    }
    long integer() {
        skip();
        size_t st = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (st == pos) fail("expected integer");
        return std::stol(s.substr(st, pos - st));
    }
    // capture text up to the matching close paren; cursor starts after '('
    std::string balanced() {
        int depth = 1;
        size_t st = pos;
        while (pos < s.size()) {
            if (s[pos] == '(') ++depth;
            if (s[pos] == ')') {
                --depth;
                if (depth == 0) {
                    std::string out = s.substr(st, pos - st);
                    ++pos;
                    return out;
                }
            }
            ++pos;
        }
        fail("unbalanced parentheses");
    }
};

ExprPtr parse_expr(Cursor& c, const ExprCtx& ctx);

ExprPtr parse_atom(Cursor& c, const ExprCtx& ctx) {
    c.skip();
    if (c.eat('(')) {
        ExprPtr e = parse_expr(c, ctx);
        if (!c.eat(')')) c.fail("expected ')'");
        return e;
    }
    if (c.eat('-')) return ex_scale({-1.0, 0.0}, parse_atom(c, ctx));
    char ch = c.cur();
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        return ex_const({c.number(), 0.0});
    }
    std::string id = c.ident();
    if (id == "i") return ex_const({0.0, 1.0});
    if (id == "pi") return ex_const({M_PI, 0.0});
    if (id == "P" || id == "PC") {
        if (!c.eat('(')) c.fail("expected '(' after " + id);
        std::string body = c.balanced();
        Poly p = parse_poly(body, *ctx.vars);
        return id == "P" ? ex_poly(p) : ex_poly_conj(p);
    }
    if (id == "log" || id == "chi" || id == "chi1") {
        if (!c.eat('(')) c.fail("expected '('");
        ExprPtr a = parse_expr(c, ctx);
        if (!c.eat(')')) c.fail("expected ')'");
        if (id == "log") return ex_log(a);
        return ex_chi(a, id == "chi1" ? 1 : 0);
    }
    if (id == "bump") {
        if (!c.eat('(')) c.fail("expected '('");
        std::vector<std::complex<double>> center;
        for (int j = 0; j < ctx.dim; ++j) {
            double re = c.number();
            if (!c.eat(',')) c.fail("expected ','");
            double im = c.number();
            center.push_back({re, im});
            if (j + 1 < ctx.dim && !c.eat(',')) c.fail("expected ','");
        }
        if (!c.eat(';')) c.fail("expected ';' before radius");
        double r = c.number();
        if (!c.eat(')')) c.fail("expected ')'");
        return ex_bump(ctx.dim, center, r);
    }
    if (id == "bumpv") {
        if (!c.eat('(')) c.fail("expected '('");
        long var = c.integer();
        if (!c.eat(';')) c.fail("expected ';'");
        double re = c.number();
        if (!c.eat(',')) c.fail("expected ','");
        double im = c.number();
        if (!c.eat(';')) c.fail("expected ';'");
        double r = c.number();
        if (!c.eat(')')) c.fail("expected ')'");
        if (var < 1 || var > ctx.dim) c.fail("bumpv variable index");
        Poly zc = Poly::variable(ctx.dim, int(var) - 1) -
                  Poly::constant(ctx.dim, GaussRat(Rational(re), Rational(im)));
        ExprPtr s = ex_mul(ex_poly(zc), ex_poly_conj(zc));
        return ex_add(ex_one(),
                      ex_scale({-1.0, 0.0}, ex_chi(ex_scale({2.0 / (r * r), 0.0}, s))));
    }
    c.fail("unknown function or symbol '" + id + "'");
}

ExprPtr parse_power(Cursor& c, const ExprCtx& ctx) {
    ExprPtr b = parse_atom(c, ctx);
    if (c.eat('^')) {
        long e = c.integer();
        return ex_pow(b, int(e));
    }
    return b;
}

ExprPtr parse_term(Cursor& c, const ExprCtx& ctx) {
    ExprPtr acc = parse_power(c, ctx);
    for (;;) {
        if (c.eat('*'))
            acc = ex_mul(acc, parse_power(c, ctx));
        else
            return acc;
    }
}

ExprPtr parse_expr(Cursor& c, const ExprCtx& ctx) {
    ExprPtr acc = parse_term(c, ctx);
    for (;;) {
        c.skip();
        if (c.eat('+'))
            acc = ex_add(acc, parse_term(c, ctx));
        else if (c.peek('-') && !std::isalpha(static_cast<unsigned char>(c.cur()))) {
            c.eat('-');
            acc = ex_add(acc, ex_scale({-1.0, 0.0}, parse_term(c, ctx)));
        } else
            return acc;
    }
}

// form literal: { (1) expr ; (dz1^dzb1) expr ; ... }
FormExpr parse_form(Cursor& c, const ExprCtx& ctx) {
    if (!c.eat('{')) c.fail("expected '{' starting form");
    FormExpr f(ctx.dim);
    for (;;) {
        if (!c.eat('(')) c.fail("expected '(' starting component key");
        CompKey key;
        c.skip();
        if (c.cur() == '1') {
            c.eat('1');
        } else {
            for (;;) {
                std::string id = c.ident();
                bool anti = false;
                size_t digits = 2;
                if (id.rfind("dzb", 0) == 0) {
                    anti = true;
                    digits = 3;
                } else if (id.rfind("dz", 0) != 0) {
                    c.fail("component key must be dzK or dzbK");
                }
                int idx = std::stoi(id.substr(digits));
                if (idx < 1 || idx > ctx.dim) c.fail("component index out of range");
                std::uint32_t bit = 1u << (idx - 1);
                if (anti) {
                    if (key.anti & bit) c.fail("repeated dzb index");
                    key.anti |= bit;
                } else {
                    if (key.hol & bit) c.fail("repeated dz index");
                    key.hol |= bit;
                }
                if (!c.eat('^')) break;
            }
        }
        if (!c.eat(')')) c.fail("expected ')' ending component key");
        ExprPtr e = parse_expr(c, ctx);
        f.add(key, e);
        if (c.eat(';')) continue;
        if (c.eat('}')) break;
        c.fail("expected ';' or '}' in form");
    }
    return f;
}

Box parse_box(Cursor& c, int dim) {
    c.skip();
    std::string id = c.ident();
    if (id == "boxc") {
        if (!c.eat('(')) c.fail("expected '('");
        double r = c.number();
        if (!c.eat(')')) c.fail("expected ')'");
        return Box::centered(dim, r);
    }
    if (id != "box") c.fail("expected box(...) or boxc(...)");
    if (!c.eat('(')) c.fail("expected '('");
    Box b;
    for (int d = 0; d < 2 * dim; ++d) {
        double lo = c.number();
        if (!c.eat(',')) c.fail("expected ','");
        double hi = c.number();
        b.iv.push_back({lo, hi});
        if (d + 1 < 2 * dim && !c.eat(';')) c.fail("expected ';'");
    }
    if (!c.eat(')')) c.fail("expected ')'");
    return b;
}

std::map<std::string, std::string> parse_kvs(Cursor& c) {
    std::map<std::string, std::string> kv;
    for (;;) {
        c.skip();
        if (c.pos >= c.s.size()) break;
        std::string k = c.ident();
        if (!c.eat('=')) c.fail("expected '=' after " + k);
        c.skip();
        size_t st = c.pos;
        while (c.pos < c.s.size() && !std::isspace(static_cast<unsigned char>(c.s[c.pos]))) ++c.pos;
        kv[k] = c.s.substr(st, c.pos - st);
    }
    return kv;
}

void apply_schedule_kvs(Schedule& s, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "eps0")
            s.eps0 = std::stod(v);
        else if (k == "ratio")
            s.ratio = std::stod(v);
        else if (k == "steps")
            s.steps = std::stoi(v);
        else if (k == "richardson")
            s.richardson = std::stoi(v);
        else if (k == "contraction")
            s.contraction = std::stod(v);
        else if (k == "nest")
            s.nest_factor = std::stod(v);
        else
            throw std::invalid_argument("scenario: unknown schedule key " + k);
    }
}

void apply_quad_kvs(QuadSpec& q, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "order")
            q.order = std::stoi(v);
        else if (k == "est")
            q.est_order = std::stoi(v);
        else if (k == "maxcells")
            q.max_cells = std::stol(v);
        else if (k == "abstol")
            q.abs_tol = std::stod(v);
        else if (k == "reltol")
            q.rel_tol = std::stod(v);
        else if (k == "maxdepth")
            q.max_depth = std::stoi(v);
        else
            throw std::invalid_argument("scenario: unknown quad key " + k);
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    size_t st = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            out.push_back(s.substr(st, i - st));
            st = i + 1;
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// scenario parsing
// ---------------------------------------------------------------------------

Scenario parse_scenario_text(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string raw;
    std::vector<std::string> lines;
    while (std::getline(in, raw)) {
        size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        lines.push_back(raw);
    }

    auto ambient_vars = [&]() -> std::vector<std::string> {
        if (!sc.vars.empty()) return sc.vars;
        return default_vars(sc.ambient);
    };

    size_t li = 0;
    auto next_content_line = [&](std::string& out) {
        while (li < lines.size()) {
            std::string l = lines[li++];
            bool blank = true;
            for (char ch : l)
                if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
            if (!blank) {
                out = l;
                return true;
            }
        }
        return false;
    };

    std::string line;
    while (next_content_line(line)) {
        Cursor c{line, 0};
        std::string head = c.ident();
        if (head == "name") {
            sc.name = c.ident();
        } else if (head == "kind") {
            sc.kind = c.ident();
        } else if (head == "ambient") {
            sc.ambient = int(c.integer());
        } else if (head == "vars") {
            sc.vars.clear();
            while (true) {
                c.skip();
                if (c.pos >= line.size()) break;
                sc.vars.push_back(c.ident());
            }
            if (int(sc.vars.size()) != sc.ambient)
                throw std::invalid_argument("scenario: vars count != ambient");
        } else if (head == "section") {
            std::string nm = c.ident();
            if (!c.eat('=')) c.fail("expected '='");
            PolySection s;
            s.name = nm;
            s.nvars = sc.ambient;
            PolyMap pm = parse_poly_map(line.substr(c.pos), ambient_vars());
            s.comps = pm.components;
            sc.sections[nm] = std::move(s);
        } else if (head == "map") {
            std::string nm = c.ident();
            int src = int(c.integer());
            if (!c.eat('=')) c.fail("expected '='");
            PolyMap pm = parse_poly_map(line.substr(c.pos), default_vars(src));
            sc.maps[nm] = std::move(pm);
        } else if (head == "schedule") {
            Cursor rest{line, c.pos};
            apply_schedule_kvs(sc.schedule, parse_kvs(rest));
        } else if (head == "schedule-inner") {
            Cursor rest{line, c.pos};
            apply_schedule_kvs(sc.schedule_inner, parse_kvs(rest));
        } else if (head == "quad") {
            Cursor rest{line, c.pos};
            apply_quad_kvs(sc.quad, parse_kvs(rest));
        } else if (head == "current") {
            std::string nm = c.ident();
            int dim = int(c.integer());
            Current cur(dim);
            std::string bl;
            for (;;) {
                if (!next_content_line(bl)) throw std::invalid_argument("scenario: unterminated current");
                Cursor bc{bl, 0};
                std::string op = bc.ident();
                if (op == "end") break;
                if (op == "smooth") {
                    ExprCtx ctx{dim, nullptr};
                    auto av = dim == sc.ambient ? ambient_vars() : default_vars(dim);
                    ctx.vars = &av;
                    FormExpr f = parse_form(bc, ctx);
                    Box b = parse_box(bc, dim);
                    cur = cur + Current::smooth(dim, f, b);
                } else if (op == "cycle") {
                    std::string mapnm = bc.ident();
                    double mult = bc.number();
                    auto it = sc.maps.find(mapnm);
                    if (it == sc.maps.end()) throw std::invalid_argument("scenario: unknown map " + mapnm);
                    int sdim = it->second.source_dim;
                    auto sv = default_vars(sdim);
                    ExprCtx ctx{sdim, &sv};
                    FormExpr w = parse_form(bc, ctx);
                    Box b = parse_box(bc, sdim);
                    cur = cur + Current::cycle(dim, it->second, mult, w, b);
                } else if (op == "dirac") {
                    std::vector<std::complex<double>> at;
                    for (int j = 0; j < dim; ++j) {
                        double re = bc.number();
                        if (!bc.eat(',')) bc.fail("expected ','");
                        double im = bc.number();
                        at.push_back({re, im});
                        if (j + 1 < dim && !bc.eat(';')) bc.fail("expected ';'");
                    }
                    cur = cur + Current::dirac(dim, std::move(at));
                } else {
                    throw std::invalid_argument("scenario: unknown current term kind " + op);
                }
            }
            sc.currents[nm] = std::move(cur);
        } else if (head == "testform") {
            std::string nm = c.ident();
            int dim = int(c.integer());
            auto av = dim == sc.ambient ? ambient_vars() : default_vars(dim);
            ExprCtx ctx{dim, &av};
            FormExpr f = parse_form(c, ctx);
            Box b = parse_box(c, dim);
            sc.testforms[nm] = TestForm{std::move(f), std::move(b)};
        } else if (head == "chart") {
            std::string mapnm = c.ident();
            auto it = sc.maps.find(mapnm);
            if (it == sc.maps.end()) throw std::invalid_argument("scenario: unknown map " + mapnm);
            int sdim = it->second.source_dim;
            auto sv = default_vars(sdim);
            ExprCtx ctx{sdim, &sv};
            ExprPtr w = parse_expr(c, ctx);
            Box b = parse_box(c, sdim);
            ChartSpec cs;
            cs.f = it->second;
            cs.weight = w;
            cs.box = b;
            cs.label = mapnm;
            sc.charts.push_back(std::move(cs));
        } else if (head == "gammacomp") {
            std::string mapnm = c.ident();
            double mult = c.number();
            auto it = sc.maps.find(mapnm);
            if (it == sc.maps.end()) throw std::invalid_argument("scenario: unknown map " + mapnm);
            int sdim = it->second.source_dim;
            auto sv = default_vars(sdim);
            ExprCtx ctx{sdim, &sv};
            CorrComponent gc;
            gc.param = it->second;
            gc.mult = mult;
            gc.weight = parse_form(c, ctx);
            gc.box = parse_box(c, sdim);
            sc.gamma.push_back(std::move(gc));
        } else if (head == "run") {
            Cursor rest{line, c.pos};
            sc.run = parse_kvs(rest);
        } else if (head == "expect") {
            Cursor rest{line, c.pos};
            auto kv = parse_kvs(rest);
            Expectation e;
            if (kv.count("target")) e.target = kv["target"];
            if (kv.count("re")) e.want.real(std::stod(kv["re"]));
            if (kv.count("im")) e.want.imag(std::stod(kv["im"]));
            if (kv.count("tol")) e.tol = std::stod(kv["tol"]);
            if (kv.count("mode")) e.mode = kv["mode"];
            sc.expects.push_back(std::move(e));
        } else {
            throw std::invalid_argument("scenario: unknown statement '" + head + "'");
        }
    }
    if (sc.kind.empty()) throw std::invalid_argument("scenario: missing kind");
    if (sc.name.empty()) sc.name = "unnamed";
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

// ---------------------------------------------------------------------------
// canonical form + hashing
// ---------------------------------------------------------------------------

std::string Scenario::canonical() const {
    std::string s = "scenario(name=" + name + ";kind=" + kind + ";ambient=" +
                    std::to_string(ambient) + ";";
    for (const auto& [k, v] : sections) s += "sec:" + k + "=" + v.canonical() + ";";
    for (const auto& [k, v] : maps) {
        s += "map:" + k + "=" + std::to_string(v.source_dim) + "->" + std::to_string(v.target_dim) + ":";
        auto names = default_vars(v.source_dim);
        for (const Poly& p : v.components) s += p.str(names) + ",";
        s += ";";
    }
    for (const auto& [k, v] : currents) s += "cur:" + k + "=" + v.canonical() + ";";
    for (const auto& [k, v] : testforms) s += "tf:" + k + "=" + v.canonical() + ";";
    for (const ChartSpec& c : charts) {
        s += "chart:" + c.label + "=";
        auto names = default_vars(c.f.source_dim);
        for (const Poly& p : c.f.components) s += p.str(names) + ",";
        s += "|w=";
        ex_print(c.weight, s);
        s += "|" + c.box.str() + ";";
    }
    for (const CorrComponent& g : gamma) {
        char buf[32];
        snprintf(buf, sizeof buf, "%.9g", g.mult);
        s += "gamma:mult=" + std::string(buf) + "|";
        auto names = default_vars(g.param.source_dim);
        for (const Poly& p : g.param.components) s += p.str(names) + ",";
        s += "|" + g.weight.canonical() + "|" + g.box.str() + ";";
    }
    s += schedule.canonical() + ";" + schedule_inner.canonical() + ";" + quad.canonical() + ";run{";
    for (const auto& [k, v] : run) s += k + "=" + v + ",";
    s += "};expects{";
    for (const Expectation& e : expects) {
        char buf[160];
        snprintf(buf, sizeof buf, "%s:%.12g,%.12g tol=%.9g mode=%s;", e.target.c_str(),
                 e.want.real(), e.want.imag(), e.tol, e.mode.c_str());
        s += buf;
    }
    return s + "})";
}

std::uint64_t Scenario::hash() const { return fnv1a64(canonical()); }

std::string Scenario::hash_hex() const {
    char buf[24];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

namespace {

const Current& need_current(const Scenario& sc, const std::string& key) {
    auto rit = sc.run.find(key);
    if (rit == sc.run.end()) throw std::invalid_argument("scenario: run is missing " + key + "=");
    auto it = sc.currents.find(rit->second);
    if (it == sc.currents.end())
        throw std::invalid_argument("scenario: unknown current " + rit->second);
    return it->second;
}

const TestForm& need_testform(const Scenario& sc, const std::string& name) {
    auto it = sc.testforms.find(name);
    if (it == sc.testforms.end()) throw std::invalid_argument("scenario: unknown testform " + name);
    return it->second;
}

const PolySection& need_section(const Scenario& sc, const std::string& key) {
    auto rit = sc.run.find(key);
    if (rit == sc.run.end()) throw std::invalid_argument("scenario: run is missing " + key + "=");
    auto it = sc.sections.find(rit->second);
    if (it == sc.sections.end())
        throw std::invalid_argument("scenario: unknown section " + rit->second);
    return it->second;
}

int need_int(const Scenario& sc, const std::string& key) {
    auto rit = sc.run.find(key);
    if (rit == sc.run.end()) throw std::invalid_argument("scenario: run is missing " + key + "=");
    return std::stoi(rit->second);
}

void absorb(RunResult& rr, const PairResult& pr, const std::string& prefix) {
    rr.converged = rr.converged && pr.converged;
    rr.flagged = rr.flagged || pr.quad_flagged;
    rr.cells += pr.cells;
    for (const GroupTable& t : pr.tables) {
        GroupTable tt = t;
        tt.label = prefix.empty() ? t.label : prefix + "." + t.label;
        rr.tables.push_back(std::move(tt));
    }
}

}  // namespace

int RunResult::exit_code() const {
    if (!converged) return 3;
    if (!pass) return 1;
    return 0;
}

std::string RunResult::record_text() const {
    std::ostringstream os;
    auto emitc = [&](const char* key, std::complex<double> v) {
        char buf[96];
        snprintf(buf, sizeof buf, "%s_re=%.17g\n%s_im=%.17g\n", key, v.real(), key, v.imag());
        os << buf;
    };
    auto emitd = [&](const char* key, double v) {
        char buf[64];
        snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
        os << buf;
    };
    os << "schema=1\n";
    os << "name=" << name << "\n";
    os << "kind=" << kind << "\n";
    os << "hash=" << hash << "\n";
    os << "converged=" << (converged ? 1 : 0) << "\n";
    os << "flagged=" << (flagged ? 1 : 0) << "\n";
    os << "cells=" << cells << "\n";
    emitc("value", value);
    emitd("estimate", estimate);
    if (has_routes) {
        emitc("lhs", lhs);
        emitd("lhs_estimate", lhs_est);
        emitc("rhs", rhs);
        emitd("rhs_estimate", rhs_est);
        emitc("defect", defect);
        emitd("defect_estimate", defect_est);
    }
    if (!cohom_checks.empty()) {
        os << "nchecks=" << cohom_checks.size() << "\n";
        for (size_t i = 0; i < cohom_checks.size(); ++i)
            os << "check_" << i << "=" << cohom_checks[i].name << " pass="
               << (cohom_checks[i].pass ? 1 : 0) << "\n";
    }
    os << "nexpect=" << expect_results.size() << "\n";
    for (size_t i = 0; i < expect_results.size(); ++i) {
        const ExpectOutcome& eo = expect_results[i];
        char buf[256];
        snprintf(buf, sizeof buf,
                 "expect_%zu=target=%s want_re=%.12g want_im=%.12g tol=%.9g mode=%s got_re=%.17g "
                 "got_im=%.17g err=%.9g pass=%d\n",
                 i, eo.e.target.c_str(), eo.e.want.real(), eo.e.want.imag(), eo.e.tol,
                 eo.e.mode.c_str(), eo.got.real(), eo.got.imag(), eo.err, eo.pass ? 1 : 0);
        os << buf;
    }
    os << "pass=" << (pass ? 1 : 0) << "\n";
    return os.str();
}

std::string RunResult::convergence_csv() const {
    std::ostringstream os;
    os << "group,step,eps,value_re,value_im,diff,ratio\n";
    for (const GroupTable& t : tables) {
        double prev_diff = 0.0;
        for (size_t j = 0; j < t.rows.size(); ++j) {
            const LadderRow& r = t.rows[j];
            double diff = j == 0 ? 0.0 : std::abs(r.value - t.rows[j - 1].value);
            char buf[224];
            if (j >= 2 && prev_diff > 0.0)
                snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.17g,%.17g,%.9g,%.9g\n", t.label.c_str(), j,
                         r.eps, r.value.real(), r.value.imag(), diff, diff / prev_diff);
            else if (j >= 1)
                snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.17g,%.17g,%.9g,\n", t.label.c_str(), j,
                         r.eps, r.value.real(), r.value.imag(), diff);
            else
                snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.17g,%.17g,,\n", t.label.c_str(), j, r.eps,
                         r.value.real(), r.value.imag());
            os << buf;
            if (j >= 1) prev_diff = diff;
        }
    }
    return os.str();
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opt) {
    RunResult rr;
    rr.name = sc.name;
    rr.kind = sc.kind;
    rr.hash = sc.hash_hex();

    fs::create_directories(opt.out_dir);
    fs::path rec_path = fs::path(opt.out_dir) / (rr.hash + ".record");
    fs::path csv_path = fs::path(opt.out_dir) / (rr.hash + ".convergence.csv");
    fs::path summary_path = fs::path(opt.out_dir) / "summary.csv";

    if (!opt.no_cache && fs::exists(rec_path)) {
        std::ifstream in(rec_path);
        std::string ln;
        while (std::getline(in, ln)) {
            auto eq = ln.find('=');
            if (eq == std::string::npos) continue;
            std::string k = ln.substr(0, eq), v = ln.substr(eq + 1);
            if (k == "value_re") rr.value.real(std::stod(v));
            if (k == "value_im") rr.value.imag(std::stod(v));
            if (k == "estimate") rr.estimate = std::stod(v);
            if (k == "converged") rr.converged = v == "1";
            if (k == "flagged") rr.flagged = v == "1";
            if (k == "cells") rr.cells = std::stol(v);
            if (k == "pass") rr.pass = v == "1";
        }
        rr.from_cache = true;
        return rr;
    }

    auto t0 = std::chrono::steady_clock::now();
    PairOptions popts;
    popts.quad = sc.quad;
    popts.workers = opt.workers;

    if (sc.kind == "cohom-verify") {
        rr.cohom_checks = cohom::verify_all();
        bool all = true;
        for (const auto& c : rr.cohom_checks) all = all && c.pass;
        rr.value = {all ? 1.0 : 0.0, 0.0};
    } else if (sc.kind == "pair") {
        popts.strict_bidegree = true;
        const Current& mu = need_current(sc, "mu");
        const TestForm& tf = need_testform(sc, sc.run.at("test"));
        PairResult pr = mu.pair(tf, popts);
        rr.value = pr.value;
        rr.estimate = pr.estimate;
        absorb(rr, pr, "");
    } else if (sc.kind == "m-limit") {
        const PolySection& psi = need_section(sc, "section");
        const Current& mu = need_current(sc, "mu");
        int k = need_int(sc, "k");
        Current mk = m_limit(psi, mu, k, sc.schedule);
        PairResult pr = mk.pair(need_testform(sc, sc.run.at("test")), popts);
        rr.value = pr.value;
        rr.estimate = pr.estimate;
        absorb(rr, pr, "");
    } else if (sc.kind == "m-iterated") {
        const PolySection& outer = need_section(sc, "outer");
        const PolySection& inner = need_section(sc, "inner");
        const Current& mu = need_current(sc, "mu");
        Current it = m_iterated(outer, need_int(sc, "kouter"), inner, need_int(sc, "kinner"), mu,
                                sc.schedule, sc.schedule_inner);
        PairResult pr = it.pair(need_testform(sc, sc.run.at("test")), popts);
        rr.value = pr.value;
        rr.estimate = pr.estimate;
        absorb(rr, pr, "");
    } else if (sc.kind == "pullback") {
        if (sc.charts.empty()) throw std::invalid_argument("scenario: pullback needs charts");
        PullbackProblem p;
        p.atlas = sc.charts;
        p.x_dim = sc.charts[0].f.source_dim;
        p.mu = need_current(sc, "mu");
        p.schedule = sc.schedule;
        if (sc.run.count("metric") && sc.run.at("metric") == "fs_p1")
            p.metric = MetricModel::FubiniStudyP1;
        bool full = sc.run.count("full") && sc.run.at("full") == "1";
        Current f_mu = full ? full_pullback(p) : pullback(p);
        std::vector<TestForm> tfs;
        for (const std::string& nm : split_csv(sc.run.at("test"))) tfs.push_back(need_testform(sc, nm));
        PairResult pr = f_mu.pair_atlas(tfs, popts);
        rr.value = pr.value;
        rr.estimate = pr.estimate;
        absorb(rr, pr, "");
    } else if (sc.kind == "compose-defect") {
        if (sc.charts.size() != 2)
            throw std::invalid_argument("scenario: compose-defect needs charts f1, f2");
        const Current& mu = need_current(sc, "mu");
        CompositionRoutes routes =
            composition_difference(sc.charts[0], sc.charts[1], mu, sc.schedule, sc.schedule_inner);
        const TestForm& tf = need_testform(sc, sc.run.at("test"));
        PairResult pl = routes.chained.pair(tf, popts);
        PairResult pd = routes.direct.pair(tf, popts);
        rr.has_routes = true;
        rr.lhs = pl.value;
        rr.lhs_est = pl.estimate;
        rr.rhs = pd.value;
        rr.rhs_est = pd.estimate;
        rr.defect = pl.value - pd.value;
        rr.defect_est = pl.estimate + pd.estimate;
        rr.value = rr.defect;
        rr.estimate = rr.defect_est;
        absorb(rr, pl, "lhs");
        absorb(rr, pd, "rhs");
    } else if (sc.kind == "correspondence") {
        if (sc.gamma.empty()) throw std::invalid_argument("scenario: correspondence needs gammacomp");
        Correspondence corr;
        corr.x_dim = sc.gamma[0].param.source_dim;
        corr.y_dim = sc.ambient;
        corr.comps = sc.gamma;
        Current c = correspondence_pullback(corr, need_current(sc, "mu"), sc.schedule);
        PairResult pr = c.pair(need_testform(sc, sc.run.at("test")), popts);
        rr.value = pr.value;
        rr.estimate = pr.estimate;
        absorb(rr, pr, "");
    } else {
        throw std::invalid_argument("scenario: unknown kind " + sc.kind);
    }

    // expectations
    for (const Expectation& e : sc.expects) {
        ExpectOutcome eo;
        eo.e = e;
        if (e.target == "value") {
            eo.got = rr.value;
            eo.err = rr.estimate;
        } else if (e.target == "lhs") {
            eo.got = rr.lhs;
            eo.err = rr.lhs_est;
        } else if (e.target == "rhs") {
            eo.got = rr.rhs;
            eo.err = rr.rhs_est;
        } else if (e.target == "defect") {
            eo.got = rr.defect;
            eo.err = rr.defect_est;
        } else {
            throw std::invalid_argument("scenario: unknown expect target " + e.target);
        }
        if (e.mode == "rel") {
            double denom = std::max(std::abs(e.want), 1e-12);
            eo.pass = std::abs(eo.got - e.want) <= e.tol * denom;
        } else if (e.mode == "abs") {
            eo.pass = std::abs(eo.got - e.want) <= e.tol;
        } else if (e.mode == "nonzero") {
            eo.pass = std::abs(eo.got) > eo.err + e.tol;
        } else {
            throw std::invalid_argument("scenario: unknown expect mode " + e.mode);
        }
        rr.expect_results.push_back(std::move(eo));
    }
    if (!rr.cohom_checks.empty())
        for (const auto& c : rr.cohom_checks) rr.pass = rr.pass && c.pass;
    for (const ExpectOutcome& eo : rr.expect_results) rr.pass = rr.pass && eo.pass;

    auto t1 = std::chrono::steady_clock::now();
    rr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    {
        std::ofstream out(rec_path);
        out << rr.record_text();
    }
    {
        std::ofstream out(csv_path);
        out << rr.convergence_csv();
    }
    {
        bool fresh = !fs::exists(summary_path);
        std::ofstream out(summary_path, std::ios::app);
        if (fresh) out << "name,hash,kind,value_re,value_im,estimate,pass,wall_ms\n";
        char buf[256];
        snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%.17g,%.9g,%d,%.1f\n", rr.name.c_str(),
                 rr.hash.c_str(), rr.kind.c_str(), rr.value.real(), rr.value.imag(), rr.estimate,
                 rr.pass ? 1 : 0, rr.wall_ms);
        out << buf;
    }
    return rr;
}

TestForm scalar_bump_test(int dim, std::vector<std::complex<double>> center, double radius,
                          double box_r) {
    TestForm tf;
    tf.form = FormExpr::scalar(dim, ex_bump(dim, center, radius));
    tf.box = Box::centered(dim, box_r);
    return tf;
}

FormExpr area_form(int dim, int var) {
    FormExpr f(dim);
    f.add(CompKey{1u << var, 1u << var}, ex_const({0.0, 0.5}));
    return f;
}

}  // namespace pscur
