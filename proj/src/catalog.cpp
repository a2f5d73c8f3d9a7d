#include "pinkforge/catalog.hpp"

#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "pinkforge/errors.hpp"

namespace pinkforge {

namespace {

// Tokenizer shared by the scalar and matrix grammars.
struct Lexer {
    std::string src;
    std::size_t pos = 0;

    explicit Lexer(std::string s) : src(std::move(s)) {}

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
    }

    char peek() {
        skip_ws();
        return pos < src.size() ? src[pos] : '\0';
    }

    char take() {
        skip_ws();
        if (pos >= src.size()) throw ParseError("expression: unexpected end");
        return src[pos++];
    }

    void expect(char c) {
        if (take() != c)
            throw ParseError(std::string("expression: expected '") + c +
                             "' in '" + src + "'");
    }

    bool at_name() { return std::isalpha(static_cast<unsigned char>(peek())); }
    bool at_digit() { return std::isdigit(static_cast<unsigned char>(peek())); }

    std::string name() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        if (start == pos) throw ParseError("expression: expected a name");
        return src.substr(start, pos - start);
    }

    uint64_t integer() {
        skip_ws();
        std::size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
            ++pos;
        if (start == pos) throw ParseError("expression: expected an integer");
        return std::stoull(src.substr(start, pos - start));
    }
};

struct Evaluator {
    Lexer lex;
    uint64_t ell;
    unsigned prec;
    const std::map<std::string, PadicScalar>& vars;

    Evaluator(const std::string& s, uint64_t l, unsigned m,
              const std::map<std::string, PadicScalar>& v)
        : lex(s), ell(l), prec(m), vars(v) {}

    PadicScalar scalar(int64_t v) const { return PadicScalar(ell, prec, v); }

    // sexpr := sterm (('+'|'-') sterm)*
    PadicScalar sexpr() {
        PadicScalar acc = sterm();
        for (char c = lex.peek(); c == '+' || c == '-'; c = lex.peek()) {
            lex.take();
            PadicScalar rhs = sterm();
            acc = (c == '+') ? acc + rhs : acc - rhs;
        }
        return acc;
    }

    // sterm := sunary (('*'|'/') sunary)*
    PadicScalar sterm() {
        PadicScalar acc = sunary();
        for (char c = lex.peek(); c == '*' || c == '/'; c = lex.peek()) {
            lex.take();
            PadicScalar rhs = sunary();
            if (c == '*') {
                acc = acc * rhs;
            } else {
                if (!rhs.is_unit())
                    throw ParseError("expression: division by a non-unit");
                acc = acc * rhs.inverse();
            }
        }
        return acc;
    }

    // sunary := '-' sunary | sprimary ('^' int)?
    PadicScalar sunary() {
        if (lex.peek() == '-') {
            lex.take();
            return scalar(0) - sunary();
        }
        PadicScalar base = sprimary();
        if (lex.peek() == '^') {
            lex.take();
            uint64_t e = lex.integer();
            PadicScalar acc = scalar(1);
            for (uint64_t i = 0; i < e; ++i) acc = acc * base;
            return acc;
        }
        return base;
    }

    PadicScalar sprimary() {
        if (lex.peek() == '(') {
            lex.take();
            PadicScalar v = sexpr();
            lex.expect(')');
            return v;
        }
        if (lex.at_digit()) return scalar(static_cast<int64_t>(lex.integer()));
        const std::string id = lex.name();
        auto it = vars.find(id);
        if (it == vars.end())
            throw ParseError("expression: unknown variable '" + id + "'");
        return it->second;
    }

    // mexpr := mfactor mfactor ...  (optional '*' between factors)
    Mat2 mexpr() {
        Mat2 acc = mfactor();
        while (true) {
            char c = lex.peek();
            if (c == '*') {
                lex.take();
                c = lex.peek();
            }
            if (c == '(' || std::isalpha(static_cast<unsigned char>(c)))
                acc = acc * mfactor();
            else
                break;
        }
        return acc;
    }

    Mat2 mfactor() {
        if (lex.peek() == '(') {
            lex.take();
            Mat2 m = mexpr();
            lex.expect(')');
            return m;
        }
        const std::string id = lex.name();
        if (id == "L" || id == "R" || id == "D") {
            lex.expect('(');
            PadicScalar a = sexpr();
            lex.expect(')');
            if (id == "L") return gen_L(a);
            if (id == "R") return gen_R(a);
            return gen_D(a);
        }
        if (id == "W")
            return Mat2(scalar(0), scalar(-1), scalar(1), scalar(0));
        if (id == "Id") return Mat2::identity(ell, prec);
        if (id == "Inv") {
            lex.expect('(');
            Mat2 m = mexpr();
            lex.expect(')');
            return m.inverse();
        }
        if (id == "Comm") {
            lex.expect('(');
            Mat2 x = mexpr();
            lex.expect(',');
            Mat2 y = mexpr();
            lex.expect(')');
            return comm(x, y);
        }
        throw ParseError("expression: unknown matrix head '" + id + "'");
    }
};

constexpr const char* kBuiltinCatalog =
    "# pink-forge identity catalog\n"
    "# name | vars name:minval | lhs | rhs\n"
    "diag-product | a:1 b:1 | L(a/(1+a*b)) R(-b) L(-a) R(b/(1+a*b)) | D(a*b)\n"
    "comm-L-D | a:1 b:1 | Comm(L(a), D(b)) | L(a*b*(b+2)/((1+b)^2))\n"
    "comm-R-D | a:1 b:1 | Comm(R(a), D(b)) | R(-(a*b)*(2+b))\n"
    "comm-D-R | a:1 b:1 | Comm(D(b), R(a)) | R(a*b*(2+b))\n"
    "comm-D-L | a:1 b:1 | Comm(D(b), L(a)) | L(-(a*b)*(2+b)/((1+b)^2))\n"
    "comm-R-L-dressed | a:1 b:1 | "
    "L(-(a*b^2)/(1+a*b+(a*b)^2)) Comm(R(a), L(b)) R(a^2*b/(1+a*b+(a*b)^2)) | "
    "D(a*b*(1+a*b))\n"
    "weyl-easy | c:1 | Inv(Comm(Inv(W), D(c))) | D(c*(2+c))\n";

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

Mat2 eval_matrix_expr(const std::string& expr, uint64_t ell, unsigned prec,
                      const std::map<std::string, PadicScalar>& vars) {
    Evaluator ev(expr, ell, prec, vars);
    Mat2 m = ev.mexpr();
    if (ev.lex.peek() != '\0')
        throw ParseError("expression: trailing input in '" + expr + "'");
    return m;
}

PadicScalar eval_scalar_expr(const std::string& expr, uint64_t ell,
                             unsigned prec,
                             const std::map<std::string, PadicScalar>& vars) {
    Evaluator ev(expr, ell, prec, vars);
    PadicScalar v = ev.sexpr();
    if (ev.lex.peek() != '\0')
        throw ParseError("expression: trailing input in '" + expr + "'");
    return v;
}

IdentityCatalog IdentityCatalog::builtin() { return parse(kBuiltinCatalog); }

IdentityCatalog IdentityCatalog::parse(const std::string& text) {
    IdentityCatalog cat;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols;
        std::string col;
        std::istringstream cells(t);
        while (std::getline(cells, col, '|')) cols.push_back(trim(col));
        if (cols.size() != 4)
            throw ParseError("catalog line " + std::to_string(lineno) +
                             ": expected name | vars | lhs | rhs");
        IdentityEntry e;
        e.name = cols[0];
        std::istringstream vs(cols[1]);
        std::string v;
        while (vs >> v) {
            const std::size_t colon = v.find(':');
            const std::string digits =
                colon == std::string::npos ? "" : v.substr(colon + 1);
            if (digits.empty() ||
                digits.find_first_not_of("0123456789") != std::string::npos)
                throw ParseError("catalog line " + std::to_string(lineno) +
                                 ": var spec needs name:minval");
            e.vars.emplace_back(v.substr(0, colon),
                                static_cast<unsigned>(std::stoul(digits)));
        }
        e.lhs = cols[2];
        e.rhs = cols[3];
        if (e.name.empty() || e.lhs.empty() || e.rhs.empty())
            throw ParseError("catalog line " + std::to_string(lineno) +
                             ": empty field");
        cat.entries.push_back(std::move(e));
    }
    return cat;
}

IdentityCatalog IdentityCatalog::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("catalog: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::vector<IdentityRunResult> run_catalog(const IdentityCatalog& cat,
                                           uint64_t ell, unsigned prec,
                                           std::size_t trials, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<IdentityRunResult> results;
    for (const IdentityEntry& e : cat.entries) {
        IdentityRunResult r;
        r.name = e.name;
        for (std::size_t t = 0; t < trials; ++t) {
            std::map<std::string, PadicScalar> assign;
            for (const auto& [vname, minval] : e.vars) {
                PadicScalar val(ell, prec, 0);
                if (minval < prec) {
                    uint64_t cof = 1;
                    for (unsigned i = minval; i < prec; ++i) cof *= ell;
                    uint64_t u = 0;
                    do {
                        u = rng() % cof;
                    } while (u % ell == 0);
                    PadicScalar power(ell, prec, 1);
                    for (unsigned i = 0; i < minval; ++i)
                        power = power * PadicScalar(ell, prec,
                                                    static_cast<int64_t>(ell));
                    val = PadicScalar(ell, prec, static_cast<int64_t>(u)) * power;
                }
                assign.emplace(vname, val);
            }
            ++r.trials;
            const Mat2 lhs = eval_matrix_expr(e.lhs, ell, prec, assign);
            const Mat2 rhs = eval_matrix_expr(e.rhs, ell, prec, assign);
            if (lhs != rhs) ++r.failures;
        }
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace pinkforge
