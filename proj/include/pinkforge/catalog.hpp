#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pinkforge/mat2.hpp"

namespace pinkforge {

// One named identity: two matrix expressions that must agree exactly in
// SL2(Z/l^m) for every assignment of the variables.  Matrix grammar:
//   factor  := L(s) | R(s) | D(s) | W | Id | Comm(e, e) | Inv(e) | (e)
//   expr    := factor factor ...          (juxtaposition = product)
// where W = [[0,-1],[1,0]] and s is a scalar expression over integer
// literals, the entry variables, + - * / ^ and parentheses.  Each variable
// carries the minimum valuation its samples must have.
struct IdentityEntry {
    std::string name;
    std::vector<std::pair<std::string, unsigned>> vars;
    std::string lhs;
    std::string rhs;
};

struct IdentityCatalog {
    std::vector<IdentityEntry> entries;

    // The identities shipped with the tool (also installed as a data file).
    static IdentityCatalog builtin();
    // One entry per line: name | var:minval ... | lhs | rhs.
    static IdentityCatalog parse(const std::string& text);
    static IdentityCatalog load(const std::string& path);
};

Mat2 eval_matrix_expr(const std::string& expr, uint64_t ell, unsigned prec,
                      const std::map<std::string, PadicScalar>& vars);
PadicScalar eval_scalar_expr(const std::string& expr, uint64_t ell,
                             unsigned prec,
                             const std::map<std::string, PadicScalar>& vars);

struct IdentityRunResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t failures = 0;
};

// Evaluate every entry `trials` times with variables sampled as
// unit * l^minval (deterministic in seed); exact equality required.
std::vector<IdentityRunResult> run_catalog(const IdentityCatalog& cat,
                                           uint64_t ell, unsigned prec,
                                           std::size_t trials, uint64_t seed);

} // namespace pinkforge
