#pragma once

#include <stdexcept>
#include <string>

namespace pinkforge {

// Input outside the domain an operation is defined on (bad prime, wrong
// precision, non-unit where a unit is required, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Enumeration grew past the configured element cap.
struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// An iteration that is guaranteed to settle did not settle within its bound.
struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

// A checked mathematical guarantee failed on concrete data.  Carries the
// offending data in the message; seeing this means a real bug somewhere.
struct LemmaViolation : std::runtime_error {
    explicit LemmaViolation(const std::string& what) : std::runtime_error(what) {}
};

// The hypotheses of a conditional check do not hold for the given group,
// so the check has nothing to say.
struct HypothesisUnmet : std::runtime_error {
    explicit HypothesisUnmet(const std::string& what) : std::runtime_error(what) {}
};

// A multi-stage construction could not complete; message says which stage.
struct ConstructionFailed : std::runtime_error {
    explicit ConstructionFailed(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated a documented precondition that is cheap to detect.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// The set of elements of prime-power order is not a subgroup.
struct NotNormalSylow : std::runtime_error {
    explicit NotNormalSylow(const std::string& what) : std::runtime_error(what) {}
};

// Subgroup of SL2(F_l) fits none of the recognized shapes.
struct UnclassifiableError : std::runtime_error {
    explicit UnclassifiableError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file or catalog text.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pinkforge
