#pragma once

#include <string>
#include <vector>

#include "pinkforge/group.hpp"

namespace pinkforge {

enum class DicksonLabel {
    SplitCartan,
    NonsplitCartan,
    Borel,
    NormalizerSplitCartan,
    NormalizerNonsplitCartan,
    Exceptional,
    Full,
};

enum class ExceptionalKind { None, A4, S4, A5 };

struct SubgroupType {
    DicksonLabel label;
    ExceptionalKind kind = ExceptionalKind::None;

    bool operator==(const SubgroupType& o) const {
        return label == o.label && kind == o.kind;
    }
    bool operator!=(const SubgroupType& o) const { return !(*this == o); }
    std::string str() const;
};

std::string label_name(DicksonLabel label);

// Most specific shape of H <= SL2(F_l), checked in the order split Cartan,
// nonsplit Cartan, Borel, the two normalizers, exceptional.  The full group
// is always labeled Full, even at the tiny primes where it coincides with a
// normalizer.  Requires m = 1, n = 1, l <= 50.
SubgroupType classify(const FiniteGroup& H);

// Every shape H fits, in the same order (a split Cartan also lies in a
// Borel and in its own normalizer); Full appears iff H is the full group.
std::vector<DicksonLabel> type_set(const FiniteGroup& H);

bool is_borel_type(const FiniteGroup& H);

// Elements of l-power order, when they form a subgroup (they do whenever H
// fixes a line, as the unipotent part of a Borel).  Requires m = 1, n = 1.
FiniteGroup ell_sylow(const FiniteGroup& H);

} // namespace pinkforge
