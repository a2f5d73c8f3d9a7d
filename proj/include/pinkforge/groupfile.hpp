#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pinkforge/group.hpp"

namespace pinkforge {

// Line-oriented group description.  Header lines prime=, precision=,
// factors=, optional label= / expect=, then one gen= line per generator
// holding 4n comma-separated residues (row-major within each factor).
// Blank lines and lines starting with '#' are ignored on input; write()
// emits the canonical form, which round-trips byte-identically.
struct GroupFile {
    uint64_t prime = 0;
    unsigned precision = 0;
    unsigned factors = 0;
    std::string label;
    std::string expect;
    std::vector<std::vector<uint64_t>> gens;

    bool operator==(const GroupFile& o) const = default;

    // Validated generator tuples (residues in range, det 1 per part).
    std::vector<GroupElement> elements() const;
    FiniteGroup close(std::size_t cap = kDefaultGroupCap) const;

    std::string write() const;
    void save(const std::string& path) const;

    static GroupFile from_generators(const std::vector<GroupElement>& gens,
                                     std::string label = "");
    static GroupFile read(std::istream& in);
    static GroupFile read_string(const std::string& text);
    static GroupFile load(const std::string& path);
};

} // namespace pinkforge
