#include "pinkforge/groupfile.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "pinkforge/errors.hpp"

namespace pinkforge {

namespace {

bool small_prime(uint64_t p) {
    if (p < 2) return false;
    for (uint64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

uint64_t parse_u64(const std::string& s, const std::string& what) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("group file: bad " + what + " '" + s + "'");
    return std::stoull(s);
}

} // namespace

std::vector<GroupElement> GroupFile::elements() const {
    if (!small_prime(prime))
        throw ParseError("group file: prime=" + std::to_string(prime) +
                         " is not prime");
    if (precision == 0 || factors == 0)
        throw ParseError("group file: precision and factors must be positive");
    uint64_t mod = 1;
    for (unsigned i = 0; i < precision; ++i) {
        if (mod > (uint64_t(1) << 61) / prime)
            throw ParseError("group file: modulus overflows the scalar range");
        mod *= prime;
    }
    std::vector<GroupElement> out;
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        const std::vector<uint64_t>& row = gens[gi];
        if (row.size() != std::size_t(4) * factors)
            throw ParseError("group file: gen #" + std::to_string(gi + 1) +
                             " has " + std::to_string(row.size()) +
                             " residues, expected " +
                             std::to_string(4 * factors));
        std::vector<Mat2> parts;
        for (unsigned f = 0; f < factors; ++f) {
            std::array<uint64_t, 4> r;
            for (unsigned j = 0; j < 4; ++j) {
                r[j] = row[4 * f + j];
                if (r[j] >= mod)
                    throw ParseError("group file: gen #" +
                                     std::to_string(gi + 1) +
                                     " residue out of range");
            }
            Mat2 m = Mat2::from_residues(prime, precision, r);
            if (m.det() != PadicScalar(prime, precision, 1))
                throw ParseError("group file: gen #" + std::to_string(gi + 1) +
                                 " factor " + std::to_string(f) +
                                 " has det != 1");
            parts.push_back(std::move(m));
        }
        out.push_back(GroupElement(std::move(parts)));
    }
    return out;
}

FiniteGroup GroupFile::close(std::size_t cap) const {
    std::vector<GroupElement> elts = elements();
    if (elts.empty())
        return FiniteGroup::trivial(prime, precision, factors);
    return FiniteGroup::closure(elts, cap);
}

std::string GroupFile::write() const {
    std::ostringstream out;
    out << "prime=" << prime << "\n";
    out << "precision=" << precision << "\n";
    out << "factors=" << factors << "\n";
    if (!label.empty()) out << "label=" << label << "\n";
    if (!expect.empty()) out << "expect=" << expect << "\n";
    for (const std::vector<uint64_t>& row : gens) {
        out << "gen=";
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    return out.str();
}

void GroupFile::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("group file: cannot write " + path);
    out << write();
}

GroupFile GroupFile::from_generators(const std::vector<GroupElement>& gens,
                                     std::string label) {
    if (gens.empty())
        throw PreconditionError("group file: need at least one generator");
    GroupFile gf;
    gf.prime = gens[0].ell();
    gf.precision = gens[0].precision();
    gf.factors = gens[0].n();
    gf.label = std::move(label);
    for (const GroupElement& g : gens) {
        std::vector<uint64_t> row;
        for (unsigned f = 0; f < g.n(); ++f)
            for (uint64_t r : g.factor(f).residues()) row.push_back(r);
        gf.gens.push_back(std::move(row));
    }
    return gf;
}

GroupFile GroupFile::read(std::istream& in) {
    GroupFile gf;
    bool saw_prime = false, saw_prec = false, saw_factors = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("group file line " + std::to_string(lineno) +
                             ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "prime") {
            gf.prime = parse_u64(val, "prime");
            saw_prime = true;
        } else if (key == "precision") {
            gf.precision = static_cast<unsigned>(parse_u64(val, "precision"));
            saw_prec = true;
        } else if (key == "factors") {
            gf.factors = static_cast<unsigned>(parse_u64(val, "factors"));
            saw_factors = true;
        } else if (key == "label") {
            gf.label = val;
        } else if (key == "expect") {
            gf.expect = val;
        } else if (key == "gen") {
            std::vector<uint64_t> row;
            std::string tok;
            std::istringstream cells(val);
            while (std::getline(cells, tok, ','))
                row.push_back(parse_u64(tok, "residue"));
            gf.gens.push_back(std::move(row));
        } else {
            throw ParseError("group file line " + std::to_string(lineno) +
                             ": unknown key '" + key + "'");
        }
    }
    if (!saw_prime || !saw_prec || !saw_factors)
        throw ParseError("group file: missing prime=/precision=/factors=");
    gf.elements(); // validate
    return gf;
}

GroupFile GroupFile::read_string(const std::string& text) {
    std::istringstream in(text);
    return read(in);
}

GroupFile GroupFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("group file: cannot open " + path);
    return read(in);
}

} // namespace pinkforge
