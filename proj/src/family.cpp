#include "regkit/family.hpp"

#include <map>
#include <stdexcept>

namespace regkit {

namespace {

bool tables_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

}  // namespace

Family make_family(std::vector<BoundedFn> members, std::vector<std::string> names) {
    if (members.empty()) throw std::invalid_argument("family needs at least one member");
    if (names.size() != members.size()) throw std::invalid_argument("names/members length mismatch");
    const std::size_t n = members[0].size();
    for (const auto& m : members) {
        if (m.size() != n) throw std::invalid_argument("family members on different domains");
    }
    Family f;
    f.members = std::move(members);
    f.names = std::move(names);
    f.ledger.pieces = f.members.size();
    return f;
}

bool family_contains(const Family& f, const std::vector<double>& tbl) {
    for (const auto& m : f.members) {
        if (tables_equal(m.values, tbl)) return true;
    }
    return false;
}

void add_member(Family& f, BoundedFn fn, std::string name) {
    if (!f.members.empty() && fn.size() != f.domain_size()) {
        throw std::invalid_argument("member domain size mismatch");
    }
    if (family_contains(f, fn.values)) return;
    f.members.push_back(std::move(fn));
    f.names.push_back(std::move(name));
    f.ledger.pieces = f.members.size();
}

Family close_family(const Family& f) {
    Family out = f;
    const std::size_t n = out.domain_size();

    add_member(out, make_fn(std::vector<double>(n, 0.0)), "const0");
    add_member(out, make_fn(std::vector<double>(n, 1.0)), "const1");

    // One pass suffices: the complement of a complement is the original,
    // and the constants complement each other.
    const std::size_t count = out.members.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> neg(n);
        for (std::size_t x = 0; x < n; ++x) neg[x] = 1.0 - out.members[i].values[x];
        out.ledger.post_ops += n;
        add_member(out, make_fn(std::move(neg)), "not(" + out.names[i] + ")");
    }

    out.closed_under_negation = true;
    out.contains_constants = true;
    return out;
}

}  // namespace regkit
