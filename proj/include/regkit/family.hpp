#pragma once

#include <string>
#include <vector>

#include "regkit/domain.hpp"
#include "regkit/ledger.hpp"

namespace regkit {

// An enumerated distinguisher family: a finite list of [0,1]-valued
// tables over one domain. Distinguishing power only ever enters through
// exact expectations of these tables, so the list is the whole object.
struct Family {
    std::vector<BoundedFn> members;
    std::vector<std::string> names;  // parallel to members
    bool closed_under_negation = false;
    bool contains_constants = false;
    Ledger ledger;

    std::size_t size() const { return members.size(); }
    std::size_t domain_size() const {
        return members.empty() ? 0 : members[0].size();
    }
};

Family make_family(std::vector<BoundedFn> members, std::vector<std::string> names);

// Returns the closure of `f` under complement (1 - f) together with the
// constant tables 0 and 1. Duplicate tables (exact double equality,
// entrywise) are added only once, and the original member order is kept,
// so closing an already closed family returns it unchanged.
Family close_family(const Family& f);

// True if the family contains a table exactly equal to `tbl`.
bool family_contains(const Family& f, const std::vector<double>& tbl);

// Appends a member if no exactly equal table is present yet.
void add_member(Family& f, BoundedFn fn, std::string name);

}  // namespace regkit
