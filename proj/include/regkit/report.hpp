#pragma once

#include <string>

#include "regkit/config.hpp"

namespace regkit {

// Reports keep insertion order and serialize every real with 17
// significant digits, so a passing run is byte-reproducible modulo the
// wall-time field.
std::string dump_json(const Json& j, int indent = 2);

Json json_from_file(const std::string& path);
void json_to_file(const std::string& path, const Json& j);

// One verified inequality: lhs relation rhs, with the measured outcome.
// relation is one of "<=", ">=", "==" (within tolerance, carried by the
// caller in lhs/rhs construction).
Json make_check(const std::string& name, double lhs, const std::string& relation,
                double rhs, bool pass);

// Appends and folds the outcome into the running conjunction.
void push_check(Json& checks, bool& overall, const std::string& name, double lhs,
                const std::string& relation, double rhs, bool pass);

// Convenience forms that evaluate the relation with an absolute slack.
void check_le(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double slack = 0.0);
void check_ge(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double slack = 0.0);
void check_eq(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double tol);
void check_true(Json& checks, bool& overall, const std::string& name, bool cond);

}  // namespace regkit
