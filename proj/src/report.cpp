#include "regkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string_view>

#include "regkit/errors.hpp"

namespace regkit {

namespace {

void dump_rec(const Json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * depth), ' ');
    const std::string pad_in(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + Json(it.key()).dump() + ": ";
                dump_rec(it.value(), out, indent, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_rec(v, out, indent, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                // JSON has no infinities; reports store them as huge
                // sentinels so round-trips stay parseable.
                out += v > 0 ? "1e308" : "-1e308";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            std::string_view sv(buf);
            out += buf;
            // Keep floats tagged as floats across round-trips.
            if (sv.find_first_of(".eE") == std::string_view::npos) out += ".0";
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

Json json_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw config_error(std::string("parse error in ") + path + ": " + e.what());
    }
}

void json_to_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path);
    out << dump_json(j);
}

Json make_check(const std::string& name, double lhs, const std::string& relation,
                double rhs, bool pass) {
    Json c;
    c["name"] = name;
    c["lhs"] = lhs;
    c["relation"] = relation;
    c["rhs"] = rhs;
    c["pass"] = pass;
    return c;
}

void push_check(Json& checks, bool& overall, const std::string& name, double lhs,
                const std::string& relation, double rhs, bool pass) {
    checks.push_back(make_check(name, lhs, relation, rhs, pass));
    overall = overall && pass;
}

void check_le(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double slack) {
    push_check(checks, overall, name, lhs, "<=", rhs, lhs <= rhs + slack);
}

void check_ge(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double slack) {
    push_check(checks, overall, name, lhs, ">=", rhs, lhs >= rhs - slack);
}

void check_eq(Json& checks, bool& overall, const std::string& name, double lhs,
              double rhs, double tol) {
    push_check(checks, overall, name, lhs, "==", rhs, std::abs(lhs - rhs) <= tol);
}

void check_true(Json& checks, bool& overall, const std::string& name, bool cond) {
    push_check(checks, overall, name, cond ? 1.0 : 0.0, "==", 1.0, cond);
}

}  // namespace regkit
