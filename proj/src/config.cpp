#include "regkit/config.hpp"

#include <fstream>
#include <set>

#include "regkit/errors.hpp"

namespace regkit {

namespace {

void reject_unknown(const Json& obj, const char* where,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw config_error(std::string("unknown key '") + it.key() + "' in " + where);
        }
    }
}

double get_num(const Json& obj, const char* key, double fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw config_error(std::string("missing key '") + key + "'");
        return fallback;
    }
    if (!obj.at(key).is_number()) {
        throw config_error(std::string("key '") + key + "' must be a number");
    }
    return obj.at(key).get<double>();
}

std::string get_str(const Json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw config_error(std::string("missing or non-string key '") + key + "'");
    }
    return obj.at(key).get<std::string>();
}

std::vector<double> get_vec(const Json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_array()) {
        throw config_error(std::string("missing or non-array key '") + key + "'");
    }
    std::vector<double> out;
    for (const auto& v : obj.at(key)) {
        if (!v.is_number()) throw config_error(std::string("non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

DomainSpec parse_domain(const Json& obj) {
    reject_unknown(obj, "domain", {"size", "bits"});
    DomainSpec d;
    if (obj.contains("bits")) {
        d.bits = static_cast<int>(get_num(obj, "bits", 0, true));
        if (d.bits < 1 || d.bits > 20) throw config_error("domain bits must lie in [1,20]");
        d.size = std::size_t{1} << d.bits;
    } else if (obj.contains("size")) {
        const double s = get_num(obj, "size", 0, true);
        if (s < 1 || s > (1 << 20)) throw config_error("domain size must lie in [1, 2^20]");
        d.size = static_cast<std::size_t>(s);
    } else {
        throw config_error("domain needs 'size' or 'bits'");
    }
    return d;
}

TargetSpec parse_target(const Json& obj) {
    reject_unknown(obj, "target",
                   {"kind", "bias", "table", "lo", "hi", "bits_used", "cond"});
    TargetSpec t;
    t.kind = get_str(obj, "kind");
    t.bias = get_num(obj, "bias", 0.5);
    t.lo = get_num(obj, "lo", 0.0);
    t.hi = get_num(obj, "hi", 1.0);
    if (obj.contains("table")) t.table = get_vec(obj, "table");
    if (obj.contains("cond")) t.cond = get_vec(obj, "cond");
    if (obj.contains("bits_used")) {
        for (double b : get_vec(obj, "bits_used")) t.bits_used.push_back(static_cast<int>(b));
    }
    static const std::set<std::string> kinds = {
        "parity", "majority", "address", "random_boolean", "explicit",
        "first_bit_biased", "joint_explicit", "joint_random", "joint_bit_biased"};
    if (!kinds.count(t.kind)) throw config_error("unknown target kind '" + t.kind + "'");
    return t;
}

FamilySpec parse_family(const Json& obj) {
    reject_unknown(obj, "family", {"kind", "arity", "tables", "names"});
    FamilySpec f;
    f.kind = get_str(obj, "kind");
    f.arity = static_cast<int>(get_num(obj, "arity", 1));
    if (obj.contains("tables")) {
        for (const auto& row : obj.at("tables")) {
            std::vector<double> tbl;
            for (const auto& v : row) tbl.push_back(v.get<double>());
            f.tables.push_back(std::move(tbl));
        }
    }
    if (obj.contains("names")) {
        for (const auto& v : obj.at("names")) f.names.push_back(v.get<std::string>());
    }
    static const std::set<std::string> kinds = {"juntas", "conjunctions", "parity_family",
                                               "explicit_tables"};
    if (!kinds.count(f.kind)) throw config_error("unknown family kind '" + f.kind + "'");
    return f;
}

DistSpec parse_dist(const Json& obj, const char* where) {
    reject_unknown(obj, where, {"kind", "mass", "bias"});
    DistSpec d;
    d.kind = get_str(obj, "kind");
    if (obj.contains("mass")) d.mass = get_vec(obj, "mass");
    if (obj.contains("bias")) d.bias = get_vec(obj, "bias");
    static const std::set<std::string> kinds = {"uniform", "explicit", "product_biased"};
    if (!kinds.count(d.kind)) throw config_error("unknown distribution kind '" + d.kind + "'");
    return d;
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
    if (!doc.is_object()) throw config_error("config must be a JSON object");
    reject_unknown(doc, "config",
                   {"schema_version", "pipeline", "domain", "target", "family",
                    "distribution", "sdist", "vdist", "epsilon", "gamma", "delta",
                    "tau", "labels", "seed", "sample_set", "rescale"});
    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(get_num(doc, "schema_version", 1));
    if (cfg.schema_version != 1) throw config_error("unsupported schema_version");
    cfg.pipeline = get_str(doc, "pipeline");
    static const std::set<std::string> pipelines = {
        "ma", "mc", "ihcl_pp", "ihcl_recover", "pame_pp", "pame_recover",
        "dmt_pp", "dmt_recover"};
    if (!pipelines.count(cfg.pipeline)) {
        throw config_error("unknown pipeline '" + cfg.pipeline + "'");
    }
    if (!doc.contains("domain")) throw config_error("missing 'domain'");
    cfg.domain = parse_domain(doc.at("domain"));

    const bool dmt = cfg.pipeline == "dmt_pp" || cfg.pipeline == "dmt_recover";
    if (doc.contains("target")) {
        cfg.target = parse_target(doc.at("target"));
    } else if (!dmt) {
        throw config_error("missing 'target'");
    }
    if (!doc.contains("family")) throw config_error("missing 'family'");
    cfg.family = parse_family(doc.at("family"));
    if (doc.contains("distribution")) cfg.distribution = parse_dist(doc.at("distribution"), "distribution");
    if (dmt) {
        if (!doc.contains("sdist") || !doc.contains("vdist")) {
            throw config_error("dmt pipelines need 'sdist' and 'vdist'");
        }
        cfg.sdist = parse_dist(doc.at("sdist"), "sdist");
        cfg.vdist = parse_dist(doc.at("vdist"), "vdist");
    }

    cfg.epsilon = get_num(doc, "epsilon", 0.0, true);
    cfg.gamma = get_num(doc, "gamma", 0.0);
    cfg.delta = get_num(doc, "delta", 0.0);
    cfg.tau = get_num(doc, "tau", 0.0);
    cfg.labels = static_cast<int>(get_num(doc, "labels", 2));
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
            throw config_error("seed must be an integer");
        }
        cfg.seed = doc.at("seed").get<std::uint64_t>();
    }

    if (cfg.epsilon <= 0.0 || cfg.epsilon > 1.0) throw config_error("epsilon must lie in (0,1]");
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw config_error("gamma must lie in [0,1]");
    if (cfg.delta < 0.0 || cfg.delta > 1.0) throw config_error("delta must lie in [0,1]");
    if (cfg.tau < 0.0 || cfg.tau > 1.0) throw config_error("tau must lie in [0,1]");
    if (cfg.labels < 2 || cfg.labels > 16) throw config_error("labels must lie in [2,16]");

    if (doc.contains("sample_set")) {
        const Json& s = doc.at("sample_set");
        reject_unknown(s, "sample_set", {"requested", "raw_mass"});
        cfg.sample_set.requested = s.value("requested", true);
        cfg.sample_set.raw_mass = s.value("raw_mass", false);
    }
    if (doc.contains("rescale")) {
        const Json& r = doc.at("rescale");
        reject_unknown(r, "rescale", {"requested", "target"});
        cfg.rescale.requested = r.value("requested", true);
        cfg.rescale.target = get_num(r, "target", 0.0);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

Json config_to_json(const ExperimentConfig& cfg) {
    Json doc;
    doc["schema_version"] = cfg.schema_version;
    doc["pipeline"] = cfg.pipeline;
    Json dom;
    if (cfg.domain.bits >= 0) {
        dom["bits"] = cfg.domain.bits;
    } else {
        dom["size"] = cfg.domain.size;
    }
    doc["domain"] = dom;
    if (!cfg.target.kind.empty()) {
        Json t;
        t["kind"] = cfg.target.kind;
        if (cfg.target.kind == "random_boolean") t["bias"] = cfg.target.bias;
        if (cfg.target.kind == "explicit") t["table"] = cfg.target.table;
        if (cfg.target.kind == "first_bit_biased" || cfg.target.kind == "joint_bit_biased") {
            t["lo"] = cfg.target.lo;
            t["hi"] = cfg.target.hi;
        }
        if (!cfg.target.bits_used.empty()) t["bits_used"] = cfg.target.bits_used;
        if (cfg.target.kind == "joint_explicit") t["cond"] = cfg.target.cond;
        doc["target"] = t;
    }
    Json fam;
    fam["kind"] = cfg.family.kind;
    if (cfg.family.kind == "explicit_tables") {
        fam["tables"] = cfg.family.tables;
        if (!cfg.family.names.empty()) fam["names"] = cfg.family.names;
    } else {
        fam["arity"] = cfg.family.arity;
    }
    doc["family"] = fam;
    auto dist_json = [](const DistSpec& d) {
        Json out;
        out["kind"] = d.kind;
        if (d.kind == "explicit") out["mass"] = d.mass;
        if (d.kind == "product_biased") out["bias"] = d.bias;
        return out;
    };
    const bool dmt = cfg.pipeline == "dmt_pp" || cfg.pipeline == "dmt_recover";
    if (!dmt) doc["distribution"] = dist_json(cfg.distribution);
    if (dmt) {
        doc["sdist"] = dist_json(cfg.sdist);
        doc["vdist"] = dist_json(cfg.vdist);
    }
    doc["epsilon"] = cfg.epsilon;
    doc["gamma"] = cfg.gamma;
    doc["delta"] = cfg.delta;
    doc["tau"] = cfg.tau;
    doc["labels"] = cfg.labels;
    doc["seed"] = cfg.seed;
    if (cfg.sample_set.requested) {
        Json s;
        s["requested"] = true;
        s["raw_mass"] = cfg.sample_set.raw_mass;
        doc["sample_set"] = s;
    }
    if (cfg.rescale.requested) {
        Json r;
        r["requested"] = true;
        r["target"] = cfg.rescale.target;
        doc["rescale"] = r;
    }
    return doc;
}

}  // namespace regkit
