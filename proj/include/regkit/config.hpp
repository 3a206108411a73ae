#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace regkit {

using Json = nlohmann::ordered_json;

// One experiment = one config document. Every field mirrors the JSON
// schema one-for-one; parse_config rejects unknown keys so that typos
// fail loudly instead of silently running defaults.

struct DomainSpec {
    std::size_t size = 0;  // used when bits < 0
    int bits = -1;
};

struct TargetSpec {
    // parity | majority | address | random_boolean | explicit |
    // first_bit_biased | joint_explicit | joint_random | joint_bit_biased
    std::string kind;
    double bias = 0.5;                 // random_boolean
    std::vector<double> table;         // explicit
    double lo = 0.0, hi = 1.0;         // first_bit_biased, joint_bit_biased
    std::vector<int> bits_used;        // parity
    std::vector<double> cond;          // joint_explicit, row-major n x L
};

struct FamilySpec {
    // juntas | conjunctions | parity_family | explicit_tables
    std::string kind;
    int arity = 1;  // juntas arity / conjunction width / parity width
    std::vector<std::vector<double>> tables;
    std::vector<std::string> names;
};

struct DistSpec {
    // uniform | explicit | product_biased
    std::string kind = "uniform";
    std::vector<double> mass;
    std::vector<double> bias;  // one entry broadcast, or one per bit
};

struct SampleSetSpec {
    bool requested = false;
    bool raw_mass = false;  // include with probability min(1, H) instead of H/max H
};

struct RescaleSpec {
    bool requested = false;
    double target = 0.0;  // density target for glued-hardcore rescaling
};

struct ExperimentConfig {
    int schema_version = 1;
    // ma | mc | ihcl_pp | ihcl_recover | pame_pp | pame_recover |
    // dmt_pp | dmt_recover   ("verify" is a CLI mode, not a config)
    std::string pipeline;
    DomainSpec domain;
    TargetSpec target;
    FamilySpec family;
    DistSpec distribution;
    DistSpec sdist;  // dmt pipelines: sample distribution
    DistSpec vdist;  // dmt pipelines: reference distribution
    double epsilon = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    double tau = 0.0;
    int labels = 2;
    std::uint64_t seed = 0;
    SampleSetSpec sample_set;
    RescaleSpec rescale;
};

// Parses and validates; throws config_error on unknown keys, missing
// required fields, or out-of-range values.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);

// Exact echo of the parsed config (defaults made explicit), suitable for
// embedding in reports and re-parsing.
Json config_to_json(const ExperimentConfig& cfg);

}  // namespace regkit
