#pragma once

#include "regkit/config.hpp"
#include "regkit/dense_model.hpp"
#include "regkit/entropy.hpp"
#include "regkit/generators.hpp"
#include "regkit/hardcore.hpp"
#include "regkit/report.hpp"

namespace regkit {

// Materialized inputs of one experiment, all deterministic given the
// config (including its seed).
struct Instance {
    Domain dom;
    Dist d;
    Family F;  // closed base family
    BoundedFn g;
    bool has_joint = false;
    JointDist joint;
    LabeledFamily Fprod;
    Dist sdist, vdist;  // dmt pipelines
};

Instance gen_instance(const ExperimentConfig& cfg);

struct RunOutcome {
    Json report;
    bool pass = false;
};

// Runs the configured pipeline, serializes its artifacts, then scores
// every check from the serialized artifacts alone (the same code path
// verify_report uses on stored files).
RunOutcome run_experiment(const ExperimentConfig& cfg);

// Re-checks a stored report: re-parses the embedded config, regenerates
// the instance from its seed, and re-evaluates every inequality against
// the stored artifacts. Never consults builder state.
RunOutcome verify_report(const Json& report);

}  // namespace regkit
