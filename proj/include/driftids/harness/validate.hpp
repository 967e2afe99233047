#pragma once

#include <cstdint>

#include "json.hpp"

namespace driftids::harness {

// Gradient and metric self-checks behind the `validate` subcommand.
struct ValidationReport {
    double model_gradient_error = 0.0;  // full classifier loss
    std::size_t model_coordinates = 0;
    double ewc_gradient_error = 0.0;
    double si_gradient_error = 0.0;
    double lwf_gradient_error = 0.0;
    double metric_oracle_error = 0.0;  // max |fast - brute force| over A, P, S and TE
    bool auc_matches_pairwise = false;
    double seconds = 0.0;

    double model_tolerance = 1e-4;
    double penalty_tolerance = 1e-8;
    double metric_tolerance = 1e-12;

    bool gradients_pass() const;
    bool metrics_pass() const;
    bool passed() const { return gradients_pass() && metrics_pass(); }
    nlohmann::json to_json() const;
};

ValidationReport run_validation(std::uint64_t seed = 0);

}  // namespace driftids::harness
