#pragma once

#include <stdexcept>
#include <string>

namespace cst {

// Error taxonomy shared by the whole library. Codes group into usage,
// data and numeric classes; the CLI maps those classes to exit codes.
enum class errc {
    // data / structural
    misaligned_deltas,
    unknown_class,
    nonmonotone_endpoints,
    empty_class,
    invalid_covariate_path,
    dim_mismatch,
    roster_flag_violation,
    parse_error,
    schema_mismatch,
    duplicate_cell,
    no_transition_labels,
    // numeric / model
    requires_roster,
    multiple_detections,
    prob_mass_exceeds_one,
    no_covariates,
    zero_denominator,
    weight_mismatch,
    empty_neighborhood,
    empty_level,
    nonconstant_covariate,
    nonpositive_delta,
    zero_detection_prob,
    window_too_wide,
    zero_window_mass,
    k_too_small,
    no_nondegenerate_cells,
    infeasible_params,
    // cli
    usage_error,
};

const char* errc_name(errc code);

// Exit-code class of an error: 2 usage, 3 data, 4 numeric infeasibility.
int errc_exit_code(errc code);

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace cst
