#include "cst/errors.hpp"

namespace cst {

const char* errc_name(errc code) {
    switch (code) {
        case errc::misaligned_deltas: return "MISALIGNED_DELTAS";
        case errc::unknown_class: return "UNKNOWN_CLASS";
        case errc::nonmonotone_endpoints: return "NONMONOTONE_ENDPOINTS";
        case errc::empty_class: return "EMPTY_CLASS";
        case errc::invalid_covariate_path: return "INVALID_COVARIATE_PATH";
        case errc::dim_mismatch: return "DIM_MISMATCH";
        case errc::roster_flag_violation: return "ROSTER_FLAG_VIOLATION";
        case errc::parse_error: return "PARSE_ERROR";
        case errc::schema_mismatch: return "SCHEMA_MISMATCH";
        case errc::duplicate_cell: return "DUPLICATE_CELL";
        case errc::no_transition_labels: return "NO_TRANSITION_LABELS";
        case errc::requires_roster: return "REQUIRES_ROSTER";
        case errc::multiple_detections: return "MULTIPLE_DETECTIONS";
        case errc::prob_mass_exceeds_one: return "PROB_MASS_EXCEEDS_ONE";
        case errc::no_covariates: return "NO_COVARIATES";
        case errc::zero_denominator: return "ZERO_DENOMINATOR";
        case errc::weight_mismatch: return "WEIGHT_MISMATCH";
        case errc::empty_neighborhood: return "EMPTY_NEIGHBORHOOD";
        case errc::empty_level: return "EMPTY_LEVEL";
        case errc::nonconstant_covariate: return "NONCONSTANT_COVARIATE";
        case errc::nonpositive_delta: return "NONPOSITIVE_DELTA";
        case errc::zero_detection_prob: return "ZERO_DETECTION_PROB";
        case errc::window_too_wide: return "WINDOW_TOO_WIDE";
        case errc::zero_window_mass: return "ZERO_WINDOW_MASS";
        case errc::k_too_small: return "K_TOO_SMALL";
        case errc::no_nondegenerate_cells: return "NO_NONDEGENERATE_CELLS";
        case errc::infeasible_params: return "INFEASIBLE_PARAMS";
        case errc::usage_error: return "USAGE_ERROR";
    }
    return "UNKNOWN_ERROR";
}

int errc_exit_code(errc code) {
    switch (code) {
        case errc::usage_error:
            return 2;
        case errc::misaligned_deltas:
        case errc::unknown_class:
        case errc::nonmonotone_endpoints:
        case errc::empty_class:
        case errc::invalid_covariate_path:
        case errc::dim_mismatch:
        case errc::roster_flag_violation:
        case errc::parse_error:
        case errc::schema_mismatch:
        case errc::duplicate_cell:
        case errc::no_transition_labels:
            return 3;
        default:
            return 4;
    }
}

} // namespace cst
