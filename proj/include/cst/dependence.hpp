#pragma once

#include <map>
#include <string>
#include <vector>

#include "cst/types.hpp"

namespace cst {

// The displayed statistics lack the sample-size factor needed for a
// nondegenerate chi-square limit; sample_scaled multiplies by n_l.
enum class TestScaling { sample_scaled, paper_literal };

struct TestResult {
    double statistic = 0.0;
    TestScaling scaling = TestScaling::sample_scaled;
    std::size_t df = 0;
    double p_value = 1.0;
    std::size_t cells_used = 0;
    std::size_t cells_excluded = 0;
    bool df_anomaly = false; // stated df is 0 (e.g. K=2 for the consecutive test)
};

// Consecutive-interval joint estimates: pi_hat[k] = Pr(detected in k+1 |
// detected in k), p_joint[k] = joint detection probability for (k, k+1).
// pi entries with an empty conditioning set are NaN with pi_defined false.
struct JointEstimates {
    std::vector<double> pi_hat;
    std::vector<bool> pi_defined;
    std::vector<double> p_joint;
    std::size_t n_class = 0;
};

// Class-transition estimates keyed by origin class. q_hat is the share of
// records arriving from each origin; p_cond and the step functions condition
// on the origin; p_joint_class multiplies p_cond by q_hat.
struct MarkovEstimates {
    std::string class_id;
    std::vector<std::string> origins;
    std::map<std::string, std::vector<double>> p_cond;     // [origin][k]
    std::map<std::string, double> q_hat;
    std::map<std::string, std::vector<double>> p_joint_class;
    std::map<std::string, std::vector<double>> S_cond;     // [origin][0..K]
    std::map<std::string, std::vector<double>> Lambda_cond;
    std::map<std::string, std::size_t> origin_counts;
    // origins present elsewhere in the dataset but feeding no record of this
    // class: the (class, origin) cell is empty and carries no estimates
    std::vector<std::string> empty_origins;
    std::size_t n_class = 0;
};

JointEstimates joint_estimates(const Dataset& data, const std::string& class_id);

// Both displayed forms of the consecutive-independence statistic (they are
// algebraically identical); exposed for the dual-route check.
std::pair<double, double> consecutive_statistic_forms(const Dataset& data,
                                                      const std::string& class_id);

// Z statistic over consecutive interval pairs, df = (K-2)^2 as stated.
TestResult independence_test_consecutive(const Dataset& data, const std::string& class_id,
                                         TestScaling scaling = TestScaling::sample_scaled);

MarkovEstimates markov_estimates(const Dataset& data, const std::string& class_id);

// Single-class convenience; errors when the dataset holds several classes.
MarkovEstimates markov_estimates(const Dataset& data);

// X statistic of detection-vs-origin independence, df = (K-1)(L-1) with L
// the number of distinct origin labels in the class.
TestResult markov_independence_test(const Dataset& data, const std::string& class_id,
                                    TestScaling scaling = TestScaling::sample_scaled);

} // namespace cst
