#pragma once

#include <vector>

#include "cst/errors.hpp"

namespace cst {

// Piece-wise linear cumulative hazard given by knots (times, values).
// Flat before the first knot and after the last.
struct PiecewiseLinearHazard {
    std::vector<double> times;
    std::vector<double> values;

    void validate() const {
        if (times.size() != values.size() || times.size() < 2)
            fail(errc::infeasible_params, "cumulative hazard needs matching times/values, >= 2 knots");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (!(times[i] > times[i - 1]))
                fail(errc::infeasible_params, "hazard knot times must increase");
            if (values[i] < values[i - 1])
                fail(errc::infeasible_params, "cumulative hazard must be non-decreasing");
        }
        if (values.front() < 0.0) fail(errc::infeasible_params, "cumulative hazard must be >= 0");
    }

    double at(double t) const {
        if (t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        std::size_t i = 1;
        while (times[i] < t) ++i;
        double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
        return values[i - 1] + w * (values[i] - values[i - 1]);
    }

    double increment(double a, double b) const { return at(b) - at(a); }
};

} // namespace cst
