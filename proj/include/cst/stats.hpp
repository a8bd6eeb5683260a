#pragma once

#include <cstddef>
#include <vector>

namespace cst {

// Regularized lower incomplete gamma P(a,x); Q(a,x) = 1 - P(a,x).
// Series expansion for x < a+1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Chi-square distribution with df degrees of freedom.
double chi2_cdf(double x, double df);
// Upper tail Pr(X > x); df == 0 is the point mass at zero.
double chi2_sf(double x, double df);

// Standard normal quantile (Acklam's rational approximation, |err| < 1.2e-9).
double normal_quantile(double p);

// Two-sided KS distance between a sample and the chi-square(df) law.
// The sample is copied and sorted internally.
double ks_distance_chi2(const std::vector<double>& sample, double df);

// Sample mean and (n-1)-denominator standard deviation.
double mean_of(const std::vector<double>& v);
double sd_of(const std::vector<double>& v);

} // namespace cst
