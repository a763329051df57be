#pragma once

#include <cstddef>
#include <vector>

namespace srb::stats {

/// log N(x | mean, sd)
double normal_logpdf(double x, double mean, double sd);

/// log Student-t(x | df, location, scale)
double student_t_logpdf(double x, double df, double location, double scale);

/// log Beta(x | a, b) on (0,1)
double beta_logpdf(double x, double a, double b);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (Wichura's AS241 algorithm).
double normal_quantile(double p);

/// Empirical quantile with linear interpolation between order statistics
/// (R type 7). `sorted` must be ascending and nonempty.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Convenience: copies, sorts, and evaluates several quantiles at once.
std::vector<double> quantiles(std::vector<double> values,
                              const std::vector<double>& probs);

/// Lower median: element at index (n-1)/2 of the sorted sample.
double lower_median(std::vector<double> values);

/// Lag-k sample autocorrelation.
double autocorrelation(const std::vector<double>& x, std::size_t lag);

double mean(const std::vector<double>& x);
double sample_sd(const std::vector<double>& x);

}  // namespace srb::stats
