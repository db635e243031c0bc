#pragma once

#include <cmath>
#include <span>

namespace binreg {

inline constexpr double kLogTwoPi = 1.8378770664093454836;
inline constexpr double kSqrtTwoPi = 2.5066282746310005024;

/// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
double erfcx_pos(double x);

/// log Phi(x), stable down to x ~ -40 and beyond (tail via erfcx).
double log_norm_cdf(double x);

/// First derivative of log Phi, i.e. the inverse Mills ratio phi(x)/Phi(x).
double log_norm_cdf_d1(double x);

/// Second derivative of log Phi; always <= 0.
double log_norm_cdf_d2(double x);

/// log density of N(0,1) at x.
inline double log_norm_pdf(double x) { return -0.5 * x * x - 0.5 * kLogTwoPi; }

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal quantile; accurate to machine precision over (0,1),
/// including extreme tails (Newton refinement on the log-CDF).
double norm_quantile(double u);

/// log(1 + exp(x)) without intermediate overflow.
double log1pexp(double x);

/// log of the logistic CDF L(x) = 1/(1+exp(-x)).
inline double log_logistic_cdf(double x) { return -log1pexp(-x); }

/// (log L)'(x) = L(-x), in (0,1).
double log_logistic_cdf_d1(double x);

/// (log L)''(x) = -L(x) L(-x), in [-1/4, 0).
double log_logistic_cdf_d2(double x);

/// log(sum exp(v)) with max-subtraction.
double logsumexp(std::span<const double> v);

}  // namespace binreg
