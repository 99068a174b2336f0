#ifndef BBR_DISTS_HPP
#define BBR_DISTS_HPP

namespace bbr {

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Logistic function 1/(1 + exp(-x)); saturates cleanly at the ends.
double logistic(double x);

/// Standard normal log density.
double std_normal_logpdf(double z);

double normal_logpdf(double x, double mean, double sd);

/// log Phi(z), accurate into the deep lower tail (asymptotic series below
/// z = -20 where erfc would lose precision long before it underflows).
double log_norm_cdf(double z);

/// Inverse Mills ratio phi(z)/Phi(z).
double inv_mills(double z);

/// Student's t with 3 degrees of freedom and the given scale, log density.
double student_t3_logpdf(double x, double scale);

/// Zero-truncated t3: support x > 0, includes the log 2 normalizer.
double half_t3_logpdf(double x, double scale);

/// Skew-normal with location 0: log of (2/omega) phi(x/omega) Phi(alpha x/omega).
double skew_normal_logpdf(double x, double omega, double alpha);

struct SkewNormalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean omega*sqrt(2/pi)*alpha/sqrt(1+alpha^2) and variance
/// omega^2*(1 - 2 alpha^2 / (pi (1+alpha^2))).
SkewNormalMoments skew_normal_moments(double omega, double alpha);

}  // namespace bbr

#endif  // BBR_DISTS_HPP
