#include "dists.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace bbr {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
constexpr double kLog2 = 0.6931471805599453;
constexpr double kSqrt1_2 = 0.7071067811865476;  // 1/sqrt(2)
}  // namespace

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double std_normal_logpdf(double z) { return -kLogSqrt2Pi - 0.5 * z * z; }

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

double log_norm_cdf(double z) {
  if (z > -20.0) return std::log(0.5 * std::erfc(-z * kSqrt1_2));
  // Phi(z) = phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 + ...)
  const double zi = 1.0 / (z * z);
  const double series = 1.0 - zi * (1.0 - 3.0 * zi * (1.0 - 5.0 * zi * (1.0 - 7.0 * zi)));
  return std_normal_logpdf(z) - std::log(-z) + std::log(series);
}

double inv_mills(double z) { return std::exp(std_normal_logpdf(z) - log_norm_cdf(z)); }

double student_t3_logpdf(double x, double scale) {
  // density 2/(pi sqrt(3) s) * (1 + x^2/(3 s^2))^-2
  const double t = x / scale;
  return kLog2 - std::log(M_PI) - 0.5 * std::log(3.0) - std::log(scale) -
         2.0 * std::log1p(t * t / 3.0);
}

double half_t3_logpdf(double x, double scale) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return kLog2 + student_t3_logpdf(x, scale);
}

double skew_normal_logpdf(double x, double omega, double alpha) {
  if (!(omega > 0.0)) throw Error(ErrorCode::Domain, "skew normal requires omega > 0");
  const double z = x / omega;
  return kLog2 - std::log(omega) + std_normal_logpdf(z) + log_norm_cdf(alpha * z);
}

SkewNormalMoments skew_normal_moments(double omega, double alpha) {
  if (!(omega > 0.0)) throw Error(ErrorCode::Domain, "skew normal requires omega > 0");
  const double delta_sq = alpha * alpha / (1.0 + alpha * alpha);
  const double delta = (alpha >= 0.0 ? 1.0 : -1.0) * std::sqrt(delta_sq);
  SkewNormalMoments m;
  m.mean = omega * delta * std::sqrt(2.0 / M_PI);
  m.variance = omega * omega * (1.0 - 2.0 * delta_sq / M_PI);
  return m;
}

}  // namespace bbr
