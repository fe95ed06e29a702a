#include "bvarsv/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bvarsv/error.hpp"

namespace bvarsv {

namespace {

constexpr double kPi = std::numbers::pi;

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// All three samplers draw Y from the standardised density
// y^(lambda-1) exp(-omega/2 (y + 1/y)) with lambda >= 0.

double gig_rou_noshift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

double gig_rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Roots of the cubic bounding the shifted ratio-of-uniforms region.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * kPi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

double gig_concave_hat(double lambda, double omega, Rng& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double A[3];
  double k1, k2;
  A[0] = k0 * x0;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    A[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    A[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    A[1] = (lambda == 0.0) ? k1 * std::log(2.0 / (omega * omega))
                           : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    A[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = A[0] + A[1] + A[2];
  const double tail_start = std::max(x0, 2.0 / omega);

  for (;;) {
    double v = total * rng.uniform();
    double x, hx;
    if (v <= A[0]) {
      x = x0 * v / A[0];
      hx = k0;
    } else if ((v -= A[0]) <= A[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= A[1];
      const double arg = std::exp(-omega / 2.0 * tail_start) - omega / (2.0 * k2) * v;
      if (!(arg > 0.0)) continue;
      x = -2.0 / omega * std::log(arg);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    if (!(x > 0.0) || !std::isfinite(x)) continue;
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace

bool GigParams::valid() const {
  if (!std::isfinite(theta) || !std::isfinite(psi) || !std::isfinite(chi)) return false;
  if (psi < 0.0 || chi < 0.0) return false;
  return (psi > 0.0 && chi >= 0.0 && theta > 0.0) || (psi > 0.0 && chi > 0.0) ||
         (psi >= 0.0 && chi > 0.0 && theta < 0.0);
}

double sample_gig(const GigParams& params, Rng& rng) {
  if (!params.valid())
    throw DomainError("sample_gig: invalid parameters (theta=" + std::to_string(params.theta) +
                      ", psi=" + std::to_string(params.psi) + ", chi=" + std::to_string(params.chi) + ")");
  const double lambda_in = params.theta;
  const double psi = params.psi;
  const double chi = params.chi;
  const double omega = std::sqrt(psi * chi);

  // Gamma / inverse gamma limits, also used when psi*chi underflows.
  if (chi == 0.0 || (omega == 0.0 && lambda_in > 0.0 && psi > 0.0)) return rng.gamma(lambda_in, psi / 2.0);
  if (psi == 0.0 || (omega == 0.0 && lambda_in < 0.0)) return 1.0 / rng.gamma(-lambda_in, chi / 2.0);
  if (omega == 0.0) throw DomainError("sample_gig: psi*chi underflows with theta = 0");

  const double lambda = std::abs(lambda_in);
  const double alpha = std::sqrt(chi / psi);
  double y;
  if (lambda > 2.0 || omega > 3.0) {
    y = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = gig_rou_noshift(lambda, omega, rng);
  } else {
    y = gig_concave_hat(lambda, omega, rng);
  }
  return lambda_in < 0.0 ? alpha / y : alpha * y;
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw DomainError("sample_inverse_gaussian: mean and shape must be positive");
  return sample_gig({-0.5, shape / (mean * mean), shape}, rng);
}

namespace {

// Coefficients c_k of 1/Gamma(1+z) = sum_k c_k z^k.
constexpr double kRecipGamma[] = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
};

// Temme's gamma auxiliaries for |mu| <= 1/2.
void temme_gamma(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  // 1/Gamma(1+mu) and 1/Gamma(1-mu) from the power series.
  double plus = 0.0, minus = 0.0, odd = 0.0, even = 0.0;
  double pw = 1.0;
  for (int k = 0; k < static_cast<int>(std::size(kRecipGamma)); ++k) {
    const double term = kRecipGamma[k] * pw;
    if (k % 2 == 0) even += term; else odd += term;
    pw *= mu;
  }
  plus = even + odd;
  minus = even - odd;
  gampl = plus;
  gammi = minus;
  // gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) = -sum_{k odd} c_k mu^(k-1)
  double g1 = 0.0;
  pw = 1.0;
  for (int k = 1; k < static_cast<int>(std::size(kRecipGamma)); k += 2) {
    g1 -= kRecipGamma[k] * pw;
    pw *= mu * mu;
  }
  gam1 = g1;
  gam2 = 0.5 * (minus + plus);
}

}  // namespace

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k: x must be positive");
  if (!std::isfinite(nu) || !std::isfinite(x)) throw DomainError("bessel_k: non-finite argument");
  nu = std::abs(nu);
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  constexpr double eps = 1e-16;
  constexpr int maxit = 100000;

  // kmu, k1 hold K_mu and K_{mu+1} up to the common factor exp(log_scale).
  double kmu, k1, log_scale = 0.0;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = kPi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    temme_gamma(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= maxit; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - i * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    if (i > maxit) throw NumericalError("bessel_k: series did not converge");
    kmu = sum;
    k1 = sum1 * xi2;
  } else {
    // Steed's continued fraction; values carry the factor exp(-x) in log_scale.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i < maxit; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < eps) break;
    }
    if (i >= maxit) throw NumericalError("bessel_k: continued fraction did not converge");
    h = a1 * h;
    kmu = std::sqrt(kPi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
    log_scale = -x;
  }

  // Forward recurrence K_{v+1} = 2v/x K_v + K_{v-1}, rescaled to stay finite.
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = next;
    if (k1 > 1e250) {
      kmu *= 1e-250;
      k1 *= 1e-250;
      log_scale += 250.0 * std::log(10.0);
    }
  }
  return std::log(kmu) + log_scale;
}

double bessel_k(double nu, double x) { return std::exp(log_bessel_k(nu, x)); }

Eigen::VectorXd sample_dirichlet_symmetric(double a, int k, Rng& rng) {
  if (!(a > 0.0)) throw DomainError("sample_dirichlet_symmetric: a must be positive");
  if (k < 1) throw DomainError("sample_dirichlet_symmetric: k must be positive");
  Eigen::VectorXd lg(k);
  for (int j = 0; j < k; ++j) lg(j) = rng.log_gamma_unit(a);
  const double m = lg.maxCoeff();
  Eigen::VectorXd out = (lg.array() - m).exp();
  out /= out.sum();
  return out;
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

int sample_discrete(std::span<const double> log_weights, Rng& rng) {
  double m = -std::numeric_limits<double>::infinity();
  for (double w : log_weights)
    if (!std::isnan(w)) m = std::max(m, w);
  if (!std::isfinite(m)) throw DomainError("sample_discrete: no finite log-weight");
  double total = 0.0;
  for (double w : log_weights) total += std::isnan(w) ? 0.0 : std::exp(w - m);
  double u = rng.uniform() * total;
  int last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double w = std::isnan(log_weights[i]) ? 0.0 : std::exp(log_weights[i] - m);
    if (w > 0.0) last_positive = static_cast<int>(i);
    if (u < w) return static_cast<int>(i);
    u -= w;
  }
  return last_positive;
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_beta_pdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double log_normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * kPi * var) + z * z / var);
}

double log_dirichlet_symmetric_pdf(std::span<const double> log_theta, double a) {
  const double k = static_cast<double>(log_theta.size());
  double s = std::lgamma(k * a) - k * std::lgamma(a);
  for (double lt : log_theta) s += (a - 1.0) * lt;
  return s;
}

}  // namespace bvarsv
