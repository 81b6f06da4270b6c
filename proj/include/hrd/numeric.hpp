#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace hrd {

double normal_cdf(double x);                     // standard normal
double normal_cdf(double x, double mu, double sigma);
double normal_quantile(double p);                // Acklam/Wichura style inverse

// Adaptive Simpson quadrature with absolute tolerance. Throws
// hrd::NumericError (see below) if the recursion fails to converge.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 48);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Half-width of the normal-approximation binomial CI for p_hat successes/n.
double binomial_ci_half_width(double p_hat, std::size_t n, double z = 1.96);
double binomial_se(double p_hat, std::size_t n);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);  // linear interpolation

class NumericError : public std::exception {
public:
  explicit NumericError(std::string message) : message_(std::move(message)) {}
  const char* what() const noexcept override { return message_.c_str(); }

private:
  std::string message_;
};

}  // namespace hrd
