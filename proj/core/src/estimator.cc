#include "orchestra/estimator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "orchestra/error.h"

namespace orchestra {
namespace {

void CheckPseudoCount(double alpha, const char* what) {
  if (!std::isfinite(alpha) || alpha < 1.0) {
    throw InvalidPrior(std::string(what) + " pseudo-count must be >= 1, got " +
                       std::to_string(alpha));
  }
}

}  // namespace

std::string_view ToString(PointEstimator est) {
  return est == PointEstimator::kMap ? "map" : "posterior_mean";
}

PointEstimator ParsePointEstimator(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "map") return PointEstimator::kMap;
  if (lower == "posterior_mean" || lower == "mean") {
    return PointEstimator::kPosteriorMean;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

RegionPosterior::RegionPosterior(std::vector<double> alphas)
    : alphas_(std::move(alphas)), counts_(alphas_.size(), 0) {
  if (alphas_.empty()) throw InvalidPrior("region posterior needs M >= 1");
  for (double a : alphas_) CheckPseudoCount(a, "region");
}

RegionPosterior RegionPosterior::Uniform(std::size_t regions, double alpha) {
  return RegionPosterior(std::vector<double>(regions, alpha));
}

RegionPosterior RegionPosterior::Observe(std::size_t region) const {
  RegionPosterior next = *this;
  next.ObserveInPlace(region);
  return next;
}

void RegionPosterior::ObserveInPlace(std::size_t region) {
  if (region >= counts_.size()) {
    throw IndexError("region " + std::to_string(region) +
                     " out of range for M=" + std::to_string(counts_.size()));
  }
  ++counts_[region];
}

std::vector<double> RegionPosterior::Weights(PointEstimator est) const {
  const double shift = est == PointEstimator::kMap ? 1.0 : 0.0;
  std::vector<double> w(alphas_.size());
  for (std::size_t m = 0; m < w.size(); ++m) {
    w[m] = static_cast<double>(counts_[m]) + alphas_[m] - shift;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0) {
    throw DegeneratePosterior(
        "MAP region weights undefined: all pseudo-counts are 1 and no data");
  }
  for (double& x : w) x /= total;
  return w;
}

CorrectnessPosterior::CorrectnessPosterior(double alpha_incorrect,
                                           double alpha_correct)
    : alpha_incorrect_(alpha_incorrect), alpha_correct_(alpha_correct) {
  CheckPseudoCount(alpha_incorrect_, "incorrect");
  CheckPseudoCount(alpha_correct_, "correct");
}

CorrectnessPosterior CorrectnessPosterior::FromRate(double rate,
                                                    double strength) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InvalidPrior("prior rate must lie in [0, 1]");
  }
  // Snap to integers so that e.g. rate 0.8, strength 5 gives exactly (1, 4).
  auto snap = [](double x) {
    const double r = std::round(x);
    return std::abs(x - r) < 1e-9 ? r : x;
  };
  const double correct = snap(rate * strength);
  return CorrectnessPosterior(snap(strength - correct), correct);
}

CorrectnessPosterior CorrectnessPosterior::Observe(bool correct) const {
  CorrectnessPosterior next = *this;
  next.ObserveInPlace(correct);
  return next;
}

void CorrectnessPosterior::ObserveInPlace(bool correct) noexcept {
  if (correct) {
    ++n_correct_;
  } else {
    ++n_incorrect_;
  }
}

double CorrectnessPosterior::Estimate(PointEstimator est) const {
  const double shift = est == PointEstimator::kMap ? 1.0 : 0.0;
  const double num = static_cast<double>(n_correct_) + alpha_correct_ - shift;
  const double den = static_cast<double>(n_correct_ + n_incorrect_) +
                     alpha_correct_ + alpha_incorrect_ - 2.0 * shift;
  if (den <= 0.0) {
    throw DegeneratePosterior(
        "MAP correctness undefined: both pseudo-counts are 1 and no data");
  }
  return num / den;
}

}  // namespace orchestra
