#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace orchestra {

enum class PointEstimator { kMap, kPosteriorMean };

std::string_view ToString(PointEstimator est);
// Accepts "map" and "posterior_mean" (case-insensitive). Throws ConfigError.
PointEstimator ParsePointEstimator(std::string_view name);

inline constexpr double kDefaultPseudoCount = 2.0;

/// Dirichlet-Multinomial posterior over the region distribution.
///
/// Holds the prior pseudo-counts and the number of observations per region.
/// Pseudo-counts below 1 are rejected: the MAP numerator would go negative.
class RegionPosterior {
 public:
  explicit RegionPosterior(std::vector<double> alphas);

  static RegionPosterior Uniform(std::size_t regions,
                                 double alpha = kDefaultPseudoCount);

  std::size_t size() const noexcept { return alphas_.size(); }
  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  // Returns a copy with counts[region] incremented. Throws IndexError.
  [[nodiscard]] RegionPosterior Observe(std::size_t region) const;
  // Same update in place; the caller owns the value exclusively.
  void ObserveInPlace(std::size_t region);

  // Point estimate of the region probabilities; sums to 1.
  // MAP: (n_m + a_m - 1) / sum_j (n_j + a_j - 1). Throws DegeneratePosterior
  // when that denominator is zero (all a_m == 1 and no data).
  std::vector<double> Weights(PointEstimator est) const;

  friend bool operator==(const RegionPosterior&,
                         const RegionPosterior&) = default;

 private:
  std::vector<double> alphas_;
  std::vector<std::uint64_t> counts_;
};

/// Beta-Binomial posterior over one agent's correctness in one region.
class CorrectnessPosterior {
 public:
  CorrectnessPosterior() : CorrectnessPosterior(kDefaultPseudoCount, kDefaultPseudoCount) {}
  CorrectnessPosterior(double alpha_incorrect, double alpha_correct);

  // Informative prior from a target rate: alpha_correct = rate * strength,
  // alpha_incorrect = (1 - rate) * strength, so the posterior mean with no
  // data equals rate. Throws InvalidPrior if either pseudo-count is < 1.
  static CorrectnessPosterior FromRate(double rate, double strength);

  double alpha_incorrect() const noexcept { return alpha_incorrect_; }
  double alpha_correct() const noexcept { return alpha_correct_; }
  std::uint64_t n_incorrect() const noexcept { return n_incorrect_; }
  std::uint64_t n_correct() const noexcept { return n_correct_; }

  [[nodiscard]] CorrectnessPosterior Observe(bool correct) const;
  void ObserveInPlace(bool correct) noexcept;

  // MAP: (n1 + a1 - 1) / (n0 + n1 + a0 + a1 - 2); posterior mean:
  // (n1 + a1) / (n0 + n1 + a0 + a1). Throws DegeneratePosterior on 0/0.
  double Estimate(PointEstimator est) const;

  friend bool operator==(const CorrectnessPosterior&,
                         const CorrectnessPosterior&) = default;

 private:
  double alpha_incorrect_;
  double alpha_correct_;
  std::uint64_t n_incorrect_ = 0;
  std::uint64_t n_correct_ = 0;
};

}  // namespace orchestra
