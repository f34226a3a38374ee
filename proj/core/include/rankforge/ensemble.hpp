#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rankforge {

/// M member predictions for one subject. The members are fixed at
/// construction, so mean/min/max can never drift from them. Member order is
/// meaningful: index i of every ensemble produced by one model refers to the
/// same bootstrap member.
class EnsemblePrediction {
 public:
  EnsemblePrediction() = default;
  /// Throws Error(contract) on an empty or non-finite member list.
  EnsemblePrediction(std::string subject_id, std::vector<double> members);

  static EnsemblePrediction constant(std::string subject_id, double value, std::size_t count);

  const std::string& subject_id() const noexcept { return subject_id_; }
  std::span<const double> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  double operator[](std::size_t i) const noexcept { return members_[i]; }

  double mean() const noexcept { return mean_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  /// max - min
  double uncertainty() const noexcept { return max_ - min_; }

  friend bool operator==(const EnsemblePrediction& a, const EnsemblePrediction& b) {
    return a.subject_id_ == b.subject_id_ && a.members_ == b.members_;
  }

 private:
  std::string subject_id_;
  std::vector<double> members_;
  double mean_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Ensembles keyed by subject id (indicator id, or "final").
using EnsembleMap = std::map<std::string, EnsemblePrediction, std::less<>>;

}  // namespace rankforge
