#include "rankforge/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "rankforge/error.hpp"

namespace rankforge {

EnsemblePrediction::EnsemblePrediction(std::string subject_id, std::vector<double> members)
    : subject_id_(std::move(subject_id)), members_(std::move(members)) {
  if (members_.empty()) {
    throw Error(ErrorCode::contract, "ensemble for '" + subject_id_ + "' has no members");
  }
  double sum = 0.0;
  min_ = members_.front();
  max_ = members_.front();
  for (double v : members_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::contract, "ensemble for '" + subject_id_ + "' has a non-finite member");
    }
    sum += v;
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
  }
  // Summation rounding can push the mean one ulp past an extreme.
  mean_ = std::clamp(sum / static_cast<double>(members_.size()), min_, max_);
}

EnsemblePrediction EnsemblePrediction::constant(std::string subject_id, double value,
                                                std::size_t count) {
  return EnsemblePrediction(std::move(subject_id), std::vector<double>(count, value));
}

}  // namespace rankforge
