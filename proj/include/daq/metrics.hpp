#pragma once

#include <cmath>
#include <span>

#include "daq/error.hpp"

namespace daq {

/// Percentage reduction of `candidate` relative to `baseline`.
inline double improvement(double baseline, double candidate) {
  if (!(baseline > 0.0))
    fail(Errc::ZeroBaseline, "improvement needs a positive baseline");
  return (baseline - candidate) / baseline * 100.0;
}

/// exp of the mean negative log-likelihood. Inputs are natural-log
/// probabilities.
inline double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty())
    fail(Errc::EmptyInput, "perplexity of an empty token list");
  double sum = 0.0;
  for (double lp : logprobs) {
    if (!(lp <= 0.0))
      fail(Errc::InvalidArgument, "log-probabilities must be <= 0");
    sum += lp;
  }
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

} // namespace daq
