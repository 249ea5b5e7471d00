#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "etpa/rng.hpp"
#include "etpa/simkit.hpp"

// Monte Carlo propagation of counting uncertainty: each record's counts are
// resampled as Poisson with mean equal to the observed counts (parametric
// resampling; single accumulated counts leave nothing to bootstrap), the
// statistic is recomputed per resample, and the spread across resamples is
// the reported standard deviation.

namespace etpa::mc {

struct ResampleSpec {
  int n_resamples = 1000;
  std::uint64_t seed = 0;
  std::string statistic_id = "statistic";
  int n_threads = 1;

  void validate() const {
    if (n_resamples < 100)
      throw std::invalid_argument("ResampleSpec: n_resamples must be >= 100");
    if (n_threads < 1)
      throw std::invalid_argument("ResampleSpec: n_threads must be >= 1");
  }
};

struct PropagateResult {
  std::vector<double> value;    // statistic on the original data
  std::vector<double> std_dev;  // sample std across resamples, per component
  int n_dropped = 0;
};

/// `statistic` maps a corrected series to a scalar-or-vector statistic.
/// Per-resample substreams come from (seed, resample index), so the result
/// is identical for any thread count. Resamples where the statistic throws
/// are dropped and counted; more than 10% drops is an error.
template <class Statistic>
PropagateResult propagate(const simkit::CountSeries& series,
                          const simkit::NoiseModel& noise,
                          Statistic&& statistic, const ResampleSpec& spec) {
  spec.validate();
  if (series.records.empty())
    throw std::invalid_argument("propagate: series is empty");

  const auto original = statistic(simkit::correct_counts(series, noise));
  const std::size_t dim = original.size();
  if (dim == 0)
    throw std::invalid_argument("propagate: statistic returned no components");

  const int n = spec.n_resamples;
  std::vector<std::optional<std::vector<double>>> draws(n);

  auto run_range = [&](int begin, int end) {
    simkit::CountSeries resampled = series;
    for (int k = begin; k < end; ++k) {
      auto gen = rng::substream(spec.seed, static_cast<std::uint64_t>(k));
      for (std::size_t i = 0; i < series.records.size(); ++i) {
        resampled.records[i].counts = rng::poisson(
            gen, static_cast<double>(series.records[i].counts));
      }
      try {
        auto v = statistic(simkit::correct_counts(resampled, noise));
        if (v.size() == dim) draws[k] = std::move(v);
      } catch (const std::exception&) {
        // dropped; counted below
      }
    }
  };

  if (spec.n_threads == 1) {
    run_range(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + spec.n_threads - 1) / spec.n_threads;
    for (int t = 0; t < spec.n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  PropagateResult result;
  result.value = original;
  result.std_dev.assign(dim, 0.0);
  std::vector<double> mean(dim, 0.0);
  int kept = 0;
  for (const auto& d : draws)
    if (d) {
      ++kept;
      for (std::size_t c = 0; c < dim; ++c) mean[c] += (*d)[c];
    }
  result.n_dropped = n - kept;
  if (result.n_dropped * 10 > n)
    throw std::runtime_error("propagate: more than 10% of resamples failed");
  for (std::size_t c = 0; c < dim; ++c) mean[c] /= kept;
  if (kept > 1) {
    for (const auto& d : draws)
      if (d)
        for (std::size_t c = 0; c < dim; ++c) {
          const double dev = (*d)[c] - mean[c];
          result.std_dev[c] += dev * dev;
        }
    for (std::size_t c = 0; c < dim; ++c)
      result.std_dev[c] = std::sqrt(result.std_dev[c] / (kept - 1));
  }
  return result;
}

}  // namespace etpa::mc
