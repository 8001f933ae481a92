#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kspattern/simulator.hpp"

namespace kspattern {

enum class phase_label { very_fast, fast, slow };

std::string_view to_string(phase_label label) noexcept;

struct phase {
  double t_start = 0.0;
  double t_end = 0.0;
  /// Sample range [first, last] of the series covered by the phase.
  std::size_t first = 0;
  std::size_t last = 0;
  phase_label label = phase_label::slow;
  /// Mean |dx/dt| over the phase.
  double mean_rate = 0.0;
  /// Net change x(last) - x(first).
  double change = 0.0;
};

struct phase_options {
  /// Centered moving-average width applied to |dx/dt|.
  std::size_t smoothing_window = 5;
  /// Longer series are bin-averaged to this many points before the
  /// segmentation search, then the breakpoints are refined at full
  /// resolution.
  std::size_t max_points = 2000;
  /// An extra phase is kept only if it cuts the squared error of the
  /// log-rate fit by at least this fraction...
  double min_gain = 0.5;
  /// ...and the neighboring phases differ by at least this factor in rate.
  double min_rate_ratio = 3.0;
  /// Fit errors are weighted by d log(t - t0 + tau), tau being this
  /// fraction of the time span.
  double log_time_offset = 1e-3;
};

/// Splits a trace into one to three contiguous phases by change points of
/// log |dx/dt| measured on a logarithmic time axis. Phases come back in time order; labels rank them by
/// descending mean rate. A constant trace yields a single slow phase.
/// Throws invalid_argument for fewer than 10 samples or mismatched spans.
std::vector<phase> detect_phases(std::span<const double> t,
                                 std::span<const double> x,
                                 const phase_options& opts = {});

/// Phase structure of the v trace of a probe.
std::vector<phase> detect_phases(const probe_series& series,
                                 const phase_options& opts = {});

}  // namespace kspattern
