#include "kspattern/phases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kspattern/errors.hpp"

namespace kspattern {

std::string_view to_string(phase_label label) noexcept {
  switch (label) {
    case phase_label::very_fast: return "very-fast";
    case phase_label::fast: return "fast";
    case phase_label::slow: return "slow";
  }
  return "slow";
}

namespace {

// Weighted squared-error cost of fitting y[a, b) by its weighted mean, from
// prefix sums.
struct segment_cost {
  std::vector<double> s0, s1, s2;

  segment_cost(std::span<const double> y, std::span<const double> w)
      : s0(y.size() + 1, 0.0), s1(y.size() + 1, 0.0), s2(y.size() + 1, 0.0) {
    for (std::size_t k = 0; k < y.size(); ++k) {
      s0[k + 1] = s0[k] + w[k];
      s1[k + 1] = s1[k] + w[k] * y[k];
      s2[k + 1] = s2[k] + w[k] * y[k] * y[k];
    }
  }
  double mean(std::size_t a, std::size_t b) const {
    return (s1[b] - s1[a]) / (s0[b] - s0[a]);
  }
  double operator()(std::size_t a, std::size_t b) const {
    if (b <= a) return 0.0;
    const double n = s0[b] - s0[a];
    const double m = (s1[b] - s1[a]) / n;
    return std::max(0.0, (s2[b] - s2[a]) - n * m * m);
  }
};

// Optimal split of y into `k` segments (k = 1, 2, 3); returns interior
// breakpoints and fills `cost`.
std::vector<std::size_t> best_split(const segment_cost& c, std::size_t n,
                                    std::size_t k, double& cost) {
  if (k == 1 || n < k) {
    cost = c(0, n);
    return {};
  }
  if (k == 2) {
    cost = std::numeric_limits<double>::infinity();
    std::size_t best = 1;
    for (std::size_t b = 1; b < n; ++b) {
      const double v = c(0, b) + c(b, n);
      if (v < cost) {
        cost = v;
        best = b;
      }
    }
    return {best};
  }
  // k == 3: best two-segment suffix for every start, then scan prefixes.
  std::vector<double> tail(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> tail_at(n + 1, 0);
  for (std::size_t a = 1; a + 1 < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = c(a, b) + c(b, n);
      if (v < tail[a]) {
        tail[a] = v;
        tail_at[a] = b;
      }
    }
  }
  cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> out{1, 2};
  for (std::size_t a = 1; a + 1 < n; ++a) {
    const double v = c(0, a) + tail[a];
    if (v < cost) {
      cost = v;
      out = {a, tail_at[a]};
    }
  }
  return out;
}

}  // namespace

std::vector<phase> detect_phases(std::span<const double> t,
                                 std::span<const double> x,
                                 const phase_options& opts) {
  if (t.size() != x.size()) {
    throw invalid_argument("time and value series differ in length");
  }
  const std::size_t n = t.size();
  if (n < 10) throw invalid_argument("phase detection needs at least 10 samples");

  // |dx/dt| on the n - 1 sample intervals.
  const std::size_t m = n - 1;
  std::vector<double> rate(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double dt = t[k + 1] - t[k];
    if (!(dt > 0.0)) throw invalid_argument("times must increase strictly");
    rate[k] = std::abs(x[k + 1] - x[k]) / dt;
  }
  std::vector<double> smooth(m);
  {
    const std::size_t w = std::max<std::size_t>(1, opts.smoothing_window);
    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t k = 0; k < m; ++k) prefix[k + 1] = prefix[k] + rate[k];
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t a = k >= w / 2 ? k - w / 2 : 0;
      const std::size_t b = std::min(m, k + w / 2 + 1);
      smooth[k] = (prefix[b] - prefix[a]) / static_cast<double>(b - a);
    }
  }

  auto make_phase = [&](std::size_t a, std::size_t b) {  // intervals [a, b)
    phase ph;
    ph.first = a;
    ph.last = b;
    ph.t_start = t[a];
    ph.t_end = t[b];
    ph.change = x[b] - x[a];
    ph.mean_rate = std::accumulate(rate.begin() + static_cast<long>(a),
                                   rate.begin() + static_cast<long>(b), 0.0) /
                   static_cast<double>(b - a);
    return ph;
  };

  const double peak = *std::max_element(smooth.begin(), smooth.end());
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double span = t[n - 1] - t[0];
  if (!(peak * span > 1e-12 * (1.0 + scale))) {
    auto ph = make_phase(0, m);
    ph.label = phase_label::slow;
    return {ph};
  }

  const double floor = 1e-9 * peak;
  std::vector<double> y(m), y_raw(m);
  for (std::size_t k = 0; k < m; ++k) {
    y[k] = std::log(smooth[k] + floor);
    y_raw[k] = std::log(rate[k] + floor);
  }
  // Each interval weighs its length in log time, so a short early transient
  // and a long late relaxation count alike.
  const double tau = std::max(opts.log_time_offset, 1e-12) * span;
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = std::log((t[k + 1] - t[0] + tau) / (t[k] - t[0] + tau));
  }

  // Bin-average long series for the global search.
  const std::size_t bins = std::min(m, std::max<std::size_t>(opts.max_points, 16));
  std::vector<std::size_t> bin_start(bins + 1);
  for (std::size_t q = 0; q <= bins; ++q) bin_start[q] = q * m / bins;
  std::vector<double> yb(bins), wb(bins);
  for (std::size_t q = 0; q < bins; ++q) {
    double acc = 0.0, wsum = 0.0;
    for (std::size_t k = bin_start[q]; k < bin_start[q + 1]; ++k) {
      acc += w[k] * y[k];
      wsum += w[k];
    }
    wb[q] = wsum;
    yb[q] = acc / wsum;
  }
  const segment_cost coarse(yb, wb);
  // Breakpoints are polished on the unsmoothed rate, which keeps sharp
  // transitions where they are.
  const segment_cost fine(y_raw, w);

  double cost1 = 0.0, cost2 = 0.0, cost3 = 0.0;
  best_split(coarse, bins, 1, cost1);
  auto split2 = best_split(coarse, bins, 2, cost2);
  auto split3 = best_split(coarse, bins, 3, cost3);

  // Map coarse breakpoints to intervals and polish each one locally.
  auto refine = [&](std::vector<std::size_t> coarse_breaks) {
    std::vector<std::size_t> br;
    for (auto q : coarse_breaks) br.push_back(bin_start[q]);
    const std::size_t radius =
        2 * (m / bins + 1) + opts.smoothing_window;
    for (std::size_t pass = 0; pass < 2; ++pass) {
      for (std::size_t s = 0; s < br.size(); ++s) {
        const std::size_t lo_seg = s == 0 ? 0 : br[s - 1];
        const std::size_t hi_seg = s + 1 == br.size() ? m : br[s + 1];
        const std::size_t lo = std::max(lo_seg + 1, br[s] > radius ? br[s] - radius : 0);
        const std::size_t hi = std::min(hi_seg - 1, br[s] + radius);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t b = lo; b <= hi; ++b) {
          const double v = fine(lo_seg, b) + fine(b, hi_seg);
          if (v < best) {
            best = v;
            br[s] = b;
          }
        }
      }
    }
    return br;
  };

  auto ratio_ok = [&](const std::vector<std::size_t>& br) {
    std::size_t prev = 0;
    std::vector<double> means;
    for (std::size_t s = 0; s <= br.size(); ++s) {
      const std::size_t end = s == br.size() ? m : br[s];
      means.push_back(fine.mean(prev, end));
      prev = end;
    }
    for (std::size_t s = 0; s + 1 < means.size(); ++s) {
      if (std::abs(means[s] - means[s + 1]) < std::log(opts.min_rate_ratio)) {
        return false;
      }
    }
    return true;
  };

  std::vector<std::size_t> chosen;
  if (cost2 <= (1.0 - opts.min_gain) * cost1) {
    auto br2 = refine(split2);
    if (ratio_ok(br2)) {
      chosen = br2;
      if (cost3 <= (1.0 - opts.min_gain) * cost2) {
        auto br3 = refine(split3);
        if (ratio_ok(br3)) chosen = br3;
      }
    }
  }

  std::vector<phase> phases;
  std::size_t prev = 0;
  for (std::size_t s = 0; s <= chosen.size(); ++s) {
    const std::size_t end = s == chosen.size() ? m : chosen[s];
    phases.push_back(make_phase(prev, end));
    prev = end;
  }
  std::vector<std::size_t> order(phases.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return phases[l].mean_rate > phases[r].mean_rate;
  });
  static constexpr phase_label ranked[] = {
      phase_label::very_fast, phase_label::fast, phase_label::slow};
  const std::size_t offset = 3 - phases.size();  // fewest phases are slowest
  for (std::size_t r = 0; r < order.size(); ++r) {
    phases[order[r]].label = ranked[r + offset];
  }
  return phases;
}

std::vector<phase> detect_phases(const probe_series& series,
                                 const phase_options& opts) {
  return detect_phases(series.t, series.v, opts);
}

}  // namespace kspattern
