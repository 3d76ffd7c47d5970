#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "itmlab/error.hpp"
#include "itmlab/parallel.hpp"
#include "itmlab/random.hpp"
#include "itmlab/trader.hpp"

namespace itmlab::sweep {

/// How the figure's alpha axis maps onto the model's lambda at fixed beta.
enum class LambdaRule {
  OneMinusAlpha,   // lambda = 1 - alpha; reproduces alpha* = (beta+2)/(beta+1)
  BetaMinusAlpha,  // lambda = beta - alpha (model alpha equals the axis alpha)
};

inline std::string_view to_string(LambdaRule rule) {
  return rule == LambdaRule::OneMinusAlpha ? "one_minus_alpha" : "beta_minus_alpha";
}

inline LambdaRule lambda_rule_from_string(std::string_view s) {
  if (s == "one_minus_alpha") return LambdaRule::OneMinusAlpha;
  if (s == "beta_minus_alpha") return LambdaRule::BetaMinusAlpha;
  throw Error(ErrorCode::InvalidArgument, "unknown lambda rule '" + std::string(s) + "'");
}

inline double lambda_for(LambdaRule rule, double alpha, double beta) {
  return rule == LambdaRule::OneMinusAlpha ? 1.0 - alpha : beta - alpha;
}

/// A connected piece of the attractor on the section. On the glued circle a
/// band may wrap through the identified endpoints; then lo > hi.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool wraps() const { return lo > hi; }
  friend bool operator==(const Band&, const Band&) = default;
};

struct BandCount {
  std::size_t count = 0;
  std::vector<Band> bands;
};

/// Maximal runs of sorted points whose consecutive gaps stay below gap_tol.
inline BandCount band_count(const std::vector<double>& sorted_points, double gap_tol) {
  if (sorted_points.empty()) throw Error(ErrorCode::EmptyInput, "no points to count");
  BandCount out;
  Band current{sorted_points.front(), sorted_points.front()};
  for (std::size_t i = 1; i < sorted_points.size(); ++i) {
    const double x = sorted_points[i];
    if (x - current.hi < gap_tol) {
      current.hi = x;
    } else {
      out.bands.push_back(current);
      current = {x, x};
    }
  }
  out.bands.push_back(current);
  out.count = out.bands.size();
  return out;
}

/// Joins the first and last band when both touch the glued endpoints.
inline BandCount glue_circle(BandCount counted, double lo, double hi, double gap_tol) {
  auto& b = counted.bands;
  if (b.size() >= 2 && (b.front().lo - lo) + (hi - b.back().hi) < gap_tol) {
    b.back().hi = b.front().hi;
    b.erase(b.begin());
    counted.count = b.size();
  }
  return counted;
}

struct SweepConfig {
  double beta = 1.5;
  double alpha_lo = 1.0;
  double alpha_hi = 1.42;
  std::size_t grid = 421;
  std::size_t orbit_len = 20'000;
  std::size_t burn_in = 5'000;
  double gap_tol = 1e-3;
  std::uint64_t seed = 1;
  std::size_t starts = 8;
  unsigned threads = 0;
  LambdaRule rule = LambdaRule::OneMinusAlpha;
  std::size_t max_return_steps = 1'000'000;
};

struct SweepRecord {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  std::vector<Band> bands;
  std::size_t band_count = 0;
  bool degenerate = false;  // some start never returned to the section
};

inline std::vector<double> alpha_grid(const SweepConfig& cfg) {
  if (cfg.grid < 1) throw Error(ErrorCode::InvalidArgument, "grid must be >= 1");
  if (cfg.grid == 1 ? cfg.alpha_lo > cfg.alpha_hi : !(cfg.alpha_lo < cfg.alpha_hi)) {
    throw Error(ErrorCode::InvalidArgument, "alpha range must satisfy alphaLo < alphaHi");
  }
  std::vector<double> out(cfg.grid);
  for (std::size_t i = 0; i < cfg.grid; ++i) {
    out[i] = cfg.grid == 1 ? cfg.alpha_lo
                           : cfg.alpha_lo + (cfg.alpha_hi - cfg.alpha_lo) * static_cast<double>(i) /
                                                static_cast<double>(cfg.grid - 1);
  }
  return out;
}

/// Attractor of the simulated Poincare map at one parameter pair.
inline SweepRecord sweep_point(double alpha, const SweepConfig& cfg, std::uint64_t stream) {
  SweepRecord rec;
  rec.alpha = alpha;
  rec.beta = cfg.beta;
  rec.lambda = lambda_for(cfg.rule, alpha, cfg.beta);
  const auto params = trader::TraderParams::from_beta(rec.lambda, cfg.beta);
  const double l = rec.lambda;
  const double m_lo = std::fabs(l) / (1.0 - l);
  const double nu_hi = cfg.beta - l / (1.0 - l);
  const double start_lo = std::max(m_lo, 1e-6);

  SeededUniform rng(cfg.seed, stream);
  std::vector<double> cloud;
  cloud.reserve(cfg.starts * cfg.orbit_len);
  try {
    for (std::size_t s = 0; s < cfg.starts; ++s) {
      double x = rng.uniform(start_lo, nu_hi);
      for (std::size_t j = 0; j < cfg.burn_in + cfg.orbit_len; ++j) {
        x = std::fabs(trader::first_return(params, x, cfg.max_return_steps).x);
        if (j >= cfg.burn_in) cloud.push_back(x);
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonEscaping) throw;
    rec.degenerate = true;
    return rec;
  }
  std::sort(cloud.begin(), cloud.end());
  auto counted = band_count(cloud, cfg.gap_tol);
  // the section segment closes into a circle when q_1 splits it (lambda < 0)
  if (l < 0.0 && cfg.beta > 1.0) counted = glue_circle(std::move(counted), m_lo, nu_hi, cfg.gap_tol);
  rec.bands = std::move(counted.bands);
  rec.band_count = counted.count;
  return rec;
}

/// One record per grid alpha, in grid order. Grid point i always draws from
/// RNG stream i, so results do not depend on the thread count.
inline std::vector<SweepRecord> sweep_alpha(const SweepConfig& cfg) {
  if (cfg.starts < 1 || cfg.orbit_len < 1) {
    throw Error(ErrorCode::InvalidArgument, "starts and orbitLen must be >= 1");
  }
  if (!(cfg.gap_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "gapTol must be positive");
  const auto alphas = alpha_grid(cfg);
  std::vector<SweepRecord> out(alphas.size());
  parallel_for(alphas.size(), cfg.threads, [&](std::size_t i) { out[i] = sweep_point(alphas[i], cfg, i); });
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = "alpha,beta,band_index,band_lo,band_hi,band_count,degenerate\n";
  for (const auto& r : records) {
    const std::string head = format_double(r.alpha) + "," + format_double(r.beta) + ",";
    const std::string tail = "," + std::to_string(r.band_count) + "," + (r.degenerate ? "1" : "0") + "\n";
    if (r.bands.empty()) {
      out += head + ",," + tail;
      continue;
    }
    for (std::size_t b = 0; b < r.bands.size(); ++b) {
      out += head + std::to_string(b) + "," + format_double(r.bands[b].lo) + "," +
             format_double(r.bands[b].hi) + tail;
    }
  }
  return out;
}

inline std::string summary_csv(const std::vector<SweepRecord>& records) {
  std::string out = "alpha,band_count\n";
  for (const auto& r : records) out += format_double(r.alpha) + "," + std::to_string(r.band_count) + "\n";
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

/// Writes the band CSV; returns the number of data rows.
inline std::size_t export_sweep(const std::vector<SweepRecord>& records, const std::string& path) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to export");
  const std::string text = sweep_csv(records);
  write_text(path, text);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

inline void export_summary(const std::vector<SweepRecord>& records, const std::string& path) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to export");
  write_text(path, summary_csv(records));
}

/// A maximal run of consecutive grid points with the same band count.
struct Region {
  std::size_t count = 0;
  std::size_t first = 0;  // grid indices, inclusive
  std::size_t last = 0;
  std::size_t size() const { return last - first + 1; }
};

/// Runs of equal band count; degenerate records break runs.
inline std::vector<Region> band_regions(const std::vector<SweepRecord>& records) {
  std::vector<Region> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.degenerate) continue;
    if (!out.empty() && out.back().count == r.band_count && out.back().last + 1 == i) {
      out.back().last = i;
    } else {
      out.push_back({r.band_count, i, i});
    }
  }
  return out;
}

struct AddingPattern {
  Region left, middle, right;
};

/// Neighbouring regions with counts (K1, K1+K2-1, K2), K1, K2 >= 2. Regions
/// shorter than min_run grid points are treated as noise and skipped.
inline std::vector<AddingPattern> band_adding_patterns(const std::vector<SweepRecord>& records,
                                                       std::size_t min_run = 5) {
  std::vector<Region> kept;
  for (const auto& r : band_regions(records)) {
    if (r.size() >= min_run) kept.push_back(r);
  }
  std::vector<AddingPattern> out;
  for (std::size_t i = 0; i + 2 < kept.size(); ++i) {
    const std::size_t k1 = kept[i].count, mid = kept[i + 1].count, k2 = kept[i + 2].count;
    if (k1 >= 2 && k2 >= 2 && mid == k1 + k2 - 1) out.push_back({kept[i], kept[i + 1], kept[i + 2]});
  }
  return out;
}

}  // namespace itmlab::sweep
