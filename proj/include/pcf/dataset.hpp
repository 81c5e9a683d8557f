#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pcf/error.hpp"
#include "pcf/matrix.hpp"
#include "pcf/random.hpp"

namespace pcf {

// ---------------------------------------------------------------------------
// Text helpers shared by the ratings, features and config readers.
// ---------------------------------------------------------------------------
namespace text {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Parses the whole of `s` as a finite decimal number.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Calls `fn(line_number, fields)` for each data line of a comma-separated
/// stream, skipping blank lines and lines starting with '#'. The first data
/// line is passed with `first = true` so the caller can detect a header.
template <class Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    fn(number, split(t, ','), first);
    first = false;
  }
}

}  // namespace text

/// One observed rating y(i,j) of item i by user j.
struct Rating {
  std::size_t item = 0;
  std::size_t user = 0;
  double value = 0.0;
};

/// Sparse ratings over n_m items and n_u users with external-id tables.
/// Indices are assigned densely in first-appearance order.
class RatingsDataset {
 public:
  std::size_t n_users() const noexcept { return user_ids_.size(); }
  std::size_t n_items() const noexcept { return item_ids_.size(); }
  std::size_t size() const noexcept { return entries_.size(); }

  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }

  /// Ratings in insertion order.
  const std::vector<Rating>& entries() const noexcept { return entries_; }

  std::optional<std::size_t> user_index(const std::string& id) const {
    auto it = user_index_.find(id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> item_index(const std::string& id) const {
    auto it = item_index_.find(id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
  }

  /// r(i, j)
  bool rated(std::size_t item, std::size_t user) const { return lookup_.contains({item, user}); }

  std::optional<double> rating(std::size_t item, std::size_t user) const {
    auto it = lookup_.find({item, user});
    if (it == lookup_.end()) return std::nullopt;
    return entries_[it->second].value;
  }

  /// Ratings given by `user`, ordered by item index.
  std::vector<Rating> ratings_of_user(std::size_t user) const {
    std::vector<Rating> out;
    for (const auto& r : entries_)
      if (r.user == user) out.push_back(r);
    std::sort(out.begin(), out.end(), [](const Rating& a, const Rating& b) { return a.item < b.item; });
    return out;
  }

  /// Adds a rating, registering unseen ids. Throws on a duplicate pair.
  void add(const std::string& user_id, const std::string& item_id, double value) {
    const auto u = intern(user_ids_, user_index_, user_id);
    const auto i = intern(item_ids_, item_index_, item_id);
    if (!lookup_.emplace(std::pair{i, u}, entries_.size()).second) {
      throw Error("duplicate rating for user '" + user_id + "' on item '" + item_id + "'");
    }
    entries_.push_back({i, u, value});
  }

 private:
  static std::size_t intern(std::vector<std::string>& ids, std::unordered_map<std::string, std::size_t>& index,
                            const std::string& id) {
    auto [it, inserted] = index.emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    return it->second;
  }

  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
  std::vector<Rating> entries_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup_;
};

/// Reads `user_id,item_id,rating` records.
inline RatingsDataset load_ratings(std::istream& in) {
  RatingsDataset d;
  text::for_each_record(in, [&](std::size_t line, const std::vector<std::string_view>& f, bool first) {
    if (f.size() != 3) {
      throw ParseError("expected 3 fields (user_id,item_id,rating), found " + std::to_string(f.size()), line);
    }
    const auto value = text::parse_double(f[2]);
    if (!value) {
      if (first) return;  // header
      throw ParseError("rating '" + std::string(f[2]) + "' is not a number", line);
    }
    if (f[0].empty() || f[1].empty()) throw ParseError("empty user or item id", line);
    try {
      d.add(std::string(f[0]), std::string(f[1]), *value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
  });
  if (d.size() == 0) throw ParseError("ratings input contains no records", 0);
  return d;
}

enum class Preprocessing { none, feature_scale, mean_normalize, mean_standardize };

inline const char* to_string(Preprocessing p) {
  switch (p) {
    case Preprocessing::none: return "none";
    case Preprocessing::feature_scale: return "feature_scale";
    case Preprocessing::mean_normalize: return "mean_normalize";
    case Preprocessing::mean_standardize: return "mean_standardize";
  }
  return "none";
}

inline Preprocessing parse_preprocessing(std::string_view s) {
  if (s == "none") return Preprocessing::none;
  if (s == "feature_scale" || s == "scale") return Preprocessing::feature_scale;
  if (s == "mean_normalize" || s == "normalize") return Preprocessing::mean_normalize;
  if (s == "mean_standardize" || s == "standardize") return Preprocessing::mean_standardize;
  throw ConfigError("unknown preprocessing '" + std::string(s) + "'");
}

/// Per-column statistics recorded by a preprocessing pass.
struct ColumnStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;   // population
  double max_abs = 0.0;

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

struct ScalingStats {
  Preprocessing method = Preprocessing::none;
  std::vector<ColumnStats> columns;

  friend bool operator==(const ScalingStats&, const ScalingStats&) = default;
};

/// Item features: row i is the feature vector of item_ids[i].
struct FeatureMatrix {
  std::vector<std::string> item_ids;
  Matrix values;
  std::optional<ScalingStats> stats;

  std::size_t n_items() const noexcept { return values.rows(); }
  std::size_t n_features() const noexcept { return values.cols(); }
};

/// Reads `item_id,f1,...,fn` records.
inline FeatureMatrix load_features(std::istream& in) {
  std::vector<std::string> ids;
  std::vector<double> entries;
  std::size_t width = 0;
  std::unordered_map<std::string, std::size_t> seen;
  text::for_each_record(in, [&](std::size_t line, const std::vector<std::string_view>& f, bool first) {
    if (f.size() < 2) throw ParseError("expected item_id followed by at least one feature", line);
    if (first && !text::parse_double(f[1])) return;  // header
    if (width == 0) width = f.size() - 1;
    if (f.size() - 1 != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " features, found " +
                           std::to_string(f.size() - 1),
                       line);
    }
    std::string id(f[0]);
    if (id.empty()) throw ParseError("empty item id", line);
    if (!seen.emplace(id, ids.size()).second) throw ParseError("duplicate item '" + id + "'", line);
    for (std::size_t k = 1; k < f.size(); ++k) {
      const auto v = text::parse_double(f[k]);
      if (!v) throw ParseError("feature '" + std::string(f[k]) + "' is not a number", line);
      entries.push_back(*v);
    }
    ids.push_back(std::move(id));
  });
  if (ids.empty()) throw ParseError("features input contains no records", 0);
  return FeatureMatrix{ids, Matrix(ids.size(), width, std::move(entries)), std::nullopt};
}

/// Reorders the rows of `f` so that row i belongs to item i of `d`.
/// Items absent from `d` are dropped; an item of `d` missing from `f` is an error.
inline FeatureMatrix align_features(const FeatureMatrix& f, const RatingsDataset& d) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < f.item_ids.size(); ++r) row_of.emplace(f.item_ids[r], r);
  Matrix out(d.n_items(), f.n_features());
  for (std::size_t i = 0; i < d.n_items(); ++i) {
    auto it = row_of.find(d.item_ids()[i]);
    if (it == row_of.end()) throw Error("item '" + d.item_ids()[i] + "' has ratings but no feature row");
    std::ranges::copy(f.values.row(it->second), out.row(i).begin());
  }
  return FeatureMatrix{d.item_ids(), std::move(out), f.stats};
}

inline FeatureMatrix load_features(std::istream& in, const RatingsDataset& companion) {
  return align_features(load_features(in), companion);
}

/// Binarized labels over the key set of a ratings dataset.
struct BinaryLabels {
  std::map<std::pair<std::size_t, std::size_t>, int> labels;  // (item, user) -> {0,1}
  double threshold_used = 0.0;

  std::optional<int> label(std::size_t item, std::size_t user) const {
    auto it = labels.find({item, user});
    if (it == labels.end()) return std::nullopt;
    return it->second;
  }
};

/// label = 1 iff rating >= threshold.
inline int binarize_rating(double rating, double threshold) { return rating >= threshold ? 1 : 0; }

inline BinaryLabels binarize(const RatingsDataset& d, double threshold) {
  BinaryLabels out;
  out.threshold_used = threshold;
  for (const auto& r : d.entries()) out.labels.emplace(std::pair{r.item, r.user}, binarize_rating(r.value, threshold));
  return out;
}

// ---------------------------------------------------------------------------
// Preprocessing. Every transform first records column statistics, then
// replays them through apply_stats, so replay is bit-identical by construction.
// ---------------------------------------------------------------------------

inline ScalingStats compute_stats(const Matrix& x, Preprocessing method) {
  ScalingStats stats{method, std::vector<ColumnStats>(x.cols())};
  const auto n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    ColumnStats& s = stats.columns[c];
    s.min = s.max = x(0, c);
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double v = x(r, c);
      sum += v;
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      s.max_abs = std::max(s.max_abs, std::abs(v));
    }
    if (s.min == s.max) {
      // Constant column: pin the statistics so the transform yields exact zeros.
      s.mean = s.min;
      s.stddev = 0.0;
      continue;
    }
    s.mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double d = x(r, c) - s.mean;
      ss += d * d;
    }
    s.stddev = std::sqrt(ss / n);
  }
  return stats;
}

/// Transforms a single value of column `c` with recorded statistics.
inline double transform_value(const ScalingStats& stats, std::size_t c, double v) {
  const ColumnStats& s = stats.columns[c];
  switch (stats.method) {
    case Preprocessing::none:
      return v;
    case Preprocessing::feature_scale:
      return s.max_abs > 0.0 ? v / s.max_abs : v;
    case Preprocessing::mean_normalize: {
      const double range = s.max - s.min;
      return range > 0.0 ? (v - s.mean) / range : v - s.mean;
    }
    case Preprocessing::mean_standardize:
      return s.stddev > 0.0 ? (v - s.mean) / s.stddev : v - s.mean;
  }
  return v;
}

/// Divisor used by feature scaling for column `c` (1 for an all-zero column).
inline double scale_divisor(const ColumnStats& s) { return s.max_abs > 0.0 ? s.max_abs : 1.0; }

inline Vector apply_stats(const ScalingStats& stats, std::span<const double> raw) {
  if (raw.size() != stats.columns.size()) {
    throw DimensionError("apply_stats: statistics for " + std::to_string(stats.columns.size()) +
                         " columns applied to vector of length " + std::to_string(raw.size()));
  }
  Vector out(raw.size());
  for (std::size_t c = 0; c < raw.size(); ++c) out[c] = transform_value(stats, c, raw[c]);
  return out;
}

inline FeatureMatrix apply_stats(const FeatureMatrix& x, const ScalingStats& stats) {
  if (x.n_features() != stats.columns.size()) {
    throw DimensionError("apply_stats: statistics for " + std::to_string(stats.columns.size()) +
                         " columns applied to matrix " + x.values.shape());
  }
  FeatureMatrix out{x.item_ids, x.values, stats};
  for (std::size_t r = 0; r < out.values.rows(); ++r)
    for (std::size_t c = 0; c < out.values.cols(); ++c) out.values(r, c) = transform_value(stats, c, x.values(r, c));
  return out;
}

inline FeatureMatrix preprocess(const FeatureMatrix& x, Preprocessing method) {
  return apply_stats(x, compute_stats(x.values, method));
}

/// Divides each column by its largest absolute value.
inline FeatureMatrix feature_scale(const FeatureMatrix& x) { return preprocess(x, Preprocessing::feature_scale); }

/// (x - mean) / (max - min) per column.
inline FeatureMatrix mean_normalize(const FeatureMatrix& x) { return preprocess(x, Preprocessing::mean_normalize); }

/// (x - mean) / population stddev per column.
inline FeatureMatrix mean_standardize(const FeatureMatrix& x) {
  return preprocess(x, Preprocessing::mean_standardize);
}

}  // namespace pcf
