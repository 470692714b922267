#ifndef BRICKIR_EVAL_HPP
#define BRICKIR_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brickir/error.hpp"
#include "brickir/graph.hpp"
#include "brickir/program.hpp"

namespace brickir {

enum class StepMode { Connectivity, Collision };

inline std::size_t valid_steps(const ValidityReport& r, StepMode mode) {
  return mode == StepMode::Connectivity ? r.connectivity_steps : r.collision_steps;
}

inline std::string_view mode_name(StepMode m) { return m == StepMode::Connectivity ? "connectivity" : "collision"; }

namespace detail {

inline void require_nonempty(bool empty, const char* what) {
  if (empty) throw Error("empty-input", std::string(what) + " needs at least one input");
}

}  // namespace detail

inline double mean_valid_steps(const std::vector<ValidityReport>& reports, StepMode mode) {
  detail::require_nonempty(reports.empty(), "mean_valid_steps");
  std::size_t total = 0;
  for (const auto& r : reports) total += valid_steps(r, mode);
  return static_cast<double>(total) / static_cast<double>(reports.size());
}

/// Fraction of reports with at least k valid steps, for k = 0 .. max+1.
struct SurvivalCurve {
  std::size_t total = 0;
  std::vector<std::size_t> surviving;  ///< surviving[k] = #reports with steps >= k

  double proportion(std::size_t k) const {
    if (k >= surviving.size()) return 0.0;
    return static_cast<double>(surviving[k]) / static_cast<double>(total);
  }
  std::size_t size() const { return surviving.size(); }
};

inline SurvivalCurve survival_curve(const std::vector<ValidityReport>& reports, StepMode mode) {
  detail::require_nonempty(reports.empty(), "survival_curve");
  std::size_t max_steps = 0;
  for (const auto& r : reports) max_steps = std::max(max_steps, valid_steps(r, mode));
  std::vector<std::size_t> at(max_steps + 2, 0);
  for (const auto& r : reports) ++at[valid_steps(r, mode)];
  SurvivalCurve c;
  c.total = reports.size();
  c.surviving.assign(max_steps + 2, 0);
  std::size_t running = 0;
  for (std::size_t k = max_steps + 2; k-- > 0;) {
    running += at[k];
    c.surviving[k] = running;
  }
  return c;
}

/// Pooled fraction of invalid placements.
inline double p_invalid(const std::vector<bool>& outcomes) {
  detail::require_nonempty(outcomes.empty(), "p_invalid");
  const auto bad = std::count(outcomes.begin(), outcomes.end(), false);
  return static_cast<double>(bad) / static_cast<double>(outcomes.size());
}

/// Per-placement outcomes implied by a report: the valid placements, then
/// one invalid placement if the sequence stopped on an invalidating step.
inline std::vector<bool> outcomes_from_report(const ValidityReport& r, StepMode mode) {
  std::vector<bool> out(valid_steps(r, mode), true);
  const bool failed = r.first_error.has_value() || (mode == StepMode::Collision && r.collision_steps < r.connectivity_steps);
  if (failed) out.push_back(false);
  return out;
}

inline double p_invalid(const std::vector<ValidityReport>& reports, StepMode mode) {
  std::vector<bool> pooled;
  for (const auto& r : reports) {
    const auto o = outcomes_from_report(r, mode);
    pooled.insert(pooled.end(), o.begin(), o.end());
  }
  return p_invalid(pooled);
}

/// Chance that `length` independent tokens all avoid an invalid mass of
/// `per_token_invalid_mass`.
inline double sequence_validity_bound(double per_token_invalid_mass, long long length) {
  if (!(per_token_invalid_mass >= 0.0 && per_token_invalid_mass <= 1.0)) {
    throw Error("bad-mass", "invalid mass must lie in [0, 1]");
  }
  if (length < 0) throw Error("bad-length", "length must be nonnegative");
  return std::pow(1.0 - per_token_invalid_mass, static_cast<double>(length));
}

// ---------------------------------------------------------------------------
// Dataset statistics

struct PartFrequency {
  double relative_frequency = 0.0;  ///< share of all part instances
  double sample_proportion = 0.0;   ///< share of samples containing the part
};

struct DatasetStats {
  std::size_t samples = 0;
  std::map<std::size_t, std::size_t> parts_per_object;
  std::map<std::size_t, std::size_t> unique_parts_per_object;
  std::map<std::size_t, std::size_t> unique_colors_per_object;
  std::map<std::string, double> connection_type_sample_proportions;
  std::map<std::string, PartFrequency> part_frequency;
};

inline DatasetStats dataset_stats(const std::vector<ConnectivityGraph>& corpus) {
  detail::require_nonempty(corpus.empty(), "dataset_stats");
  DatasetStats s;
  s.samples = corpus.size();
  std::map<Family, std::size_t> family_samples;
  std::map<std::string, std::size_t> instance_count, sample_count;
  std::size_t instances = 0;
  for (const auto& g : corpus) {
    std::set<std::string> parts;
    std::set<int> colors;
    for (const auto& n : g.nodes) {
      parts.insert(n.part_id);
      colors.insert(n.color);
      ++instance_count[n.part_id];
    }
    instances += g.nodes.size();
    for (const auto& p : parts) ++sample_count[p];
    ++s.parts_per_object[g.nodes.size()];
    ++s.unique_parts_per_object[parts.size()];
    ++s.unique_colors_per_object[colors.size()];
    std::set<Family> present;
    for (const auto& e : g.edges) present.insert(e.family);
    for (auto f : present) ++family_samples[f];
  }
  const double n = static_cast<double>(corpus.size());
  for (auto f : kAllFamilies) {
    s.connection_type_sample_proportions[std::string(family_name(f))] = static_cast<double>(family_samples[f]) / n;
  }
  for (const auto& [part, count] : instance_count) {
    s.part_frequency[part] = {static_cast<double>(count) / static_cast<double>(instances),
                              static_cast<double>(sample_count[part]) / n};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const SurvivalCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t k = 0; k < c.size(); ++k) pts.push_back({{"k", k}, {"proportion", c.proportion(k)}});
  return pts;
}

inline std::string to_csv(const SurvivalCurve& c) {
  std::string out = "k,proportion\n";
  for (std::size_t k = 0; k < c.size(); ++k) out += std::to_string(k) + "," + ldraw::format_double(c.proportion(k)) + "\n";
  return out;
}

inline nlohmann::json to_json(const DatasetStats& s) {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : h) j[std::to_string(k)] = v;
    return j;
  };
  nlohmann::json parts = nlohmann::json::object();
  for (const auto& [id, f] : s.part_frequency) {
    parts[id] = {{"relative_frequency", f.relative_frequency}, {"sample_proportion", f.sample_proportion}};
  }
  return {{"samples", s.samples},
          {"parts_per_object", hist(s.parts_per_object)},
          {"unique_parts_per_object", hist(s.unique_parts_per_object)},
          {"unique_colors_per_object", hist(s.unique_colors_per_object)},
          {"connection_type_sample_proportions", s.connection_type_sample_proportions},
          {"part_frequency", parts}};
}

/// Long-form CSV: statistic,key,value.
inline std::string to_csv(const DatasetStats& s) {
  std::string out = "statistic,key,value\n";
  auto row = [&](const std::string& stat, const std::string& key, const std::string& value) {
    out += stat + "," + key + "," + value + "\n";
  };
  row("samples", "", std::to_string(s.samples));
  for (const auto& [k, v] : s.parts_per_object) row("parts_per_object", std::to_string(k), std::to_string(v));
  for (const auto& [k, v] : s.unique_parts_per_object) row("unique_parts_per_object", std::to_string(k), std::to_string(v));
  for (const auto& [k, v] : s.unique_colors_per_object) row("unique_colors_per_object", std::to_string(k), std::to_string(v));
  for (const auto& [k, v] : s.connection_type_sample_proportions) row("connection_type", k, ldraw::format_double(v));
  for (const auto& [k, f] : s.part_frequency) {
    row("part_relative_frequency", k, ldraw::format_double(f.relative_frequency));
    row("part_sample_proportion", k, ldraw::format_double(f.sample_proportion));
  }
  return out;
}

struct EvalSummary {
  std::size_t sequences = 0;
  double mean_connectivity_steps = 0.0;
  double mean_collision_steps = 0.0;
  double p_invalid_connectivity = 0.0;
  double p_invalid_collision = 0.0;
  SurvivalCurve survival_connectivity;
  SurvivalCurve survival_collision;
};

inline EvalSummary summarize(const std::vector<ValidityReport>& reports) {
  EvalSummary s;
  s.sequences = reports.size();
  s.mean_connectivity_steps = mean_valid_steps(reports, StepMode::Connectivity);
  s.mean_collision_steps = mean_valid_steps(reports, StepMode::Collision);
  s.survival_connectivity = survival_curve(reports, StepMode::Connectivity);
  s.survival_collision = survival_curve(reports, StepMode::Collision);
  // A batch of empty programs has no placements at all.
  auto pinv = [&](StepMode m) {
    std::vector<bool> pooled;
    for (const auto& r : reports) {
      const auto o = outcomes_from_report(r, m);
      pooled.insert(pooled.end(), o.begin(), o.end());
    }
    return pooled.empty() ? 0.0 : p_invalid(pooled);
  };
  s.p_invalid_connectivity = pinv(StepMode::Connectivity);
  s.p_invalid_collision = pinv(StepMode::Collision);
  return s;
}

inline nlohmann::json to_json(const EvalSummary& s) {
  return {{"sequences", s.sequences},
          {"mean_connectivity_steps", s.mean_connectivity_steps},
          {"mean_collision_steps", s.mean_collision_steps},
          {"p_invalid_connectivity", s.p_invalid_connectivity},
          {"p_invalid_collision", s.p_invalid_collision},
          {"survival_connectivity", to_json(s.survival_connectivity)},
          {"survival_collision", to_json(s.survival_collision)}};
}

}  // namespace brickir

#endif  // BRICKIR_EVAL_HPP
