#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "briee/briee/driver.hpp"
#include "briee/io/json_util.hpp"

namespace briee::harness {

// One metrics line per policy update. Everything here is a deterministic
// function of (config, seed); wall-clock goes to a separate timing sidecar so
// identical runs produce byte-identical streams.
inline io::json metrics_record(std::uint64_t seed, const algo::IterationRecord& rec) {
  io::json diagnostics;
  diagnostics["mean_bonus"] = rec.mean_bonus;
  if (!rec.replearn.empty()) {
    io::json stages = io::json::array();
    for (const auto& s : rec.replearn)
      stages.push_back(io::json{{"iterations", s.iterations},
                                {"objective", s.objective},
                                {"early_terminated", s.early_terminated},
                                {"feature_loss", s.feature_loss}});
    diagnostics["replearn"] = std::move(stages);
  }
  return io::json{{"seed", seed},
                  {"iteration", rec.iteration},
                  {"episodes", rec.episodes_total},
                  {"episodes_train", rec.episodes_train},
                  {"v0", rec.v0},
                  {"eval_return", rec.evaluated ? io::json(rec.eval_return) : io::json(nullptr)},
                  {"streak", rec.streak},
                  {"diagnostics", std::move(diagnostics)}};
}

struct SeedSummary {
  std::string algorithm;
  std::uint64_t seed = 0;
  bool solved = false;
  std::int64_t episodes_to_solve = -1;
  std::int64_t episodes_total = 0;
  int iterations = 0;
  std::optional<double> final_eval_return;
  std::optional<int> selected_iteration;     // reward-free exploration choice
  std::optional<double> planned_eval_return; // reward-free planned policy
  std::optional<double> rff_bandwidth;
};

inline void to_json(io::json& j, const SeedSummary& s) {
  j = io::json{{"algorithm", s.algorithm},
               {"seed", s.seed},
               {"solved", s.solved},
               {"episodes_to_solve", s.episodes_to_solve},
               {"episodes_total", s.episodes_total},
               {"iterations", s.iterations}};
  j["final_eval_return"] = s.final_eval_return ? io::json(*s.final_eval_return) : io::json(nullptr);
  if (s.selected_iteration) j["selected_iteration"] = *s.selected_iteration;
  if (s.planned_eval_return) j["planned_eval_return"] = *s.planned_eval_return;
  if (s.rff_bandwidth) j["rff_bandwidth"] = *s.rff_bandwidth;
}

inline void from_json(const io::json& j, SeedSummary& s) {
  s.algorithm = j.at("algorithm").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.solved = j.at("solved").get<bool>();
  s.episodes_to_solve = j.at("episodes_to_solve").get<std::int64_t>();
  s.episodes_total = j.at("episodes_total").get<std::int64_t>();
  s.iterations = j.at("iterations").get<int>();
  if (auto it = j.find("final_eval_return"); it != j.end() && !it->is_null())
    s.final_eval_return = it->get<double>();
  if (auto it = j.find("selected_iteration"); it != j.end()) s.selected_iteration = it->get<int>();
  if (auto it = j.find("planned_eval_return"); it != j.end())
    s.planned_eval_return = it->get<double>();
  if (auto it = j.find("rff_bandwidth"); it != j.end()) s.rff_bandwidth = it->get<double>();
}

// Mean and population spread of episodes-to-solve across the solved seeds.
// Unsolved seeds only lower the solved fraction; with none solved the
// statistics are absent rather than zero.
struct SweepAggregate {
  int num_seeds = 0;
  int num_solved = 0;
  double solved_fraction = 0.0;
  std::optional<double> mean_episodes_to_solve;
  std::optional<double> std_episodes_to_solve;
};

inline SweepAggregate aggregate_summaries(const std::vector<SeedSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("aggregate: no seed summaries");
  SweepAggregate agg;
  agg.num_seeds = static_cast<int>(summaries.size());
  double sum = 0.0;
  for (const auto& s : summaries)
    if (s.solved) {
      ++agg.num_solved;
      sum += static_cast<double>(s.episodes_to_solve);
    }
  agg.solved_fraction = static_cast<double>(agg.num_solved) / agg.num_seeds;
  if (agg.num_solved == 0) return agg;
  const double mean = sum / agg.num_solved;
  double var = 0.0;
  for (const auto& s : summaries)
    if (s.solved) {
      const double d = static_cast<double>(s.episodes_to_solve) - mean;
      var += d * d / agg.num_solved;
    }
  agg.mean_episodes_to_solve = mean;
  agg.std_episodes_to_solve = std::sqrt(var);
  return agg;
}

inline void to_json(io::json& j, const SweepAggregate& a) {
  j = io::json{{"num_seeds", a.num_seeds},
               {"num_solved", a.num_solved},
               {"solved_fraction", a.solved_fraction}};
  j["mean_episodes_to_solve"] =
      a.mean_episodes_to_solve ? io::json(*a.mean_episodes_to_solve) : io::json(nullptr);
  j["std_episodes_to_solve"] =
      a.std_episodes_to_solve ? io::json(*a.std_episodes_to_solve) : io::json(nullptr);
}

// One aggregate row per sweep directory found under the scanned root.
struct SweepRow {
  std::string name;
  std::string algorithm;
  std::string variant;
  int horizon = 0;
  SweepAggregate aggregate;
};

inline std::vector<SeedSummary> read_seed_summaries(const std::filesystem::path& sweep_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(sweep_dir)) {
    if (!entry.is_directory()) continue;
    const fs::path summary = entry.path() / "summary.json";
    if (entry.path().filename().string().rfind("seed_", 0) == 0 && fs::exists(summary))
      files.push_back(summary);
  }
  std::sort(files.begin(), files.end());
  std::vector<SeedSummary> out;
  for (const auto& f : files) {
    std::ifstream is(f);
    if (!is) throw std::runtime_error("aggregate: cannot read " + f.string());
    io::json j;
    is >> j;
    out.push_back(j.get<SeedSummary>());
  }
  return out;
}

// Scans for sweep directories (a config.json plus seed_*/summary.json) and
// aggregates each; rows come back sorted by horizon then name for the
// episodes-to-solve table.
inline std::vector<SweepRow> episodes_to_solve_table(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::exists(root)) throw std::invalid_argument("aggregate: no such directory " + root.string());

  std::vector<fs::path> candidates{root};
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_directory()) candidates.push_back(entry.path());

  std::vector<SweepRow> rows;
  for (const auto& dir : candidates) {
    if (!fs::exists(dir / "config.json")) continue;
    auto summaries = read_seed_summaries(dir);
    if (summaries.empty()) continue;

    std::ifstream is(dir / "config.json");
    io::json j;
    is >> j;
    SweepRow row;
    row.name = dir.filename().string();
    row.algorithm = j.at("algorithm").get<std::string>();
    row.variant = j.at("environment").at("variant").get<std::string>();
    row.horizon = j.at("environment").at("horizon").get<int>();
    row.aggregate = aggregate_summaries(summaries);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument("aggregate: no completed sweeps under " + root.string());
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.horizon != b.horizon ? a.horizon < b.horizon : a.name < b.name;
  });
  return rows;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "sweep,algorithm,variant,horizon,seeds,solved_fraction,"
        "mean_episodes_to_solve,std_episodes_to_solve\n";
  for (const auto& r : rows) {
    os << r.name << "," << r.algorithm << "," << r.variant << "," << r.horizon << ","
       << r.aggregate.num_seeds << "," << r.aggregate.solved_fraction << ",";
    if (r.aggregate.mean_episodes_to_solve) os << *r.aggregate.mean_episodes_to_solve;
    os << ",";
    if (r.aggregate.std_episodes_to_solve) os << *r.aggregate.std_episodes_to_solve;
    os << "\n";
  }
}

}  // namespace briee::harness
