#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffnet/harness.hpp"

namespace diffnet {

// curve CSV: header "iteration,msd_linear,msd_db", one row per iteration.
void write_curve_csv(const std::string& path, const std::vector<double>& msd);

struct SummaryRow {
  std::string strategy;
  double mu = 0.0;
  double eta = 0.0;
  double steady_state_msd_db = 0.0;
  double stderr_db = 0.0;
  std::optional<double> theory_msd_db;
  int diverged_trials = 0;
};
void write_summary_json(const std::string& path,
                        const std::vector<SummaryRow>& rows);

// manifest: {config_hash, seed, artifacts, created_utc}. Everything except
// the timestamp is a pure function of the run inputs.
void write_manifest(const std::string& path, std::uint64_t config_hash,
                    std::uint64_t seed,
                    const std::vector<std::string>& artifacts);

// FNV-1a over the canonical (key-sorted) serialization.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace diffnet
