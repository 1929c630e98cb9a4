#include "diffnet/report.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace diffnet {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

}  // namespace

void write_curve_csv(const std::string& path, const std::vector<double>& msd) {
  auto f = open_out(path);
  f << "iteration,msd_linear,msd_db\n";
  f << std::setprecision(17);
  for (std::size_t i = 0; i < msd.size(); ++i) {
    f << i << ',' << msd[i] << ',';
    if (msd[i] > 0.0 && std::isfinite(msd[i]))
      f << to_db(msd[i]);
    else
      f << "-inf";
    f << '\n';
  }
}

void write_summary_json(const std::string& path,
                        const std::vector<SummaryRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["strategy"] = r.strategy;
    row["mu"] = r.mu;
    row["eta"] = r.eta;
    row["steady_state_msd_db"] = r.steady_state_msd_db;
    row["stderr_db"] = r.stderr_db;
    row["theory_msd_db"] =
        r.theory_msd_db ? nlohmann::json(*r.theory_msd_db) : nullptr;
    row["diverged_trials"] = r.diverged_trials;
    arr.push_back(std::move(row));
  }
  auto f = open_out(path);
  f << arr.dump(2) << '\n';
}

void write_manifest(const std::string& path, std::uint64_t config_hash,
                    std::uint64_t seed,
                    const std::vector<std::string>& artifacts) {
  nlohmann::json m;
  std::ostringstream hash_hex;
  hash_hex << std::hex << std::setw(16) << std::setfill('0') << config_hash;
  m["config_hash"] = hash_hex.str();
  m["seed"] = seed;
  m["artifacts"] = artifacts;
  const auto now = std::chrono::system_clock::now();
  m["created_utc"] = std::chrono::duration_cast<std::chrono::seconds>(
                         now.time_since_epoch())
                         .count();
  auto f = open_out(path);
  f << m.dump(2) << '\n';
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace diffnet
