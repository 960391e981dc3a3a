#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aif/agent.hpp"
#include "aif/env.hpp"
#include "aif/errors.hpp"
#include "aif/learning.hpp"
#include "aif/model.hpp"

namespace aif {

// Bad flags or flag combinations. Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct RunConfig {
  // "tmaze" or a model file path.
  std::string model = "tmaze";
  int episodes = 1;
  std::optional<std::uint64_t> seed;
  SelectionMode mode = SelectionMode::kSample;
  bool learn = false;
  // No artifacts are written when empty.
  std::filesystem::path out;
  std::optional<bool> c_normalize;
  std::optional<tmaze::RewardSide> force_reward_side;
  bool emit_tables = false;
  // Worker threads for independent episodes; 0 picks the hardware count.
  unsigned threads = 0;
};

// Throws ConfigError.
void validate_config(const RunConfig& config);

struct RunResult {
  GenerativeModel model;
  std::vector<EpisodeRecord> episodes;
  std::optional<DirichletParams> initial_alpha;
  std::optional<DirichletParams> final_alpha;
};

// Runs every episode. With learning on, episodes run in order and each one
// acts under the Dirichlet mean of the parameters carried from the last.
RunResult run_episodes(const RunConfig& config);

// Builds the model a config refers to, with the c_normalize override applied.
GenerativeModel resolve_model(const RunConfig& config);

// Fixed-width policy posterior table, 3 decimals. Two-step policies give
// rows a_t by columns a_t+1; one-step policies a single row; the empty
// policy "1.000"; longer policies one line per policy.
std::string emit_table(const GenerativeModel& model, const PolicyPosterior& posterior);

// One JSON object per line.
std::string step_line(const GenerativeModel& model, const EpisodeRecord& episode,
                      const StepRecord& step);
std::string episode_end_line(const GenerativeModel& model, const EpisodeRecord& episode);

// Writes trajectory.jsonl, summary.json, episodes.csv and, when learning,
// alpha_final.json into config.out.
void write_artifacts(const RunConfig& config, const RunResult& result);

// Validates, runs, writes artifacts and prints tables. Returns an exit code;
// diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses `run` and its flags, then calls run().
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aif
