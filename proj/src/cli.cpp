#include "aif/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "aif/model_io.hpp"

namespace aif {

using nlohmann::json;

namespace {

constexpr double kAlphaConcentration = 100.0;
constexpr double kAlphaFloor = 0.01;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s + " ";
  return std::string(width - s.size(), ' ') + s;
}

json alpha_json(const DirichletParams& a) {
  return json{{"alpha_A", a.alpha_A}, {"alpha_B", a.alpha_B}, {"alpha_D", a.alpha_D}};
}

json step_terms(const EfeStep& s) {
  return json{{"tau", s.tau},
              {"epistemic_value", s.epistemic_value},
              {"utility", s.utility},
              {"ambiguity", s.ambiguity},
              {"risk", s.risk},
              {"preference_shift", s.preference_shift},
              {"g", s.g}};
}

std::string mode_name(SelectionMode m) { return m == SelectionMode::kSample ? "sample" : "greedy"; }

std::unique_ptr<Environment> make_env(const RunConfig& config, const GenerativeModel& model) {
  if (config.model == "tmaze") return std::make_unique<TMazeEnv>(tmaze::Options{}, config.force_reward_side);
  return std::make_unique<ModelEnv>(model);
}

}  // namespace

void validate_config(const RunConfig& config) {
  if (config.episodes < 1) throw ConfigError("--episodes must be >= 1");
  if (config.mode == SelectionMode::kSample && !config.seed) {
    throw ConfigError("--seed is required with --mode sample");
  }
  if (config.force_reward_side && config.model != "tmaze") {
    throw ConfigError("--force-reward-side only applies to --model tmaze");
  }
  if (config.model.empty()) throw ConfigError("--model must name a file or tmaze");
}

GenerativeModel resolve_model(const RunConfig& config) {
  GenerativeModel model = config.model == "tmaze" ? tmaze::build_model().model : load_model(config.model);
  if (config.c_normalize) model.C.normalize = *config.c_normalize;
  require_valid(model);
  return model;
}

RunResult run_episodes(const RunConfig& config) {
  validate_config(config);
  RunResult result;
  result.model = resolve_model(config);
  const GenerativeModel& model = result.model;
  const std::uint64_t base_seed = config.seed.value_or(0);
  AgentOptions opts;
  opts.mode = config.mode;

  const auto n = static_cast<std::size_t>(config.episodes);
  result.episodes.resize(n);

  if (config.learn) {
    DirichletParams alpha = config.model == "tmaze"
                                ? tmaze::build_model().alpha
                                : dirichlet_from_model(model, kAlphaConcentration, kAlphaFloor);
    result.initial_alpha = alpha;
    for (std::size_t e = 0; e < n; ++e) {
      const GenerativeModel acting = model_from_alpha(alpha, model);
      auto env = make_env(config, model);
      EpisodeRecord rec = run_episode(acting, *env, static_cast<int>(e), derive_seed(base_seed, e), opts);
      const auto smoothed =
          smooth(acting, rec.history, {}, SmoothOptions{opts.learning.use_pairwise_transitions});
      DirichletParams next = learn_episode(alpha, model, smoothed, rec.history, opts.learning);
      rec.alpha_before = std::move(alpha);
      rec.alpha_after = next;
      alpha = std::move(next);
      result.episodes[e] = std::move(rec);
    }
    result.final_alpha = std::move(alpha);
    return result;
  }

  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  auto lane = [&](unsigned w) {
    try {
      for (std::size_t e = next++; e < n; e = next++) {
        auto env = make_env(config, model);
        result.episodes[e] = run_episode(model, *env, static_cast<int>(e), derive_seed(base_seed, e), opts);
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    lane(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(lane, w);
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return result;
}

std::string emit_table(const GenerativeModel& model, const PolicyPosterior& posterior) {
  const auto& pols = posterior.policies;
  const auto& p = posterior.probabilities;
  std::ostringstream os;
  if (pols.empty()) return "";
  const std::size_t len = pols.front().actions.size();
  const std::size_t na = model.num_actions();

  if (len == 0) {
    os << fixed3(p[0]) << "\n";
    return os.str();
  }
  std::size_t width = 8;
  for (Index a = 0; a < na; ++a) width = std::max(width, action_label(model, a).size() + 2);

  if (len == 1 || len == 2) {
    os << std::string(width, ' ');
    for (Index a = 0; a < na; ++a) os << pad(action_label(model, a), width);
    os << "\n";
    const std::size_t rows = len == 1 ? 1 : na;
    for (std::size_t r = 0; r < rows; ++r) {
      os << (len == 1 ? std::string(width, ' ') : pad(action_label(model, r), width));
      for (Index c = 0; c < na; ++c) os << pad(fixed3(p[r * na + c]), width);
      os << "\n";
    }
    return os.str();
  }
  for (std::size_t i = 0; i < pols.size(); ++i) {
    std::string name = "(";
    for (std::size_t k = 0; k < len; ++k) {
      if (k) name += ", ";
      name += action_label(model, pols[i].actions[k]);
    }
    os << name << ")  " << fixed3(p[i]) << "\n";
  }
  return os.str();
}

std::string step_line(const GenerativeModel& model, const EpisodeRecord& episode, const StepRecord& step) {
  const auto& post = step.posterior;
  json pols = json::array();
  json terms = json::array();
  for (std::size_t i = 0; i < post.policies.size(); ++i) {
    pols.push_back(post.policies[i].actions);
    json steps = json::array();
    for (const auto& s : post.breakdowns[i].steps) steps.push_back(step_terms(s));
    terms.push_back(std::move(steps));
  }
  json j = {{"type", "step"},
            {"episode", episode.episode},
            {"t", step.t},
            {"observation", {{"index", step.observation}, {"labels", observation_labels(model, step.observation)}}},
            {"true_state", step.true_state},
            {"belief", step.belief},
            {"converged", step.converged},
            {"policies", std::move(pols)},
            {"q_pi", post.probabilities},
            {"G", post.g},
            {"G_terms", std::move(terms)}};
  if (step.action) {
    j["action"] = *step.action;
    j["action_label"] = action_label(model, *step.action);
  } else {
    j["action"] = nullptr;
  }
  return j.dump();
}

std::string episode_end_line(const GenerativeModel&, const EpisodeRecord& episode) {
  json j = {{"type", "episode_end"},
            {"episode", episode.episode},
            {"seed", episode.seed},
            {"observations", episode.history.observations},
            {"actions", episode.history.actions},
            {"realized_utility", episode.realized_utility}};
  if (episode.alpha_before && episode.alpha_after) {
    j["alpha_delta"] = alpha_json(alpha_difference(*episode.alpha_after, *episode.alpha_before));
  }
  return j.dump();
}

void write_artifacts(const RunConfig& config, const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out);
  const auto& model = result.model;

  std::ofstream traj(config.out / "trajectory.jsonl", std::ios::binary);
  if (!traj) throw Error("cannot write " + (config.out / "trajectory.jsonl").string());
  for (const auto& ep : result.episodes) {
    for (const auto& step : ep.steps) traj << step_line(model, ep, step) << "\n";
    traj << episode_end_line(model, ep) << "\n";
  }

  std::ofstream csv(config.out / "episodes.csv", std::ios::binary);
  csv << "episode,seed,realized_utility,actions,observations\n";
  json per_episode = json::array();
  double total = 0.0;
  for (const auto& ep : result.episodes) {
    std::string acts, obs;
    for (auto a : ep.history.actions) acts += (acts.empty() ? "" : " ") + std::to_string(a);
    for (auto o : ep.history.observations) obs += (obs.empty() ? "" : " ") + std::to_string(o);
    char util[40];
    std::snprintf(util, sizeof util, "%.17g", ep.realized_utility);
    csv << ep.episode << "," << ep.seed << "," << util << "," << acts << "," << obs << "\n";
    per_episode.push_back({{"episode", ep.episode}, {"seed", ep.seed}, {"realized_utility", ep.realized_utility}});
    total += ep.realized_utility;
  }

  json summary = {{"model", config.model},
                  {"episodes", config.episodes},
                  {"mode", mode_name(config.mode)},
                  {"learn", config.learn},
                  {"rng", "mt19937_64"},
                  {"c_normalize", model.C.normalize},
                  {"per_episode", std::move(per_episode)},
                  {"mean_realized_utility", total / static_cast<double>(result.episodes.size())}};
  summary["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  if (config.force_reward_side) {
    summary["force_reward_side"] = *config.force_reward_side == tmaze::RewardSide::kRight ? "right" : "left";
  }
  std::ofstream(config.out / "summary.json", std::ios::binary) << summary.dump(2) << "\n";

  if (result.final_alpha) save_alpha(*result.final_alpha, model, config.out / "alpha_final.json");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate_config(config);
    const RunResult result = run_episodes(config);
    if (!config.out.empty()) write_artifacts(config, result);
    if (config.emit_tables) {
      for (const auto& ep : result.episodes) {
        for (const auto& step : ep.steps) {
          out << "episode " << ep.episode << " t=" << step.t;
          if (step.action) out << " action=" << action_label(result.model, *step.action);
          out << "\n" << emit_table(result.model, step.posterior) << "\n";
        }
      }
    }
    double total = 0.0;
    for (const auto& ep : result.episodes) total += ep.realized_utility;
    out << "episodes " << result.episodes.size() << " mean realized utility "
        << total / static_cast<double>(result.episodes.size()) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete active inference agent"};
  app.require_subcommand(1);
  RunConfig config;
  std::string mode = "sample";
  std::string c_normalize;
  std::string side;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Run episodes and log trajectories");
  run_cmd->add_option("--model", config.model, "Model file or tmaze");
  run_cmd->add_option("--episodes", config.episodes, "Number of episodes");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Base seed");
  run_cmd->add_option("--mode", mode, "sample or greedy");
  run_cmd->add_flag("--learn", config.learn, "Dirichlet learning across episodes");
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--c-normalize", c_normalize, "true or false");
  run_cmd->add_option("--force-reward-side", side, "left or right");
  run_cmd->add_flag("--emit-tables", config.emit_tables, "Print policy posterior tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*seed_opt) config.seed = seed;
    if (mode == "sample") {
      config.mode = SelectionMode::kSample;
    } else if (mode == "greedy") {
      config.mode = SelectionMode::kGreedy;
    } else {
      throw ConfigError("--mode must be sample or greedy");
    }
    if (c_normalize == "true") {
      config.c_normalize = true;
    } else if (c_normalize == "false") {
      config.c_normalize = false;
    } else if (!c_normalize.empty()) {
      throw ConfigError("--c-normalize must be true or false");
    }
    if (side == "right") {
      config.force_reward_side = tmaze::RewardSide::kRight;
    } else if (side == "left") {
      config.force_reward_side = tmaze::RewardSide::kLeft;
    } else if (!side.empty()) {
      throw ConfigError("--force-reward-side must be left or right");
    }
    config.out = out_dir;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run(config, out, err);
}

}  // namespace aif
