#include "aif/learning.hpp"

#include <cmath>
#include <string>

#include "aif/errors.hpp"
#include "aif/prob.hpp"
#include "json_detail.hpp"

namespace aif {
namespace {

void check_table(const std::vector<double>& table, std::size_t expected, const std::string& what) {
  if (table.size() != expected) {
    throw ShapeError(what + ": expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(table.size()));
  }
}

// Normalizes consecutive blocks of `width` entries.
std::vector<double> column_means(const std::vector<double>& alpha, std::size_t width) {
  std::vector<double> out(alpha.size());
  for (std::size_t start = 0; start < alpha.size(); start += width) {
    const auto mean = dirichlet_mean(std::span(alpha).subspan(start, width));
    std::copy(mean.begin(), mean.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return out;
}

}  // namespace

void check_alpha(const DirichletParams& alpha, const GenerativeModel& shape) {
  const auto& fs = shape.states.factor_sizes();
  const auto& ms = shape.observations.modality_sizes();
  if (alpha.alpha_A.size() != ms.size()) throw ShapeError("alpha_A: modality count mismatch");
  if (alpha.alpha_B.size() != fs.size()) throw ShapeError("alpha_B: factor count mismatch");
  if (alpha.alpha_D.size() != fs.size()) throw ShapeError("alpha_D: factor count mismatch");
  for (std::size_t m = 0; m < ms.size(); ++m) {
    check_table(alpha.alpha_A[m], shape.num_states() * ms[m], "alpha_A[" + std::to_string(m) + "]");
  }
  for (std::size_t f = 0; f < fs.size(); ++f) {
    check_table(alpha.alpha_B[f], shape.num_actions() * fs[f] * fs[f],
                "alpha_B[" + std::to_string(f) + "]");
    check_table(alpha.alpha_D[f], fs[f], "alpha_D[" + std::to_string(f) + "]");
  }
  auto positive = [](const std::vector<std::vector<double>>& tables, const char* name) {
    for (const auto& t : tables) {
      for (double v : t) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw InvalidArgument(std::string(name) + ": every hyperparameter must be > 0");
        }
      }
    }
  };
  positive(alpha.alpha_A, "alpha_A");
  positive(alpha.alpha_B, "alpha_B");
  positive(alpha.alpha_D, "alpha_D");
}

DirichletParams learn_episode(const DirichletParams& alpha, const GenerativeModel& shape,
                              const SmoothedPosterior& smoothed, const History& history,
                              LearningOptions options) {
  check_alpha(alpha, shape);
  history.check(shape);
  if (history.t() != shape.horizon) {
    throw InvalidArgument("learn_episode: the history must cover the whole episode (t = T)");
  }
  const auto steps = static_cast<std::size_t>(shape.horizon);
  const std::size_t n = shape.num_states();
  if (smoothed.marginals.size() != steps) {
    throw ShapeError("learn_episode: smoothed posterior must hold one marginal per step");
  }
  for (const auto& m : smoothed.marginals) check_table(m, n, "learn_episode: smoothed marginal");
  if (options.use_pairwise_transitions) {
    if (smoothed.pairwise.size() != steps - 1) {
      throw ShapeError("learn_episode: pairwise marginals were not computed");
    }
    for (const auto& p : smoothed.pairwise) check_table(p, n * n, "learn_episode: pairwise");
  }

  const double lr = options.learning_rate;
  const auto& fs = shape.states.factor_sizes();
  const auto& ms = shape.observations.modality_sizes();
  DirichletParams out = alpha;

  std::vector<FactorBeliefs> factor_q(steps);
  for (std::size_t k = 0; k < steps; ++k) factor_q[k] = factor_marginals(shape, smoothed.marginals[k]);

  for (std::size_t f = 0; f < fs.size(); ++f) {
    for (std::size_t j = 0; j < fs[f]; ++j) out.alpha_D[f][j] += lr * factor_q[0][f][j];
  }

  for (std::size_t k = 0; k < steps; ++k) {
    const auto coords = shape.observations.unflatten(history.observations[k]);
    for (std::size_t m = 0; m < ms.size(); ++m) {
      auto& table = out.alpha_A[m];
      for (std::size_t s = 0; s < n; ++s) {
        table[s * ms[m] + coords[m]] += lr * smoothed.marginals[k][s];
      }
    }
  }

  for (std::size_t k = 1; k < steps; ++k) {
    const Index action = history.actions[k - 1];
    if (!options.use_pairwise_transitions) {
      for (std::size_t f = 0; f < fs.size(); ++f) {
        const std::size_t nf = fs[f];
        auto& table = out.alpha_B[f];
        for (std::size_t prev = 0; prev < nf; ++prev) {
          for (std::size_t next = 0; next < nf; ++next) {
            table[(action * nf + prev) * nf + next] +=
                lr * factor_q[k][f][next] * factor_q[k - 1][f][prev];
          }
        }
      }
      continue;
    }
    const auto& pair = smoothed.pairwise[k - 1];
    for (std::size_t next = 0; next < n; ++next) {
      const auto nc = shape.states.unflatten(next);
      for (std::size_t prev = 0; prev < n; ++prev) {
        const double w = pair[next * n + prev];
        if (w == 0.0) continue;
        const auto pc = shape.states.unflatten(prev);
        for (std::size_t f = 0; f < fs.size(); ++f) {
          out.alpha_B[f][(action * fs[f] + pc[f]) * fs[f] + nc[f]] += lr * w;
        }
      }
    }
  }
  return out;
}

std::vector<double> dirichlet_mean(std::span<const double> alpha) {
  if (alpha.empty()) throw InvalidArgument("dirichlet_mean: empty parameter vector");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("dirichlet_mean: every entry must be > 0");
    }
  }
  return normalized(alpha);
}

GenerativeModel model_from_alpha(const DirichletParams& alpha, const GenerativeModel& tmpl) {
  check_alpha(alpha, tmpl);
  GenerativeModel out = tmpl;
  const auto& fs = tmpl.states.factor_sizes();
  const auto& ms = tmpl.observations.modality_sizes();
  for (std::size_t m = 0; m < ms.size(); ++m) out.A.tables[m] = column_means(alpha.alpha_A[m], ms[m]);
  for (std::size_t f = 0; f < fs.size(); ++f) {
    out.B.tables[f] = column_means(alpha.alpha_B[f], fs[f]);
    out.D.factors[f] = dirichlet_mean(alpha.alpha_D[f]);
  }
  return out;
}

DirichletParams dirichlet_from_model(const GenerativeModel& model, double concentration,
                                     double floor) {
  if (!(concentration > 0.0) || !(floor >= 0.0)) {
    throw InvalidArgument("dirichlet_from_model: need concentration > 0 and floor >= 0");
  }
  auto scale = [&](const std::vector<std::vector<double>>& tables) {
    auto out = tables;
    for (auto& t : out) {
      for (double& v : t) v = concentration * v + floor;
    }
    return out;
  };
  DirichletParams alpha{scale(model.A.tables), scale(model.B.tables), scale(model.D.factors)};
  check_alpha(alpha, model);
  return alpha;
}

DirichletParams alpha_difference(const DirichletParams& after, const DirichletParams& before) {
  auto diff = [](const std::vector<std::vector<double>>& a,
                 const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size()) throw ShapeError("alpha_difference: shape mismatch");
    auto out = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].size() != b[i].size()) throw ShapeError("alpha_difference: shape mismatch");
      for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] = a[i][j] - b[i][j];
    }
    return out;
  };
  return {diff(after.alpha_A, before.alpha_A), diff(after.alpha_B, before.alpha_B),
          diff(after.alpha_D, before.alpha_D)};
}

namespace {

using detail::json;

json nest(const std::vector<double>& flat, std::size_t outer, std::size_t inner) {
  json out = json::array();
  for (std::size_t i = 0; i < outer; ++i) {
    auto first = flat.begin() + static_cast<std::ptrdiff_t>(i * inner);
    out.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(inner)));
  }
  return out;
}

std::vector<double> flatten_nested(const json& value, const std::string& path, std::size_t outer,
                                   std::size_t inner) {
  if (!value.is_array() || value.size() != outer) {
    throw ShapeError("field '" + path + "': expected " + std::to_string(outer) + " rows");
  }
  std::vector<double> out;
  out.reserve(outer * inner);
  for (std::size_t i = 0; i < outer; ++i) {
    const auto row = detail::as_doubles(value[i], path + "[" + std::to_string(i) + "]", inner);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

std::string serialize_alpha(const DirichletParams& alpha, const GenerativeModel& shape) {
  check_alpha(alpha, shape);
  const auto& fs = shape.states.factor_sizes();
  const auto& ms = shape.observations.modality_sizes();
  json doc = json::object();
  doc["state_factors"] = fs;
  doc["obs_modalities"] = ms;
  doc["num_actions"] = shape.num_actions();
  json a = json::array();
  for (std::size_t m = 0; m < ms.size(); ++m) a.push_back(nest(alpha.alpha_A[m], shape.num_states(), ms[m]));
  json b = json::array();
  for (std::size_t f = 0; f < fs.size(); ++f) {
    json per_action = json::array();
    const std::size_t block = fs[f] * fs[f];
    for (std::size_t act = 0; act < shape.num_actions(); ++act) {
      std::vector<double> slice(alpha.alpha_B[f].begin() + static_cast<std::ptrdiff_t>(act * block),
                                alpha.alpha_B[f].begin() + static_cast<std::ptrdiff_t>((act + 1) * block));
      per_action.push_back(nest(slice, fs[f], fs[f]));
    }
    b.push_back(std::move(per_action));
  }
  doc["alpha_A"] = std::move(a);
  doc["alpha_B"] = std::move(b);
  doc["alpha_D"] = alpha.alpha_D;
  return doc.dump(2) + "\n";
}

DirichletParams parse_alpha(std::string_view text, const GenerativeModel& shape) {
  const json doc = detail::parse_document(text, "alpha checkpoint");
  const auto fs = detail::as_size_list(detail::require_field(doc, "state_factors"), "state_factors");
  const auto ms = detail::as_size_list(detail::require_field(doc, "obs_modalities"), "obs_modalities");
  const auto na = detail::as_size(detail::require_field(doc, "num_actions"), "num_actions");
  if (fs != shape.states.factor_sizes() || ms != shape.observations.modality_sizes() ||
      na != shape.num_actions()) {
    throw ShapeError("alpha checkpoint: spaces do not match the model");
  }
  DirichletParams alpha;
  const json& a = detail::require_field(doc, "alpha_A");
  if (!a.is_array() || a.size() != ms.size()) throw ShapeError("field 'alpha_A': modality count");
  for (std::size_t m = 0; m < ms.size(); ++m) {
    alpha.alpha_A.push_back(
        flatten_nested(a[m], "alpha_A[" + std::to_string(m) + "]", shape.num_states(), ms[m]));
  }
  const json& b = detail::require_field(doc, "alpha_B");
  if (!b.is_array() || b.size() != fs.size()) throw ShapeError("field 'alpha_B': factor count");
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::string path = "alpha_B[" + std::to_string(f) + "]";
    if (!b[f].is_array() || b[f].size() != na) throw ShapeError("field '" + path + "': action count");
    std::vector<double> table;
    for (std::size_t act = 0; act < na; ++act) {
      const auto slice = flatten_nested(b[f][act], path + "[" + std::to_string(act) + "]", fs[f], fs[f]);
      table.insert(table.end(), slice.begin(), slice.end());
    }
    alpha.alpha_B.push_back(std::move(table));
  }
  const json& d = detail::require_field(doc, "alpha_D");
  if (!d.is_array() || d.size() != fs.size()) throw ShapeError("field 'alpha_D': factor count");
  for (std::size_t f = 0; f < fs.size(); ++f) {
    alpha.alpha_D.push_back(detail::as_doubles(d[f], "alpha_D[" + std::to_string(f) + "]", fs[f]));
  }
  check_alpha(alpha, shape);
  return alpha;
}

void save_alpha(const DirichletParams& alpha, const GenerativeModel& shape,
                const std::filesystem::path& path) {
  detail::write_file(path.string(), serialize_alpha(alpha, shape));
}

DirichletParams load_alpha(const std::filesystem::path& path, const GenerativeModel& shape) {
  return parse_alpha(detail::read_file(path.string()), shape);
}

}  // namespace aif
