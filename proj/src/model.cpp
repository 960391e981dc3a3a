#include "aif/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "aif/errors.hpp"
#include "aif/prob.hpp"

namespace aif {

std::size_t ProductSpace::joint_size() const noexcept {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

Index ProductSpace::flatten(std::span<const Index> coords) const {
  if (coords.size() != dims_.size()) throw ShapeError("flatten: wrong number of coordinates");
  Index joint = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (coords[k] >= dims_[k]) throw IndexError("flatten: coordinate out of range");
    joint = joint * dims_[k] + coords[k];
  }
  return joint;
}

std::vector<Index> ProductSpace::unflatten(Index joint) const {
  if (joint >= joint_size()) throw IndexError("unflatten: joint index out of range");
  std::vector<Index> coords(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    coords[k] = joint % dims_[k];
    joint /= dims_[k];
  }
  return coords;
}

Index ProductSpace::coordinate(Index joint, std::size_t k) const {
  std::size_t stride = 1;
  for (std::size_t j = k + 1; j < dims_.size(); ++j) stride *= dims_[j];
  return (joint / stride) % dims_[k];
}

const std::vector<std::vector<double>>& PreferenceDistribution::at_time(int tau) const {
  if (per_time.empty()) return values;
  if (tau < 1 || static_cast<std::size_t>(tau) > per_time.size()) {
    throw IndexError("preferences: no entry for step " + std::to_string(tau));
  }
  return per_time[static_cast<std::size_t>(tau - 1)];
}

std::string Violation::to_string() const { return kernel + index + ": " + constraint; }

namespace {

std::string bracket(std::initializer_list<std::size_t> idx) {
  std::ostringstream os;
  for (std::size_t i : idx) os << '[' << i << ']';
  return os.str();
}

void check_probability_vector(std::span<const double> column, const std::string& kernel,
                              const std::string& index, std::vector<Violation>& out) {
  bool range_ok = true;
  for (double v : column) {
    if (!(v >= 0.0 && v <= 1.0)) range_ok = false;
  }
  if (!range_ok) out.push_back({kernel, index, "entries must lie in [0, 1]"});
  const double total = sum(column);
  if (!(std::abs(total - 1.0) <= kColumnTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "column sums to " << total << ", expected 1";
    out.push_back({kernel, index, os.str()});
  }
}

void check_preference_table(const std::vector<std::vector<double>>& table,
                            const GenerativeModel& model, const std::string& kernel,
                            std::vector<Violation>& out) {
  const auto& sizes = model.observations.modality_sizes();
  if (table.size() != sizes.size()) {
    out.push_back({kernel, "", "expected one preference vector per modality"});
    return;
  }
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    const auto& c = table[m];
    const std::string idx = bracket({m});
    if (c.size() != sizes[m]) {
      out.push_back({kernel, idx, "length does not match modality size"});
      continue;
    }
    if (model.C.space == PreferenceSpace::kLog) {
      for (double v : c) {
        if (!std::isfinite(v)) {
          out.push_back({kernel, idx, "log-preferences must be finite"});
          break;
        }
      }
      continue;
    }
    bool negative = false;
    bool positive = false;
    for (double v : c) {
      if (!(v >= 0.0) || !std::isfinite(v)) negative = true;
      if (v > 0.0) positive = true;
    }
    if (negative) out.push_back({kernel, idx, "preference weights must be non-negative"});
    if (!positive) out.push_back({kernel, idx, "at least one preference weight must be positive"});
  }
}

}  // namespace

std::vector<Violation> validate_model(const GenerativeModel& model) {
  std::vector<Violation> out;
  const auto& fs = model.states.factor_sizes();
  const auto& ms = model.observations.modality_sizes();

  if (fs.empty()) out.push_back({"states", "", "at least one state factor is required"});
  for (std::size_t f = 0; f < fs.size(); ++f) {
    if (fs[f] < 1) out.push_back({"states", bracket({f}), "factor size must be >= 1"});
  }
  if (ms.empty()) out.push_back({"observations", "", "at least one modality is required"});
  for (std::size_t m = 0; m < ms.size(); ++m) {
    if (ms[m] < 1) out.push_back({"observations", bracket({m}), "modality size must be >= 1"});
  }
  if (model.actions.size < 1) out.push_back({"actions", "", "action count must be >= 1"});
  if (!model.actions.labels.empty() && model.actions.labels.size() != model.actions.size) {
    out.push_back({"actions", "", "label count does not match action count"});
  }
  if (model.horizon < 2) out.push_back({"horizon", "", "horizon must be >= 2"});
  if (!out.empty()) return out;  // shapes below depend on the spaces

  const std::size_t n_states = model.num_states();
  const std::size_t n_actions = model.num_actions();

  if (model.A.tables.size() != ms.size()) {
    out.push_back({"A", "", "expected one table per modality"});
  } else {
    for (std::size_t m = 0; m < ms.size(); ++m) {
      const auto& table = model.A.tables[m];
      if (table.size() != n_states * ms[m]) {
        out.push_back({"A", bracket({m}), "shape does not match [joint states][outcomes]"});
        continue;
      }
      for (std::size_t s = 0; s < n_states; ++s) {
        check_probability_vector(std::span(table).subspan(s * ms[m], ms[m]), "A",
                                 bracket({m, s}), out);
      }
    }
  }

  if (model.B.tables.size() != fs.size()) {
    out.push_back({"B", "", "expected one table per factor"});
  } else {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const auto& table = model.B.tables[f];
      const std::size_t n = fs[f];
      if (table.size() != n_actions * n * n) {
        out.push_back({"B", bracket({f}), "shape does not match [actions][prev][next]"});
        continue;
      }
      for (std::size_t a = 0; a < n_actions; ++a) {
        for (std::size_t k = 0; k < n; ++k) {
          check_probability_vector(std::span(table).subspan((a * n + k) * n, n), "B",
                                   bracket({f, a, k}), out);
        }
      }
    }
  }

  if (model.D.factors.size() != fs.size()) {
    out.push_back({"D", "", "expected one prior per factor"});
  } else {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      if (model.D.factors[f].size() != fs[f]) {
        out.push_back({"D", bracket({f}), "length does not match factor size"});
        continue;
      }
      check_probability_vector(model.D.factors[f], "D", bracket({f}), out);
    }
  }

  check_preference_table(model.C.values, model, "C", out);
  if (!model.C.per_time.empty()) {
    if (model.C.per_time.size() != static_cast<std::size_t>(model.horizon)) {
      out.push_back({"C_t", "", "per-time preferences must have one entry per step"});
    }
    for (std::size_t t = 0; t < model.C.per_time.size(); ++t) {
      check_preference_table(model.C.per_time[t], model, "C_t" + bracket({t}), out);
    }
  }

  const auto& lab = model.labels;
  if (!lab.factor_values.empty()) {
    bool ok = lab.factor_values.size() == fs.size();
    for (std::size_t f = 0; ok && f < fs.size(); ++f) ok = lab.factor_values[f].size() == fs[f];
    if (!ok) out.push_back({"labels", ".factor_values", "shape does not match state factors"});
  }
  if (!lab.modality_values.empty()) {
    bool ok = lab.modality_values.size() == ms.size();
    for (std::size_t m = 0; ok && m < ms.size(); ++m) ok = lab.modality_values[m].size() == ms[m];
    if (!ok) out.push_back({"labels", ".modality_values", "shape does not match modalities"});
  }
  return out;
}

void require_valid(const GenerativeModel& model) {
  const auto violations = validate_model(model);
  if (violations.empty()) return;
  std::string msg = "invalid generative model:";
  for (const auto& v : violations) msg += "\n  " + v.to_string();
  throw ShapeError(msg);
}

double joint_likelihood(const GenerativeModel& model, Index observation, Index state) {
  if (state >= model.num_states()) throw IndexError("joint_likelihood: state out of range");
  if (observation >= model.num_observations()) {
    throw IndexError("joint_likelihood: observation out of range");
  }
  const auto& ms = model.observations.modality_sizes();
  double p = 1.0;
  for (std::size_t m = ms.size(); m-- > 0;) {
    const Index o_m = observation % ms[m];
    observation /= ms[m];
    p *= model.A.at(m, state, o_m, ms[m]);
  }
  return p;
}

std::vector<double> likelihood_over_states(const GenerativeModel& model, Index observation) {
  if (observation >= model.num_observations()) {
    throw IndexError("likelihood: observation out of range");
  }
  const auto coords = model.observations.unflatten(observation);
  const auto& ms = model.observations.modality_sizes();
  std::vector<double> out(model.num_states(), 1.0);
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const auto& table = model.A.tables[m];
    for (std::size_t s = 0; s < out.size(); ++s) out[s] *= table[s * ms[m] + coords[m]];
  }
  return out;
}

std::vector<double> joint_initial_prior(const GenerativeModel& model) {
  const std::size_t n = model.num_states();
  std::vector<double> out(n, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto coords = model.states.unflatten(s);
    for (std::size_t f = 0; f < coords.size(); ++f) out[s] *= model.D.factors[f][coords[f]];
  }
  return out;
}

double joint_transition(const GenerativeModel& model, Index next, Index prev, Index action) {
  const auto& fs = model.states.factor_sizes();
  double p = 1.0;
  for (std::size_t f = fs.size(); f-- > 0;) {
    const Index nf = next % fs[f];
    const Index pf = prev % fs[f];
    next /= fs[f];
    prev /= fs[f];
    p *= model.B.at(f, action, pf, nf, fs[f]);
  }
  return p;
}

namespace {

double raw_log_normalizer(const std::vector<double>& c, PreferenceSpace space) {
  if (space == PreferenceSpace::kLog) return log_sum_exp(c);
  return std::log(sum(c));
}

}  // namespace

std::vector<std::vector<double>> log_preferences_by_modality(const GenerativeModel& model,
                                                             int tau) {
  const auto& table = model.C.at_time(tau);
  std::vector<std::vector<double>> out(table.size());
  for (std::size_t m = 0; m < table.size(); ++m) {
    const auto& c = table[m];
    const double shift = model.C.normalize ? raw_log_normalizer(c, model.C.space) : 0.0;
    out[m].resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double raw = model.C.space == PreferenceSpace::kLog ? c[i] : safe_log(c[i]);
      out[m][i] = raw - shift;
    }
  }
  return out;
}

std::vector<double> log_preferences(const GenerativeModel& model, int tau) {
  const auto per_modality = log_preferences_by_modality(model, tau);
  const auto& ms = model.observations.modality_sizes();
  std::vector<double> out(model.num_observations(), 0.0);
  for (std::size_t o = 0; o < out.size(); ++o) {
    Index rest = o;
    double acc = 0.0;
    for (std::size_t m = ms.size(); m-- > 0;) {
      acc += per_modality[m][rest % ms[m]];
      rest /= ms[m];
    }
    out[o] = acc;
  }
  return out;
}

double preference_log_normalizer(const GenerativeModel& model, int tau) {
  if (model.C.normalize) return 0.0;
  double acc = 0.0;
  for (const auto& c : model.C.at_time(tau)) acc += raw_log_normalizer(c, model.C.space);
  return acc;
}

std::vector<std::string> observation_labels(const GenerativeModel& model, Index observation) {
  const auto coords = model.observations.unflatten(observation);
  std::vector<std::string> out(coords.size());
  for (std::size_t m = 0; m < coords.size(); ++m) {
    if (m < model.labels.modality_values.size()) {
      out[m] = model.labels.modality_values[m].at(coords[m]);
    } else {
      out[m] = std::to_string(coords[m]);
    }
  }
  return out;
}

std::string action_label(const GenerativeModel& model, Index action) {
  if (action < model.actions.labels.size()) return model.actions.labels[action];
  return std::to_string(action);
}

}  // namespace aif
