#include "aif/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json_detail.hpp"

namespace aif {
namespace detail {

json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line/column pair.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << what << ": JSON syntax error at line " << line << ", column " << col;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) os << " (empty document)";
    throw ParseError(os.str());
  }
}

const json& require_field(const json& obj, const char* name) {
  if (!obj.is_object()) throw ParseError("expected a JSON object at the top level");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

std::size_t as_size(const json& value, const std::string& path) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ParseError("field '" + path + "': expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

int as_int(const json& value, const std::string& path) {
  if (!value.is_number_integer()) throw ParseError("field '" + path + "': expected an integer");
  return value.get<int>();
}

double as_double(const json& value, const std::string& path) {
  if (!value.is_number()) throw ParseError("field '" + path + "': expected a number");
  return value.get<double>();
}

bool as_bool(const json& value, const std::string& path) {
  if (!value.is_boolean()) throw ParseError("field '" + path + "': expected true or false");
  return value.get<bool>();
}

std::vector<std::size_t> as_size_list(const json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError("field '" + path + "': expected an array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(as_size(value[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> as_doubles(const json& value, const std::string& path,
                               std::size_t expected) {
  if (!value.is_array()) throw ParseError("field '" + path + "': expected an array");
  if (value.size() != expected) {
    throw ShapeError("field '" + path + "': expected " + std::to_string(expected) +
                     " entries, got " + std::to_string(value.size()));
  }
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    out[i] = as_double(value[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

std::vector<std::string> as_strings(const json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError("field '" + path + "': expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_string()) {
      throw ParseError("field '" + path + "[" + std::to_string(i) + "]': expected a string");
    }
    out.push_back(value[i].get<std::string>());
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace detail

namespace {

using detail::json;

void expect_array(const json& value, const std::string& path, std::size_t expected) {
  if (!value.is_array()) throw ParseError("field '" + path + "': expected an array");
  if (value.size() != expected) {
    throw ShapeError("field '" + path + "': expected " + std::to_string(expected) +
                     " entries, got " + std::to_string(value.size()));
  }
}

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::vector<std::vector<double>> read_preferences(const json& value, const std::string& path,
                                                  const std::vector<std::size_t>& sizes) {
  expect_array(value, path, sizes.size());
  std::vector<std::vector<double>> out(sizes.size());
  for (std::size_t m = 0; m < sizes.size(); ++m) {
    out[m] = detail::as_doubles(value[m], at(path, m), sizes[m]);
  }
  return out;
}

}  // namespace

GenerativeModel parse_model(std::string_view text) {
  const json doc = detail::parse_document(text, "model");
  if (!doc.is_object()) throw ParseError("model: expected a JSON object at the top level");

  GenerativeModel model;
  model.states =
      StateSpace(detail::as_size_list(detail::require_field(doc, "state_factors"), "state_factors"));
  model.observations = ObservationSpace(
      detail::as_size_list(detail::require_field(doc, "obs_modalities"), "obs_modalities"));
  model.actions.size = detail::as_size(detail::require_field(doc, "num_actions"), "num_actions");
  model.horizon = detail::as_int(detail::require_field(doc, "horizon"), "horizon");
  model.C.normalize = detail::as_bool(detail::require_field(doc, "c_normalize"), "c_normalize");

  const auto& fs = model.states.factor_sizes();
  const auto& ms = model.observations.modality_sizes();
  const std::size_t n_states = model.num_states();
  const std::size_t n_actions = model.num_actions();

  const json& a = detail::require_field(doc, "A");
  expect_array(a, "A", ms.size());
  model.A.tables.resize(ms.size());
  for (std::size_t m = 0; m < ms.size(); ++m) {
    expect_array(a[m], at("A", m), n_states);
    auto& table = model.A.tables[m];
    table.reserve(n_states * ms[m]);
    for (std::size_t s = 0; s < n_states; ++s) {
      const auto col = detail::as_doubles(a[m][s], at(at("A", m), s), ms[m]);
      table.insert(table.end(), col.begin(), col.end());
    }
  }

  const json& b = detail::require_field(doc, "B");
  expect_array(b, "B", fs.size());
  model.B.tables.resize(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::string pf = at("B", f);
    expect_array(b[f], pf, n_actions);
    auto& table = model.B.tables[f];
    table.reserve(n_actions * fs[f] * fs[f]);
    for (std::size_t act = 0; act < n_actions; ++act) {
      expect_array(b[f][act], at(pf, act), fs[f]);
      for (std::size_t k = 0; k < fs[f]; ++k) {
        const auto col = detail::as_doubles(b[f][act][k], at(at(pf, act), k), fs[f]);
        table.insert(table.end(), col.begin(), col.end());
      }
    }
  }

  model.C.values = read_preferences(detail::require_field(doc, "C"), "C", ms);

  const json& d = detail::require_field(doc, "D");
  expect_array(d, "D", fs.size());
  model.D.factors.resize(fs.size());
  for (std::size_t f = 0; f < fs.size(); ++f) {
    model.D.factors[f] = detail::as_doubles(d[f], at("D", f), fs[f]);
  }

  if (auto it = doc.find("c_space"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("field 'c_space': expected a string");
    const auto space = it->get<std::string>();
    if (space == "probability") {
      model.C.space = PreferenceSpace::kProbability;
    } else if (space == "log") {
      model.C.space = PreferenceSpace::kLog;
    } else {
      throw ParseError("field 'c_space': expected \"probability\" or \"log\", got \"" + space +
                       "\"");
    }
  }
  if (auto it = doc.find("C_t"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("field 'C_t': expected an array");
    for (std::size_t t = 0; t < it->size(); ++t) {
      model.C.per_time.push_back(read_preferences((*it)[t], at("C_t", t), ms));
    }
  }
  if (auto it = doc.find("action_labels"); it != doc.end()) {
    model.actions.labels = detail::as_strings(*it, "action_labels");
  }
  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("field 'labels': expected an object");
    auto& lab = model.labels;
    if (auto f = it->find("factor_names"); f != it->end()) {
      lab.factor_names = detail::as_strings(*f, "labels.factor_names");
    }
    if (auto f = it->find("modality_names"); f != it->end()) {
      lab.modality_names = detail::as_strings(*f, "labels.modality_names");
    }
    if (auto f = it->find("factor_values"); f != it->end()) {
      if (!f->is_array()) throw ParseError("field 'labels.factor_values': expected an array");
      for (std::size_t i = 0; i < f->size(); ++i) {
        lab.factor_values.push_back(detail::as_strings((*f)[i], at("labels.factor_values", i)));
      }
    }
    if (auto f = it->find("modality_values"); f != it->end()) {
      if (!f->is_array()) throw ParseError("field 'labels.modality_values': expected an array");
      for (std::size_t i = 0; i < f->size(); ++i) {
        lab.modality_values.push_back(
            detail::as_strings((*f)[i], at("labels.modality_values", i)));
      }
    }
  }
  return model;
}

std::string serialize_model(const GenerativeModel& model) {
  const auto& fs = model.states.factor_sizes();
  const auto& ms = model.observations.modality_sizes();
  const std::size_t n_states = model.num_states();
  const std::size_t n_actions = model.num_actions();

  json doc = json::object();
  doc["state_factors"] = fs;
  doc["obs_modalities"] = ms;
  doc["num_actions"] = n_actions;
  doc["horizon"] = model.horizon;

  json a = json::array();
  for (std::size_t m = 0; m < ms.size(); ++m) {
    json per_state = json::array();
    for (std::size_t s = 0; s < n_states; ++s) {
      auto first = model.A.tables[m].begin() + static_cast<std::ptrdiff_t>(s * ms[m]);
      per_state.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(ms[m])));
    }
    a.push_back(std::move(per_state));
  }
  doc["A"] = std::move(a);

  json b = json::array();
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const std::size_t n = fs[f];
    json per_action = json::array();
    for (std::size_t act = 0; act < n_actions; ++act) {
      json per_prev = json::array();
      for (std::size_t k = 0; k < n; ++k) {
        auto first = model.B.tables[f].begin() + static_cast<std::ptrdiff_t>((act * n + k) * n);
        per_prev.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
      }
      per_action.push_back(std::move(per_prev));
    }
    b.push_back(std::move(per_action));
  }
  doc["B"] = std::move(b);

  doc["C"] = model.C.values;
  doc["D"] = model.D.factors;
  doc["c_normalize"] = model.C.normalize;
  doc["c_space"] = model.C.space == PreferenceSpace::kLog ? "log" : "probability";
  if (!model.C.per_time.empty()) doc["C_t"] = model.C.per_time;
  if (!model.actions.labels.empty()) doc["action_labels"] = model.actions.labels;

  const auto& lab = model.labels;
  if (lab != ModelLabels{}) {
    json l = json::object();
    if (!lab.factor_names.empty()) l["factor_names"] = lab.factor_names;
    if (!lab.factor_values.empty()) l["factor_values"] = lab.factor_values;
    if (!lab.modality_names.empty()) l["modality_names"] = lab.modality_names;
    if (!lab.modality_values.empty()) l["modality_values"] = lab.modality_values;
    doc["labels"] = std::move(l);
  }
  return doc.dump(2) + "\n";
}

GenerativeModel load_model(const std::filesystem::path& path) {
  return parse_model(detail::read_file(path.string()));
}

void save_model(const GenerativeModel& model, const std::filesystem::path& path) {
  detail::write_file(path.string(), serialize_model(model));
}

}  // namespace aif
