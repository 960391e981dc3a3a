#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "aif/model.hpp"

namespace aif {

// Model files are a single JSON document:
//   {state_factors, obs_modalities, num_actions, horizon,
//    A:[modality][joint_state][outcome], B:[factor][action][prev][next],
//    C:[modality][outcome], D:[factor][state], c_normalize}
// plus the optional fields c_space ("probability" | "log"), C_t
// ([step][modality][outcome]), action_labels and labels.
//
// Parsing errors raise ParseError with a line/column or field path; kernels
// whose shapes disagree with the declared spaces raise ShapeError.
GenerativeModel parse_model(std::string_view text);
std::string serialize_model(const GenerativeModel& model);

GenerativeModel load_model(const std::filesystem::path& path);
void save_model(const GenerativeModel& model, const std::filesystem::path& path);

}  // namespace aif
