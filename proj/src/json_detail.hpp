#pragma once

// Helpers shared by the JSON readers. Not installed.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aif/errors.hpp"
#include "json.hpp"

namespace aif::detail {

using nlohmann::json;

json parse_document(std::string_view text, std::string_view what);

const json& require_field(const json& obj, const char* name);

std::size_t as_size(const json& value, const std::string& path);
int as_int(const json& value, const std::string& path);
double as_double(const json& value, const std::string& path);
bool as_bool(const json& value, const std::string& path);
std::vector<std::size_t> as_size_list(const json& value, const std::string& path);
std::vector<double> as_doubles(const json& value, const std::string& path,
                               std::size_t expected);
std::vector<std::string> as_strings(const json& value, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace aif::detail
