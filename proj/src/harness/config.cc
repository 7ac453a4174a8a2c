// Copyright 2026 The slicetune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slicetune/harness/config.h"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "slicetune/common/errors.h"

namespace slicetune {
namespace {

std::string Trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

bool ValidKey(std::string_view key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  if (Trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  return out;
}

template <typename T>
bool ParseNumber(const std::string& s, T* out) {
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) return false;
    *out = v;
    return true;
  } else {
    auto r = std::from_chars(s.data(), s.data() + s.size(), *out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
  }
}

}  // namespace

Config Config::Parse(std::istream& is, std::string source) {
  Config cfg;
  cfg.source_ = std::move(source);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::ostringstream where;
    where << cfg.source_ << ":" << lineno << ": ";
    if (eq == std::string::npos) {
      throw ConfigError(where.str() + "expected `key = value`, got '" + line + "'");
    }
    std::string key = Trim(std::string_view(line).substr(0, eq));
    std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (!ValidKey(key)) throw ConfigError(where.str() + "invalid key '" + key + "'");
    if (auto it = cfg.entries_.find(key); it != cfg.entries_.end()) {
      throw ConfigError(where.str() + key + ": duplicate key (first set on line " +
                        std::to_string(it->second.line) + ")");
    }
    cfg.entries_.emplace(key, Entry{value, lineno});
  }
  return cfg;
}

Config Config::Load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return Parse(is, path.string());
}

bool Config::Has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void Config::Set(const std::string& key, std::string value) {
  if (!ValidKey(key)) throw ConfigError("invalid key '" + key + "'");
  entries_[key] = Entry{std::move(value), 0};
}

const Config::Entry& Config::Lookup(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError(source_ + ": missing required key '" + std::string(key) + "'");
  }
  return it->second;
}

void Config::Fail(std::string_view key, const std::string& what) const {
  auto it = entries_.find(key);
  std::ostringstream os;
  os << source_;
  if (it != entries_.end() && it->second.line > 0) os << ":" << it->second.line;
  os << ": " << key << ": " << what;
  throw ConfigError(os.str());
}

std::string Config::GetString(std::string_view key) const { return Lookup(key).value; }

double Config::GetDouble(std::string_view key) const {
  const auto& e = Lookup(key);
  double v = 0;
  if (!ParseNumber(e.value, &v)) Fail(key, "expected a number, got '" + e.value + "'");
  return v;
}

std::int64_t Config::GetInt(std::string_view key) const {
  const auto& e = Lookup(key);
  std::int64_t v = 0;
  if (!ParseNumber(e.value, &v)) Fail(key, "expected an integer, got '" + e.value + "'");
  return v;
}

std::uint64_t Config::GetUint(std::string_view key) const {
  const auto& e = Lookup(key);
  std::uint64_t v = 0;
  if (!ParseNumber(e.value, &v)) {
    Fail(key, "expected a non-negative integer, got '" + e.value + "'");
  }
  return v;
}

bool Config::GetBool(std::string_view key) const {
  const auto& e = Lookup(key);
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  Fail(key, "expected true or false, got '" + e.value + "'");
}

std::vector<double> Config::GetDoubleList(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : SplitList(Lookup(key).value)) {
    double v = 0;
    if (!ParseNumber(item, &v)) Fail(key, "expected a list of numbers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::GetStringList(std::string_view key) const {
  return SplitList(Lookup(key).value);
}

std::string Config::GetString(std::string_view key, std::string fallback) const {
  return Has(key) ? GetString(key) : fallback;
}
double Config::GetDouble(std::string_view key, double fallback) const {
  return Has(key) ? GetDouble(key) : fallback;
}
std::int64_t Config::GetInt(std::string_view key, std::int64_t fallback) const {
  return Has(key) ? GetInt(key) : fallback;
}
std::uint64_t Config::GetUint(std::string_view key, std::uint64_t fallback) const {
  return Has(key) ? GetUint(key) : fallback;
}
bool Config::GetBool(std::string_view key, bool fallback) const {
  return Has(key) ? GetBool(key) : fallback;
}
std::vector<double> Config::GetDoubleList(std::string_view key,
                                          std::vector<double> fallback) const {
  return Has(key) ? GetDoubleList(key) : fallback;
}
std::vector<std::string> Config::GetStringList(std::string_view key,
                                               std::vector<std::string> fallback) const {
  return Has(key) ? GetStringList(key) : fallback;
}

void Config::CheckKnown(const std::vector<std::string_view>& known) const {
  for (const auto& [key, entry] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      Fail(key, "unknown key");
    }
  }
}

void Config::CheckRequired(const std::vector<std::string_view>& required) const {
  for (auto key : required) Lookup(key);
}

void Config::Write(std::ostream& os) const {
  for (const auto& [key, entry] : entries_) os << key << " = " << entry.value << "\n";
}

}  // namespace slicetune
