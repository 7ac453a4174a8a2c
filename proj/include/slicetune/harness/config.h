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

#ifndef SLICETUNE_HARNESS_CONFIG_H_
#define SLICETUNE_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slicetune {

// Flat `key = value` file with dotted keys. '#' starts a comment; list values
// are comma separated. Every lookup error names the key and, when the key was
// present, the source and line it came from.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config Parse(std::istream& is, std::string source = "<config>");
  static Config Load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  bool Has(std::string_view key) const;
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

  // Replaces or adds a key (command-line and environment overrides).
  void Set(const std::string& key, std::string value);

  std::string GetString(std::string_view key) const;
  double GetDouble(std::string_view key) const;
  std::int64_t GetInt(std::string_view key) const;
  std::uint64_t GetUint(std::string_view key) const;
  bool GetBool(std::string_view key) const;
  std::vector<double> GetDoubleList(std::string_view key) const;
  std::vector<std::string> GetStringList(std::string_view key) const;

  // Lookups with a fallback when the key is absent.
  std::string GetString(std::string_view key, std::string fallback) const;
  double GetDouble(std::string_view key, double fallback) const;
  std::int64_t GetInt(std::string_view key, std::int64_t fallback) const;
  std::uint64_t GetUint(std::string_view key, std::uint64_t fallback) const;
  bool GetBool(std::string_view key, bool fallback) const;
  std::vector<double> GetDoubleList(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::string> GetStringList(std::string_view key,
                                         std::vector<std::string> fallback) const;

  // Throws ConfigError for the first key that is not in `known`.
  void CheckKnown(const std::vector<std::string_view>& known) const;
  // Throws ConfigError naming the first missing key.
  void CheckRequired(const std::vector<std::string_view>& required) const;

  void Write(std::ostream& os) const;

 private:
  const Entry& Lookup(std::string_view key) const;
  [[noreturn]] void Fail(std::string_view key, const std::string& what) const;

  std::string source_ = "<config>";
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace slicetune

#endif  // SLICETUNE_HARNESS_CONFIG_H_
