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

#include "slicetune/metrics/ledger.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "slicetune/common/errors.h"

namespace slicetune {

using nlohmann::json;

void RunLedger::Append(LedgerRow row) {
  ValidateRow(row);
  rows_.push_back(std::move(row));
}

void RunLedger::UpdateRegret(double usage, double qoe) {
  if (!reference_) {
    throw std::logic_error("regret update without a reference optimum");
  }
  usage_regret_ += usage - reference_->usage;
  qoe_regret_ += std::max(reference_->qoe - qoe, 0.0);
  usage_regret_series_.push_back(usage_regret_);
  qoe_regret_series_.push_back(qoe_regret_);
}

double RunLedger::AverageUsageRegret() const {
  if (usage_regret_series_.empty()) return 0;
  return usage_regret_ / static_cast<double>(usage_regret_series_.size());
}

double RunLedger::AverageQoeRegret() const {
  if (qoe_regret_series_.empty()) return 0;
  return qoe_regret_ / static_cast<double>(qoe_regret_series_.size());
}

namespace {

const std::set<std::string> kRequiredKeys = {
    "iter", "stage", "kind", "x_or_a", "usage", "qoe",
    "kl",   "lambda", "beta", "seed"};
const std::set<std::string> kOptionalKeys = {"traffic", "qoe_sim"};

json OptionalNumber(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> ReadOptional(const json& j, const char* key, int lineno) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) {
    throw FormatError("ledger line " + std::to_string(lineno) + ": key '" + key +
                      "' must be a number or null");
  }
  return v.get<double>();
}

}  // namespace

void ValidateRow(const LedgerRow& row) {
  if (row.kind != "offline" && row.kind != "online") {
    throw FormatError("ledger row kind must be offline|online, got '" + row.kind +
                      "'");
  }
  if (row.stage < 1 || row.stage > 3) {
    throw FormatError("ledger row stage must be 1, 2 or 3");
  }
  if (row.x_or_a.empty()) throw FormatError("ledger row has empty x_or_a");
  for (double v : row.x_or_a) {
    if (!std::isfinite(v)) throw FormatError("ledger row x_or_a is not finite");
  }
  auto check_unit = [](const std::optional<double>& v, const char* key) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
      throw FormatError(std::string("ledger row ") + key + " outside [0,1]");
    }
  };
  check_unit(row.usage, "usage");
  check_unit(row.qoe, "qoe");
  check_unit(row.qoe_sim, "qoe_sim");
  if (row.lambda && !(*row.lambda >= 0)) {
    throw FormatError("ledger row lambda is negative");
  }
  if (row.kl && !std::isfinite(*row.kl)) throw FormatError("ledger row kl not finite");
  if (row.beta && !(*row.beta >= 0)) throw FormatError("ledger row beta negative");
}

std::string SerializeRow(const LedgerRow& row) {
  ValidateRow(row);
  json j;
  j["iter"] = row.iter;
  j["stage"] = row.stage;
  j["kind"] = row.kind;
  j["x_or_a"] = row.x_or_a;
  j["usage"] = OptionalNumber(row.usage);
  j["qoe"] = OptionalNumber(row.qoe);
  j["kl"] = OptionalNumber(row.kl);
  j["lambda"] = OptionalNumber(row.lambda);
  j["beta"] = OptionalNumber(row.beta);
  j["seed"] = row.seed;
  if (row.traffic) j["traffic"] = *row.traffic;
  if (row.qoe_sim) j["qoe_sim"] = *row.qoe_sim;
  return j.dump();
}

LedgerRow ParseRow(const std::string& line, int lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError("ledger line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw FormatError("ledger line " + std::to_string(lineno) + ": not an object");
  }
  for (const auto& key : kRequiredKeys) {
    if (!j.contains(key)) {
      throw FormatError("ledger line " + std::to_string(lineno) +
                        ": missing key '" + key + "'");
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!kRequiredKeys.count(key) && !kOptionalKeys.count(key)) {
      throw FormatError("ledger line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }
  LedgerRow row;
  try {
    row.iter = j.at("iter").get<std::int64_t>();
    row.stage = j.at("stage").get<int>();
    row.kind = j.at("kind").get<std::string>();
    row.x_or_a = j.at("x_or_a").get<std::vector<double>>();
    row.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("traffic")) row.traffic = j.at("traffic").get<int>();
  } catch (const json::exception& e) {
    throw FormatError("ledger line " + std::to_string(lineno) + ": " + e.what());
  }
  row.usage = ReadOptional(j, "usage", lineno);
  row.qoe = ReadOptional(j, "qoe", lineno);
  row.kl = ReadOptional(j, "kl", lineno);
  row.lambda = ReadOptional(j, "lambda", lineno);
  row.beta = ReadOptional(j, "beta", lineno);
  if (j.contains("qoe_sim")) row.qoe_sim = ReadOptional(j, "qoe_sim", lineno);
  try {
    ValidateRow(row);
  } catch (const FormatError& e) {
    throw FormatError("ledger line " + std::to_string(lineno) + ": " + e.what());
  }
  return row;
}

void WriteLedger(std::ostream& os, const std::vector<LedgerRow>& rows) {
  for (const auto& r : rows) os << SerializeRow(r) << "\n";
}

std::vector<LedgerRow> ReadLedger(std::istream& is) {
  std::vector<LedgerRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(ParseRow(line, lineno));
  }
  return rows;
}

void SaveLedger(const std::filesystem::path& path,
                const std::vector<LedgerRow>& rows) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  WriteLedger(os, rows);
}

std::vector<LedgerRow> LoadLedger(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open ledger " + path.string());
  return ReadLedger(is);
}

}  // namespace slicetune
