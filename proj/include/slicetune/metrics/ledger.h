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

#ifndef SLICETUNE_METRICS_LEDGER_H_
#define SLICETUNE_METRICS_LEDGER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slicetune/sim/types.h"

namespace slicetune {

// One line of a run ledger. Fields that do not apply to a stage are empty
// and serialize as null.
struct LedgerRow {
  std::int64_t iter = 0;
  int stage = 0;
  std::string kind;  // "offline" | "online"
  std::vector<double> x_or_a;
  std::optional<double> usage;
  std::optional<double> qoe;
  std::optional<double> kl;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::uint64_t seed = 0;
  // Optional extras: query traffic level and the simulator QoE at the same
  // action (online rows).
  std::optional<int> traffic;
  std::optional<double> qoe_sim;

  bool operator==(const LedgerRow&) const = default;
};

// Oracle-optimal policy phi* used as the regret reference.
struct ReferenceOptimum {
  ConfigAction action;
  double usage = 0;  // F(phi*)
  double qoe = 0;    // Q(phi*)
};

class RunLedger {
 public:
  void Append(LedgerRow row);
  const std::vector<LedgerRow>& rows() const { return rows_; }

  void SetReference(const ReferenceOptimum& ref) { reference_ = ref; }
  const std::optional<ReferenceOptimum>& reference() const { return reference_; }

  // g_u += usage - F(phi*); g_p += max(Q(phi*) - qoe, 0). Throws
  // std::logic_error when no reference optimum is set.
  void UpdateRegret(double usage, double qoe);

  double usage_regret() const { return usage_regret_; }
  double qoe_regret() const { return qoe_regret_; }
  std::size_t regret_steps() const { return usage_regret_series_.size(); }
  double AverageUsageRegret() const;
  double AverageQoeRegret() const;
  // Cumulative regrets after every update.
  const std::vector<double>& usage_regret_series() const {
    return usage_regret_series_;
  }
  const std::vector<double>& qoe_regret_series() const { return qoe_regret_series_; }

 private:
  std::vector<LedgerRow> rows_;
  std::optional<ReferenceOptimum> reference_;
  double usage_regret_ = 0;
  double qoe_regret_ = 0;
  std::vector<double> usage_regret_series_;
  std::vector<double> qoe_regret_series_;
};

// JSON Lines, one row per line:
//   {iter, stage, kind, x_or_a:[...], usage, qoe, kl, lambda, beta, seed}
// plus optional traffic and qoe_sim. Rows are validated on both write and
// read; violations throw FormatError naming the line and key.
std::string SerializeRow(const LedgerRow& row);
LedgerRow ParseRow(const std::string& line, int lineno = 0);
void ValidateRow(const LedgerRow& row);

void WriteLedger(std::ostream& os, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> ReadLedger(std::istream& is);
void SaveLedger(const std::filesystem::path& path, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> LoadLedger(const std::filesystem::path& path);

}  // namespace slicetune

#endif  // SLICETUNE_METRICS_LEDGER_H_
