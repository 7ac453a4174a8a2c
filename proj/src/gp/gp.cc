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

#include "slicetune/gp/gp.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "slicetune/common/errors.h"

namespace slicetune {

namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr double kMaxJitter = 1e-4;

}  // namespace

double Matern52(double r, double lengthscale, double signal_var) {
  double a = kSqrt5 * r / lengthscale;
  return signal_var * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double GpModel::ScaleFor(double std) const {
  double s = std::max(std, hyper_.target_scale_floor);
  return s > 1e-12 ? s : 1.0;
}

void GpModel::Fit(std::vector<std::vector<double>> x, std::vector<double> y) {
  if (x.empty()) throw std::invalid_argument("GP fit needs at least one point");
  if (x.size() != y.size()) {
    throw std::invalid_argument("GP fit: inputs and targets differ in length");
  }
  if (hyper_.lengthscale <= 0 || hyper_.signal_var <= 0 || hyper_.noise_var < 0) {
    throw std::invalid_argument("GP hyperparameters must be positive");
  }
  const int d = static_cast<int>(x.front().size());
  if (d < 1) throw std::invalid_argument("GP inputs must have dimension >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd xm(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (static_cast<int>(x[j].size()) != d) {
      throw std::invalid_argument("GP fit: inconsistent input dimension");
    }
    for (int i = 0; i < d; ++i) {
      double v = x[j][i];
      if (!(v >= -1e-9 && v <= 1 + 1e-9)) {
        std::ostringstream os;
        os << "GP input " << j << " coordinate " << i << " = " << v
           << " is outside [0, 1]";
        throw RangeError(os.str());
      }
      xm(i, j) = v;
    }
    if (!std::isfinite(y[j])) throw std::invalid_argument("GP target is not finite");
  }

  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : y) var += (v - mean) * (v - mean);
  double scale = ScaleFor(std::sqrt(var / static_cast<double>(n)));

  Eigen::VectorXd t(n);
  for (Eigen::Index j = 0; j < n; ++j) t[j] = (y[j] - mean) / scale;

  dim_ = d;
  x_ = std::move(x);
  y_ = std::move(y);
  xm_ = std::move(xm);
  y_mean_ = mean;
  y_scale_ = scale;

  Eigen::MatrixXd k = KernelMatrix();
  k.diagonal().array() += hyper_.noise_var;
  jitter_ = 0;
  llt_.compute(k);
  for (double jit = 1e-10; llt_.info() != Eigen::Success; jit *= 10) {
    if (jit > kMaxJitter * 1.0000001) {
      throw NumericalError("GP kernel matrix is not positive definite after jitter 1e-4");
    }
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jit;
    llt_.compute(kj);
    jitter_ = jit;
  }
  alpha_ = llt_.solve(t);
}

Eigen::MatrixXd GpModel::KernelMatrix() const {
  const Eigen::Index n = xm_.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k(a, a) = hyper_.signal_var;
    for (Eigen::Index b = 0; b < a; ++b) {
      double r = (xm_.col(a) - xm_.col(b)).norm();
      k(a, b) = k(b, a) = Matern52(r, hyper_.lengthscale, hyper_.signal_var);
    }
  }
  return k;
}

Eigen::MatrixXd GpModel::CholeskyFactor() const {
  if (y_.empty()) return {};
  return llt_.matrixL();
}

GpModel::Prediction GpModel::Predict(const std::vector<double>& x) const {
  Eigen::MatrixXd col(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) col(i, 0) = x[i];
  return PredictBatch(col).front();
}

std::vector<GpModel::Prediction> GpModel::PredictBatch(const Eigen::MatrixXd& x) const {
  const Eigen::Index m = x.cols();
  std::vector<Prediction> out(m);
  if (y_.empty()) {
    double s = std::sqrt(hyper_.signal_var) * ScaleFor(0.0);
    for (auto& p : out) p = {0.0, s};
    return out;
  }
  if (x.rows() != dim_) throw std::invalid_argument("GP predict: wrong input dimension");
  const Eigen::Index n = xm_.cols();
  Eigen::MatrixXd ks(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index a = 0; a < n; ++a) {
      ks(a, j) = Matern52((xm_.col(a) - x.col(j)).norm(), hyper_.lengthscale,
                          hyper_.signal_var);
    }
  }
  Eigen::VectorXd mean = ks.transpose() * alpha_;
  llt_.matrixL().solveInPlace(ks);
  Eigen::VectorXd explained = ks.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    double var = std::max(hyper_.signal_var - explained[j], 0.0);
    out[j].mean = mean[j] * y_scale_ + y_mean_;
    out[j].std = std::sqrt(var) * y_scale_;
  }
  return out;
}

void GpModel::Save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["lengthscale"] = hyper_.lengthscale;
  j["signal_var"] = hyper_.signal_var;
  j["noise_var"] = hyper_.noise_var;
  j["target_scale_floor"] = hyper_.target_scale_floor;
  j["x"] = x_;
  j["y"] = y_;
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << j.dump(1) << "\n";
}

GpModel GpModel::Load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open GP checkpoint " + path.string());
  try {
    nlohmann::json j = nlohmann::json::parse(is);
    GpHyper h;
    h.lengthscale = j.at("lengthscale").get<double>();
    h.signal_var = j.at("signal_var").get<double>();
    h.noise_var = j.at("noise_var").get<double>();
    h.target_scale_floor = j.value("target_scale_floor", 0.0);
    GpModel m(h);
    auto x = j.at("x").get<std::vector<std::vector<double>>>();
    auto y = j.at("y").get<std::vector<double>>();
    if (!x.empty()) m.Fit(std::move(x), std::move(y));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed GP checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace slicetune
