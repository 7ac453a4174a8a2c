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

#include "slicetune/bnn/bnn.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "slicetune/common/errors.h"
#include "slicetune/common/rng.h"

namespace slicetune {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr char kMagic[8] = {'S', 'L', 'T', 'B', 'N', 'N', '0', '1'};

double InverseSoftplus(double s) { return std::log(std::expm1(s)); }

Eigen::ArrayXd Softplus(const Eigen::ArrayXd& r) {
  return (r > 30.0).select(r, r.min(30.0).exp().log1p());
}

// Box-Muller in single precision over a splitmix64 counter stream. Weight
// noise does not need double precision and this is several times faster than
// std::normal_distribution for the ~10^5 draws a weight sample needs.
void FillStandardNormal(std::uint64_t seed, Eigen::VectorXd* out) {
  const Eigen::Index n = out->size();
  const Eigen::Index half = (n + 1) / 2;
  Eigen::ArrayXf u1(half), u2(half);
  constexpr float kScale = 1.0f / 16777216.0f;  // 2^-24
  std::uint64_t state = seed;
  for (Eigen::Index i = 0; i < half; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t bits = Mix64(state);
    u1[i] = (static_cast<float>(bits >> 40) + 1.0f) * kScale;  // (0, 1]
    u2[i] = static_cast<float>((bits >> 8) & 0xFFFFFF) * kScale;
  }
  Eigen::ArrayXf r = (-2.0f * u1.log()).sqrt();
  Eigen::ArrayXf theta = static_cast<float>(2.0 * M_PI) * u2;
  Eigen::ArrayXf a = r * theta.cos();
  Eigen::ArrayXf b = r * theta.sin();
  for (Eigen::Index i = 0; i < half; ++i) {
    (*out)[2 * i] = a[i];
    if (2 * i + 1 < n) (*out)[2 * i + 1] = b[i];
  }
}

}  // namespace

BnnModel::BnnModel(int input_dim, BnnConfig config, std::uint64_t seed)
    : input_dim_(input_dim), config_(std::move(config)) {
  if (input_dim < 1) throw std::invalid_argument("BNN input_dim must be >= 1");
  for (int h : config_.hidden) {
    if (h < 1) throw std::invalid_argument("BNN hidden widths must be >= 1");
  }
  BuildLayout();
  Rng rng(seed);
  mu_.resize(rho_.size());
  for (const auto& layer : layers_) {
    double bound = 1.0 / std::sqrt(static_cast<double>(layer.cols));
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(layer.rows) * layer.cols; ++i) {
      mu_[layer.w_offset + i] = uni(rng);
    }
    for (int i = 0; i < layer.rows; ++i) mu_[layer.b_offset + i] = uni(rng);
  }
  rho_.setConstant(InverseSoftplus(config_.init_sigma));
  sigma_ = Softplus(rho_.array()).matrix();
  lr_ = config_.learning_rate;
}

void BnnModel::BuildLayout() {
  widths_.clear();
  widths_.push_back(input_dim_);
  for (int h : config_.hidden) widths_.push_back(h);
  widths_.push_back(1);
  layers_.clear();
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    LayerView v;
    v.rows = widths_[l + 1];
    v.cols = widths_[l];
    v.w_offset = offset;
    offset += static_cast<Eigen::Index>(v.rows) * v.cols;
    v.b_offset = offset;
    offset += v.rows;
    layers_.push_back(v);
  }
  rho_.resize(offset);
  x_mean_ = Eigen::VectorXd::Zero(input_dim_);
  x_std_ = Eigen::VectorXd::Ones(input_dim_);
}


void BnnModel::SetParams(Eigen::VectorXd mu, Eigen::VectorXd rho) {
  if (mu.size() != mu_.size() || rho.size() != rho_.size()) {
    throw std::invalid_argument("BNN parameter vector has the wrong size");
  }
  mu_ = std::move(mu);
  rho_ = std::move(rho);
  sigma_ = Softplus(rho_.array()).matrix();
}

void BnnModel::FreezeNormalization(const std::vector<Sample>& data) {
  if (normalized_) return;
  if (data.empty()) throw std::invalid_argument("BNN normalization on empty data");
  const double n = static_cast<double>(data.size());
  x_mean_.setZero();
  x_std_.setZero();
  y_mean_ = 0;
  for (const auto& s : data) {
    if (static_cast<int>(s.x.size()) != input_dim_) {
      throw std::invalid_argument("BNN sample has the wrong input dimension");
    }
    for (int i = 0; i < input_dim_; ++i) x_mean_[i] += s.x[i];
    y_mean_ += s.y;
  }
  x_mean_ /= n;
  y_mean_ /= n;
  double y_var = 0;
  for (const auto& s : data) {
    for (int i = 0; i < input_dim_; ++i) {
      double d = s.x[i] - x_mean_[i];
      x_std_[i] += d * d;
    }
    y_var += (s.y - y_mean_) * (s.y - y_mean_);
  }
  for (int i = 0; i < input_dim_; ++i) {
    double sd = std::sqrt(x_std_[i] / n);
    x_std_[i] = sd > 1e-12 ? sd : 1.0;
  }
  double y_sd = std::sqrt(y_var / n);
  y_std_ = y_sd > 1e-12 ? y_sd : 1.0;
  normalized_ = true;
}

Eigen::VectorXd BnnModel::NormalizeInput(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != input_dim_) {
    throw std::invalid_argument("BNN input has the wrong dimension");
  }
  Eigen::VectorXd z(input_dim_);
  for (int i = 0; i < input_dim_; ++i) z[i] = (x[i] - x_mean_[i]) / x_std_[i];
  return z;
}

std::vector<double> BnnModel::DenormalizeInput(const Eigen::VectorXd& z) const {
  std::vector<double> x(input_dim_);
  for (int i = 0; i < input_dim_; ++i) x[i] = z[i] * x_std_[i] + x_mean_[i];
  return x;
}

Eigen::MatrixXd BnnModel::NormalizeBatch(
    const std::vector<std::vector<double>>& xs) const {
  Eigen::MatrixXd z(input_dim_, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) z.col(j) = NormalizeInput(xs[j]);
  return z;
}

Eigen::VectorXd BnnModel::SampleWeights(std::uint64_t seed) const {
  Eigen::VectorXd eps(mu_.size());
  FillStandardNormal(Mix64(seed), &eps);
  return mu_ + sigma_.cwiseProduct(eps);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> BnnModel::Forward(
    const Eigen::VectorXd& weights,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z) const {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Mat h = z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Mat w = Eigen::Map<const Eigen::MatrixXd>(weights.data() + layer.w_offset,
                                              layer.rows, layer.cols)
                .template cast<Scalar>();
    Vec b = weights.segment(layer.b_offset, layer.rows).template cast<Scalar>();
    Mat a = w * h;
    a.colwise() += b;
    if (l + 1 < layers_.size()) a = a.cwiseMax(Scalar(0));
    h = std::move(a);
  }
  return h.row(0);
}

double BnnModel::PredictMean(const std::vector<double>& x) const {
  Eigen::MatrixXd z = NormalizeInput(x);
  return DenormalizeTarget(Forward<double>(mu_, z)(0));
}

std::vector<double> BnnModel::PredictMeanBatch(
    const std::vector<std::vector<double>>& xs) const {
  if (xs.empty()) return {};
  Eigen::RowVectorXd out = Forward<double>(mu_, NormalizeBatch(xs));
  std::vector<double> y(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) y[i] = DenormalizeTarget(out[i]);
  return y;
}

std::vector<double> BnnModel::ThompsonPredict(
    const std::vector<std::vector<double>>& xs, std::uint64_t draw_seed) const {
  if (xs.empty()) return {};
  Eigen::VectorXd w = SampleWeights(draw_seed);
  Eigen::RowVectorXd out = Forward<double>(w, NormalizeBatch(xs));
  std::vector<double> y(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) y[i] = DenormalizeTarget(out[i]);
  return y;
}

std::vector<double> BnnModel::ThompsonPredictNormalized(const Eigen::MatrixXd& z,
                                                        std::uint64_t draw_seed) const {
  Eigen::VectorXd w = SampleWeights(draw_seed);
  std::vector<Eigen::MatrixXf> ws;
  std::vector<Eigen::VectorXf> bs;
  for (const auto& layer : layers_) {
    ws.push_back(Eigen::Map<const Eigen::MatrixXd>(w.data() + layer.w_offset, layer.rows,
                                                   layer.cols)
                     .cast<float>());
    bs.push_back(w.segment(layer.b_offset, layer.rows).cast<float>());
  }
  // Column blocks keep the activations cache-resident.
  constexpr Eigen::Index kBlock = 512;
  std::vector<double> y(z.cols());
  Eigen::MatrixXf h, a;
  for (Eigen::Index c0 = 0; c0 < z.cols(); c0 += kBlock) {
    const Eigen::Index nc = std::min(kBlock, z.cols() - c0);
    h = z.middleCols(c0, nc).cast<float>();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      a.noalias() = ws[l] * h;
      a.colwise() += bs[l];
      if (l + 1 < layers_.size()) a = a.cwiseMax(0.0f);
      std::swap(a, h);
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      y[c0 + i] = DenormalizeTarget(static_cast<double>(h(0, i)));
    }
  }
  return y;
}

BnnModel::Posterior BnnModel::PosteriorAt(const std::vector<double>& x, int n_mc,
                                          std::uint64_t seed) const {
  return PosteriorBatch({x}, n_mc, seed).front();
}

std::vector<BnnModel::Posterior> BnnModel::PosteriorBatch(
    const std::vector<std::vector<double>>& xs, int n_mc, std::uint64_t seed) const {
  if (n_mc < 2) throw std::invalid_argument("BNN posterior needs n_mc >= 2");
  if (xs.empty()) return {};
  Eigen::MatrixXd z = NormalizeBatch(xs);
  const Eigen::Index n = z.cols();
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd m2 = Eigen::ArrayXd::Zero(n);
  for (int k = 0; k < n_mc; ++k) {
    Eigen::VectorXd w = SampleWeights(SubSeed(seed, static_cast<std::uint64_t>(k)));
    Eigen::ArrayXd f = Forward<double>(w, z).transpose().array() * y_std_ + y_mean_;
    Eigen::ArrayXd delta = f - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (f - mean);
  }
  std::vector<Posterior> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i].mean = mean[i];
    out[i].std = std::sqrt(std::max(m2[i] / static_cast<double>(n_mc - 1), 0.0));
  }
  return out;
}

double BnnModel::LossAndGradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& eps, double kl_scale,
                                 Eigen::VectorXd* grad_mu,
                                 Eigen::VectorXd* grad_rho) const {
  const Eigen::Index batch = x.cols();
  const Eigen::VectorXd& sigma = sigma_;
  const Eigen::VectorXd w = mu_ + sigma.cwiseProduct(eps);

  // Forward pass keeping activations for the backward pass.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    Eigen::Map<const Eigen::MatrixXd> wl(w.data() + layer.w_offset, layer.rows,
                                         layer.cols);
    Eigen::MatrixXd a = wl * acts.back();
    a.colwise() += w.segment(layer.b_offset, layer.rows);
    if (l + 1 < layers_.size()) a = a.cwiseMax(0.0);
    acts.push_back(std::move(a));
  }

  const double lik_var = config_.likelihood_sigma * config_.likelihood_sigma;
  Eigen::RowVectorXd resid = acts.back().row(0) - y.transpose();
  double nll = resid.squaredNorm() / (2 * lik_var) +
               static_cast<double>(batch) *
                   (std::log(config_.likelihood_sigma) + kHalfLog2Pi);

  const double prior_var = config_.prior_sigma * config_.prior_sigma;
  const double n_w = static_cast<double>(w.size());
  double log_q = -sigma.array().log().sum() - 0.5 * eps.squaredNorm() - n_w * kHalfLog2Pi;
  double log_p = -n_w * (std::log(config_.prior_sigma) + kHalfLog2Pi) -
                 w.squaredNorm() / (2 * prior_var);
  double loss = kl_scale * (log_q - log_p) + nll;

  if (grad_mu == nullptr && grad_rho == nullptr) return loss;

  // Backward pass: data-term gradient with respect to the sampled weights.
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(w.size());
  Eigen::MatrixXd delta = resid / lik_var;  // 1 x batch
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    Eigen::Map<Eigen::MatrixXd> gwl(gw.data() + layer.w_offset, layer.rows,
                                    layer.cols);
    gwl.noalias() = delta * acts[l].transpose();
    gw.segment(layer.b_offset, layer.rows) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> wl(w.data() + layer.w_offset, layer.rows,
                                           layer.cols);
      Eigen::MatrixXd back = wl.transpose() * delta;
      delta = (acts[l].array() > 0).select(back, 0.0);
    }
  }

  // Reparameterized gradients of kl_scale * (log q - log p) + nll, where
  // w = mu + sigma * eps. d(log q)/d(mu) vanishes and d(log q)/d(sigma) is
  // -1/sigma once the path through w is included.
  Eigen::ArrayXd prior_term = w.array() / prior_var;
  Eigen::ArrayXd g_mu = gw.array() + kl_scale * prior_term;
  Eigen::ArrayXd g_sigma = gw.array() * eps.array() +
                           kl_scale * (-1.0 / sigma.array() + prior_term * eps.array());
  if (grad_mu) *grad_mu = g_mu.matrix();
  if (grad_rho) {
    *grad_rho = (g_sigma / (1.0 + (-rho_.array()).exp())).matrix();
  }
  return loss;
}

TrainReport BnnModel::Train(const std::vector<Sample>& data, int epochs,
                            std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("BNN training on an empty dataset");
  int per_epoch = static_cast<int>((data.size() + config_.batch_size - 1) /
                                   config_.batch_size);
  return RunSteps(data, epochs * per_epoch, per_epoch, seed);
}

TrainReport BnnModel::TrainSteps(const std::vector<Sample>& data, int steps,
                                 std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("BNN training on an empty dataset");
  int per_epoch = static_cast<int>((data.size() + config_.batch_size - 1) /
                                   config_.batch_size);
  return RunSteps(data, steps, per_epoch, seed);
}

TrainReport BnnModel::RunSteps(const std::vector<Sample>& data, int steps,
                               int steps_per_epoch, std::uint64_t seed) {
  FreezeNormalization(data);
  if (acc_grad_.size() != mu_.size() * 2) {
    acc_grad_ = Eigen::VectorXd::Zero(mu_.size() * 2);
    acc_delta_ = Eigen::VectorXd::Zero(mu_.size() * 2);
    step_count_ = 0;
    if (lr_ == 0) lr_ = config_.learning_rate;
  }

  const std::size_t n = data.size();
  Eigen::MatrixXd xs(input_dim_, static_cast<Eigen::Index>(n));
  Eigen::VectorXd ys(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    xs.col(i) = NormalizeInput(data[i].x);
    ys[i] = NormalizeTarget(data[i].y);
  }

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // forces a shuffle on the first step

  const double decay_per_step =
      std::pow(config_.lr_decay, 1.0 / std::max(steps_per_epoch, 1));
  TrainReport report;
  double epoch_loss = 0;
  int epoch_steps = 0;

  Eigen::VectorXd eps(mu_.size());
  Eigen::VectorXd g_mu, g_rho;
  Eigen::VectorXd grad(mu_.size() * 2);
  for (int step = 0; step < steps; ++step) {
    if (cursor >= n) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    std::size_t bsz = std::min<std::size_t>(config_.batch_size, n - cursor);
    Eigen::MatrixXd xb(input_dim_, static_cast<Eigen::Index>(bsz));
    Eigen::VectorXd yb(static_cast<Eigen::Index>(bsz));
    for (std::size_t j = 0; j < bsz; ++j) {
      xb.col(j) = xs.col(order[cursor + j]);
      yb[j] = ys[order[cursor + j]];
    }
    cursor += bsz;

    FillStandardNormal(rng(), &eps);
    double kl_scale = config_.kl_weight * static_cast<double>(bsz) / static_cast<double>(n);
    double loss = LossAndGradient(xb, yb, eps, kl_scale, &g_mu, &g_rho);
    double inv_b = 1.0 / static_cast<double>(bsz);
    loss *= inv_b;
    if (!std::isfinite(loss) || !g_mu.allFinite() || !g_rho.allFinite()) {
      std::ostringstream os;
      os << "BNN loss became non-finite at step " << step_count_ << " (loss=" << loss
         << ", max|mu|=" << mu_.cwiseAbs().maxCoeff()
         << ", min sigma=" << sigma_.minCoeff() << ")";
      throw NumericalError(os.str());
    }
    grad << g_mu * inv_b, g_rho * inv_b;

    ++step_count_;
    if (config_.optimizer == BnnOptimizer::kAdadelta) {
      constexpr double kRho = 0.9;
      constexpr double kEps = 1e-6;
      acc_grad_ = kRho * acc_grad_ + (1 - kRho) * grad.cwiseAbs2();
      Eigen::VectorXd delta = ((acc_delta_.array() + kEps).sqrt() /
                               (acc_grad_.array() + kEps).sqrt() * grad.array())
                                  .matrix();
      acc_delta_ = kRho * acc_delta_ + (1 - kRho) * delta.cwiseAbs2();
      mu_ -= lr_ * delta.head(mu_.size());
      rho_ -= lr_ * delta.tail(rho_.size());
    } else {
      constexpr double kB1 = 0.9;
      constexpr double kB2 = 0.999;
      constexpr double kEps = 1e-8;
      acc_grad_ = kB1 * acc_grad_ + (1 - kB1) * grad;
      acc_delta_ = kB2 * acc_delta_ + (1 - kB2) * grad.cwiseAbs2();
      double c1 = 1 - std::pow(kB1, static_cast<double>(step_count_));
      double c2 = 1 - std::pow(kB2, static_cast<double>(step_count_));
      Eigen::VectorXd delta = ((acc_grad_.array() / c1) /
                               ((acc_delta_.array() / c2).sqrt() + kEps))
                                  .matrix();
      mu_ -= lr_ * delta.head(mu_.size());
      rho_ -= lr_ * delta.tail(rho_.size());
    }
    sigma_ = Softplus(rho_.array()).matrix();
    lr_ *= decay_per_step;

    epoch_loss += loss;
    if (++epoch_steps == steps_per_epoch) {
      report.epoch_loss.push_back(epoch_loss / epoch_steps);
      epoch_loss = 0;
      epoch_steps = 0;
    }
  }
  if (epoch_steps > 0) report.epoch_loss.push_back(epoch_loss / epoch_steps);
  return report;
}

namespace {

template <typename T>
void WritePod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError("truncated BNN checkpoint");
  return v;
}

void WriteVector(std::ostream& os, const Eigen::VectorXd& v) {
  WritePod<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd ReadVector(std::istream& is) {
  auto n = ReadPod<std::uint64_t>(is);
  if (n > (1ULL << 32)) throw FormatError("corrupt BNN checkpoint vector length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw FormatError("truncated BNN checkpoint");
  return v;
}

}  // namespace

void BnnModel::Save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  WritePod<std::int32_t>(os, input_dim_);
  WritePod<std::int32_t>(os, static_cast<std::int32_t>(config_.hidden.size()));
  for (int h : config_.hidden) WritePod<std::int32_t>(os, h);
  WritePod<double>(os, config_.prior_sigma);
  WritePod<double>(os, config_.likelihood_sigma);
  WritePod<double>(os, config_.init_sigma);
  WritePod<double>(os, config_.kl_weight);
  WritePod<std::int32_t>(os, static_cast<std::int32_t>(config_.optimizer));
  WritePod<double>(os, config_.learning_rate);
  WritePod<double>(os, config_.lr_decay);
  WritePod<std::int32_t>(os, config_.batch_size);
  WritePod<std::uint8_t>(os, normalized_ ? 1 : 0);
  WriteVector(os, x_mean_);
  WriteVector(os, x_std_);
  WritePod<double>(os, y_mean_);
  WritePod<double>(os, y_std_);
  WriteVector(os, mu_);
  WriteVector(os, rho_);
}

BnnModel BnnModel::Load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open BNN checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + " is not a BNN checkpoint (bad magic)");
  }
  BnnModel m;
  m.input_dim_ = ReadPod<std::int32_t>(is);
  auto n_hidden = ReadPod<std::int32_t>(is);
  if (m.input_dim_ < 1 || n_hidden < 0 || n_hidden > 64) {
    throw FormatError("corrupt BNN checkpoint header");
  }
  m.config_.hidden.resize(n_hidden);
  for (auto& h : m.config_.hidden) h = ReadPod<std::int32_t>(is);
  m.config_.prior_sigma = ReadPod<double>(is);
  m.config_.likelihood_sigma = ReadPod<double>(is);
  m.config_.init_sigma = ReadPod<double>(is);
  m.config_.kl_weight = ReadPod<double>(is);
  m.config_.optimizer = static_cast<BnnOptimizer>(ReadPod<std::int32_t>(is));
  m.config_.learning_rate = ReadPod<double>(is);
  m.config_.lr_decay = ReadPod<double>(is);
  m.config_.batch_size = ReadPod<std::int32_t>(is);
  m.BuildLayout();
  m.normalized_ = ReadPod<std::uint8_t>(is) != 0;
  m.x_mean_ = ReadVector(is);
  m.x_std_ = ReadVector(is);
  m.y_mean_ = ReadPod<double>(is);
  m.y_std_ = ReadPod<double>(is);
  m.mu_ = ReadVector(is);
  m.rho_ = ReadVector(is);
  if (m.mu_.size() != m.rho_.size() || m.x_mean_.size() != m.input_dim_ ||
      m.x_std_.size() != m.input_dim_) {
    throw FormatError("BNN checkpoint sizes do not match its layout");
  }
  Eigen::Index expected = 0;
  for (const auto& l : m.layers_) expected += static_cast<Eigen::Index>(l.rows) * l.cols + l.rows;
  if (m.mu_.size() != expected) {
    throw FormatError("BNN checkpoint parameter count does not match widths");
  }
  m.sigma_ = Softplus(m.rho_.array()).matrix();
  m.lr_ = m.config_.learning_rate;
  return m;
}

bool BnnModel::operator==(const BnnModel& other) const {
  return input_dim_ == other.input_dim_ && widths_ == other.widths_ &&
         mu_ == other.mu_ && rho_ == other.rho_ &&
         normalized_ == other.normalized_ && x_mean_ == other.x_mean_ &&
         x_std_ == other.x_std_ && y_mean_ == other.y_mean_ &&
         y_std_ == other.y_std_;
}

}  // namespace slicetune
