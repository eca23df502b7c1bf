#include <algorithm>
#include <cmath>
#include <numeric>

#include "permguard/error.hpp"
#include "permguard/learners.hpp"

namespace permguard::models {
namespace {

std::vector<std::size_t> layer_offsets(const std::vector<std::size_t>& widths) {
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    offsets.push_back(at);
    at += widths[l] * widths[l + 1] + widths[l + 1];
  }
  offsets.push_back(at);
  return offsets;
}

}  // namespace

MlpNetwork::MlpNetwork(std::size_t inputs, std::vector<std::size_t> hidden, std::size_t classes, Rng& rng)
    : classes_(classes) {
  if (classes < 2) throw Error(Errc::InvalidArgument, "network needs at least two classes");
  widths_.push_back(inputs);
  widths_.insert(widths_.end(), hidden.begin(), hidden.end());
  widths_.push_back(classes == 2 ? 1 : classes);
  offsets_ = layer_offsets(widths_);
  params_.assign(offsets_.back(), 0.0);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double fan_in = static_cast<double>(widths_[l]);
    const double fan_out = static_cast<double>(widths_[l + 1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t count = widths_[l] * widths_[l + 1];
    for (std::size_t k = 0; k < count; ++k) params_[weight_offset(l) + k] = rng.uniform(-limit, limit);
  }
}

MlpNetwork MlpNetwork::restore(std::vector<std::size_t> widths, std::size_t classes, std::vector<double> params) {
  if (widths.size() < 2 || classes < 2 || widths.back() != (classes == 2 ? 1 : classes)) {
    throw Error(Errc::SchemaViolation, "network widths do not match the class count");
  }
  MlpNetwork net;
  net.widths_ = std::move(widths);
  net.classes_ = classes;
  net.offsets_ = layer_offsets(net.widths_);
  if (params.size() != net.offsets_.back()) throw Error(Errc::SchemaViolation, "network parameter count mismatch");
  net.params_ = std::move(params);
  return net;
}

std::vector<std::vector<double>> MlpNetwork::forward(std::span<const std::uint8_t> row) const {
  const std::size_t layers = widths_.size() - 1;
  std::vector<std::vector<double>> acts(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    auto& z = acts[l];
    z.assign(b, b + out);
    if (l == 0) {
      for (std::size_t j = 0; j < in; ++j) {
        if (!row[j]) continue;
        for (std::size_t k = 0; k < out; ++k) z[k] += w[k * in + j];
      }
    } else {
      const auto& a = acts[l - 1];
      for (std::size_t k = 0; k < out; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < in; ++j) s += w[k * in + j] * a[j];
        z[k] += s;
      }
    }
    if (l + 1 < layers) {
      for (auto& v : z) v = std::max(v, 0.0);
    }
  }
  return acts;
}

std::vector<double> MlpNetwork::probabilities(std::span<const std::uint8_t> row) const {
  if (row.size() != inputs()) throw Error(Errc::DimensionMismatch, "row width differs from network input width");
  const auto acts = forward(row);
  const auto& logits = acts.back();
  if (classes_ == 2) {
    const double p = 1.0 / (1.0 + std::exp(-logits[0]));
    return {1.0 - p, p};
  }
  std::vector<double> p(logits);
  const double m = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& v : p) total += (v = std::exp(v - m));
  for (auto& v : p) v /= total;
  return p;
}

void MlpNetwork::accumulate_gradient(std::span<const std::uint8_t> row, int target, std::vector<double>& grad,
                                     double& loss) const {
  const std::size_t layers = widths_.size() - 1;
  const auto acts = forward(row);
  const auto& logits = acts.back();

  std::vector<double> delta(logits.size());
  if (classes_ == 2) {
    const double z = logits[0];
    const double t = target == 1 ? 1.0 : 0.0;
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
    delta[0] = 1.0 / (1.0 + std::exp(-z)) - t;
  } else {
    const double m = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) total += std::exp(logits[c] - m);
    const double log_total = m + std::log(total);
    loss += log_total - logits[static_cast<std::size_t>(target)];
    for (std::size_t c = 0; c < logits.size(); ++c) {
      delta[c] = std::exp(logits[c] - log_total) - (static_cast<int>(c) == target ? 1.0 : 0.0);
    }
  }

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    double* gw = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    for (std::size_t k = 0; k < out; ++k) gb[k] += delta[k];
    if (l == 0) {
      for (std::size_t j = 0; j < in; ++j) {
        if (!row[j]) continue;
        for (std::size_t k = 0; k < out; ++k) gw[k * in + j] += delta[k];
      }
      break;
    }
    const auto& a = acts[l - 1];
    const double* w = params_.data() + weight_offset(l);
    std::vector<double> prev(in, 0.0);
    for (std::size_t k = 0; k < out; ++k) {
      for (std::size_t j = 0; j < in; ++j) {
        gw[k * in + j] += delta[k] * a[j];
        prev[j] += w[k * in + j] * delta[k];
      }
    }
    for (std::size_t j = 0; j < in; ++j) {
      if (a[j] <= 0.0) prev[j] = 0.0;
    }
    delta = std::move(prev);
  }
}

double MlpNetwork::loss(const TrainingView& data, std::span<const std::size_t> rows) const {
  std::vector<double> scratch(params_.size());
  double total = 0.0;
  for (auto r : rows) {
    // cheap enough; keeps one code path for loss and gradient
    std::fill(scratch.begin(), scratch.end(), 0.0);
    accumulate_gradient(data.row(r), data.y[r], scratch, total);
  }
  return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

std::vector<double> MlpNetwork::gradient(const TrainingView& data, std::span<const std::size_t> rows) const {
  std::vector<double> grad(params_.size(), 0.0);
  double ignored = 0.0;
  for (auto r : rows) accumulate_gradient(data.row(r), data.y[r], grad, ignored);
  if (!rows.empty()) {
    for (auto& g : grad) g /= static_cast<double>(rows.size());
  }
  return grad;
}

double MlpNetwork::train(const TrainingView& data, std::size_t epochs, std::size_t batch_size, double learning_rate,
                         MlpOptimizer optimizer, Rng& rng) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<double> m, v;
  if (optimizer == MlpOptimizer::Adam) {
    m.assign(params_.size(), 0.0);
    v.assign(params_.size(), 0.0);
  }
  double beta1_t = 1.0, beta2_t = 1.0;
  std::vector<std::size_t> order(data.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(params_.size());
  double epoch_loss = 0.0;
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(std::span<std::size_t>(order));
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) accumulate_gradient(data.row(order[k]), data.y[order[k]], grad, epoch_loss);
      const double inv = 1.0 / static_cast<double>(end - start);
      if (optimizer == MlpOptimizer::Sgd) {
        for (std::size_t p = 0; p < params_.size(); ++p) params_[p] -= learning_rate * inv * grad[p];
        continue;
      }
      beta1_t *= kBeta1;
      beta2_t *= kBeta2;
      const double step = learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
      for (std::size_t p = 0; p < params_.size(); ++p) {
        const double g = grad[p] * inv;
        m[p] = kBeta1 * m[p] + (1.0 - kBeta1) * g;
        v[p] = kBeta2 * v[p] + (1.0 - kBeta2) * g * g;
        params_[p] -= step * m[p] / (std::sqrt(v[p]) + kEps);
      }
    }
  }
  std::vector<std::size_t> all(data.rows);
  std::iota(all.begin(), all.end(), 0);
  return loss(data, all);
}

}  // namespace permguard::models
