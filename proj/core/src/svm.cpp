#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "permguard/error.hpp"
#include "permguard/learners.hpp"

namespace permguard::models {

void SparseRows::push_row(std::span<const std::uint32_t> active) {
  indices.insert(indices.end(), active.begin(), active.end());
  offsets.push_back(indices.size());
}

double BinarySvm::decision(std::span<const std::uint8_t> row) const {
  double s = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (row[j]) s += weights[j];
  }
  return s;
}

namespace {

bool feasible_start(const std::vector<double>& alpha, std::span<const int> y, double c_bound) {
  if (alpha.size() != y.size()) return false;
  double balance = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] >= 0.0 && alpha[i] <= c_bound)) return false;
    balance += y[i] > 0 ? alpha[i] : -alpha[i];
  }
  return std::fabs(balance) <= 1e-9 * c_bound * static_cast<double>(alpha.size());
}

}  // namespace

BinarySvm train_binary_svm(const SparseRows& x, std::span<const int> y, std::size_t dims, const SvmOptions& options,
                           std::vector<double>* dual) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw Error(Errc::InvalidArgument, "svm labels and rows differ in length");

  // Canonical row order: identical rows with identical labels are
  // interchangeable, so sorting makes training independent of input order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a), rb = x.row(b);
    if (y[a] != y[b]) return y[a] < y[b];
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return a < b;
  });

  // Binary features: a kernel entry is the popcount of two ANDed bitsets.
  const std::size_t words = dims / 64 + 1;
  std::vector<std::uint64_t> bits(n * words, 0);
  std::vector<double> yy(n), qd(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = x.row(order[k]);
    for (auto j : row) bits[k * words + j / 64] |= std::uint64_t{1} << (j % 64);
    yy[k] = y[order[k]] > 0 ? 1.0 : -1.0;
    qd[k] = static_cast<double>(row.size());
  }
  // Small problems keep the whole Gram matrix; counts fit in 16 bits.
  constexpr std::size_t kGramLimit = 8192;
  std::vector<std::uint16_t> gram;
  auto dot = [&](std::size_t a, std::size_t b) {
    int c = 0;
    for (std::size_t w = 0; w < words; ++w) c += std::popcount(bits[a * words + w] & bits[b * words + w]);
    return c;
  };
  if (n <= kGramLimit && dims < 65536) {
    gram.resize(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        gram[a * n + b] = gram[b * n + a] = static_cast<std::uint16_t>(dot(a, b));
      }
    }
  }
  auto q = [&](std::size_t i, std::size_t t) {
    const double k = gram.empty() ? dot(i, t) : gram[i * n + t];
    return yy[i] * yy[t] * k;
  };

  // SMO on the dual with an unregularized bias: G = Q alpha - 1.
  const double c_bound = options.cost;
  constexpr double kTau = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  if (dual && feasible_start(*dual, y, c_bound)) {
    for (std::size_t k = 0; k < n; ++k) alpha[k] = (*dual)[order[k]];
  }
  auto upper = [&](std::size_t t) { return alpha[t] >= c_bound; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  // exact gradient for every row, through the primal weights
  auto rebuild_gradient = [&] {
    std::vector<double> v(dims, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] == 0.0) continue;
      for (auto j : x.row(order[k])) v[j] += alpha[k] * yy[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      double wx = 0.0;
      for (auto j : x.row(order[k])) wx += v[j];
      grad[k] = yy[k] * wx - 1.0;
    }
  };
  rebuild_gradient();

  // Shrinking: rows stuck at a bound are dropped from the active set and
  // brought back, with a rebuilt gradient, before optimality is declared.
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  bool unshrunk = false;
  auto unshrink = [&] {
    rebuild_gradient();
    active.resize(n);
    std::iota(active.begin(), active.end(), 0);
  };
  auto shrink = [&] {
    double g1 = -kInf, g2 = -kInf;
    for (auto t : active) {
      if (yy[t] > 0) {
        if (!upper(t)) g1 = std::max(g1, -grad[t]);
        if (!lower(t)) g2 = std::max(g2, grad[t]);
      } else {
        if (!upper(t)) g2 = std::max(g2, -grad[t]);
        if (!lower(t)) g1 = std::max(g1, grad[t]);
      }
    }
    if (!unshrunk && g1 + g2 <= options.tolerance * 10.0) {
      unshrunk = true;
      unshrink();
    }
    auto removable = [&](std::size_t t) {
      if (upper(t)) return yy[t] > 0 ? -grad[t] > g1 : -grad[t] > g2;
      if (lower(t)) return yy[t] > 0 ? grad[t] > g2 : grad[t] > g1;
      return false;
    };
    std::erase_if(active, removable);
  };

  BinarySvm out;
  const std::size_t budget = std::max<std::size_t>(options.max_epochs, 1) * std::max<std::size_t>(n, 1);
  const std::size_t shrink_every = std::max<std::size_t>(std::min<std::size_t>(n, 1000), 1);
  std::size_t iter = 0, since_shrink = 0;
  while (iter < budget) {
    if (++since_shrink >= shrink_every) {
      since_shrink = 0;
      shrink();
    }

    // maximal violating i, then second-order choice of j
    double gmax = -kInf, gmax2 = -kInf, best = kInf;
    std::size_t i = n, j = n;
    for (auto t : active) {
      if (yy[t] > 0) {
        if (!upper(t) && -grad[t] > gmax) gmax = -grad[t], i = t;
      } else {
        if (!lower(t) && grad[t] > gmax) gmax = grad[t], i = t;
      }
    }
    if (i != n) {
      for (auto t : active) {
        double diff;
        if (yy[t] > 0) {
          if (lower(t)) continue;
          diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
        } else {
          if (upper(t)) continue;
          diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
        }
        if (diff <= 0.0) continue;
        double quad = qd[i] + qd[t] - 2.0 * yy[i] * yy[t] * q(i, t);
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj < best) best = obj, j = t;
      }
    }
    if (i == n || j == n || gmax + gmax2 < options.tolerance) {
      if (active.size() == n) {
        out.converged = true;
        break;
      }
      unshrink();
      continue;
    }

    const double ai = alpha[i], aj = alpha[j];
    const double qij = q(i, j);
    if (yy[i] != yy[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c_bound) alpha[i] = c_bound, alpha[j] = c_bound - diff;
      } else {
        if (alpha[j] > c_bound) alpha[j] = c_bound, alpha[i] = c_bound + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_bound) {
        if (alpha[i] > c_bound) alpha[i] = c_bound, alpha[j] = sum - c_bound;
        if (alpha[j] > c_bound) alpha[j] = c_bound, alpha[i] = sum - c_bound;
      } else {
        if (alpha[j] < 0.0) alpha[j] = 0.0, alpha[i] = sum;
        if (alpha[i] < 0.0) alpha[i] = 0.0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - ai, dj = alpha[j] - aj;
    for (auto t : active) grad[t] += q(i, t) * di + q(j, t) * dj;
    ++iter;
  }
  if (!out.converged) rebuild_gradient();

  // bias: mean over free vectors, else the midpoint of the feasible interval
  double ub = kInf, lb = -kInf, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yy[t] * grad[t];
    if (upper(t)) {
      if (yy[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (yy[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho;
  if (free_count) rho = free_sum / static_cast<double>(free_count);
  else if (ub == kInf) rho = lb;
  else if (lb == -kInf) rho = ub;
  else rho = (ub + lb) / 2.0;

  std::vector<double> w(dims, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] == 0.0) continue;
    for (auto j : x.row(order[k])) w[j] += alpha[k] * yy[k];
  }
  const double bias = n ? -rho : 0.0;

  double hinge = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double wx = bias;
    for (auto j : x.row(r)) wx += w[j];
    hinge += std::max(0.0, 1.0 - (y[r] > 0 ? 1.0 : -1.0) * wx);
  }
  double norm = 0.0;
  for (double v : w) norm += v * v;

  if (dual) {
    dual->assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) (*dual)[order[k]] = alpha[k];
  }
  out.weights = std::move(w);
  out.bias = bias;
  out.epochs = iter;
  out.primal_objective = 0.5 * norm + c_bound * hinge;
  return out;
}

}  // namespace permguard::models
