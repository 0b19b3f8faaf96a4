// Copyright 2026 The TCGP Authors.
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

#include "tcgp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tcgp/errors.hpp"
#include "tcgp/rng.hpp"

namespace tcgp::gp {

Eigen::MatrixXd JitteredCholesky(
    Eigen::Index n, const std::function<void(Eigen::MatrixXd&)>& fill,
    double* jitter_used, bool regularized) {
  Eigen::MatrixXd a(n, n);
  // A matrix that already carries a noise term is tried bare first, so the
  // jitter does not bias well-posed fits.
  for (double jitter = regularized ? 0.0 : kInitialJitter;
       jitter <= kMaxJitter * 1.0000001;
       jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0) {
    fill(a);
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      a.triangularView<Eigen::StrictlyUpper>().setZero();
      return a;
    }
  }
  throw NumericalError("Gram matrix is not positive definite even with " +
                       std::to_string(kMaxJitter) + " diagonal jitter");
}

ObservationSet::ObservationSet(double noise_sigma) : noise_sigma_(noise_sigma) {
  if (!(noise_sigma > 0.0)) throw InputError("noise_sigma must be > 0");
}

void ObservationSet::Append(const Context& x, const Eigen::Vector2d& outcome) {
  if (!contexts_.empty() && contexts_.front().size() != x.size())
    throw InputError("observation context dimension mismatch");
  contexts_.push_back(x);
  outcomes_.push_back(outcome);
}

namespace {

struct Collapsed {
  std::vector<Context> points;
  std::vector<double> counts;
  std::vector<Eigen::Vector2d> sums;
};

Collapsed Collapse(const ObservationSet& obs) {
  Collapsed c;
  std::map<std::vector<double>, int> index;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Context& x = obs.contexts()[i];
    std::vector<double> key(x.data(), x.data() + x.size());
    auto [it, inserted] = index.emplace(std::move(key), 0);
    if (inserted) {
      it->second = static_cast<int>(c.points.size());
      c.points.push_back(x);
      c.counts.push_back(0.0);
      c.sums.push_back(Eigen::Vector2d::Zero());
    }
    c.counts[it->second] += 1.0;
    c.sums[it->second] += obs.outcomes()[i];
  }
  return c;
}

Eigen::VectorXd SolveLower(const Eigen::MatrixXd& l, const Eigen::VectorXd& b) {
  return l.triangularView<Eigen::Lower>().solve(b);
}

Eigen::VectorXd SolveCholesky(const Eigen::MatrixXd& l,
                              const Eigen::VectorXd& b) {
  Eigen::VectorXd y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

std::vector<std::vector<int>> BlockLayout(const TwoOutputKernelSpec& k) {
  if (k.Independent()) return {{0}, {1}};
  return {{0, 1}};
}

}  // namespace

const Context& PosteriorState::ItemPoint(const Block& b, int item) const {
  const int p = b.item_point[item];
  return mode_ == PosteriorMode::kSparse ? inducing_[p] : unique_[p];
}

Eigen::VectorXd PosteriorState::CrossVector(const Block& b, const Context& x,
                                            int output) const {
  const Eigen::Index n = static_cast<Eigen::Index>(b.item_point.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index a = 0; a < n; ++a)
    k[a] = kernel_(x, ItemPoint(b, static_cast<int>(a)), output,
                   b.item_output[a]);
  return k;
}

void PosteriorState::PosteriorTerms(const Block& b, const Context& x,
                                    int output, Eigen::VectorXd* v,
                                    Eigen::VectorXd* w) const {
  *v = SolveLower(b.chol, CrossVector(b, x, output));
  if (mode_ == PosteriorMode::kSparse) *w = SolveLower(b.chol_b, *v);
}

Prediction PosteriorState::Predict(const Context& x) const {
  Prediction p;
  for (int j = 0; j < 2; ++j) {
    const double prior_var = kernel_(x, x, j, j);
    if (blocks_.empty()) {
      p.mean[j] = prior_mean_;
      p.std[j] = std::sqrt(prior_var);
      continue;
    }
    const Block& b = blocks_[block_of_output_[j]];
    Eigen::VectorXd v, w;
    PosteriorTerms(b, x, j, &v, &w);
    double var = prior_var - v.squaredNorm();
    p.mean[j] = prior_mean_ + v.dot(b.weights);
    if (mode_ == PosteriorMode::kSparse) var += w.squaredNorm();
    p.std[j] = std::sqrt(std::clamp(var, 0.0, prior_var));
  }
  return p;
}

Eigen::MatrixXd PosteriorState::JointCovariance(
    std::span<const Context> queries) const {
  const Eigen::Index q = static_cast<Eigen::Index>(queries.size());
  Eigen::MatrixXd cov(2 * q, 2 * q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index c = 0; c < q; ++c)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          cov(2 * a + i, 2 * c + j) = kernel_(queries[a], queries[c], i, j);
  if (blocks_.empty()) return cov;

  std::vector<Eigen::VectorXd> v(2 * q), w(2 * q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (int j = 0; j < 2; ++j)
      PosteriorTerms(blocks_[block_of_output_[j]], queries[a], j,
                     &v[2 * a + j], &w[2 * a + j]);
  for (Eigen::Index r = 0; r < 2 * q; ++r) {
    for (Eigen::Index c = 0; c < 2 * q; ++c) {
      if (block_of_output_[r % 2] != block_of_output_[c % 2]) continue;
      double d = -v[r].dot(v[c]);
      if (mode_ == PosteriorMode::kSparse) d += w[r].dot(w[c]);
      cov(r, c) += d;
    }
  }
  return cov;
}

Eigen::MatrixXd PosteriorState::OutputCovariance(
    std::span<const Context> queries, int output) const {
  const Eigen::Index q = static_cast<Eigen::Index>(queries.size());
  Eigen::MatrixXd cov(q, q);
  std::vector<Eigen::VectorXd> v(q), w(q);
  if (!blocks_.empty())
    for (Eigen::Index a = 0; a < q; ++a)
      PosteriorTerms(blocks_[block_of_output_[output]], queries[a], output,
                     &v[a], &w[a]);
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index c = 0; c < q; ++c) {
      double k = kernel_(queries[a], queries[c], output, output);
      if (!blocks_.empty()) {
        k -= v[a].dot(v[c]);
        if (mode_ == PosteriorMode::kSparse) k += w[a].dot(w[c]);
      }
      cov(a, c) = k;
    }
  }
  return cov;
}

PosteriorState FitExactPosterior(const ObservationSet& obs,
                                 const TwoOutputKernelSpec& kernel,
                                 double prior_mean) {
  kernel.ValidateOrThrow();
  PosteriorState st;
  st.mode_ = PosteriorMode::kExact;
  st.kernel_ = kernel;
  st.noise_sigma_ = obs.noise_sigma();
  st.prior_mean_ = prior_mean;
  st.observation_count_ = obs.size();
  if (obs.empty()) return st;

  Collapsed data = Collapse(obs);
  st.unique_ = std::move(data.points);
  const double noise_var = obs.noise_sigma() * obs.noise_sigma();

  const auto layout = BlockLayout(kernel);
  for (std::size_t bi = 0; bi < layout.size(); ++bi) {
    PosteriorState::Block b;
    b.outputs = layout[bi];
    for (int j : b.outputs) st.block_of_output_[j] = static_cast<int>(bi);
    for (std::size_t p = 0; p < st.unique_.size(); ++p)
      for (int j : b.outputs) {
        b.item_point.push_back(static_cast<int>(p));
        b.item_output.push_back(j);
      }
    const Eigen::Index n = static_cast<Eigen::Index>(b.item_point.size());
    Eigen::VectorXd target(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const int p = b.item_point[a];
      target[a] = data.sums[p][b.item_output[a]] / data.counts[p] - prior_mean;
    }
    b.chol = JitteredCholesky(n, [&](Eigen::MatrixXd& m) {
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index c = 0; c <= a; ++c) {
          m(a, c) = m(c, a) =
              kernel(st.unique_[b.item_point[a]], st.unique_[b.item_point[c]],
                     b.item_output[a], b.item_output[c]);
        }
        m(a, a) += noise_var / data.counts[b.item_point[a]];
      }
    }, nullptr, true);
    // Whitened: mean = (L^{-1} k) . (L^{-1} y).
    b.weights = SolveLower(b.chol, target);
    st.blocks_.push_back(std::move(b));
  }
  return st;
}

PosteriorState FitSparsePosterior(const ObservationSet& obs,
                                  const TwoOutputKernelSpec& kernel, int s,
                                  std::uint64_t seed, double prior_mean) {
  if (s < 1) throw InputError("number of inducing points must be >= 1");
  kernel.ValidateOrThrow();
  Collapsed data = Collapse(obs);
  if (static_cast<std::size_t>(s) >= data.points.size()) {
    PosteriorState st = FitExactPosterior(obs, kernel, prior_mean);
    st.fell_back_ = true;
    st.inducing_ = st.unique_;
    return st;
  }

  PosteriorState st;
  st.mode_ = PosteriorMode::kSparse;
  st.kernel_ = kernel;
  st.noise_sigma_ = obs.noise_sigma();
  st.prior_mean_ = prior_mean;
  st.observation_count_ = obs.size();

  std::vector<int> order(data.points.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed);
  for (int i = 0; i < s; ++i) {  // partial Fisher-Yates
    std::uniform_int_distribution<int> pick(i, static_cast<int>(order.size()) - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  for (int i = 0; i < s; ++i) st.inducing_.push_back(data.points[order[i]]);

  const double inv_noise = 1.0 / (obs.noise_sigma() * obs.noise_sigma());
  const auto layout = BlockLayout(kernel);
  for (std::size_t bi = 0; bi < layout.size(); ++bi) {
    PosteriorState::Block b;
    b.outputs = layout[bi];
    for (int j : b.outputs) st.block_of_output_[j] = static_cast<int>(bi);
    for (int z = 0; z < s; ++z)
      for (int j : b.outputs) {
        b.item_point.push_back(z);
        b.item_output.push_back(j);
      }
    const Eigen::Index m = static_cast<Eigen::Index>(b.item_point.size());
    b.chol = JitteredCholesky(m, [&](Eigen::MatrixXd& k) {
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index c = 0; c <= a; ++c)
          k(a, c) = k(c, a) =
              kernel(st.inducing_[b.item_point[a]],
                     st.inducing_[b.item_point[c]], b.item_output[a],
                     b.item_output[c]);
    });

    // phi = Lu^{-1} K_uf over collapsed data items, weighted by counts.
    const Eigen::Index nd =
        static_cast<Eigen::Index>(data.points.size() * b.outputs.size());
    Eigen::MatrixXd kuf(m, nd);
    Eigen::VectorXd counts(nd), resid(nd);
    Eigen::Index col = 0;
    for (std::size_t p = 0; p < data.points.size(); ++p) {
      for (int j : b.outputs) {
        for (Eigen::Index a = 0; a < m; ++a)
          kuf(a, col) = kernel(st.inducing_[b.item_point[a]], data.points[p],
                               b.item_output[a], j);
        counts[col] = data.counts[p];
        resid[col] = data.sums[p][j] - data.counts[p] * prior_mean;
        ++col;
      }
    }
    const Eigen::MatrixXd phi = b.chol.triangularView<Eigen::Lower>().solve(kuf);
    const Eigen::MatrixXd scaled = phi * counts.cwiseSqrt().asDiagonal();
    b.chol_b = JitteredCholesky(m, [&](Eigen::MatrixXd& bm) {
      bm = Eigen::MatrixXd::Identity(m, m);
      bm.noalias() += inv_noise * scaled * scaled.transpose();
    }, nullptr, true);
    b.weights = SolveCholesky(b.chol_b, inv_noise * (phi * resid));
    st.blocks_.push_back(std::move(b));
  }
  return st;
}

std::vector<Eigen::Vector2d> SamplePriorFunction(
    const TwoOutputKernelSpec& kernel, std::span<const Context> contexts,
    std::uint64_t seed) {
  if (contexts.empty()) throw InputError("contexts must be nonempty");
  kernel.ValidateOrThrow();
  const Eigen::Index n = static_cast<Eigen::Index>(contexts.size());
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = normal(rng);

  auto shape_chol = [&](const KernelSpec& spec, double scale) {
    return JitteredCholesky(n, [&](Eigen::MatrixXd& m) {
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index c = 0; c <= a; ++c)
          m(a, c) = m(c, a) = spec(contexts[a], contexts[c]) * scale;
    });
  };

  Eigen::MatrixXd f(n, 2);
  if (kernel.Independent()) {
    const KernelSpec& k0 = kernel.output[0];
    const KernelSpec& k1 = kernel.output[1];
    Eigen::MatrixXd l0 = shape_chol(k0, 1.0);
    f.col(0) = l0.triangularView<Eigen::Lower>() * z.col(0);
    if (k0.SameShape(k1) && k0.variance == k1.variance) {
      f.col(1) = l0.triangularView<Eigen::Lower>() * z.col(1);
    } else {
      l0.resize(0, 0);
      Eigen::MatrixXd l1 = shape_chol(k1, 1.0);
      f.col(1) = l1.triangularView<Eigen::Lower>() * z.col(1);
    }
  } else {
    // Coregionalized: Cov = B (x) C, so F = L_C Z L_B^T.
    const double v0 = kernel.output[0].variance;
    const double v1 = kernel.output[1].variance;
    const double rho = kernel.cross_correlation;
    Eigen::Matrix2d lb;
    lb << 1.0, 0.0, rho, std::sqrt(std::max(0.0, 1.0 - rho * rho));
    lb.row(0) *= std::sqrt(v0);
    lb.row(1) *= std::sqrt(v1);
    Eigen::MatrixXd lc = shape_chol(kernel.output[0], 1.0 / v0);
    f = (lc.triangularView<Eigen::Lower>() * z) * lb.transpose();
  }
  std::vector<Eigen::Vector2d> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = f.row(i).transpose();
  return out;
}

}  // namespace tcgp::gp
