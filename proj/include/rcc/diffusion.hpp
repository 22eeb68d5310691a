// Reverse-diffusion engine over a pluggable denoiser, with an exact
// linear-Gaussian reference denoiser.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcc/codebook.hpp"
#include "rcc/random.hpp"

namespace rcc {

/// Noise levels for S reverse steps. Level t runs over 0..S with
/// alpha_bar(0) = 1 (clean data) and alpha_bar strictly decreasing in t.
/// Reverse step t maps x_t to x_{t-1}; sigma(t) is the DDPM posterior std,
/// which is exactly 0 at t = 1.
class DiffusionSchedule {
 public:
  /// Levels 1..S as a strictly decreasing sequence in (0, 1].
  static DiffusionSchedule from_alpha_bars(std::vector<double> levels) {
    if (levels.empty()) throw std::invalid_argument("schedule: no levels");
    DiffusionSchedule s;
    s.alpha_bar_.reserve(levels.size() + 1);
    s.alpha_bar_.push_back(1.0);
    for (double a : levels) {
      if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("schedule: alpha_bar outside (0, 1]");
      if (a >= s.alpha_bar_.back() && s.alpha_bar_.size() > 1)
        throw std::invalid_argument("schedule: alpha_bar must be strictly decreasing");
      s.alpha_bar_.push_back(a);
    }
    s.sigma_.assign(s.alpha_bar_.size(), 0.0);
    for (std::size_t t = 1; t < s.alpha_bar_.size(); ++t) {
      const double ab = s.alpha_bar_[t];
      const double ab_prev = s.alpha_bar_[t - 1];
      const double beta = 1.0 - ab / ab_prev;
      s.sigma_[t] = ab < 1.0 ? std::sqrt((1.0 - ab_prev) / (1.0 - ab) * beta) : 0.0;
    }
    return s;
  }

  /// Linear-in-beta DDPM schedule (beta from 1e-4 to 0.02 over 1000 training
  /// steps) subsampled to `steps` evenly spaced levels. More than 1000 steps
  /// stretches the training grid and scales beta to keep the final level.
  static DiffusionSchedule linear(std::uint32_t steps, double beta_start = 1e-4, double beta_end = 0.02,
                                  std::uint32_t train_steps = 1000) {
    if (steps == 0) throw std::invalid_argument("schedule: need at least one step");
    const std::uint32_t L = std::max(train_steps, steps);
    const double scale = static_cast<double>(train_steps) / L;
    std::vector<double> cumulative(L + 1, 1.0);
    for (std::uint32_t j = 1; j <= L; ++j) {
      const double frac = L > 1 ? static_cast<double>(j - 1) / (L - 1) : 0.0;
      const double beta = scale * (beta_start + (beta_end - beta_start) * frac);
      cumulative[j] = cumulative[j - 1] * (1.0 - beta);
    }
    std::vector<double> levels;
    levels.reserve(steps);
    for (std::uint32_t t = 1; t <= steps; ++t) {
      const std::uint64_t tau = (static_cast<std::uint64_t>(t) * L + steps / 2) / steps;
      levels.push_back(cumulative[tau]);
    }
    return from_alpha_bars(std::move(levels));
  }

  std::uint32_t steps() const noexcept { return static_cast<std::uint32_t>(alpha_bar_.size() - 1); }
  double alpha_bar(std::uint32_t t) const { return alpha_bar_.at(t); }
  double sigma(std::uint32_t t) const {
    if (t == 0) throw std::out_of_range("schedule: sigma is defined for t >= 1");
    return sigma_.at(t);
  }

  /// Weights of the DDPM posterior mean  mu_t = a * x0_hat + b * x_t.
  double mean_coef_x0(std::uint32_t t) const {
    const double ab = alpha_bar(t);
    const double ab_prev = alpha_bar(t - 1);
    if (ab >= 1.0) return 1.0;
    return std::sqrt(ab_prev) * (1.0 - ab / ab_prev) / (1.0 - ab);
  }
  double mean_coef_xt(std::uint32_t t) const {
    const double ab = alpha_bar(t);
    const double ab_prev = alpha_bar(t - 1);
    if (ab >= 1.0) return 0.0;
    return std::sqrt(ab / ab_prev) * (1.0 - ab_prev) / (1.0 - ab);
  }

 private:
  std::vector<double> alpha_bar_;
  std::vector<double> sigma_;
};

/// A denoiser supplies the schedule and the MMSE estimate E[x0 | x_t].
template <class D>
concept Denoiser = requires(const D& d, std::span<const double> x, std::uint32_t t) {
  { d.dim() } -> std::convertible_to<std::size_t>;
  { d.schedule() } -> std::same_as<const DiffusionSchedule&>;
  { d.mmse_estimate(x, t) } -> std::same_as<std::vector<double>>;
};

struct GridPriorParams {
  double mean = 0.5;
  double amplitude = 0.2;     // marginal std before the nugget
  double length_scale = 6.0;  // squared-exponential correlation length, pixels
  double nugget = 1e-6;       // white variance added to every eigenvalue
};

/// Gaussian prior N(mean, Sigma) kept in the eigenbasis of Sigma. The grid
/// form uses a separable squared-exponential kernel, Sigma = amp^2 (K_h x K_w)
/// + nugget I, so the basis is a Kronecker product and never materialized.
class GaussianPrior {
 public:
  static GaussianPrior dense(std::vector<double> mean, const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || static_cast<std::size_t>(cov.rows()) != mean.size())
      throw std::invalid_argument("prior: covariance shape does not match mean");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("prior: covariance must be symmetric positive definite");
    GaussianPrior p;
    p.mean_ = std::move(mean);
    p.eigenvalues_ = eig.eigenvalues();
    p.rows_basis_ = eig.eigenvectors();
    return p;
  }

  static GaussianPrior grid(std::uint32_t height, std::uint32_t width, const GridPriorParams& params = {}) {
    if (height == 0 || width == 0) throw std::invalid_argument("prior: empty grid");
    if (!(params.amplitude > 0.0) || !(params.length_scale > 0.0) || !(params.nugget > 0.0))
      throw std::invalid_argument("prior: amplitude, length scale and nugget must be positive");
    auto kernel = [&](std::uint32_t n) {
      Eigen::MatrixXd k(n, n);
      for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b) {
          const double d = static_cast<double>(a) - static_cast<double>(b);
          k(a, b) = std::exp(-d * d / (2.0 * params.length_scale * params.length_scale));
        }
      return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k);
    };
    const auto eh = kernel(height);
    const auto ew = kernel(width);
    GaussianPrior p;
    p.grid_ = true;
    p.height_ = height;
    p.width_ = width;
    p.mean_.assign(static_cast<std::size_t>(height) * width, params.mean);
    p.rows_basis_ = eh.eigenvectors();
    p.cols_basis_ = ew.eigenvectors();
    p.eigenvalues_.resize(static_cast<Eigen::Index>(height) * width);
    const double amp2 = params.amplitude * params.amplitude;
    for (std::uint32_t i = 0; i < height; ++i)
      for (std::uint32_t j = 0; j < width; ++j) {
        // kernel eigenvalues can come out slightly negative in floating point
        const double lh = std::max(0.0, eh.eigenvalues()(i));
        const double lw = std::max(0.0, ew.eigenvalues()(j));
        p.eigenvalues_(static_cast<Eigen::Index>(i) * width + j) = amp2 * lh * lw + params.nugget;
      }
    return p;
  }

  std::size_t dim() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }

  Eigen::VectorXd to_eigenbasis(std::span<const double> x) const {
    check(x.size());
    if (!grid_) return rows_basis_.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> img(x.data(), height_, width_);
    RowMajor y = rows_basis_.transpose() * img * cols_basis_;
    return Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
  }

  std::vector<double> from_eigenbasis(const Eigen::VectorXd& y) const {
    check(static_cast<std::size_t>(y.size()));
    std::vector<double> out(dim());
    if (!grid_) {
      Eigen::Map<Eigen::VectorXd>(out.data(), out.size()) = rows_basis_ * y;
      return out;
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> coeffs(y.data(), height_, width_);
    Eigen::Map<RowMajor>(out.data(), height_, width_) = rows_basis_ * coeffs * cols_basis_.transpose();
    return out;
  }

  /// Draw from the prior using the portable normal stream keyed by `seed`.
  std::vector<double> sample(std::uint64_t seed) const {
    Eigen::VectorXd xi(static_cast<Eigen::Index>(dim()));
    const std::uint64_t key = hash_words(seed, 0x70726f72ULL);
    for (Eigen::Index i = 0; i < xi.size(); ++i)
      xi(i) = normal_at(key, static_cast<std::uint64_t>(i)) * std::sqrt(eigenvalues_(i));
    std::vector<double> x = from_eigenbasis(xi);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += mean_[i];
    return x;
  }

 private:
  void check(std::size_t n) const {
    if (n != dim()) throw std::invalid_argument("prior: vector length does not match dim");
  }

  bool grid_ = false;
  std::uint32_t height_ = 0;
  std::uint32_t width_ = 0;
  std::vector<double> mean_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd rows_basis_;  // dense basis, or the row-axis factor on a grid
  Eigen::MatrixXd cols_basis_;
};

/// Exact posterior-mean denoiser for x_t = sqrt(ab) x0 + sqrt(1 - ab) eps
/// under a Gaussian prior.
class GaussianDenoiser {
 public:
  GaussianDenoiser(GaussianPrior prior, DiffusionSchedule schedule)
      : prior_(std::move(prior)), schedule_(std::move(schedule)) {}

  std::size_t dim() const noexcept { return prior_.dim(); }
  const DiffusionSchedule& schedule() const noexcept { return schedule_; }
  const GaussianPrior& prior() const noexcept { return prior_; }

  /// m + sqrt(ab) Sigma (ab Sigma + (1 - ab) I)^-1 (x_t - sqrt(ab) m)
  std::vector<double> mmse_estimate(std::span<const double> x_t, std::uint32_t t) const {
    if (x_t.size() != dim()) throw std::invalid_argument("mmse_estimate: length does not match dim");
    const double ab = schedule_.alpha_bar(t);
    if (ab >= 1.0) return {x_t.begin(), x_t.end()};
    const double root = std::sqrt(ab);
    const auto& m = prior_.mean();
    std::vector<double> centered(dim());
    for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = x_t[i] - root * m[i];
    Eigen::VectorXd y = prior_.to_eigenbasis(centered);
    const auto& lambda = prior_.eigenvalues();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) *= root * lambda(i) / (ab * lambda(i) + (1.0 - ab));
    std::vector<double> out = prior_.from_eigenbasis(y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
    return out;
  }

 private:
  GaussianPrior prior_;
  DiffusionSchedule schedule_;
};

struct DiffusionState {
  std::uint32_t t = 0;
  std::vector<double> x;
};

/// mu_t(x_t), the DDPM posterior mean built on the denoiser's x0 estimate.
template <Denoiser D>
std::vector<double> posterior_mean(const D& model, std::span<const double> x_t, std::uint32_t t) {
  const auto& sched = model.schedule();
  const std::vector<double> x0_hat = model.mmse_estimate(x_t, t);
  const double a = sched.mean_coef_x0(t);
  const double b = sched.mean_coef_xt(t);
  std::vector<double> mu(x_t.size());
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = a * x0_hat[i] + b * x_t[i];
  return mu;
}

/// x_{t-1} = mu_t(x_t) + sigma_t * noise
template <Denoiser D>
DiffusionState reverse_step(const D& model, const DiffusionState& state, std::span<const double> noise) {
  if (state.t < 1 || state.t > model.schedule().steps())
    throw std::invalid_argument("reverse_step: timestep out of range");
  if (noise.size() != state.x.size() || state.x.size() != model.dim())
    throw std::invalid_argument("reverse_step: length does not match dim");
  DiffusionState next{state.t - 1, posterior_mean(model, state.x, state.t)};
  const double sigma = model.schedule().sigma(state.t);
  if (sigma != 0.0)
    for (std::size_t i = 0; i < next.x.size(); ++i) next.x[i] += sigma * noise[i];
  return next;
}

/// Deterministic (eta = 0) DDIM update; consumes no noise.
template <Denoiser D>
DiffusionState ddim_step(const D& model, const DiffusionState& state) {
  const auto& sched = model.schedule();
  if (state.t < 1 || state.t > sched.steps()) throw std::invalid_argument("ddim_step: timestep out of range");
  const std::vector<double> x0_hat = model.mmse_estimate(state.x, state.t);
  const double ab = sched.alpha_bar(state.t);
  const double ab_prev = sched.alpha_bar(state.t - 1);
  if (ab >= 1.0) return {state.t - 1, x0_hat};
  const double root = std::sqrt(ab);
  const double noise_scale = std::sqrt(1.0 - ab);
  DiffusionState next{state.t - 1, std::vector<double>(state.x.size())};
  for (std::size_t i = 0; i < next.x.size(); ++i) {
    const double eps_hat = (state.x[i] - root * x0_hat[i]) / noise_scale;
    next.x[i] = std::sqrt(ab_prev) * x0_hat[i] + std::sqrt(1.0 - ab_prev) * eps_hat;
  }
  return next;
}

/// argmax_k <atom(step, k), residual>; signed, ties to the smaller k.
template <AtomSource Atoms>
std::uint32_t ddcm_select(std::span<const double> residual, const Atoms& atoms, std::uint32_t step) {
  if (residual.size() != atoms.dim()) throw std::invalid_argument("ddcm_select: residual length != dim");
  std::vector<double> buf(atoms.dim());
  std::uint32_t best = 0;
  double best_corr = 0.0;
  for (std::uint32_t k = 0; k < atoms.size(); ++k) {
    atoms.fill_atom(step, k, buf);
    double c = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) c += buf[i] * residual[i];
    if (k == 0 || c > best_corr) {
      best = k;
      best_corr = c;
    }
  }
  return best;
}

}  // namespace rcc
