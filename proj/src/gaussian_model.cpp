#include "robustdet/gaussian_model.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "robustdet/errors.hpp"
#include "robustdet/random.hpp"

namespace robustdet {

struct ToeplitzGaussian::State {
  std::size_t n = 0;
  double sigma2 = 1.0;
  std::vector<double> autocov;
  std::string label;
  Eigen::MatrixXd lower;
  double logdet = 0.0;
  double jitter = 0.0;
  bool white = false;
  bool diagonal = false;  // lags >= 1 vanish to roundoff; L is a multiple of I
};

namespace {

Eigen::MatrixXd toeplitz(std::span<const double> first_row) {
  const auto n = static_cast<Eigen::Index>(first_row.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = first_row[static_cast<std::size_t>(std::abs(i - j))];
  }
  return m;
}

double logdet_from_lower(const Eigen::MatrixXd& l) {
  return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace

ToeplitzGaussian::ToeplitzGaussian(std::vector<double> autocov, double sigma2, std::string label) {
  if (autocov.empty()) fail(ErrorKind::argument, "model dimension must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorKind::domain, "sigma2 must be finite and > 0");
  auto s = std::make_shared<State>();
  s->n = autocov.size();
  s->sigma2 = sigma2;
  s->white = std::all_of(autocov.begin(), autocov.end(), [](double c) { return c == 0.0; });
  const double scale = sigma2 + std::abs(autocov.front());
  s->diagonal = autocov.front() >= 0.0 && std::all_of(autocov.begin() + 1, autocov.end(), [&](double c) {
    return std::abs(c) <= kDiagonalRoundoff * scale;
  });
  s->autocov = std::move(autocov);
  s->label = std::move(label);

  const auto n = static_cast<Eigen::Index>(s->n);
  if (s->diagonal) {
    const double var = sigma2 + s->autocov.front();
    s->lower = Eigen::MatrixXd::Identity(n, n) * std::sqrt(var);
    s->logdet = static_cast<double>(n) * std::log(var);
  } else {
    Eigen::MatrixXd cov = toeplitz(s->autocov);
    cov.diagonal().array() += sigma2;
    bool ok = false;
    for (double jitter : kJitterLadder) {
      Eigen::MatrixXd trial = cov;
      trial.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(trial);
      if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
        s->lower = llt.matrixL();
        s->jitter = jitter;
        ok = true;
        break;
      }
    }
    if (!ok) {
      fail(ErrorKind::not_positive_definite,
           "covariance of '" + s->label + "' is not positive definite after jitter escalation");
    }
    s->logdet = logdet_from_lower(s->lower);
  }
  state_ = std::move(s);
}

ToeplitzGaussian ToeplitzGaussian::white(double sigma2, std::size_t n) {
  return ToeplitzGaussian(std::vector<double>(n, 0.0), sigma2, "white");
}

std::size_t ToeplitzGaussian::n() const noexcept { return state_->n; }
double ToeplitzGaussian::sigma2() const noexcept { return state_->sigma2; }
std::span<const double> ToeplitzGaussian::autocov() const noexcept { return state_->autocov; }
const std::string& ToeplitzGaussian::label() const noexcept { return state_->label; }
double ToeplitzGaussian::logdet() const noexcept { return state_->logdet; }
double ToeplitzGaussian::jitter() const noexcept { return state_->jitter; }
bool ToeplitzGaussian::is_white() const noexcept { return state_->white; }
const Eigen::MatrixXd& ToeplitzGaussian::lower() const noexcept { return state_->lower; }

Eigen::MatrixXd ToeplitzGaussian::signal_covariance() const { return toeplitz(state_->autocov); }

Eigen::MatrixXd ToeplitzGaussian::covariance() const {
  Eigen::MatrixXd c = signal_covariance();
  c.diagonal().array() += state_->sigma2;
  return c;
}

Eigen::MatrixXd ToeplitzGaussian::inverse() const {
  const auto n = static_cast<Eigen::Index>(state_->n);
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
  solve_lower_in_place(linv);
  return linv.transpose() * linv;
}

void ToeplitzGaussian::solve_lower_in_place(Eigen::MatrixXd& x) const {
  if (state_->diagonal) {
    x /= state_->lower(0, 0);
    return;
  }
  state_->lower.triangularView<Eigen::Lower>().solveInPlace(x);
}

Eigen::MatrixXd ToeplitzGaussian::draw_columns(std::uint64_t stream, std::size_t first, std::size_t count) const {
  const auto n = static_cast<Eigen::Index>(state_->n);
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(count));
  for (std::size_t t = 0; t < count; ++t) {
    fill_standard_normal(stream, first + t,
                         std::span<double>(z.col(static_cast<Eigen::Index>(t)).data(), state_->n));
  }
  if (state_->diagonal) return z * state_->lower(0, 0);
  return state_->lower.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd ToeplitzGaussian::draw_columns(std::uint64_t stream, std::span<const std::size_t> trials) const {
  const auto n = static_cast<Eigen::Index>(state_->n);
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(trials.size()));
  for (std::size_t j = 0; j < trials.size(); ++j) {
    fill_standard_normal(stream, trials[j], std::span<double>(z.col(static_cast<Eigen::Index>(j)).data(), state_->n));
  }
  if (state_->diagonal) return z * state_->lower(0, 0);
  return state_->lower.triangularView<Eigen::Lower>() * z;
}

ToeplitzGaussian build_model(const PsdGrid& psd, double sigma2, std::size_t n) {
  if (n == 0) fail(ErrorKind::argument, "model dimension must be >= 1");
  return ToeplitzGaussian(autocovariance(psd, n - 1), sigma2, psd.label());
}

double gaussian_kl(const ToeplitzGaussian& p, const ToeplitzGaussian& q) {
  if (p.n() != q.n()) {
    fail(ErrorKind::argument, "dimension mismatch: " + std::to_string(p.n()) + " vs " + std::to_string(q.n()));
  }
  if (p.shares_state_with(q)) return 0.0;
  // tr(C_q^-1 C_p) = ||L_q^-1 L_p||_F^2
  Eigen::MatrixXd x = p.lower();
  q.solve_lower_in_place(x);
  const double trace = x.squaredNorm();
  const double n = static_cast<double>(p.n());
  return std::max(0.0, 0.5 * (trace - n + q.logdet() - p.logdet()));
}

RatioExpectation ratio_expectation(double p0_sigma2, const ToeplitzGaussian& p1, const ToeplitzGaussian& p2) {
  if (p1.n() != p2.n()) {
    fail(ErrorKind::argument, "dimension mismatch: " + std::to_string(p1.n()) + " vs " + std::to_string(p2.n()));
  }
  if (!(p0_sigma2 > 0.0)) fail(ErrorKind::domain, "sigma2 must be > 0");
  const auto n = static_cast<Eigen::Index>(p1.n());
  Eigen::MatrixXd middle = Eigen::MatrixXd::Identity(n, n);
  if (!p1.shares_state_with(p2)) {
    middle += p0_sigma2 * (p2.inverse() - p1.inverse());
    middle = 0.5 * (middle + middle.transpose()).eval();
  }

  RatioExpectation out;
  Eigen::MatrixXd shifted = middle;
  shifted.diagonal().array() -= kMiddleEigenFloor;
  Eigen::LLT<Eigen::MatrixXd> floor_check(shifted);
  Eigen::LLT<Eigen::MatrixXd> llt(middle);
  if (floor_check.info() != Eigen::Success || llt.info() != Eigen::Success ||
      !(llt.matrixLLT().diagonal().minCoeff() > 0.0)) {
    out.diverged = true;
    out.value = out.log_value = std::numeric_limits<double>::infinity();
    return out;
  }
  const double middle_logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.log_value = 0.5 * (p1.logdet() - p2.logdet() - middle_logdet);
  out.value = std::exp(out.log_value);
  return out;
}

bool finite_n_dominates(double p0_sigma2, const ToeplitzGaussian& p1, const ToeplitzGaussian& p2) {
  const auto r = ratio_expectation(p0_sigma2, p1, p2);
  return !r.diverged && r.value <= 1.0 + 1e-10;
}

Eigen::MatrixXd sample_gaussian(const ToeplitzGaussian& model, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  return model.draw_columns(seed, 0, trials).transpose();
}

}  // namespace robustdet
