#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <mutex>
#include <thread>

#include "gamenet/metrics.hpp"
#include "gamenet/rng.hpp"

namespace gamenet {

namespace {

double hurwitz_zeta(double s, double q) {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
  gsl_sf_result r;
  if (gsl_sf_hzeta_e(s, q, &r) != GSL_SUCCESS) return 0.0;
  return r.val;
}

double pow_neg(std::uint64_t x, double alpha) { return std::exp(-alpha * std::log(static_cast<double>(x))); }

// KS distance between the empirical tail and the fitted model. Both CDFs are
// step functions on the integers, so the supremum is attained at a data
// value or just before one.
double ks_distance(std::span<const std::uint64_t> tail, double alpha, std::uint64_t xmin) {
  const double norm = hurwitz_zeta(alpha, static_cast<double>(xmin));
  const double n = static_cast<double>(tail.size());
  double d = 0.0;
  std::size_t below = 0;
  std::uint64_t prev = 0;
  double zeta_prev_next = norm;  // zeta(alpha, prev + 1)
  for (std::size_t i = 0; i < tail.size();) {
    const std::uint64_t v = tail[i];
    std::size_t j = i;
    while (j < tail.size() && tail[j] == v) ++j;
    // zeta(alpha, v): step from the previous value when close, else direct.
    double zeta_v;
    if (i == 0) {
      zeta_v = hurwitz_zeta(alpha, static_cast<double>(v));
    } else if (v - prev <= 16) {
      zeta_v = zeta_prev_next;
      for (std::uint64_t x = prev + 1; x < v; ++x) zeta_v -= pow_neg(x, alpha);
    } else {
      zeta_v = hurwitz_zeta(alpha, static_cast<double>(v));
    }
    const double zeta_next = zeta_v - pow_neg(v, alpha);
    const double model_before = 1.0 - zeta_v / norm;  // P(X <= v - 1)
    const double model_at = 1.0 - zeta_next / norm;   // P(X <= v)
    d = std::max(d, std::abs(static_cast<double>(below) / n - model_before));
    below = j;
    d = std::max(d, std::abs(static_cast<double>(below) / n - model_at));
    prev = v;
    zeta_prev_next = zeta_next;
    i = j;
  }
  return d;
}

// Inverse-CDF sampler for the discrete power law on x >= xmin. A table of
// the CCDF covers the bulk; the far tail falls back to direct evaluation.
class PowerLawSampler {
 public:
  PowerLawSampler(double alpha, std::uint64_t xmin) : alpha_(alpha), xmin_(xmin) {
    norm_ = hurwitz_zeta(alpha, static_cast<double>(xmin));
    ccdf_.reserve(kTable + 1);
    double z = norm_;
    for (std::uint64_t k = 0; k <= kTable; ++k) {
      ccdf_.push_back(z / norm_);
      z -= pow_neg(xmin + k, alpha);
    }
  }

  std::uint64_t operator()(Rng& rng) const {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    if (u > ccdf_.back()) {
      // Largest k with ccdf_[k] >= u.
      auto it = std::upper_bound(ccdf_.begin(), ccdf_.end(), u, std::greater<>());
      return xmin_ + static_cast<std::uint64_t>(it - ccdf_.begin()) - 1;
    }
    const double approx =
        std::floor((static_cast<double>(xmin_) - 0.5) * std::pow(u, -1.0 / (alpha_ - 1.0)) + 0.5);
    std::uint64_t x = std::max<std::uint64_t>(xmin_ + kTable, approx > 1e15 ? std::uint64_t{1'000'000'000'000'000}
                                                                           : static_cast<std::uint64_t>(approx));
    auto ccdf = [&](std::uint64_t v) { return hurwitz_zeta(alpha_, static_cast<double>(v)) / norm_; };
    while (x > xmin_ + kTable && ccdf(x) < u) --x;
    while (ccdf(x + 1) >= u) ++x;
    return x;
  }

 private:
  static constexpr std::uint64_t kTable = 2048;
  double alpha_;
  std::uint64_t xmin_;
  double norm_;
  std::vector<double> ccdf_;
};

}  // namespace

double powerlaw_ccdf(double alpha, std::uint64_t xmin, std::uint64_t x) {
  if (x <= xmin) return 1.0;
  return hurwitz_zeta(alpha, static_cast<double>(x)) / hurwitz_zeta(alpha, static_cast<double>(xmin));
}

double discrete_alpha_mle(std::span<const std::uint64_t> tail, std::uint64_t xmin, const PowerLawOptions& options) {
  double log_sum = 0.0;
  for (auto x : tail) log_sum += std::log(static_cast<double>(x));
  const double n = static_cast<double>(tail.size());
  const double q = static_cast<double>(xmin);
  auto neg_loglik = [&](double a) { return n * std::log(hurwitz_zeta(a, q)) + a * log_sum; };
  const auto [alpha, value] =
      boost::math::tools::brent_find_minima(neg_loglik, options.alpha_min, options.alpha_max, 40);
  (void)value;
  return alpha;
}

std::optional<TailFit> fit_tail(std::span<const std::uint64_t> sorted, const PowerLawOptions& options) {
  std::optional<TailFit> best;
  for (std::size_t i = 0; i < sorted.size();) {
    const std::uint64_t xmin = sorted[i];
    const auto tail = sorted.subspan(i);
    if (tail.size() < options.min_tail) break;
    const double alpha = discrete_alpha_mle(tail, xmin, options);
    const double ks = ks_distance(tail, alpha, xmin);
    if (!best || ks < best->ks) best = TailFit{alpha, xmin, ks, tail.size()};
    while (i < sorted.size() && sorted[i] == xmin) ++i;
  }
  return best;
}

PowerLawFit powerlaw_fit(std::span<const std::size_t> degrees, const PowerLawOptions& options) {
  std::vector<std::uint64_t> data;
  data.reserve(degrees.size());
  for (auto d : degrees) {
    if (d > 0) data.push_back(d);
  }
  std::sort(data.begin(), data.end());

  PowerLawFit fit;
  const auto tail = fit_tail(data, options);
  if (!tail) {
    fit.tail_size = data.size();
    return fit;
  }
  fit.alpha = tail->alpha;
  fit.xmin = tail->xmin;
  fit.ks_stat = tail->ks;
  fit.tail_size = tail->tail_size;

  // Semi-parametric bootstrap: tail draws from the fitted model, the body
  // resampled from the observed values below xmin.
  const std::size_t n = data.size();
  const std::size_t body = n - tail->tail_size;
  const double p_tail = static_cast<double>(tail->tail_size) / static_cast<double>(n);
  const PowerLawSampler sampler(tail->alpha, tail->xmin);
  const std::size_t replicates = options.bootstrap;
  std::vector<char> exceeds(replicates, 0);

  auto run = [&](std::size_t r) {
    Rng rng(derive_seed(options.seed, r));
    std::vector<std::uint64_t> synth(n);
    for (auto& x : synth) {
      if (body == 0 || rng.uniform() < p_tail) {
        x = sampler(rng);
      } else {
        x = data[rng.below(body)];
      }
    }
    std::sort(synth.begin(), synth.end());
    const auto refit = fit_tail(synth, options);
    exceeds[r] = refit && refit->ks >= tail->ks;
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(replicates, 1));
  if (jobs == 1) {
    for (std::size_t r = 0; r < replicates; ++r) run(r);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < replicates; r += jobs) run(r);
      });
    }
  }

  if (replicates > 0) {
    const auto hits = static_cast<double>(std::count(exceeds.begin(), exceeds.end(), 1));
    fit.p_value = hits / static_cast<double>(replicates);
    fit.verdict = *fit.p_value >= options.p_threshold ? PowerLawVerdict::power_law : PowerLawVerdict::not_power_law;
  }
  return fit;
}

}  // namespace gamenet
