#include "molte/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "molte/error.hpp"
#include "molte/rng.hpp"

namespace molte {

double offline_oc(const Eigen::VectorXd& mu, std::size_t recommendation) {
  if (recommendation >= static_cast<std::size_t>(mu.size())) throw InvalidArgument("recommendation out of range");
  return mu.maxCoeff() - mu(static_cast<Eigen::Index>(recommendation));
}

double pseudo_regret(const Eigen::VectorXd& mu, std::span<const std::size_t> decisions) {
  double sum = 0.0;
  for (std::size_t x : decisions) {
    if (x >= static_cast<std::size_t>(mu.size())) throw InvalidArgument("decision out of range");
    sum += mu(static_cast<Eigen::Index>(x));
  }
  return static_cast<double>(decisions.size()) * mu.maxCoeff() - sum;
}

std::vector<EpisodeRecord> episode_records(std::span<const TrialResult> trials) {
  std::vector<EpisodeRecord> out;
  for (const TrialResult& t : trials) {
    for (std::size_t truth = 0; truth < t.truths.size(); ++truth) {
      const TruthRecord& tr = t.truths[truth];
      for (std::size_t k = 0; k < t.episodes.size(); ++k) {
        const EpisodeResult& e = t.episodes[k][truth];
        out.push_back({t.trial_index, truth, k, e.objective, e.oc, e.recommendation,
                       tr.mu(static_cast<Eigen::Index>(e.recommendation)) == tr.mu_max, tr.mu_max, tr.mu_min,
                       tr.budget});
      }
    }
  }
  return out;
}

namespace {

void check_shape(std::span<const EpisodeRecord> records, std::size_t policies, std::size_t trials,
                 std::size_t truths) {
  if (policies == 0 || trials == 0 || truths == 0) throw InvalidArgument("empty comparison table");
  if (records.size() != policies * trials * truths) throw InvalidArgument("comparison table is incomplete");
}

// Records are laid out trial-major, then truth, then policy.
const EpisodeRecord& at(std::span<const EpisodeRecord> records, std::size_t policies, std::size_t truths,
                        std::size_t trial, std::size_t truth, std::size_t policy) {
  return records[(trial * truths + truth) * policies + policy];
}

}  // namespace

WinProbabilities win_probabilities(std::span<const EpisodeRecord> records, std::size_t policies, std::size_t trials,
                                   std::size_t truths) {
  check_shape(records, policies, trials, truths);
  WinProbabilities w{std::vector<double>(policies, 0.0), std::vector<double>(policies, 0.0),
                     std::vector<double>(policies, 0.0)};
  const double episodes = static_cast<double>(trials * truths);
  std::vector<double> optimal(policies, 0.0), winning(policies, 0.0);
  std::vector<double> outperform(policies, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> trial_oc(policies, 0.0);
    for (std::size_t u = 0; u < truths; ++u) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < policies; ++k) best = std::min(best, at(records, policies, truths, t, u, k).oc);
      std::size_t winners = 0;
      for (std::size_t k = 0; k < policies; ++k) winners += at(records, policies, truths, t, u, k).oc == best;
      for (std::size_t k = 0; k < policies; ++k) {
        const EpisodeRecord& r = at(records, policies, truths, t, u, k);
        if (r.optimal) optimal[k] += 1.0;
        if (r.oc == best) winning[k] += 1.0 / static_cast<double>(winners);
        trial_oc[k] += r.oc;
      }
    }
    for (std::size_t k = 0; k < policies; ++k) {
      if (trial_oc[k] / static_cast<double>(truths) < trial_oc[0] / static_cast<double>(truths)) outperform[k] += 1.0;
    }
  }
  for (std::size_t k = 0; k < policies; ++k) {
    w.prob_optimal[k] = optimal[k] / episodes;
    w.prob_winning[k] = winning[k] / episodes;
    w.prob_outperform[k] = outperform[k] / static_cast<double>(trials);
  }
  return w;
}

std::vector<std::vector<double>> normalized_oc_vs_reference(std::span<const EpisodeRecord> records,
                                                            std::size_t policies, std::size_t trials,
                                                            std::size_t truths, std::size_t reference) {
  check_shape(records, policies, trials, truths);
  if (reference >= policies) throw InvalidArgument("reference policy out of range");
  std::vector<std::vector<double>> series(policies, std::vector<double>(trials, 0.0));
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t k = 0; k < policies; ++k) {
      double sum = 0.0;
      for (std::size_t u = 0; u < truths; ++u) {
        const EpisodeRecord& r = at(records, policies, truths, t, u, k);
        const EpisodeRecord& ref = at(records, policies, truths, t, u, reference);
        const double range = r.mu_max - r.mu_min;
        if (!(range > 0.0)) throw InvalidArgument("truth has zero range; normalized OC is undefined");
        sum += (r.oc - ref.oc) / range;
      }
      series[k][t] = sum / static_cast<double>(truths);
    }
  }
  return series;
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Histogram shared_histogram(const std::vector<std::vector<double>>& series) {
  std::vector<double> pooled;
  for (const auto& s : series) pooled.insert(pooled.end(), s.begin(), s.end());
  Histogram h;
  if (pooled.empty()) return h;
  const double lo = *std::min_element(pooled.begin(), pooled.end());
  const double hi = *std::max_element(pooled.begin(), pooled.end());
  const double n = static_cast<double>(pooled.size());
  std::size_t bins = 1;
  if (hi > lo) {
    const double iqr = quantile(pooled, 0.75) - quantile(pooled, 0.25);
    const double width = 2.0 * iqr / std::cbrt(n);
    const double raw = width > 0.0 ? std::ceil((hi - lo) / width) : std::ceil(std::sqrt(n));
    bins = static_cast<std::size_t>(std::clamp(raw, 1.0, 1000.0));
  }
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.edges.back() = hi;
  h.counts.assign(series.size(), std::vector<std::size_t>(bins, 0));
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (double v : series[s]) {
      std::size_t b = 0;
      if (hi > lo) {
        b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
        b = std::min(b, bins - 1);
      }
      ++h.counts[s][b];
    }
  }
  return h;
}

Interval bootstrap_mean_ci(std::span<const double> v, double level, std::size_t resamples, std::uint64_t seed) {
  if (v.empty() || resamples == 0) throw InvalidArgument("bootstrap needs data and resamples");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("confidence level must be in (0, 1)");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  std::vector<double> means(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[pick(rng)];
    means[r] = s / static_cast<double>(v.size());
  }
  const double tail = 0.5 * (1.0 - level);
  return {quantile(means, tail), quantile(means, 1.0 - tail)};
}

ComparisonReport compare(std::span<const EpisodeRecord> records, std::span<const std::string> tokens,
                         std::span<const double> parameters, const std::vector<bool>& tuned, std::size_t trials,
                         std::size_t truths) {
  const std::size_t policies = tokens.size();
  if (parameters.size() != policies || tuned.size() != policies) {
    throw InvalidArgument("one parameter and tuning flag per policy is required");
  }
  check_shape(records, policies, trials, truths);
  ComparisonReport rep;
  rep.trials = trials;
  rep.truths = truths;
  const WinProbabilities wins = win_probabilities(records, policies, trials, truths);
  rep.normalized_series = normalized_oc_vs_reference(records, policies, trials, truths, 0);

  for (std::size_t k = 0; k < policies; ++k) {
    std::vector<double> trial_oc(trials, 0.0), trial_obj(trials, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
      double oc = 0.0, obj = 0.0;
      for (std::size_t u = 0; u < truths; ++u) {
        oc += at(records, policies, truths, t, u, k).oc;
        obj += at(records, policies, truths, t, u, k).objective;
      }
      trial_oc[t] = oc / static_cast<double>(truths);
      trial_obj[t] = obj / static_cast<double>(truths);
    }
    PolicySummary s;
    s.token = tokens[k];
    s.parameter = parameters[k];
    s.tuned = tuned[k];
    s.mean_objective = mean(trial_obj);
    s.mean_oc = mean(trial_oc);
    s.sd_oc = sample_sd(trial_oc);
    s.prob_optimal = wins.prob_optimal[k];
    s.prob_winning = wins.prob_winning[k];
    s.prob_outperform = wins.prob_outperform[k];
    s.mean_normalized_oc = mean(rep.normalized_series[k]);
    s.sd_normalized_oc = sample_sd(rep.normalized_series[k]);
    rep.policies.push_back(std::move(s));
  }
  std::vector<std::vector<double>> others(rep.normalized_series.begin() + 1, rep.normalized_series.end());
  rep.histogram = shared_histogram(others);
  return rep;
}

std::vector<std::size_t> sampling_pattern(const TrialResult& trial, std::size_t policy, std::size_t truths) {
  const auto& row = trial.episodes.at(policy);
  truths = std::min(truths, row.size());
  std::vector<std::size_t> counts;
  for (std::size_t u = 0; u < truths; ++u) {
    if (counts.empty()) counts.assign(row[u].counts.size(), 0);
    for (std::size_t x = 0; x < counts.size(); ++x) counts[x] += row[u].counts[x];
  }
  return counts;
}

}  // namespace molte
