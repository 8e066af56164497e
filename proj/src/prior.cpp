#include "molte/prior.hpp"

#include <fstream>
#include <string>

#include "molte/csv.hpp"
#include "molte/error.hpp"
#include "text_util.hpp"

namespace molte {

GaussianBelief build_uninformative(std::size_t arms, BeliefMode mode) {
  if (mode == BeliefMode::correlated) {
    throw InvalidArgument("an uninformative prior is only defined for independent beliefs");
  }
  const auto m = static_cast<Eigen::Index>(arms);
  return GaussianBelief::independent(Eigen::VectorXd::Zero(m), Eigen::VectorXd::Constant(m, kUninformedVariance));
}

GaussianBelief build_given(const PriorPayload& payload, BeliefMode mode) {
  const Eigen::Index m = payload.mean.size();
  if (payload.beta_w && payload.beta_w->size() != m) throw InvalidArgument("prior beta_w length mismatch");
  if (payload.covariance) {
    if (payload.covariance->rows() != m || payload.covariance->cols() != m) {
      throw InvalidArgument("prior covariance dimension mismatch");
    }
    GaussianBelief b = GaussianBelief::correlated(payload.mean, *payload.covariance);
    return mode == BeliefMode::correlated ? b : b.as_independent();
  }
  if (payload.variance) {
    if (payload.variance->size() != m) throw InvalidArgument("prior variance length mismatch");
    GaussianBelief b = GaussianBelief::independent(payload.mean, *payload.variance);
    return mode == BeliefMode::independent ? b : b.as_correlated();
  }
  throw InvalidArgument("prior payload has neither covariance nor variance");
}

namespace {

Eigen::VectorXd parse_values(const CsvRow& row, std::size_t m, const std::string& where) {
  if (row.size() != m + 1) throw InvalidArgument(where + ": expected " + std::to_string(m) + " values");
  Eigen::VectorXd v(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) v(static_cast<Eigen::Index>(i)) = parse_double(row[i + 1]);
  return v;
}

}  // namespace

PriorPayload read_prior_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::string name = path.string();
  if (table.empty() || table.front().empty() || detail::trim(table.front().front()) != "kind") {
    throw InvalidArgument(name + ": first column header must be 'kind'");
  }
  const std::size_t m = table.front().size() - 1;
  if (m < 2) throw InvalidArgument(name + ": need at least two arms");
  PriorPayload p;
  std::vector<Eigen::VectorXd> cov_rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const std::string where = name + " row " + std::to_string(r + 1);
    const std::string kind(detail::trim(table[r].front()));
    Eigen::VectorXd values = parse_values(table[r], m, where);
    if (kind == "mean") {
      if (p.mean.size()) throw InvalidArgument(where + ": duplicate mean row");
      p.mean = std::move(values);
    } else if (kind == "cov") {
      cov_rows.push_back(std::move(values));
    } else if (kind == "var") {
      if (p.variance) throw InvalidArgument(where + ": duplicate var row");
      p.variance = std::move(values);
    } else if (kind == "beta_w") {
      if (p.beta_w) throw InvalidArgument(where + ": duplicate beta_w row");
      p.beta_w = std::move(values);
    } else {
      throw InvalidArgument(where + ": unknown kind '" + kind + "'");
    }
  }
  if (p.mean.size() == 0) throw InvalidArgument(name + ": missing mean row");
  if (!cov_rows.empty()) {
    if (cov_rows.size() != m) throw InvalidArgument(name + ": covariance needs exactly M cov rows");
    if (p.variance) throw InvalidArgument(name + ": give either cov rows or a var row, not both");
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) cov.row(static_cast<Eigen::Index>(i)) = cov_rows[i].transpose();
    p.covariance = std::move(cov);
  }
  if (!p.covariance && !p.variance) throw InvalidArgument(name + ": missing cov or var rows");
  // Validates symmetry and shape.
  (void)build_given(p, p.covariance ? BeliefMode::correlated : BeliefMode::independent);
  return p;
}

void write_prior_csv(const std::filesystem::path& path, const PriorPayload& payload) {
  const auto m = static_cast<std::size_t>(payload.mean.size());
  auto row = [m](const std::string& kind, auto&& value_at) {
    CsvRow r{kind};
    for (std::size_t i = 0; i < m; ++i) r.push_back(format_double(value_at(static_cast<Eigen::Index>(i))));
    return csv_line(r);
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  CsvRow header{"kind"};
  for (std::size_t i = 0; i < m; ++i) header.push_back(std::to_string(i + 1));
  out << csv_line(header);
  out << row("mean", [&](Eigen::Index i) { return payload.mean(i); });
  if (payload.covariance) {
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(m); ++r) {
      out << row("cov", [&](Eigen::Index i) { return (*payload.covariance)(r, i); });
    }
  } else if (payload.variance) {
    out << row("var", [&](Eigen::Index i) { return (*payload.variance)(i); });
  }
  if (payload.beta_w) out << row("beta_w", [&](Eigen::Index i) { return (*payload.beta_w)(i); });
  if (!out) throw IoError("write failed for " + path.string());
}

BuiltPrior build_prior(const PriorSpec& spec, const ProblemDraw& draw, Rng& rng, const MleOptions& options) {
  const ProblemInstance& problem = draw.instance;
  auto convert = [&](const GaussianBelief& b) {
    return spec.belief_mode == BeliefMode::correlated ? b.as_correlated() : b.as_independent();
  };
  switch (spec.mode) {
    case PriorMode::uninformative:
      return {build_uninformative(problem.size(), spec.belief_mode), problem.beta_w, 0, std::nullopt};
    case PriorMode::default_prior:
      if (!draw.default_prior) throw InvalidArgument("problem '" + problem.name + "' has no default prior");
      return {convert(*draw.default_prior), problem.beta_w, 0, std::nullopt};
    case PriorMode::given: {
      if (spec.given) {
        if (static_cast<std::size_t>(spec.given->mean.size()) != problem.size()) {
          throw InvalidArgument("given prior has " + std::to_string(spec.given->mean.size()) +
                                " arms but the problem has " + std::to_string(problem.size()));
        }
        return {build_given(*spec.given, spec.belief_mode), spec.given->beta_w.value_or(problem.beta_w), 0,
                std::nullopt};
      }
      if (draw.default_prior) return {convert(*draw.default_prior), problem.beta_w, 0, std::nullopt};
      throw InvalidArgument("given prior requested but no payload is available");
    }
    case PriorMode::mle: {
      MleFit fit = fit_mle(problem, spec.belief_mode, rng, options);
      BuiltPrior built{fit.belief, problem.beta_w, fit.observations_consumed, std::nullopt};
      built.mle = std::move(fit);
      return built;
    }
  }
  throw InvalidArgument("unknown prior mode");
}

}  // namespace molte
