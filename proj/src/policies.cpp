#include "molte/policies.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "molte/csv.hpp"
#include "molte/error.hpp"
#include "molte/log.hpp"
#include "molte/numeric.hpp"
#include "text_util.hpp"

namespace molte {

namespace {

struct NameEntry {
  PolicyKind kind;
  const char* name;
};

constexpr NameEntry kNames[] = {
    {PolicyKind::kg, "KG"},     {PolicyKind::kgcb, "KGCB"},   {PolicyKind::olkg, "OLKG"},
    {PolicyKind::ie, "IE"},     {PolicyKind::kriging, "Kriging"}, {PolicyKind::ts, "TS"},
    {PolicyKind::ucb, "UCB"},   {PolicyKind::ucbe, "UCBE"},   {PolicyKind::ucbv, "UCBV"},
    {PolicyKind::klucb, "KLUCB"}, {PolicyKind::sr, "SR"},     {PolicyKind::expl, "EXPL"},
    {PolicyKind::expt, "EXPT"},
};

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  for (const auto& e : kNames) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

PolicyKind parse_policy_name(std::string_view name) {
  const std::string folded = detail::fold_name(name);
  for (const auto& e : kNames) {
    if (detail::fold_name(e.name) == folded) return e.kind;
  }
  throw InvalidArgument("unknown policy '" + std::string(name) + "'");
}

bool is_tunable(PolicyKind kind) { return kind == PolicyKind::ie || kind == PolicyKind::ucbe; }

double default_parameter(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ie: return 2.0;
    case PolicyKind::ucbe: return 1.0;
    default: return 0.0;
  }
}

PolicySpec parse_policy_token(std::string_view token) {
  const std::string_view t = detail::trim(token);
  if (t.empty()) throw InvalidArgument("empty policy token");
  PolicySpec spec;
  const auto open = t.find('(');
  if (open == std::string_view::npos) {
    spec.kind = parse_policy_name(t);
    return spec;
  }
  if (t.back() != ')') throw InvalidArgument("policy token '" + std::string(t) + "' is missing ')'");
  spec.kind = parse_policy_name(detail::trim(t.substr(0, open)));
  const std::string_view arg = detail::trim(t.substr(open + 1, t.size() - open - 2));
  const std::string name(policy_name(spec.kind));
  if (arg == "*") {
    if (!is_tunable(spec.kind)) throw InvalidArgument("policy " + name + " has nothing to tune");
    spec.directive.kind = ParamKind::tune;
    return spec;
  }
  if (arg.empty()) throw InvalidArgument("policy token '" + std::string(t) + "' has an empty parameter");
  if (!is_tunable(spec.kind)) throw InvalidArgument("policy " + name + " takes no parameter");
  double value = 0.0;
  try {
    value = parse_double(arg);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("policy " + name + " parameter '" + std::string(arg) + "' is not a number");
  }
  if (!std::isfinite(value)) throw InvalidArgument("policy " + name + " parameter must be finite");
  if (spec.kind == PolicyKind::ucbe && !(value > 0.0)) throw InvalidArgument("UCBE parameter must be positive");
  spec.directive = {ParamKind::fixed, value};
  return spec;
}

std::string policy_token(const PolicySpec& spec) {
  std::string out(policy_name(spec.kind));
  switch (spec.directive.kind) {
    case ParamKind::none: break;
    case ParamKind::fixed: out += "(" + format_double(spec.directive.value) + ")"; break;
    case ParamKind::tune: out += "(*)"; break;
  }
  return out;
}

std::size_t Policy::choose(Rng& rng) {
  if (round_ >= horizon_) {
    throw BudgetError(std::string(policy_name(kind())) + ": choose() called beyond the horizon of " +
                      std::to_string(horizon_));
  }
  const std::size_t arm = do_choose(rng);
  if (arm >= arms_) throw InvalidArgument("policy chose an out-of-range arm");
  return arm;
}

void Policy::observe(const Observation& obs) {
  if (round_ >= horizon_) {
    throw BudgetError(std::string(policy_name(kind())) + ": more observations than the horizon of " +
                      std::to_string(horizon_));
  }
  if (obs.arm >= arms_) throw InvalidArgument("observation arm out of range");
  do_observe(obs);
  ++round_;
}

std::size_t Policy::recommend() const {
  const Eigen::VectorXd est = estimates();
  const std::size_t best = argmax({est.data(), static_cast<std::size_t>(est.size())});
  return best < arms_ ? best : 0;
}

namespace {

UcbRule ucb_rule(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ucb: return UcbRule::ucb;
    case PolicyKind::ucbe: return UcbRule::ucbe;
    case PolicyKind::ucbv: return UcbRule::ucbv;
    case PolicyKind::klucb: return UcbRule::klucb;
    default: throw InvalidArgument("not a UCB-family policy");
  }
}

bool is_ucb_family(PolicyKind kind) {
  return kind == PolicyKind::ucb || kind == PolicyKind::ucbe || kind == PolicyKind::ucbv || kind == PolicyKind::klucb;
}

// Policies acting on the Gaussian belief. Arms still at the uninformed
// sentinel are measured first, lowest index first.
class BayesianPolicy final : public Policy {
 public:
  BayesianPolicy(PolicyKind kind, double parameter, const PolicyContext& ctx)
      : Policy(ctx.prior.size(), ctx.horizon),
        kind_(kind),
        parameter_(parameter),
        belief_(ctx.prior),
        beta_w_(ctx.beta_w),
        counts_(ctx.prior.size(), 0) {}

  Eigen::VectorXd estimates() const override { return belief_.mean(); }
  PolicyKind kind() const override { return kind_; }

 protected:
  std::size_t do_choose(Rng& rng) override {
    if (auto first = belief_.first_uninformed()) return *first;
    const bool correlated = belief_.mode() == BeliefMode::correlated;
    switch (kind_) {
      case PolicyKind::kg:
      case PolicyKind::kgcb:
        return correlated ? kg_correlated(belief_, beta_w_) : kg_independent(belief_, beta_w_);
      case PolicyKind::olkg: return olkg(belief_, beta_w_, round(), horizon());
      case PolicyKind::ie: return interval_estimation(belief_, parameter_);
      case PolicyKind::kriging: return kriging(belief_);
      case PolicyKind::ts: return thompson(belief_, rng);
      case PolicyKind::expt: return exploit(belief_);
      case PolicyKind::expl: return explore(arms(), rng);
      default:
        return ucb_choice(ucb_rule(kind_), belief_statistics(belief_, counts_), parameter_);
    }
  }

  void do_observe(const Observation& obs) override {
    update_in_place(belief_, obs, beta_w_);
    ++counts_[obs.arm];
  }

 private:
  PolicyKind kind_;
  double parameter_;
  GaussianBelief belief_;
  Eigen::VectorXd beta_w_;
  std::vector<std::size_t> counts_;
};

class FrequentistUcb final : public Policy {
 public:
  FrequentistUcb(PolicyKind kind, double parameter, const PolicyContext& ctx)
      : Policy(ctx.prior.size(), ctx.horizon), kind_(kind), parameter_(parameter), stats_(ctx.prior.size()) {}

  Eigen::VectorXd estimates() const override { return sample_means(stats_); }
  PolicyKind kind() const override { return kind_; }

  static Eigen::VectorXd sample_means(const FrequentistStats& stats) {
    Eigen::VectorXd m(static_cast<Eigen::Index>(stats.size()));
    for (std::size_t x = 0; x < stats.size(); ++x) m(static_cast<Eigen::Index>(x)) = stats.mean(x);
    return m;
  }

 protected:
  std::size_t do_choose(Rng&) override {
    const double n = static_cast<double>(stats_.total());
    switch (kind_) {
      case PolicyKind::ucb: return ucb(stats_, n);
      case PolicyKind::ucbe: return ucb_e(stats_, parameter_);
      case PolicyKind::ucbv: return ucb_v(stats_, n);
      default: return klucb_gauss(stats_, n);
    }
  }

  void do_observe(const Observation& obs) override { stats_.add(obs); }

 private:
  PolicyKind kind_;
  double parameter_;
  FrequentistStats stats_;
};

class SuccessiveRejects final : public Policy {
 public:
  explicit SuccessiveRejects(const PolicyContext& ctx)
      : Policy(ctx.prior.size(), ctx.horizon), stats_(ctx.prior.size()), alive_(ctx.prior.size(), true) {
    const std::size_t m = arms();
    degenerate_ = horizon() <= m;
    if (degenerate_) {
      log_once(LogLevel::warning, "SR: budget " + std::to_string(horizon()) +
                                      " leaves no room for elimination phases over " + std::to_string(m) +
                                      " arms; sampling round-robin");
      return;
    }
    schedule_ = sr_schedule(m, horizon());
    const std::size_t residual = horizon() - sr_total_pulls(m, schedule_);
    if (residual > 0) {
      log_once(LogLevel::info, "SR: " + std::to_string(residual) + " residual pulls go to the surviving arm (" +
                                   std::to_string(m) + " arms, budget " + std::to_string(horizon()) + ")");
    }
    settle();
  }

  Eigen::VectorXd estimates() const override { return FrequentistUcb::sample_means(stats_); }
  PolicyKind kind() const override { return PolicyKind::sr; }

  std::size_t recommend() const override { return finished_ ? survivor() : Policy::recommend(); }

 protected:
  std::size_t do_choose(Rng&) override {
    if (degenerate_) return round() % arms();
    if (finished_) return survivor();
    return queue_.front();
  }

  void do_observe(const Observation& obs) override {
    stats_.add(obs);
    if (degenerate_ || finished_) return;
    if (!queue_.empty() && queue_.front() == obs.arm) queue_.pop_front();
    settle();
  }

 private:
  // Runs phase transitions until there is something to sample.
  void settle() {
    while (queue_.empty() && !finished_) {
      if (phase_ > 0) eliminate();
      if (phase_ + 1 == arms()) {
        finished_ = true;
        break;
      }
      ++phase_;
      const std::size_t previous = phase_ > 1 ? schedule_[phase_ - 2] : 0;
      for (std::size_t r = previous; r < schedule_[phase_ - 1]; ++r) {
        for (std::size_t x = 0; x < arms(); ++x) {
          if (alive_[x]) queue_.push_back(x);
        }
      }
    }
  }

  void eliminate() {
    std::size_t worst = arms();
    for (std::size_t x = 0; x < arms(); ++x) {
      if (!alive_[x]) continue;
      if (worst == arms() || stats_.mean(x) < stats_.mean(worst)) worst = x;
    }
    alive_[worst] = false;
  }

  std::size_t survivor() const {
    for (std::size_t x = 0; x < arms(); ++x) {
      if (alive_[x]) return x;
    }
    return 0;
  }

  FrequentistStats stats_;
  std::vector<bool> alive_;
  std::vector<std::size_t> schedule_;
  std::deque<std::size_t> queue_;
  std::size_t phase_ = 0;
  bool degenerate_ = false;
  bool finished_ = false;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, double parameter, const PolicyContext& context) {
  if (static_cast<std::size_t>(context.beta_w.size()) != context.prior.size()) {
    throw InvalidArgument("policy context: beta_w length mismatch");
  }
  if (context.horizon == 0) throw InvalidArgument("policy horizon must be at least 1");
  if (kind == PolicyKind::ucbe && !(parameter > 0.0)) throw InvalidArgument("UCBE parameter must be positive");
  if (kind == PolicyKind::ie && !std::isfinite(parameter)) throw InvalidArgument("IE parameter must be finite");
  if (kind == PolicyKind::sr) return std::make_unique<SuccessiveRejects>(context);
  if (is_ucb_family(kind) && context.prior.mode() == BeliefMode::independent) {
    return std::make_unique<FrequentistUcb>(kind, parameter, context);
  }
  return std::make_unique<BayesianPolicy>(kind, parameter, context);
}

}  // namespace molte
