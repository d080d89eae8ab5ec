// Copyright 2026 The ratecon Authors.
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
// Acceptance checks: one PASS/FAIL/SKIP line per criterion.

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lp_oracle.hpp"
#include "ratecon/covering.hpp"
#include "ratecon/experiment.hpp"
#include "ratecon/game.hpp"
#include "ratecon/log.hpp"
#include "ratecon/lp.hpp"
#include "ratecon/shrinking.hpp"
#include "ratecon/solvers.hpp"
#include "ratecon/subgradient.hpp"

using namespace ratecon;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.skipped && secs > limit_seconds) {
    o.pass = false;
    o.detail += " (over time limit)";
  }
  const char* verdict = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
  if (!o.skipped && !o.pass) ++failures;
  std::printf("%s %d %s: %s [%.1fs / %.0fs]\n", verdict, id, title, o.detail.c_str(), secs, limit_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1 --------------------------------------------------------------------------

Outcome stationary_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 2 + trial % 7;
    Eigen::MatrixXd m(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) m(i, j) = u(rng);
    for (Index j = 0; j < d; ++j) m.col(j) /= m.col(j).sum();
    const Eigen::VectorXd p = stationary_distribution(SwapMatrix(m));
    // Direct solve of (M - I) x = 0 with one row replaced by sum(x) = 1.
    Eigen::MatrixXd a = m - Eigen::MatrixXd::Identity(d, d);
    a.row(d - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    b[d - 1] = 1.0;
    const Eigen::VectorXd x = a.partialPivLu().solve(b);
    worst = std::max(worst, (p - x).lpNorm<1>());
  }
  return {worst <= 1e-8, false, fmt("max 1-norm gap %.3g over 200 matrices", worst)};
}

// 2 --------------------------------------------------------------------------

// Replays a payoff sequence against the swap-regret player with the theoretical step.
double replay_regret(const std::vector<Eigen::VectorXd>& payoffs, double bound) {
  const Index d = payoffs.front().size();
  const Index t = static_cast<Index>(payoffs.size());
  const double eta = theoretical_swap_step(bound, d, t);
  SwapMatrix swap = SwapMatrix::uniform(d);
  std::vector<Eigen::VectorXd> lambdas;
  for (Index s = 0; s < t; ++s) {
    const Eigen::VectorXd lambda = stationary_distribution(swap);
    lambdas.push_back(lambda);
    swap = swap_update(swap, lambda, payoffs[s], eta);
  }
  return measure_swap_regret(lambdas, payoffs);
}

std::vector<Eigen::VectorXd> recorded_payoffs(Index m, Index t) {
  const auto data = ratecon::testing::random_data(600, 4, 2, 7 + m);
  std::vector<Index> a, b;
  for (Index i = 0; i < data.size(); ++i) (i % 2 == 0 ? a : b).push_back(i);
  std::vector<RateConstraintSpec> specs{RateConstraintSpec::recall_floor(0.9, "g0")};
  if (m == 4) {
    specs.push_back(RateConstraintSpec::positive_rate_ratio_floor(0.8, "g1"));
    specs.push_back(RateConstraintSpec::group_fpr_vs_overall("g0", 0.02));
    specs.push_back(RateConstraintSpec::recall_floor(0.85));
  }
  const ConstrainedProblem p({}, specs, data.group_names());
  SolverConfig c;
  c.iterations = t;
  c.num_snapshots = 2;
  c.batch_size = 32;
  c.seed = 5;
  c.adam.step_size = 0.01;
  const auto trace = run_practical(p, Architecture::linear(4), data.subset(a, Role::kTrain),
                                   data.subset(b, Role::kVal), c);
  return trace.payoffs;
}

Outcome swap_regret_bound_check() {
  std::mt19937_64 rng(202);
  std::ostringstream detail;
  bool ok = true;
  double worst_ratio = 0.0;
  for (Index m : {1, 4}) {
    for (Index t : {100, 1000, 10000}) {
      std::vector<std::vector<Eigen::VectorXd>> sequences;
      sequences.push_back(recorded_payoffs(m, t));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<Eigen::VectorXd> noise, flip;
      for (Index s = 0; s < t; ++s) {
        Eigen::VectorXd g(m + 1), h(m + 1);
        g[0] = 0.0;
        h[0] = 0.0;
        for (Index i = 1; i <= m; ++i) {
          g[i] = u(rng);
          h[i] = ((s / 7 + i) % 2 == 0 ? 0.8 : -0.8);
        }
        noise.push_back(g);
        flip.push_back(h);
      }
      sequences.push_back(noise);
      sequences.push_back(flip);
      for (const auto& seq : sequences) {
        double b = 0.0;
        for (const auto& g : seq) b = std::max(b, g.cwiseAbs().maxCoeff());
        const double regret = replay_regret(seq, b);
        const double bound = swap_regret_bound(b, m + 1, t);
        worst_ratio = std::max(worst_ratio, regret / bound);
        if (!(regret <= bound)) ok = false;
      }
    }
  }
  detail << "worst measured/bound ratio " << worst_ratio << " over 18 sequences";
  return {ok, false, detail.str()};
}

// 3 --------------------------------------------------------------------------

Outcome inner_loop_rate() {
  std::mt19937_64 rng(303);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Index dim = 2 + 2 * trial;
    Eigen::VectorXd a(dim), c(dim);
    std::uniform_real_distribution<double> curv(1.0, 8.0), loc(-0.5, 0.5);
    for (Index i = 0; i < dim; ++i) {
      a[i] = curv(rng);
      c[i] = loc(rng);
    }
    const double mu = a.minCoeff();
    auto f = [&](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
      const Eigen::VectorXd diff = t - c;
      if (g) *g = a.cwiseProduct(diff);
      return 0.5 * diff.dot(a.cwiseProduct(diff));
    };
    for (Index iters : {100, 1000, 10000}) {
      const auto r = strongly_convex_descent(f, dim, mu, iters, 3.0);
      const double gap = f(r.average, nullptr);  // minimum value is 0 at c
      const double b = r.max_gradient_norm;
      const double bound = b * b * (1.0 + std::log(static_cast<double>(iters))) / (2.0 * mu * iters);
      worst = std::max(worst, gap / bound);
      if (!(gap <= bound)) ok = false;
    }
  }
  return {ok, false, fmt("worst suboptimality/bound ratio %.3g", worst)};
}

// 4 --------------------------------------------------------------------------

Outcome covering_check() {
  std::mt19937_64 rng(404);
  bool ok = true;
  std::ostringstream detail;
  for (Index m : {1, 2, 3}) {
    for (double r : {0.25, 0.5, 1.0}) {
      const Covering cov = build_covering(m, r);
      double worst = 0.0;
      for (int s = 0; s < 10000; ++s) {
        const Eigen::VectorXd p = ratecon::testing::random_simplex(m + 1, rng);
        const auto [index, center] = nearest_center(cov, p);
        (void)index;
        worst = std::max(worst, (p - *center).lpNorm<1>());
      }
      const double cap = std::pow(5.0 / r, static_cast<double>(m));
      const bool here = worst <= r && static_cast<double>(cov.centers.size()) <= cap;
      ok = ok && here;
      detail << "m" << m << "/r" << r << ":" << cov.centers.size() << " ";
    }
  }
  return {ok, false, "sizes " + detail.str()};
}

// 5 --------------------------------------------------------------------------

Outcome shrinking_check() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-0.3, 0.3);
  double worst_gap = 0.0;
  int mismatched = 0;
  int support_bad = 0;
  int feasible_instances = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index t = 1 + trial % 6;
    const Index m = trial % 3;
    ShrinkInput in;
    in.objective.resize(t);
    in.constraints.resize(m, t);
    for (Index i = 0; i < t; ++i) {
      in.objective[i] = u(rng);
      for (Index r = 0; r < m; ++r) in.constraints(r, i) = v(rng);
    }
    const double eps = std::uniform_real_distribution<double>(-0.15, 0.3)(rng);
    const auto lp = solve_shrink_lp(in, eps);
    const auto grid = ratecon::testing::grid_shrink_optimum(in.objective, in.constraints, eps, 1e-4);
    if (lp.feasible != grid.has_value()) {
      ++mismatched;
      continue;
    }
    if (!lp.feasible) continue;
    ++feasible_instances;
    worst_gap = std::max(worst_gap, std::abs(lp.objective - *grid));
    Index nonzero = 0;
    for (Index i = 0; i < t; ++i) nonzero += lp.p[i] > 1e-12 ? 1 : 0;
    if (nonzero > m + 1) ++support_bad;
  }

  // Traces of 100 stored iterates from practical runs.
  int traces_with_feasible = 0;
  double worst_violation = -1.0;
  int shrink_support_bad = 0;
  for (int k = 0; k < 6; ++k) {
    const auto data = ratecon::testing::random_data(400, 4, 2, 50 + k);
    std::vector<Index> a, b;
    for (Index i = 0; i < data.size(); ++i) (i % 2 == 0 ? a : b).push_back(i);
    const ConstrainedProblem p({}, {RateConstraintSpec::recall_floor(0.75 + 0.03 * k, "g0"),
                                    RateConstraintSpec::positive_rate_ratio_floor(0.8, "g1")},
                               data.group_names());
    SolverConfig c;
    c.iterations = 2000;
    c.num_snapshots = 100;
    c.batch_size = 32;
    c.adam.step_size = 0.01;
    c.seed = static_cast<std::uint64_t>(k);
    const auto trace =
        run_practical(p, Architecture::linear(4), data.subset(a, Role::kTrain), data.subset(b, Role::kVal), c);
    const ShrinkInput in = trace.shrink_input();
    const auto res = shrink(in);
    if (static_cast<Index>(res.classifier.size()) > in.num_constraints() + 1) ++shrink_support_bad;
    if (solve_shrink_lp(in, 0.0).feasible) {
      ++traces_with_feasible;
      worst_violation = std::max(worst_violation, res.max_violation);
    }
  }
  std::ostringstream d;
  d << "grid gap " << worst_gap << " on " << feasible_instances << " feasible LPs, " << mismatched
    << " feasibility mismatches, " << support_bad + shrink_support_bad << " oversized supports; "
    << traces_with_feasible << "/6 traces feasible, worst violation " << worst_violation;
  const bool ok = worst_gap <= 1e-3 && mismatched == 0 && support_bad == 0 && shrink_support_bad == 0 &&
                  traces_with_feasible > 0 && worst_violation <= 1e-6;
  return {ok, false, d.str()};
}

// 6 --------------------------------------------------------------------------

bool away_from_kinks(const Model& m, const DatasetView& data, double gap) {
  const Eigen::VectorXd f = m.predict(data);
  for (Index i = 0; i < f.size(); ++i) {
    if (std::abs(f[i] - 1.0) < gap || std::abs(f[i] + 1.0) < gap) return false;
  }
  const RowMatrix z = m.hidden_preactivations(data);
  return z.size() == 0 || z.cwiseAbs().minCoeff() >= gap;
}

Outcome gradient_check() {
  std::mt19937_64 rng(606);
  const auto data = ratecon::testing::random_data(25, 3, 2, 66);
  const ConstrainedProblem p({}, {RateConstraintSpec::recall_floor(0.8, "g0"),
                                  RateConstraintSpec::positive_rate_ratio_floor(0.8, "g1"),
                                  RateConstraintSpec::positive_rate_gap_cap_on_positives(0.05, "g0"),
                                  RateConstraintSpec::group_fpr_vs_overall("g1", 0.02)},
                             data.group_names(), 0.01);
  double worst = 0.0;
  std::ostringstream d;
  for (const Architecture arch : {Architecture::linear(3), Architecture::mlp(3, 6)}) {
    int checked = 0;
    int attempts = 0;
    while (checked < 1000 && attempts < 500000) {
      ++attempts;
      const Eigen::VectorXd theta = ratecon::testing::random_vector(arch.num_params(), rng, 1.5);
      const Model model(arch, theta);
      if (!away_from_kinks(model, data, 1e-3)) continue;
      const LossWeights w = LossWeights::from_simplex(ratecon::testing::random_simplex(5, rng));
      const Eigen::VectorXd g = weighted_subgradient(p, model, w, data, EmptyGroupPolicy::kThrow).gradient;
      Eigen::VectorXd fd(theta.size());
      const double h = 1e-5;
      for (Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd hi = theta, lo = theta;
        hi[i] += h;
        lo[i] -= h;
        fd[i] = (weighted_subgradient(p, Model(arch, hi), w, data, EmptyGroupPolicy::kThrow).value -
                 weighted_subgradient(p, Model(arch, lo), w, data, EmptyGroupPolicy::kThrow).value) /
                (2.0 * h);
      }
      worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() / std::max(fd.lpNorm<Eigen::Infinity>(), 1e-6));
      ++checked;
    }
    d << arch.describe() << ":" << checked << " ";
  }
  d << "points, worst relative error " << worst;
  return {worst < 1e-4, false, d.str()};
}

// 7 --------------------------------------------------------------------------

ExperimentConfig simulated_config(double sigma, Index runs) {
  ExperimentConfig c;
  c.name = "simulated";
  c.dataset.type = DatasetConfig::Type::kSimulated;
  c.dataset.name = "simulated";
  c.dataset.simulated.n = 1000;
  c.dataset.simulated.sigma = sigma;
  c.constraints = {RateConstraintSpec::recall_floor(0.97)};
  for (auto mode : {DatasetMode::kTwoDataset, DatasetMode::kOneDataset}) {
    SolverConfig s;
    s.algorithm = Algorithm::kPractical;
    s.mode = mode;
    s.iterations = 10000;
    s.batch_size = 64;
    s.num_snapshots = 100;
    c.solvers.push_back(s);
  }
  c.runs = runs;
  c.seed = 1000;
  return c;
}

const ReportRow* find_row(const std::vector<ReportRow>& rows, const char* mode, const char* split) {
  for (const auto& r : rows) {
    if (r.mode == mode && r.split == split) return &r;
  }
  return nullptr;
}

Outcome simulated_trend() {
  const std::vector<double> sigmas{0.02, 0.05, 0.1, 0.3, 1.0};
  std::ostringstream d;
  bool ok = true;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const auto result = run_experiment(simulated_config(sigmas[k], 10), "", 1);
    if (!result.all_completed) return {false, false, "a run failed"};
    const auto* two = find_row(result.rows, "two_dataset", "test");
    const auto* one = find_row(result.rows, "one_dataset", "test");
    char buf[200];
    std::snprintf(buf, sizeof buf, "s=%g viol %.4f/%.4f err %.4f/%.4f; ", sigmas[k], two->violation_mean,
                  one->violation_mean, two->error_mean, one->error_mean);
    d << buf;
    if (k < 2) ok = ok && two->violation_mean < one->violation_mean && two->error_mean >= one->error_mean;
  }
  return {ok, false, "two/one " + d.str()};
}

// 8 --------------------------------------------------------------------------

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

Outcome table_direction() {
  const char* adult_train = env("RATECON_ADULT_TRAIN");
  const char* adult_test = env("RATECON_ADULT_TEST");
  const char* compas = env("RATECON_COMPAS_CSV");
  if (!adult_train || !adult_test || !compas) {
    return {false, true, "set RATECON_ADULT_TRAIN, RATECON_ADULT_TEST and RATECON_COMPAS_CSV to run"};
  }
  struct Target {
    const char* config;
    double one;
    double two;
  };
  const std::vector<Target> targets{{"adult.json", 0.011, 0.005}, {"compas.json", 0.038, 0.004}};
  std::ostringstream d;
  bool ok = true;
  for (const auto& target : targets) {
    ExperimentConfig c = load_experiment_config((fs::path(RATECON_SOURCE_DIR) / "configs" / target.config).string());
    if (std::string(target.config) == "adult.json") {
      c.dataset.tabular.path = adult_train;
      c.dataset.tabular.test_path = adult_test;
    } else {
      c.dataset.tabular.path = compas;
    }
    c.runs = 20;
    c.include_unconstrained = false;
    std::vector<SolverConfig> kept;
    for (const auto& s : c.solvers) {
      if (s.algorithm == Algorithm::kPractical) kept.push_back(s);
    }
    c.solvers = kept;
    const auto result = run_experiment(c, "", 1);
    const auto* two = find_row(result.rows, "two_dataset", "test");
    const auto* one = find_row(result.rows, "one_dataset", "test");
    if (!two || !one || !result.all_completed) return {false, false, "runs failed on " + c.dataset.name};
    const bool here = two->violation_mean < one->violation_mean &&
                      std::abs(two->violation_mean - target.two) <= 0.015 &&
                      std::abs(one->violation_mean - target.one) <= 0.015;
    ok = ok && here;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s two %.4f one %.4f; ", c.dataset.name.c_str(), two->violation_mean,
                  one->violation_mean);
    d << buf;
  }
  return {ok, false, d.str()};
}

// 9 --------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  ExperimentConfig c = simulated_config(0.1, 3);
  c.dataset.simulated.n = 300;
  for (auto& s : c.solvers) s.iterations = 1500;
  SolverConfig lag = c.solvers.front();
  lag.algorithm = Algorithm::kLagrangianPractical;
  c.solvers.push_back(lag);
  c.include_unconstrained = true;
  const fs::path root = fs::temp_directory_path() / "ratecon_acceptance_determinism";
  fs::remove_all(root);
  run_experiment(c, (root / "a").string(), 1);
  run_experiment(c, (root / "b").string(), 2);
  bool same = true;
  for (const char* f : {"report.csv", "runs.csv", "summary.json"}) {
    same = same && slurp(root / "a" / f) == slurp(root / "b" / f) && !slurp(root / "a" / f).empty();
  }
  fs::remove_all(root);
  return {same, false, same ? "report.csv, runs.csv and summary.json identical across reruns"
                            : "aggregated outputs differ between reruns"};
}

}  // namespace

int main() {
  log::get().set_level(spdlog::level::warn);
  report(1, "stationary distribution vs direct solve", 5, stationary_equivalence);
  report(2, "swap regret within its bound", 60, swap_regret_bound_check);
  report(3, "inner loop logarithmic rate", 30, inner_loop_rate);
  report(4, "simplex covering radius and size", 30, covering_check);
  report(5, "shrinking LP vs grid oracle and trace feasibility", 120, shrinking_check);
  report(6, "analytic vs finite-difference gradients", 60, gradient_check);
  report(7, "simulated data generalization trend", 1200, simulated_trend);
  report(8, "real data direction", 7200, table_direction);
  report(9, "byte-identical reruns", 600, determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
