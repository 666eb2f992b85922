// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oracles.hpp"
#include "zomd/analysis.hpp"
#include "zomd/cli/commands.hpp"
#include "zomd/errors.hpp"

using namespace zomd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

FeasibleSet Cube(int n) { return FeasibleSet::box(Vector::Constant(n, -1), Vector::Constant(n, 1)); }

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// 1. Entropic prox step against an exhaustive grid, and the three-point identity.
Verdict GeometryExactness() {
  const int n = 3;
  const FeasibleSet simplex = FeasibleSet::simplex(n);
  const MirrorMap entropy(MirrorKind::kNegativeEntropy, Norm::kL1, n);
  RandomStream rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = simplex.sample(rng);
    Vector g(n);
    for (int i = 0; i < n; ++i) g[i] = 4.0 * rng.uniform() - 2.0;
    const double alpha = 0.1 + 1.9 * rng.uniform();
    const Vector prox = prox_step(entropy, simplex, x, g, alpha);
    const Vector grid = test::SimplexGridArgmin(g, x, alpha, 10000);
    worst = std::max(worst, (prox - grid).lpNorm<1>());
  }

  double residual = 0.0;
  const MirrorMap euclid(MirrorKind::kEuclidean, Norm::kL2, n);
  const FeasibleSet box = Cube(n);
  for (int trial = 0; trial < 10000; ++trial) {
    residual = std::max(residual, std::abs(three_point_gap(entropy, simplex.sample(rng), simplex.sample(rng),
                                                           simplex.sample(rng))));
    residual = std::max(residual,
                        std::abs(three_point_gap(euclid, box.sample(rng), box.sample(rng), box.sample(rng))));
  }
  return {worst <= 2e-4 && residual <= 1e-10,
          Fmt("max l1 prox-grid distance %.3g (<= 2e-4), max three-point residual %.3g (<= 1e-10)", worst, residual)};
}

// Probe points drawn uniformly from the cube, one stream per dimension.
std::vector<Vector> Probes(int n, int count) {
  RandomStream rng(RandomStream(2002).substream(static_cast<std::uint64_t>(n)));
  std::vector<Vector> probes;
  for (int k = 0; k < count; ++k) probes.push_back(Cube(n).sample(rng));
  return probes;
}

ObjectiveSpec HalfShiftedAbsSum(int n) { return make_abs_sum(Vector::Constant(n, 0.5), Cube(n)); }

// 2. Bias of the estimator under the sine-biased oracle.
Verdict Bias() {
  int rows = 0, passed = 0;
  double worst_ratio = 0.0;
  for (int n : {2, 5}) {
    const Geometry geometry(Cube(n), MirrorKind::kEuclidean);
    const ObjectiveSpec obj = HalfShiftedAbsSum(n);
    const NoiseModel noise = NoiseModel::biased(0.1, 0.1, BiasField::kSine);
    const auto probes = Probes(n, 5);
    for (double mu : {0.05, 0.1, 0.5}) {
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const EstimatorReport r = verify_estimator_bounds(obj, noise, geometry, probes[k], NgaConfig(mu, n), 100000,
                                                          RandomStream(2100 + rows));
        ++rows;
        if (r.bias_pass) ++passed;
        worst_ratio = std::max(worst_ratio, r.empirical_bias_dual_norm / (r.bias_bound + 4 * r.bias_stderr));
      }
    }
  }
  return {passed == rows, Fmt("%d/%d rows within 2 kappa1 B sqrt(n)/mu + 4 SE, worst empirical/allowed %.3f", passed,
                              rows, worst_ratio)};
}

// 3. Second moment against the stated C00 constant, and the 1/mu^2 growth.
Verdict SecondMoment() {
  int rows = 0, passed = 0;
  std::string failures;
  bool blowup = true;
  std::string ratios;
  for (int n : {2, 5}) {
    const Geometry geometry(Cube(n), MirrorKind::kEuclidean);
    const ObjectiveSpec obj = HalfShiftedAbsSum(n);
    // B^2 + sd^2 = V^2 with V = 0.1.
    const NoiseModel noise = NoiseModel::biased(0.06, 0.08, BiasField::kSine, 0.1);
    const auto probes = Probes(n, 5);
    for (double mu : {0.05, 0.1, 0.5}) {
      for (std::size_t k = 0; k < probes.size(); ++k) {
        const EstimatorReport r = verify_estimator_bounds(obj, noise, geometry, probes[k], NgaConfig(mu, n), 100000,
                                                          RandomStream(3100 + rows));
        ++rows;
        if (r.second_moment_pass) {
          ++passed;
        } else {
          failures += Fmt(" [n=%d mu=%g point %zu: %.4g > %.4g + 4*%.2g]", n, mu, k, r.empirical_second_moment,
                          r.second_moment_bound, r.second_moment_stderr);
        }
      }
    }
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const double small = verify_estimator_bounds(obj, noise, geometry, probes[k], NgaConfig(0.01, n), 100000,
                                                   RandomStream(3900 + k))
                               .empirical_second_moment;
      const double base = verify_estimator_bounds(obj, noise, geometry, probes[k], NgaConfig(0.1, n), 100000,
                                                  RandomStream(3900 + k))
                              .empirical_second_moment;
      blowup = blowup && small >= 10 * base;
      ratios += Fmt(" %.1f", small / base);
    }
  }
  return {passed == rows && blowup,
          Fmt("%d/%d rows within kappa1^2 (2 L0^2 n + 8 (V/mu)^2 n) + 4 SE; E(mu=0.01)/E(mu=0.1) =%s (>= 10)", passed,
              rows, ratios.c_str()) +
              failures};
}

Experiment AbsSumExperiment(const NoiseModel& noise, double mu, std::int64_t T) {
  const int n = 5;
  const FeasibleSet set = Cube(n);
  return Experiment{Problem{HalfShiftedAbsSum(n), noise, Geometry(set, MirrorKind::kEuclidean), NgaConfig(mu, n)},
                    StepSchedule::power(0.5, 0.75), Vector::Zero(n), T};
}

std::vector<double> FinalGaps(const Experiment& e, std::int64_t trials, std::uint64_t seed) {
  std::vector<double> gaps;
  for (const TrajectorySummary& s : run_ensemble(e, trials, seed)) gaps.push_back(s.final_gap_z);
  return gaps;
}

// 4. Unbiased convergence into mu L0 sqrt(n) + eps.
Verdict Unbiased() {
  const Experiment e = AbsSumExperiment(NoiseModel::additive_gaussian(0.1), 0.05, 100000);
  const TheoryParams tp = make_theory_params(e.problem);
  const double threshold = tp.delta + 0.3;
  const auto gaps = FinalGaps(e, 20, 4004);
  const auto inside = std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g < threshold; });
  return {inside >= 19, Fmt("%ld/20 trials end with f(z_T) - f* < %.4g (need 19), median gap %.4g", inside,
                            threshold, Median(gaps))};
}

// 5. Biased convergence at the optimal radius, and a smaller radius as control.
Verdict Biased() {
  const NoiseModel noise = NoiseModel::biased(0.05, 0.1, BiasField::kSine);
  const Experiment probe = AbsSumExperiment(noise, 0.1, 1);
  const TheoryParams base = make_theory_params(probe.problem);
  const double mu_star = optimal_mu(SmoothnessClass::kC00, base.L0, base.kappa1, base.B, base.D, base.n);

  const Experiment e = AbsSumExperiment(noise, mu_star, 100000);
  const TheoryParams tp = make_theory_params(e.problem);
  const double threshold = neighborhood_radius(tp) + 0.3;
  const auto gaps = FinalGaps(e, 20, 5005);
  const auto inside = std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g < threshold; });

  const auto control = FinalGaps(AbsSumExperiment(noise, mu_star / 10, 100000), 20, 5005);
  const double med = Median(gaps);
  const double med_control = Median(control);
  return {inside >= 19 && med_control > med,
          Fmt("mu* = %.4g: %ld/20 trials inside delta + B1 D + 0.3 = %.4g (need 19); median gap %.4g at mu*, %.4g at "
              "mu*/10 (control must be larger)",
              mu_star, inside, threshold, med, med_control)};
}

struct Cell {
  std::string name;
  Experiment experiment;
  double epsilon;
};

Experiment Small(ObjectiveSpec obj, const NoiseModel& noise, double mu, double a, double p) {
  const int n = obj.dimension();
  const FeasibleSet set = obj.set();
  return Experiment{Problem{std::move(obj), noise, Geometry(set, MirrorKind::kEuclidean), NgaConfig(mu, n)},
                    StepSchedule::power(a, p), Vector::Constant(n, 0.9), 100000};
}

// 6. Empirical failure fraction against the concentration bound.
Verdict Concentration() {
  auto box = [](int n) { return Cube(n); };
  // Step sums must clear the burn-in 3D/eps well before T for the bound to drop below 1/2.
  std::vector<Cell> cells = {
      {"abs_sum n=1 unbiased", Small(make_abs_sum(Vector::Constant(1, 0.3), box(1)), NoiseModel::additive_gaussian(0.05), 0.1, 0.1, 0.6), 0.5},
      {"abs_sum n=1 biased", Small(make_abs_sum(Vector::Constant(1, -0.2), box(1)), NoiseModel::biased(0.005, 0.02), 0.1, 0.1, 0.6), 0.5},
      {"abs_sum n=2 unbiased", Small(make_abs_sum(Vector::Constant(2, 0.3), box(2)), NoiseModel::additive_gaussian(0.02), 0.05, 0.1, 0.6), 0.5},
      {"abs_sum n=2 biased", Small(make_abs_sum(Vector::Constant(2, 0.3), box(2)), NoiseModel::biased(0.005, 0.02), 0.1, 0.1, 0.6), 0.5},
      {"abs_sum n=2 noiseless", Small(make_abs_sum(Vector::Constant(2, -0.4), box(2)), NoiseModel::none(), 0.05, 0.1, 0.6), 0.5},
      {"abs_sum n=3 unbiased", Small(make_abs_sum(Vector::Constant(3, 0.1), box(3)), NoiseModel::additive_gaussian(0.05), 0.1, 0.1, 0.6), 1.0},
  };
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    const TheoryParams tp = make_theory_params(cell.experiment.problem);
    double bound = 1.0;
    try {
      bound = concentration_bound(cell.experiment.T, cell.epsilon, cell.experiment.schedule, tp);
    } catch (const BurnInError&) {
    }
    if (bound > 0.5) {
      ok = false;
      detail += Fmt(" [%s: bound %.3g > 0.5, cell not admissible]", cell.name.c_str(), bound);
      continue;
    }
    const ProbabilityEstimate est =
        empirical_convergence_probability(cell.experiment, tp, cell.experiment.T, cell.epsilon, 200, 6000 + c);
    const double fail_fraction = 1.0 - est.fraction;
    const bool cell_ok = fail_fraction <= bound + est.half_width();
    ok = ok && cell_ok;
    detail += Fmt(" [%s: fail %.3f <= bound %.3f + %.3f %s]", cell.name.c_str(), fail_fraction, bound,
                  est.half_width(), cell_ok ? "ok" : "VIOLATED");
  }
  return {ok, "6 cells, 200 trials each, T = 1e5:" + detail};
}

// 7. Closed forms and scans against independent implementations.
Verdict Analysis() {
  using HighPrecision = boost::multiprecision::cpp_bin_float_50;
  RandomStream rng(7007);
  double worst_mu = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const auto cls = draw % 2 ? SmoothnessClass::kC11 : SmoothnessClass::kC00;
    const double L = 0.5 + 4.5 * rng.uniform(), k1 = draw % 3 ? 1.0 : std::sqrt(3.0);
    const double B = 0.01 + 0.2 * rng.uniform(), D = 0.5 + 3 * rng.uniform();
    const int n = 1 + static_cast<int>(8 * rng.uniform());
    auto radius = [&](double mu) { return radius_at_mu(cls, mu, L, k1, B, D, n); };
    const double numeric =
        boost::math::tools::brent_find_minima(radius, 1e-9, 10.0, std::numeric_limits<double>::digits).first;
    worst_mu = std::max(worst_mu, std::abs(optimal_mu(cls, L, k1, B, D, n) - numeric) / numeric);
  }

  int scans_equal = 0;
  for (int draw = 0; draw < 10; ++draw) {
    const double a = 0.5 + rng.uniform(), p = 0.65 + 0.25 * rng.uniform(), eps = 1 + rng.uniform();
    const double conf = 0.5 + 0.3 * rng.uniform();
    TheoryParams tp;
    tp.K = 0.05 + 0.45 * rng.uniform();
    tp.C = 0.05 + rng.uniform();
    tp.D = 0.5 + rng.uniform();
    const long double p1 = 1.0L - conf;
    long double s1 = 0, s2 = 0;
    std::int64_t brute = 0;
    for (std::int64_t t = 1;; ++t) {
      const long double alpha = a * std::pow(static_cast<long double>(t), -static_cast<long double>(p));
      s1 += alpha;
      s2 += alpha * alpha;
      if (s1 >= 3.0L * tp.D / eps && s1 >= 6.0L * tp.K / (eps * p1) * s2 &&
          s1 * s1 >= 18.0L * tp.C * tp.D / (static_cast<long double>(eps) * eps * p1) * s2) {
        brute = t;
        break;
      }
    }
    if (min_iterations_for_confidence(conf, eps, StepSchedule::power(a, p), tp) == brute) ++scans_equal;
  }

  double worst_sum = 0.0;
  for (auto [a, p] : {std::pair{1.0, 0.75}, std::pair{0.5, 0.55}, std::pair{2.0, 1.0}}) {
    PartialSums sums(StepSchedule::power(a, p));
    HighPrecision s1 = 0, s2 = 0;
    for (std::int64_t k = 1; k <= 100000; ++k) {
      sums.advance();
      const HighPrecision alpha = HighPrecision(a) * boost::multiprecision::pow(HighPrecision(k), -HighPrecision(p));
      s1 += alpha;
      s2 += alpha * alpha;
    }
    worst_sum = std::max(worst_sum, std::abs(sums.sum_alpha() / s1.convert_to<double>() - 1));
    worst_sum = std::max(worst_sum, std::abs(sums.sum_alpha_sq() / s2.convert_to<double>() - 1));
  }
  return {worst_mu <= 1e-6 && scans_equal == 10 && worst_sum <= 1e-10,
          Fmt("optimal_mu vs Brent max rel %.2g (<= 1e-6); scans equal %d/10; partial sums max rel %.2g (<= 1e-10)",
              worst_mu, scans_equal, worst_sum)};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Two identical runs through the command layer.
Verdict Determinism(const fs::path& config) {
  const fs::path root = fs::temp_directory_path() / "zomd_acceptance";
  fs::remove_all(root);
  std::ostringstream sink;
  for (const char* name : {"a", "b"}) {
    cli::CommandOptions o;
    o.config = config;
    o.out = root / name;
    o.trials = 2;
    o.quiet = true;
    if (cli::cmd_run(o, sink, sink) != cli::kExitOk) return {false, "run failed: " + sink.str()};
  }
  int files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path twin = root / "b" / entry.path().filename();
    if (fs::exists(twin) && Slurp(entry.path()) == Slurp(twin)) ++same;
  }
  return {files >= 3 && same == files, Fmt("%d/%d output files byte-identical", same, files)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(ZOMD_CONFIG_DIR) / "biased_box.json";
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "geometry exactness", 60, GeometryExactness},
      {2, "estimator bias bound", 120, Bias},
      {3, "estimator second-moment bound", 120, SecondMoment},
      {4, "unbiased convergence", 300, Unbiased},
      {5, "biased convergence", 600, Biased},
      {6, "concentration bound one-sidedness", 1800, Concentration},
      {7, "analysis self-consistency", 60, Analysis},
      {8, "determinism", 60, [&] { return Determinism(config); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.limit_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %d (%s): %s; %.1f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), seconds, c.limit_seconds, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
