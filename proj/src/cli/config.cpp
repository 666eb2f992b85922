#include "zomd/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "zomd/cli/json_locator.hpp"
#include "zomd/errors.hpp"

namespace zomd::cli {

namespace {

[[noreturn]] void Fail(const std::string& pointer, const std::string& message) {
  throw ConfigFieldError(pointer.empty() ? "/" : pointer, message);
}

template <typename T>
T Get(const Json& j, const std::string& ptr);

template <>
double Get<double>(const Json& j, const std::string& ptr) {
  if (!j.is_number()) Fail(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Fail(ptr, "expected a finite number");
  return v;
}

template <>
std::int64_t Get<std::int64_t>(const Json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) {
    if (j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      Fail(ptr, "integer out of range");
    }
    return static_cast<std::int64_t>(j.get<std::uint64_t>());
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  // Accept 1e5-style literals when they are exact integers.
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  Fail(ptr, "expected an integer");
}

template <>
std::uint64_t Get<std::uint64_t>(const Json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::int64_t v = Get<std::int64_t>(j, ptr);
  if (v < 0) Fail(ptr, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

template <>
int Get<int>(const Json& j, const std::string& ptr) {
  const std::int64_t v = Get<std::int64_t>(j, ptr);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) Fail(ptr, "integer out of range");
  return static_cast<int>(v);
}

template <>
unsigned Get<unsigned>(const Json& j, const std::string& ptr) {
  const std::uint64_t v = Get<std::uint64_t>(j, ptr);
  if (v > std::numeric_limits<unsigned>::max()) Fail(ptr, "integer out of range");
  return static_cast<unsigned>(v);
}

template <>
std::string Get<std::string>(const Json& j, const std::string& ptr) {
  if (!j.is_string()) Fail(ptr, "expected a string");
  return j.get<std::string>();
}

template <>
std::vector<double> Get<std::vector<double>>(const Json& j, const std::string& ptr) {
  if (!j.is_array()) Fail(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(Get<double>(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

template <>
std::vector<std::vector<double>> Get<std::vector<std::vector<double>>>(const Json& j, const std::string& ptr) {
  if (!j.is_array()) Fail(ptr, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(Get<std::vector<double>>(j[i], ptr + "/" + std::to_string(i)));
  }
  return out;
}

template <>
std::vector<std::string> Get<std::vector<std::string>>(const Json& j, const std::string& ptr) {
  if (!j.is_array()) Fail(ptr, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(Get<std::string>(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

// One JSON object being read; rejects members nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) Fail(ptr_, "expected an object");
  }

  std::string at(const std::string& key) const { return ptr_ + "/" + key; }

  template <typename T>
  T required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) Fail(at(key), "missing required member '" + key + "'");
    return Get<T>(j_.at(key), at(key));
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Get<T>(j_.at(key), at(key));
  }

  Section section(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) Fail(at(key), "missing required section '" + key + "'");
    return Section(j_.at(key), at(key));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) Fail(at(item.key()), "unknown member '" + item.key() + "'");
    }
  }

 private:
  const Json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

template <typename T>
void Put(Json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

// Integral doubles are written as integers so that hand-written configs survive a round trip unchanged.
Json Number(double v) {
  if (v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  return v;
}

Json Numbers(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(Number(v));
  return out;
}

void PutNumber(Json& j, const char* key, const std::optional<double>& value) {
  if (value) j[key] = Number(*value);
}

void PutNumbers(Json& j, const char* key, const std::optional<std::vector<double>>& values) {
  if (values) j[key] = Numbers(*values);
}

Vector ToVector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void CheckLength(const std::vector<double>& values, int n, const std::string& ptr) {
  if (static_cast<int>(values.size()) != n) {
    Fail(ptr, "expected " + std::to_string(n) + " entries (the configured dimension), got " +
                  std::to_string(values.size()));
  }
}

void Forbid(bool present, const std::string& ptr, const std::string& why) {
  if (present) Fail(ptr, why);
}

// Runs a library constructor and attributes its ConfigError to `ptr`.
template <typename F>
auto Attributed(const std::string& ptr, F&& make) {
  try {
    return make();
  } catch (const ConfigFieldError&) {
    throw;
  } catch (const Error& e) {
    Fail(ptr, e.what());
  }
}

FeasibleSet BuildSet(const ExperimentConfig& cfg, Norm primal) {
  const SetConfig& s = cfg.geometry.set;
  const int n = cfg.dimension;
  const std::string ptr = "/geometry/set";
  if (s.kind == "box") {
    Forbid(s.center.has_value(), ptr + "/center", "'center' is not used by a box");
    Forbid(s.radius.has_value(), ptr + "/radius", "'radius' is not used by a box");
    if (!s.lo) Fail(ptr + "/lo", "box requires 'lo'");
    if (!s.hi) Fail(ptr + "/hi", "box requires 'hi'");
    CheckLength(*s.lo, n, ptr + "/lo");
    CheckLength(*s.hi, n, ptr + "/hi");
    for (int i = 0; i < n; ++i) {
      if (!((*s.lo)[i] <= (*s.hi)[i])) Fail(ptr + "/hi/" + std::to_string(i), "box requires lo <= hi");
    }
    return Attributed(ptr, [&] { return FeasibleSet::box(ToVector(*s.lo), ToVector(*s.hi), primal); });
  }
  if (s.kind == "ball") {
    Forbid(s.lo.has_value(), ptr + "/lo", "'lo' is not used by a ball");
    Forbid(s.hi.has_value(), ptr + "/hi", "'hi' is not used by a ball");
    if (!s.radius) Fail(ptr + "/radius", "ball requires 'radius'");
    if (!(*s.radius > 0.0)) Fail(ptr + "/radius", "ball radius must be > 0");
    Vector center = Vector::Zero(n);
    if (s.center) {
      CheckLength(*s.center, n, ptr + "/center");
      center = ToVector(*s.center);
    }
    return Attributed(ptr, [&] { return FeasibleSet::ball(center, *s.radius, primal); });
  }
  if (s.kind == "simplex") {
    Forbid(s.lo.has_value(), ptr + "/lo", "'lo' is not used by a simplex");
    Forbid(s.hi.has_value(), ptr + "/hi", "'hi' is not used by a simplex");
    Forbid(s.center.has_value(), ptr + "/center", "'center' is not used by a simplex");
    Forbid(s.radius.has_value(), ptr + "/radius", "'radius' is not used by a simplex");
    return Attributed(ptr, [&] { return FeasibleSet::simplex(n, primal); });
  }
  Fail(ptr + "/kind", "unknown set kind '" + s.kind + "' (expected box, ball or simplex)");
}

ObjectiveSpec BuildObjective(const ExperimentConfig& cfg, const FeasibleSet& set) {
  const ObjectiveConfig& o = cfg.objective;
  const int n = cfg.dimension;
  const std::string ptr = "/objective";
  if (o.kind == "quadratic") {
    Forbid(o.a.has_value(), ptr + "/a", "'a' is not used by a quadratic");
    Forbid(o.scale.has_value(), ptr + "/scale", "'scale' is not used by a quadratic");
    if (!o.Q) Fail(ptr + "/Q", "quadratic requires 'Q'");
    if (static_cast<int>(o.Q->size()) != n) Fail(ptr + "/Q", "Q must have " + std::to_string(n) + " rows");
    Eigen::MatrixXd Q(n, n);
    for (int i = 0; i < n; ++i) {
      CheckLength((*o.Q)[i], n, ptr + "/Q/" + std::to_string(i));
      for (int j = 0; j < n; ++j) Q(i, j) = (*o.Q)[i][j];
    }
    Vector c = Vector::Zero(n);
    if (o.c) {
      CheckLength(*o.c, n, ptr + "/c");
      c = ToVector(*o.c);
    }
    return Attributed(ptr + "/Q", [&] { return make_quadratic(Q, c, set); });
  }
  if (o.kind == "abs_sum") {
    Forbid(o.Q.has_value(), ptr + "/Q", "'Q' is not used by abs_sum");
    Forbid(o.c.has_value(), ptr + "/c", "'c' is not used by abs_sum");
    Forbid(o.scale.has_value(), ptr + "/scale", "'scale' is not used by abs_sum");
    Vector a = Vector::Zero(n);
    if (o.a) {
      CheckLength(*o.a, n, ptr + "/a");
      a = ToVector(*o.a);
    }
    return Attributed(ptr, [&] { return make_abs_sum(a, set); });
  }
  if (o.kind == "log_sum_exp") {
    Forbid(o.Q.has_value(), ptr + "/Q", "'Q' is not used by log_sum_exp");
    Forbid(o.c.has_value(), ptr + "/c", "'c' is not used by log_sum_exp");
    Forbid(o.a.has_value(), ptr + "/a", "'a' is not used by log_sum_exp");
    const double scale = o.scale.value_or(1.0);
    if (!(scale > 0.0)) Fail(ptr + "/scale", "log_sum_exp scale must be > 0");
    return Attributed(ptr, [&] { return make_log_sum_exp(scale, set); });
  }
  Fail(ptr + "/kind", "unknown objective kind '" + o.kind + "' (expected quadratic, abs_sum or log_sum_exp)");
}

NoiseModel BuildNoise(const NoiseConfig& z) {
  const std::string ptr = "/noise";
  if (z.V && !(*z.V > 0.0)) Fail(ptr + "/V", "declared V must be > 0");
  if (z.sd && !(*z.sd >= 0.0)) Fail(ptr + "/sd", "sd must be >= 0");
  if (z.B && !(*z.B >= 0.0)) Fail(ptr + "/B", "bias bound B must be >= 0");
  if (z.kind == "none") {
    Forbid(z.B.has_value(), ptr + "/B", "'B' is not used by noise kind none");
    Forbid(z.sd.has_value(), ptr + "/sd", "'sd' is not used by noise kind none");
    Forbid(z.V.has_value(), ptr + "/V", "'V' is not used by noise kind none");
    Forbid(z.bias_field.has_value(), ptr + "/bias_field", "'bias_field' is not used by noise kind none");
    return NoiseModel::none();
  }
  if (z.kind == "additive_gaussian") {
    Forbid(z.B.has_value(), ptr + "/B", "'B' is not used by additive_gaussian noise");
    Forbid(z.bias_field.has_value(), ptr + "/bias_field", "'bias_field' is not used by additive_gaussian noise");
    if (!z.sd) Fail(ptr + "/sd", "additive_gaussian noise requires 'sd'");
    return NoiseModel::additive_gaussian(*z.sd, z.V);
  }
  if (z.kind == "biased") {
    if (!z.B) Fail(ptr + "/B", "biased noise requires 'B'");
    BiasField field = BiasField::kSine;
    if (z.bias_field) {
      if (*z.bias_field == "sine") {
        field = BiasField::kSine;
      } else if (*z.bias_field == "constant") {
        field = BiasField::kConstant;
      } else {
        Fail(ptr + "/bias_field", "unknown bias field '" + *z.bias_field + "' (expected sine or constant)");
      }
    }
    return NoiseModel::biased(*z.B, z.sd.value_or(0.0), field, z.V);
  }
  Fail(ptr + "/kind", "unknown noise kind '" + z.kind + "' (expected none, additive_gaussian or biased)");
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");
  cfg.dimension = root.required<int>("dimension");

  {
    Section s = root.section("objective");
    cfg.objective.kind = s.required<std::string>("kind");
    cfg.objective.Q = s.optional<std::vector<std::vector<double>>>("Q");
    cfg.objective.c = s.optional<std::vector<double>>("c");
    cfg.objective.a = s.optional<std::vector<double>>("a");
    cfg.objective.scale = s.optional<double>("scale");
    cfg.objective.smoothness_class = s.optional<std::string>("smoothness_class");
    s.finish();
  }
  {
    Section s = root.section("noise");
    cfg.noise.kind = s.required<std::string>("kind");
    cfg.noise.B = s.optional<double>("B");
    cfg.noise.sd = s.optional<double>("sd");
    cfg.noise.V = s.optional<double>("V");
    cfg.noise.bias_field = s.optional<std::string>("bias_field");
    s.finish();
  }
  {
    Section s = root.section("geometry");
    cfg.geometry.mirror_map = s.required<std::string>("mirror_map");
    cfg.geometry.norm = s.optional<std::string>("norm");
    Section set = s.section("set");
    cfg.geometry.set.kind = set.required<std::string>("kind");
    cfg.geometry.set.lo = set.optional<std::vector<double>>("lo");
    cfg.geometry.set.hi = set.optional<std::vector<double>>("hi");
    cfg.geometry.set.center = set.optional<std::vector<double>>("center");
    cfg.geometry.set.radius = set.optional<double>("radius");
    set.finish();
    s.finish();
  }
  {
    Section s = root.section("estimator");
    cfg.estimator.mu = s.required<double>("mu");
    s.finish();
  }
  {
    Section s = root.section("schedule");
    cfg.schedule.a = s.required<double>("a");
    cfg.schedule.p = s.required<double>("p");
    cfg.schedule.T_max = s.optional<std::int64_t>("T_max");
    s.finish();
  }
  {
    Section s = root.section("run");
    cfg.run.T = s.required<std::int64_t>("T");
    cfg.run.trials = s.optional<std::int64_t>("trials");
    cfg.run.master_seed = s.optional<std::uint64_t>("master_seed");
    cfg.run.x1 = s.optional<std::vector<double>>("x1");
    cfg.run.workers = s.optional<unsigned>("workers");
    s.finish();
  }
  if (root.has("analysis")) {
    Section s = root.section("analysis");
    cfg.analysis.epsilon = s.optional<std::vector<double>>("epsilon");
    cfg.analysis.confidence = s.optional<std::vector<double>>("confidence");
    cfg.analysis.delta_variant = s.optional<std::string>("delta_variant");
    cfg.analysis.c_variant = s.optional<std::string>("c_variant");
    cfg.analysis.second_moment_variant = s.optional<std::string>("second_moment_variant");
    cfg.analysis.curve_points = s.optional<int>("curve_points");
    cfg.analysis.scan_cap = s.optional<std::int64_t>("scan_cap");
    cfg.analysis.verify_mu = s.optional<std::vector<double>>("verify_mu");
    cfg.analysis.verify_points = s.optional<int>("verify_points");
    cfg.analysis.verify_samples = s.optional<std::int64_t>("verify_samples");
    s.finish();
  }
  if (root.has("output")) {
    Section s = root.section("output");
    cfg.output.directory = s.optional<std::string>("directory");
    cfg.output.formats = s.optional<std::vector<std::string>>("formats");
    s.finish();
  }
  root.finish();
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json doc = Json::object();
  doc["dimension"] = cfg.dimension;

  Json objective = {{"kind", cfg.objective.kind}};
  if (cfg.objective.Q) {
    Json rows = Json::array();
    for (const auto& row : *cfg.objective.Q) rows.push_back(Numbers(row));
    objective["Q"] = rows;
  }
  PutNumbers(objective, "c", cfg.objective.c);
  PutNumbers(objective, "a", cfg.objective.a);
  PutNumber(objective, "scale", cfg.objective.scale);
  Put(objective, "smoothness_class", cfg.objective.smoothness_class);
  doc["objective"] = objective;

  Json noise = {{"kind", cfg.noise.kind}};
  PutNumber(noise, "B", cfg.noise.B);
  PutNumber(noise, "sd", cfg.noise.sd);
  PutNumber(noise, "V", cfg.noise.V);
  Put(noise, "bias_field", cfg.noise.bias_field);
  doc["noise"] = noise;

  Json set = {{"kind", cfg.geometry.set.kind}};
  PutNumbers(set, "lo", cfg.geometry.set.lo);
  PutNumbers(set, "hi", cfg.geometry.set.hi);
  PutNumbers(set, "center", cfg.geometry.set.center);
  PutNumber(set, "radius", cfg.geometry.set.radius);
  Json geometry = {{"mirror_map", cfg.geometry.mirror_map}, {"set", set}};
  Put(geometry, "norm", cfg.geometry.norm);
  doc["geometry"] = geometry;

  doc["estimator"] = {{"mu", Number(cfg.estimator.mu)}};

  Json schedule = {{"a", Number(cfg.schedule.a)}, {"p", Number(cfg.schedule.p)}};
  Put(schedule, "T_max", cfg.schedule.T_max);
  doc["schedule"] = schedule;

  Json run = {{"T", cfg.run.T}};
  Put(run, "trials", cfg.run.trials);
  Put(run, "master_seed", cfg.run.master_seed);
  PutNumbers(run, "x1", cfg.run.x1);
  Put(run, "workers", cfg.run.workers);
  doc["run"] = run;

  Json analysis = Json::object();
  PutNumbers(analysis, "epsilon", cfg.analysis.epsilon);
  PutNumbers(analysis, "confidence", cfg.analysis.confidence);
  Put(analysis, "delta_variant", cfg.analysis.delta_variant);
  Put(analysis, "c_variant", cfg.analysis.c_variant);
  Put(analysis, "second_moment_variant", cfg.analysis.second_moment_variant);
  Put(analysis, "curve_points", cfg.analysis.curve_points);
  Put(analysis, "scan_cap", cfg.analysis.scan_cap);
  PutNumbers(analysis, "verify_mu", cfg.analysis.verify_mu);
  Put(analysis, "verify_points", cfg.analysis.verify_points);
  Put(analysis, "verify_samples", cfg.analysis.verify_samples);
  if (!analysis.empty()) doc["analysis"] = analysis;

  Json output = Json::object();
  Put(output, "directory", cfg.output.directory);
  Put(output, "formats", cfg.output.formats);
  if (!output.empty()) doc["output"] = output;
  return doc;
}

Built build(const ExperimentConfig& cfg, std::optional<double> mu_override) {
  const int n = cfg.dimension;
  if (n < 1) Fail("/dimension", "dimension must be >= 1");

  const std::string& set_kind = cfg.geometry.set.kind;
  Norm primal = set_kind == "simplex" ? Norm::kL1 : Norm::kL2;
  if (cfg.geometry.norm) {
    primal = Attributed("/geometry/norm", [&] { return parse_norm(*cfg.geometry.norm); });
  }
  const MirrorKind mirror =
      Attributed("/geometry/mirror_map", [&] { return parse_mirror_kind(cfg.geometry.mirror_map); });
  if (mirror == MirrorKind::kNegativeEntropy && set_kind != "simplex") {
    Fail("/geometry/mirror_map", "negative_entropy requires a simplex feasible set");
  }
  if (mirror == MirrorKind::kEuclidean && set_kind == "simplex") {
    Fail("/geometry/mirror_map", "the simplex is supported with the negative_entropy mirror map only");
  }

  FeasibleSet set = BuildSet(cfg, primal);
  Geometry geometry = Attributed("/geometry", [&] { return Geometry(set, mirror); });
  ObjectiveSpec objective = BuildObjective(cfg, set);
  NoiseModel noise = BuildNoise(cfg.noise);

  TheoryOptions theory;
  if (cfg.objective.smoothness_class) {
    const std::string ptr = "/objective/smoothness_class";
    theory.cls = Attributed(ptr, [&] { return parse_smoothness_class(*cfg.objective.smoothness_class); });
    if (*theory.cls == SmoothnessClass::kC11 && !objective.gradient_lipschitz()) {
      Fail(ptr, "C11 bounds require a Lipschitz gradient and a gradient bound G; " +
                    std::string(objective.kind_name()) + " is not differentiable");
    }
  }

  const double mu = mu_override.value_or(cfg.estimator.mu);
  if (!(mu > 0.0)) Fail("/estimator/mu", "smoothing radius mu must be > 0");
  NgaConfig nga = Attributed("/estimator/mu", [&] { return NgaConfig(mu, n); });

  if (!(cfg.schedule.a > 0.0)) Fail("/schedule/a", "step size scale a must be > 0");
  const std::string schedule_ptr = cfg.schedule.p > 0.5 && cfg.schedule.p <= 1.0 ? "/schedule/T_max" : "/schedule/p";
  StepSchedule schedule = Attributed(
      schedule_ptr, [&] { return StepSchedule::power(cfg.schedule.a, cfg.schedule.p, cfg.schedule.T_max); });

  if (cfg.run.T < 1) Fail("/run/T", "T must be >= 1");
  if (cfg.schedule.T_max && cfg.run.T > *cfg.schedule.T_max) {
    Fail("/run/T", "T exceeds the schedule cap T_max = " + std::to_string(*cfg.schedule.T_max));
  }
  Vector x1 = set.bregman_center();
  if (cfg.run.x1) {
    CheckLength(*cfg.run.x1, n, "/run/x1");
    x1 = ToVector(*cfg.run.x1);
    if (!set.contains(x1, 1e-12)) Fail("/run/x1", "x1 is not in the feasible set");
  }
  const std::int64_t trials = cfg.run.trials.value_or(1);
  if (trials < 1) Fail("/run/trials", "trials must be >= 1");

  Built built{Experiment{Problem{objective, noise, geometry, nga}, schedule, x1, cfg.run.T},
              theory,
              trials,
              cfg.run.master_seed.value_or(0),
              cfg.run.workers.value_or(0),
              {},
              {}};

  const AnalysisConfig& an = cfg.analysis;
  built.epsilons = an.epsilon.value_or(std::vector<double>{0.1});
  for (std::size_t i = 0; i < built.epsilons.size(); ++i) {
    if (!(built.epsilons[i] > 0.0)) Fail("/analysis/epsilon/" + std::to_string(i), "epsilon must be > 0");
  }
  built.confidences = an.confidence.value_or(std::vector<double>{0.9});
  for (std::size_t i = 0; i < built.confidences.size(); ++i) {
    const double p = built.confidences[i];
    if (!(p > 0.0 && p < 1.0)) Fail("/analysis/confidence/" + std::to_string(i), "confidence must lie in (0, 1)");
  }
  if (an.delta_variant) {
    if (*an.delta_variant == "sqrt_n") {
      built.theory.delta = DeltaVariant::kSqrtN;
    } else if (*an.delta_variant == "n") {
      built.theory.delta = DeltaVariant::kN;
    } else {
      Fail("/analysis/delta_variant", "expected sqrt_n or n");
    }
  }
  if (an.c_variant) {
    if (*an.c_variant == "k1_squared") {
      built.theory.c = CVariant::kSquaredK1;
    } else if (*an.c_variant == "k1_printed") {
      built.theory.c = CVariant::kPrintedK1;
    } else {
      Fail("/analysis/c_variant", "expected k1_squared or k1_printed");
    }
  }
  if (an.second_moment_variant) {
    const std::string ptr = "/analysis/second_moment_variant";
    const SmoothnessClass cls = built.theory.cls.value_or(objective.natural_class());
    if (*an.second_moment_variant == "standard") {
      built.theory.moment = MomentVariant::kStandard;
    } else if (*an.second_moment_variant == "l1_printed") {
      if (cls != SmoothnessClass::kC11) Fail(ptr, "l1_printed applies to the C11 bound only");
      built.theory.moment = MomentVariant::kPrintedL1;
    } else if (*an.second_moment_variant == "fourth_moment") {
      if (cls != SmoothnessClass::kC00) Fail(ptr, "fourth_moment applies to the C00 bound only");
      built.theory.moment = MomentVariant::kFourthMoment;
    } else {
      Fail(ptr, "expected standard, l1_printed or fourth_moment");
    }
  }
  built.curve_points = an.curve_points.value_or(20);
  if (built.curve_points < 2) Fail("/analysis/curve_points", "curve_points must be >= 2");
  built.scan_cap = an.scan_cap.value_or(100'000'000);
  if (built.scan_cap < 1) Fail("/analysis/scan_cap", "scan_cap must be >= 1");
  if (an.verify_mu) {
    if (an.verify_mu->empty()) Fail("/analysis/verify_mu", "verify_mu must not be empty");
    for (std::size_t i = 0; i < an.verify_mu->size(); ++i) {
      if (!((*an.verify_mu)[i] > 0.0)) Fail("/analysis/verify_mu/" + std::to_string(i), "mu must be > 0");
    }
  }
  if (an.verify_points && *an.verify_points < 1) Fail("/analysis/verify_points", "verify_points must be >= 1");
  if (an.verify_samples && *an.verify_samples < 10000) {
    Fail("/analysis/verify_samples", "verify_samples must be >= 10000");
  }
  if (cfg.output.formats) {
    for (std::size_t i = 0; i < cfg.output.formats->size(); ++i) {
      const std::string& f = (*cfg.output.formats)[i];
      if (f != "csv" && f != "json") Fail("/output/formats/" + std::to_string(i), "expected csv or json");
    }
  }
  return built;
}

ExperimentConfig load_config_text(const std::string& text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  try {
    ExperimentConfig cfg = parse_config(doc);
    build(cfg);
    return cfg;
  } catch (const ConfigFieldError& e) {
    const int line = locate_line(text, e.pointer()).value_or(1);
    throw ConfigError(source + ":" + std::to_string(line) + ": " + e.pointer() + ": " + e.message());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot read config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_config_text(buffer.str(), path.string());
}

}  // namespace zomd::cli
