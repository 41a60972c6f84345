#include "memdyn/cli.hpp"

#include "memdyn/certify.hpp"
#include "memdyn/difference.hpp"
#include "memdyn/io.hpp"
#include "memdyn/measure.hpp"
#include "memdyn/memory.hpp"
#include "memdyn/ndde.hpp"
#include "memdyn/telegraph.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace memdyn::cli {

namespace {

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

/// Read access to one JSON object of the config that remembers which keys
/// were consumed, so that leftovers can be rejected.
class Section {
 public:
  Section(Json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  double num(const std::string& k) {
    const Json& v = at(k);
    if (!v.is_number()) fail(k, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(k, "expected a finite number");
    return x;
  }
  double num(const std::string& k, double def) { return has(k) ? num(k) : (mark(k), def); }

  int integer(const std::string& k) {
    const Json& v = at(k);
    if (!v.is_number_integer()) fail(k, "expected an integer");
    return v.get<int>();
  }
  int integer(const std::string& k, int def) { return has(k) ? integer(k) : (mark(k), def); }

  std::uint64_t u64(const std::string& k, std::uint64_t def) {
    if (!has(k)) return mark(k), def;
    const Json& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(k, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string str(const std::string& k) {
    const Json& v = at(k);
    if (!v.is_string()) fail(k, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& def) {
    return has(k) ? str(k) : (mark(k), def);
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return mark(k), def;
    const Json& v = at(k);
    if (!v.is_boolean()) fail(k, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> list(const std::string& k) {
    const Json& v = at(k);
    if (!v.is_array()) fail(k, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) fail(k, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vec vec(const std::string& k) {
    const auto l = list(k);
    return Eigen::Map<const Vec>(l.data(), static_cast<Eigen::Index>(l.size()));
  }

  /// Vector of length n; a scalar is broadcast.
  Vec vec(const std::string& k, int n) {
    const Json& v = at(k);
    if (v.is_number()) return Vec::Constant(n, num(k));
    Vec x = vec(k);
    if (x.size() != n) fail(k, "expected " + std::to_string(n) + " entries");
    return x;
  }

  Mat mat(const std::string& k) {
    const Json& v = at(k);
    if (!v.is_array() || v.empty()) fail(k, "expected a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Mat M;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Json& row = v[static_cast<std::size_t>(i)];
      if (!row.is_array()) fail(k, "expected an array of rows");
      if (cols < 0) {
        cols = static_cast<Eigen::Index>(row.size());
        M.resize(rows, cols);
      }
      if (static_cast<Eigen::Index>(row.size()) != cols) fail(k, "rows have different lengths");
      for (Eigen::Index c = 0; c < cols; ++c) {
        const Json& e = row[static_cast<std::size_t>(c)];
        if (!e.is_number()) fail(k, "matrix entries must be numbers");
        M(i, c) = e.get<double>();
      }
    }
    return M;
  }

  Section sub(const std::string& k) { return Section(at(k), child(k)); }

  const Json& raw(const std::string& k) { return at(k); }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

  std::string child(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  [[noreturn]] void fail(const std::string& k, const std::string& msg) const {
    const std::string where = k.empty() ? (path_.empty() ? "<root>" : path_) : child(k);
    throw ConfigError("config: " + where + ": " + msg);
  }

 private:
  const Json& at(const std::string& k) {
    if (!j_.contains(k)) fail(k, "missing required key");
    used_.insert(k);
    return j_.at(k);
  }
  void mark(const std::string& k) { used_.insert(k); }

  Json j_;
  std::string path_;
  std::set<std::string> used_;
};

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool quiet = false;
};

struct Context {
  Options opt;
  std::uint64_t seed = 0;
  std::string out;
  std::ostream& log;
  void say(const std::string& line) const {
    if (!opt.quiet) log << line << '\n';
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- systems

struct SystemSpec {
  std::string preset;
  std::optional<NddeSystem> ndde;
  std::optional<DifferenceSystem> difference;
  int dim() const { return ndde ? ndde->dim() : difference->dim(); }
  double tau() const { return ndde ? ndde->tau : difference->tau; }
  const Mat& B() const { return ndde ? ndde->B : difference->B; }
};

BraytonMirankerParams parse_bm(Section& s) {
  BraytonMirankerParams p;
  p.q = s.num("q", p.q);
  p.m = s.num("m", p.m);
  p.p = s.num("p", p.p);
  p.b = s.num("b", p.b);
  p.c = s.num("c", p.c);
  p.alpha1 = s.num("alpha1", p.alpha1);
  p.alpha2 = s.num("alpha2", p.alpha2);
  p.tau = s.num("tau", p.tau);
  return p;
}

SystemSpec parse_system(Section s) {
  SystemSpec spec;
  spec.preset = s.str("preset");
  if (spec.preset == "brayton_miranker") {
    spec.ndde.emplace(brayton_miranker(parse_bm(s)));
  } else if (spec.preset == "linear") {
    const double tau = s.num("tau");
    const Mat B = s.mat("B");
    const int n = static_cast<int>(B.rows());
    const Mat A = s.has("A") ? s.mat("A") : Mat::Zero(n, n);
    const Mat Ad = s.has("A_delay") ? s.mat("A_delay") : Mat::Zero(n, n);
    const Vec p = s.has("p") ? s.vec("p", n) : Vec::Zero(n);
    spec.ndde.emplace(linear_ndde(tau, B, A, Ad, p));
  } else if (spec.preset == "difference") {
    const double tau = s.num("tau");
    const Mat B = s.mat("B");
    const Vec f = s.has("f") ? s.vec("f", static_cast<int>(B.rows())) : Vec::Zero(B.rows());
    spec.difference.emplace(tau, B, f);
  } else {
    s.fail("preset", "unknown preset '" + spec.preset +
                         "' (expected brayton_miranker, linear or difference)");
  }
  s.finish();
  return spec;
}

HistorySegment parse_history(Section s, int dim, double tau, std::mt19937_64& rng) {
  const std::string kind = s.str("kind");
  const int N = s.integer("intervals", 100);
  if (N < 2) s.fail("intervals", "must be at least 2");
  std::optional<HistorySegment> phi;
  if (kind == "constant") {
    phi = HistorySegment::constant(s.vec("value", dim), tau, N);
  } else if (kind == "sinusoid") {
    const Vec off = s.has("offset") ? s.vec("offset", dim) : Vec::Zero(dim);
    const Vec amp = s.vec("amplitude", dim);
    const double w = s.num("frequency", 1.0);
    const double ph = s.num("phase", 0.0);
    phi = HistorySegment::from_function(
        [&](double th) { return Vec(off + amp * std::sin(w * th + ph)); }, tau, N, dim);
  } else if (kind == "random") {
    const double r = s.num("sup_norm", 1.0);
    if (!(r >= 0.0)) s.fail("sup_norm", "must be nonnegative");
    phi = random_smooth_history(rng, dim, tau, N, r);
  } else if (kind == "table") {
    const Mat M = s.mat("values");
    if (M.cols() != dim) s.fail("values", "rows must have " + std::to_string(dim) + " entries");
    std::vector<Vec> v;
    for (Eigen::Index i = 0; i < M.rows(); ++i) v.push_back(M.row(i).transpose());
    phi = HistorySegment(tau, std::move(v));
  } else {
    s.fail("kind", "unknown history kind '" + kind + "' (expected constant, sinusoid, random or table)");
  }
  s.finish();
  return *phi;
}

Observable parse_observable(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  int idx = 1;
  if (colon != std::string::npos) {
    try {
      idx = std::stoi(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("config: observables: bad component in '" + spec + "'");
    }
  }
  if (idx < 1 || idx > dim) {
    throw ConfigError("config: observables: component out of range in '" + spec + "'");
  }
  if (name == "x0") return observables::now(idx - 1);
  if (name == "x0sq") return observables::now_squared(idx - 1);
  if (name == "xdelay") return observables::delayed(idx - 1);
  if (name == "supnorm" && colon == std::string::npos) return observables::sup_norm();
  throw ConfigError("config: observables: unknown observable '" + spec +
                    "' (expected x0:i, x0sq:i, xdelay:i or supnorm)");
}

// ---------------------------------------------------------------- commands

int cmd_simulate(Section& cfg, Context& ctx) {
  const SystemSpec sys = parse_system(cfg.sub("system"));
  std::mt19937_64 rng(ctx.seed);
  const HistorySegment phi = parse_history(cfg.sub("history"), sys.dim(), sys.tau(), rng);
  const double T = cfg.num("horizon");
  const double h = cfg.num("h", 0.01);
  IntegrateOptions io;
  io.blowup_threshold = cfg.num("blowup_threshold", io.blowup_threshold);
  cfg.finish();

  Trajectory tr;
  if (sys.difference) {
    const int k_max = std::max(1, static_cast<int>(std::ceil(T / sys.tau() - 1e-12)));
    tr = solve_difference(*sys.difference, phi, k_max);
  } else {
    tr = integrate(*sys.ndde, phi, T, h, io);
  }
  write_file(ctx.out, trajectory_csv(tr));
  ctx.say("simulate: " + sys.preset + " to t=" + fmt(tr.horizon()) + ", " +
          std::to_string(tr.size()) + " nodes, |x(T)|=" + fmt(tr.states.back().norm()) + " -> " +
          ctx.out);
  return kOk;
}

int cmd_certify(Section& cfg, Context& ctx) {
  const double alpha = cfg.num("alpha");
  const double beta = cfg.num("beta");
  const double gamma = cfg.num("gamma", 0.0);
  const double tau = cfg.num("tau");
  double b_norm;
  if (cfg.has("B")) {
    if (cfg.has("b_norm")) cfg.fail("b_norm", "give either b_norm or B, not both");
    b_norm = operator_norm(cfg.mat("B"));
  } else {
    b_norm = cfg.num("b_norm");
  }
  const DissipativityCertificate cert = contraction_constants(alpha, beta, gamma, b_norm, tau);
  Json out = to_json(cert);
  bool ok = cert.satisfied;

  if (cfg.has("phi_norm")) {
    const double pn = cfg.num("phi_norm");
    out["absorption_time"] = cert.satisfied ? Json(absorption_time(cert, pn)) : Json(nullptr);
  }
  if (cfg.has("falsify")) {
    Section f = cfg.sub("falsify");
    const SystemSpec sys = parse_system(f.sub("system"));
    if (!sys.ndde) f.fail("system", "falsification needs a neutral system");
    const double R = f.num("radius", 10.0);
    const int samples = f.integer("samples", 100000);
    if (samples < 0) f.fail("samples", "must be nonnegative");
    f.finish();
    const FalsifyReport rep = falsify_dissipation(sys.ndde->g, sys.ndde->B, alpha, beta, gamma, R,
                                                  static_cast<std::size_t>(samples), ctx.seed);
    out["falsify"] = to_json(rep);
    if (rep.max_defect > 0.0) ok = false;
  }
  if (cfg.has("validate_bm")) {
    Section v = cfg.sub("validate_bm");
    const double ap = v.num("alpha_prime");
    const double eps = v.num("epsilon");
    const BraytonMirankerParams p = parse_bm(v);
    v.finish();
    const BmValidation bm = validate_bm(p, ap, eps);
    out["validate_bm"] = to_json(bm);
    if (!bm.pass) ok = false;
  }
  cfg.finish();
  write_file(ctx.out, dump_json(out));
  ctx.say(std::string("certify: frak_c=") + fmt(cert.frak_c) +
          (cert.satisfied ? " < 1" : " >= 1") + (ok ? ", certificate holds" : ", certificate FAILED") +
          " -> " + ctx.out);
  return ok ? kOk : kFailed;
}

int cmd_measure(Section& cfg, Context& ctx) {
  const SystemSpec sys = parse_system(cfg.sub("system"));
  if (!sys.ndde) cfg.fail("system", "measure needs a neutral system");
  const NddeSystem& S = *sys.ndde;
  std::mt19937_64 rng(ctx.seed);
  Section hist = cfg.sub("history");
  const HistorySegment phi = parse_history(hist, S.dim(), S.tau, rng);
  const double T = cfg.num("horizon");
  const double h = cfg.num("h", 0.01);
  const double cauchy_tol = cfg.num("cauchy_tol", 1e-6);

  std::vector<Observable> obs;
  {
    const Json& list = cfg.raw("observables");
    if (!list.is_array() || list.empty()) cfg.fail("observables", "expected a nonempty array of names");
    for (const auto& e : list) {
      if (!e.is_string()) cfg.fail("observables", "expected strings");
      obs.push_back(parse_observable(e.get<std::string>(), S.dim()));
    }
  }

  double burn_in;
  if (cfg.has("burn_in")) {
    burn_in = cfg.num("burn_in");
    if (cfg.has("certificate")) cfg.fail("certificate", "give either burn_in or certificate");
  } else {
    const StabilityReport st = stability_report(S.B, S.tau);
    if (cfg.has("certificate")) {
      Section c = cfg.sub("certificate");
      const auto cert = contraction_constants(c.num("alpha"), c.num("beta"), c.num("gamma", 0.0),
                                              operator_norm(S.B), S.tau);
      c.finish();
      if (!cert.satisfied) {
        throw ConfigError("config: certificate: frak_c >= 1, no absorption time available");
      }
      burn_in = default_burn_in(cert, phi.sup_norm(), st.r_a0);
    } else {
      const double t = std::isfinite(st.r_a0) && st.r_a0 < 0.0 ? 20.0 / -st.r_a0 : 0.0;
      burn_in = std::ceil(t / S.tau - 1e-12) * S.tau;
    }
  }
  if (!(burn_in >= 0.0) || burn_in >= T) {
    throw ConfigError("config: burn-in " + fmt(burn_in) + " must lie in [0, horizon)");
  }

  std::optional<Section> inv, ens;
  if (cfg.has("invariance")) inv.emplace(cfg.sub("invariance"));
  if (cfg.has("ensemble")) ens.emplace(cfg.sub("ensemble"));
  const std::string snapshots_file = cfg.str("snapshots_file", "");
  cfg.finish();

  Json jobs = Json::array();
  if (ens) {
    const int members = ens->integer("members");
    const double R = ens->num("sup_norm", phi.sup_norm());
    const int N = phi.intervals();
    ens->finish();
    const HistorySampler sampler = [&](std::mt19937_64& g) {
      return random_smooth_history(g, S.dim(), S.tau, N, R);
    };
    for (const auto& o : obs) {
      const EnsembleResult r =
          ensemble_average(S, sampler, members, T, h, o, burn_in, ctx.seed, ctx.opt.threads);
      jobs.push_back({{"label", o.label}, {"mean", r.mean}, {"stderr", r.stderr_}});
    }
  } else {
    const Trajectory tr = integrate(S, phi, T, h);
    for (const auto& o : obs) {
      const CauchyResult c = cauchy_test(running_average(tr, o, burn_in), cauchy_tol);
      jobs.push_back({{"label", o.label},
                      {"mean", c.limit},
                      {"converged", c.converged},
                      {"cauchy_deviation", c.deviation}});
    }
  }

  Json out{{"system", sys.preset}, {"horizon", T}, {"burn_in", burn_in}, {"observables", jobs}};
  if (inv || !snapshots_file.empty()) {
    double stride = S.tau, t_star = S.tau;
    int chain = 1;
    if (inv) {
      stride = inv->num("stride", stride);
      t_star = inv->num("t_star", t_star);
      chain = inv->integer("chain", chain);
      inv->finish();
    }
    const EmpiricalMeasure mu = empirical_measure(S, phi, T, h, burn_in, stride);
    if (inv) out["invariance"] = to_json(invariance_defect(mu, S, t_star, h, obs, chain));
    if (!snapshots_file.empty()) {
      write_file(snapshots_file, snapshots_csv(mu));
      out["snapshots_file"] = snapshots_file;
    }
  }
  write_file(ctx.out, dump_json(out));
  std::string line = "measure: " + sys.preset + ", burn-in " + fmt(burn_in);
  for (const auto& j : jobs) {
    line += ", <" + j["label"].get<std::string>() + ">=" + fmt(j["mean"].get<double>());
  }
  ctx.say(line + " -> " + ctx.out);
  return kOk;
}

LineProfile parse_profile(Section s) {
  const std::string kind = s.str("kind");
  LineProfile f;
  if (kind == "constant") {
    const double v = s.num("value");
    f = [v](double) { return v; };
  } else if (kind == "polynomial") {
    const auto c = s.list("coefficients");
    f = [c](double x) {
      double acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
  } else if (kind == "sine") {
    const double off = s.num("offset", 0.0), a = s.num("amplitude"), w = s.num("frequency", 1.0),
                 ph = s.num("phase", 0.0);
    f = [=](double x) { return off + a * std::sin(std::numbers::pi * w * x + ph); };
  } else {
    s.fail("kind", "unknown profile kind '" + kind + "' (expected constant, polynomial or sine)");
  }
  s.finish();
  return f;
}

int cmd_telegraph(Section& cfg, Context& ctx) {
  Section ls = cfg.sub("line");
  const std::string bname = ls.str("boundary", "static");
  if (bname != "static" && bname != "dynamic") ls.fail("boundary", "expected static or dynamic");
  const TelegraphLine line(ls.num("L"), ls.num("C"), ls.num("R0", 0.0), ls.num("E", 0.0),
                           bname == "static" ? LineBoundary::Static : LineBoundary::Dynamic);
  std::optional<double> K;
  if (ls.has("integration_constant")) {
    if (line.boundary != LineBoundary::Dynamic) {
      ls.fail("integration_constant", "only meaningful for the dynamic boundary");
    }
    K = ls.num("integration_constant");
  }
  ls.finish();
  Section init = cfg.sub("initial");
  const LineProfile V0 = parse_profile(init.sub("V0"));
  const LineProfile I0 = parse_profile(init.sub("I0"));
  init.finish();
  const int N = cfg.integer("intervals", 200);
  if (N < 4) cfg.fail("intervals", "must be at least 4");
  const double T = cfg.num("horizon");
  const double h = cfg.num("h", line.tau() / N * 2.0);
  int nt = 101, nx = 21;
  double t0 = 0.0, t1 = T;
  if (cfg.has("field")) {
    Section f = cfg.sub("field");
    nt = f.integer("nt", nt);
    nx = f.integer("nx", nx);
    t0 = f.num("t0", t0);
    t1 = f.num("t1", t1);
    f.finish();
  }
  cfg.finish();
  if (t0 < 0.0 || t1 > T) throw ConfigError("config: field: [t0, t1] must lie in [0, horizon]");

  const HistorySegment x0 = wave_state(decompose(V0, I0, line, N));
  Json summary{{"tau", line.tau()}, {"speed", line.speed()}, {"impedance", line.impedance()},
               {"r", line.r()}, {"boundary", bname}};
  Trajectory w;
  std::string tail;
  if (line.boundary == LineBoundary::Static) {
    const DifferenceSystem sys = boundary_to_difference(line);
    w = solve_difference(sys, x0, static_cast<int>(std::ceil(T / line.tau())) + 1);
    const CrossValidation cv = cross_validate(V0, I0, line, T, N);
    summary["compatibility_defect"] = cv.compatibility_defect;
    summary["jump_at_zero"] = cv.jump_at_zero;
    summary["boundary_residual"] = cv.boundary_residual;
    summary["characteristic_residual"] = cv.characteristic_residual;
    summary["settle_deviation"] = cv.settle_deviation;
    tail = ", cross-validation residual " + fmt(cv.max_discrepancy) + ", compatibility defect " +
           fmt(cv.compatibility_defect);
  } else {
    const NddeSystem sys = boundary_to_ndde(line);
    w = integrate(sys, x0, T + line.tau(), h);
    const double Kdata = dynamic_boundary_constant(V0, I0, line);
    summary["integration_constant_data"] = Kdata;
    if (K) summary["integration_constant_defect"] = std::abs(*K - Kdata);
    tail = ", integration constant of the data " + fmt(Kdata);
  }
  write_file(ctx.out, field_csv(field_grid(w, line, t0, t1, nt, nx)));
  write_file(ctx.out + ".json", dump_json(summary));
  ctx.say("telegraph: " + bname + " boundary, tau=" + fmt(line.tau()) + tail + " -> " + ctx.out);
  return kOk;
}

MemoryKernel parse_kernel(Section s) {
  const std::string fam = s.str("family");
  std::optional<MemoryKernel> k;
  if (fam == "exponential") {
    k = kernel_exponential(s.num("mu0"), s.num("delta"));
  } else if (fam == "piecewise_constant") {
    k = kernel_piecewise(s.num("mu0"), s.num("t_star"));
  } else if (fam == "tabulated") {
    k = kernel_tabulated(s.list("grid"), s.list("values"));
  } else {
    s.fail("family", "unknown kernel family '" + fam +
                         "' (expected exponential, piecewise_constant or tabulated)");
  }
  s.finish();
  return *k;
}

int cmd_memory(Section& cfg, Context& ctx) {
  const int m = cfg.integer("modes");
  if (m < 1) cfg.fail("modes", "must be at least 1");
  Vec lambda(m);
  if (cfg.has("eigenvalues")) {
    lambda = cfg.vec("eigenvalues", m);
  } else {
    for (int k = 0; k < m; ++k) lambda(k) = (k + 1.0) * (k + 1.0);
  }
  const double nu = cfg.num("nu");
  const Vec F = cfg.has("forcing") ? cfg.vec("forcing", m) : Vec::Zero(m);
  const Vec u0 = cfg.vec("u0", m);
  std::vector<double> c(static_cast<std::size_t>(m) * m * m, 0.0);
  if (cfg.has("structure")) {
    Section s = cfg.sub("structure");
    const std::string kind = s.str("kind");
    if (kind == "random") {
      std::mt19937_64 rng(ctx.seed);
      c = random_structure_constants(m, s.num("scale", 1.0), rng);
    } else if (kind == "explicit") {
      c = s.list("c");
    } else if (kind != "zero") {
      s.fail("kind", "expected zero, random or explicit");
    }
    s.finish();
  }
  const MemoryKernel kernel = parse_kernel(cfg.sub("kernel"));
  const double T = cfg.num("horizon");
  const double h = cfg.num("h", 1e-3);
  const int stride = cfg.integer("stride", 1);
  const double C_fit = cfg.num("C_fit", 100.0);
  std::optional<double> tol_override;
  if (cfg.has("tolerances")) {
    Section t = cfg.sub("tolerances");
    if (t.has("inequality")) tol_override = t.num("inequality");
    t.finish();
  }
  cfg.finish();

  const GalerkinMemorySystem sys(lambda, nu, F, c, kernel);
  const MemoryTrajectory tr = integrate_memory(sys, u0, T, h);
  const MemoryDiagnostics d = memory_diagnostics(tr, kernel, lambda, stride);
  const double tol = tol_override ? *tol_override : inequality_tolerance(d, tr.h * stride, nu);

  Json checks{{"tolerance", tol}};
  bool ok = true;
  if (d.t.size() >= 3) {
    const double e = check_energy_inequality(d, nu, F, lambda);
    checks["energy_residual"] = e;
    ok = ok && e <= tol;
    if (kernel.beta_nec > 0.0 && std::isfinite(kernel.beta_nec)) {
      const double g = check_gamma_inequality(d, kernel, kernel.beta_nec);
      checks["gamma_residual"] = g;
      ok = ok && g <= tol;
    }
  }
  const AbsorbingCheck ab = check_absorbing_bound(d, kernel, nu, lambda(0), sys.forcing_dual_sq(),
                                                  u0.squaredNorm(), C_fit);
  checks["absorbing"] = {{"Lambda", ab.Lambda},
                         {"gamma_rate", ab.gamma_rate},
                         {"C_fit", C_fit},
                         {"max_ratio", ab.max_ratio},
                         {"violated", ab.violated}};
  checks["tail_constant"] = tail_constant(d);
  checks["passed"] = ok && !ab.violated;
  ok = ok && !ab.violated;

  write_file(ctx.out, diagnostics_csv(d));
  write_file(ctx.out + ".kernel.json", dump_json(to_json(kernel)));
  write_file(ctx.out + ".checks.json", dump_json(checks));
  ctx.say("memory: " + std::to_string(m) + " modes, " + kernel.family + " kernel, final energy " +
          fmt(d.u_sq.back() + d.eta_sq.back()) + (ok ? ", inequalities hold" : ", inequality VIOLATED") +
          " -> " + ctx.out);
  return ok ? kOk : kFailed;
}

int dispatch(const Options& opt) {
  std::ifstream in(opt.config, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + opt.config + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  Json root;
  try {
    root = Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("config: " + opt.config + ": " + e.what());
  }
  Section cfg(root, "");
  Context ctx{opt, 0, opt.out, std::cout};
  ctx.seed = cfg.u64("seed", 0);
  if (opt.seed) ctx.seed = *opt.seed;
  const std::string cfg_out = cfg.str("out", "");
  if (ctx.out.empty()) ctx.out = cfg_out;
  if (ctx.out.empty()) throw ConfigError("no output path: pass --out or set \"out\" in the config");

  if (opt.command == "simulate") return cmd_simulate(cfg, ctx);
  if (opt.command == "certify") return cmd_certify(cfg, ctx);
  if (opt.command == "measure") return cmd_measure(cfg, ctx);
  if (opt.command == "telegraph") return cmd_telegraph(cfg, ctx);
  if (opt.command == "memory") return cmd_memory(cfg, ctx);
  throw ConfigError("unknown command '" + opt.command + "'");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Neutral delay systems: simulation, certificates and invariant measures", "memdyn"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "integrate a neutral or difference system and write the trajectory CSV"},
      {"certify", "compute contraction constants and optional falsification checks"},
      {"measure", "time averages, ensemble averages and invariance defects"},
      {"telegraph", "transmission line via its traveling-wave difference equation"},
      {"memory", "Galerkin model with fading memory and its energy diagnostics"}};
  std::vector<CLI::Option*> seed_opts;
  for (const auto& [name, desc] : commands) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->add_option("--config", opt.config, "JSON configuration file")->required();
    s->add_option("--out", opt.out, "output path");
    seed_opts.push_back(s->add_option("--seed", seed, "random seed (overrides the config)"));
    s->add_flag("--quiet", opt.quiet, "suppress the summary line");
    if (name == "measure") {
      s->add_option("--threads", opt.threads, "worker threads for ensemble members")
          ->check(CLI::PositiveNumber);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  for (auto* o : seed_opts) {
    if (o->count()) opt.seed = seed;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(opt);
  } catch (const IntegrationError& e) {
    std::cerr << "memdyn: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "memdyn: " << e.what() << '\n';
    return kConfig;
  } catch (const RangeError& e) {
    std::cerr << "memdyn: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "memdyn: " << e.what() << '\n';
    return kNumerical;
  } catch (const Json::exception& e) {
    std::cerr << "memdyn: config: " << e.what() << '\n';
    return kConfig;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"memdyn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace memdyn::cli
