#include "memdyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace memdyn {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void emit(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      std::string s = format_double(v);
      // keep floats recognizable as floats on re-parse
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += sep;
        emit(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += "}";
      break;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        emit(e, indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += "]";
      break;
    }
    default:
      out += j.dump();
  }
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json checks_json(const std::vector<Check>& checks) {
  Json a = Json::array();
  for (const auto& c : checks) a.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return a;
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += "\n";
  return out;
}

Json to_json(const DissipativityCertificate& c) {
  return {{"alpha", c.alpha},   {"beta", c.beta},         {"gamma", c.gamma},
          {"b_norm", c.b_norm}, {"tau", c.tau},           {"frak_c", c.frak_c},
          {"frak_c0", c.frak_c0}, {"r", c.r},             {"r_abs", opt(c.r_abs)},
          {"tau_star", opt(c.tau_star)}, {"satisfied", c.satisfied},
          {"checks", checks_json(c.checks)}};
}

Json to_json(const BmValidation& v) {
  return {{"alpha_eps", v.alpha_eps}, {"beta_eps", v.beta_eps}, {"k", v.k},
          {"k_bound", v.k_bound},     {"tau_star", opt(v.tau_star)}, {"pass", v.pass},
          {"checks", checks_json(v.checks)}};
}

Json to_json(const FalsifyReport& r) {
  Json j{{"max_defect", r.max_defect},
         {"fitted_gamma", r.fitted_gamma},
         {"evaluated", r.evaluated},
         {"falsified", r.max_defect > 0.0}};
  if (r.witness) {
    j["witness"] = {{"u", vec_json(r.witness->first)}, {"v", vec_json(r.witness->second)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

Json to_json(const MemoryKernel& k) {
  Json params = Json::object();
  for (const auto& [name, v] : k.params) params[name] = v;
  return {{"family", k.family}, {"params", params},  {"kappa0", k.kappa0},
          {"beta_nec", k.beta_nec}, {"K", k.K},      {"delta", k.delta}};
}

Json to_json(const InvarianceReport& r) {
  Json d = Json::array();
  for (const auto& [label, v] : r.defects) d.push_back({{"label", label}, {"defect", v}});
  return {{"t_star", r.t_star}, {"defects", d}, {"max", r.max_defect}};
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < tr.dim(); ++i) os << ",x" << i + 1;
  os << ",breakpoint\n";
  for (std::size_t j = 0; j < tr.size(); ++j) {
    os << format_double(tr.times[j]);
    for (int i = 0; i < tr.dim(); ++i) os << ',' << format_double(tr.states[j](i));
    os << ',' << static_cast<int>(tr.breakpoint[j]) << '\n';
  }
  return os.str();
}

std::string diagnostics_csv(const MemoryDiagnostics& d) {
  std::ostringstream os;
  os << "t,u_sq,grad_sq,eta_sq,gamma1,t_eta_sq,tail\n";
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    os << format_double(d.t[i]) << ',' << format_double(d.u_sq[i]) << ','
       << format_double(d.grad_sq[i]) << ',' << format_double(d.eta_sq[i]) << ','
       << format_double(d.gamma1[i]) << ',' << format_double(d.t_eta_sq[i]) << ','
       << format_double(d.tail[i]) << '\n';
  }
  return os.str();
}

std::string field_csv(const std::vector<FieldSample>& f) {
  std::ostringstream os;
  os << "t,x,V,I\n";
  for (const auto& s : f) {
    os << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.V) << ','
       << format_double(s.I) << '\n';
  }
  return os.str();
}

std::string snapshots_csv(const EmpiricalMeasure& mu) {
  std::ostringstream os;
  if (mu.snapshots.empty()) return "snapshot,theta\n";
  const int n = mu.snapshots.front().dim();
  os << "snapshot,theta";
  for (int i = 0; i < n; ++i) os << ",x" << i + 1;
  os << '\n';
  for (std::size_t s = 0; s < mu.snapshots.size(); ++s) {
    const auto& seg = mu.snapshots[s];
    for (int j = 0; j <= seg.intervals(); ++j) {
      os << s << ',' << format_double(seg.node(j));
      for (int i = 0; i < n; ++i) os << ',' << format_double(seg.value(j)(i));
      os << '\n';
    }
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error("failed writing '" + path + "'");
}

}  // namespace memdyn
