#include "plrecon/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "plrecon/coefficients.hpp"

namespace plr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& v, int line) {
  double x = parse_num(v, line);
  int i = (int)x;
  if ((double)i != x) fail(line, "expected an integer, got '" + v + "'");
  return i;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(line, "expected a boolean (true/false), got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty entry in list '" + v + "'");
    out.push_back(parse_num(item, line));
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += num(v[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"domain", "grid",   "coefficients", "solver",
                                    "schedules", "probes", "run"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) fail(line, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (section.empty()) fail(line, "key '" + key + "' before any [section]");

    auto is = [&](const char* sec, const char* k) {
      return section == sec && key == k;
    };
    if (is("domain", "x1_min")) c.x1_min = parse_num(val, line);
    else if (is("domain", "x1_max")) c.x1_max = parse_num(val, line);
    else if (is("domain", "x2_max")) c.x2_max = parse_num(val, line);
    else if (is("grid", "n1")) c.n1 = parse_int(val, line);
    else if (is("grid", "n2")) c.n2 = parse_int(val, line);
    else if (is("coefficients", "sigma")) c.sigma = val;
    else if (is("coefficients", "gamma")) c.gamma = val;
    else if (is("coefficients", "p")) c.p = parse_num(val, line);
    else if (is("coefficients", "lambda")) c.lambda = parse_num(val, line);
    else if (is("coefficients", "m1")) c.m1 = parse_num(val, line);
    else if (is("solver", "delta")) c.delta = (val == "auto") ? -1.0 : parse_num(val, line);
    else if (is("solver", "theta")) c.theta = parse_num(val, line);
    else if (is("solver", "tolerance")) c.tolerance = parse_num(val, line);
    else if (is("solver", "max_iterations")) c.max_iterations = parse_int(val, line);
    else if (is("schedules", "eps0")) c.eps0 = parse_num(val, line);
    else if (is("schedules", "eps_ratio")) c.eps_ratio = parse_num(val, line);
    else if (is("schedules", "eps_count")) c.eps_count = parse_int(val, line);
    else if (is("schedules", "m_values")) c.m_values = parse_list(val, line);
    else if (is("schedules", "n_exponent")) c.n_exponent = parse_num(val, line);
    else if (is("schedules", "mn_margin")) c.mn_margin = parse_num(val, line);
    else if (is("schedules", "n_values")) c.n_values = parse_list(val, line);
    else if (is("schedules", "n_margin")) c.n_margin = parse_num(val, line);
    else if (is("probes", "eta")) c.eta = val;
    else if (is("probes", "fd_step")) c.fd_step = parse_num(val, line);
    else if (is("run", "pipeline")) c.pipeline = val;
    else if (is("run", "mode")) c.mode = val;
    else if (is("run", "u1_data")) c.u1_data = val;
    else if (is("run", "data")) c.data = val;
    else if (is("run", "w_data")) c.w_data = val;
    else if (is("run", "output_dir")) c.output_dir = val;
    else if (is("run", "seed")) c.seed = (std::uint64_t)parse_num(val, line);
    else if (is("run", "workers")) c.workers = parse_int(val, line);
    else if (is("run", "score")) c.score = parse_bool(val, line);
    else fail(line, "unknown key '" + key + "' in section [" + section + "]");
  }
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string print_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[domain]\n"
    << "x1_min = " << num(c.x1_min) << "\n"
    << "x1_max = " << num(c.x1_max) << "\n"
    << "x2_max = " << num(c.x2_max) << "\n\n"
    << "[grid]\n"
    << "n1 = " << c.n1 << "\n"
    << "n2 = " << c.n2 << "\n\n"
    << "[coefficients]\n"
    << "sigma = " << c.sigma << "\n"
    << "gamma = " << c.gamma << "\n"
    << "p = " << num(c.p) << "\n"
    << "lambda = " << num(c.lambda) << "\n"
    << "m1 = " << num(c.m1) << "\n\n"
    << "[solver]\n"
    << "delta = " << (c.delta < 0 ? std::string("auto") : num(c.delta)) << "\n"
    << "theta = " << num(c.theta) << "\n"
    << "tolerance = " << num(c.tolerance) << "\n"
    << "max_iterations = " << c.max_iterations << "\n\n"
    << "[schedules]\n"
    << "eps0 = " << num(c.eps0) << "\n"
    << "eps_ratio = " << num(c.eps_ratio) << "\n"
    << "eps_count = " << c.eps_count << "\n"
    << "m_values = " << list(c.m_values) << "\n"
    << "n_exponent = " << num(c.n_exponent) << "\n"
    << "mn_margin = " << num(c.mn_margin) << "\n"
    << "n_values = " << list(c.n_values) << "\n"
    << "n_margin = " << num(c.n_margin) << "\n\n"
    << "[probes]\n"
    << "eta = " << c.eta << "\n"
    << "fd_step = " << num(c.fd_step) << "\n\n"
    << "[run]\n"
    << "pipeline = " << c.pipeline << "\n"
    << "mode = " << c.mode << "\n"
    << "u1_data = " << c.u1_data << "\n"
    << "data = " << c.data << "\n"
    << "w_data = " << c.w_data << "\n"
    << "output_dir = " << c.output_dir << "\n"
    << "seed = " << c.seed << "\n"
    << "workers = " << c.workers << "\n"
    << "score = " << (c.score ? "true" : "false") << "\n";
  return o.str();
}

void validate_config(const ExperimentConfig& c) {
  auto bad = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(c.x1_min < 0.0 && 0.0 < c.x1_max))
    bad("domain: x1_min < 0 < x1_max required (x0 = 0 sits on the bottom face)");
  if (!(c.x2_max > 0.0)) bad("domain: x2_max must be positive");
  if (c.n1 < 3 || c.n2 < 3) bad("grid: need at least 3 nodes per axis");
  if (!(c.p > 1.0) || c.p == 2.0) bad("coefficients: p must satisfy p > 1, p != 2");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) bad("coefficients: lambda must lie in (0,1)");
  if (!(c.m1 > 0.0 && c.m1 < 1.0)) bad("coefficients: m1 must lie in (0,1)");
  if (!(c.theta > 0.0 && c.theta <= 1.0)) bad("solver: theta must lie in (0,1]");
  if (!(c.tolerance > 0.0)) bad("solver: tolerance must be positive");
  if (c.max_iterations < 1) bad("solver: max_iterations must be >= 1");
  if (!(c.eps0 > 0.0)) bad("schedules: eps0 must be positive");
  if (!(c.eps_ratio > 0.0 && c.eps_ratio < 1.0)) bad("schedules: eps_ratio must lie in (0,1)");
  if (c.eps_count < 4) bad("schedules: eps_count must be >= 4 (extrapolation needs 4 points)");
  if (c.m_values.empty()) bad("schedules: m_values must be non-empty");
  if (!(c.n_exponent > 1.0)) bad("schedules: n_exponent must exceed 1");
  if (!(c.mn_margin > 0.0 && c.mn_margin <= 0.5))
    bad("schedules: mn_margin must lie in (0, 0.5]");
  if (!(c.n_margin > 0.0 && c.n_margin <= 0.5))
    bad("schedules: n_margin must lie in (0, 0.5]");
  if (c.eta != "flat_top" && c.eta != "wide_top")
    bad("probes: eta must be flat_top or wide_top");
  if (!(c.fd_step > 0.0 && c.fd_step < 0.1)) bad("probes: fd_step must lie in (0, 0.1)");
  static const char* pipes[] = {"forward",           "dn-check",
                                "reconstruct-sigma", "reconstruct-gamma",
                                "reconstruct-dgamma", "identity-suite"};
  bool ok = false;
  for (const char* q : pipes) ok = ok || c.pipeline == q;
  if (!ok) bad("run: unknown pipeline '" + c.pipeline + "'");
  if (c.mode != "oracle" && c.mode != "inverse")
    bad("run: mode must be oracle or inverse");
  if (c.workers < 1) bad("run: workers must be >= 1");
  if (c.output_dir.empty()) bad("run: output_dir must be non-empty");

  // expressions must parse; report the position on failure
  auto check_expr = [&](const char* name, const std::string& src) {
    try {
      CoeffExpr::parse(src);
    } catch (const ParseError& e) {
      bad(std::string(name) + ": " + e.what());
    }
  };
  check_expr("coefficients.sigma", c.sigma);
  check_expr("coefficients.gamma", c.gamma);
  check_expr("run.u1_data", c.u1_data);
  check_expr("run.data", c.data);
  check_expr("run.w_data", c.w_data);
}

}  // namespace plr
