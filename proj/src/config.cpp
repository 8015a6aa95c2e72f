#include "nvscat/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nvscat/error.hpp"

namespace nvscat {

using nlohmann::json;

namespace {

// Maps dotted key paths ("grid.N", "solver.tol") to the line where the key
// appears. Assumes the text already parsed as JSON.
std::map<std::string, int> key_lines(const std::string& s) {
  struct Ctx {
    bool object;
    std::string prefix;
    std::string key;
    int index = 0;
  };
  std::map<std::string, int> out;
  std::vector<Ctx> st;
  int line = 1;
  bool expect_key = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char ch = s[i];
    if (ch == '\n') {
      ++line;
    } else if (ch == '"') {
      std::string str;
      for (++i; i < s.size() && s[i] != '"'; ++i) {
        if (s[i] == '\\') ++i;
        if (i < s.size()) str += s[i];
      }
      if (expect_key && !st.empty() && st.back().object) {
        out.emplace(st.back().prefix + str, line);
        st.back().key = str;
        expect_key = false;
      }
    } else if (ch == '{' || ch == '[') {
      std::string prefix;
      if (!st.empty())
        prefix = st.back().prefix +
                 (st.back().object ? st.back().key : std::to_string(st.back().index)) + ".";
      st.push_back({ch == '{', prefix, "", 0});
      expect_key = ch == '{';
    } else if (ch == '}' || ch == ']') {
      if (!st.empty()) st.pop_back();
    } else if (ch == ',' && !st.empty()) {
      if (st.back().object)
        expect_key = true;
      else
        ++st.back().index;
    }
  }
  return out;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : source_(std::move(source)) {
    try {
      root_ = json::parse(text);
    } catch (const json::parse_error& e) {
      int line = 1;
      for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
      throw Error(ErrorCode::schema, source_ + ":" + std::to_string(line) + ": malformed JSON");
    }
    lines_ = key_lines(text);
  }

  const json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    auto it = lines_.find(path);
    int line = it == lines_.end() ? 1 : it->second;
    throw Error(ErrorCode::schema, source_ + ":" + std::to_string(line) + ": " + path + ": " + msg);
  }

  void require_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path.empty() ? std::string("<root>") : path, "expected an object");
  }

  void allow(const json& j, const std::string& prefix, const std::set<std::string>& keys) const {
    require_object(j, prefix);
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!keys.count(it.key())) fail(join(prefix, it.key()), "unknown key");
  }

  static std::string join(const std::string& p, const std::string& k) {
    return p.empty() ? k : p + "." + k;
  }

  double num(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }
  double positive(const json& j, const std::string& path) const {
    double x = num(j, path);
    if (!(x > 0)) fail(path, "must be > 0");
    return x;
  }
  long long integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
  }
  int pos_int(const json& j, const std::string& path) const {
    long long x = integer(j, path);
    if (x <= 0 || x > 1 << 24) fail(path, "must be a positive integer");
    return static_cast<int>(x);
  }
  bool boolean(const json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
  }
  std::string str(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }
  cplx complex(const json& j, const std::string& path) const {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
      fail(path, "expected [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
  }

 private:
  std::string source_;
  json root_;
  std::map<std::string, int> lines_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  Reader rd(text, source);
  const json& j = rd.root();
  RunConfig c;
  rd.allow(j, "", {"potential", "grid", "lambda_grid", "greens", "solver", "determinant", "checks",
                   "soliton", "output", "threads", "seed"});

  if (j.contains("potential")) {
    const json& p = j["potential"];
    rd.allow(p, "potential", {"family", "A", "sigma", "alpha", "center", "file", "eps"});
    if (p.contains("family")) {
      std::string f = rd.str(p["family"], "potential.family");
      try {
        c.family = family_from_name(f);
      } catch (const Error&) {
        rd.fail("potential.family", "unknown family '" + f + "'");
      }
    }
    if (p.contains("A")) c.params.A = rd.num(p["A"], "potential.A");
    if (p.contains("sigma")) c.params.sigma = rd.positive(p["sigma"], "potential.sigma");
    if (p.contains("alpha")) c.params.alpha = rd.positive(p["alpha"], "potential.alpha");
    if (p.contains("center")) c.params.center = rd.complex(p["center"], "potential.center");
    if (p.contains("file")) c.potential_file = rd.str(p["file"], "potential.file");
    if (p.contains("eps")) c.eps = rd.positive(p["eps"], "potential.eps");
    if (c.family == Family::custom && c.potential_file.empty())
      rd.fail("potential.family", "custom family needs potential.file");
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    rd.allow(g, "grid", {"R", "N"});
    if (g.contains("R")) c.R = rd.positive(g["R"], "grid.R");
    if (g.contains("N")) {
      c.N = rd.pos_int(g["N"], "grid.N");
      if (c.N % 2 != 0 || c.N < 16) rd.fail("grid.N", "must be even and at least 16");
    }
  }

  if (j.contains("lambda_grid")) {
    const json& l = j["lambda_grid"];
    auto& s = c.lambda_grid;
    rd.allow(l, "lambda_grid", {"r_min", "r_max", "annuli", "phases", "t_points", "mirror", "extra"});
    if (l.contains("r_min")) s.r_min = rd.positive(l["r_min"], "lambda_grid.r_min");
    if (l.contains("r_max")) s.r_max = rd.positive(l["r_max"], "lambda_grid.r_max");
    if (l.contains("annuli")) s.annuli = rd.pos_int(l["annuli"], "lambda_grid.annuli");
    if (l.contains("phases")) s.phases = rd.pos_int(l["phases"], "lambda_grid.phases");
    if (l.contains("t_points")) {
      long long t = rd.integer(l["t_points"], "lambda_grid.t_points");
      if (t < 0) rd.fail("lambda_grid.t_points", "must be >= 0");
      s.t_points = static_cast<int>(t);
    }
    if (l.contains("mirror")) s.mirror = rd.boolean(l["mirror"], "lambda_grid.mirror");
    if (l.contains("extra")) {
      if (!l["extra"].is_array()) rd.fail("lambda_grid.extra", "expected an array");
      for (std::size_t i = 0; i < l["extra"].size(); ++i) {
        cplx z = rd.complex(l["extra"][i], "lambda_grid.extra");
        if (z == cplx(0)) rd.fail("lambda_grid.extra", "lambda = 0 is not allowed");
        s.extra.push_back(z);
      }
    }
    if (!(s.r_min < s.r_max) || s.r_max >= 1.0) rd.fail("lambda_grid", "need 0 < r_min < r_max < 1");
  }

  if (j.contains("greens")) {
    const json& g = j["greens"];
    auto& o = c.scan.greens;
    rd.allow(g, "greens", {"window_frac", "oversample", "error_threshold", "estimate_error"});
    if (g.contains("window_frac")) o.window_frac = rd.positive(g["window_frac"], "greens.window_frac");
    if (g.contains("oversample")) {
      o.oversample = rd.pos_int(g["oversample"], "greens.oversample");
      o.oversample_shift = o.oversample;
    }
    if (g.contains("error_threshold"))
      o.error_threshold = rd.positive(g["error_threshold"], "greens.error_threshold");
    if (g.contains("estimate_error"))
      o.estimate_error = rd.boolean(g["estimate_error"], "greens.estimate_error");
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    auto& o = c.scan.solver;
    rd.allow(s, "solver", {"tol", "restart", "max_iter", "dense_fallback"});
    if (s.contains("tol")) o.tol = rd.positive(s["tol"], "solver.tol");
    if (s.contains("restart")) o.restart = rd.pos_int(s["restart"], "solver.restart");
    if (s.contains("max_iter")) o.max_iter = rd.pos_int(s["max_iter"], "solver.max_iter");
    if (s.contains("dense_fallback"))
      o.dense_fallback = rd.boolean(s["dense_fallback"], "solver.dense_fallback");
  }

  if (j.contains("determinant")) {
    const json& d = j["determinant"];
    rd.allow(d, "determinant", {"enabled", "eps", "support_threshold"});
    if (d.contains("enabled")) c.scan.determinant = rd.boolean(d["enabled"], "determinant.enabled");
    if (d.contains("eps")) c.scan.kernel.eps = rd.positive(d["eps"], "determinant.eps");
    if (d.contains("support_threshold"))
      c.scan.kernel.support_threshold =
          rd.positive(d["support_threshold"], "determinant.support_threshold");
  }

  if (j.contains("checks")) {
    const json& k = j["checks"];
    auto& s = c.suite;
    rd.allow(k, "checks", {"select", "ab_tol", "symmetry_tol", "shift_tol", "t_identity_tol",
                           "realness_tol", "t_spread_tol", "limits_tol", "inversion_tol",
                           "dbar_step", "dbar_tol", "shift_zeta"});
    if (k.contains("select")) {
      static const std::set<std::string> groups{"ab",    "delta", "continuity", "greens",
                                                "bsym",  "alimit", "born",      "dbar",
                                                "shift", "soliton", "transparency"};
      if (!k["select"].is_array()) rd.fail("checks.select", "expected an array");
      for (const auto& x : k["select"]) {
        std::string g = rd.str(x, "checks.select");
        if (!groups.count(g)) rd.fail("checks.select", "unknown check group '" + g + "'");
        s.select.push_back(g);
      }
    }
    auto tol = [&](const char* key, double& dst) {
      if (k.contains(key)) dst = rd.positive(k[key], std::string("checks.") + key);
    };
    tol("ab_tol", s.ab_tol);
    tol("symmetry_tol", s.symmetry_tol);
    tol("shift_tol", s.shift_tol);
    tol("t_identity_tol", s.t_identity_tol);
    tol("realness_tol", s.delta.realness);
    tol("t_spread_tol", s.delta.t_spread);
    tol("limits_tol", s.delta.limits);
    tol("inversion_tol", s.delta.inversion);
    tol("dbar_step", s.dbar.step);
    tol("dbar_tol", s.dbar.tol);
    if (k.contains("shift_zeta")) s.shift_zeta = rd.complex(k["shift_zeta"], "checks.shift_zeta");
  }

  if (j.contains("soliton")) {
    const json& s = j["soliton"];
    rd.allow(s, "soliton", {"c", "annuli", "samples", "lambdas"});
    if (s.contains("c")) c.soliton_c = rd.complex(s["c"], "soliton.c");
    if (!std::isfinite(c.soliton_c.real()) || !std::isfinite(c.soliton_c.imag()))
      rd.fail("soliton.c", "must be finite");
    if (s.contains("samples")) c.soliton_samples = rd.pos_int(s["samples"], "soliton.samples");
    if (s.contains("lambdas")) {
      if (!s["lambdas"].is_array()) rd.fail("soliton.lambdas", "expected an array");
      for (const auto& x : s["lambdas"]) {
        cplx z = rd.complex(x, "soliton.lambdas");
        if (z == cplx(0)) rd.fail("soliton.lambdas", "lambda = 0 is not allowed");
        c.soliton_lambdas.push_back(z);
      }
    }
    if (s.contains("annuli")) {
      c.soliton_annuli.clear();
      if (!s["annuli"].is_array()) rd.fail("soliton.annuli", "expected an array");
      for (const auto& a : s["annuli"]) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
          rd.fail("soliton.annuli", "expected [r_lo, r_hi] pairs");
        double lo = a[0].get<double>(), hi = a[1].get<double>();
        if (!(lo > 0 && hi > lo)) rd.fail("soliton.annuli", "need 0 < r_lo < r_hi");
        c.soliton_annuli.emplace_back(lo, hi);
      }
    }
  }

  if (j.contains("output")) c.out_dir = rd.str(j["output"], "output");
  if (j.contains("threads")) c.threads = rd.pos_int(j["threads"], "threads");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) rd.fail("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  finalize_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_overrides(RunConfig& c, const ConfigOverrides& o) {
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.threads) {
    if (*o.threads <= 0) throw Error(ErrorCode::invalid_argument, "--threads must be positive");
    c.threads = *o.threads;
  }
  if (o.seed) c.seed = *o.seed;
  finalize_config(c);
}

void finalize_config(RunConfig& c) {
  c.scan.threads = c.threads;
  c.suite.scan = c.scan;
  c.suite.lambda_grid = c.lambda_grid;
  c.suite.seed = c.seed;
  c.suite.soliton_c = {c.soliton_c};
  if (c.soliton_c != cplx(0)) c.suite.soliton_c.insert(c.suite.soliton_c.begin(), cplx(0));
}

json config_to_json(const RunConfig& c) {
  auto cj = [](cplx z) { return json::array({z.real(), z.imag()}); };
  json extra = json::array();
  for (cplx z : c.lambda_grid.extra) extra.push_back(cj(z));
  json annuli = json::array();
  for (auto [lo, hi] : c.soliton_annuli) annuli.push_back({lo, hi});
  json j;
  j["potential"] = {{"family", family_name(c.family)}, {"A", c.params.A},
                    {"sigma", c.params.sigma},         {"alpha", c.params.alpha},
                    {"center", cj(c.params.center)},   {"eps", c.eps}};
  if (!c.potential_file.empty()) j["potential"]["file"] = c.potential_file;
  j["grid"] = {{"R", c.R}, {"N", c.N}};
  const auto& l = c.lambda_grid;
  j["lambda_grid"] = {{"r_min", l.r_min},   {"r_max", l.r_max},       {"annuli", l.annuli},
                      {"phases", l.phases}, {"t_points", l.t_points}, {"mirror", l.mirror},
                      {"extra", extra}};
  const auto& g = c.scan.greens;
  j["greens"] = {{"window_frac", g.window_frac}, {"oversample", g.oversample},
                 {"error_threshold", g.error_threshold}, {"estimate_error", g.estimate_error}};
  const auto& s = c.scan.solver;
  j["solver"] = {{"tol", s.tol}, {"restart", s.restart}, {"max_iter", s.max_iter},
                 {"dense_fallback", s.dense_fallback}};
  j["determinant"] = {{"enabled", c.scan.determinant}, {"eps", c.scan.kernel.eps},
                      {"support_threshold", c.scan.kernel.support_threshold}};
  const auto& k = c.suite;
  j["checks"] = {{"select", k.select},
                 {"ab_tol", k.ab_tol},
                 {"symmetry_tol", k.symmetry_tol},
                 {"shift_tol", k.shift_tol},
                 {"t_identity_tol", k.t_identity_tol},
                 {"realness_tol", k.delta.realness},
                 {"t_spread_tol", k.delta.t_spread},
                 {"limits_tol", k.delta.limits},
                 {"inversion_tol", k.delta.inversion},
                 {"dbar_step", k.dbar.step},
                 {"dbar_tol", k.dbar.tol},
                 {"shift_zeta", cj(k.shift_zeta)}};
  j["soliton"] = {{"c", cj(c.soliton_c)}, {"annuli", annuli}, {"samples", c.soliton_samples}};
  if (!c.soliton_lambdas.empty()) {
    json ls = json::array();
    for (cplx z : c.soliton_lambdas) ls.push_back(cj(z));
    j["soliton"]["lambdas"] = ls;
  }
  j["output"] = c.out_dir;
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  return j;
}

std::string config_hash(const RunConfig& c) {
  json j = config_to_json(c);
  j.erase("output");
  j.erase("threads");
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Potential make_potential(const RunConfig& c) {
  if (c.family == Family::custom) {
    Potential v = read_potential(c.potential_file);
    if (v.grid.N != c.N || v.grid.R != c.R)
      throw Error(ErrorCode::schema, "potential file grid does not match grid.R / grid.N");
    return v;
  }
  return sample_potential(make_grid(c.R, c.N), c.family, c.params, c.eps);
}

}  // namespace nvscat
