#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvscat/config.hpp"
#include "nvscat/error.hpp"
#include "nvscat/grid.hpp"
#include "nvscat/scattering.hpp"
#include "nvscat/verify.hpp"

namespace fs = std::filesystem;
using namespace nvscat;

namespace {

struct Globals {
  std::string config;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

RunConfig resolve(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  ConfigOverrides o;
  if (g.out_opt->count()) o.out_dir = g.out;
  if (g.threads_opt->count()) o.threads = g.threads;
  if (g.seed_opt->count()) o.seed = g.seed;
  apply_overrides(c, o);
  return c;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::io, "cannot write " + p.string());
  out << s;
}

std::string hex(std::uint64_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f));
  return buf;
}

fs::path cache_dir() {
  const char* d = std::getenv("NVSCAT_CACHE_DIR");
  return d && *d ? fs::path(d) : fs::path();
}

fs::path scan_cache_path(const Potential& v, const RunConfig& c) {
  fs::path d = cache_dir();
  if (d.empty()) return {};
  return d / ("scan-" + hex(fingerprint(v)) + "-" + config_hash(c) + ".json");
}

bool is_failure_flag(const std::string& f) { return f != "near_T" && f != "root_out_of_band"; }

int cmd_scan(const Globals& g) {
  RunConfig c = resolve(g);
  Potential v = make_potential(c);
  LambdaGrid lg = make_lambda_grid(c.lambda_grid);
  ScatteringData d = scan(v, lg, c.scan);
  d.config_hash = config_hash(c);
  fs::create_directories(c.out_dir);
  fs::path out(c.out_dir);
  write_scattering_json(d, (out / "scattering.json").string());
  write_scattering_csv(d, (out / "scattering.csv").string());
  write_determinant_csv(d, (out / "determinant.csv").string());
  if (fs::path p = scan_cache_path(v, c); !p.empty()) {
    fs::create_directories(p.parent_path());
    write_scattering_json(d, p.string());
  }
  int flagged = 0;
  for (const auto& r : d.records)
    if (std::any_of(r.flags.begin(), r.flags.end(), is_failure_flag)) ++flagged;
  std::cout << "scanned " << d.records.size() << " lambda points into " << out.string() << "\n";
  if (flagged) {
    std::cout << flagged << " points carry failure flags\n";
    return 2;
  }
  return 0;
}

int cmd_verify(const Globals& g) {
  RunConfig c = resolve(g);
  Potential v = make_potential(c);
  ScatteringData cached;
  const ScatteringData* use = nullptr;
  fs::path cp = scan_cache_path(v, c);
  if (!cp.empty() && fs::exists(cp)) {
    try {
      cached = read_scattering_json(cp.string());
      if (cached.fingerprint == fingerprint(v) && cached.config_hash == config_hash(c))
        use = &cached;
      else
        std::cerr << "warning: cached scan does not match the potential; recomputing\n";
    } catch (const Error& e) {
      std::cerr << "warning: unreadable cached scan (" << e.what() << "); recomputing\n";
    }
  }
  VerificationReport rep = run_suite(v, c.suite, use);
  rep.metadata["config_hash"] = config_hash(c);
  fs::create_directories(c.out_dir);
  fs::path out(c.out_dir);
  write_text(out / "report.json", report_to_json(rep, true).dump(2) + "\n");
  std::string text = report_text(rep);
  write_text(out / "report.txt", text);
  std::cout << text;
  return rep.overall ? 0 : 1;
}

int cmd_demo_soliton(const Globals& g) {
  RunConfig c = resolve(g);
  std::vector<cplx> ls = c.soliton_lambdas;
  if (ls.empty()) {
    int per = std::max(1, c.soliton_samples / int(c.soliton_annuli.size()));
    std::uint64_t s = c.seed;
    for (auto [lo, hi] : c.soliton_annuli)
      for (cplx l : annulus_samples(lo, hi, per, s++)) ls.push_back(l);
  }
  CheckRecord r = soliton_obstruction(c.soliton_c, ls);
  std::cout << "soliton ansatz v(z - c t) with c = " << c.soliton_c.real() << " + "
            << c.soliton_c.imag() << "i\n"
            << "A travelling wave moves b by the translation phase; the flow moves b by the\n"
            << "cubic phase. A nonzero b near lambda = 0 or infinity needs the two to agree.\n";
  if (r.status == Status::inapplicable) {
    std::cerr << "warning: " << r.note << "\n";
  } else {
    std::cout << "phases differ (|m| > " << r.details["floor"].get<double>() << ") at "
              << r.details["nonzero"].get<int>() << " of " << r.details["generic"].get<int>()
              << " generic samples\n"
              << (r.status == Status::pass
                      ? "so b vanishes on these annuli, and a localized soliton is zero.\n"
                      : "the obstruction was not observed on this sample set.\n");
  }
  fs::create_directories(c.out_dir);
  VerificationReport rep = assemble_report({r}, {{"seed", c.seed}});
  write_text(fs::path(c.out_dir) / "soliton.json", report_to_json(rep).dump(2) + "\n");
  return r.status == Status::fail ? 1 : 0;
}

int cmd_export(const Globals& g, const std::string& input) {
  RunConfig c = resolve(g);
  fs::path out(c.out_dir);
  fs::path in = input.empty() ? out / "scattering.json" : fs::path(input);
  ScatteringData d = read_scattering_json(in.string());
  fs::create_directories(out);
  write_scattering_csv(d, (out / "scattering.csv").string());
  write_determinant_csv(d, (out / "determinant.csv").string());
  std::ofstream born(out / "born.csv");
  born.precision(17);
  born << "re_lambda,im_lambda,abs_b\n";
  for (const auto& r : d.records)
    if (r.has_b) born << r.lambda.real() << ',' << r.lambda.imag() << ',' << std::abs(r.b) << '\n';
  if (c.family != Family::custom) {
    Potential v = make_potential(c);
    std::ofstream pv(out / "potential.csv");
    pv.precision(17);
    pv << "x,y,v\n";
    for (int j = 0; j < v.grid.N; ++j)
      for (int k = 0; k < v.grid.N; ++k)
        pv << v.grid.coord(j) << ',' << v.grid.coord(k) << ',' << v.at(j, k) << '\n';
  }
  std::cout << "exported " << d.records.size() << " records to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct scattering toolkit for the 2D Schroedinger equation at E = -1"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  g.out_opt = app.add_option("--out", g.out, "output directory");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  g.seed_opt = app.add_option("--seed", g.seed, "seed for sampled lambda sets");
  app.fallthrough();

  auto* scan_cmd = app.add_subcommand("scan", "scattering data over the lambda grid");
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  auto* soliton_cmd = app.add_subcommand("demo-soliton", "phase obstruction for travelling waves");
  auto* export_cmd = app.add_subcommand("export", "write plot-ready CSV files");
  std::string input;
  export_cmd->add_option("--input", input, "scattering JSON (default <out>/scattering.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*scan_cmd) return cmd_scan(g);
    if (*verify_cmd) return cmd_verify(g);
    if (*soliton_cmd) return cmd_demo_soliton(g);
    if (*export_cmd) return cmd_export(g, input);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
