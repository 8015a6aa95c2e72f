#include "nvscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nvscat/error.hpp"
#include "nvscat/parallel.hpp"
#include "nvscat/simd/kernels.hpp"

namespace nvscat {

using std::numbers::pi;
using nlohmann::json;

cplx compute_a(const Potential& v, const MuField& mu) {
  if (!(v.grid == mu.grid)) throw Error(ErrorCode::invalid_argument, "mu and potential grids differ");
  const double h2 = v.grid.h * v.grid.h;
  return simd::kernels().wsum(mu.mu.data(), v.samples.data(), mu.mu.size()) * (h2 / (4.0 * pi * pi));
}

double b_frequency_limit(const Grid& g) { return pi / (2.0 * g.h); }

bool b_resolved(const Grid& g, cplx lambda) {
  return std::abs(lambda - 1.0 / std::conj(lambda)) <= b_frequency_limit(g) * (1.0 + 1e-12);
}

cplx compute_b(const Potential& v, const MuField& mu) {
  if (!(v.grid == mu.grid)) throw Error(ErrorCode::invalid_argument, "mu and potential grids differ");
  const Grid& g = v.grid;
  const cplx l = mu.lambda;
  const cplx w = l - 1.0 / std::conj(l);
  if (!b_resolved(g, l))
    throw Error(ErrorCode::aliasing, "b oscillation shorter than four grid cells");
  // -(w zbar - conj(w) z)/2 = -i Im(w zbar): unit modulus by construction.
  cplx probe = -0.5 * (w * std::conj(g.node(1, 2)) - std::conj(w) * g.node(1, 2));
  if (std::abs(probe.real()) > 1e-12 * (1.0 + std::abs(probe)))
    throw Error(ErrorCode::invalid_argument, "b exponent is not purely imaginary");
  std::vector<cplx> ex(g.N), ey(g.N);
  for (int j = 0; j < g.N; ++j) {
    ex[j] = std::polar(1.0, -w.imag() * g.coord(j));
    ey[j] = std::polar(1.0, w.real() * g.coord(j));
  }
  std::vector<cplx> ph(g.size());
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k) ph[g.index(j, k)] = ex[j] * ey[k];
  const double h2 = g.h * g.h;
  return simd::kernels().wsum2(mu.mu.data(), ph.data(), v.samples.data(), ph.size()) *
         (h2 / (4.0 * pi * pi));
}

cplx born_b(const Potential& v, cplx lambda) {
  if (lambda == cplx(0)) throw Error(ErrorCode::invalid_argument, "lambda must be nonzero");
  return fourier_hat_v(v, cplx(0, 1) * (lambda - 1.0 / std::conj(lambda)));
}

cplx r_of_b(cplx lambda, cplx b) {
  double s = 1.0 - std::norm(lambda);
  double sg = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
  return pi * sg * b / std::conj(lambda);
}

bool LambdaRecord::flagged(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

LambdaRecord evaluate_lambda(const Potential& v, cplx lambda, const ScanOptions& opts) {
  LambdaRecord r;
  r.lambda = lambda;
  GreensTable table;
  try {
    table = cached_greens_table(v.grid, lambda, opts.greens);
  } catch (const Error& e) {
    r.flags.push_back(e.code() == ErrorCode::quadrature ? "quadrature" : "table_failed");
    return r;
  }
  r.table_error = table.reg.error_estimate;
  if (table.reg.near_T) r.flags.push_back("near_T");
  if (!root_in_band(v.grid, lambda, opts.greens)) r.flags.push_back("root_out_of_band");
  MuField mu;
  try {
    mu = solve_mu(v, table, opts.solver);
  } catch (const Error&) {
    r.flags.push_back("mu_nonconvergent");
  }
  if (!mu.mu.empty()) {
    r.mu_residual = mu.residual;
    r.iterations = mu.iterations;
    r.a = compute_a(v, mu);
    r.has_a = true;
    if (b_resolved(v.grid, lambda)) {
      r.b = compute_b(v, mu);
      r.has_b = true;
    } else {
      r.flags.push_back("b_aliased");
    }
  }
  if (opts.determinant) {
    try {
      if (v.grid.N > opts.kernel.dense_cap)
        throw Error(ErrorCode::memory_cap, "determinant unavailable at this resolution");
      KernelMatrix k = build_kernel(v, table, opts.kernel);
      r.det = modified_fredholm_det(k);
      r.has_det = true;
      if (r.det.exceptional) r.flags.push_back("exceptional");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::memory_cap) throw;
      r.flags.push_back("det_unavailable");
    }
  }
  return r;
}

ScatteringData scan(const Potential& v, const std::vector<cplx>& lambdas, const ScanOptions& opts) {
  ScatteringData d;
  d.fingerprint = fingerprint(v);
  d.family = family_name(v.family);
  d.R = v.grid.R;
  d.N = v.grid.N;
  d.vhat0 = fourier_hat_v(v, 0.0);
  d.records.resize(lambdas.size());
  for (cplx l : lambdas)
    if (l == cplx(0)) throw Error(ErrorCode::invalid_argument, "lambda grid contains 0");
  parallel_for(lambdas.size(), opts.threads,
               [&](std::size_t i) { d.records[i] = evaluate_lambda(v, lambdas[i], opts); });
  return d;
}

ScatteringData scan(const Potential& v, const LambdaGrid& lg, const ScanOptions& opts) {
  std::vector<cplx> ls;
  for (const auto& p : lg.points) ls.push_back(p.lambda);
  return scan(v, ls, opts);
}

namespace {

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

cplx jc(const json& j) {
  auto num = [](const json& x) {
    return x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
  };
  return {num(j.at(0)), num(j.at(1))};
}

}  // namespace

std::string to_json_string(const ScatteringData& d) {
  json j;
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(d.fingerprint));
  j["metadata"] = {{"fingerprint", fp},   {"family", d.family}, {"R", d.R},
                   {"N", d.N},            {"vhat0", cj(d.vhat0)},
                   {"config_hash", d.config_hash}};
  json lam = json::array(), a = json::array(), b = json::array(), del = json::array(),
       flags = json::array(), diag = json::array();
  for (const auto& r : d.records) {
    lam.push_back(cj(r.lambda));
    a.push_back(r.has_a ? cj(r.a) : json(nullptr));
    b.push_back(r.has_b ? cj(r.b) : json(nullptr));
    del.push_back(r.has_det ? cj(r.det.delta) : json(nullptr));
    flags.push_back(r.flags);
    json dg = {{"mu_residual", r.mu_residual},
               {"iterations", r.iterations},
               {"table_error", r.table_error}};
    if (r.has_det) {
      dg["det_method"] = det_method_name(r.det.method);
      dg["hs_norm"] = r.det.hs_norm;
      dg["det_count"] = r.det.count;
      dg["exceptional"] = r.det.exceptional;
    }
    diag.push_back(dg);
  }
  j["lambda"] = lam;
  j["a"] = a;
  j["b"] = b;
  j["delta"] = del;
  j["flags"] = flags;
  j["diagnostics"] = diag;
  return j.dump(1);
}

ScatteringData scattering_from_json_string(const std::string& s) {
  json j;
  try {
    j = json::parse(s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad scattering JSON: ") + e.what());
  }
  ScatteringData d;
  const auto& m = j.at("metadata");
  d.fingerprint = std::stoull(m.at("fingerprint").get<std::string>(), nullptr, 16);
  d.family = m.at("family").get<std::string>();
  d.R = m.at("R").get<double>();
  d.N = m.at("N").get<int>();
  d.vhat0 = jc(m.at("vhat0"));
  d.config_hash = m.value("config_hash", "");
  const auto& lam = j.at("lambda");
  for (std::size_t i = 0; i < lam.size(); ++i) {
    LambdaRecord r;
    r.lambda = jc(lam[i]);
    if (!j.at("a")[i].is_null()) {
      r.a = jc(j["a"][i]);
      r.has_a = true;
    }
    if (!j.at("b")[i].is_null()) {
      r.b = jc(j["b"][i]);
      r.has_b = true;
    }
    r.flags = j.at("flags")[i].get<std::vector<std::string>>();
    const auto& dg = j.at("diagnostics")[i];
    r.mu_residual = dg.at("mu_residual").get<double>();
    r.iterations = dg.at("iterations").get<int>();
    r.table_error = dg.at("table_error").get<double>();
    if (!j.at("delta")[i].is_null()) {
      r.has_det = true;
      r.det.lambda = r.lambda;
      r.det.delta = jc(j["delta"][i]);
      r.det.im_residue = std::abs(r.det.delta.imag());
      r.det.method = dg.at("det_method").get<std::string>() == "eigen" ? DetMethod::eigen : DetMethod::lu;
      r.det.hs_norm = dg.at("hs_norm").get<double>();
      r.det.count = dg.at("det_count").get<std::size_t>();
      r.det.exceptional = dg.at("exceptional").get<bool>();
    }
    d.records.push_back(std::move(r));
  }
  return d;
}

void write_scattering_json(const ScatteringData& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path);
  out << to_json_string(d) << '\n';
}

ScatteringData read_scattering_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scattering_from_json_string(ss.str());
}

namespace {

std::string joined_flags(const LambdaRecord& r) {
  std::string s;
  for (const auto& f : r.flags) s += (s.empty() ? "" : "|") + f;
  return s.empty() ? "ok" : s;
}

}  // namespace

void write_determinant_csv(const ScatteringData& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path);
  out.precision(17);
  out << "re_lambda,im_lambda,abs_lambda,arg_lambda,re_delta,im_delta,method,hs_norm,flag\n";
  for (const auto& r : d.records) {
    out << r.lambda.real() << ',' << r.lambda.imag() << ',' << std::abs(r.lambda) << ','
        << std::arg(r.lambda) << ',';
    if (r.has_det)
      out << r.det.delta.real() << ',' << r.det.delta.imag() << ',' << det_method_name(r.det.method)
          << ',' << r.det.hs_norm;
    else
      out << ",,none,";
    out << ',' << joined_flags(r) << '\n';
  }
}

void write_scattering_csv(const ScatteringData& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path);
  out.precision(17);
  out << "re_lambda,im_lambda,re_a,im_a,re_b,im_b,re_delta,im_delta,mu_residual,flag\n";
  auto opt = [&](bool has, cplx z) {
    if (has)
      out << z.real() << ',' << z.imag();
    else
      out << ',';
  };
  for (const auto& r : d.records) {
    out << r.lambda.real() << ',' << r.lambda.imag() << ',';
    opt(r.has_a, r.a);
    out << ',';
    opt(r.has_b, r.b);
    out << ',';
    opt(r.has_det, r.det.delta);
    out << ',' << r.mu_residual << ',' << joined_flags(r) << '\n';
  }
}

}  // namespace nvscat
