#include "nvscat/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "nvscat/error.hpp"
#include "nvscat/parallel.hpp"

namespace nvscat {

using std::numbers::pi;
using nlohmann::json;

const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inapplicable: return "inapplicable";
    case Status::skipped: return "skipped";
  }
  return "?";
}

CheckRecord make_record(std::string id, std::string anchor, double residual, double tol,
                        std::string fingerprint) {
  CheckRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.residual = residual;
  r.tol = tol;
  r.fingerprint = std::move(fingerprint);
  r.status = (std::isfinite(residual) && residual <= tol) ? Status::pass : Status::fail;
  return r;
}

double rel_diff(cplx x, cplx y) {
  double m = std::max(std::abs(x), std::abs(y));
  return m == 0.0 ? 0.0 : std::abs(x - y) / m;
}

namespace {

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

std::string hex_fp(std::uint64_t f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f));
  return buf;
}

std::string fp_of(const Potential& v) { return hex_fp(fingerprint(v)); }

CheckRecord special(std::string id, std::string anchor, Status s, std::string note,
                    std::string fp = "") {
  CheckRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.status = s;
  r.note = std::move(note);
  r.fingerprint = std::move(fp);
  return r;
}

bool on_T(cplx l) { return std::abs(std::abs(l) - 1.0) <= 1e-9; }

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// |lambda|^2 - 1 keeps its sign over the stencil and stays off the T band.
bool stencil_clear(cplx l, double step, double band) {
  for (cplx d : {cplx(step, 0), cplx(-step, 0), cplx(0, step), cplx(0, -step), cplx(0, 0)})
    if (std::abs(std::abs(l + d) - 1.0) < band) return false;
  return true;
}

// 1/2 (d/dx + i d/dy) by central differences; f holds {+h, -h, +ih, -ih}.
cplx dbar_fd(const cplx* f, double step) {
  return 0.5 * ((f[0] - f[1]) / (2 * step) + cplx(0, 1) * (f[2] - f[3]) / (2 * step));
}

std::vector<cplx> stencil(cplx l, double step) {
  return {l + step, l - step, l + cplx(0, step), l - cplx(0, step)};
}

ScanOptions without_det(ScanOptions o) {
  o.determinant = false;
  return o;
}

DeterminantSample det_at(const Potential& v, cplx l, const ScanOptions& o) {
  GreensTable t = cached_greens_table(v.grid, l, o.greens);
  return modified_fredholm_det(build_kernel(v, t, o.kernel));
}

const LambdaRecord* find_lambda(const ScatteringData& d, cplx l) {
  for (const auto& r : d.records)
    if (std::abs(r.lambda - l) <= 1e-9 * (1.0 + std::abs(l))) return &r;
  return nullptr;
}

// Residual(h) under tol and residual(h/2) no larger, up to the noise floor.
void apply_halving(CheckRecord& r, double res_h, double res_h2, const DbarOptions& d) {
  bool consistent = res_h2 <= 1.1 * res_h + d.floor;
  r.details["residual_h"] = res_h;
  r.details["residual_h2"] = res_h2;
  r.details["halving_consistent"] = consistent;
  r.residual = res_h;
  r.tol = d.tol;
  r.status = (std::isfinite(res_h) && res_h <= d.tol && consistent) ? Status::pass : Status::fail;
}

}  // namespace

// --- report --------------------------------------------------------------

VerificationReport assemble_report(std::vector<CheckRecord> records, json metadata) {
  std::set<std::string> ids;
  for (auto& r : records) {
    if (!ids.insert(r.id).second) throw Error(ErrorCode::invalid_argument, "duplicate check id " + r.id);
    if (r.anchor.empty()) throw Error(ErrorCode::invalid_argument, "check " + r.id + " has no anchor");
    if (!std::isfinite(r.residual) || r.residual < 0) {
      if (r.status == Status::pass) r.status = Status::fail;
      r.note += (r.note.empty() ? "" : "; ") + std::string("non-finite or negative residual");
      r.residual = std::isfinite(r.residual) ? std::abs(r.residual) : 0.0;
      r.details["residual_invalid"] = true;
    }
  }
  std::sort(records.begin(), records.end(),
            [](const CheckRecord& a, const CheckRecord& b) { return a.id < b.id; });
  VerificationReport rep;
  rep.overall = std::none_of(records.begin(), records.end(),
                             [](const CheckRecord& r) { return r.status == Status::fail; });
  rep.records = std::move(records);
  rep.metadata = std::move(metadata);
  return rep;
}

json report_to_json(const VerificationReport& r, bool with_timestamp) {
  json recs = json::array();
  for (const auto& c : r.records) {
    json j = {{"id", c.id},       {"anchor", c.anchor}, {"residual", c.residual},
              {"tol", c.tol},     {"status", status_name(c.status)},
              {"fingerprint", c.fingerprint}, {"details", c.details}};
    if (!c.note.empty()) j["note"] = c.note;
    recs.push_back(std::move(j));
  }
  json out = {{"metadata", r.metadata}, {"overall", r.overall ? "pass" : "fail"}, {"records", recs}};
  if (with_timestamp) {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    out["timestamp"] = buf;
  }
  return out;
}

std::string report_text(const VerificationReport& r) {
  std::ostringstream os;
  for (const auto& c : r.records) {
    char line[256];
    std::snprintf(line, sizeof line, "%-13s %-28s residual=%.3e tol=%.1e  %s", status_name(c.status),
                  c.id.c_str(), c.residual, c.tol, c.anchor.c_str());
    os << line;
    if (!c.note.empty()) os << "  [" << c.note << "]";
    os << '\n';
  }
  os << "overall: " << (r.overall ? "pass" : "fail") << '\n';
  return os.str();
}

// --- scattering data -------------------------------------------------------

CheckRecord check_ab_on_T(const ScatteringData& d, double tol) {
  const std::string id = "ab.on_T", anchor = "a = b on |lambda| = 1 when Delta != 0 there";
  double num = 0.0, den = 0.0;
  int n = 0;
  for (const auto& r : d.records) {
    if (!on_T(r.lambda)) continue;
    if (r.flagged("exceptional"))
      return special(id, anchor, Status::inapplicable, "Delta vanishes on T", hex_fp(d.fingerprint));
    if (!r.has_a || !r.has_b) continue;
    num = std::max(num, std::abs(r.a - r.b));
    den = std::max({den, std::abs(r.a), std::abs(r.b)});
    ++n;
  }
  if (n == 0) return special(id, anchor, Status::inapplicable, "no T samples", hex_fp(d.fingerprint));
  CheckRecord c = make_record(id, anchor, den == 0 ? 0.0 : num / den, tol, hex_fp(d.fingerprint));
  c.details = {{"samples", n}, {"max_abs_diff", num}, {"max_abs", den}};
  return c;
}

std::vector<CheckRecord> check_delta_properties(const ScatteringData& d, const DeltaTolerances& tol) {
  const std::string fp = hex_fp(d.fingerprint);
  std::vector<CheckRecord> out;
  std::vector<const LambdaRecord*> det;
  for (const auto& r : d.records)
    if (r.has_det) det.push_back(&r);

  if (det.empty()) {
    for (const char* id : {"delta.real", "delta.T_constant", "delta.limits", "delta.inversion"})
      out.push_back(special(id, "Delta properties", Status::inapplicable, "no determinant samples", fp));
    return out;
  }

  double im = 0.0;
  for (auto* r : det) im = std::max(im, std::abs(r->det.delta.imag()));
  out.push_back(make_record("delta.real", "Delta is real-valued", im, tol.realness, fp));
  out.back().details = {{"samples", det.size()}};

  std::vector<cplx> t;
  for (auto* r : det)
    if (on_T(r->lambda)) t.push_back(r->det.delta);
  if (t.empty()) {
    out.push_back(special("delta.T_constant", "Delta is constant on |lambda| = 1",
                          Status::inapplicable, "no T samples", fp));
  } else {
    cplx mean = 0.0;
    for (cplx x : t) mean += x;
    mean /= double(t.size());
    double spread = 0.0;
    for (cplx x : t) spread = std::max(spread, std::abs(x - mean));
    spread = std::abs(mean) > 0 ? spread / std::abs(mean) : spread;
    out.push_back(make_record("delta.T_constant", "Delta is constant on |lambda| = 1", spread,
                              tol.t_spread, fp));
    out.back().details = {{"samples", t.size()}, {"mean", cj(mean)}};
  }

  double lim = 0.0;
  int nl = 0;
  for (auto* r : det)
    for (double rad : tol.limit_radii)
      if (std::abs(std::abs(r->lambda) - rad) <= 1e-9 * rad) {
        lim = std::max(lim, std::abs(r->det.delta - 1.0));
        ++nl;
      }
  if (nl == 0)
    out.push_back(special("delta.limits", "Delta -> 1 as lambda -> 0 and infinity",
                          Status::inapplicable, "no samples at the limit radii", fp));
  else {
    out.push_back(make_record("delta.limits", "Delta -> 1 as lambda -> 0 and infinity", lim,
                              tol.limits, fp));
    out.back().details = {{"samples", nl}, {"radii", tol.limit_radii}};
  }

  double inv = 0.0;
  int np = 0;
  for (auto* r : det) {
    if (std::abs(r->lambda) >= 1.0 - 1e-9) continue;
    const LambdaRecord* m = find_lambda(d, 1.0 / std::conj(r->lambda));
    if (!m || !m->has_det) continue;
    inv = std::max(inv, std::abs(r->det.delta - m->det.delta) / (1.0 + std::abs(r->det.delta)));
    ++np;
  }
  if (np == 0)
    out.push_back(special("delta.inversion", "Delta(lambda) = Delta(1/conj lambda)",
                          Status::inapplicable, "no inversion pairs", fp));
  else {
    out.push_back(make_record("delta.inversion", "Delta(lambda) = Delta(1/conj lambda)", inv,
                              tol.inversion, fp));
    out.back().details = {{"pairs", np}};
  }
  return out;
}

CheckRecord check_delta_continuity(const Potential& v, double phase, double r0, double dr,
                                   int half_width, const ScanOptions& opts, double tol) {
  const std::string id = "delta.continuity", anchor = "Delta is continuous in lambda";
  if (half_width < 1 || dr <= 0 || r0 - 2 * half_width * (dr / 2) <= 0)
    throw Error(ErrorCode::invalid_argument, "bad continuity path");
  const int n = 4 * half_width + 1;
  std::vector<cplx> del(n);
  parallel_for(n, opts.threads, [&](std::size_t i) {
    double r = r0 + (int(i) - 2 * half_width) * (dr / 2);
    del[i] = det_at(v, std::polar(r, phase), opts).delta;
  });
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i + 1 < n; ++i) fine = std::max(fine, std::abs(del[i + 1] - del[i]));
  for (int i = 0; i + 2 < n; i += 2) coarse = std::max(coarse, std::abs(del[i + 2] - del[i]));
  double res = coarse < 1e-13 ? 0.0 : fine / (0.5 * coarse);
  CheckRecord c = make_record(id, anchor, res, tol, fp_of(v));
  c.details = {{"phase", phase}, {"r0", r0}, {"dr", dr}, {"max_jump_dr", coarse},
               {"max_jump_dr_half", fine}};
  return c;
}

// --- Green's function ------------------------------------------------------

TIdentityResult check_greens_T_identity(const Grid& grid, int n_phases, double r_lo, double r_hi,
                                        int ext, const GreensOptions& opts, double tol) {
  const std::string anchor = "G on |lambda| = 1 is proportional to K0(|z|)";
  auto ratios = [&](cplx lambda) {
    GreensTable t = build_pointwise_table(grid, lambda, r_hi + 0.5, ext, opts);
    std::vector<cplx> q;
    const int n = t.grid.N;
    for (int a = -n; a < n; ++a)
      for (int b = -n; b < n; ++b) {
        double r = std::hypot(a * t.grid.h, b * t.grid.h);
        if (r < r_lo || r > r_hi) continue;
        q.push_back(greens_G(t, a, b) / reference_G_on_T(r));
      }
    return q;
  };
  std::vector<cplx> ref = ratios(1.0);
  cplx c = 0.0;
  for (cplx x : ref) c += x;
  c /= double(ref.size());

  double spread = 0.0;
  for (int k = 0; k < n_phases; ++k) {
    std::vector<cplx> q = ratios(std::polar(1.0, 2 * pi * k / n_phases));
    for (cplx x : q) spread = std::max(spread, std::abs(x / c - 1.0));
  }
  TIdentityResult res;
  res.normalization = std::abs(c);
  res.record = make_record("greens.T_identity", anchor, spread, tol);
  res.record.details = {{"normalization", cj(c)}, {"phases", n_phases}, {"r_lo", r_lo},
                        {"r_hi", r_hi}, {"ext", ext}};
  return res;
}

CheckRecord check_greens_conj_symmetry(const Grid& grid, const std::vector<cplx>& lambdas,
                                       const GreensOptions& opts, double tol) {
  double worst = 0.0;
  for (cplx l : lambdas) {
    GreensTable a = cached_greens_table(grid, l, opts);
    GreensTable b = cached_greens_table(grid, 1.0 / std::conj(l), opts);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      num = std::max(num, std::abs(b.samples[i] - std::conj(a.samples[i])));
      den = std::max(den, std::abs(a.samples[i]));
    }
    worst = std::max(worst, den > 0 ? num / den : num);
  }
  CheckRecord c = make_record("greens.conj_inversion", "conj G(z, lambda) = G(z, 1/conj lambda)",
                              worst, tol);
  c.details = {{"lambdas", lambdas.size()}};
  return c;
}

CheckRecord check_greens_rotation(const Grid& grid, const std::vector<cplx>& lambdas,
                                  const GreensOptions& opts, double tol) {
  double worst = 0.0;
  const int N = grid.N;
  for (cplx l : lambdas) {
    GreensTable a = cached_greens_table(grid, l, opts);
    GreensTable b = cached_greens_table(grid, cplx(0, 1) * l, opts);
    double num = 0.0, den = 0.0;
    for (int n1 = -N; n1 < N; ++n1)
      for (int n2 = -N + 1; n2 < N; ++n2) {
        num = std::max(num, std::abs(b.at(-n2, n1) - a.at(n1, n2)));
        den = std::max(den, std::abs(a.at(n1, n2)));
      }
    worst = std::max(worst, den > 0 ? num / den : num);
  }
  CheckRecord c = make_record("greens.rotation", "plumbing", worst, tol);
  c.details = {{"lambdas", lambdas.size()}};
  return c;
}

// --- potential-level checks -----------------------------------------------

std::vector<CheckRecord> check_b_symmetry(const Potential& v, const std::vector<cplx>& lambdas,
                                          const ScanOptions& opts, double tol) {
  std::vector<cplx> ls;
  for (cplx l : lambdas) {
    ls.push_back(l);
    ls.push_back(1.0 / std::conj(l));
    ls.push_back(-1.0 / std::conj(l));
  }
  ScatteringData d = scan(v, ls, without_det(opts));
  double rc = 0.0, rn = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto &b0 = d.records[3 * i], &b1 = d.records[3 * i + 1], &b2 = d.records[3 * i + 2];
    if (!b0.has_b || !b1.has_b || !b2.has_b) continue;
    rc = std::max(rc, rel_diff(b1.b, std::conj(b0.b)));
    rn = std::max(rn, rel_diff(b2.b, b0.b));
    ++n;
  }
  const std::string fp = fp_of(v);
  if (n == 0)
    return {special("b.sym_conj", "b(1/conj lambda) = conj b(lambda)", Status::inapplicable,
                    "no resolved b samples", fp),
            special("b.sym_neg", "b(-1/conj lambda) = b(lambda)", Status::inapplicable,
                    "no resolved b samples", fp)};
  std::vector<CheckRecord> out{
      make_record("b.sym_conj", "b(1/conj lambda) = conj b(lambda)", rc, tol, fp),
      make_record("b.sym_neg", "b(-1/conj lambda) = b(lambda)", rn, tol, fp)};
  for (auto& c : out) c.details = {{"samples", n}};
  return out;
}

CheckRecord check_a_limit(const Potential& v, const std::vector<cplx>& lambdas,
                          const ScanOptions& opts, double tol) {
  const std::string anchor = "a(lambda) -> vhat(0) as lambda -> 0 and infinity";
  cplx v0 = fourier_hat_v(v, 0.0);
  if (v0 == cplx(0))
    return special("a.limit", anchor, Status::inapplicable, "vhat(0) = 0", fp_of(v));
  ScatteringData d = scan(v, lambdas, without_det(opts));
  double worst = 0.0;
  for (const auto& r : d.records) {
    if (!r.has_a)
      return special("a.limit", anchor, Status::fail, "a unavailable", fp_of(v));
    worst = std::max(worst, std::abs(r.a - v0) / std::abs(v0));
  }
  CheckRecord c = make_record("a.limit", anchor, worst, tol, fp_of(v));
  c.details = {{"vhat0", cj(v0)}, {"samples", lambdas.size()}};
  return c;
}

CheckRecord check_born_scaling(const Grid& grid, Family f, PotentialParams p,
                               const std::vector<double>& amplitudes,
                               const std::vector<cplx>& lambdas, const ScanOptions& opts,
                               double tol) {
  const std::string anchor = "b - born_b = O(A^2)";
  if (amplitudes.size() < 2) throw Error(ErrorCode::invalid_argument, "need two amplitudes");
  std::vector<double> err;
  for (double A : amplitudes) {
    p.A = A;
    Potential v = sample_potential(grid, f, p);
    ScatteringData d = scan(v, lambdas, without_det(opts));
    double e = 0.0;
    for (const auto& r : d.records)
      if (r.has_b) e = std::max(e, std::abs(r.b - born_b(v, r.lambda)));
    err.push_back(e);
  }
  double worst = 0.0;
  json ratios = json::array();
  for (std::size_t i = 1; i < err.size(); ++i) {
    double expect = std::pow(amplitudes[i] / amplitudes[i - 1], 2);
    double q = err[i - 1] > 0 ? err[i] / err[i - 1] : 0.0;
    ratios.push_back(q);
    worst = std::max(worst, std::abs(q / expect - 1.0));
  }
  CheckRecord c = make_record("born.scaling", anchor, worst, tol);
  c.details = {{"errors", err}, {"ratios", ratios}, {"amplitudes", amplitudes}};
  return c;
}

// --- d-bar ----------------------------------------------------------------

CheckRecord check_dbar_a(const Potential& v, cplx lambda, const ScanOptions& opts,
                         const DbarOptions& d) {
  const std::string id = "dbar.a", anchor = "d a / d conj lambda proportional to sgn(1 - |lambda|^2) |b|^2 / conj lambda";
  const std::string fp = fp_of(v);
  if (!stencil_clear(lambda, d.step, d.t_band))
    return special(id, anchor, Status::inapplicable, "stencil crosses T or E", fp);
  std::vector<cplx> ls{lambda};
  for (double s : {d.step, d.step / 2})
    for (cplx x : stencil(lambda, s)) ls.push_back(x);
  ScatteringData sd = scan(v, ls, without_det(opts));
  for (const auto& r : sd.records)
    if (!r.has_a || r.flagged("mu_nonconvergent"))
      return special(id, anchor, Status::inapplicable, "stencil crosses T or E", fp);
  const auto& c0 = sd.records[0];
  if (!c0.has_b) return special(id, anchor, Status::inapplicable, "b unresolved at lambda", fp);
  cplx rhs = kDbarSign * pi * sgn(1.0 - std::norm(lambda)) * std::norm(c0.b) / std::conj(lambda);
  double res[2], res_printed = 0.0;
  cplx lhs[2];
  for (int k = 0; k < 2; ++k) {
    cplx f[4];
    for (int j = 0; j < 4; ++j) f[j] = sd.records[1 + 4 * k + j].a;
    lhs[k] = dbar_fd(f, k == 0 ? d.step : d.step / 2);
    res[k] = rel_diff(lhs[k], rhs);
  }
  res_printed = rel_diff(lhs[0], -rhs);
  CheckRecord c;
  c.id = id;
  c.anchor = anchor;
  c.fingerprint = fp;
  c.details = {{"lambda", cj(lambda)}, {"lhs", cj(lhs[0])}, {"rhs", cj(rhs)},
               {"opposite_sign_residual", res_printed}, {"step", d.step}};
  apply_halving(c, res[0], res[1], d);
  return c;
}

CheckRecord check_dbar_mu(const Potential& v, const std::vector<cplx>& z_samples, cplx lambda,
                          const ScanOptions& opts, const DbarOptions& d) {
  const std::string id = "dbar.mu", anchor = "d mu / d conj lambda = r(z, lambda) conj mu";
  const std::string fp = fp_of(v);
  if (!stencil_clear(lambda, d.step, d.t_band))
    return special(id, anchor, Status::inapplicable, "stencil crosses T or E", fp);
  const Grid& g = v.grid;
  std::vector<std::size_t> idx;
  std::vector<cplx> zs;
  for (cplx z : z_samples) {
    int j = int(std::lround((z.real() + g.R) / g.h)), k = int(std::lround((z.imag() + g.R) / g.h));
    if (j < 0 || k < 0 || j >= g.N || k >= g.N)
      throw Error(ErrorCode::invalid_argument, "z sample outside the grid");
    idx.push_back(g.index(j, k));
    zs.push_back(g.node(j, k));
  }
  std::vector<cplx> ls{lambda};
  for (double s : {d.step, d.step / 2})
    for (cplx x : stencil(lambda, s)) ls.push_back(x);
  std::vector<MuField> mus(ls.size());
  bool failed = false;
  parallel_for(ls.size(), opts.threads, [&](std::size_t i) {
    try {
      mus[i] = solve_mu(v, cached_greens_table(g, ls[i], opts.greens), opts.solver);
    } catch (const Error&) {
      failed = true;
    }
  });
  if (failed) return special(id, anchor, Status::inapplicable, "stencil crosses T or E", fp);
  if (!b_resolved(g, lambda))
    return special(id, anchor, Status::inapplicable, "b unresolved at lambda", fp);
  cplx b = compute_b(v, mus[0]);
  cplx rl = kDbarSign * r_of_b(lambda, b);
  cplx w = lambda - 1.0 / std::conj(lambda);
  std::vector<cplx> rhs;
  for (std::size_t s = 0; s < zs.size(); ++s)
    rhs.push_back(rl * std::exp(0.5 * (w * std::conj(zs[s]) - std::conj(w) * zs[s])) *
                  std::conj(mus[0].mu[idx[s]]));
  double res[2], res_printed = 0.0;
  json per = json::array();
  for (int k = 0; k < 2; ++k) {
    double num = 0.0, den = 0.0, num_p = 0.0;
    for (std::size_t s = 0; s < zs.size(); ++s) {
      cplx f[4];
      for (int j = 0; j < 4; ++j) f[j] = mus[1 + 4 * k + j].mu[idx[s]];
      cplx lhs = dbar_fd(f, k == 0 ? d.step : d.step / 2);
      num = std::max(num, std::abs(lhs - rhs[s]));
      num_p = std::max(num_p, std::abs(lhs + rhs[s]));
      den = std::max({den, std::abs(lhs), std::abs(rhs[s])});
      if (k == 0) per.push_back({{"z", cj(zs[s])}, {"lhs", cj(lhs)}, {"rhs", cj(rhs[s])}});
    }
    res[k] = den > 0 ? num / den : 0.0;
    if (k == 0) res_printed = den > 0 ? num_p / den : 0.0;
  }
  CheckRecord c;
  c.id = id;
  c.anchor = anchor;
  c.fingerprint = fp;
  c.details = {{"lambda", cj(lambda)}, {"samples", per}, {"opposite_sign_residual", res_printed},
               {"step", d.step}};
  apply_halving(c, res[0], res[1], d);
  return c;
}

CheckRecord check_dbar_lndelta(const Potential& v, cplx lambda, const ScanOptions& opts,
                               const DbarOptions& d) {
  const std::string id = "dbar.lndelta",
                    anchor = "d ln Delta / d conj lambda = -pi sgn (a(1/conj lambda) - vhat(0)) / conj lambda";
  const std::string fp = fp_of(v);
  if (!stencil_clear(lambda, d.step, d.t_band))
    return special(id, anchor, Status::inapplicable, "stencil crosses T", fp);
  std::vector<cplx> ls;
  for (double s : {d.step, d.step / 2})
    for (cplx x : stencil(lambda, s)) ls.push_back(x);
  std::vector<cplx> del(ls.size());
  parallel_for(ls.size(), opts.threads,
               [&](std::size_t i) { del[i] = det_at(v, ls[i], opts).delta; });
  double dmin = 1e300;
  for (cplx x : del) dmin = std::min(dmin, std::abs(x));
  if (dmin < 1e-6) return special(id, anchor, Status::inapplicable, "Delta too small on stencil", fp);
  LambdaRecord inv = evaluate_lambda(v, 1.0 / std::conj(lambda), without_det(opts));
  if (!inv.has_a) return special(id, anchor, Status::inapplicable, "a unavailable at 1/conj lambda", fp);
  cplx rhs = -pi * sgn(std::norm(lambda) - 1.0) / std::conj(lambda) * (inv.a - fourier_hat_v(v, 0.0));
  double res[2];
  cplx lhs[2];
  for (int k = 0; k < 2; ++k) {
    const double s = k == 0 ? d.step : d.step / 2;
    cplx dx = std::log(del[4 * k] / del[4 * k + 1]) / (2 * s);
    cplx dy = std::log(del[4 * k + 2] / del[4 * k + 3]) / (2 * s);
    lhs[k] = 0.5 * (dx + cplx(0, 1) * dy);
    res[k] = rel_diff(lhs[k], rhs);
  }
  CheckRecord c;
  c.id = id;
  c.anchor = anchor;
  c.fingerprint = fp;
  c.details = {{"lambda", cj(lambda)}, {"lhs", cj(lhs[0])}, {"rhs", cj(rhs)},
               {"min_abs_delta", dmin}, {"step", d.step}};
  apply_halving(c, res[0], res[1], d);
  return c;
}

CheckRecord check_shift_lemma(const Potential& v, cplx zeta, const std::vector<cplx>& lambdas,
                              const ScanOptions& opts, double tol) {
  const std::string anchor = "translation v(z - zeta): a unchanged, b gains a unimodular phase";
  Potential vz = translate_potential(v, zeta);
  ScatteringData d0 = scan(v, lambdas, without_det(opts));
  ScatteringData d1 = scan(vz, lambdas, without_det(opts));
  double ra = 0.0, rb = 0.0;
  int nb = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto &r0 = d0.records[i], &r1 = d1.records[i];
    if (!r0.has_a || !r1.has_a) {
      const auto& bad = r0.has_a ? r1 : r0;
      std::string why = bad.flags.empty() ? "unknown" : bad.flags.front();
      return special("shift.lemma", anchor, Status::fail, "solve failed (" + why + ")", fp_of(v));
    }
    ra = std::max(ra, rel_diff(r1.a, r0.a));
    if (r0.has_b && r1.has_b) {
      cplx l = lambdas[i], w = l - 1.0 / std::conj(l);
      cplx ph = std::exp(-0.5 * (w * std::conj(zeta) - std::conj(w) * zeta));
      rb = std::max(rb, rel_diff(r1.b, ph * r0.b));
      ++nb;
    }
  }
  CheckRecord c = make_record("shift.lemma", anchor, std::max(ra, rb), tol, fp_of(v));
  c.details = {{"zeta", cj(zeta)}, {"residual_a", ra}, {"residual_b", rb},
               {"samples", lambdas.size()}, {"b_samples", nb}};
  return c;
}

// --- obstruction ------------------------------------------------------------

cplx soliton_mismatch(cplx l, cplx c) {
  cplx lb = std::conj(l);
  cplx tr = -0.5 * ((l - 1.0 / lb) * std::conj(c) - (lb - 1.0 / l) * c);
  return tr - (l * l * l + 1.0 / (l * l * l) - lb * lb * lb - 1.0 / (lb * lb * lb));
}

std::vector<cplx> annulus_samples(double r_lo, double r_hi, int n, std::uint64_t seed) {
  if (!(r_lo > 0 && r_hi > r_lo)) throw Error(ErrorCode::invalid_argument, "bad annulus");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> out;
  for (int i = 0; i < n; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, u(rng));
    out.push_back(std::polar(r, 2 * pi * u(rng)));
  }
  return out;
}

CheckRecord soliton_obstruction(cplx c, const std::vector<cplx>& lambdas, double floor,
                                double min_fraction) {
  char id[64];
  std::snprintf(id, sizeof id, "soliton.c=%g%+gi", c.real(), c.imag());
  const std::string anchor = "translation and cubic flow phases are independent near 0 and infinity";
  int generic = 0, nonzero = 0;
  double min_abs = 1e300;
  for (cplx l : lambdas) {
    if (l == cplx(0)) throw Error(ErrorCode::invalid_argument, "lambda = 0 in samples");
    if (std::abs(l.imag()) <= 1e-12 * std::abs(l)) continue;
    ++generic;
    double m = std::abs(soliton_mismatch(l, c));
    min_abs = std::min(min_abs, m);
    if (m > floor) ++nonzero;
  }
  if (generic == 0)
    return special(id, anchor, Status::inapplicable, "insufficient generic samples");
  double frac = double(nonzero) / generic;
  CheckRecord r = make_record(id, anchor, 1.0 - frac, 1.0 - min_fraction);
  r.details = {{"c", cj(c)}, {"samples", lambdas.size()}, {"generic", generic},
               {"nonzero", nonzero}, {"fraction", frac}, {"min_abs_mismatch", min_abs},
               {"floor", floor}};
  return r;
}

CheckRecord transparency_chain_demo(const Potential& v_weak, const LambdaGrid& lg,
                                    const ScanOptions& opts) {
  const std::string id = "transparency.chain", anchor = "nonzero localized v is not transparent";
  const std::string fp = fp_of(v_weak);
  if (v_weak.is_zero()) return special(id, anchor, Status::skipped, "zero potential", fp);
  ScanOptions o = opts;
  o.determinant = true;
  ScatteringData d = scan(v_weak, lg, o);
  double mind = 1e300, mb = 0.0, mborn = 0.0;
  for (const auto& r : d.records) {
    if (r.flagged("exceptional"))
      return special(id, anchor, Status::inapplicable, "exceptional points present", fp);
    if (r.has_det) mind = std::min(mind, std::abs(r.det.delta));
    if (!r.has_b) continue;
    mb = std::max(mb, std::abs(r.b));
    mborn = std::max(mborn, std::abs(born_b(v_weak, r.lambda)));
  }
  if (mind <= 0.5) return special(id, anchor, Status::inapplicable, "min |Delta| <= 0.5", fp);
  CheckRecord c = make_record(id, anchor, mborn > 0 ? std::max(0.0, 1.0 - mb / mborn) : 1.0, 0.5, fp);
  if (mborn <= 0) c.status = Status::fail;
  c.details = {{"max_abs_b", mb}, {"max_abs_born_b", mborn}, {"min_abs_delta", mind}};
  return c;
}

// --- suite ------------------------------------------------------------------

namespace {

std::vector<cplx> ring(double r, int n, double offset = 0.0) {
  std::vector<cplx> out;
  for (int k = 0; k < n; ++k) out.push_back(std::polar(r, 2 * pi * (k + offset) / n));
  return out;
}

}  // namespace

VerificationReport run_suite(const Potential& v, const SuiteOptions& o,
                             const ScatteringData* cached, ScatteringData* scan_out) {
  auto on = [&](const char* g) {
    return o.select.empty() || std::find(o.select.begin(), o.select.end(), g) != o.select.end();
  };
  std::vector<CheckRecord> recs;
  const ScanOptions& so = o.scan;
  const Grid& g = v.grid;

  if (on("ab") || on("delta")) {
    // T samples for a = b plus a compact determinant set: T, inversion pairs, limits.
    std::vector<cplx> ls = ring(1.0, 8);
    for (cplx l : ring(0.5, 4, 0.125)) {
      ls.push_back(l);
      ls.push_back(1.0 / std::conj(l));
    }
    for (double r : o.delta.limit_radii)
      for (cplx l : ring(r, 4, 0.3)) ls.push_back(l);
    ScatteringData d;
    if (cached && cached->fingerprint == fingerprint(v)) {
      d = *cached;
    } else {
      ScanOptions t = so;
      t.determinant = false;
      LambdaGridSpec ts = o.lambda_grid;
      LambdaGrid lg = make_lambda_grid(ts);
      std::vector<cplx> tl;
      for (const auto& p : lg.points)
        if (p.onT) tl.push_back(p.lambda);
      d = scan(v, tl, t);
    }
    bool have_det = std::any_of(d.records.begin(), d.records.end(),
                                [](const LambdaRecord& r) { return r.has_det; });
    if (!have_det) {
      ScatteringData dd = scan(v, ls, so);
      for (auto& r : dd.records) {
        auto it = std::find_if(d.records.begin(), d.records.end(), [&](const LambdaRecord& x) {
          return std::abs(x.lambda - r.lambda) <= 1e-9 * (1.0 + std::abs(r.lambda));
        });
        if (it == d.records.end()) {
          d.records.push_back(r);
        } else {
          it->det = r.det;
          it->has_det = r.has_det;
        }
      }
    }
    if (on("ab")) recs.push_back(check_ab_on_T(d, o.ab_tol));
    if (on("delta"))
      for (auto& r : check_delta_properties(d, o.delta)) recs.push_back(std::move(r));
    if (scan_out) *scan_out = d;
  }
  if (on("continuity")) recs.push_back(check_delta_continuity(v, pi / 5, 1.0, 0.02, 2, so));
  if (on("greens")) {
    recs.push_back(check_greens_T_identity(g, 8, 0.5, 4.0, 4, so.greens, o.t_identity_tol).record);
    std::vector<cplx> ls{cplx(0.5, 0), std::polar(0.2, 0.7), std::polar(0.9, 2.0), std::polar(1.0, 0.4)};
    recs.push_back(check_greens_conj_symmetry(g, ls, so.greens, o.symmetry_tol));
    recs.push_back(check_greens_rotation(g, {cplx(0.5, 0), std::polar(2.0, 0.3)}, so.greens, o.symmetry_tol));
  }
  if (on("bsym"))
    for (auto& r : check_b_symmetry(v, {std::polar(0.5, 0.3), std::polar(0.7, 2.1), std::polar(0.4, 4.0)},
                                    so, o.symmetry_tol))
      recs.push_back(std::move(r));
  if (on("alimit")) recs.push_back(check_a_limit(v, ring(50.0, 4, 0.1), so));
  if (on("born") && v.family != Family::custom) {
    std::vector<cplx> ls{std::polar(0.5, 0.2), std::polar(0.8, 1.9), std::polar(1.0, 0.6)};
    recs.push_back(check_born_scaling(g, v.family, v.params, {1e-3, 2e-3, 4e-3}, ls, so));
  }
  if (on("dbar")) {
    recs.push_back(check_dbar_a(v, 0.5, so, o.dbar));
    recs.push_back(check_dbar_mu(v, {0.0, 1.0, cplx(0, 1)}, std::polar(0.5, pi / 4), so, o.dbar));
    recs.push_back(check_dbar_lndelta(v, 0.4, so, o.dbar));
  }
  if (on("shift")) {
    std::vector<cplx> ls;
    for (double r : {0.4, 0.7, 1.0})
      for (cplx l : ring(r, 8, 0.2)) ls.push_back(l);
    recs.push_back(check_shift_lemma(v, o.shift_zeta, ls, so, o.shift_tol));
  }
  if (on("soliton")) {
    std::vector<cplx> ls = annulus_samples(0.01, 0.1, 32, o.seed);
    for (cplx l : annulus_samples(10.0, 100.0, 32, o.seed + 1)) ls.push_back(l);
    for (cplx c : o.soliton_c) recs.push_back(soliton_obstruction(c, ls));
  }
  if (on("transparency") && v.family != Family::custom) {
    PotentialParams p = v.params;
    p.A = 0.1;
    LambdaGridSpec s;
    s.r_min = 0.3;
    s.r_max = 0.7;
    s.annuli = 2;
    s.phases = 4;
    s.t_points = 4;
    recs.push_back(transparency_chain_demo(sample_potential(g, v.family, p), make_lambda_grid(s), so));
  }
  json meta = {{"fingerprint", fp_of(v)},
               {"family", family_name(v.family)},
               {"R", g.R},
               {"N", g.N},
               {"solver_tol", so.solver.tol},
               {"dbar_step", o.dbar.step},
               {"seed", o.seed}};
  return assemble_report(std::move(recs), meta);
}

}  // namespace nvscat
