// vallee_lab: constants, best approximations, inequality checks and sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "vallee/vallee.hpp"

using nlohmann::ordered_json;
using namespace vallee;

namespace {

constexpr const char* kSchema = "vallee-lab/1";

enum Exit { ok = 0, domain = 2, numeric = 3, partial = 4 };

/// "inf", a real, or a rational multiple of pi: "pi", "pi/2", "3pi/4", "-2*pi/3".
double parse_real(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (c != ' ') t += c;
  }
  if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
  static const std::regex pi_form(R"(^([+-]?[0-9]*\.?[0-9]*)\*?pi(?:/([0-9]*\.?[0-9]+))?$)");
  std::smatch mt;
  if (std::regex_match(t, mt, pi_form)) {
    std::string num = mt[1].str();
    double c = 1.0;
    if (num == "-") {
      c = -1.0;
    } else if (!num.empty() && num != "+") {
      c = std::stod(num);
    }
    const double den = mt[2].matched ? std::stod(mt[2].str()) : 1.0;
    detail::require(den != 0.0, "zero denominator in '" + text + "'");
    return c * kPi / den;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  detail::require(used == t.size() && !t.empty(), "cannot parse number '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_real(item));
  }
  return out;
}

ordered_json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct PsiArgs {
  std::string kind = "geometric";
  std::string q = "0.5";
  std::string alpha = "1";
  std::string r = "2";
  int l = 2;

  void attach(CLI::App* app) {
    app->add_option("--psi", kind, "multiplier kind")
        ->check(CLI::IsMember({"geometric", "genpoisson", "polyharmonic", "heat", "neumann"}));
    app->add_option("--q", q, "ratio limit q");
    app->add_option("--alpha", alpha, "genpoisson alpha");
    app->add_option("--r", r, "genpoisson exponent r");
    app->add_option("--l", l, "polyharmonic order l");
  }

  PsiSequence build() const {
    if (kind == "geometric") return PsiSequence::geometric(parse_real(q));
    if (kind == "genpoisson") return PsiSequence::gen_poisson(parse_real(alpha), parse_real(r));
    if (kind == "polyharmonic") return PsiSequence::polyharmonic(l, parse_real(q));
    if (kind == "heat") return PsiSequence::heat(parse_real(q));
    return PsiSequence::neumann(parse_real(q));
  }

  ordered_json to_json() const {
    ordered_json j;
    j["kind"] = kind;
    if (kind == "genpoisson") {
      j["alpha"] = num(parse_real(alpha));
      j["r"] = num(parse_real(r));
    } else {
      j["q"] = num(parse_real(q));
      if (kind == "polyharmonic") j["l"] = l;
    }
    return j;
  }
};

Theorem parse_theorem(const std::string& t) {
  if (t == "T1") return Theorem::T1;
  if (t == "T2") return Theorem::T2;
  if (t == "T3") return Theorem::T3;
  if (t == "T4") return Theorem::T4;
  throw DomainError("unknown theorem '" + t + "'");
}

PRule parse_prule(const std::string& t) {
  if (t == "half") return {PRuleKind::half, 0};
  if (t == "full") return {PRuleKind::full, 0};
  const double v = parse_real(t);
  detail::require(v >= 1.0 && v == std::floor(v), "--p must be a positive integer, 'half' or 'full'");
  return {PRuleKind::fixed, static_cast<std::size_t>(v)};
}

TrigSeries series_from(const std::string& a, const std::string& b) {
  const auto av = parse_list(a);
  const auto bv = parse_list(b);
  std::vector<double> aa = av;
  std::vector<double> bb = bv;
  const std::size_t n = std::max(aa.size(), bb.size());
  aa.resize(n, 0.0);
  bb.resize(n, 0.0);
  return TrigSeries(0.0, aa, bb);
}

ordered_json series_json(const TrigSeries& t) {
  ordered_json j;
  j["a0"] = num(t.a0());
  ordered_json a = ordered_json::array();
  ordered_json b = ordered_json::array();
  for (std::size_t k = 1; k <= t.degree(); ++k) {
    a.push_back(num(t.a(k)));
    b.push_back(num(t.b(k)));
  }
  j["a"] = a;
  j["b"] = b;
  return j;
}

ordered_json report_json(const InequalityReport& r) {
  ordered_json j;
  j["theorem"] = to_string(r.theorem);
  j["psi"] = r.psi;
  j["beta"] = num(r.beta);
  j["n"] = r.n;
  j["p"] = r.p;
  j["s"] = num(r.s);
  j["lhs"] = num(r.lhs);
  j["rhs_leading"] = num(r.rhs_leading);
  j["budget1"] = num(r.budget1);
  j["budget2"] = num(r.budget2);
  j["ratio"] = num(r.ratio);
  ordered_json terms = ordered_json::object();
  for (const auto& t : r.error_terms) terms[t.name] = num(t.value);
  j["error_terms"] = terms;
  j["best_approx"] = {{"value", num(r.best_approx_value)},
                      {"lower", num(r.best_approx_lower)},
                      {"gap", num(r.best_approx_gap)},
                      {"source", r.best_approx_source}};
  j["K"] = {{"value", num(r.K_value)}, {"est_error", num(r.K_est_error)}, {"method", r.K_method}};
  j["epsilon"] = {{"value", num(r.epsilon)}, {"method", r.epsilon_method}};
  j["truncation_bound"] = num(r.truncation_bound);
  j["flagged"] = r.flagged;
  return j;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DomainError("cannot open output file '" + out + "'");
  f << text;
}

int fail(const char* kind, const std::string& msg, int code, std::optional<double> achieved = {}) {
  ordered_json j;
  j["schema"] = kSchema;
  j["error"] = {{"kind", kind}, {"message", msg}};
  if (achieved) j["error"]["achieved"] = num(*achieved);
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vallee_lab: de la Vallee Poussin deviation bounds on (psi,beta)-differentiable classes"};
  app.require_subcommand(1);

  std::string format = "json";
  std::string out;
  std::string tol_text = "1e-10";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out, "output path (default stdout)");
    sub->add_option("--tol", tol_text, "relative tolerance for norms and exchange");
  };

  // constants
  auto* c_const = app.add_subcommand("constants", "sharp constants and special-function cross-checks");
  std::string c_q;
  int c_p = 1;
  std::vector<std::string> c_u;
  c_const->add_option("--q", c_q, "q in (0,1)")->required();
  c_const->add_option("--p", c_p, "p >= 1");
  c_const->add_option("--u", c_u, "exponents (repeatable, comma lists, 'inf')")->delimiter(',');
  add_common(c_const);

  // best-approx
  auto* c_best = app.add_subcommand("best-approx", "best approximation E_m(phi) in L_s");
  std::string b_phi = "series";
  std::string b_a;
  std::string b_b;
  std::string b_s = "inf";
  std::string b_beta = "0";
  std::string b_E = "1";
  std::string b_delta;
  std::size_t b_m = 1;
  c_best->add_option("--phi", b_phi, "series | extremal | phi-delta")
      ->check(CLI::IsMember({"series", "extremal", "phi-delta"}));
  c_best->add_option("--a", b_a, "cosine coefficients a1,a2,...");
  c_best->add_option("--b", b_b, "sine coefficients b1,b2,...");
  c_best->add_option("--m", b_m, "approximate by order <= m-1")->required();
  c_best->add_option("--s", b_s, "norm exponent (1..inf)");
  c_best->add_option("--beta", b_beta, "phase parameter for the constructed families");
  c_best->add_option("--E", b_E, "amplitude of the constructed families");
  c_best->add_option("--delta", b_delta, "smoothing width for phi-delta");
  add_common(c_best);

  // verify
  auto* c_verify = app.add_subcommand("verify", "evaluate one inequality");
  PsiArgs v_psi;
  std::string v_th = "T1";
  std::string v_beta = "0";
  std::string v_s = "inf";
  std::size_t v_n = 10;
  std::size_t v_p = 1;
  std::string v_phi = "harmonic";
  std::string v_a;
  std::string v_b;
  v_psi.attach(c_verify);
  c_verify->add_option("--theorem", v_th)->check(CLI::IsMember({"T1", "T2", "T3", "T4"}));
  c_verify->add_option("--beta", v_beta);
  c_verify->add_option("--s", v_s);
  c_verify->add_option("--n", v_n);
  c_verify->add_option("--p", v_p);
  c_verify->add_option("--phi", v_phi, "harmonic | series | extremal")
      ->check(CLI::IsMember({"harmonic", "series", "extremal"}));
  c_verify->add_option("--a", v_a, "cosine coefficients for --phi series");
  c_verify->add_option("--b", v_b, "sine coefficients for --phi series");
  add_common(c_verify);

  // sweep
  auto* c_sweep = app.add_subcommand("sweep", "extremal-family sweep over n");
  PsiArgs w_psi;
  std::string w_th = "T1";
  std::string w_beta = "0";
  std::string w_s = "inf";
  long w_from = 10;
  long w_to = 40;
  std::string w_p = "1";
  w_psi.attach(c_sweep);
  c_sweep->add_option("--theorem", w_th)->check(CLI::IsMember({"T1", "T2", "T3", "T4"}));
  c_sweep->add_option("--beta", w_beta);
  c_sweep->add_option("--s", w_s);
  c_sweep->add_option("--n-from", w_from);
  c_sweep->add_option("--n-to", w_to);
  c_sweep->add_option("--p", w_p, "fixed K | half | full");
  add_common(c_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("domain", e.what(), domain);
  }

  try {
    const double tol = parse_real(tol_text);
    detail::require(tol > 0.0 && tol < 1.0, "--tol must lie in (0,1)");
    HarnessOptions hopt;
    hopt.norm.rel_tol = tol;

    if (c_const->parsed()) {
      const double q = parse_real(c_q);
      detail::require(q > 0.0 && q < 1.0, "q must be in (0,1)");
      detail::require(c_p >= 1, "p must be >= 1");
      if (c_u.empty()) c_u = {"1", "2", "inf"};
      const auto p = static_cast<std::size_t>(c_p);
      const double ek = elliptic_K(q);
      const double hyp_resid = std::abs(hyp2f1(0.5, 0.5, 1.0, q * q) - 2.0 / kPi * ek);
      ordered_json rows = ordered_json::array();
      std::string csv = "u,K,est_error,method,sigma,delta,hypergeom_residual\n";
      for (const auto& ut : c_u) {
        const double u = parse_real(ut);
        detail::require(u >= 1.0, "u must be >= 1");
        const auto K = K_qp(q, p, u);
        double resid = std::nan("");
        if (p == 1 && std::isfinite(u)) {
          resid = std::abs(K.value - K_q1_via_hypergeom(q, u)) / K.value;
        } else if (p == 1) {
          resid = std::abs(K.value - 1.0 / (1.0 - q)) / K.value;
        }
        rows.push_back({{"u", num(u)},
                        {"K", num(K.value)},
                        {"est_error", num(K.est_error)},
                        {"method", to_string(K.method)},
                        {"sigma", sigma(u, p)},
                        {"delta", delta_s(u)},
                        {"hypergeom_residual", num(resid)}});
        csv += csv_num(u) + "," + csv_num(K.value) + "," + csv_num(K.est_error) + "," +
               to_string(K.method) + "," + std::to_string(sigma(u, p)) + "," +
               std::to_string(delta_s(u)) + "," + csv_num(resid) + "\n";
      }
      if (format == "csv") {
        emit(csv, out);
      } else {
        ordered_json j;
        j["schema"] = kSchema;
        j["q"] = num(q);
        j["p"] = c_p;
        j["elliptic_K"] = num(ek);
        j["hypergeom_elliptic_residual"] = num(hyp_resid);
        j["constants"] = rows;
        emit(j.dump(2) + "\n", out);
      }
      return ok;
    }

    if (c_best->parsed()) {
      const double s = parse_real(b_s);
      detail::require(s >= 1.0, "s must be >= 1");
      detail::require(b_m >= 1, "m must be >= 1");
      const double beta = parse_real(b_beta);
      const double E = parse_real(b_E);
      BestApproxResult r;
      if (b_phi == "series") {
        const TrigSeries f = series_from(b_a, b_b);
        r = best_approx(f, b_m, s);
      } else if (b_phi == "extremal") {
        r = best_approx(extremal_phi(b_m, beta, s, E), b_m, s);
      } else {
        const double delta = b_delta.empty() ? kPi / (8.0 * static_cast<double>(b_m)) : parse_real(b_delta);
        r = best_approx(phi_delta(b_m, beta, delta, E), b_m, s);
      }
      if (format == "csv") {
        emit("value,lower,upper,certified_gap,solver,iterations\n" + csv_num(r.value) + "," +
                 csv_num(r.lower) + "," + csv_num(r.upper) + "," + csv_num(r.certified_gap) + "," +
                 to_string(r.solver) + "," + std::to_string(r.iterations) + "\n",
             out);
      } else {
        ordered_json j;
        j["schema"] = kSchema;
        j["m"] = b_m;
        j["s"] = num(s);
        j["value"] = num(r.value);
        j["lower"] = num(r.lower);
        j["upper"] = num(r.upper);
        j["certified_gap"] = num(r.certified_gap);
        j["solver"] = to_string(r.solver);
        j["iterations"] = r.iterations;
        j["optimal_poly"] = series_json(r.optimal_poly);
        emit(j.dump(2) + "\n", out);
      }
      return ok;
    }

    if (c_verify->parsed()) {
      const Theorem th = parse_theorem(v_th);
      const PsiSequence psi = v_psi.build();
      const double beta = parse_real(v_beta);
      double s = parse_real(v_s);
      if (th == Theorem::T4) s = kInf;
      detail::check_np(v_n, v_p);
      const std::size_t m = v_n - v_p + 1;
      InequalityReport r;
      auto run = [&](const auto& phi) {
        switch (th) {
          case Theorem::T1: return verify_T1(phi, psi, beta, v_n, v_p, s, hopt);
          case Theorem::T2: return verify_T2(phi, psi, beta, v_n, v_p, s, hopt);
          case Theorem::T3: return verify_T3(phi, psi, beta, v_n, v_p, s, hopt);
          case Theorem::T4: return verify_T4(phi, psi, beta, v_n, v_p, hopt);
        }
        throw DomainError("unknown theorem");
      };
      if (v_phi == "harmonic") {
        r = run(TrigSeries::cosine(m));
      } else if (v_phi == "series") {
        r = run(series_from(v_a, v_b));
      } else {
        const auto rows = extremal_sweep(th, psi, beta, s, {v_n}, PRule{PRuleKind::fixed, v_p}, hopt);
        if (rows[0].status.rfind("error", 0) == 0) throw NumericError(rows[0].status.substr(7));
        r = rows[0].report;
      }
      if (format == "csv") {
        emit("n,p,lhs,rhs_leading,budget1,budget2,ratio,status\n" + std::to_string(r.n) + "," +
                 std::to_string(r.p) + "," + csv_num(r.lhs) + "," + csv_num(r.rhs_leading) + "," +
                 csv_num(r.budget1) + "," + csv_num(r.budget2) + "," + csv_num(r.ratio) + "," +
                 (r.flagged ? "flagged" : "ok") + "\n",
             out);
      } else {
        ordered_json j;
        j["schema"] = kSchema;
        j["psi_params"] = v_psi.to_json();
        j["phi"] = v_phi;
        j["report"] = report_json(r);
        emit(j.dump(2) + "\n", out);
      }
      return ok;
    }

    if (c_sweep->parsed()) {
      detail::require(w_from >= 1 && w_to >= w_from, "n range is empty");
      const Theorem th = parse_theorem(w_th);
      const PsiSequence psi = w_psi.build();
      const double beta = parse_real(w_beta);
      double s = parse_real(w_s);
      if (th == Theorem::T4) s = kInf;
      const PRule rule = parse_prule(w_p);
      std::vector<std::size_t> ns;
      for (long n = w_from; n <= w_to; ++n) ns.push_back(static_cast<std::size_t>(n));
      const auto rows = extremal_sweep(th, psi, beta, s, ns, rule, hopt);
      std::size_t good = 0;
      for (const auto& e : rows) good += e.status.rfind("error", 0) != 0;
      if (format == "csv") {
        std::string csv = "n,p,lhs,rhs_leading,budget1,budget2,ratio,status\n";
        for (const auto& e : rows) {
          std::string st = e.status;
          for (char& ch : st) {
            if (ch == ',' || ch == '\n') ch = ';';
          }
          csv += std::to_string(e.n) + "," + std::to_string(e.p) + "," + csv_num(e.report.lhs) + "," +
                 csv_num(e.report.rhs_leading) + "," + csv_num(e.report.budget1) + "," +
                 csv_num(e.report.budget2) + "," + csv_num(e.report.ratio) + "," + st + "\n";
        }
        emit(csv, out);
      } else {
        ordered_json j;
        j["schema"] = kSchema;
        j["config"] = {{"theorem", w_th},
                       {"psi", w_psi.to_json()},
                       {"beta", num(beta)},
                       {"s", num(s)},
                       {"n_from", w_from},
                       {"n_to", w_to},
                       {"p", w_p},
                       {"tol", num(tol)}};
        ordered_json arr = ordered_json::array();
        for (const auto& e : rows) {
          ordered_json row = report_json(e.report);
          row["status"] = e.status;
          arr.push_back(row);
        }
        j["rows"] = arr;
        emit(j.dump(2) + "\n", out);
      }
      return 10 * good >= 9 * rows.size() ? ok : partial;
    }
  } catch (const NumericError& e) {
    return fail("numeric", e.what(), numeric, e.achieved());
  } catch (const Unsupported& e) {
    return fail("unsupported", e.what(), domain);
  } catch (const DomainError& e) {
    return fail("domain", e.what(), domain);
  } catch (const std::exception& e) {
    return fail("numeric", e.what(), numeric);
  }
  return ok;
}
