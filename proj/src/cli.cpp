#include "qdl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "qdl/arith.hpp"
#include "qdl/explicit_formula.hpp"
#include "qdl/ffield.hpp"
#include "qdl/numeric.hpp"
#include "qdl/predict.hpp"
#include "qdl/testfn.hpp"
#include "qdl/weightfn.hpp"
#include "qdl/zeros.hpp"

namespace qdl {

namespace {

constexpr const char* kVersion = "qdl 1.0.0";

const std::set<std::string> kCommands{"constants", "density", "zeros", "compare", "ffield"};

// One entry per configurable field: JSON key, flag name, and how to read the
// key from JSON or copy the field between configs.
struct Field {
  std::string key;
  std::string flag;
  std::function<void(const nlohmann::json&, RunConfig&)> from_json;
  std::function<void(const RunConfig&, RunConfig&)> copy;
};

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DomainError("config key '" + key + "' has the wrong type");
  }
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const std::string& key) {
  if (j.is_array()) return get_as<std::vector<T>>(j, key);
  return {get_as<T>(j, key)};
}

#define QDL_FIELD(KEY, FLAG, MEMBER, READ)                                                      \
  Field {                                                                                        \
    KEY, FLAG, [](const nlohmann::json& j, RunConfig& c) { c.MEMBER = READ; },                  \
        [](const RunConfig& from, RunConfig& to) { to.MEMBER = from.MEMBER; }                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      QDL_FIELD("command", "command", command, get_as<std::string>(j, "command")),
      QDL_FIELD("X", "--X", X_ladder, scalar_or_list<double>(j, "X")),
      QDL_FIELD("kernel", "--kernel", kernel, get_as<std::string>(j, "kernel")),
      QDL_FIELD("sigma", "--sigma", sigma, get_as<double>(j, "sigma")),
      QDL_FIELD("weight", "--weight", weight, get_as<std::string>(j, "weight")),
      QDL_FIELD("family", "--family", family, get_as<std::string>(j, "family")),
      QDL_FIELD("theorem", "--theorem", theorem, get_as<std::string>(j, "theorem")),
      QDL_FIELD("convention", "--convention", convention, get_as<std::string>(j, "convention")),
      QDL_FIELD("K", "--K", K, get_as<int>(j, "K")),
      QDL_FIELD("T", "--T", T_height, get_as<double>(j, "T")),
      QDL_FIELD("d_min", "--d-min", d_min, get_as<std::int64_t>(j, "d_min")),
      QDL_FIELD("d_max", "--d-max", d_max, get_as<std::int64_t>(j, "d_max")),
      QDL_FIELD("s_cutoff", "--s-cutoff", s_cutoff, get_as<std::int64_t>(j, "s_cutoff")),
      QDL_FIELD("prime_cutoff", "--prime-cutoff", prime_cutoff, get_as<std::int64_t>(j, "prime_cutoff")),
      QDL_FIELD("q", "--q", q, get_as<int>(j, "q")),
      QDL_FIELD("n", "--n", n_list, scalar_or_list<int>(j, "n")),
      QDL_FIELD("cache_dir", "--cache-dir", cache_dir, get_as<std::string>(j, "cache_dir")),
      QDL_FIELD("out", "--out", output_path, get_as<std::string>(j, "out")),
      QDL_FIELD("format", "--format", format, get_as<std::string>(j, "format")),
      QDL_FIELD("plot_script", "--plot-script", plot_script_path, get_as<std::string>(j, "plot_script")),
      QDL_FIELD("dump", "--dump", dump_prefix, get_as<std::string>(j, "dump")),
      QDL_FIELD("threads", "--threads", threads, get_as<int>(j, "threads")),
      QDL_FIELD("quiet", "--quiet", quiet, get_as<bool>(j, "quiet")),
  };
  return f;
}

#undef QDL_FIELD

// Progress with ETA on standard error.
class Progress {
 public:
  Progress(bool quiet, std::string what, std::size_t total)
      : quiet_(quiet), what_(std::move(what)), total_(total), start_(std::chrono::steady_clock::now()) {}

  void step(const std::string& label) {
    ++done_;
    if (quiet_) return;
    const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const double eta = done_ < total_ ? el / static_cast<double>(done_) * static_cast<double>(total_ - done_) : 0.0;
    std::cerr << "qdl " << what_ << ": [" << done_ << "/" << total_ << "] " << label << "  elapsed "
              << format_number(std::round(el * 10.0) / 10.0) << " s, eta " << format_number(std::round(eta * 10.0) / 10.0)
              << " s\n";
  }

  void note(const std::string& msg) const {
    if (!quiet_) std::cerr << "qdl " << what_ << ": " << msg << "\n";
  }

 private:
  bool quiet_;
  std::string what_;
  std::size_t total_, done_ = 0;
  std::chrono::steady_clock::time_point start_;
};

Family family_for(const RunConfig& cfg) {
  if (!cfg.family.empty()) return parse_family(cfg.family);
  if (!cfg.theorem.empty()) {
    const Theorem t = parse_theorem(cfg.theorem);
    return t == Theorem::T1_1 || t == Theorem::T3_5 ? Family::F_star : Family::F_all;
  }
  return Family::F_star;
}

Theorem theorem_for(const RunConfig& cfg) {
  if (!cfg.theorem.empty()) return parse_theorem(cfg.theorem);
  if (family_for(cfg) == Family::F_star) return Theorem::T1_1;
  return cfg.sigma < 1.0 ? Theorem::T1_3 : Theorem::T1_2;
}

Convention parse_convention(const std::string& s) {
  if (s == "kronecker_literal") return Convention::kronecker_literal;
  if (s == "primitive") return Convention::primitive;
  throw DomainError("unknown convention '" + s + "' (expected kronecker_literal or primitive)");
}

bool is_small_odd_prime(int q) { return q == 3 || q == 5 || q == 7 || q == 11 || q == 13; }

std::int64_t sieve_limit_for(const RunConfig& cfg) {
  double need = static_cast<double>(std::max<std::int64_t>(cfg.s_cutoff, cfg.prime_cutoff));
  for (double X : cfg.X_ladder) {
    need = std::max(need, 8.0 * X + 16.0);
    need = std::max(need, std::exp(cfg.sigma * L_of(X)) + 2.0);
  }
  return static_cast<std::int64_t>(std::ceil(need));
}

void fail_row(Table& t, const std::exception& e) {
  std::vector<Cell> row(t.columns.size());
  row[0] = std::string("FAILED: ") + e.what();
  t.rows.push_back(std::move(row));
}

CommandResult cmd_constants(const RunConfig& cfg) {
  CommandResult res;
  Table& t = res.table;
  t.columns = {"name", "value", "uncertainty", "note"};
  Progress pr(cfg.quiet, "constants", 3);
  const auto tables = build_sieves(std::max<std::int64_t>({cfg.s_cutoff, cfg.prime_cutoff, 1000000}));
  pr.step("sieve to " + std::to_string(tables.limit));
  const auto ctx = make_prediction_context(tables, make_weight(cfg.weight), cfg.s_cutoff);
  pr.step("Moebius kernels to " + std::to_string(cfg.s_cutoff));
  const auto& c = ctx.constants;
  const auto& w = ctx.weight();
  t.add_row({std::string("euler_gamma"), c.euler_gamma, 0.0, std::string("")});
  t.add_row({std::string("zeta(2)"), c.zeta_2, 0.0, std::string("")});
  t.add_row({std::string("zeta(1/2)"), c.zeta_half, 0.0, std::string("")});
  t.add_row({std::string("zeta'(2)/zeta(2)"), c.zeta_prime_over_zeta_at_2, 0.0, std::string("")});
  t.add_row({std::string("prime_constant"), c.prime_constant.value, c.prime_constant.error,
             std::string("sum_{p>=3} log p/(p(p^2-1))")});
  t.add_row({std::string("theta_integral"), c.theta_integral_value.value, c.theta_integral_value.error,
             std::string("int_2^inf (theta(t)-t)/t^2 dt, truncated at the sieve limit")});
  t.add_row({std::string("theta_integral_refined"), c.theta_integral_refined.value, c.theta_integral_refined.error,
             std::string("same integral through Mertens' second theorem")});
  t.add_row({std::string("weight_log_moment"), 2.0 / w.w_hat0() * w.w_log_moment, 0.0,
             std::string("(2/w_hat(0)) int_0^inf w(x) log x dx")});
  t.add_row({std::string("r_bracket"), r_bracket(ctx), c.prime_constant.error + 2.0 * c.theta_integral_refined.error,
             std::string("phi_hat(0) coefficient of R_w1")});
  const auto cw = c_w1(ctx);
  t.add_row({std::string("c_w1"), cw.value, cw.error, std::string("phi_hat(1) coefficient of R_w1")});
  const auto v = v_w1(ctx.transforms);
  t.add_row({std::string("v_w1"), v.value, 0.0, std::string("phi_hat(1) coefficient of the U_2 limit")});
  const auto e = s_even_expansion(fejer(0.5), ctx, 10.0);
  t.add_row({std::string("d1"), e.d1, 2.0 * c.prime_constant.error + 2.0 * c.theta_integral_refined.error,
             std::string("proof grouping")});
  for (const auto& r : e.literal_readings)
    t.add_row({std::string("d1 [") + r.name + "]", r.d1, 0.0, std::string("literal reading")});
  pr.step("constants");
  return res;
}

CommandResult cmd_density_or_compare(const RunConfig& cfg, bool with_empirical) {
  CommandResult res;
  Table& t = res.table;
  const Family fam = family_for(cfg);
  const Theorem th = theorem_for(cfg);
  const Convention conv = parse_convention(cfg.convention);
  const TestFunction phi = make_kernel(cfg.kernel, cfg.sigma);
  const WeightFunction w = make_weight(cfg.weight);
  t.columns = {"X", "L", "family", "theorem"};
  if (with_empirical) {
    t.columns.push_back("empirical");
    t.columns.push_back("empirical_truncation_bound");
  }
  for (const char* c : {"explicit", "main_term", "theorem_rhs", "residual", "residual_L", "predicted_coefficient",
                        "rhs_gap", "eta", "X_eta", "xi", "X_xi"})
    t.columns.push_back(c);
  res.plot_x = "X";
  res.plot_y = {"residual_L", "predicted_coefficient"};
  res.plot_log_x = true;

  Progress pr(cfg.quiet, cfg.command, cfg.X_ladder.size() + 1);
  const auto tables = build_sieves(sieve_limit_for(cfg));
  const auto ctx = make_prediction_context(tables, w, cfg.s_cutoff);
  pr.step("sieve to " + std::to_string(tables.limit) + " and Moebius kernels");
  const auto ex = error_exponents(cfg.sigma);
  t.meta["extracted_coefficients"] = nlohmann::ordered_json::array();
  for (double X : cfg.X_ladder) {
    try {
      const double L = L_of(X);
      const auto spec = make_family_spec(fam, X, tables, w, conv);
      const auto br = density(spec, phi);
      const auto rhs = theorem_rhs(th, phi, ctx, X, cfg.K);
      std::vector<Cell> row{X, L, family_name(fam), theorem_name(th)};
      if (with_empirical) {
        if (cfg.T_height > 0.0) {
          const auto emp = empirical_density(spec, phi, cfg.T_height, [&](std::int64_t d) {
            return cached_zeros(d, cfg.T_height, cfg.cache_dir);
          });
          row.push_back(emp.value);
          row.push_back(emp.truncation_bound);
        } else {
          row.push_back(std::monostate{});
          row.push_back(std::monostate{});
        }
      }
      const double residual = br.total - rhs.main_term;
      double coeff = 0.0;
      if (th == Theorem::T1_1 || th == Theorem::T3_5)
        coeff = rhs.coefficients.front().value;
      else
        coeff = (rhs.total - rhs.main_term) * L;
      row.insert(row.end(), {br.total, rhs.main_term, rhs.total, residual, residual * L, coeff, br.total - rhs.total,
                             ex.eta, std::pow(X, ex.eta)});
      if (ex.xi) {
        row.push_back(*ex.xi);
        row.push_back(std::pow(X, *ex.xi));
      } else {
        row.push_back(std::monostate{});
        row.push_back(std::monostate{});
      }
      t.add_row(std::move(row));
      if (rhs.coefficients.size() > 1 && t.meta["extracted_coefficients"].empty())
        for (const auto& c : rhs.coefficients) t.meta["extracted_coefficients"].push_back({{"k", c.k}, {"value", c.value}, {"label", c.label}});
    } catch (const std::exception& e) {
      fail_row(t, e);
      res.certified = false;
      break;
    }
    pr.step("X = " + format_number(X));
  }
  return res;
}

CommandResult cmd_zeros(const RunConfig& cfg) {
  CommandResult res;
  Table& t = res.table;
  t.columns = {"d", "conductor", "T", "complete", "zeros", "expected", "first_gamma", "cache_file"};
  res.plot_x = "conductor";
  res.plot_y = {"zeros"};
  std::vector<std::int64_t> ds;
  for (std::int64_t d = cfg.d_min; d <= cfg.d_max; ++d)
    if (d != 0 && is_squarefree(d)) ds.push_back(d);
  Progress pr(cfg.quiet, "zeros", ds.size());
  for (std::int64_t d : ds) {
    try {
      const auto z = cached_zeros(d, cfg.T_height, cfg.cache_dir);
      Cell first = std::monostate{};
      if (z.central_zero) first = 0.0;
      else if (!z.gammas.empty()) first = z.gammas.front();
      t.add_row({d, z.conductor, z.height_T, std::string(z.complete ? "yes" : "no"), z.found(), z.count_expected, first,
                 cfg.cache_dir + "/L_" + std::to_string(d) + ".zeros"});
      res.certified = res.certified && z.complete;
    } catch (const std::exception& e) {
      fail_row(t, e);
      res.certified = false;
      break;
    }
    pr.step("d = " + std::to_string(d));
  }
  return res;
}

CommandResult cmd_ffield(const RunConfig& cfg) {
  CommandResult res;
  Table& t = res.table;
  t.columns = {"q", "n", "g", "curves", "density", "fourier_density", "main_term", "prediction", "error_main",
               "error_corrected", "error_corrected_g2", "max_weil_deviation", "functional_equations"};
  res.plot_x = "n";
  res.plot_y = {"error_main", "error_corrected"};
  const TestFunction phi = make_kernel(cfg.kernel, cfg.sigma);
  Progress pr(cfg.quiet, "ffield", cfg.n_list.size());
  for (int n : cfg.n_list) {
    try {
      const std::string dump =
          cfg.dump_prefix.empty() ? "" : cfg.dump_prefix + "_q" + std::to_string(cfg.q) + "_n" + std::to_string(n) + ".txt";
      const auto d = ff_one_level_density(cfg.q, n, phi, dump);
      const auto r = rudnick_rhs(cfg.q, d.g, phi);
      const double em = std::fabs(d.value - r.main_term), ec = std::fabs(d.value - r.value);
      t.add_row({std::int64_t{cfg.q}, std::int64_t{n}, std::int64_t{d.g}, d.curves, d.value, d.fourier_value, r.main_term,
                 r.value, em, ec, ec * d.g * d.g, d.max_weil_deviation,
                 std::string(d.functional_equations_hold ? "yes" : "no")});
      res.certified = res.certified && d.functional_equations_hold && d.max_weil_deviation < 1e-8 &&
                      std::fabs(d.value - d.fourier_value) < 1e-8;
    } catch (const std::exception& e) {
      fail_row(t, e);
      res.certified = false;
      break;
    }
    pr.step("n = " + std::to_string(n));
  }
  return res;
}

}  // namespace

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["X"] = X_ladder;
  j["kernel"] = kernel;
  j["sigma"] = sigma;
  j["weight"] = weight;
  j["family"] = family;
  j["theorem"] = theorem;
  j["convention"] = convention;
  j["K"] = K;
  j["T"] = T_height;
  j["d_min"] = d_min;
  j["d_max"] = d_max;
  j["s_cutoff"] = s_cutoff;
  j["prime_cutoff"] = prime_cutoff;
  j["q"] = q;
  j["n"] = n_list;
  j["cache_dir"] = cache_dir;
  j["out"] = output_path;
  j["format"] = format;
  j["plot_script"] = plot_script_path;
  j["dump"] = dump_prefix;
  j["quiet"] = quiet;
  return j;
}

void apply_config_json(const nlohmann::json& j, RunConfig& cfg, const std::vector<std::string>& skip) {
  if (!j.is_object()) throw DomainError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return f.key == key; });
    if (it == fields().end()) throw DomainError("unknown config key '" + key + "'");
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    it->from_json(value, cfg);
  }
}

bool parse_run_config(int argc, const char* const* argv, RunConfig& cfg, std::string& message) {
  CLI::App app{"Low-lying zeros of quadratic Dirichlet L-functions: explicit formula, zeros, predictions and the "
               "function-field analogue"};
  app.set_version_flag("--version", kVersion);
  RunConfig f;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::string>> opts;
  auto reg = [&](CLI::Option* o, const std::string& key) { opts.emplace_back(o, key); };
  reg(app.add_option("command", f.command, "constants | density | zeros | compare | ffield")
          ->check(CLI::IsMember(kCommands)),
      "command");
  reg(app.add_option("--X", f.X_ladder, "X values (comma separated)")->delimiter(','), "X");
  reg(app.add_option("--sigma", f.sigma, "support of phi_hat"), "sigma");
  reg(app.add_option("--kernel", f.kernel, "fejer | fejer_squared"), "kernel");
  reg(app.add_option("--weight", f.weight, "weight function (gaussian)"), "weight");
  reg(app.add_option("--family", f.family, "F_star | F_all"), "family");
  reg(app.add_option("--theorem", f.theorem, "T1_1 | T3_5 | T1_2 | T1_3"), "theorem");
  reg(app.add_option("--convention", f.convention, "kronecker_literal | primitive"), "convention");
  reg(app.add_option("--K", f.K, "number of 1/log X coefficients"), "K");
  reg(app.add_option("--T", f.T_height, "zero height"), "T");
  reg(app.add_option("--d-min", f.d_min, "first d for zeros"), "d_min");
  reg(app.add_option("--d-max", f.d_max, "last d for zeros"), "d_max");
  reg(app.add_option("--s-cutoff", f.s_cutoff, "Moebius cutoff of the kernel sums"), "s_cutoff");
  reg(app.add_option("--prime-cutoff", f.prime_cutoff, "minimum sieve limit"), "prime_cutoff");
  reg(app.add_option("--q", f.q, "field size for ffield"), "q");
  reg(app.add_option("--n", f.n_list, "polynomial degrees for ffield (comma separated)")->delimiter(','), "n");
  reg(app.add_option("--cache-dir", f.cache_dir, "zero cache directory"), "cache_dir");
  reg(app.add_option("--out", f.output_path, "output file (default: standard output)"), "out");
  reg(app.add_option("--format", f.format, "csv | json | table"), "format");
  reg(app.add_option("--plot-script", f.plot_script_path, "where to write the plot template"), "plot_script");
  reg(app.add_option("--dump", f.dump_prefix, "ffield: per-curve dump file prefix"), "dump");
  reg(app.add_option("--threads", f.threads, "worker threads (0 = all)"), "threads");
  reg(app.add_flag("--quiet", f.quiet, "no progress on standard error"), "quiet");
  app.add_option("--config", config_path, "JSON config; flags override its values");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    message = app.help();
    return false;
  } catch (const CLI::CallForVersion&) {
    message = std::string(kVersion) + "\n";
    return false;
  } catch (const CLI::ParseError& e) {
    throw DomainError(e.what());
  }
  cfg = RunConfig{};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw DomainError("cannot read config file " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("config file " + config_path + ": " + e.what());
    }
    apply_config_json(j, cfg);
  }
  for (const auto& [opt, key] : opts) {
    if (opt->count() == 0) continue;
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& fl) { return fl.key == key; });
    it->copy(f, cfg);
  }
  validate(cfg);
  return true;
}

void validate(const RunConfig& cfg) {
  if (!kCommands.count(cfg.command)) throw DomainError("missing or unknown command '" + cfg.command + "'");
  parse_format(cfg.format);
  if (cfg.threads < 0) throw DomainError("--threads must be >= 0");
  if (!(cfg.sigma > 0.0)) throw DomainError("--sigma must be > 0");
  make_kernel(cfg.kernel, cfg.sigma);
  make_weight(cfg.weight);
  parse_convention(cfg.convention);
  if (cfg.s_cutoff < 1000) throw DomainError("--s-cutoff must be >= 1000");
  if (cfg.prime_cutoff < 0) throw DomainError("--prime-cutoff must be >= 0");
  if (cfg.command == "density" || cfg.command == "compare") {
    if (cfg.X_ladder.empty()) throw DomainError("--X needs at least one value");
    for (double X : cfg.X_ladder)
      if (!(X >= 20.0) || !(X <= 1e7)) throw DomainError("--X values must lie in [20, 1e7]");
    if (!cfg.family.empty()) parse_family(cfg.family);
    const Theorem th = theorem_for(cfg);
    const Family fam = family_for(cfg);
    const bool star = th == Theorem::T1_1 || th == Theorem::T3_5;
    if (star != (fam == Family::F_star))
      throw DomainError(theorem_name(th) + " describes the family " + (star ? "F_star" : "F_all"));
    if (!(cfg.sigma < 2.0)) throw DomainError("--sigma must be < 2 for the asymptotic formulas");
    if (th == Theorem::T1_3 && !(cfg.sigma < 1.0)) throw DomainError("T1_3 needs --sigma < 1");
    if (cfg.K < 1 || cfg.K > 6) throw DomainError("--K must lie in [1, 6]");
    if (cfg.T_height < 0.0 || cfg.T_height > 200.0) throw DomainError("--T must lie in [0, 200]");
  }
  if (cfg.command == "zeros") {
    if (cfg.d_min > cfg.d_max) throw DomainError("--d-min must not exceed --d-max");
    if (std::max(std::llabs(cfg.d_min), std::llabs(cfg.d_max)) > 2500) throw DomainError("|d| must be <= 2500");
    if (!(cfg.T_height > 0.0) || cfg.T_height > 200.0) throw DomainError("zeros needs --T in (0, 200]");
  }
  if (cfg.command == "ffield") {
    if (!is_small_odd_prime(cfg.q)) throw DomainError("--q must be an odd prime <= 13");
    if (cfg.n_list.empty()) throw DomainError("--n needs at least one value");
    for (int n : cfg.n_list)
      if (n < 3 || n > 12 || n % 2 == 0) throw DomainError("--n values must be odd and lie in [3, 11]");
    if (!(cfg.sigma < 2.0)) throw DomainError("--sigma must be < 2 for ffield");
  }
}

CommandResult run_command(const RunConfig& cfg) {
  validate(cfg);
  set_thread_count(cfg.threads);
  CommandResult res;
  if (cfg.command == "constants") res = cmd_constants(cfg);
  else if (cfg.command == "density") res = cmd_density_or_compare(cfg, true);
  else if (cfg.command == "compare") res = cmd_density_or_compare(cfg, false);
  else if (cfg.command == "zeros") res = cmd_zeros(cfg);
  else res = cmd_ffield(cfg);
  auto& meta = res.table.meta;
  nlohmann::ordered_json m;
  m["version"] = kVersion;
  m["config"] = cfg.to_json();
  m["tolerances"] = {{"c_w1_error", 1e-6},
                     {"family_weight_tail", 1e-14},
                     {"zero_ordinate", 1e-9},
                     {"weil_modulus", 1e-8},
                     {"significant_digits", 12}};
  m["certified"] = res.certified;
  for (auto& [k, v] : meta.items()) m[k] = v;
  meta = m;
  return res;
}

int emit(const RunConfig& cfg, const CommandResult& result) {
  const Format fmt = parse_format(cfg.format);
  const std::string text = render(result.table, fmt);
  if (cfg.output_path.empty()) {
    std::cout << text << std::flush;
  } else {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + cfg.output_path);
    out << text;
  }
  std::string script = cfg.plot_script_path;
  if (script.empty() && fmt == Format::csv && !cfg.output_path.empty()) script = cfg.output_path + ".plot.py";
  if (!script.empty() && !result.plot_x.empty()) {
    const std::string csv = fmt == Format::csv && !cfg.output_path.empty() ? cfg.output_path : "results.csv";
    std::ofstream ps(script);
    if (!ps) throw DomainError("cannot write " + script);
    ps << plot_script(csv, result.plot_x, result.plot_y, result.plot_log_x);
  }
  return result.certified ? 0 : 1;
}

}  // namespace qdl
