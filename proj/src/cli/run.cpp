#include "squarelab/cli.hpp"

#include "squarelab/moments.hpp"
#include "squarelab/search.hpp"
#include "squarelab/suites.hpp"
#include "squarelab/tensor.hpp"
#include "squarelab/wavelet_grid.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#ifndef SQUARELAB_VERSION
#define SQUARELAB_VERSION "0.0.0"
#endif

namespace squarelab::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kFlags = {"exclude-root", "certificate", "fit", "no-ledger"};

std::string scalar_text(const ExactScalar& x) { return x.compact(); }

json exact_pair(const ExactScalar& x) { return {{"exact", scalar_text(x)}, {"float", x.to_double()}}; }

ResultValue exact_result(const ExactScalar& x) { return {scalar_text(x), x.to_double()}; }
ResultValue count_result(std::uint64_t n) { return {std::to_string(n), static_cast<double>(n)}; }
ResultValue float_result(double x) { return {std::nullopt, x}; }

json poly_json(const PolyP& p) {
  json arr = json::array();
  for (int k = 0; k <= PolyP::kMaxDegree; ++k) arr.push_back(scalar_text(p[k]));
  return arr;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

struct Outcome {
  json output;
  std::map<std::string, ResultValue> results;
  std::optional<std::uint64_t> seed;
  int code = kExitOk;
};

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  int depth = -1;
  long long trials = -1;
  std::uint64_t seed = 7;
  unsigned workers = 1;
};

Outcome do_verify(const VerifyArgs& a, std::ostream& err) {
  SuiteOptions options;
  if (a.depth >= 0) options.depth = a.depth;
  if (a.trials >= 0) options.trials = static_cast<std::size_t>(a.trials);
  options.seed = a.seed;
  options.workers = a.workers;
  const std::vector<std::string> names = a.suite == "all" ? suite_names() : std::vector<std::string>{a.suite};

  Outcome o;
  o.seed = a.seed;
  bool passed = true;
  std::optional<bool> oracle;
  json suites = json::array();
  for (const auto& name : names) {
    const SuiteResult r = run_suite(name, options);
    err << "suite " << name << ": " << (r.passed() ? "passed" : "FAILED") << " in " << r.seconds << " s\n";
    for (const auto& c : r.checks)
      if (c.failures > 0) err << "  " << c.name << ": " << c.failures << "/" << c.cases << " failed, first: " << c.first_failure << "\n";
    passed = passed && r.passed();
    if (r.details.contains("oracle_match")) oracle = oracle.value_or(true) && r.details["oracle_match"].get<bool>();
    std::size_t cases = 0, failures = 0;
    for (const auto& c : r.checks) {
      cases += c.cases;
      failures += c.failures;
    }
    o.results[name + ".cases"] = count_result(cases);
    o.results[name + ".failures"] = count_result(failures);
    suites.push_back(r.to_json());
  }
  o.output = {{"suite", a.suite}, {"passed", passed}, {"seed", a.seed},
              {"oracle_match", oracle ? json(*oracle) : json(nullptr)}, {"suites", suites}};
  o.code = passed ? kExitOk : kExitVerificationFailed;
  return o;
}

// ---------------------------------------------------------------------------

struct ChiArgs {
  std::string tree;
  std::string set;
  std::string system;
  std::string mode = "both";
  bool exclude_root = false;
  bool certificate = false;
  unsigned workers = 1;
};

json certificate_json(const ProofCertificate& c) {
  json residuals = json::array();
  for (const auto& r : c.residuals) residuals.push_back(exact_pair(r));
  json dependency = json::array();
  for (const auto& x : c.dependency) dependency.push_back(scalar_text(x));
  json recovery = json::array();
  for (const auto& x : c.recovery) recovery.push_back(scalar_text(x));
  json system = json::array();
  for (Eigen::Index i = 0; i < c.system.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.system.cols(); ++k) row.push_back(scalar_text(c.system(i, k)));
    system.push_back(row);
  }
  return {{"pv", c.pv.str()},
          {"m1", exact_pair(c.m1)},
          {"m2", exact_pair(c.m2)},
          {"eta_ratio", exact_pair(c.eta_ratio)},
          {"residuals", residuals},
          {"system", system},
          {"determinant", scalar_text(c.determinant)},
          {"rank", c.rank},
          {"dependency", dependency},
          {"dependency_value", scalar_text(c.dependency_value)},
          {"pv_recoverable", c.pv_recoverable},
          {"recovery", recovery},
          {"residual_polynomial", poly_json(c.residual_polynomial)},
          {"residual_scale", exact_pair(c.residual_scale)},
          {"verified", c.verified()}};
}

Outcome do_chi(const ChiArgs& a) {
  Outcome o;
  PolyP exact, enumerated;
  const bool want_exact = a.mode == "exact" || a.mode == "both";
  const bool want_enum = a.mode != "exact";
  json out;
  if (!a.tree.empty()) {
    if (!a.system.empty()) throw Error("--system applies to dyadic sets, not trees");
    const FiltrationTree tree = FiltrationTree::from_json(read_json_file(a.tree));
    const LeafSet set = LeafSet::parse(tree, a.set);
    const bool root = !a.exclude_root;
    if (want_exact) exact = chi_exact_martingale(tree, set, root);
    if (want_enum) enumerated = chi_enumeration(martingale_expansion(tree, set, root), a.workers);
    out["model"] = "martingale";
    out["include_root"] = root;
    out["pv"] = set.probability(tree).str();
    if (a.certificate) {
      const ProofCertificate c = proof_certificate(tree, set);
      out["certificate"] = certificate_json(c);
      if (!c.verified()) o.code = kExitVerificationFailed;
    }
  } else {
    if (a.certificate) throw Error("--certificate requires --tree");
    const DyadicSet set = DyadicSet::parse(a.set);
    const HaarSystem system = a.system.empty() ? complete_system(set.resolution()) : parse_system(a.system);
    if (want_exact) exact = wavelet_moment_coefficients(system, set).polynomial();
    if (want_enum) enumerated = chi_enumeration(haar_expansion(system, set), a.workers);
    const ExactScalar cube = projection_cube_integral(system, set);
    out["model"] = "wavelet";
    out["pv"] = set.measure().str();
    out["system_size"] = system.size();
    out["projection_cube"] = scalar_text(cube);
    out["completeness"] = poly_eval(want_exact ? exact : enumerated, Rational(1)) == cube;
  }
  const PolyP& shown = want_exact ? exact : enumerated;
  out["mode"] = a.mode;
  out["coeffs"] = poly_json(shown);
  if (want_exact && want_enum) {
    out["oracle_match"] = exact == enumerated;
    if (!(exact == enumerated)) o.code = kExitVerificationFailed;
  } else {
    out["oracle_match"] = nullptr;
  }
  for (int k = 0; k <= PolyP::kMaxDegree; ++k) o.results["c" + std::to_string(k)] = exact_result(shown[k]);
  o.results["pv"] = exact_result(ExactScalar(Rational::parse(out["pv"].get<std::string>())));
  o.output = out;
  return o;
}

// ---------------------------------------------------------------------------

struct EtaArgs {
  std::string objective;
  int resolution = 0;
  std::string mode = "exhaustive";
  std::uint64_t iters = 20000;
  std::uint64_t seed = 42;
  double t_start = 0.05;
  double t_end = 1e-4;
  unsigned workers = 1;
  std::string out;
};

Outcome do_eta(const EtaArgs& a, std::ostream& err) {
  const Objective objective = Objective::by_name(a.objective);
  SearchReport report;
  if (a.mode == "exhaustive") {
    report = exhaustive_search(objective, a.resolution, a.workers);
  } else {
    AnnealSchedule schedule{a.iters, a.t_start, a.t_end};
    report = anneal_search(objective, a.resolution, schedule, a.seed);
  }
  Outcome o;
  o.seed = report.seed;
  o.output = report.to_json();
  const Rational measure = objective.two_dimensional ? DyadicSet2D::parse(report.best_set).measure()
                                                     : DyadicSet::parse(report.best_set).measure();
  o.output["best_measure"] = measure.str();
  o.results["best_ratio"] = exact_result(report.best_value);
  o.results["measure"] = exact_result(ExactScalar(measure));
  o.results["visited"] = count_result(report.visited);
  if (report.complement_value) o.results["complement_ratio"] = exact_result(*report.complement_value);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw Error("cannot write " + a.out);
    f << o.output.dump(2) << '\n';
  }
  if (report.counterexample) {
    err << "COUNTEREXAMPLE: " << objective.name << " reached " << scalar_text(report.best_value) << " at "
        << report.best_set << "\n";
    o.code = kExitVerificationFailed;
  }
  if (!report.verified) {
    err << "best value failed exact re-certification\n";
    o.code = kExitVerificationFailed;
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome do_shift(const std::string& set_spec, int matrix) {
  Outcome o;
  if (matrix >= 0) {
    const ScalarMatrix m = shift_matrix(matrix);
    const bool antisym = m.transpose() == -m;
    const bool square = m * m == -ScalarMatrix::Identity(m.rows(), m.cols());
    o.output = {{"resolution", matrix}, {"dimension", m.rows()}, {"antisymmetric", antisym},
                {"square_minus_identity", square}};
    o.results["dimension"] = count_result(static_cast<std::uint64_t>(m.rows()));
    if (!antisym || !square) o.code = kExitVerificationFailed;
    return o;
  }
  const DyadicSet set = DyadicSet::parse(set_spec);
  const ShiftEnergy e = shift_energy(set);
  const ExactScalar measure(set.measure());
  o.output = {{"set", set.str()},       {"measure", set.measure().str()}, {"inside", exact_pair(e.inside)},
              {"total", exact_pair(e.total)}, {"pairing", exact_pair(e.pairing)},
              {"ratio", exact_pair(e.inside / measure)}};
  o.results["inside"] = exact_result(e.inside);
  o.results["total"] = exact_result(e.total);
  o.results["pairing"] = exact_result(e.pairing);
  o.results["measure"] = exact_result(measure);
  if (!e.pairing.is_zero()) o.code = kExitVerificationFailed;
  return o;
}

Outcome do_tensor(const std::string& set_spec) {
  Outcome o;
  const DyadicSet2D set = DyadicSet2D::parse(set_spec);
  const ShiftEnergy e = tensor_shift_energy(set);
  const ExactScalar measure(set.measure());
  const bool plancherel = rect_coefficients(set).sum_of_squares() == measure;
  const ExactScalar square = integrate_over(set, biparameter_square_function(set, true)) / measure;
  const ExactScalar pure = integrate_over(set, biparameter_square_function(set, false)) / measure;
  o.output = {{"set", set.str()},
              {"measure", set.measure().str()},
              {"inside", exact_pair(e.inside)},
              {"total", exact_pair(e.total)},
              {"pairing", exact_pair(e.pairing)},
              {"shift_ratio", exact_pair(e.inside / measure)},
              {"square_ratio", exact_pair(square)},
              {"square_ratio_pure", exact_pair(pure)},
              {"plancherel", plancherel}};
  bool ok = plancherel;
  if (set.resolution() <= 3) {
    const bool dense = tensor_shift_cells(set) == tensor_shift_dense_apply(set);
    o.output["dense_match"] = dense;
    ok = ok && dense;
  } else {
    o.output["dense_match"] = nullptr;
  }
  o.results["inside"] = exact_result(e.inside);
  o.results["total"] = exact_result(e.total);
  o.results["pairing"] = exact_result(e.pairing);
  o.results["square_ratio"] = exact_result(square);
  o.results["measure"] = exact_result(measure);
  if (!ok) o.code = kExitVerificationFailed;
  return o;
}

// ---------------------------------------------------------------------------

struct WaveletArgs {
  std::string filter = "haar";
  std::string set;
  std::string system;
  double p = 0.5;
  std::size_t trials = 10000;
  std::uint64_t seed = 42;
  int grid = -1;
  int levels = -1;
  unsigned workers = 1;
  bool fit = false;
};

Outcome do_wavelet(const WaveletArgs& a) {
  const WaveletFilter filter = WaveletFilter::by_name(a.filter);
  const DyadicSet set = DyadicSet::parse(a.set);
  MonteCarloConfig cfg;
  cfg.exponent = a.grid >= 0 ? a.grid : (filter.name == "haar" ? set.resolution() : std::max(set.resolution(), 10));
  cfg.levels = a.levels >= 0 ? a.levels : cfg.exponent;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  const HaarSystem system = a.system.empty() ? complete_system(set.resolution()) : parse_system(a.system);

  const MonteCarloEstimate m = chi_monte_carlo(set, filter, system, a.p, cfg);
  Outcome o;
  o.seed = a.seed;
  json out = {{"filter", filter.name},
              {"set", set.str()},
              {"p", a.p},
              {"estimate", m.estimate},
              {"stderr", m.stderr_},
              {"trials", m.trials},
              {"seed", m.seed},
              {"grid", cfg.exponent},
              {"levels", cfg.levels},
              {"generator", Philox4x32::kName},
              {"system_size", system.size()}};
  if (!set.empty()) out["local_ratio"] = smooth_local_ratio(set, filter, cfg.exponent, cfg.levels);
  o.results["estimate"] = float_result(m.estimate);
  o.results["stderr"] = float_result(m.stderr_);
  if (filter.name == "haar") {
    const ExactScalar exact = poly_eval(wavelet_moment_coefficients(system, set).polynomial(), Rational(mpq_class(a.p)));
    out["exact_chi"] = exact_pair(exact);
    out["within_4_stderr"] = std::abs(m.estimate - exact.to_double()) <= 4 * m.stderr_ ||
                             (m.stderr_ == 0 && std::abs(m.estimate - exact.to_double()) <= 1e-12);
    o.results["exact_chi"] = exact_result(exact);
  }
  if (a.fit) {
    const CubicFit fit = fit_chi_cubic(set, filter, system, cfg);
    json f = json::object();
    const char* names[] = {"w1", "w2", "w3"};
    for (std::size_t k = 0; k < 3; ++k) {
      f[names[k]] = {{"estimate", fit.coeffs[k]}, {"stderr", fit.stderrs[k]}};
      o.results[std::string("fit_") + names[k]] = float_result(fit.coeffs[k]);
    }
    out["fit"] = f;
  }
  o.output = out;
  return o;
}

// ---------------------------------------------------------------------------

int do_export(const std::string& ledger_path, const std::string& format, const std::string& output, std::ostream& out,
              std::ostream& err) {
  const LedgerContents contents = Ledger(ledger_path).read();
  for (const auto& m : contents.messages) err << "warning: " << m << "\n";
  const std::string text = format == "csv" ? export_csv(contents.records) : export_json(contents.records).dump(2) + "\n";
  const json summary = {{"ledger", ledger_path},
                        {"format", format},
                        {"records", contents.records.size()},
                        {"warnings", contents.warnings},
                        {"output", output.empty() ? json(nullptr) : json(output)}};
  if (output.empty()) {
    out << text;
    err << summary.dump() << "\n";
  } else {
    std::ofstream f(output);
    if (!f) throw Error("cannot write " + output);
    f << text;
    out << summary.dump(2) << "\n";
  }
  return kExitOk;
}

json collect_params(const CLI::App& sub) {
  json params = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_min() == 0) {
      params[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      params[name] = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      params[name] = opt->get_default_str();
    } else {
      params[name] = nullptr;
    }
  }
  return params;
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact verification and extremal search for dyadic square-function inequalities", "squarelab"};
  app.set_version_flag("--version", SQUARELAB_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string ledger_path = default_ledger_path();
  bool no_ledger = false;
  std::string config_file;
  app.add_option("--ledger", ledger_path, "JSON-lines ledger (default $SQUARELAB_LEDGER or ./runs.jsonl)");
  app.add_flag("--no-ledger", no_ledger, "Do not append a record");
  app.add_option("--config", config_file, "Flat key = value file; command-line flags win");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run invariant suites");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  verify->add_option("--suite", va.suite, "Suite name or all")->check(CLI::IsMember(suites))->capture_default_str();
  verify->add_option("--depth", va.depth, "Tree depth or resolution bound");
  verify->add_option("--trials", va.trials, "Random cases per check");
  verify->add_option("--seed", va.seed, "Seed")->capture_default_str();
  verify->add_option("--workers", va.workers, "Worker threads")->capture_default_str();

  ChiArgs ca;
  auto* chi = app.add_subcommand("chi", "Moment polynomial chi(p)");
  chi->add_option("--tree", ca.tree, "Filtration tree JSON file");
  chi->add_option("--set", ca.set, "Leaf set (with --tree) or dyadic set")->required();
  chi->add_option("--system", ca.system, "Haar system j:k,... (default: all levels below N)");
  chi->add_option("--mode", ca.mode, "exact, enum or both")
      ->check(CLI::IsMember({"exact", "enum", "enumeration", "both"}))
      ->capture_default_str();
  chi->add_flag("--exclude-root", ca.exclude_root, "Drop d_0 from the martingale expansion");
  chi->add_flag("--certificate", ca.certificate, "Report the closing-argument certificate");
  chi->add_option("--workers", ca.workers, "Enumeration workers")->capture_default_str();

  EtaArgs ea;
  auto* eta = app.add_subcommand("eta", "Extremal set search");
  std::vector<std::string> objectives;
  for (const auto& obj : Objective::all()) objectives.push_back(obj.name);
  eta->add_option("--objective", ea.objective, "Objective")->required()->check(CLI::IsMember(objectives));
  eta->add_option("--resolution", ea.resolution, "Resolution N")->required()->check(CLI::Range(0, 24));
  eta->add_option("--mode", ea.mode, "exhaustive or anneal")
      ->check(CLI::IsMember({"exhaustive", "anneal"}))
      ->capture_default_str();
  eta->add_option("--iters", ea.iters, "Annealing iterations")->capture_default_str();
  eta->add_option("--seed", ea.seed, "Annealing seed")->capture_default_str();
  eta->add_option("--t-start", ea.t_start, "Initial temperature")->capture_default_str();
  eta->add_option("--t-end", ea.t_end, "Final temperature")->capture_default_str();
  eta->add_option("--workers", ea.workers, "Exhaustive workers")->capture_default_str();
  eta->add_option("--out", ea.out, "Also write the report to this file");

  std::string shift_set;
  int shift_matrix_n = -1;
  auto* shift = app.add_subcommand("shift", "Haar shift energies");
  auto* shift_set_opt = shift->add_option("--set", shift_set, "Dyadic set N=..;mask=..");
  shift->add_option("--matrix", shift_matrix_n, "Check the shift matrix at resolution N")
      ->check(CLI::Range(1, 10))
      ->excludes(shift_set_opt);

  std::string tensor_set;
  auto* tensor = app.add_subcommand("tensor", "Tensor shift and biparameter square function");
  tensor->add_option("--set", tensor_set, "Grid set N=..;mask2d=..")->required();

  WaveletArgs wa;
  auto* wavelet = app.add_subcommand("wavelet", "Monte Carlo chi(p) for smooth filters");
  wavelet->add_option("--filter", wa.filter, "haar, db4 or db6")
      ->check(CLI::IsMember({"haar", "db4", "db6"}))
      ->capture_default_str();
  wavelet->add_option("--set", wa.set, "Dyadic set")->required();
  wavelet->add_option("--system", wa.system, "Intervals j:k,... (default: all levels below N)");
  wavelet->add_option("--p", wa.p, "Bernoulli parameter")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  wavelet->add_option("--trials", wa.trials, "Trials (>= 100)")->capture_default_str();
  wavelet->add_option("--seed", wa.seed, "Seed")->capture_default_str();
  wavelet->add_option("--grid", wa.grid, "Grid exponent g");
  wavelet->add_option("--levels", wa.levels, "Transform depth (default g)");
  wavelet->add_option("--workers", wa.workers, "Worker threads")->capture_default_str();
  wavelet->add_flag("--fit", wa.fit, "Fit a cubic at p = 1/4, 1/2, 3/4");

  std::string export_format = "csv";
  std::string export_output;
  auto* exp = app.add_subcommand("export", "Export the ledger");
  exp->add_option("--format", export_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  exp->add_option("--output", export_output, "Output file (default stdout)");

  std::vector<std::string> args = raw_args;
  try {
    if (const auto path = config_path(raw_args)) args = merge_config(raw_args, read_config(*path), kFlags);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<std::string> argv_storage{"squarelab"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == exp) return do_export(ledger_path, export_format, export_output, out, err);

    Outcome o;
    if (sub == verify) o = do_verify(va, err);
    else if (sub == chi) o = do_chi(ca);
    else if (sub == eta) o = do_eta(ea, err);
    else if (sub == shift) {
      if (shift_set.empty() && shift_matrix_n < 0) throw CLI::RequiredError("--set or --matrix");
      o = do_shift(shift_set, shift_matrix_n);
    } else if (sub == tensor) o = do_tensor(tensor_set);
    else if (sub == wavelet) o = do_wavelet(wa);

    out << o.output.dump(2) << "\n";
    if (!no_ledger) {
      ExperimentRecord record;
      record.id = new_uuid();
      record.timestamp = utc_timestamp();
      record.subcommand = sub->get_name();
      record.params = collect_params(*sub);
      record.seed = o.seed;
      record.results = o.results;
      record.output = o.output;
      record.version = SQUARELAB_VERSION;
      Ledger(ledger_path).append(record);
    }
    return o.code;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::logic_error& e) {
    err << "internal check failed: " << e.what() << "\n";
    return kExitVerificationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace squarelab::cli
