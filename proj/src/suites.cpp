#include "squarelab/suites.hpp"

#include "squarelab/moments.hpp"
#include "squarelab/search.hpp"
#include "squarelab/wavelet_grid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace squarelab {
namespace {

Rational frac(long n, long d) { return Rational(mpz_class(n), mpz_class(d)); }

const std::array<Rational, 3>& sample_ps() {
  static const std::array<Rational, 3> ps = {frac(1, 4), frac(1, 2), frac(3, 4)};
  return ps;
}

bool all_zero(const ScalarVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!v[i].is_zero()) return false;
  return true;
}

TreeNode random_node(Philox4x32& rng, const Rational& mass, int remaining, bool root) {
  TreeNode node{mass, {}, std::nullopt};
  if (remaining == 0 || (!root && rng.below(4) == 0)) return node;
  const auto k = static_cast<long>(1 + rng.below(3));
  const long q = std::max(k, static_cast<long>(2 + rng.below(15)));
  std::vector<long> parts(static_cast<std::size_t>(k), 1);
  for (long extra = q - k; extra > 0; --extra) ++parts[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)))];
  for (long part : parts) node.children.push_back(random_node(rng, mass * frac(part, q), remaining - 1, false));
  return node;
}

std::string tree_label(std::size_t index) { return "case " + std::to_string(index); }

using Clock = std::chrono::steady_clock;

SuiteResult martingale_suite(const SuiteOptions& o) {
  const int depth = o.depth.value_or(5);
  const std::size_t trials = o.trials.value_or(200);
  Philox4x32 rng(o.seed, 1);
  SuiteResult r;
  SuiteCheck oracle{"oracle_match"}, oracle_excluded{"oracle_match_root_excluded"}, complete{"completeness"},
      at_zero{"chi_at_zero"}, variance{"variance_identity"}, plancherel{"plancherel"}, orth{"orthogonality"},
      mart{"martingale_property"}, cert{"certificate"}, symmetric{"symmetric_third_moments"};
  std::size_t max_terms = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const FiltrationTree tree = random_tree(rng, depth);
    const LeafSet set = random_leaf_set(rng, tree);
    const std::string label = tree_label(t) + " (" + tree.to_json().dump() + ")";
    const Rational pv = set.probability(tree);

    const PolyP exact = chi_exact_martingale(tree, set, true);
    const Expansion expansion = martingale_expansion(tree, set, true);
    max_terms = std::max(max_terms, expansion.terms.size());
    oracle.record(exact == chi_enumeration(expansion, o.workers), label);
    oracle_excluded.record(
        chi_exact_martingale(tree, set, false) == chi_enumeration(martingale_expansion(tree, set, false), o.workers),
        label);
    complete.record(poly_eval(exact, Rational(1)) == ExactScalar(pv), label);
    at_zero.record(exact[0].is_zero(), label);

    const ScalarVector ind = indicator(tree, set).values;
    bool ok = true;
    for (const auto& p : sample_ps()) ok = ok && all_zero(variance_identity_check(expansion, ind, p));
    variance.record(ok, label);

    const auto d = differences(tree, set, true);
    ExactScalar energy(0);
    bool orthogonal = true, martingale = true;
    for (std::size_t m = 0; m < d.size(); ++m) {
      energy += expectation(tree, {d[m].values.cwiseProduct(d[m].values), std::nullopt});
      for (std::size_t n = m + 1; n < d.size(); ++n)
        orthogonal = orthogonal && expectation(tree, {d[m].values.cwiseProduct(d[n].values), std::nullopt}).is_zero();
      if (m > 0)
        martingale = martingale && all_zero(conditional_expectation(tree, d[m], static_cast<int>(m) - 1).values);
    }
    plancherel.record(energy == ExactScalar(pv), label);
    orth.record(orthogonal, label);
    mart.record(martingale, label);
    cert.record(proof_certificate(tree, set).verified(), label);
  }
  // Equal-split trees have conditionally symmetric differences.
  for (int n = 1; n <= std::min(depth, 5); ++n) {
    const FiltrationTree tree = FiltrationTree::equal_split(n);
    for (int rep = 0; rep < 4; ++rep) {
      const LeafSet set = random_leaf_set(rng, tree);
      const auto d = differences(tree, set, true);
      bool ok = true;
      for (std::size_t m = 1; m < d.size(); ++m)
        ok = ok && expectation(tree, {d[m].values.cwiseProduct(d[m].values).cwiseProduct(d[m].values), std::nullopt})
                       .is_zero();
      symmetric.record(ok, "equal split depth " + std::to_string(n));
    }
  }
  r.checks = {oracle, oracle_excluded, complete, at_zero, variance, plancherel, orth, mart, cert, symmetric};
  r.details["oracle_match"] = oracle.passed() && oracle_excluded.passed();
  r.details["trees"] = trials;
  r.details["max_depth"] = depth;
  r.details["max_bernoulli_terms"] = max_terms;
  return r;
}

SuiteResult wavelet_suite(const SuiteOptions& o) {
  const int max_resolution = std::max(2, o.depth.value_or(5));
  const std::size_t trials = o.trials.value_or(100);
  Philox4x32 rng(o.seed, 2);
  SuiteResult r;
  SuiteCheck oracle{"oracle_match"}, w1{"w1_zero"}, complete{"completeness"}, variance{"variance_identity"},
      variance_full{"variance_identity_complete"}, third{"bernoulli_third_moment"};
  std::size_t largest = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_resolution - 1)));
    const HaarSystem system = random_system(rng, n, 14);
    const DyadicSet set = random_dyadic_set(rng, n);
    largest = std::max(largest, system.size());
    std::string label = set.str() + " system";
    for (const auto& i : system) label += " " + i.str();

    const MomentCoefficients w = wavelet_moment_coefficients(system, set);
    const Expansion expansion = haar_expansion(system, set);
    oracle.record(w.polynomial() == chi_enumeration(expansion, o.workers), label);
    w1.record(w.linear.is_zero(), label);
    complete.record(w.linear + w.quadratic + w.cubic == projection_cube_integral(system, set), label);

    bool ok = true;
    const ScalarVector target = expansion.sum();
    for (const auto& p : sample_ps()) ok = ok && all_zero(variance_identity_check(expansion, target, p));
    variance.record(ok, label);

    const FiltrationTree tree = FiltrationTree::equal_split(n);
    const LeafSet leaves(set.cells());
    const Expansion full = martingale_expansion(tree, leaves, true);
    ok = true;
    for (const auto& p : sample_ps()) ok = ok && all_zero(variance_identity_check(full, indicator(tree, leaves).values, p));
    variance_full.record(ok, label);
  }
  for (long num = 0; num <= 16; ++num) {
    const Rational p = frac(num, 16);
    const ExactScalar m3 = bernoulli_third_moment(p);
    third.record(m3 == -bernoulli_third_moment(Rational(1) - p) && (num != 8 || m3.is_zero()),
                 "p = " + p.str());
  }
  r.checks = {oracle, w1, complete, variance, variance_full, third};
  r.details["oracle_match"] = oracle.passed();
  r.details["systems"] = trials;
  r.details["largest_system"] = largest;
  return r;
}

SuiteResult certificate_suite(const SuiteOptions& o) {
  const int depth = o.depth.value_or(3);
  SuiteResult r;
  SuiteCheck verified{"certificate_verified"}, singular{"system_rank_two"}, bound{"residual_bound"};
  nlohmann::json minima = nlohmann::json::array();
  for (int n = 1; n <= depth; ++n) {
    const FiltrationTree tree = FiltrationTree::equal_split(n);
    const std::size_t leaves = tree.leaf_count();
    std::optional<ExactScalar> best;
    std::uint64_t best_mask = 0;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << leaves); ++mask) {
      std::vector<bool> members(leaves);
      for (std::size_t i = 0; i < leaves; ++i) members[i] = ((mask >> i) & 1) != 0;
      const ProofCertificate c = proof_certificate(tree, LeafSet(members));
      const std::string label = "depth " + std::to_string(n) + " mask " + std::to_string(mask);
      verified.record(c.verified(), label);
      singular.record(c.rank == 2 && c.determinant.is_zero() && !c.pv_recoverable, label);
      bound.record(c.residual_scale >= ExactScalar(1), label);
      if (!best || c.residual_scale < *best) {
        best = c.residual_scale;
        best_mask = mask;
      }
    }
    minima.push_back({{"depth", n}, {"min_residual_scale", best->compact()}, {"float", best->to_double()}, {"mask", best_mask}});
  }
  const FiltrationTree two = FiltrationTree::equal_split(1);
  const LeafSet first = LeafSet::parse(two, "leaves=0");
  const ProofCertificate example = proof_certificate(two, first);
  nlohmann::json dependency = nlohmann::json::array();
  for (const auto& x : example.dependency) dependency.push_back(x.compact());
  nlohmann::json remark = nlohmann::json::array();
  for (bool root : {true, false}) {
    const auto s = symmetric_remark_check(two, first, root);
    remark.push_back({{"include_root", root}, {"m1", s.m1.compact()}, {"m2", s.m2.compact()},
                      {"three_energy", s.three_energy.compact()}, {"holds", s.holds()}});
  }
  r.checks = {verified, singular, bound};
  r.details["residual_scale_minima"] = minima;
  r.details["dependency"] = dependency;
  r.details["remark"] = remark;
  return r;
}

SuiteResult shift_suite(const SuiteOptions& o) {
  const int max_n = o.depth.value_or(8);
  const std::size_t trials = o.trials.value_or(1000);
  Philox4x32 rng(o.seed, 3);
  SuiteResult r;
  SuiteCheck antisym{"antisymmetry"}, square{"square_minus_identity"}, pairing{"pairing_zero"},
      interval{"interval_inside_zero"}, conserve{"energy_conservation"}, twice{"apply_twice_negates"};
  for (int n = 1; n <= max_n; ++n) {
    const ScalarMatrix m = shift_matrix(n);
    const std::string label = "N=" + std::to_string(n);
    antisym.record(m.transpose() == -m, label);
    const ScalarMatrix m2 = m * m;
    square.record(m2 == -ScalarMatrix::Identity(m.rows(), m.cols()), label);
  }
  for (std::size_t t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(rng.below(10));
    const DyadicSet set = random_dyadic_set(rng, n);
    pairing.record(shift_energy(set).pairing.is_zero(), set.str());
  }
  for (int n = 1; n <= std::min(max_n, 8); ++n)
    for (std::uint64_t h = 1; h < (std::uint64_t{1} << n); ++h) {
      const DyadicInterval i = DyadicInterval::from_heap(h);
      interval.record(shift_energy(DyadicSet::from_interval(n, i)).inside.is_zero(), "N=" + std::to_string(n) + " " + i.str());
    }
  for (std::size_t t = 0; t < std::min<std::size_t>(trials, 200); ++t) {
    const int n = 2 + static_cast<int>(rng.below(7));
    ScalarVector c = ScalarVector::Zero(Eigen::Index{1} << n);
    for (Eigen::Index k = 2; k < c.size(); ++k) {
      const long num = static_cast<long>(rng.below(33)) - 16;
      c[k] = (rng.below(2) == 0) ? ExactScalar(frac(num, 8)) : ExactScalar(Rational(0), frac(num, 8));
    }
    const CoefficientMap map(n, c);
    const CoefficientMap image = haar_shift_apply(map);
    const std::string label = "random paired coefficients N=" + std::to_string(n);
    conserve.record(image.sum_of_squares() == map.sum_of_squares(), label);
    twice.record(haar_shift_apply(image).heap() == -c, label);
  }
  r.checks = {antisym, square, pairing, interval, conserve, twice};
  return r;
}

SuiteResult plancherel_suite(const SuiteOptions& o) {
  const std::size_t trials = o.trials.value_or(48);
  Philox4x32 rng(o.seed, 4);
  SuiteResult r;
  SuiteCheck one{"plancherel_1d"}, two{"plancherel_2d"}, cross{"cross_module_square_function"},
      direct{"coefficients_direct"};
  for (std::size_t t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(t % 12);
    const DyadicSet set = random_dyadic_set(rng, n);
    one.record(haar_coefficients(set).sum_of_squares() == ExactScalar(set.measure()), set.str());

    const int n2 = 1 + static_cast<int>(t % 5);
    const DyadicSet2D u = random_dyadic_set_2d(rng, n2);
    two.record(rect_coefficients(u).sum_of_squares() == ExactScalar(u.measure()), u.str());

    const int n3 = 1 + static_cast<int>(t % 8);
    const DyadicSet v = random_dyadic_set(rng, n3);
    const FiltrationTree tree = FiltrationTree::equal_split(n3);
    cross.record(dyadic_square_function(v, true).values == square_function(tree, LeafSet(v.cells()), true).values,
                 v.str());

    const int n4 = 1 + static_cast<int>(t % 6);
    const DyadicSet w = random_dyadic_set(rng, n4);
    const CoefficientMap coeffs = haar_coefficients(w);
    bool ok = coeffs.mean() == ExactScalar(w.measure());
    for (const auto& i : complete_system(n4)) ok = ok && coeffs.at(i) == haar_coefficient(w, i);
    direct.record(ok, w.str());
  }
  r.checks = {one, two, cross, direct};
  return r;
}

SuiteResult tensor_suite(const SuiteOptions& o) {
  const int max_n = std::min(3, o.depth.value_or(3));
  const std::size_t trials = o.trials.value_or(30);
  Philox4x32 rng(o.seed, 5);
  SuiteResult r;
  SuiteCheck sym{"matrix_symmetric"}, inv{"matrix_involution"}, dense{"dense_oracle"}, direct{"rect_direct"},
      sep{"separability"}, rect{"rectangle_inside_zero"}, planch{"plancherel"}, pullback{"pullback_square_function"};
  for (int n = 1; n <= max_n; ++n) {
    const ScalarMatrix m = tensor_shift_matrix(n);
    sym.record(m == m.transpose(), "N=" + std::to_string(n));
    inv.record(m * m == ScalarMatrix::Identity(m.rows(), m.cols()), "N=" + std::to_string(n));
  }
  std::size_t nonzero_pairings = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(t % static_cast<std::size_t>(max_n));
    const DyadicSet2D u = random_dyadic_set_2d(rng, n);
    dense.record(tensor_shift_cells(u) == tensor_shift_dense_apply(u), u.str());
    const RectCoefficientMap coeffs = rect_coefficients(u);
    bool ok = true;
    for (const auto& a : complete_system(n))
      for (const auto& b : complete_system(n)) ok = ok && coeffs.at(a, b) == rect_coefficient(u, a, b);
    direct.record(ok, u.str());
    planch.record(coeffs.sum_of_squares() == ExactScalar(u.measure()), u.str());
    if (!tensor_shift_energy(u).pairing.is_zero()) ++nonzero_pairings;

    const DyadicSet v1 = random_dyadic_set(rng, n);
    const DyadicSet v2 = random_dyadic_set(rng, n);
    const DyadicSet2D product = DyadicSet2D::product(v1, v2);
    const RectCoefficientMap pc = rect_coefficients(product);
    const ScalarVector c1 = haar_coefficients(v1).heap();
    const ScalarVector c2 = haar_coefficients(v2).heap();
    const ShiftEnergy e = tensor_shift_energy(product);
    const ShiftEnergy e1 = shift_energy(v1);
    const ShiftEnergy e2 = shift_energy(v2);
    sep.record(pc.heap() == c1 * c2.transpose() && e.inside == e1.inside * e2.inside &&
                   e.total == e1.total * e2.total && e.pairing.is_zero(),
               product.str());

    const DyadicSet2D strip = DyadicSet2D::product(v1, DyadicSet::from_interval(n, {0, 0}));
    const Grid<ExactScalar> s2 = biparameter_square_function(strip, true);
    const ScalarVector s1 = dyadic_square_function(v1, true).values;
    ok = true;
    for (Eigen::Index i1 = 0; i1 < s2.rows(); ++i1)
      for (Eigen::Index i2 = 0; i2 < s2.cols(); ++i2) ok = ok && s2(i1, i2) == s1[i1];
    pullback.record(ok, strip.str());

    const DyadicInterval i1 = DyadicInterval::from_heap(1 + rng.below((std::uint64_t{1} << n) - 1));
    const DyadicInterval i2 = DyadicInterval::from_heap(1 + rng.below((std::uint64_t{1} << n) - 1));
    const DyadicSet2D r12 = DyadicSet2D::product(DyadicSet::from_interval(n, i1), DyadicSet::from_interval(n, i2));
    rect.record(tensor_shift_energy(r12).inside.is_zero(), r12.str());
  }
  r.checks = {sym, inv, dense, direct, sep, rect, planch, pullback};
  r.details["nonzero_pairings"] = nonzero_pairings;
  r.details["sets"] = trials;
  return r;
}

SuiteResult grid_suite(const SuiteOptions& o) {
  const std::size_t trials = o.trials.value_or(10000);
  Philox4x32 rng(o.seed, 6);
  SuiteResult r;
  SuiteCheck recon{"reconstruction"}, parseval{"parseval"}, constant{"constant_signal_details"},
      haar_exact{"haar_matches_exact"}, haar_square{"haar_square_function"}, square_parseval{"square_function_parseval"},
      refine{"refinement_stability"}, mc{"monte_carlo"}, fit_w1{"haar_fit_w1"}, degenerate{"degenerate_p"},
      workers{"worker_determinism"}, ortho{"filter_orthonormality"};
  nlohmann::json ratios = nlohmann::json::object();

  for (const auto& filter : {WaveletFilter::haar(), WaveletFilter::db4(), WaveletFilter::db6()}) {
    double sum = 0, sum_sq = 0;
    for (double h : filter.lowpass) {
      sum += h;
      sum_sq += h * h;
    }
    ortho.record(std::abs(sum - M_SQRT2) <= 1e-12 && std::abs(sum_sq - 1) <= 1e-12, filter.name);
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> s(1024);
      for (double& x : s) x = rng.uniform() * 2 - 1;
      const GridSignal signal(s);
      for (int levels : {1, 5, 10}) {
        const auto c = dwt_forward(signal, filter, levels);
        const GridSignal back = dwt_inverse(c, filter, levels);
        double err = 0, energy = 0;
        for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, std::abs(back[i] - s[i]));
        for (double x : c) energy += x * x;
        const std::string label = filter.name + " levels " + std::to_string(levels);
        recon.record(err <= 1e-10, label);
        parseval.record(std::abs(energy - signal.energy()) <= 1e-10, label);
      }
    }
    const auto c = dwt_forward(GridSignal(std::vector<double>(256, 0.75)), filter, 8);
    double worst = 0;
    for (std::size_t i = 1; i < c.size(); ++i) worst = std::max(worst, std::abs(c[i]));
    constant.record(worst <= 1e-12, filter.name);

    const DyadicSet v = random_dyadic_set(rng, 5);
    const int g = 9;
    const GridSignal s = smooth_square_function(v, filter, g, g, false);
    const auto coeffs = dwt_forward(GridSignal::indicator(v, g), filter, g);
    double integral = 0, detail = 0;
    for (std::size_t i = 0; i < s.size(); ++i) integral += s[i];
    integral /= static_cast<double>(s.size());
    for (std::size_t i = 1; i < coeffs.size(); ++i) detail += coeffs[i] * coeffs[i];
    bool nonnegative = true;
    for (std::size_t i = 0; i < s.size(); ++i) nonnegative = nonnegative && s[i] >= 0;
    square_parseval.record(std::abs(integral - detail) <= 1e-9 && nonnegative, filter.name);
  }

  for (int n = 1; n <= 8; ++n) {
    const DyadicSet v = random_dyadic_set(rng, n);
    const auto c = dwt_forward(GridSignal::indicator(v, n), WaveletFilter::haar(), n);
    const ScalarVector exact = haar_coefficients(v).heap();
    double err = 0;
    for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, std::abs(c[i] - exact[static_cast<Eigen::Index>(i)].to_double()));
    haar_exact.record(err <= 1e-12, v.str());
    for (bool mean : {true, false}) {
      const GridSignal s = smooth_square_function(v, WaveletFilter::haar(), n, n, mean);
      const ScalarVector e = dyadic_square_function(v, mean).values;
      double serr = 0;
      for (std::size_t i = 0; i < s.size(); ++i) serr = std::max(serr, std::abs(s[i] - e[static_cast<Eigen::Index>(i)].to_double()));
      haar_square.record(serr <= 1e-10, v.str() + (mean ? " with mean" : " without mean"));
    }
  }

  const DyadicSet half = DyadicSet::parse("N=1;cells=0");
  for (const auto& filter : {WaveletFilter::db4(), WaveletFilter::db6()}) {
    const double a = smooth_local_ratio(half, filter, 12, 12);
    const double b = smooth_local_ratio(half, filter, 13, 13);
    refine.record(std::abs(a - b) <= 5e-4 * std::abs(a), filter.name);
    ratios[filter.name] = {{"g12", a}, {"g13", b}};
  }

  nlohmann::json estimates = nlohmann::json::array();
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 3 + static_cast<int>(rng.below(3));
    const HaarSystem system = random_system(rng, n, 12);
    const DyadicSet v = random_dyadic_set(rng, n);
    const PolyP exact = wavelet_moment_coefficients(system, v).polynomial();
    MonteCarloConfig cfg;
    cfg.exponent = n;
    cfg.levels = n;
    cfg.trials = trials;
    cfg.seed = o.seed + static_cast<std::uint64_t>(rep);
    for (const auto& p : sample_ps()) {
      const double pf = p.to_double();
      const MonteCarloEstimate m = chi_monte_carlo(v, WaveletFilter::haar(), system, pf, cfg);
      const double truth = poly_eval(exact, p).to_double();
      mc.record(std::abs(m.estimate - truth) <= 4 * m.stderr_ || (m.stderr_ == 0 && std::abs(m.estimate - truth) <= 1e-12),
                v.str() + " p=" + p.str());
      estimates.push_back({{"set", v.str()}, {"p", pf}, {"estimate", m.estimate}, {"stderr", m.stderr_}, {"exact", truth}});
    }
    const CubicFit fit = fit_chi_cubic(v, WaveletFilter::haar(), system, cfg);
    fit_w1.record(std::abs(fit.coeffs[0]) <= 4 * fit.stderrs[0] + 1e-12, v.str());

    const MonteCarloEstimate zero = chi_monte_carlo(v, WaveletFilter::haar(), system, 0.0, cfg);
    const MonteCarloEstimate one = chi_monte_carlo(v, WaveletFilter::haar(), system, 1.0, cfg);
    const double cube = projection_cube_integral(system, v).to_double();
    degenerate.record(zero.estimate == 0.0 && zero.stderr_ == 0.0 && std::abs(one.estimate - cube) <= 1e-10, v.str());

    MonteCarloConfig parallel = cfg;
    parallel.workers = 3;
    workers.record(chi_monte_carlo(v, WaveletFilter::haar(), system, 0.5, parallel).estimate ==
                       chi_monte_carlo(v, WaveletFilter::haar(), system, 0.5, cfg).estimate,
                   v.str());
  }
  r.checks = {ortho, recon, parseval, constant, haar_exact, haar_square, square_parseval, refine, mc, fit_w1,
              degenerate, workers};
  r.details["local_ratio_half_interval"] = ratios;
  r.details["monte_carlo"] = estimates;
  r.details["generator"] = Philox4x32::kName;
  return r;
}

SuiteResult search_suite(const SuiteOptions& o) {
  const int max_n = std::min(4, o.depth.value_or(4));
  SuiteResult r;
  SuiteCheck positive{"mart_eta_positive"}, n1{"n1_optimum"}, n2{"n2_witness"}, monotone{"non_increasing"},
      verified{"reports_verified"}, interval{"interval_shift_zero"}, anneal{"anneal_not_better"},
      deterministic{"anneal_deterministic"}, dilation{"dilation_covariance"};
  const Objective mart = Objective::by_name("mart-eta");
  const Objective shift = Objective::by_name("shift-ratio");
  nlohmann::json optima = nlohmann::json::array();
  std::optional<ExactScalar> previous;
  for (int n = 1; n <= max_n; ++n) {
    const SearchReport report = exhaustive_search(mart, n, o.workers);
    const std::string label = "N=" + std::to_string(n);
    positive.record(report.best_value.sign() > 0 && !report.counterexample, label);
    verified.record(report.verified, label);
    if (previous) monotone.record(report.best_value <= *previous, label);
    previous = report.best_value;
    if (n == 1) n1.record(report.best_value == ExactScalar(frac(1, 2)), label);
    if (n == 2) {
      const ExactScalar witness = mart.evaluate(2, DyadicSet::parse("N=2;cells=0").cells());
      n2.record(witness == ExactScalar(frac(3, 8)) && report.best_value <= witness, label);
    }
    optima.push_back({{"resolution", n}, {"best_ratio", report.best_value.compact()}, {"mask", report.best_mask},
                      {"float", report.best_float}});

    for (std::uint64_t h = 1; h < (std::uint64_t{1} << n); ++h) {
      const auto set = DyadicSet::from_interval(n, DyadicInterval::from_heap(h));
      interval.record(shift.evaluate(n, set.cells()).is_zero(), label + " " + DyadicInterval::from_heap(h).str());
    }

    AnnealSchedule schedule;
    schedule.iters = 2000;
    for (const auto& objective : {mart, shift}) {
      const SearchReport exhaustive = objective.name == "mart-eta" ? report : exhaustive_search(objective, n, o.workers);
      const SearchReport a = anneal_search(objective, n, schedule, 42);
      anneal.record(!objective.better(a.best_value, exhaustive.best_value) && a.verified, objective.name + " " + label);
      deterministic.record(a.to_json() == anneal_search(objective, n, schedule, 42).to_json(), objective.name + " " + label);
    }
  }
  if (max_n >= 2) {
    // A set inside [0,1/2) seen from the left half of the dyadic tree.
    Philox4x32 rng(o.seed, 7);
    for (int n = 2; n <= 6; ++n)
      for (int rep = 0; rep < 5; ++rep) {
        const DyadicSet small = random_dyadic_set(rng, n - 1);
        std::vector<bool> cells(std::size_t{1} << n, false);
        for (std::size_t i = 0; i < small.cell_count(); ++i) cells[i] = small.contains(i);
        const FiltrationTree tree = FiltrationTree::equal_split(n).restrict_to(1, 0);
        const LeafSet restricted(small.cells());
        dilation.record(local_energy(tree, restricted, true).ratio == mart.evaluate(n - 1, small.cells()),
                        small.str());
      }
  }
  r.checks = {positive, n1, n2, monotone, verified, interval, anneal, deterministic, dilation};
  r.details["mart_eta_optima"] = optima;
  return r;
}

}  // namespace

void SuiteCheck::record(bool ok, const std::string& what) {
  ++cases;
  if (!ok) {
    if (failures == 0) first_failure = what;
    ++failures;
  }
}

bool SuiteResult::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.passed(); });
}

const SuiteCheck* SuiteResult::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json SuiteResult::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj{{"name", c.name}, {"cases", c.cases}, {"failures", c.failures}};
    if (c.failures > 0) cj["first_failure"] = c.first_failure;
    j["checks"].push_back(cj);
  }
  j["details"] = details;
  return j;
}

std::vector<std::string> suite_names() {
  return {"martingale", "wavelet", "certificate", "shift", "plancherel", "tensor", "grid", "search"};
}

SuiteResult run_suite(std::string_view name, const SuiteOptions& options) {
  const auto start = Clock::now();
  SuiteResult r;
  if (name == "martingale") r = martingale_suite(options);
  else if (name == "wavelet") r = wavelet_suite(options);
  else if (name == "certificate") r = certificate_suite(options);
  else if (name == "shift") r = shift_suite(options);
  else if (name == "plancherel") r = plancherel_suite(options);
  else if (name == "tensor") r = tensor_suite(options);
  else if (name == "grid") r = grid_suite(options);
  else if (name == "search") r = search_suite(options);
  else throw Error("unknown suite: " + std::string(name));
  r.suite = std::string(name);
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

FiltrationTree random_tree(Philox4x32& rng, int max_depth) {
  if (max_depth < 0) throw Error("depth must be non-negative");
  return FiltrationTree::build(random_node(rng, Rational(1), max_depth, true));
}

LeafSet random_leaf_set(Philox4x32& rng, const FiltrationTree& tree) {
  std::vector<bool> members(tree.leaf_count());
  bool any = false;
  for (std::size_t i = 0; i < members.size(); ++i) {
    members[i] = (rng.next_u32() & 1) != 0;
    any = any || members[i];
  }
  if (!any) members[static_cast<std::size_t>(rng.below(members.size()))] = true;
  return LeafSet(std::move(members));
}

DyadicSet random_dyadic_set(Philox4x32& rng, int resolution) {
  std::vector<bool> cells(std::size_t{1} << resolution);
  bool any = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i] = (rng.next_u32() & 1) != 0;
    any = any || cells[i];
  }
  if (!any) cells[static_cast<std::size_t>(rng.below(cells.size()))] = true;
  return DyadicSet(resolution, std::move(cells));
}

DyadicSet2D random_dyadic_set_2d(Philox4x32& rng, int resolution) {
  std::vector<bool> cells(std::size_t{1} << (2 * resolution));
  bool any = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i] = (rng.next_u32() & 1) != 0;
    any = any || cells[i];
  }
  if (!any) cells[static_cast<std::size_t>(rng.below(cells.size()))] = true;
  return DyadicSet2D(resolution, std::move(cells));
}

HaarSystem random_system(Philox4x32& rng, int resolution, std::size_t max_size) {
  const std::uint64_t available = (std::uint64_t{1} << resolution) - 1;
  if (available == 0 || max_size == 0) throw Error("empty system requested");
  const auto size = static_cast<std::size_t>(1 + rng.below(std::min<std::uint64_t>(max_size, available)));
  std::vector<std::uint64_t> heaps(available);
  std::iota(heaps.begin(), heaps.end(), std::uint64_t{1});
  for (std::size_t i = 0; i < size; ++i) std::swap(heaps[i], heaps[i + static_cast<std::size_t>(rng.below(available - i))]);
  HaarSystem out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(DyadicInterval::from_heap(heaps[i]));
  return out;
}

}  // namespace squarelab
