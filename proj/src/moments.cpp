#include "squarelab/moments.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <thread>

namespace squarelab {
namespace {

ExactScalar cube(const ExactScalar& x) { return x * x * x; }

// Per-popcount sums of ∫ phi_S^3 over configurations S, for configurations
// with Gray-code rank in [begin, end).
std::vector<ExactScalar> cube_sums_by_popcount(const Expansion& e,
                                               const std::vector<std::vector<Eigen::Index>>& support,
                                               std::uint64_t begin, std::uint64_t end) {
  const std::size_t k_terms = e.terms.size();
  const auto n = static_cast<Eigen::Index>(e.cell_count());
  std::vector<ExactScalar> totals(k_terms + 1, ExactScalar(0));
  if (begin >= end) return totals;

  std::vector<ExactScalar> weights(e.weights.begin(), e.weights.end());
  std::uint64_t state = begin ^ (begin >> 1);
  ScalarVector phi = ScalarVector::Zero(n);
  for (std::size_t k = 0; k < k_terms; ++k)
    if ((state >> k) & 1) phi += e.terms[k];
  ExactScalar cube_sum(0);
  for (Eigen::Index c = 0; c < n; ++c)
    if (!phi[c].is_zero()) cube_sum += weights[static_cast<std::size_t>(c)] * cube(phi[c]);
  totals[static_cast<std::size_t>(std::popcount(state))] += cube_sum;

  for (std::uint64_t i = begin + 1; i < end; ++i) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(i));
    const bool adding = ((state >> bit) & 1) == 0;
    state ^= std::uint64_t{1} << bit;
    const ScalarVector& term = e.terms[bit];
    for (const Eigen::Index c : support[bit]) {
      const ExactScalar& w = weights[static_cast<std::size_t>(c)];
      cube_sum -= w * cube(phi[c]);
      if (adding) phi[c] += term[c];
      else phi[c] -= term[c];
      cube_sum += w * cube(phi[c]);
    }
    totals[static_cast<std::size_t>(std::popcount(state))] += cube_sum;
  }
  return totals;
}

mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

// p^k (1-p)^{K-k} as coefficients of 1, p, ..., p^K.
std::vector<Rational> bernoulli_weight(std::size_t k, std::size_t total) {
  std::vector<Rational> out(total + 1, Rational(0));
  const std::size_t rest = total - k;
  for (std::size_t m = 0; m <= rest; ++m) {
    Rational c(binomial(rest, m), mpz_class(1));
    out[k + m] = (m % 2 == 0) ? c : -c;
  }
  return out;
}

int haar_sign(const DyadicInterval& interval, std::uint64_t cell, int resolution) {
  if (cell < interval.first_cell(resolution) || cell >= interval.last_cell(resolution)) return 0;
  return interval.right_child().first_cell(resolution) <= cell ? 1 : -1;
}

void check_system(const HaarSystem& system, const DyadicSet& set) {
  for (const auto& interval : system)
    if (interval.level >= set.resolution()) throw Error("below resolution");
  for (std::size_t a = 0; a < system.size(); ++a)
    for (std::size_t b = a + 1; b < system.size(); ++b)
      if (system[a] == system[b]) throw Error("duplicate interval in system");
}

// Row-reduces m in place; returns pivot columns.
std::vector<Eigen::Index> row_reduce(ScalarMatrix& m) {
  std::vector<Eigen::Index> pivots;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Eigen::Index pivot = row;
    while (pivot < m.rows() && m(pivot, col).is_zero()) ++pivot;
    if (pivot == m.rows()) continue;
    m.row(pivot).swap(m.row(row));
    const ExactScalar inv = ExactScalar(1) / m(row, col);
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(row, c) *= inv;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col).is_zero()) continue;
      const ExactScalar factor = m(r, col);
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) -= factor * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

ScalarVector Expansion::sum() const {
  ScalarVector s = ScalarVector::Zero(static_cast<Eigen::Index>(cell_count()));
  for (const auto& t : terms) s += t;
  return s;
}

Expansion martingale_expansion(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  Expansion e;
  e.weights.assign(tree.leaf_masses().begin(), tree.leaf_masses().end());
  e.index.mode = BernoulliMode::per_level;
  for (auto& d : differences(tree, set, include_root)) {
    e.index.levels.push_back(d.level.value_or(0));
    e.terms.push_back(std::move(d.values));
  }
  return e;
}

Expansion haar_expansion(const HaarSystem& system, const DyadicSet& set) {
  check_system(system, set);
  const int n = set.resolution();
  Expansion e;
  e.weights.assign(set.cell_count(), pow2(-n));
  e.index.mode = BernoulliMode::per_interval;
  e.index.intervals = system;
  for (const auto& interval : system) {
    const ExactScalar a = haar_coefficient(set, interval);
    const ExactScalar height = a * ExactScalar::sqrt2_pow(interval.level);
    ScalarVector term = ScalarVector::Zero(static_cast<Eigen::Index>(set.cell_count()));
    for (auto c = interval.first_cell(n); c < interval.last_cell(n); ++c)
      term[static_cast<Eigen::Index>(c)] = haar_sign(interval, c, n) > 0 ? height : -height;
    e.terms.push_back(std::move(term));
  }
  return e;
}

PolyP chi_enumeration(const Expansion& e, unsigned workers) {
  const std::size_t k_terms = e.terms.size();
  if (k_terms > kMaxEnumerationTerms) throw Error("enumeration too large");
  std::vector<std::vector<Eigen::Index>> support(k_terms);
  for (std::size_t k = 0; k < k_terms; ++k) {
    if (static_cast<std::size_t>(e.terms[k].size()) != e.cell_count()) throw Error("term size mismatch");
    for (Eigen::Index c = 0; c < e.terms[k].size(); ++c)
      if (!e.terms[k][c].is_zero()) support[k].push_back(c);
  }

  const std::uint64_t configs = std::uint64_t{1} << k_terms;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, configs));
  std::vector<std::vector<ExactScalar>> partial(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = configs * w / workers;
      const std::uint64_t end = configs * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] { partial[w] = cube_sums_by_popcount(e, support, begin, end); });
    }
  }
  std::vector<ExactScalar> totals(k_terms + 1, ExactScalar(0));
  for (const auto& part : partial)
    for (std::size_t k = 0; k <= k_terms; ++k) totals[k] += part[k];

  std::vector<ExactScalar> coeffs(k_terms + 1, ExactScalar(0));
  for (std::size_t k = 0; k <= k_terms; ++k) {
    if (totals[k].is_zero()) continue;
    const auto weight = bernoulli_weight(k, k_terms);
    for (std::size_t d = k; d <= k_terms; ++d) coeffs[d] += totals[k] * ExactScalar(weight[d]);
  }
  for (std::size_t d = PolyP::kMaxDegree + 1; d <= k_terms; ++d)
    if (!coeffs[d].is_zero()) throw std::logic_error("enumerated chi has degree above 3");
  PolyP out;
  for (std::size_t d = 0; d <= std::min<std::size_t>(k_terms, PolyP::kMaxDegree); ++d)
    out[static_cast<int>(d)] = coeffs[d];
  return out;
}

PolyP MomentCoefficients::polynomial() const {
  return PolyP({ExactScalar(0), linear, quadratic, cubic});
}

MomentCoefficients martingale_moments(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  const auto d = differences(tree, set, include_root);
  MomentCoefficients out{ExactScalar(0), ExactScalar(0), ExactScalar(0)};
  for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    const ExactScalar mass(tree.leaf_mass(leaf));
    const auto i = static_cast<Eigen::Index>(leaf);
    ExactScalar earlier(0);  // Σ_{m<n} d_m at this leaf
    for (const auto& dn : d) {
      const ExactScalar& v = dn.values[i];
      if (!v.is_zero()) {
        const ExactScalar sq = v * v;
        out.linear += mass * sq * v;
        out.quadratic += mass * earlier * sq;
      }
      earlier += v;
    }
  }
  out.quadratic *= ExactScalar(3);
  return out;
}

PolyP chi_exact_martingale(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  return martingale_moments(tree, set, include_root).polynomial();
}

ExactScalar haar_triple_integral(const DyadicInterval& a, const DyadicInterval& b, const DyadicInterval& c) {
  // Each h_I is constant on the children of I, so the finest level + 1
  // resolves all three functions.
  const int resolution = std::max({a.level, b.level, c.level}) + 1;
  const DyadicInterval& finest = a.level >= b.level && a.level >= c.level ? a : (b.level >= c.level ? b : c);
  Rational sum(0);
  for (auto cell = finest.first_cell(resolution); cell < finest.last_cell(resolution); ++cell)
    sum += Rational(haar_sign(a, cell, resolution) * haar_sign(b, cell, resolution) * haar_sign(c, cell, resolution));
  if (sum.is_zero()) return ExactScalar(0);
  return ExactScalar(sum * pow2(-resolution)) * ExactScalar::sqrt2_pow(a.level + b.level + c.level);
}

MomentCoefficients wavelet_moment_coefficients(const HaarSystem& system, const DyadicSet& set) {
  check_system(system, set);
  std::vector<ExactScalar> a;
  for (const auto& interval : system) a.push_back(haar_coefficient(set, interval));
  MomentCoefficients out{ExactScalar(0), ExactScalar(0), ExactScalar(0)};
  const std::size_t k = system.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (a[i].is_zero()) continue;
    out.linear += cube(a[i]) * haar_triple_integral(system[i], system[i], system[i]);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i || a[j].is_zero()) continue;
      out.quadratic += a[i] * a[i] * a[j] * haar_triple_integral(system[i], system[i], system[j]);
    }
    for (std::size_t j = i + 1; j < k; ++j)
      for (std::size_t l = j + 1; l < k; ++l) {
        if (a[j].is_zero() || a[l].is_zero()) continue;
        out.cubic += a[i] * a[j] * a[l] * haar_triple_integral(system[i], system[j], system[l]);
      }
  }
  out.quadratic *= ExactScalar(3);
  out.cubic *= ExactScalar(6);
  return out;
}

ExactScalar projection_cube_integral(const HaarSystem& system, const DyadicSet& set) {
  check_system(system, set);
  const int n = set.resolution();
  ScalarVector projection = ScalarVector::Zero(static_cast<Eigen::Index>(set.cell_count()));
  for (const auto& interval : system) {
    const ExactScalar coeff = haar_coefficient(set, interval);
    const ExactScalar height = coeff * ExactScalar::sqrt2_pow(interval.level);
    for (auto c = interval.first_cell(n); c < interval.last_cell(n); ++c) {
      if (haar_sign(interval, c, n) > 0) projection[static_cast<Eigen::Index>(c)] += height;
      else projection[static_cast<Eigen::Index>(c)] -= height;
    }
  }
  ExactScalar sum(0);
  for (Eigen::Index c = 0; c < projection.size(); ++c) sum += cube(projection[c]);
  return sum * ExactScalar(pow2(-n));
}

ScalarVector variance_identity_check(const Expansion& e, const ScalarVector& indicator, const Rational& p) {
  if (p.sign() < 0 || p > Rational(1)) throw Error("p outside [0,1]");
  if (e.sum() != indicator) throw Error("expansion does not sum to indicator");
  const auto n = static_cast<Eigen::Index>(e.cell_count());
  const Rational q = Rational(1) - p;
  const ExactScalar centre_scale(p);
  const ExactScalar pq(p * q);

  // Selectors of terms vanishing at a cell do not move phi there, so the
  // expectation at each cell is an enumeration over the terms touching it.
  ScalarVector defect(n);
  std::vector<ExactScalar> local;
  for (Eigen::Index c = 0; c < n; ++c) {
    local.clear();
    for (const auto& t : e.terms)
      if (!t[c].is_zero()) local.push_back(t[c]);
    if (local.size() > kMaxEnumerationTerms) throw Error("enumeration too large");
    const ExactScalar centre = centre_scale * indicator[c];
    std::vector<ExactScalar> weight(local.size() + 1);
    for (std::size_t k = 0; k <= local.size(); ++k)
      weight[k] = ExactScalar(pow(p, static_cast<unsigned>(k)) * pow(q, static_cast<unsigned>(local.size() - k)));
    ExactScalar second_moment(0);
    for (std::uint64_t config = 0; config < (std::uint64_t{1} << local.size()); ++config) {
      ExactScalar phi(0);
      for (std::size_t k = 0; k < local.size(); ++k)
        if ((config >> k) & 1) phi += local[k];
      const ExactScalar dev = phi - centre;
      second_moment += weight[static_cast<std::size_t>(std::popcount(config))] * dev * dev;
    }
    ExactScalar square(0);
    for (const auto& v : local) square += v * v;
    defect[c] = second_moment - pq * square;
  }
  return defect;
}

Rational bernoulli_central_moment(const Rational& p, unsigned k) {
  if (p.sign() < 0 || p > Rational(1)) throw Error("p outside [0,1]");
  const Rational q = Rational(1) - p;
  // X = 1 with probability p, 0 otherwise.
  return p * pow(q, k) + q * pow(-p, k);
}

ExactScalar bernoulli_third_moment(const Rational& p) {
  if (p.sign() < 0 || p > Rational(1)) throw Error("p outside [0,1]");
  const Rational closed = p * (Rational(1) - p) * (Rational(1) - Rational(2) * p);
  if (closed != bernoulli_central_moment(p, 3)) throw std::logic_error("third moment identity failed");
  return ExactScalar(closed);
}

ExactScalar exact_determinant(ScalarMatrix m) {
  if (m.rows() != m.cols()) throw Error("determinant of a non-square matrix");
  ExactScalar det(1);
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    Eigen::Index pivot = col;
    while (pivot < m.rows() && m(pivot, col).is_zero()) ++pivot;
    if (pivot == m.rows()) return ExactScalar(0);
    if (pivot != col) {
      m.row(pivot).swap(m.row(col));
      det = -det;
    }
    det *= m(col, col);
    for (Eigen::Index r = col + 1; r < m.rows(); ++r) {
      if (m(r, col).is_zero()) continue;
      const ExactScalar factor = m(r, col) / m(col, col);
      for (Eigen::Index c = col; c < m.cols(); ++c) m(r, c) -= factor * m(col, c);
    }
  }
  return det;
}

int exact_rank(const ScalarMatrix& m) {
  ScalarMatrix work = m;
  return static_cast<int>(row_reduce(work).size());
}

std::vector<ScalarVector> exact_left_null_space(const ScalarMatrix& m) {
  // Left null space of m = null space of m^T.
  ScalarMatrix work = m.transpose();
  const auto pivots = row_reduce(work);
  std::vector<ScalarVector> basis;
  for (Eigen::Index free = 0; free < work.cols(); ++free) {
    if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
    ScalarVector v = ScalarVector::Zero(work.cols());
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -work(static_cast<Eigen::Index>(r), free);
    // Scale so the first nonzero entry is 1.
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!v[i].is_zero()) {
        const ExactScalar lead = v[i];
        for (Eigen::Index j = 0; j < v.size(); ++j) v[j] /= lead;
        break;
      }
    basis.push_back(std::move(v));
  }
  return basis;
}

bool ProofCertificate::verified() const {
  const PolyP expected({ExactScalar(0), ExactScalar(0), residuals[1], -residuals[0]});
  return dependency_value.is_zero() && m1 + m2 == ExactScalar(pv) && residual_polynomial == expected;
}

ProofCertificate proof_certificate(const FiltrationTree& tree, const LeafSet& set) {
  ProofCertificate cert;
  const LocalEnergy energy = local_energy(tree, set, true);
  const MomentCoefficients m = martingale_moments(tree, set, true);
  cert.pv = energy.pv;
  cert.m1 = m.linear;
  cert.m2 = m.quadratic;
  cert.eta_ratio = energy.ratio;

  const ExactScalar pv(cert.pv);
  cert.residuals = {pv + ExactScalar(2) * cert.m1, cert.m2 + ExactScalar(3) * cert.m1,
                    pv * ExactScalar(Rational(mpz_class(1), mpz_class(8))) -
                        cert.m1 * ExactScalar(Rational(mpz_class(1), mpz_class(2))) -
                        cert.m2 * ExactScalar(Rational(mpz_class(1), mpz_class(4)))};

  cert.system = ScalarMatrix(3, 3);
  cert.system << ExactScalar(1), ExactScalar(2), ExactScalar(0),
                 ExactScalar(0), ExactScalar(3), ExactScalar(1),
                 ExactScalar(Rational(mpz_class(1), mpz_class(8))),
                 ExactScalar(Rational(mpz_class(-1), mpz_class(2))),
                 ExactScalar(Rational(mpz_class(-1), mpz_class(4)));
  cert.determinant = exact_determinant(cert.system);
  cert.rank = exact_rank(cert.system);

  cert.dependency_value = ExactScalar(0);
  const auto null = exact_left_null_space(cert.system);
  if (!null.empty()) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      cert.dependency.push_back(null.front()[i]);
      cert.dependency_value += null.front()[i] * cert.residuals[static_cast<std::size_t>(i)];
    }
  }

  // P is recoverable iff e_1 lies in the row space of the system, i.e. some
  // λ has λ^T A = e_1^T. Solve by reducing [A^T | e_1].
  ScalarMatrix augmented(3, 4);
  augmented.leftCols(3) = cert.system.transpose();
  augmented.col(3) << ExactScalar(1), ExactScalar(0), ExactScalar(0);
  const auto pivots = row_reduce(augmented);
  cert.pv_recoverable = std::find(pivots.begin(), pivots.end(), Eigen::Index{3}) == pivots.end();
  if (cert.pv_recoverable) {
    cert.recovery.assign(3, ExactScalar(0));
    for (std::size_t r = 0; r < pivots.size(); ++r)
      cert.recovery[static_cast<std::size_t>(pivots[r])] = augmented(static_cast<Eigen::Index>(r), 3);
  }

  const PolyP chi = m.polynomial();
  const PolyP cubic_model({ExactScalar(0), cert.m1, ExactScalar(-3) * cert.m1, cert.residuals[0]});
  cert.residual_polynomial = chi - cubic_model;

  ExactScalar largest(0);
  for (const auto& r : cert.residuals) largest = std::max(largest, r.abs());
  cert.residual_scale = largest / pv;
  return cert;
}

SymmetricRemarkCheck symmetric_remark_check(const FiltrationTree& tree, const LeafSet& set, bool include_root) {
  const MomentCoefficients m = martingale_moments(tree, set, include_root);
  const LocalEnergy energy = local_energy(tree, set, include_root);
  return {include_root, m.linear, m.quadratic, ExactScalar(3) * energy.energy};
}

DPrimeDiagnostics dprime_diagnostics(const HaarSystem& system, const DyadicSet& set, const Rational& eta) {
  if (eta.sign() <= 0) throw Error("eta must be positive");
  check_system(system, set);
  DPrimeDiagnostics out;
  out.dprime_mass_exact = out.in_mass_exact = out.out_mass_exact = ExactScalar(0);
  const ExactScalar eta_sq(eta * eta);
  for (const auto& interval : system) {
    const ExactScalar a = haar_coefficient(set, interval);
    const ExactScalar a_sq = a * a;
    const ExactScalar length_cubed(pow2(-3 * interval.level));
    const bool member = a_sq * a_sq * a_sq >= eta_sq * length_cubed;
    // ∫ |a h_I|^3 = |a|^3 |I|^{-1/2}
    const ExactScalar l3 = a_sq * a.abs() * ExactScalar::sqrt2_pow(interval.level);
    if (member) {
      out.members.push_back(interval);
      out.dprime_mass_exact += a_sq;
      out.in_mass_exact += l3;
    } else {
      out.out_mass_exact += l3;
    }
  }
  out.dprime_mass = out.dprime_mass_exact.to_double();
  out.in_mass = out.in_mass_exact.to_double();
  out.out_mass = out.out_mass_exact.to_double();
  return out;
}

}  // namespace squarelab
