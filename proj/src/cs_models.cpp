#include "esqm/cs_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>

#include "esqm/cs_linalg.hpp"
#include "esqm/rng.hpp"

namespace esqm::cs {

namespace {

Matrix unit_column_gaussian(Index q, Index n, Rng& rng) {
  Matrix A(q, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < q; ++i) A(i, j) = rng.normal();
    A.col(j).normalize();
  }
  return A;
}

std::vector<Index> draw_support(Index n, Index k, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j =
        i + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> support(pool.begin(), pool.begin() + k);
  std::sort(support.begin(), support.end());
  return support;
}

void validate_dims(Index q, Index n, Index k, double mu) {
  if (q < 1) throw ContractViolation("instance generator: q must be >= 1");
  if (k < 1 || k > n) throw ContractViolation("instance generator: need 1 <= k <= n");
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw ContractViolation("instance generator: mu must lie in [0, 1)");
  }
}

}  // namespace

CsInstance gen_gaussian_instance(Index q, Index n, Index k, std::uint64_t seed,
                                 double mu) {
  validate_dims(q, n, k, mu);
  CsInstance inst;
  inst.seed = seed;
  inst.mu = mu;
  inst.noise_kind = NoiseKind::gaussian;

  Rng r_mat(seed, kStreamMatrix);
  inst.A = unit_column_gaussian(q, n, r_mat);
  Rng r_sup(seed, kStreamSupport);
  inst.support = draw_support(n, k, r_sup);
  Rng r_sig(seed, kStreamSignal);
  inst.x_orig = Vector::Zero(n);
  for (const Index idx : inst.support) inst.x_orig[idx] = r_sig.normal();

  Rng r_noise(seed, kStreamNoise);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector noise(q);
    for (Index i = 0; i < q; ++i) noise[i] = r_noise.normal();
    inst.b = inst.A * inst.x_orig + 0.01 * noise;
    const double sigma1 = 1.1 * (0.01 * noise.norm());
    const double sigma = 0.5 * sigma1 * sigma1;
    if (sigma > 0.0 && sigma < 0.5 * inst.b.squaredNorm()) {
      inst.sigma1 = sigma1;
      inst.sigma = sigma;
      inst.M = compute_M(least_norm_solution(inst.A, inst.b), mu);
      return inst;
    }
  }
  throw NumericFailure("gen_gaussian_instance: could not draw noise with the origin infeasible");
}

CsInstance gen_cauchy_instance(Index q, Index n, Index k, std::uint64_t seed,
                               double gamma, double mu) {
  validate_dims(q, n, k, mu);
  if (gamma <= 0.0) {
    throw ContractViolation("gen_cauchy_instance: gamma must be positive");
  }
  CsInstance inst;
  inst.seed = seed;
  inst.mu = mu;
  inst.gamma = gamma;
  inst.noise_kind = NoiseKind::cauchy;

  Rng r_mat(seed, kStreamMatrix);
  inst.A = unit_column_gaussian(q, n, r_mat);
  Rng r_sup(seed, kStreamSupport);
  inst.support = draw_support(n, k, r_sup);
  Rng r_sig(seed, kStreamSignal);
  inst.x_orig = Vector::Zero(n);
  for (const Index idx : inst.support) inst.x_orig[idx] = r_sig.normal();

  Rng r_noise(seed, kStreamNoise);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector noise(q);
    for (Index i = 0; i < q; ++i) noise[i] = r_noise.cauchy();
    inst.b = inst.A * inst.x_orig + 0.01 * noise;
    const double sigma = 1.05 * lorentz_norm(0.01 * noise, gamma);
    if (sigma > 0.0 && sigma < lorentz_norm(-inst.b, gamma)) {
      inst.sigma = sigma;
      inst.M = compute_M(least_norm_solution(inst.A, inst.b), mu);
      return inst;
    }
  }
  throw NumericFailure("gen_cauchy_instance: could not draw noise with the origin infeasible");
}

double compute_M(const Vector& adagb, double mu) {
  if (!(mu >= 0.0 && mu < 1.0)) {
    throw ContractViolation("compute_M: mu must lie in [0, 1)");
  }
  return (adagb.lpNorm<1>() - mu * adagb.norm()) / (1.0 - mu);
}

double lorentz_norm(const Vector& y, double gamma) {
  if (gamma <= 0.0) throw ContractViolation("lorentz_norm: gamma must be positive");
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double t = y[i] / gamma;
    total += std::log1p(t * t);
  }
  return total;
}

SmoothConstraint quad_constraint(const Matrix& A, const Vector& b,
                                 double sigma) {
  return quad_constraint(A, b, sigma, spectral_norm_sq(A));
}

SmoothConstraint quad_constraint(const Matrix& A, const Vector& b, double sigma,
                                 double norm_A_sq) {
  if (sigma <= 0.0) throw ContractViolation("quad_constraint: sigma must be positive");
  auto Ap = std::make_shared<const Matrix>(A);
  auto bp = std::make_shared<const Vector>(b);
  SmoothConstraint c;
  c.eval = [Ap, bp, sigma](const Vector& x) {
    return 0.5 * (*Ap * x - *bp).squaredNorm() - sigma;
  };
  c.grad = [Ap, bp](const Vector& x) {
    return (Ap->transpose() * (*Ap * x - *bp)).eval();
  };
  c.modulus_L = norm_A_sq;
  c.modulus_ell = 0.0;
  return c;
}

SmoothConstraint lorentz_constraint(const Matrix& A, const Vector& b,
                                    double sigma, double gamma) {
  return lorentz_constraint(A, b, sigma, gamma, spectral_norm_sq(A));
}

SmoothConstraint lorentz_constraint(const Matrix& A, const Vector& b,
                                    double sigma, double gamma,
                                    double norm_A_sq) {
  if (sigma <= 0.0) throw ContractViolation("lorentz_constraint: sigma must be positive");
  if (gamma <= 0.0) throw ContractViolation("lorentz_constraint: gamma must be positive");
  auto Ap = std::make_shared<const Matrix>(A);
  auto bp = std::make_shared<const Vector>(b);
  SmoothConstraint c;
  c.eval = [Ap, bp, sigma, gamma](const Vector& x) {
    return lorentz_norm(*Ap * x - *bp, gamma) - sigma;
  };
  c.grad = [Ap, bp, gamma](const Vector& x) {
    Vector r = *Ap * x - *bp;
    const double g2 = gamma * gamma;
    for (Index i = 0; i < r.size(); ++i) {
      r[i] = 2.0 * r[i] / (g2 + r[i] * r[i]);
    }
    return (Ap->transpose() * r).eval();
  };
  c.modulus_L = 2.0 * norm_A_sq / (gamma * gamma);
  c.modulus_ell = norm_A_sq / (4.0 * gamma * gamma);
  return c;
}

LorentzSplitReport verify_lorentz_dc_split(double gamma,
                                           const std::vector<double>& grid) {
  if (gamma <= 0.0) {
    throw ContractViolation("verify_lorentz_dc_split: gamma must be positive");
  }
  if (grid.empty()) {
    throw ContractViolation("verify_lorentz_dc_split: empty grid");
  }
  double lo = grid.front();
  double hi = grid.front();
  for (const double t : grid) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (lo > -10.0 + 1e-9 || hi < 10.0 - 1e-9) {
    throw ContractViolation("verify_lorentz_dc_split: grid must cover [-10, 10]");
  }

  // Curvature of log(1 + t^2), split into positive and negative parts.
  auto curv = [](double t) {
    const double t2 = t * t;
    const double den = (1.0 + t2) * (1.0 + t2);
    return 2.0 * (1.0 - t2) / den;
  };

  // Cumulative trapezoid integration from 0 (r1/r2 are even, so one side
  // suffices).
  const double h = 1e-4;
  const double t_max = std::max(10.0, std::max(std::abs(lo), std::abs(hi)));
  const auto N = static_cast<std::size_t>(std::ceil(t_max / h)) + 1;
  std::vector<double> r1p(N + 1, 0.0), r2p(N + 1, 0.0);
  std::vector<double> r1(N + 1, 0.0), r2(N + 1, 0.0);
  double prev_c1 = std::max(curv(0.0), 0.0);
  double prev_c2 = std::max(-curv(0.0), 0.0);
  for (std::size_t i = 1; i <= N; ++i) {
    const double t = static_cast<double>(i) * h;
    const double c1 = std::max(curv(t), 0.0);
    const double c2 = std::max(-curv(t), 0.0);
    r1p[i] = r1p[i - 1] + 0.5 * h * (prev_c1 + c1);
    r2p[i] = r2p[i - 1] + 0.5 * h * (prev_c2 + c2);
    r1[i] = r1[i - 1] + 0.5 * h * (r1p[i - 1] + r1p[i]);
    r2[i] = r2[i - 1] + 0.5 * h * (r2p[i - 1] + r2p[i]);
    prev_c1 = c1;
    prev_c2 = c2;
  }
  auto interp = [&](const std::vector<double>& f, double t) {
    const double s = std::abs(t) / h;
    const auto i0 = std::min(static_cast<std::size_t>(s), N - 1);
    const double w = s - static_cast<double>(i0);
    return (1.0 - w) * f[i0] + w * f[i0 + 1];
  };

  LorentzSplitReport rep;
  rep.r1_at0 = r1[0];
  rep.r2_at0 = r2[0];
  rep.r1p_at0 = r1p[0];
  rep.r2p_at0 = r2p[0];
  rep.min_r1pp = rep.min_r2pp = std::numeric_limits<double>::infinity();
  for (const double t : grid) {
    const double ident =
        std::abs(interp(r1, t) - interp(r2, t) - std::log1p(t * t));
    rep.worst_identity_err = std::max(rep.worst_identity_err, ident);
    const double c1 = std::max(curv(t), 0.0);
    const double c2 = std::max(-curv(t), 0.0);
    rep.min_r1pp = std::min(rep.min_r1pp, c1);
    rep.max_r1pp = std::max(rep.max_r1pp, c1);
    rep.min_r2pp = std::min(rep.min_r2pp, c2);
    rep.max_r2pp = std::max(rep.max_r2pp, c2);
  }
  rep.sup_r2pp = rep.max_r2pp;
  const double g2 = gamma * gamma;
  rep.scaled_sup_r1pp = rep.max_r1pp / g2;
  rep.scaled_sup_r2pp = rep.max_r2pp / g2;

  rep.pass = rep.worst_identity_err <= 1e-6 && rep.min_r1pp >= 0.0 &&
             rep.max_r1pp <= 2.0 + 1e-12 && rep.min_r2pp >= 0.0 &&
             rep.max_r2pp <= 0.25 + 1e-12 &&
             std::abs(rep.sup_r2pp - 0.25) <= 1e-4 && rep.r1_at0 == 0.0 &&
             rep.r2_at0 == 0.0 && rep.r1p_at0 == 0.0 && rep.r2p_at0 == 0.0 &&
             rep.scaled_sup_r1pp <= 2.0 / g2 + 1e-12 &&
             rep.scaled_sup_r2pp <= 0.25 / g2 + 1e-12;
  return rep;
}

Vector l1_box_sprox(const Vector& v, const Vector& z, double rho, double M) {
  if (rho <= 0.0 || M <= 0.0) {
    throw ContractViolation("l1_box_sprox: rho and M must be positive");
  }
  if (v.size() != z.size()) {
    throw ContractViolation("l1_box_sprox: dimension mismatch");
  }
  const double tau = 1.0 / rho;
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double t = z[i] - v[i] / rho;
    const double soft = std::copysign(std::max(std::abs(t) - tau, 0.0), t);
    out[i] = std::clamp(soft, -M, M);
  }
  return out;
}

ProblemSpec make_cs_problem(const CsInstance& instance, CsModelKind kind) {
  return make_cs_problem(instance, kind, spectral_norm_sq(instance.A));
}

ProblemSpec make_cs_problem(const CsInstance& instance, CsModelKind kind,
                            double norm_A_sq) {
  if (kind == CsModelKind::quad &&
      (instance.noise_kind != NoiseKind::gaussian || !instance.sigma1)) {
    throw ContractViolation("make_cs_problem: quad model needs a gaussian instance");
  }
  if (kind == CsModelKind::lorentz &&
      (instance.noise_kind != NoiseKind::cauchy || !instance.gamma)) {
    throw ContractViolation("make_cs_problem: lorentz model needs a cauchy instance");
  }
  const double M = instance.M;
  const double mu = instance.mu;
  const Index n = instance.n();

  ProblemSpec p;
  p.dimension = n;
  p.p1_eval = [](const Vector& x) { return x.lpNorm<1>(); };
  p.p1_composite_prox = [M](const Vector& v, const Vector& z, double rho) {
    return l1_box_sprox(v, z, rho, M);
  };
  p.p2_eval = [mu](const Vector& x) { return mu * x.norm(); };
  const double zero_tol = 1e-12 * std::sqrt(static_cast<double>(n));
  p.p2_subgrad = [mu, zero_tol, n](const Vector& x) {
    const double nm = x.norm();
    if (nm > zero_tol) return ((mu / nm) * x).eval();
    return Vector::Zero(n).eval();
  };
  p.constraints.push_back(
      kind == CsModelKind::quad
          ? quad_constraint(instance.A, instance.b, instance.sigma, norm_A_sq)
          : lorentz_constraint(instance.A, instance.b, instance.sigma,
                               *instance.gamma, norm_A_sq));
  p.c_project = [M](const Vector& x) {
    return x.cwiseMax(-M).cwiseMin(M).eval();
  };
  p.c_contains = [M](const Vector& x) { return x.lpNorm<Eigen::Infinity>() <= M; };
  p.p_lower_bound = 0.0;   // 0 in C and P >= (1 - mu) ||x|| >= 0
  p.p1_lower_bound = 0.0;
  p.convex_mode = kind == CsModelKind::quad && mu == 0.0;
  return p;
}

CsMetrics metrics(const Vector& x_star, const CsInstance& instance) {
  if (x_star.size() != instance.n()) {
    throw ContractViolation("metrics: dimension mismatch");
  }
  CsMetrics out;
  out.rec_err = (x_star - instance.x_orig).norm() /
                std::max(1.0, instance.x_orig.norm());
  const Vector r = instance.A * x_star - instance.b;
  if (instance.noise_kind == NoiseKind::gaussian) {
    const double s1sq = *instance.sigma1 * *instance.sigma1;
    out.residual = (r.squaredNorm() - s1sq) / s1sq;
  } else {
    out.residual =
        (lorentz_norm(r, *instance.gamma) - instance.sigma) / instance.sigma;
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'E', 'S', 'Q', 'M', 'C', 'S', 'I', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

// Raw little-endian container; doubles are stored bit-exactly.
void save_instance(const CsInstance& instance, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw NumericFailure("save_instance: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, 1);  // version
  write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(instance.noise_kind));
  write_pod<std::uint8_t>(os, instance.sigma1.has_value() ? 1 : 0);
  write_pod<std::uint8_t>(os, instance.gamma.has_value() ? 1 : 0);
  write_pod<std::uint8_t>(os, 0);
  write_pod<std::uint64_t>(os, instance.seed);
  write_pod<std::int64_t>(os, instance.q());
  write_pod<std::int64_t>(os, instance.n());
  write_pod<std::int64_t>(os, instance.k());
  write_pod<double>(os, instance.sigma);
  write_pod<double>(os, instance.sigma1.value_or(0.0));
  write_pod<double>(os, instance.gamma.value_or(0.0));
  write_pod<double>(os, instance.mu);
  write_pod<double>(os, instance.M);
  for (const Index idx : instance.support) {
    write_pod<std::int64_t>(os, idx);
  }
  os.write(reinterpret_cast<const char*>(instance.x_orig.data()),
           static_cast<std::streamsize>(sizeof(double) * instance.n()));
  os.write(reinterpret_cast<const char*>(instance.b.data()),
           static_cast<std::streamsize>(sizeof(double) * instance.q()));
  os.write(reinterpret_cast<const char*>(instance.A.data()),
           static_cast<std::streamsize>(sizeof(double) * instance.q() *
                                        instance.n()));
  if (!os) throw NumericFailure("save_instance: write failed for " + path);
}

CsInstance load_instance(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw NumericFailure("load_instance: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw NumericFailure("load_instance: bad magic in " + path);
  }
  if (read_pod<std::uint32_t>(is) != 1) {
    throw NumericFailure("load_instance: unsupported version in " + path);
  }
  CsInstance inst;
  inst.noise_kind = static_cast<NoiseKind>(read_pod<std::uint8_t>(is));
  const bool has_sigma1 = read_pod<std::uint8_t>(is) != 0;
  const bool has_gamma = read_pod<std::uint8_t>(is) != 0;
  read_pod<std::uint8_t>(is);
  inst.seed = read_pod<std::uint64_t>(is);
  const auto q = static_cast<Index>(read_pod<std::int64_t>(is));
  const auto n = static_cast<Index>(read_pod<std::int64_t>(is));
  const auto k = static_cast<Index>(read_pod<std::int64_t>(is));
  inst.sigma = read_pod<double>(is);
  const double sigma1 = read_pod<double>(is);
  const double gamma = read_pod<double>(is);
  if (has_sigma1) inst.sigma1 = sigma1;
  if (has_gamma) inst.gamma = gamma;
  inst.mu = read_pod<double>(is);
  inst.M = read_pod<double>(is);
  inst.support.resize(static_cast<std::size_t>(k));
  for (auto& idx : inst.support) {
    idx = static_cast<Index>(read_pod<std::int64_t>(is));
  }
  inst.x_orig.resize(n);
  is.read(reinterpret_cast<char*>(inst.x_orig.data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  inst.b.resize(q);
  is.read(reinterpret_cast<char*>(inst.b.data()),
          static_cast<std::streamsize>(sizeof(double) * q));
  inst.A.resize(q, n);
  is.read(reinterpret_cast<char*>(inst.A.data()),
          static_cast<std::streamsize>(sizeof(double) * q * n));
  if (!is) throw NumericFailure("load_instance: truncated file " + path);
  return inst;
}

}  // namespace esqm::cs
