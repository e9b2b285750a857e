#include "qnbt/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qnbt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Objective abs_power() {
  return Objective("abs-power", 1, [](const Vector& x) {
    return std::pow(std::abs(x[0]), 4.0 / 3.0);
  });
}

Objective oscillatory_cubic() {
  return Objective("oscillatory-cubic", 1, [](const Vector& x) {
    if (x[0] == 0.0) return 0.0;
    return x[0] * x[0] * x[0] * std::sin(1.0 / x[0]);
  });
}

Objective kinked_valley() {
  return Objective("kinked-valley", 2, [](const Vector& x) {
    const double v = x[1] - std::abs(x[0]);
    return 100.0 * v * v + std::abs(1.0 - x[0]);
  });
}

Objective bukin6() {
  return Objective("bukin6", 2, [](const Vector& x) {
    return 100.0 * std::sqrt(std::abs(x[1] - 0.01 * x[0] * x[0])) +
           0.01 * std::abs(x[0] + 10.0);
  });
}

Objective schaffer2() {
  return Objective("schaffer2", 2, [](const Vector& x) {
    const double a = x[0] * x[0] - x[1] * x[1];
    const double s = std::sin(a);
    const double den = 1.0 + 0.001 * (x[0] * x[0] + x[1] * x[1]);
    return 0.5 + (s * s - 0.5) / (den * den);
  });
}

Objective ackley(int dim) {
  const double d = dim;
  auto eval = [d, dim](const Vector& x) {
    const double r = std::sqrt(x.squaredNorm() / d);
    double c = 0.0;
    for (int i = 0; i < dim; ++i) c += std::cos(2.0 * kPi * x[i]);
    return -20.0 * std::exp(-0.2 * r) - std::exp(c / d) + std::numbers::e + 20.0;
  };
  auto grad = [d, dim](const Vector& x) {
    const double r = std::sqrt(x.squaredNorm() / d);
    double c = 0.0;
    for (int i = 0; i < dim; ++i) c += std::cos(2.0 * kPi * x[i]);
    const double ec = std::exp(c / d);
    Vector g(dim);
    for (int i = 0; i < dim; ++i) g[i] = (2.0 * kPi / d) * std::sin(2.0 * kPi * x[i]) * ec;
    if (r > 0.0) g += (4.0 * std::exp(-0.2 * r) / (d * r)) * x;
    return g;
  };
  auto hess = [d, dim](const Vector& x) {
    const double r = std::sqrt(x.squaredNorm() / d);
    Vector sn(dim), cs(dim);
    double c = 0.0;
    for (int i = 0; i < dim; ++i) {
      sn[i] = std::sin(2.0 * kPi * x[i]);
      cs[i] = std::cos(2.0 * kPi * x[i]);
      c += cs[i];
    }
    const double ec = std::exp(c / d);
    Matrix H = (4.0 * kPi * kPi / d) * ec * cs.asDiagonal().toDenseMatrix();
    H -= (4.0 * kPi * kPi / (d * d)) * ec * (sn * sn.transpose());
    if (r > 0.0) {
      const double er = std::exp(-0.2 * r);
      const double dr = d * r;
      H += 4.0 * er *
           (Matrix::Identity(dim, dim) / dr - 0.2 * (x * x.transpose()) / (dr * dr) -
            (x * x.transpose()) / (d * d * r * r * r));
    }
    return SymmetricMatrix(H);
  };
  return Objective("ackley", dim, eval).with_gradient(grad).with_hessian(hess);
}

Objective rastrigin(int dim) {
  const double A = 10.0;
  auto eval = [A, dim](const Vector& x) {
    double s = A * dim;
    for (int i = 0; i < dim; ++i) s += x[i] * x[i] - A * std::cos(2.0 * kPi * x[i]);
    return s;
  };
  auto grad = [A, dim](const Vector& x) {
    Vector g(dim);
    for (int i = 0; i < dim; ++i) g[i] = 2.0 * x[i] + 2.0 * kPi * A * std::sin(2.0 * kPi * x[i]);
    return g;
  };
  auto hess = [A, dim](const Vector& x) {
    Matrix H = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) H(i, i) = 2.0 + 4.0 * kPi * kPi * A * std::cos(2.0 * kPi * x[i]);
    return SymmetricMatrix(H);
  };
  return Objective("rastrigin", dim, eval).with_gradient(grad).with_hessian(hess);
}

namespace {

constexpr double kBealeC[3] = {1.5, 2.25, 2.625};

}  // namespace

Objective beale() {
  auto eval = [](const Vector& v) {
    double s = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double t = kBealeC[k - 1] - v[0] + v[0] * std::pow(v[1], k);
      s += t * t;
    }
    return s;
  };
  auto grad = [](const Vector& v) {
    const double x = v[0], y = v[1];
    Vector g = Vector::Zero(2);
    for (int k = 1; k <= 3; ++k) {
      const double yk = std::pow(y, k);
      const double t = kBealeC[k - 1] - x + x * yk;
      g[0] += 2.0 * t * (yk - 1.0);
      g[1] += 2.0 * t * k * x * std::pow(y, k - 1);
    }
    return g;
  };
  auto hess = [](const Vector& v) {
    const double x = v[0], y = v[1];
    Matrix H = Matrix::Zero(2, 2);
    for (int k = 1; k <= 3; ++k) {
      const double yk = std::pow(y, k);
      const double ykm1 = std::pow(y, k - 1);
      const double t = kBealeC[k - 1] - x + x * yk;
      const double tx = yk - 1.0;
      const double ty = k * x * ykm1;
      H(0, 0) += 2.0 * tx * tx;
      H(0, 1) += 2.0 * (tx * ty + t * k * ykm1);
      H(1, 1) += 2.0 * (ty * ty + t * k * (k - 1) * x * (k >= 2 ? std::pow(y, k - 2) : 0.0));
    }
    H(1, 0) = H(0, 1);
    return SymmetricMatrix(H);
  };
  return Objective("beale", 2, eval).with_gradient(grad).with_hessian(hess);
}

Objective griewank(int dim) {
  auto eval = [dim](const Vector& x) {
    double prod = 1.0;
    for (int i = 0; i < dim; ++i) prod *= std::cos(x[i] / std::sqrt(i + 1.0));
    return 1.0 + x.squaredNorm() / 4000.0 - prod;
  };
  auto grad = [dim](const Vector& x) {
    Vector c(dim), s(dim);
    for (int i = 0; i < dim; ++i) {
      const double u = x[i] / std::sqrt(i + 1.0);
      c[i] = std::cos(u);
      s[i] = std::sin(u);
    }
    Vector g(dim);
    for (int k = 0; k < dim; ++k) {
      double excl = 1.0;
      for (int i = 0; i < dim; ++i)
        if (i != k) excl *= c[i];
      g[k] = x[k] / 2000.0 + excl * s[k] / std::sqrt(k + 1.0);
    }
    return g;
  };
  auto hess = [dim](const Vector& x) {
    Vector c(dim), s(dim);
    for (int i = 0; i < dim; ++i) {
      const double u = x[i] / std::sqrt(i + 1.0);
      c[i] = std::cos(u);
      s[i] = std::sin(u);
    }
    Matrix H = Matrix::Identity(dim, dim) / 2000.0;
    for (int k = 0; k < dim; ++k) {
      double excl = 1.0;
      for (int i = 0; i < dim; ++i)
        if (i != k) excl *= c[i];
      H(k, k) += excl * c[k] / (k + 1.0);
      for (int l = k + 1; l < dim; ++l) {
        double excl2 = 1.0;
        for (int i = 0; i < dim; ++i)
          if (i != k && i != l) excl2 *= c[i];
        const double v = -excl2 * s[k] * s[l] / std::sqrt((k + 1.0) * (l + 1.0));
        H(k, l) = v;
        H(l, k) = v;
      }
    }
    return SymmetricMatrix(H);
  };
  return Objective("griewank-" + std::to_string(dim), dim, eval)
      .with_gradient(grad)
      .with_hessian(hess);
}

Objective monkey_saddle() {
  auto eval = [](const Vector& v) { return v[0] * v[0] * v[0] - 3.0 * v[0] * v[1] * v[1]; };
  auto grad = [](const Vector& v) {
    Vector g(2);
    g[0] = 3.0 * v[0] * v[0] - 3.0 * v[1] * v[1];
    g[1] = -6.0 * v[0] * v[1];
    return g;
  };
  auto hess = [](const Vector& v) {
    Matrix H(2, 2);
    H << 6.0 * v[0], -6.0 * v[1], -6.0 * v[1], -6.0 * v[0];
    return SymmetricMatrix(H);
  };
  return Objective("monkey-saddle", 2, eval).with_gradient(grad).with_hessian(hess);
}

Objective gutter_saddle() {
  auto eval = [](const Vector& v) { return v[0] * v[0] * v[1] + v[1] * v[1]; };
  auto grad = [](const Vector& v) {
    Vector g(2);
    g[0] = 2.0 * v[0] * v[1];
    g[1] = v[0] * v[0] + 2.0 * v[1];
    return g;
  };
  auto hess = [](const Vector& v) {
    Matrix H(2, 2);
    H << 2.0 * v[1], 2.0 * v[0], 2.0 * v[0], 2.0;
    return SymmetricMatrix(H);
  };
  return Objective("gutter-saddle", 2, eval).with_gradient(grad).with_hessian(hess);
}

namespace {

Matrix quartic_q() {
  Matrix q(3, 3);
  q << -6.53899332, -4.918748445, -1.884110645,
       -4.918748445, -8.26397796, 2.280742435,
       -1.884110645, 2.280742435, 1.36728532;
  return q;
}

}  // namespace

Objective quartic_form() {
  const Matrix q = quartic_q();
  auto eval = [q](const Vector& x) {
    const Vector u = x.array().square();
    return u.dot(q * u);
  };
  auto grad = [q](const Vector& x) {
    const Vector u = x.array().square();
    const Vector b = q * u;
    return Vector(4.0 * x.array() * b.array());
  };
  auto hess = [q](const Vector& x) {
    const Vector u = x.array().square();
    const Vector b = q * u;
    Matrix H = 8.0 * (x * x.transpose()).cwiseProduct(q);
    for (int k = 0; k < 3; ++k) H(k, k) += 4.0 * b[k];
    return SymmetricMatrix(H);
  };
  return Objective("quartic-form", 3, eval).with_gradient(grad).with_hessian(hess);
}

Objective gutter_line_saddle() {
  auto eval = [](const Vector& v) {
    return (v[0] * v[0] * v[1] + v[1] * v[1]) * v[2];
  };
  auto grad = [](const Vector& v) {
    Vector g(3);
    g[0] = 2.0 * v[0] * v[1] * v[2];
    g[1] = (v[0] * v[0] + 2.0 * v[1]) * v[2];
    g[2] = v[0] * v[0] * v[1] + v[1] * v[1];
    return g;
  };
  auto hess = [](const Vector& v) {
    const double x = v[0], y = v[1], t = v[2];
    Matrix H(3, 3);
    H << 2.0 * y * t, 2.0 * x * t, 2.0 * x * y,
         2.0 * x * t, 2.0 * t, x * x + 2.0 * y,
         2.0 * x * y, x * x + 2.0 * y, 0.0;
    return SymmetricMatrix(H);
  };
  return Objective("gutter-line-saddle", 3, eval).with_gradient(grad).with_hessian(hess);
}

ProteinChain ProteinChain::from_string(const std::string& seq) {
  ProteinChain chain;
  chain.species.reserve(seq.size());
  for (char ch : seq) {
    if (ch == 'A' || ch == 'a')
      chain.species.push_back(1);
    else if (ch == 'B' || ch == 'b')
      chain.species.push_back(-1);
    else
      throw std::invalid_argument("ProteinChain: species must be 'A' or 'B'");
  }
  if (chain.size() < 3) throw std::invalid_argument("ProteinChain: need at least 3 beads");
  return chain;
}

double pair_coupling(int a, int b) {
  if (a == 1 && b == 1) return 1.0;
  if (a == -1 && b == -1) return 0.5;
  return -0.5;
}

double protein_energy(const ProteinChain& chain, const Vector& angles) {
  const int n = chain.size();
  if (angles.size() != n - 2)
    throw std::invalid_argument("protein_energy: need n - 2 turning angles");

  double bend = 0.0;
  for (int i = 0; i < n - 2; ++i) bend += 1.0 - std::cos(angles[i]);
  bend *= 0.25;

  /* Pair term: r_{i,j} is the distance between beads i+1 and j, accumulated as
     a walk along segments i+1 .. j-1 with headings measured from segment i.
     Beads are 1-based here to match the angle indexing theta_2 .. theta_{n-1}. */
  double pair = 0.0;
  for (int i = 1; i <= n - 2; ++i) {
    double phi = 0.0, sc = 0.0, ss = 0.0;
    for (int j = i + 2; j <= n; ++j) {
      phi += angles[j - 3];  // theta_{j-1}
      sc += std::cos(phi);
      ss += std::sin(phi);
      const double r2 = sc * sc + ss * ss;
      if (r2 == 0.0) return kInf;
      const double inv6 = 1.0 / (r2 * r2 * r2);
      pair += 4.0 * (inv6 * inv6 - pair_coupling(chain.species[i - 1], chain.species[j - 1]) * inv6);
    }
  }
  return bend + pair;
}

Objective protein_objective(const ProteinChain& chain) {
  const std::string name = "protein-" + std::to_string(chain.size()) + "mer";
  return Objective(name, chain.size() - 2,
                   [chain](const Vector& angles) { return protein_energy(chain, angles); });
}

double StochasticGriewankBatch::value(const Vector& x) const {
  double total = 0.0;
  for (double scale : xi) {
    double prod = 1.0;
    for (int i = 0; i < dim; ++i) prod *= std::cos(x[i] * scale / std::sqrt(i + 1.0));
    total += 1.0 + scale * scale * x.squaredNorm() / 4000.0 - prod;
  }
  return total / static_cast<double>(xi.size());
}

StochasticGriewankBatch draw_griewank_batch(std::mt19937_64& rng, double sigma,
                                            int batch_size, int dim) {
  if (batch_size < 1) throw std::invalid_argument("draw_griewank_batch: batch_size must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("draw_griewank_batch: sigma must be finite and >= 0");
  if (dim < 1) throw std::invalid_argument("draw_griewank_batch: dim must be >= 1");
  StochasticGriewankBatch batch;
  batch.dim = dim;
  batch.sigma = sigma;
  batch.xi.resize(batch_size);
  if (sigma == 0.0) {
    std::fill(batch.xi.begin(), batch.xi.end(), 1.0);
  } else {
    std::normal_distribution<double> noise(1.0, sigma);
    for (double& v : batch.xi) v = noise(rng);
  }
  return batch;
}

StochasticGriewankBatch draw_griewank_batch(std::uint64_t seed, double sigma, int batch_size,
                                            int dim) {
  std::mt19937_64 rng(seed);
  return draw_griewank_batch(rng, sigma, batch_size, dim);
}

Objective stochastic_griewank_objective(const StochasticGriewankBatch& batch) {
  const std::string name = "stochastic-griewank-n" + std::to_string(batch.xi.size());
  return Objective(name, batch.dim, [batch](const Vector& x) { return batch.value(x); });
}

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

std::vector<ProblemSpec> build_suite() {
  std::vector<ProblemSpec> suite;

  {
    ProblemSpec p{abs_power(), {}, {}, std::nullopt, {"nonsmooth"}};
    p.starts.push_back({"published", vec({1.0}), 1.0});
    p.optima.emplace_back(vec({0.0}), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{oscillatory_cubic(), {}, {}, std::nullopt, {"nonsmooth"}};
    p.starts.push_back({"published", vec({0.75134554}), 0.41200773});
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{kinked_valley(), {}, {}, std::nullopt, {"nonsmooth"}};
    p.starts.push_back({"published", vec({-0.99998925, 2.00001188}), 102.004});
    p.optima.emplace_back(vec({1.0, 1.0}), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{ackley(3), {}, {}, std::nullopt, {"smooth"}};
    p.starts.push_back({"published", vec({0.01, 0.02, -0.07}), 0.262});
    p.optima.emplace_back(Vector::Zero(3), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{rastrigin(4), {}, {}, std::nullopt, {"smooth"}};
    p.starts.push_back(
        {"published", vec({-4.66266579, -2.69585675, -3.08589085, -2.25482451}), 83.892});
    p.optima.emplace_back(Vector::Zero(4), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{beale(), {}, {}, std::nullopt, {"smooth"}};
    p.starts.push_back({"published", vec({-0.52012358, -1.28227229}), 28.879});
    p.optima.emplace_back(vec({3.0, 0.5}), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{bukin6(), {}, {}, std::nullopt, {"nonsmooth"}};
    p.starts.push_back({"far", vec({4.38848192, -3.47943683}), 191.769});
    p.starts.push_back({"near", vec({-9.7, 0.7}), 49.084});
    p.optima.emplace_back(vec({-10.0, 1.0}), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{schaffer2(), {}, {}, std::nullopt, {"nonsmooth"}};
    p.starts.push_back({"published", vec({-57.32135254, -17.85920667}), 0.514});
    p.optima.emplace_back(Vector::Zero(2), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{griewank(10), {}, {}, std::nullopt, {"smooth"}};
    p.starts.push_back({"published", Vector::Constant(10, 10.0), 1.264});
    p.optima.emplace_back(Vector::Zero(10), 0.0);
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{protein_objective(ProteinChain::from_string("ABBBABABAB")),
                  {},
                  {},
                  std::nullopt,
                  {"smooth"}};
    p.starts.push_back({"published",
                        vec({-1.3335047, 2.76782837, -1.89518385, 2.52345111, -0.33519698,
                             -1.98794015, 0.02088706, -1.09200044}),
                        579425.218039767});
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{monkey_saddle(), {}, {}, Vector::Zero(2), {"smooth", "saddle-test"}};
    p.starts.push_back({"published", vec({-0.0004322, 0.00093845}), 1e-9});
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{gutter_saddle(), {}, {}, Vector::Zero(2), {"smooth", "saddle-test"}};
    p.starts.push_back({"published", vec({0.0007154, 0.00088668}), 7e-7});
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{quartic_form(), {}, {}, Vector::Zero(3), {"smooth", "saddle-test"}};
    p.starts.push_back(
        {"published", vec({8.52766549e-05, -4.64890817e-04, 2.75958449e-04}), -3e-13});
    suite.push_back(std::move(p));
  }
  {
    ProblemSpec p{gutter_line_saddle(), {}, {}, Vector::Zero(3), {"smooth", "saddle-test"}};
    p.starts.push_back({"published", vec({0.00040449, 0.00029101, -0.00029746}), -2e-11});
    suite.push_back(std::move(p));
  }
  {
    /* Metadata anchor for the mini-batch runs: the objective here is the
       noise-free limit (xi identically 1); the harness draws per-iteration
       batches itself. */
    StochasticGriewankBatch limit;
    limit.dim = 10;
    limit.sigma = 0.0;
    limit.xi = {1.0};
    Objective obj("stochastic-griewank", 10,
                  [limit](const Vector& x) { return limit.value(x); });
    ProblemSpec p{std::move(obj), {}, {}, std::nullopt, {"smooth", "stochastic"}};
    p.starts.push_back({"published", Vector::Constant(10, 10.0), 1.264});
    p.optima.emplace_back(Vector::Zero(10), 0.0);
    suite.push_back(std::move(p));
  }

  return suite;
}

}  // namespace

const std::vector<ProblemSpec>& benchmark_suite() {
  static const std::vector<ProblemSpec> suite = build_suite();
  return suite;
}

const ProblemSpec& find_problem(const std::string& name) {
  for (const ProblemSpec& p : benchmark_suite())
    if (p.objective.name() == name) return p;
  throw std::out_of_range("find_problem: unknown problem '" + name + "'");
}

}  // namespace qnbt
