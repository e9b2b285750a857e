#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qnbt/calculus.hpp"
#include "qnbt/types.hpp"

namespace qnbt {

struct InitialPoint {
  std::string label;
  Vector x;
  /* Published objective value at x, when one exists, for transcription checks. */
  std::optional<double> published_value;
};

struct ProblemSpec {
  Objective objective;
  std::vector<InitialPoint> starts;
  std::vector<std::pair<Vector, double>> optima;  // known minima with their values
  std::optional<Vector> saddle;                   // for saddle-escape studies
  std::vector<std::string> tags;                  // smooth | nonsmooth | saddle-test | stochastic
};

/* ---- one- and two-dimensional non-smooth test functions (derivatives by FD) ---- */

Objective abs_power();          // |x|^(4/3), kink at the minimum 0
Objective oscillatory_cubic();  // x^3 sin(1/x), critical points accumulating at 0
Objective kinked_valley();      // 100 (y - |x|)^2 + |1 - x|, minimum at (1, 1)
Objective bukin6();             // 100 sqrt|y - x^2/100| + |x + 10|/100, minimum at (-10, 1)
Objective schaffer2();          // ridge-and-ring surface, minimum 0 at the origin

/* ---- smooth benchmark functions with analytic gradient and Hessian ---- */

Objective ackley(int dim);     // exponential well, global minimum 0 at the origin
Objective rastrigin(int dim);  // cosine egg-crate over a paraboloid, A = 10
Objective beale();             // classic two-dimensional valley, minimum at (3, 1/2)
Objective griewank(int dim);   // product-of-cosines well, global minimum 0 at the origin

/* ---- degenerate-saddle functions (analytic derivatives) ---- */

Objective monkey_saddle();       // x^3 - 3 x y^2
Objective gutter_saddle();       // x^2 y + y^2
Objective quartic_form();        // sum_ij q_ij x_i^2 x_j^2 for a fixed indefinite q
Objective gutter_line_saddle();  // (x^2 y + y^2) t, saddles all along {x = y = 0}

/* ---- planar bead-chain potential ---- */

/* Species along the chain: +1 (type A) attracts its own kind strongly,
   -1 (type B) weakly; unlike pairs repel at long range. */
struct ProteinChain {
  std::vector<int> species;
  static ProteinChain from_string(const std::string& seq);  // e.g. "ABBBABABAB"
  int size() const { return static_cast<int>(species.size()); }
};

/* Lennard-Jones coupling strength for a species pair: AA 1, BB 1/2, AB -1/2. */
double pair_coupling(int a, int b);

/* Bending plus pairwise 12-6 energy of the unit-link chain, parameterized by
   the n-2 interior turning angles. Returns inf when two beads collide. */
double protein_energy(const ProteinChain& chain, const Vector& angles);

Objective protein_objective(const ProteinChain& chain);

/* ---- mini-batch Griewank with per-sample scale noise ---- */

/* One frozen batch: value(x) averages the Griewank variant with each scale
   factor xi drawn from N(1, sigma^2). sigma = 0 means every xi is exactly 1,
   which reduces to the deterministic function. */
struct StochasticGriewankBatch {
  int dim = 10;
  double sigma = 1.0;
  std::vector<double> xi;

  double value(const Vector& x) const;
};

StochasticGriewankBatch draw_griewank_batch(std::mt19937_64& rng, double sigma,
                                            int batch_size, int dim = 10);
StochasticGriewankBatch draw_griewank_batch(std::uint64_t seed, double sigma,
                                            int batch_size, int dim = 10);

Objective stochastic_griewank_objective(const StochasticGriewankBatch& batch);

/* Every registered problem with its published starts, known optima, and tags. */
const std::vector<ProblemSpec>& benchmark_suite();

/* Lookup by objective name; throws std::out_of_range for unknown names. */
const ProblemSpec& find_problem(const std::string& name);

}  // namespace qnbt
