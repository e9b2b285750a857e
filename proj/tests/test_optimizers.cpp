#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qnbt/optimizers.hpp"
#include "qnbt/problems.hpp"

using namespace qnbt;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

/* f(x, y) = x^2 - y^2/2: one positive and one negative curvature direction. */
Objective mixed_quadratic() {
  return Objective("mixed-quadratic", 2,
                   [](const Vector& v) { return v[0] * v[0] - 0.5 * v[1] * v[1]; })
      .with_gradient([](const Vector& v) { return vec2(2.0 * v[0], -v[1]); })
      .with_hessian([](const Vector&) {
        Matrix h = Matrix::Zero(2, 2);
        h.diagonal() << 2.0, -1.0;
        return SymmetricMatrix(h);
      });
}

Objective scaled_parabola(double a) {
  return Objective("parabola", 1, [a](const Vector& v) { return a * v[0] * v[0]; })
      .with_gradient([a](const Vector& v) { return vec1(2.0 * a * v[0]); })
      .with_hessian([a](const Vector&) { return SymmetricMatrix(Matrix::Constant(1, 1, 2.0 * a)); });
}

}  // namespace

TEST_CASE("algorithm names round-trip, case- and hyphen-insensitively") {
  const Algorithm all[] = {Algorithm::NQN, Algorithm::NQN_B, Algorithm::NQN_B_S, Algorithm::V1,
                           Algorithm::V2,  Algorithm::V3,    Algorithm::V4,      Algorithm::Newton,
                           Algorithm::UTB_GD};
  for (Algorithm a : all) {
    auto back = algorithm_from_string(to_string(a));
    REQUIRE(back.has_value());
    CHECK(*back == a);
  }
  CHECK(algorithm_from_string("nqn_b") == Algorithm::NQN_B);
  CHECK(algorithm_from_string("NQN-B-S") == Algorithm::NQN_B_S);
  CHECK(algorithm_from_string("newton") == Algorithm::Newton);
  CHECK(algorithm_from_string("utb-gd") == Algorithm::UTB_GD);
  CHECK(algorithm_from_string("v2") == Algorithm::V2);
  CHECK_FALSE(algorithm_from_string("gradient-descent").has_value());
  CHECK_FALSE(algorithm_from_string("").has_value());
}

TEST_CASE("variant trait table") {
  auto expect = [](Algorithm a, DeltaRule rule, bool cap, SearchRule search) {
    const VariantTraits t = variant_traits(a);
    CHECK(t.delta_rule == rule);
    CHECK(t.cap_step == cap);
    CHECK(t.search == search);
  };
  expect(Algorithm::NQN, DeltaRule::Determinant, false, SearchRule::None);
  expect(Algorithm::NQN_B, DeltaRule::MinAbsEigenvalue, true, SearchRule::Armijo);
  expect(Algorithm::NQN_B_S, DeltaRule::MinAbsEigenvalue, false, SearchRule::Armijo);
  expect(Algorithm::V1, DeltaRule::Determinant, true, SearchRule::WeakDescent);
  expect(Algorithm::V2, DeltaRule::Determinant, true, SearchRule::Armijo);
  expect(Algorithm::V3, DeltaRule::Determinant, false, SearchRule::WeakDescent);
  expect(Algorithm::V4, DeltaRule::Determinant, false, SearchRule::Armijo);
  CHECK_THROWS_AS(variant_traits(Algorithm::Newton), std::invalid_argument);
  CHECK_THROWS_AS(variant_traits(Algorithm::UTB_GD), std::invalid_argument);
}

TEST_CASE("termination labels") {
  CHECK(to_string(Termination::GradTol) == "grad_tol");
  CHECK(to_string(Termination::MaxIters) == "max_iters");
  CHECK(to_string(Termination::NonFinite) == "non_finite");
  CHECK(to_string(Termination::ScheduleExhausted) == "schedule_exhausted");
  CHECK(to_string(Termination::LineSearchFloor) == "line_search_floor");
  CHECK(to_string(Termination::SingularHessian) == "singular_hessian");
}

TEST_CASE("armijo backtracking halves until the decrease matches the slope") {
  Objective f = scaled_parabola(1.0);
  // x = 1, d = 4, slope = <d, f'(1)> = 8: gamma 1 and 1/2 fail, 1/4 lands on 0
  LineSearchResult r = armijo_search(f, vec1(1.0), vec1(4.0), 8.0);
  CHECK(r.gamma == 0.25);
  CHECK(r.halvings == 2);
  CHECK_FALSE(r.hit_floor);
  CHECK(r.f_trial == 0.0);

  // the weak rule only needs non-increase: f(1 - 2) = f(-1) = f(1) accepted at once
  LineSearchResult w = weak_descent_search(f, vec1(1.0), vec1(2.0));
  CHECK(w.gamma == 1.0);
  CHECK(w.halvings == 0);
  CHECK(w.f_trial == 1.0);
}

TEST_CASE("backtracking floor: rejection all the way down") {
  // moving against the gradient of a linear function can never decrease it
  Objective f = Objective("line", 1, [](const Vector& x) { return x[0]; });
  LineSearchResult r = armijo_search(f, vec1(0.0), vec1(-1.0), -1.0);
  CHECK(r.hit_floor);
  CHECK(r.halvings == 60);
  CHECK(r.gamma == std::ldexp(1.0, -60));

  LineSearchResult short_leash = armijo_search(f, vec1(0.0), vec1(-1.0), -1.0, 5);
  CHECK(short_leash.hit_floor);
  CHECK(short_leash.halvings == 5);
  CHECK(short_leash.gamma == std::ldexp(1.0, -5));
}

TEST_CASE("non-finite trial values count as rejections") {
  Objective f = Objective("guarded", 1, [](const Vector& x) {
    return x[0] >= 0.0 ? x[0] * x[0] : kNaN;
  });
  // gamma = 1 probes f(-4) = NaN; gamma = 1/2 probes f(0) and accepts
  LineSearchResult r = armijo_search(f, vec1(4.0), vec1(8.0), 64.0);
  CHECK(r.gamma == 0.5);
  CHECK(r.halvings == 1);
  CHECK(r.f_trial == 0.0);
}

TEST_CASE("single family step: uncapped raw variant") {
  Objective f = mixed_quadratic();
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN;
  auto [x_next, rec] = nqn_family_step(f, vec2(1.0, -1.0), cfg);
  // H = diag(2, -1) is invertible, so delta_0 = 0 is taken; w flips the negative
  // eigendirection: w = (1, 1), no cap, no search
  CHECK(rec.delta_index == 0);
  CHECK(rec.gamma == 1.0);
  CHECK(*rec.w_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(x_next[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(x_next[1] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(rec.f == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(rec.grad_norm == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single family step: quantitative shift rule moves past delta_0") {
  Objective f = mixed_quadratic();
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN_B;
  // ||g||^2 = 5, kappa = 1/2: minsp 1 at delta_0 misses 2.5, delta_1 shifts to diag(7, 4)
  auto [x_next, rec] = nqn_family_step(f, vec2(1.0, -1.0), cfg);
  CHECK(rec.delta_index == 1);
  CHECK(*rec.w_norm == doctest::Approx(std::hypot(2.0 / 7.0, 0.25)).epsilon(1e-12));
  CHECK(rec.gamma == 1.0);  // short step, full length accepted
  CHECK(rec.halvings == 0);
  CHECK(x_next[0] == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
  CHECK(x_next[1] == doctest::Approx(-1.25).epsilon(1e-12));
}

TEST_CASE("single family step: cap rescales long directions to unit length") {
  Objective f = mixed_quadratic();
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::V1;
  const Vector x0 = vec2(1.0, -1.0);
  auto [x_next, rec] = nqn_family_step(f, x0, cfg);
  CHECK(rec.delta_index == 0);
  CHECK(*rec.w_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));  // uncapped length
  CHECK(rec.gamma == 1.0);
  CHECK((x0 - x_next).norm() == doctest::Approx(1.0).epsilon(1e-12));  // actual move is capped
}

TEST_CASE("family step validates the gradient") {
  Objective f = mixed_quadratic();
  OptimizerConfig cfg;
  CHECK_THROWS_AS(nqn_family_step(f, vec2(0.0, 0.0), cfg), std::invalid_argument);
}

TEST_CASE("classical step solves the unmodified system") {
  Objective f = mixed_quadratic();
  const Vector x_next = newton_step(f, vec2(1.0, -1.0));
  // converges straight to the saddle at the origin
  CHECK(x_next.norm() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  Objective cubic = Objective("cubic", 1, [](const Vector& v) { return v[0] * v[0] * v[0]; })
                        .with_gradient([](const Vector& v) { return vec1(3.0 * v[0] * v[0]); })
                        .with_hessian([](const Vector& v) {
                          return SymmetricMatrix(Matrix::Constant(1, 1, 6.0 * v[0]));
                        });
  CHECK_THROWS_AS(newton_step(cubic, vec1(0.0)), SingularHessian);

  // the singularity floor is relative to the spectral radius
  Objective wide = Objective("wide", 2, [](const Vector& v) { return v.squaredNorm(); })
                       .with_hessian([](const Vector&) {
                         Matrix h = Matrix::Zero(2, 2);
                         h.diagonal() << 1e-3, 1e14;
                         return SymmetricMatrix(h);
                       });
  CHECK_THROWS_AS(newton_step(wide, vec2(1.0, 1.0)), SingularHessian);
}

TEST_CASE("two-way backtracking step: accept, grow, shrink") {
  GDConfig cfg;

  // f = x^2/2 from 3: rate 1 hits the minimum exactly and the cap stops growth
  auto [x1, lr1] = utb_gd_step(scaled_parabola(0.5), vec1(3.0), 1.0, cfg);
  CHECK(x1[0] == 0.0);
  CHECK(lr1 == 1.0);

  // f = 50 x^2 from 1: rate must shrink by beta^13 before the test passes
  auto [x2, lr2] = utb_gd_step(scaled_parabola(50.0), vec1(1.0), 1.0, cfg);
  CHECK(lr2 == doctest::Approx(std::pow(0.7, 13)).epsilon(1e-12));
  CHECK(x2[0] == doctest::Approx(1.0 - std::pow(0.7, 13) * 100.0).epsilon(1e-10));

  // f = 0.005 x^2 from 1: ||g|| = 0.01 lifts the cap to 10 and the rate grows
  auto [x3, lr3] = utb_gd_step(scaled_parabola(0.005), vec1(1.0), 1.0, cfg);
  CHECK(lr3 == doctest::Approx(std::pow(0.7, -6)).epsilon(1e-12));
  CHECK(x3[0] == doctest::Approx(1.0 - std::pow(0.7, -6) * 0.01).epsilon(1e-12));

  CHECK_THROWS_AS(utb_gd_step(scaled_parabola(1.0), vec1(0.0), 1.0, cfg), std::invalid_argument);
}

TEST_CASE("run loop: record zero, gradient stop, iteration cap") {
  Objective f = find_problem("beale").objective;
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::V2;

  // exactly at the minimum: the gradient test fires before any step
  RunReport at_min = run(f, vec2(3.0, 0.5), cfg);
  CHECK(at_min.termination == Termination::GradTol);
  REQUIRE(at_min.trace.size() == 1);
  CHECK(at_min.iterations() == 0);
  CHECK(at_min.trace[0].index == 0);
  CHECK(at_min.trace[0].grad_norm == 0.0);
  CHECK_FALSE(at_min.trace[0].gamma.has_value());       // record 0 carries no step metadata
  CHECK_FALSE(at_min.trace[0].delta_index.has_value());

  // gradient tolerance is checked before the iteration cap
  cfg.max_iters = 0;
  CHECK(run(f, vec2(3.0, 0.5), cfg).termination == Termination::GradTol);

  RunReport capped = run(f, vec2(2.0, 0.0), cfg);
  CHECK(capped.termination == Termination::MaxIters);
  CHECK(capped.trace.size() == 1);

  cfg.max_iters = -1;
  CHECK_THROWS_AS(run(f, vec2(2.0, 0.0), cfg), std::invalid_argument);

  OptimizerConfig wrong;
  wrong.algorithm = Algorithm::UTB_GD;
  CHECK_THROWS_AS(run(f, vec2(2.0, 0.0), wrong), std::invalid_argument);
}

TEST_CASE("run loop: divergence to overflow ends with a non-finite record") {
  // the raw uncapped variant on x^3 from -1 multiplies |x| by 1.5 every step
  Objective cubic = Objective("cubic", 1, [](const Vector& v) { return v[0] * v[0] * v[0]; })
                        .with_gradient([](const Vector& v) { return vec1(3.0 * v[0] * v[0]); })
                        .with_hessian([](const Vector& v) {
                          return SymmetricMatrix(Matrix::Constant(1, 1, 6.0 * v[0]));
                        });
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN;
  RunReport rep = run(cubic, vec1(-1.0), cfg);
  CHECK(rep.termination == Termination::NonFinite);
  REQUIRE(rep.trace.size() >= 2);
  const IterationRecord& last = rep.final_record();
  // the squared gradient norm overflows before f itself does (|g|^2 ~ x^4 vs f ~ x^3),
  // so the terminal record still has a finite f but an infinite gradient norm
  CHECK(std::isfinite(last.f));
  CHECK(last.f < -1e200);
  CHECK(last.grad_norm == std::numeric_limits<double>::infinity());
  CHECK(last.gamma == 1.0);                     // the step that got there is still described
  const IterationRecord& prev = rep.trace[rep.trace.size() - 2];
  CHECK(std::isfinite(prev.f));
  CHECK(std::isfinite(prev.grad_norm));
}

TEST_CASE("run loop: schedule exhaustion surfaces as a termination reason") {
  // flat second coordinate: H = diag(2, 0) stays singular under a zero-only schedule
  Objective flat = Objective("half-flat", 2, [](const Vector& v) { return v[0] * v[0]; })
                       .with_gradient([](const Vector& v) { return vec2(2.0 * v[0], 0.0); })
                       .with_hessian([](const Vector&) {
                         Matrix h = Matrix::Zero(2, 2);
                         h(0, 0) = 2.0;
                         return SymmetricMatrix(h);
                       });
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN;
  cfg.schedule = DeltaSchedule({0.0});
  RunReport rep = run(flat, vec2(1.0, 1.0), cfg);
  CHECK(rep.termination == Termination::ScheduleExhausted);
  CHECK(rep.trace.size() == 1);  // failed before producing a second iterate
}

TEST_CASE("run loop: line-search floor is accepted and the run continues") {
  // constant objective with fabricated derivatives: no step can satisfy the
  // Armijo decrease, so every iteration bottoms out at gamma = 2^-60
  Objective liar = Objective("liar", 1, [](const Vector&) { return 0.0; })
                       .with_gradient([](const Vector&) { return vec1(1.0); })
                       .with_hessian([](const Vector&) {
                         return SymmetricMatrix(Matrix::Constant(1, 1, 1.0));
                       });
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::V4;
  cfg.max_iters = 3;
  RunReport rep = run(liar, vec1(0.0), cfg);
  CHECK(rep.termination == Termination::MaxIters);  // never LineSearchFloor
  REQUIRE(rep.trace.size() == 4);
  for (std::size_t k = 1; k < rep.trace.size(); ++k) {
    CHECK(rep.trace[k].hit_floor);
    CHECK(rep.trace[k].halvings == 60);
    CHECK(rep.trace[k].gamma == std::ldexp(1.0, -60));
  }
  // bookkeeping: 4 iterate values + 3 searches of (1 anchor + 61 trials)
  CHECK(rep.counts.values == 4 + 3 * 62);
  CHECK(rep.counts.gradients == 4);
  CHECK(rep.counts.hessians == 3);
}

TEST_CASE("run loop: resample hook is called once per iteration, in order") {
  Objective quad = scaled_parabola(1.0).with_fresh_counts();
  std::vector<int> calls;
  ResampleHook hook = [&](int k) {
    calls.push_back(k);
    return quad;
  };
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::V2;
  cfg.max_iters = 2;
  RunReport rep = run(quad, vec1(5.0), cfg, hook);
  CHECK(rep.termination == Termination::MaxIters);
  REQUIRE(rep.trace.size() == 3);
  REQUIRE(calls.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(calls[k] == k);
  // all hook batches share the quad counter block, so the aggregated totals
  // must match it exactly
  const EvalCounts direct = quad.counts();
  CHECK(rep.counts.values == direct.values);
  CHECK(rep.counts.gradients == direct.gradients);
  CHECK(rep.counts.hessians == direct.hessians);
}

TEST_CASE("gradient-descent run: stored rate metadata and convergence") {
  GDConfig cfg;
  cfg.max_iters = 1;
  RunReport one = run(scaled_parabola(50.0), vec1(1.0), cfg);
  REQUIRE(one.trace.size() == 2);
  REQUIRE(one.trace[1].gamma.has_value());
  CHECK(*one.trace[1].gamma == doctest::Approx(std::pow(0.7, 13)).epsilon(1e-12));
  CHECK(one.trace[1].halvings == 13);
  CHECK(one.trace[1].w_norm == 100.0);  // the direction is the raw gradient
  CHECK_FALSE(one.trace[1].hit_floor);

  cfg.max_iters = 10000;
  RunReport full = run(scaled_parabola(0.5), vec1(3.0), cfg);
  CHECK(full.termination == Termination::GradTol);
  CHECK(full.final_record().grad_norm <= 1e-10);
  CHECK(full.final_record().f <= 1e-20);
}

TEST_CASE("descent property holds along a full minimizing run") {
  Objective f = find_problem("beale").objective;
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN_B;
  RunReport rep = run(f, vec2(2.8, 0.45), cfg);
  CHECK(rep.termination == Termination::GradTol);
  for (std::size_t k = 1; k < rep.trace.size(); ++k)
    CHECK(rep.trace[k].f <= rep.trace[k - 1].f);
  CHECK(rep.final_record().f < 1e-20);
}

TEST_CASE("convergence order estimation") {
  const Vector star = vec1(0.0);
  auto rec_at = [](double e) {
    IterationRecord r;
    r.x = vec1(e);
    return r;
  };

  // squared-error decay: slope exactly 2 on the log-log pairs
  std::vector<IterationRecord> quadratic = {rec_at(1e-3), rec_at(1e-6), rec_at(1e-12)};
  auto order = convergence_order(quadratic, star);
  REQUIRE(order.has_value());
  CHECK(*order == doctest::Approx(2.0).epsilon(1e-9));

  // geometric decay: slope 1
  std::vector<IterationRecord> linear = {rec_at(1e-3), rec_at(1e-4), rec_at(1e-5), rec_at(1e-6)};
  auto lin = convergence_order(linear, star);
  REQUIRE(lin.has_value());
  CHECK(*lin == doctest::Approx(1.0).epsilon(1e-9));

  // a stalled sequence has zero abscissa variance: undefined
  std::vector<IterationRecord> stalled = {rec_at(1e-6), rec_at(1e-6), rec_at(1e-6)};
  CHECK_FALSE(convergence_order(stalled, star).has_value());

  // errors outside (1e-14, 1e-2) are discarded; too few pairs remain
  std::vector<IterationRecord> wild = {rec_at(0.5), rec_at(1e-3), rec_at(1e-16)};
  CHECK_FALSE(convergence_order(wild, star).has_value());
  CHECK_FALSE(convergence_order({}, star).has_value());
}

TEST_CASE("projective distance") {
  CHECK(projective_distance(vec1(0.0), vec1(0.0)) == 0.0);
  CHECK(projective_distance(vec2(1.3, -0.2), vec2(1.3, -0.2)) == doctest::Approx(0.0).scale(1.0));
  // antipodal unit points: cosine (1 - 1) / 2 = 0
  CHECK(projective_distance(vec1(1.0), vec1(-1.0)) == doctest::Approx(std::acos(0.0)));
  // two far-away iterates pointing the same way are projectively close
  CHECK(projective_distance(vec1(1e8), vec1(2e8)) < 1e-7);
  // and opposite rays approach the maximal separation pi
  CHECK(projective_distance(vec1(1e8), vec1(-1e8)) == doctest::Approx(std::acos(-1.0)).epsilon(1e-6));
  CHECK_THROWS_AS(projective_distance(vec1(1.0), vec2(1.0, 2.0)), std::invalid_argument);
}

TEST_CASE("projective steps collapse once a run settles") {
  // even with the tolerance off, the quadratic tail snaps onto the minimizer in a
  // handful of steps; the first move is macroscopic, the final ones are below 1e-6
  Objective f = find_problem("beale").objective;
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN_B;
  cfg.grad_tol = 0.0;
  cfg.max_iters = 40;
  RunReport rep = run(f, vec2(2.8, 0.45), cfg);
  REQUIRE(rep.trace.size() >= 6);
  CHECK(projective_distance(rep.trace[0].x, rep.trace[1].x) > 1e-3);
  for (std::size_t k = rep.trace.size() - 2; k < rep.trace.size(); ++k)
    CHECK(projective_distance(rep.trace[k - 1].x, rep.trace[k].x) < 1e-6);
}
