#include "koopman/representation.hpp"

#include <numbers>

#include "support.hpp"

using namespace koopman;

namespace {

CMatrix samples_of(const Trajectory& t) { return t.states().transpose().cast<Complex>(); }

ObservableDictionary quadratic_library() {
  ObservableDictionary d;
  d.add(monomial_observable("1", {0, 0}));
  d.add(monomial_observable("x", {1, 0}));
  d.add(monomial_observable("y", {0, 1}));
  d.add(monomial_observable("x^2", {2, 0}));
  d.add(monomial_observable("xy", {1, 1}));
  d.add(monomial_observable("y^2", {0, 2}));
  return d;
}

CVector vec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const Complex& z : v) out[i++] = z;
  return out;
}

}  // namespace

TEST_CASE("central_difference4") {
  CMatrix s(7, 1);
  for (int k = 0; k < 7; ++k) s(k, 0) = std::pow(0.1 * k, 3);
  const CMatrix d = central_difference4(s, 0.1);
  REQUIRE(d.rows() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(d(k, 0) - 3.0 * std::pow(0.1 * (k + 2), 2)) <= 1e-12);
}

TEST_CASE("representation_residual") {
  SUBCASE("torus rotation is linear in z1, z2") {
    const double w1 = 0.4, w2 = 1.3;
    const Trajectory t = integrate(SystemSpec::create(SystemKind::torus_rotation, {{"omega1", w1}, {"omega2", w2}}),
                                   test::state({0.1, 0.2}), 0.0, 50);
    ObservableDictionary d;
    d.add(angle_observable("z1", {1, 0}));
    d.add(angle_observable("z2", {0, 1}));
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 0) = std::polar(1.0, w1);
    A(1, 1) = std::polar(1.0, w2);
    const CMatrix F = evaluate_dictionary(d, t).F;
    CHECK(representation_residual(RepresentationModel::linear({"z1", "z2"}, A), F) <= 1e-13);

    // Reordering the observables together with the model changes nothing.
    CMatrix swapped(F.rows(), 2);
    swapped << F.col(1), F.col(0);
    CMatrix B = CMatrix::Zero(2, 2);
    B(0, 0) = A(1, 1);
    B(1, 1) = A(0, 0);
    CHECK(representation_residual(RepresentationModel::linear({"z2", "z1"}, B), swapped) ==
          doctest::Approx(representation_residual(RepresentationModel::linear({"z1", "z2"}, A), F)));
  }
  SUBCASE("free particle: exact model and the static model") {
    const double dt = 0.01;
    const Trajectory t = integrate(SystemSpec::create(SystemKind::free_particle), test::state({0.5, 2.0}), dt, 200);
    const CMatrix f = samples_of(t);
    RepresentationModel exact = RepresentationModel::from_map({"x", "p"}, [](const CVector& v) { return vec({v[1], 0.0}); });
    exact.continuous_time = true;
    CHECK(representation_residual(exact, f, dt) <= 1e-10);
    RepresentationModel frozen = RepresentationModel::from_map({"x", "p"}, [](const CVector&) { return vec({0.0, 0.0}); });
    frozen.continuous_time = true;
    const double scale = f.rowwise().norm().maxCoeff();
    CHECK(representation_residual(frozen, f, dt) == doctest::Approx(2.0 / scale).epsilon(1e-9));
    CHECK_THROWS_AS(representation_residual(frozen, f, 0.0), UsageError);
  }
  SUBCASE("discrete identity model on a shift") {
    const double dt = 0.1;
    const Trajectory t = integrate(SystemSpec::create(SystemKind::free_particle), test::state({0.0, 1.0}), dt, 10);
    const CMatrix f = samples_of(t);
    const auto id = RepresentationModel::from_map({"x", "p"}, [](const CVector& v) { return v; });
    CHECK(representation_residual(id, f) == doctest::Approx(dt / f.rowwise().norm().maxCoeff()).epsilon(1e-9));
  }
}

TEST_CASE("faithfulness_estimate") {
  std::mt19937_64 gen(41);
  const RMatrix states = test::random_real(60, 2, gen);
  SUBCASE("identity features") {
    const auto r = faithfulness_estimate(states.cast<Complex>(), states);
    CHECK(r.found);
    CHECK(r.score == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("one coordinate is not faithful, adding the other is") {
    const double one = faithfulness_estimate(states.leftCols(1).cast<Complex>(), states).score;
    const double both = faithfulness_estimate(states.cast<Complex>(), states).score;
    CHECK(one < 0.5);
    CHECK(both >= one);
    CMatrix more(60, 3);
    more << states.cast<Complex>(), states.col(0).array().square().matrix().cast<Complex>();
    CHECK(faithfulness_estimate(more, states).score >= both);
  }
  SUBCASE("complex entries count as two coordinates") {
    CMatrix z(60, 1);
    for (Eigen::Index k = 0; k < 60; ++k) z(k, 0) = Complex(states(k, 0), states(k, 1));
    CHECK(faithfulness_estimate(z, states).score == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("pendulum energy is constant along an orbit") {
    const auto spec = SystemSpec::create(SystemKind::pendulum);
    const Trajectory t = integrate(spec, test::state({2.5, 0.0}), 1e-3, 500);
    CMatrix H(static_cast<Eigen::Index>(t.size()), 1);
    for (std::size_t k = 0; k < t.size(); ++k) H(static_cast<Eigen::Index>(k), 0) = hamiltonian(t.state(k), spec.param("g"), spec.param("l"));
    CHECK(faithfulness_estimate(H, t.states().transpose()).score <= 1e-8);
  }
  SUBCASE("duplicates only") {
    const RMatrix same = RMatrix::Ones(4, 2);
    CHECK(!faithfulness_estimate(same.cast<Complex>(), same).found);
  }
}

TEST_CASE("conjugacy_check") {
  const double dt = 0.05;
  const VectorMap G = [dt](const CVector& g) {
    return vec({std::cos(dt) * g[0] + std::sin(dt) * g[1], -std::sin(dt) * g[0] + std::cos(dt) * g[1]});
  };
  const VectorMap h = [](const CVector& g) { return vec({g[0] + Complex(0, 1) * g[1]}); };
  const VectorMap h_inv = [](const CVector& f) { return vec({f[0].real(), f[0].imag()}); };
  std::mt19937_64 gen(42);
  std::vector<CVector> samples;
  for (int k = 0; k < 20; ++k) samples.push_back(test::random_real(2, 1, gen).cast<Complex>());

  SUBCASE("identity") {
    const VectorMap id = [](const CVector& v) { return v; };
    CHECK(conjugacy_check(G, G, id, id, samples) == 0.0);
  }
  SUBCASE("mass-spring (x, p) and x + ip") {
    const VectorMap F = [dt](const CVector& f) { return CVector(std::polar(1.0, -dt) * f); };
    CHECK(conjugacy_check(G, F, h, h_inv, samples) <= 1e-10);
  }
  SUBCASE("wrong direction of rotation") {
    const VectorMap F = [dt](const CVector& f) { return CVector(std::polar(1.0, dt) * f); };
    CHECK(conjugacy_check(G, F, h, h_inv, samples) == doctest::Approx(2.0 * std::sin(dt)).epsilon(1e-9));
  }
  SUBCASE("non-invertible h") {
    const VectorMap lossy = [](const CVector& g) { return vec({g[0]}); };
    const VectorMap back = [](const CVector& f) { return vec({f[0], 0.0}); };
    CHECK_THROWS_AS(conjugacy_check(G, G, lossy, back, samples), PreconditionError);
  }
}

TEST_CASE("sindy") {
  RMatrix B(2, 2);
  B << 0.9, 0.2, -0.1, 0.8;
  const Trajectory t = integrate(test::linear_map_spec(B), test::state({1.0, 0.5}), 0.0, 40);

  SUBCASE("linear map from a quadratic library") {
    const RepresentationModel m = sindy_fit(t, quadratic_library());
    CMatrix expected = CMatrix::Zero(6, 2);
    expected.block(1, 0, 2, 2) = B.transpose().cast<Complex>();
    CHECK((m.C - expected).norm() <= 1e-10);
    CHECK(m.iterations == 1);
    CHECK(m.residual <= 1e-12);
    CHECK(!m.continuous_time);
  }
  SUBCASE("threshold 0 is plain least squares") {
    const ObservableDictionary lib = quadratic_library();
    const CMatrix Theta = evaluate_dictionary(lib, t).F;
    std::mt19937_64 gen(43);
    const CMatrix Y = test::random_complex(Theta.rows(), 2, gen);
    const auto [C, iterations] = sequential_thresholded_lsq(Theta, Y, {0.0, false, 20});
    const CMatrix ls = Theta.colPivHouseholderQr().solve(Y);
    CHECK(iterations == 0);
    CHECK((C - ls).norm() <= 1e-12 * ls.norm());
  }
  SUBCASE("everything thresholded away") {
    CHECK_THROWS_AS(sindy_fit(t, quadratic_library(), {1.5, true, 20}), DegenerateError);
  }
  SUBCASE("flows use derivatives") {
    const Trajectory f = integrate(SystemSpec::create(SystemKind::free_particle), test::state({0.0, 1.5}), 0.01, 100);
    ObservableDictionary lib;
    lib.add(monomial_observable("x", {1, 0}));
    lib.add(monomial_observable("p", {0, 1}));
    lib.add(monomial_observable("x^2", {2, 0}));
    const RepresentationModel m = sindy_fit(f, lib);
    CHECK(m.continuous_time);
    CHECK(std::abs(m.C(1, 0) - 1.0) <= 1e-8);
    CHECK(m.C.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(sequential_thresholded_lsq(CMatrix::Ones(3, 2), CMatrix::Ones(4, 1), {}), SizeError);
    CHECK_THROWS_AS(sequential_thresholded_lsq(CMatrix::Ones(3, 2), CMatrix::Ones(3, 1), {-1.0, false, 20}), UsageError);
  }
}

TEST_CASE("stability_certificate") {
  CMatrix phi(1, 5);
  phi << 1.0, 0.5, 0.1, 1e-5, 0.0;
  const std::vector<Complex> stable{-1.0, Complex(-2.0, 3.0)};
  CMatrix two(2, 5);
  two << phi, phi;

  CHECK(stability_certificate(stable, two, 0.5).certified);
  const auto unstable = stability_certificate(std::vector<Complex>{-1.0, 0.1}, two, 1e-9);
  CHECK(!unstable.certified);
  CHECK(unstable.failed == "spectrum");
  CHECK(stability_certificate(std::vector<Complex>{-1.0, 0.0}, two, 0.5).failed == "spectrum");
  CHECK(stability_certificate(stable, two, 1e-6).failed == "faithfulness");
  CMatrix away = CMatrix::Constant(2, 5, 1.0);
  const auto v = stability_certificate(stable, away, 0.5);
  CHECK(v.failed == "zero_in_range");
  CHECK(!v.message.empty());

  SUBCASE("discrete-time triples") {
    SpectralTriple t;
    t.eigenvalues = {0.5, Complex(0.0, 0.9)};
    t.eigenfunction_samples = two;
    CHECK(stability_certificate(t, 0.0, 0.5).certified);
    CHECK(stability_certificate(t, 0.1, 0.5).certified);
    t.eigenvalues[0] = 1.0;
    CHECK(stability_certificate(t, 0.0, 0.5).failed == "spectrum");
  }
}

TEST_CASE("efficiency_heuristic") {
  std::mt19937_64 gen(44);
  const RMatrix states = test::random_real(80, 2, gen);
  const auto full = efficiency_heuristic(states.cast<Complex>(), states, 8, 4);
  CHECK(full.min_singular_ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!full.dependent);
  CMatrix repeated(80, 2);
  repeated << states.col(0).cast<Complex>(), states.col(0).cast<Complex>();
  CHECK(efficiency_heuristic(repeated, states, 8, 4).dependent);
  CMatrix three(80, 3);
  three << states.cast<Complex>(), states.col(0).cast<Complex>();
  CHECK(efficiency_heuristic(three, states, 8, 4).dependent);
  CHECK_THROWS_AS(efficiency_heuristic(repeated, states, 2, 1), SizeError);
}
