#include "koopman/finite_section.hpp"

#include "koopman/dictionary.hpp"
#include "support.hpp"

using namespace koopman;

namespace {

// Finite section of a scalar map from samples x_l, with dictionary x^p, p in powers.
FiniteSectionMatrix scalar_section(const std::vector<double>& xs, double (*T)(double), const std::vector<int>& powers) {
  const auto m = static_cast<Eigen::Index>(xs.size());
  const auto n = static_cast<Eigen::Index>(powers.size());
  CMatrix F(m, n), Fp(m, n);
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < n; ++j) {
    names.push_back("x^" + std::to_string(powers[j]));
    for (Eigen::Index l = 0; l < m; ++l) {
      F(l, j) = std::pow(xs[l], powers[j]);
      Fp(l, j) = std::pow(T(xs[l]), powers[j]);
    }
  }
  return finite_section_from_samples(F, Fp, names);
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

ObservableDictionary torus_dict() {
  ObservableDictionary d;
  d.add(angle_observable("z1", {1, 0}));
  d.add(angle_observable("z2", {0, 1}));
  d.add(angle_observable("z1z2", {1, 1}));
  return d;
}

}  // namespace

TEST_CASE("evaluate_dictionary") {
  SUBCASE("constant") {
    ObservableDictionary d;
    d.add(monomial_observable("one", {0}));
    const Trajectory t = integrate(SystemSpec::create(SystemKind::circle_rotation), test::state({0.2}), 0.0, 9);
    const CMatrix F = evaluate_dictionary(d, t).F;
    CHECK(F.rows() == 10);
    CHECK((F.array() == Complex(1.0, 0.0)).all());
  }
  SUBCASE("unit modulus on the circle") {
    ObservableDictionary d;
    d.add(angle_observable("z", {1}));
    d.add(angle_observable("z2", {2}));
    const Trajectory t = integrate(SystemSpec::create(SystemKind::circle_rotation), test::state({0.2}), 0.0, 50);
    const CMatrix F = evaluate_dictionary(d, t).F;
    CHECK((F.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-15);
  }
  SUBCASE("standard map, direct formula") {
    ObservableDictionary d;
    d.add(sin_observable("sin2pix", {1, 0}));
    d.add(cos_observable("cos2piy", {0, 1}));
    const Trajectory t = integrate(SystemSpec::create(SystemKind::standard_map), test::state({0.1, 0.3}), 0.0, 20);
    const CMatrix F = evaluate_dictionary(d, t).F;
    for (std::size_t l = 0; l < t.size(); ++l) {
      const StateVector s = t.state(l);
      CHECK(std::abs(F(l, 0) - std::sin(2 * M_PI * s[0])) <= 1e-14);
      CHECK(std::abs(F(l, 1) - std::cos(2 * M_PI * s[1])) <= 1e-14);
    }
  }
  SUBCASE("fewer samples than entries warns") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::circle_rotation), test::state({0.2}), 0.0, 1);
    ObservableDictionary d;
    for (int k = 0; k < 4; ++k) d.add(angle_observable("z" + std::to_string(k), {k}));
    CHECK(!evaluate_dictionary(d, t).warnings.empty());
  }
  SUBCASE("domain error names the entry and the step") {
    ObservableDictionary d;
    d.add(monomial_observable("one", {0, 0}));
    d.add(monomial_observable("r^-2", {-2, 0}));
    RMatrix states(2, 3);
    states << 1.0, 0.0, 2.0, 0.0, 0.0, 0.0;
    try {
      evaluate_dictionary(d, states);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(e.observable() == "r^-2");
      CHECK(e.step() == 1);
    }
  }
  SUBCASE("names are unique") {
    ObservableDictionary d;
    d.add(monomial_observable("x", {1}));
    CHECK_THROWS_AS(d.add(monomial_observable("x", {2})), UsageError);
  }
}

TEST_CASE("dual_basis") {
  SUBCASE("orthonormal columns give the adjoint") {
    std::mt19937_64 gen(1);
    const Eigen::HouseholderQR<CMatrix> qr(test::random_complex(8, 3, gen));
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(8, 3);
    CHECK((dual_basis(Q) - Q.adjoint()).norm() <= 1e-14);
  }
  SUBCASE("single column of ones") {
    const CMatrix F = CMatrix::Ones(4, 1);
    const CMatrix G = dual_basis(F);
    CHECK((G.array() - 0.25).abs().maxCoeff() <= 1e-16);
    // Duality with the m * G normalisation: (1/m) sum f ghat = 1.
    CHECK(std::abs((F.transpose() * (4.0 * G.transpose()))(0, 0) / 4.0 - 1.0) <= 1e-15);
  }
  SUBCASE("random 50 x 3") {
    std::mt19937_64 gen(2);
    const CMatrix F = test::random_complex(50, 3, gen);
    CHECK((dual_basis(F) * F - CMatrix::Identity(3, 3)).norm() <= 1e-10);
  }
  SUBCASE("dependent entries are reported") {
    std::mt19937_64 gen(3);
    CMatrix F = test::random_complex(30, 3, gen);
    F.col(2) = 2.0 * F.col(0) - F.col(1);
    try {
      dual_basis(F);
      FAIL("expected DegenerateError");
    } catch (const DegenerateError& e) {
      CHECK(e.suspects().size() == 3);
    }
    CMatrix G = test::random_complex(30, 4, gen);
    G.col(3) = G.col(1);
    try {
      dual_basis(G);
      FAIL("expected DegenerateError");
    } catch (const DegenerateError& e) {
      CHECK(e.suspects() == std::vector<std::size_t>{1, 3});
    }
  }
}

TEST_CASE("finite_section_matrix") {
  SUBCASE("circle rotation, dict {z}") {
    const double w = 0.613;
    ObservableDictionary d;
    d.add(angle_observable("z", {1}));
    const Trajectory t = integrate(SystemSpec::create(SystemKind::circle_rotation, {{"omega", w}}), test::state({0.0}), 0.0, 10);
    const auto u = finite_section_matrix(d, t);
    REQUIRE(u.U.rows() == 1);
    CHECK(std::abs(u.U(0, 0) - std::polar(1.0, w)) <= 1e-14);
    CHECK(u.sample_count == 10);
  }
  SUBCASE("torus rotation is diagonal") {
    ObservableDictionary d;
    d.add(angle_observable("z1", {1, 0}));
    d.add(angle_observable("z2", {0, 1}));
    const Trajectory t = integrate(SystemSpec::create(SystemKind::torus_rotation), test::state({0.5, 0.1}), 0.0, 60);
    const auto u = finite_section_matrix(d, t);
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = std::polar(1.0, 1.0);
    expected(1, 1) = std::polar(1.0, std::sqrt(2.0));
    CHECK((u.U - expected).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(u.form_agreement <= 1e-10);
  }
  SUBCASE("{x, x^3} under x' = a x") {
    const double a = 0.7;
    RMatrix B(1, 1);
    B(0, 0) = a;
    ObservableDictionary d;
    d.add(monomial_observable("x", {1}));
    d.add(monomial_observable("x^3", {3}));
    const Trajectory t = integrate(test::linear_map_spec(B), test::state({1.3}), 0.0, 6);
    const auto u = finite_section_matrix(d, t);
    CHECK(std::abs(u.U(0, 0) - a) <= 1e-10);
    CHECK(std::abs(u.U(1, 1) - a * a * a) <= 1e-10);
    CHECK(std::abs(u.U(0, 1)) <= 1e-10);
    CHECK(std::abs(u.U(1, 0)) <= 1e-10);
  }
  SUBCASE("weights leave exact data unchanged") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::torus_rotation), test::state({0.5, 0.1}), 0.0, 40);
    ObservableDictionary d = torus_dict();
    RVector w(40);
    for (int l = 0; l < 40; ++l) w[l] = 1.0 + 0.5 * std::sin(l);
    const auto plain = finite_section_matrix(d, t);
    const auto weighted = finite_section_matrix(d, t, w);
    CHECK((plain.U - weighted.U).norm() <= 1e-10);
    RVector bad = w;
    bad[3] = 0.0;
    CHECK_THROWS_AS(finite_section_matrix(d, t, bad), UsageError);
  }
  SUBCASE("averaged and least-squares forms agree on noisy data") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::standard_map, {{"epsilon", 0.3}}), test::state({0.1, 0.2}), 0.0, 400);
    ObservableDictionary d;
    d.add(sin_observable("s", {1, 0}));
    d.add(cos_observable("c", {0, 1}));
    d.add(angle_observable("e", {1, 1}));
    CHECK(finite_section_matrix(d, t).form_agreement <= 1e-10);
  }
  SUBCASE("rank deficient dictionary") {
    ObservableDictionary d;
    d.add(angle_observable("z", {1}));
    d.add("z copy", [](const StateVector& s) { return std::polar(1.0, s[0]); });
    const Trajectory t = integrate(SystemSpec::create(SystemKind::circle_rotation), test::state({0.0}), 0.0, 20);
    CHECK_THROWS_AS(finite_section_matrix(d, t), DegenerateError);
  }
}

TEST_CASE("compression") {
  CMatrix M(3, 3);
  M << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const auto u = finite_section_from_samples(CMatrix::Identity(3, 3), M, {"a", "b", "c"});
  SUBCASE("full set unchanged") {
    const auto c = compression(u, {0, 1, 2});
    CHECK((c.U - u.U).norm() == 0.0);
    CHECK(c.names == u.names);
  }
  SUBCASE("indices {1, 3}") {
    const auto c = compression(u, {0, 2});
    CMatrix expected(2, 2);
    expected << 1, 3, 7, 9;
    CHECK((c.U - expected).norm() <= 1e-14);
    CHECK(c.names == std::vector<std::string>{"a", "c"});
    CHECK(c.indices == std::vector<std::size_t>{0, 2});
  }
  SUBCASE("diagonal subset") {
    const auto d = finite_section_from_samples(CMatrix::Identity(3, 3), CMatrix(CVector::LinSpaced(3, 1, 3).asDiagonal()), {"a", "b", "c"});
    const auto c = compression(d, {1});
    CHECK(std::abs(c.U(0, 0) - 2.0) <= 1e-15);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(compression(u, {}), UsageError);
    CHECK_THROWS_AS(compression(u, {3}), UsageError);
  }
  SUBCASE("composition is intersection") {
    const auto a = compression(compression(u, {0, 1}), {1, 2});
    const auto b = compression(u, {1});
    CHECK((a.U - b.U).norm() == 0.0);
    CHECK(a.indices == b.indices);
  }
}

TEST_CASE("detect_linear_subrepresentation") {
  SUBCASE("torus {z1, z2} inside {z1, z2, z1z2}") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::torus_rotation), test::state({0.5, 0.1}), 0.0, 50);
    const auto u = finite_section_matrix(torus_dict(), t);
    const auto v = detect_linear_subrepresentation(u, {0, 1});
    CHECK(v.leakage <= 1e-10);
    CHECK(v.is_linear);
    CHECK(v.A.rows() == 2);
  }
  SUBCASE("shear: x alone is not invariant") {
    RMatrix B(2, 2);
    B << 1, 1, 0, 1;
    ObservableDictionary d;
    d.add(monomial_observable("x", {1, 0}));
    d.add(monomial_observable("y", {0, 1}));
    const Trajectory t = integrate(test::linear_map_spec(B), test::state({0.3, 0.7}), 0.0, 10);
    const auto v = detect_linear_subrepresentation(finite_section_matrix(d, t), {0}, 1e-6);
    CHECK(!v.is_linear);
    CHECK(v.leakage == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("full dictionary") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::standard_map), test::state({0.3, 0.4}), 0.0, 100);
    ObservableDictionary d;
    d.add(sin_observable("s", {1, 0}));
    d.add(cos_observable("c", {0, 1}));
    const auto v = detect_linear_subrepresentation(finite_section_matrix(d, t), {0, 1});
    CHECK(v.is_linear);
    CHECK(v.leakage == 0.0);
  }
}

TEST_CASE("detect_nonlinear_representation") {
  SUBCASE("x' = x^2 with library {x^2}") {
    const auto u = scalar_section(grid(0.1, 0.9, 30), [](double x) { return x * x; }, {1, 2});
    const auto v = detect_nonlinear_representation(u, {0}, {1});
    CHECK(v.is_closed);
    REQUIRE(v.F_coeffs.rows() == 1);
    REQUIRE(v.F_coeffs.cols() == 2);
    CHECK(std::abs(v.F_coeffs(0, 0)) <= 1e-10);
    CHECK(std::abs(v.F_coeffs(0, 1) - 1.0) <= 1e-10);
    CHECK(!detect_linear_subrepresentation(u, {0}).is_linear);
  }
  SUBCASE("torus z1 is closed without any library") {
    const Trajectory t = integrate(SystemSpec::create(SystemKind::torus_rotation), test::state({0.5, 0.1}), 0.0, 50);
    ObservableDictionary d = torus_dict();
    d.add(angle_observable("z1^2", {2, 0}));
    const auto u = finite_section_matrix(d, t);
    CHECK(detect_nonlinear_representation(u, {0}, {}).is_closed);
    const auto v = detect_nonlinear_representation(u, {0}, {3});
    CHECK(v.is_closed);
    CHECK(std::abs(v.F_coeffs(0, 1)) <= 1e-10);
  }
  SUBCASE("logistic map, library {x^2}") {
    const double a = 3.2;
    static double A;
    A = a;
    const auto u = scalar_section(grid(0.05, 0.95, 40), [](double x) { return A * x * (1.0 - x); }, {1, 2, 3, 4});
    const auto v = detect_nonlinear_representation(u, {0}, {1});
    CHECK(v.is_closed);
    CHECK(std::abs(v.F_coeffs(0, 0) - a) <= 1e-8);
    CHECK(std::abs(v.F_coeffs(0, 1) + a) <= 1e-8);
  }
  SUBCASE("undeclared leakage is reported") {
    static double A = 3.2;
    const auto u = scalar_section(grid(0.05, 0.95, 40), [](double x) { return A * x * (1.0 - x); }, {1, 2, 3, 4});
    const auto v = detect_nonlinear_representation(u, {0}, {2});
    CHECK(!v.is_closed);
    REQUIRE(v.undeclared.size() == 1);
    CHECK(v.undeclared[0].name == "x^2");
    CHECK(v.undeclared[0].magnitude == doctest::Approx(3.2).epsilon(1e-8));
  }
}

TEST_CASE("spectral consistency with known spectra") {
  SUBCASE("map") {
    const auto spec = SystemSpec::create(SystemKind::torus_rotation, {{"omega1", 0.3}, {"omega2", 2.1}});
    const Trajectory t = integrate(spec, test::state({0.0, 0.0}), 0.0, 100);
    ObservableDictionary d;
    d.add(angle_observable("z1", {1, 0}));
    d.add(angle_observable("z2", {0, 1}));
    const auto u = finite_section_matrix(d, t);
    CHECK(test::match_error(known_spectrum(spec).eigenvalues, eigenvalues(u.U)) <= 1e-8);
  }
  SUBCASE("flow") {
    const double dt = 1e-3;
    const auto spec = SystemSpec::create(SystemKind::limit_cycle_polar, {{"omega", 1.0}});
    const Trajectory t = integrate(spec, test::state({2.0, 0.0}), dt, 20000);
    ObservableDictionary d;
    d.add(monomial_observable("one", {0, 0}));
    d.add(monomial_observable("r^-2", {-2, 0}));
    d.add(angle_observable("e^itheta", {0, 1}));
    d.add(angle_observable("e^-itheta", {0, -1}));
    const auto u = finite_section_matrix(d, t);
    const auto ct = continuous_time_eigenvalues(eigenvalues(u.U), dt).values;
    CHECK(test::match_error(known_spectrum(spec).eigenvalues, ct) <= 1e-3);
  }
}
