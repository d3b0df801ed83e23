#include "agestruct/model.hpp"
#include "agestruct/types.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace agestruct;

namespace {

const char* kMinimal = R"([domain]
a_max = 1

[coefficients]
D = 1
g = 0
h = 0
mu = 1
b = 1
)";

std::string with_coefficients(const std::string& d, const std::string& g, const std::string& h,
                              const std::string& mu, const std::string& b, const std::string& a_max = "1") {
  return "[domain]\na_max = " + a_max + "\n[coefficients]\nD = " + d + "\ng = " + g + "\nh = " + h +
         "\nmu = " + mu + "\nb = " + b + "\n";
}

std::string invariant_message(const std::string& text) {
  try {
    parse_model(text);
  } catch (const InvariantError& e) {
    return e.what();
  }
  return "";
}

// Dependence on u detected by evaluating at two densities.
bool varies_in_u(const std::function<double(double)>& f) { return f(0.3) != f(1.7); }

}  // namespace

TEST_CASE("minimal configuration takes documented defaults") {
  const ModelSpec m = parse_model(kMinimal);
  CHECK(m.max_age == 1.0);
  CHECK(m.robin == 0.0);
  CHECK(m.birth_scale == 1.0);
  CHECK(m.transport == Transport::Diffusive);
  CHECK(m.right == RightBoundary::Robin);
  CHECK(m.D(0.3, 0.4) == 1.0);
  CHECK(m.mu(2.0, 0.5) == 1.0);
  CHECK_FALSE(m.nonlinear());
}

TEST_CASE("u-dependent coefficients are flagged") {
  const ModelSpec m = parse_model(with_coefficients("1", "u*p", "u^2", "1 + u^2", "exp(-u)", "2"));
  CHECK(m.max_age == 2.0);
  CHECK(m.nonlinear());
  CHECK(m.drift.depends_on(Variable::Density));
  CHECK(m.absorption.depends_on(Variable::Density));
  CHECK(m.death.depends_on(Variable::Density));
  CHECK(m.birth.depends_on(Variable::Density));
  CHECK(varies_in_u([&](double u) { return m.g(u, 1.0); }));
  CHECK(varies_in_u([&](double u) { return m.h(u, 0.0); }));
  CHECK(varies_in_u([&](double u) { return m.mu(u, 0.0); }));
  CHECK(varies_in_u([&](double u) { return m.fertility(u); }));
  CHECK_FALSE(varies_in_u([&](double) { return m.D(0.1, 0.2); }));
}

TEST_CASE("sign conditions are named") {
  CHECK(invariant_message(with_coefficients("-1", "0", "0", "1", "1")) == "D must be positive");
  CHECK(invariant_message(with_coefficients("1", "0", "0", "1 - u", "1")) == "mu must be nonnegative");
  CHECK(invariant_message(with_coefficients("1", "0", "0", "1", "0")) == "b must be positive");
  CHECK(invariant_message(with_coefficients("1", "1 + u", "0", "1", "1")) == "g(0,0) must vanish");
  CHECK(invariant_message(with_coefficients("1", "0", "0", "a", "1")).find("theta") != std::string::npos);
  CHECK(invariant_message(with_coefficients("1", "0", "0", "1", "1", "0")).find("a_max") != std::string::npos);
}

TEST_CASE("syntax errors report line and column") {
  auto where = [](const std::string& text) {
    try {
      parse_model(text);
    } catch (const ParseError& e) {
      return std::pair{e.line(), e.column()};
    }
    return std::pair{0, 0};
  };
  CHECK(where(std::string(kMinimal) + "colour = red\n") == std::pair{10, 1});
  CHECK(where("[domain]\na_max = 1\n[extra]\n") == std::pair{3, 1});
  CHECK(where("[domain]\na_max = 1\n[coefficients]\nD = 1 +\n").first == 4);
  CHECK(where("[domain]\na_max = 1\n[coefficients]\nD = 1 +\n").second == 8);
  CHECK(where("[domain]\nnx = many\na_max = 1\n").first == 2);
  // Missing coefficient.
  CHECK(where("[domain]\na_max = 1\n[coefficients]\nD = 1\n").first > 0);
  // D may not depend on u.
  CHECK(where(with_coefficients("1 + u", "0", "0", "1", "1")) == std::pair{4, 9});
}

TEST_CASE("theta") {
  ModelSpec m;
  CHECK(eval_theta(m, 0.7) == 1.0);
  m.death = Expr::parse("1 + a");
  m.absorption = Expr::parse("u^2");
  CHECK(eval_theta(m, 0.5) == doctest::Approx(1.5));
  m.death = Expr::parse("exp(-a)");
  m.absorption = Expr::parse("p^2 + 0.2");
  CHECK(eval_theta(m, 0.0) == doctest::Approx(1.2));
  m.death = Expr::parse("0");
  m.absorption = Expr::parse("0");
  CHECK_THROWS_AS(eval_theta(m, 0.0), InvariantError);
}

TEST_CASE("serialize then parse reproduces the model") {
  const ModelSpec m = parse_model(R"(
# comment
[domain]
nx = 17
na = 33
a_max = 2.5
[coefficients]
D = 1 + 0.5*x*a
g = u*p
h = 0.1*u^2
mu = 0.5 + a + u
b = 2*exp(-u)   ; trailing comment
[boundary]
nu0 = 0.25
[normalization]
cb = 1.2345678901234567
)");
  const ModelSpec back = parse_model(serialize_model(m));
  CHECK(back == m);
  CHECK(back.birth_scale == 1.2345678901234567);
}

TEST_CASE("round trip over random parameters") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    ModelSpec m;
    m.nx = 3 + static_cast<int>(rng() % 60);
    m.na = 2 + static_cast<int>(rng() % 90);
    m.max_age = pos(rng);
    m.robin = pos(rng);
    m.birth_scale = pos(rng);
    m.diffusion = Expr::parse(std::to_string(pos(rng)) + " + x*a");
    m.death = Expr::parse(std::to_string(pos(rng)) + " + u*" + std::to_string(pos(rng)));
    m.birth = Expr::parse("exp(-" + std::to_string(pos(rng)) + "*u)");
    m.transport = rng() % 2 ? Transport::Diffusive : Transport::None;
    m.right = rng() % 2 ? RightBoundary::Robin : RightBoundary::Dirichlet;
    REQUIRE_NOTHROW(m.validate());
    CHECK(parse_model(serialize_model(m)) == m);
  }
}

TEST_CASE("linear part agrees with coefficients at zero density") {
  const ModelSpec m = parse_model(with_coefficients("1", "u*p", "0.3 + u^2", "1 + a*u", "exp(-u)"));
  for (double a : {0.0, 0.4, 1.0}) CHECK(eval_theta(m, a) == doctest::Approx(m.mu(0, a) + m.h(0, 0)));
  CHECK(m.g(0.0, 0.0) == 0.0);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_model("/nonexistent/model.ini"), IoError); }
