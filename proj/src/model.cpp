#include "agestruct/model.hpp"

#include "agestruct/types.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace agestruct {

namespace {

constexpr VariableSet kDiffusionVars = variable_bit(Variable::Age) | variable_bit(Variable::Position);
constexpr VariableSet kTransportVars = variable_bit(Variable::Density) | variable_bit(Variable::Gradient);
constexpr VariableSet kDeathVars = variable_bit(Variable::Density) | variable_bit(Variable::Age);
constexpr VariableSet kBirthVars = variable_bit(Variable::Density);

// Density values at which sign conditions are sampled.
constexpr std::array<double, 10> kDensitySamples{0.0, 1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0};
constexpr int kAgeSamples = 21;
constexpr int kSpaceSamples = 21;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(std::string_view value, int line, int column) {
  const std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError(line, column, "expected a number, got '" + s + "'");
  return v;
}

int parse_int(std::string_view value, int line, int column) {
  const double v = parse_real(value, line, column);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError(line, column, "expected an integer");
  return static_cast<int>(v);
}

}  // namespace

bool ModelSpec::nonlinear() const {
  return drift.depends_on(Variable::Density) || drift.depends_on(Variable::Gradient) ||
         absorption.depends_on(Variable::Density) || absorption.depends_on(Variable::Gradient) ||
         death.depends_on(Variable::Density) || birth.depends_on(Variable::Density);
}

void ModelSpec::validate() const {
  if (!(max_age > 0.0) || !std::isfinite(max_age)) throw InvariantError("a_max must be positive and finite");
  if (!(robin >= 0.0) || !std::isfinite(robin)) throw InvariantError("nu0 must be nonnegative");
  if (!(birth_scale > 0.0) || !std::isfinite(birth_scale)) throw InvariantError("cb must be positive");
  if (nx < 3) throw InvariantError("nx must be at least 3");
  if (na < 2) throw InvariantError("na must be at least 2");

  const double g00 = g(0.0, 0.0);
  if (g00 != 0.0) throw InvariantError("g(0,0) must vanish");

  for (int i = 0; i < kAgeSamples; ++i) {
    const double a = max_age * i / (kAgeSamples - 1);
    for (int j = 0; j < kSpaceSamples; ++j) {
      const double x = static_cast<double>(j) / (kSpaceSamples - 1);
      const double d = D(a, x);
      if (!(d > 0.0) || !std::isfinite(d)) throw InvariantError("D must be positive");
    }
    for (double u : kDensitySamples) {
      const double m = mu(u, a);
      if (!(m >= 0.0) || !std::isfinite(m)) throw InvariantError("mu must be nonnegative");
    }
    const double theta = mu(0.0, a) + h(0.0, 0.0);
    if (!(theta > 0.0)) throw InvariantError("theta(a) = mu(0,a) + h(0,0) must be positive");
  }
  for (double u : kDensitySamples) {
    const double bu = birth.eval({.u = u});
    if (!(bu > 0.0) || !std::isfinite(bu)) throw InvariantError("b must be positive");
  }
}

ModelSpec parse_model(std::string_view text) {
  ModelSpec m;
  std::optional<double> a_max;
  std::array<bool, 5> have_coeff{};
  std::string section;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (const auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const int indent = static_cast<int>(line.data() - raw.data()) + 1;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, indent, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "domain" && section != "coefficients" && section != "boundary" && section != "normalization")
        throw ParseError(line_no, indent, "unknown section '" + section + "'");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, indent, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const int value_col = static_cast<int>(value.data() - raw.data()) + 1;
    if (section.empty()) throw ParseError(line_no, indent, "key '" + key + "' outside of a section");
    if (value.empty()) throw ParseError(line_no, value_col, "missing value for '" + key + "'");

    auto expr = [&](VariableSet allowed) {
      try {
        return Expr::parse(value, allowed);
      } catch (const ParseError& e) {
        throw ParseError(line_no, value_col + e.column() - 1, e.message());
      }
    };

    if (section == "domain") {
      if (key == "nx") m.nx = parse_int(value, line_no, value_col);
      else if (key == "na") m.na = parse_int(value, line_no, value_col);
      else if (key == "a_max") a_max = parse_real(value, line_no, value_col);
      else if (key == "transport") {
        if (value == "diffusive") m.transport = Transport::Diffusive;
        else if (value == "none") m.transport = Transport::None;
        else throw ParseError(line_no, value_col, "transport must be 'diffusive' or 'none'");
      } else throw ParseError(line_no, indent, "unknown key '" + key + "' in [domain]");
    } else if (section == "coefficients") {
      if (key == "D") { m.diffusion = expr(kDiffusionVars); have_coeff[0] = true; }
      else if (key == "g") { m.drift = expr(kTransportVars); have_coeff[1] = true; }
      else if (key == "h") { m.absorption = expr(kTransportVars); have_coeff[2] = true; }
      else if (key == "mu") { m.death = expr(kDeathVars); have_coeff[3] = true; }
      else if (key == "b") { m.birth = expr(kBirthVars); have_coeff[4] = true; }
      else throw ParseError(line_no, indent, "unknown key '" + key + "' in [coefficients]");
    } else if (section == "boundary") {
      if (key == "nu0") m.robin = parse_real(value, line_no, value_col);
      else if (key == "right") {
        if (value == "robin") m.right = RightBoundary::Robin;
        else if (value == "dirichlet") m.right = RightBoundary::Dirichlet;
        else throw ParseError(line_no, value_col, "right must be 'robin' or 'dirichlet'");
      } else throw ParseError(line_no, indent, "unknown key '" + key + "' in [boundary]");
    } else {
      if (key == "cb") m.birth_scale = parse_real(value, line_no, value_col);
      else throw ParseError(line_no, indent, "unknown key '" + key + "' in [normalization]");
    }
    if (end == text.size()) break;
  }

  if (!a_max) throw ParseError(line_no, 1, "missing required key 'a_max' in [domain]");
  m.max_age = *a_max;
  static constexpr std::array<const char*, 5> names{"D", "g", "h", "mu", "b"};
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!have_coeff[i]) throw ParseError(line_no, 1, std::string("missing required coefficient '") + names[i] + "'");

  m.validate();
  return m;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const ModelSpec& m) {
  std::ostringstream out;
  out << "[domain]\n"
      << "nx = " << m.nx << "\n"
      << "na = " << m.na << "\n"
      << "a_max = " << format_number(m.max_age) << "\n"
      << "transport = " << (m.transport == Transport::Diffusive ? "diffusive" : "none") << "\n\n"
      << "[coefficients]\n"
      << "D = " << m.diffusion.to_string() << "\n"
      << "g = " << m.drift.to_string() << "\n"
      << "h = " << m.absorption.to_string() << "\n"
      << "mu = " << m.death.to_string() << "\n"
      << "b = " << m.birth.to_string() << "\n\n"
      << "[boundary]\n"
      << "nu0 = " << format_number(m.robin) << "\n"
      << "right = " << (m.right == RightBoundary::Robin ? "robin" : "dirichlet") << "\n\n"
      << "[normalization]\n"
      << "cb = " << format_number(m.birth_scale) << "\n";
  return out.str();
}

double eval_theta(const ModelSpec& model, double a) {
  const double theta = model.mu(0.0, a) + model.h(0.0, 0.0);
  if (!(theta > 0.0)) throw InvariantError("theta(a) = mu(0,a) + h(0,0) must be positive");
  return theta;
}

}  // namespace agestruct
