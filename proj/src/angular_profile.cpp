#include "vpatch/angular_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vpatch {

namespace {

// Arcs closer than this are treated as touching.
constexpr double kTouchTol = 1e-13;

struct TaggedArc {
  IntervalPiece arc;
  int piece = 0;
  int copy = 0;
};

std::vector<TaggedArc> tagged_arcs(const IntervalProfile& p) {
  std::vector<TaggedArc> out;
  const int m = p.symmetry_order;
  out.reserve(p.pieces.size() * static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double shift = kTwoPi * j / m;
    for (std::size_t i = 0; i < p.pieces.size(); ++i) {
      const auto& q = p.pieces[i];
      const double s = wrap_angle(q.start + shift);
      out.push_back({{s, s + (q.end - q.start), q.value}, static_cast<int>(i), j});
    }
  }
  return out;
}

}  // namespace

void IntervalProfile::validate() const {
  if (symmetry_order < 1) throw InvalidInput("symmetry_order must be a positive integer");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& q = pieces[i];
    std::ostringstream where;
    where << "piece " << i << " [" << q.start << ", " << q.end << "]";
    if (!std::isfinite(q.start) || !std::isfinite(q.end) || !std::isfinite(q.value))
      throw InvalidInput(where.str() + ": non-finite field");
    if (q.start < -kPi - 1e-12 || q.start >= kPi)
      throw InvalidInput(where.str() + ": start must lie in [-pi, pi)");
    if (!(q.end > q.start)) throw InvalidInput(where.str() + ": end must exceed start");
    const double len = q.end - q.start;
    if (len > kTwoPi + 1e-12 || (len >= kTwoPi - 1e-12 && !is_full_circle()))
      throw InvalidInput(where.str() + ": length must be below 2 pi");
  }
  if (is_full_circle()) return;

  auto arcs = tagged_arcs(*this);
  std::sort(arcs.begin(), arcs.end(),
            [](const TaggedArc& a, const TaggedArc& b) { return a.arc.start < b.arc.start; });
  auto collide = [](const TaggedArc& a, const TaggedArc& b) {
    std::ostringstream msg;
    msg << "overlapping or touching pieces: piece " << a.piece << " (rotation " << a.copy
        << ") and piece " << b.piece << " (rotation " << b.copy << ")";
    throw InvalidInput(msg.str());
  };
  // A shared endpoint between different values is a jump, not an overlap.
  auto clash = [](const TaggedArc& a, const TaggedArc& b, double gap) {
    return gap < -kTouchTol || (gap <= kTouchTol && a.arc.value == b.arc.value);
  };
  for (std::size_t i = 0; i + 1 < arcs.size(); ++i) {
    if (clash(arcs[i], arcs[i + 1], arcs[i + 1].arc.start - arcs[i].arc.end))
      collide(arcs[i], arcs[i + 1]);
  }
  if (arcs.size() > 1 &&
      clash(arcs.back(), arcs.front(), arcs.front().arc.start + kTwoPi - arcs.back().arc.end))
    collide(arcs.back(), arcs.front());
  if (arcs.size() == 1 && arcs.front().arc.end - arcs.front().arc.start >= kTwoPi - kTouchTol)
    collide(arcs.front(), arcs.front());
}

bool IntervalProfile::is_full_circle() const {
  return symmetry_order == 1 && pieces.size() == 1 &&
         std::abs(pieces[0].end - pieces[0].start - kTwoPi) <= 1e-12;
}

std::vector<IntervalPiece> IntervalProfile::reconstructed() const {
  std::vector<IntervalPiece> out;
  for (const auto& t : tagged_arcs(*this)) out.push_back(t.arc);
  return out;
}

double IntervalProfile::measure() const {
  double total = 0.0;
  for (const auto& q : pieces) total += q.end - q.start;
  return total * symmetry_order;
}

double IntervalProfile::value_at(double theta) const {
  double v = 0.0;
  for (const auto& q : reconstructed()) {
    const double d = theta - q.start;
    const double r = d - kTwoPi * std::floor(d / kTwoPi);
    if (r < q.end - q.start) v += q.value;
  }
  return v;
}

IntervalProfile IntervalProfile::full_circle(double value) {
  return {{{-kPi, kPi, value}}, 1};
}

IntervalProfile IntervalProfile::sector(double start, double end, double value) {
  IntervalProfile p{{{start, end, value}}, 1};
  p.validate();
  return p;
}

FourierProfile::FourierProfile(int degree)
    : a_(Eigen::VectorXd::Zero(degree + 1)), b_(Eigen::VectorXd::Zero(degree + 1)) {
  if (degree < 0) throw InvalidInput("Fourier degree must be non-negative");
}

FourierProfile::FourierProfile(Eigen::VectorXd cos_coeffs, Eigen::VectorXd sin_coeffs)
    : a_(std::move(cos_coeffs)), b_(std::move(sin_coeffs)) {
  if (a_.size() != b_.size() || a_.size() == 0)
    throw InvalidInput("cos and sin coefficient vectors must have equal nonzero length");
  b_(0) = 0.0;
}

double FourierProfile::derivative(double theta, int order) const {
  // Chebyshev-style recurrence for cos(k theta), sin(k theta).
  const double c1 = std::cos(theta);
  const double s1 = std::sin(theta);
  double ck = 1.0;
  double sk = 0.0;
  double sum = order == 0 ? 0.5 * a_(0) : 0.0;
  for (int k = 1; k <= degree(); ++k) {
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
    const double kp = std::pow(static_cast<double>(k), order);
    // d^n/dtheta^n of (a cos + b sin) cycles through four phases.
    double term = 0.0;
    switch (order % 4) {
      case 0: term = a_(k) * ck + b_(k) * sk; break;
      case 1: term = -a_(k) * sk + b_(k) * ck; break;
      case 2: term = -a_(k) * ck - b_(k) * sk; break;
      default: term = a_(k) * sk - b_(k) * ck; break;
    }
    sum += kp * term;
  }
  return sum;
}

FourierProfile FourierProfile::sine_mode(int degree, int k, double amplitude) {
  FourierProfile f(degree);
  f.b_(k) = amplitude;
  return f;
}

FourierProfile FourierProfile::cosine_mode(int degree, int k, double amplitude) {
  FourierProfile f(degree);
  f.a_(k) = (k == 0 ? 2.0 : 1.0) * amplitude;
  return f;
}

IntervalProfile symmetrize(const IntervalProfile& p, int m) {
  if (p.symmetry_order != 1) throw InvalidInput("symmetrize expects symmetry_order = 1");
  if (m < 1) throw InvalidInput("symmetry order must be positive");
  IntervalProfile out{p.pieces, m};
  out.validate();
  return out;
}

FourierProfile fourier_of_intervals(const IntervalProfile& p, int degree) {
  if (degree < 1) throw InvalidInput("Fourier degree must be at least 1");
  p.validate();
  FourierProfile f(degree);
  auto& a = f.cos_coeffs();
  auto& b = f.sin_coeffs();
  for (const auto& q : p.reconstructed()) {
    const double w = q.value / kPi;
    a(0) += w * (q.end - q.start);
    for (int k = 1; k <= degree; ++k) {
      a(k) += w * (std::sin(k * q.end) - std::sin(k * q.start)) / k;
      b(k) += w * (std::cos(k * q.start) - std::cos(k * q.end)) / k;
    }
  }
  return f;
}

LogMode second_mode_coefficients(const IntervalProfile& p) {
  return second_mode_coefficients(fourier_of_intervals(p, 2));
}

LogMode second_mode_coefficients(const FourierProfile& h) {
  if (h.degree() < 2) return {};
  // int h cos2 = pi a_2, int h sin2 = pi b_2.
  return {-0.25 * h.cos_coeffs()(2), -0.25 * h.sin_coeffs()(2)};
}

void to_json(nlohmann::json& j, const IntervalProfile& p) {
  j = nlohmann::json::object();
  j["pieces"] = nlohmann::json::array();
  for (const auto& q : p.pieces)
    j["pieces"].push_back({{"start", q.start}, {"end", q.end}, {"value", q.value}});
  j["symmetry"] = p.symmetry_order;
}

void from_json(const nlohmann::json& j, IntervalProfile& p) {
  if (!j.is_object()) throw InvalidInput("profile: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "pieces" && key != "symmetry")
      throw InvalidInput("profile: unknown key '" + key + "'");
  }
  if (!j.contains("pieces") || !j["pieces"].is_array())
    throw InvalidInput("profile: 'pieces' must be an array");
  p.pieces.clear();
  std::size_t i = 0;
  for (const auto& e : j["pieces"]) {
    const std::string where = "profile.pieces[" + std::to_string(i++) + "]";
    if (!e.is_object()) throw InvalidInput(where + ": expected an object");
    for (const auto& [key, _] : e.items()) {
      if (key != "start" && key != "end" && key != "value")
        throw InvalidInput(where + ": unknown key '" + key + "'");
    }
    if (!e.contains("start") || !e.contains("end") || !e["start"].is_number() ||
        !e["end"].is_number())
      throw InvalidInput(where + ": 'start' and 'end' are required numbers");
    IntervalPiece q{e["start"].get<double>(), e["end"].get<double>(), 1.0};
    if (e.contains("value")) {
      if (!e["value"].is_number()) throw InvalidInput(where + ".value: expected a number");
      q.value = e["value"].get<double>();
    }
    p.pieces.push_back(q);
  }
  p.symmetry_order = 1;
  if (j.contains("symmetry")) {
    if (!j["symmetry"].is_number_integer())
      throw InvalidInput("profile.symmetry: expected an integer");
    p.symmetry_order = j["symmetry"].get<int>();
  }
  p.validate();
}

}  // namespace vpatch
