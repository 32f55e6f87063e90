#pragma once

// Effective corner models in tau = t ln(1/r). Every model has a 1/tau prefactor
// multiplying a history integral; the first output step is taken in log-time
// s = ln tau from tau = 1e-12, where the system is regular, and later steps are
// fixed-step RK4 in tau. History integrals are integrated with the state.

#include "vpatch/types.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

namespace vpatch {

inline constexpr double kEffectiveTau0 = 1e-12;

// ---- odd Fourier system: g = sum g_k sin(2k theta) --------------------------

struct OddFourierState {
  Eigen::VectorXd g;  // g(0) is g_1
  double J = 0.0;     // int_0^tau g_1
  double tau = 0.0;
};

/// Rates of the truncated system, g_0 = g_{N+1} = 0. The transport speed is
/// (1/(2 tau)) int g_1, replaced by g_1/2 at tau = 0.
Eigen::VectorXd odd_fourier_rates(const OddFourierState& s);

OddFourierState odd_fourier_step(const OddFourierState& s, double dtau);

std::vector<OddFourierState> odd_fourier_integrate(const Eigen::VectorXd& g0, double T, double dtau);

/// g_k = C/k on odd k.
Eigen::VectorXd bahouri_chemin_coefficients(int N, double C = 1.0);

/// Coefficients of sign * (1 on [0,A] u [pi,pi+A], -1 on the reflections).
Eigen::VectorXd odd_corner_coefficients(int N, double A, double sign);

/// Crossing of g(theta) = level in (0, pi/2) nearest `previous`.
double odd_fourier_edge(const Eigen::VectorXd& g, double previous, double level);

// ---- odd corner angle --------------------------------------------------------

struct OddCornerSample {
  double tau;
  double A;
  double J;  // int_0^tau (1 - cos 2A)
};

struct OddCornerTrajectory {
  std::vector<OddCornerSample> samples;
  int sign = 1;
  bool halted = false;
  std::string diagnostic;
};

/// sign = +1: A' = (sin 2A / pi tau) J, expanding to pi/2 (integrated in pi/2 - A).
/// sign = -1: contracting to 0.
OddCornerTrajectory odd_corner_integrate(double A0, int sign, double T, double dtau);

/// a = 2A with a'' = cot(a) a'^2 - (a' -+ (2/pi) sin a (1 - cos a)) / tau.
/// Halts once sin a < 1e-6.
OddCornerTrajectory odd_corner_second_order(double A0, int sign, double T, double dtau);

struct ExponentialFit {
  double rate = 0.0;          // least-squares decay rate of ln(pi/2 - A)
  double certified_rate = 0;  // largest c with pi/2 - A <= exp(-c tau) on the window
  double residual = 0.0;      // rms residual over the spread of ln(pi/2 - A)
};
ExponentialFit fit_expanding(const OddCornerTrajectory& tr, double tau_lo, double tau_hi);

struct DecayBounds {
  double c = 0.0;  // largest c with c/(1+tau) <= A
  double C = 0.0;  // smallest C with A <= C/(1+sqrt(tau))
  double slope = 0.0;
  double tail_increment = 0.0;  // J(tau_end) - J(tau_end - 1)
};
DecayBounds fit_contracting(const OddCornerTrajectory& tr, double slope_lo, double slope_hi);

// ---- single corner -----------------------------------------------------------

struct SingleCornerSample {
  double tau;
  double A;
  double B;
  double dA;
  double dB;
  double P;  // int sin 2B sin 2A (integro-differential form only)
  double Q;  // int sin 2B cos 2A
};

struct SingleCornerTrajectory {
  std::vector<SingleCornerSample> samples;
  bool asymptote = false;  // B reached 1e-8
  bool halted = false;     // second-order denominator below 1e-6
  std::string diagnostic;
};

SingleCornerTrajectory single_corner_integrate(double B0, double T, double dtau);
SingleCornerTrajectory single_corner_second_order(double B0, double T, double dtau);

struct CornerAsymptote {
  double A_inf = 0.0;
  double tau = -1.0;  // first tau with B < 1e-3 and |A - A_inf| < 1e-4; -1 if never
};
/// A_inf by extrapolation of the tail, which decays like a power of tau.
CornerAsymptote corner_asymptote(const SingleCornerTrajectory& tr);

/// Signs of A' and B' on the initial window where -pi/4 <= A <= 0.
struct SignStructure {
  double window = 0.0;
  bool A_nonincreasing = true;
  bool B_nonincreasing = true;
  bool B_nondecreasing = true;
};
SignStructure single_corner_sign_structure(const SingleCornerTrajectory& tr);

void write_effective_csv(std::ostream& os, const OddCornerTrajectory& tr);
void write_effective_csv(std::ostream& os, const SingleCornerTrajectory& tr);

}  // namespace vpatch
