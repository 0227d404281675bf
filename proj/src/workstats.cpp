// workstats.cpp - work statistics from the relaxation spectrum
#include "thermowork/workstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "thermowork/errors.hpp"

namespace thermowork {

double gamma_coefficient(int n, double omega, double beta) {
  if (n < 1) throw InputError("cumulant order must be >= 1");
  if (!(beta > 0.0)) throw InputError("gamma_n needs beta > 0");
  const double x = beta * omega;
  if (std::abs(x) < 1e-8) {
    if (n == 1) return 0.5;
    if (n == 2) return 1.0;
    return 0.0;
  }
  const double power = 0.5 * std::pow(x, n - 1);
  return (n % 2 == 0) ? power / std::tanh(0.5 * x) : power;
}

double protocol_spectral_weight(double omega, const DriveProtocol& protocol) {
  const double dv2 = protocol.dv * protocol.dv;
  if (protocol.is_sudden()) return dv2;
  const double half = 0.5 * omega * protocol.tau;
  if (std::abs(half) < 1e-6) return dv2 * (1.0 - half * half / 3.0);
  const double sinc = std::sin(half) / half;
  return dv2 * sinc * sinc;
}

double RelaxationSpectrum::nonadiabatic_total() const {
  double s = 0.0;
  for (const auto& w : nonadiabatic) s += w.weight;
  return s;
}

namespace {

std::vector<SpectralWeight> folded_weights(const ResponsePoles& poles,
                                           std::span<const double> pattern, double beta,
                                           std::size_t& clipped) {
  const auto projected = projected_spectrum(poles, pattern);
  std::vector<SpectralWeight> out;
  out.reserve(projected.size());
  double largest = 0.0;
  for (const auto& [omega, gg] : projected) {
    out.push_back({omega, 2.0 * beta * gg / omega});
    largest = std::max(largest, out.back().weight);
  }
  for (auto& w : out) {
    if (w.weight >= 0.0) continue;
    if (-w.weight <= 1e-12 * largest || -w.weight <= kNegativeWeightTolerance * 1e-2) {
      w.weight = 0.0;
      ++clipped;
    } else {
      std::ostringstream msg;
      msg << "negative relaxation weight " << w.weight << " at omega " << w.omega;
      throw StabilityError(msg.str());
    }
  }
  return out;
}

}  // namespace

RelaxationSpectrum relaxation_spectrum(const ResponsePoles& dressed,
                                       const Eigen::MatrixXd& isothermal_static,
                                       std::span<const double> pattern, double beta) {
  if (pattern.size() != dressed.sites ||
      isothermal_static.rows() != static_cast<Eigen::Index>(pattern.size())) {
    throw InputError("pattern and response dimensions disagree");
  }
  RelaxationSpectrum spec;
  spec.beta = beta;
  spec.nonadiabatic = folded_weights(dressed, pattern, beta, spec.clipped);
  const Eigen::Map<const Eigen::VectorXd> g(pattern.data(), pattern.size());
  const double total = -beta * g.dot(isothermal_static * g);
  double psi_ad = total - spec.nonadiabatic_total();
  if (psi_ad < -kNegativeWeightTolerance) {
    std::ostringstream msg;
    msg << "adiabatic weight " << psi_ad << " is negative: response inputs are inconsistent";
    throw StabilityError(msg.str());
  }
  if (psi_ad < 0.0) {
    psi_ad = 0.0;
    ++spec.clipped;
  }
  spec.psi_ad = psi_ad;
  return spec;
}

RelaxationSpectrum relaxation_spectrum_from_adiabatic(const ResponsePoles& poles,
                                                      std::span<const double> pattern,
                                                      double beta, double psi_ad) {
  RelaxationSpectrum spec;
  spec.beta = beta;
  spec.nonadiabatic = folded_weights(poles, pattern, beta, spec.clipped);
  if (psi_ad < -kNegativeWeightTolerance) throw StabilityError("negative adiabatic weight");
  spec.psi_ad = std::max(psi_ad, 0.0);
  return spec;
}

double relaxation_function(const RelaxationSpectrum& spectrum, double t) {
  double psi = spectrum.psi_ad;
  for (const auto& w : spectrum.nonadiabatic) psi += w.weight * std::cos(w.omega * t);
  return psi;
}

CumulantValue cumulant(int n, const RelaxationSpectrum& spectrum, const DriveProtocol& protocol) {
  if (n < 1) throw InputError("cumulant order must be >= 1");
  CumulantValue c;
  c.order = n;
  for (const auto& w : spectrum.nonadiabatic) {
    c.nonadiabatic += w.weight * gamma_coefficient(n, w.omega, spectrum.beta) *
                      protocol_spectral_weight(w.omega, protocol);
  }
  c.adiabatic = spectrum.psi_ad * gamma_coefficient(n, 0.0, spectrum.beta) *
                protocol_spectral_weight(0.0, protocol);
  return c;
}

CumulantReport cumulant_report(const RelaxationSpectrum& spectrum, const DriveProtocol& protocol,
                               int max_order, double U) {
  CumulantReport r;
  r.beta = spectrum.beta;
  r.U = U;
  r.protocol = protocol;
  for (int n = 1; n <= max_order; ++n) r.cumulants.push_back(cumulant(n, spectrum, protocol));
  r.beta_fano = fano_factor(r);
  return r;
}

std::optional<double> fano_factor(const CumulantReport& report) {
  if (report.cumulants.size() < 2) return std::nullopt;
  const double c1 = report.order(1).total();
  if (!(c1 > 0.0)) return std::nullopt;
  return report.order(2).total() / c1;
}

double dissipated_work_sudden(const Eigen::MatrixXd& isothermal_static,
                              std::span<const double> pattern, double beta) {
  if (isothermal_static.rows() != static_cast<Eigen::Index>(pattern.size())) {
    throw InputError("pattern length mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> g(pattern.data(), pattern.size());
  const double w = -0.5 * beta * g.dot(isothermal_static * g);
  if (w < -kNegativeWeightTolerance) {
    std::ostringstream msg;
    msg << "negative sudden dissipated work " << w;
    throw StabilityError(msg.str());
  }
  return std::max(w, 0.0);
}

double dissipated_work_sudden(const ThermalKsState& state, const Eigen::MatrixXd& isothermal_static) {
  const auto g = state.lattice.weights();
  return dissipated_work_sudden(isothermal_static, g, state.beta());
}

std::optional<double> crossover_time(std::span<const double> taus, std::span<const double> k3) {
  if (taus.size() != k3.size()) throw InputError("tau grid and curve lengths differ");
  if (taus.size() < 8) throw InputError("crossover extraction needs at least 8 samples");
  for (std::size_t i = 1; i < taus.size(); ++i) {
    if (!(taus[i] > taus[i - 1])) throw InputError("tau grid must be strictly increasing");
  }
  double best = 0.0;
  std::optional<double> where;
  for (std::size_t i = 1; i + 1 < taus.size(); ++i) {
    const double d = std::abs((k3[i + 1] - k3[i - 1]) / (taus[i + 1] - taus[i - 1]));
    if (d > best) {
      best = d;
      where = taus[i];
    }
  }
  if (best < 1e-14) return std::nullopt;
  return where;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > lo) || count < 2) throw InputError("invalid log grid");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace thermowork
