#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dechist::qbm {

/// The closed-form propagator coefficients are singular at
/// sin(omega tau) = 0; such horizons are rejected, not perturbed.
class ResonantHorizonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BathMode {
    double mass;
    double omega;
    double coupling;  // c_n of the bilinear coupling c_n q_n x

    void validate() const;
};

struct OscillatorBath {
    std::vector<BathMode> modes;
    double temperature = 0.0;  // in energy units, k_B = 1; T = 0 allowed
    double hbar = 1.0;

    void validate() const;
};

struct SpectralDensity {
    enum class Kind { discrete, ohmic };
    Kind kind = Kind::ohmic;
    OscillatorBath bath;   // discrete kind
    double m_gamma = 0.0;  // ohmic kind: M*gamma damping strength
    double cutoff = 0.0;   // ohmic kind: Lambda

    static SpectralDensity ohmic(double m_gamma, double cutoff, double temperature,
                                 double hbar = 1.0);
    static SpectralDensity discrete(OscillatorBath bath);
    void validate() const;
};

/// Trajectory sampled on N+1 uniform knots over [0, horizon].
struct DiscretizedPath {
    double horizon;
    Eigen::VectorXd samples;

    void validate() const;
    int intervals() const { return static_cast<int>(samples.size()) - 1; }
    double dt() const { return horizon / intervals(); }
    double time_at(int k) const { return dt() * k; }
};

/// Gaussian coefficients of the thermal oscillator state,
/// rho(q, q') ~ exp(-A (q^2 + q'^2) + B q q').
struct ThermalCoefficients {
    double A;
    double B;
};

/// Coefficients of the driven-oscillator propagator phase:
/// a q''^2 + a q'^2 + b q'' q' - c q'' - d q' - f.
struct PropagatorCoefficients {
    double a;
    double b;
    double c;
    double d;
    double f;
};

namespace detail {
/// Stable coth/csch built on expm1; coth -> 1 and csch -> 0 limits are
/// exact at z = +inf, used for T = 0.
double coth(double z);
double csch(double z);
/// coth(hbar * omega / (2 T)) with the T = 0 limit taken analytically.
double thermal_coth_half(double omega, double temperature, double hbar);
}  // namespace detail

/// Dissipation kernel, antisymmetric: -sum c^2/(2 m w) sin(w s).
double eta_kernel(double s, const OscillatorBath& bath);
/// Noise kernel, symmetric: sum c^2/(2 m w) coth(hbar w / 2kT) cos(w s).
double nu_kernel(double s, const OscillatorBath& bath);
/// Antiderivative kernel with eta = d gamma / ds.
double gamma_kernel(double s, const OscillatorBath& bath);

struct KernelSample {
    double nu;
    double gamma;
};

/// nu and gamma at lag s. Ohmic gamma is the closed Gaussian form;
/// ohmic nu integrates the spectral density with the thermal weight by
/// adaptive quadrature (relative tolerance 1e-8, cutoff at 40 Lambda).
KernelSample spectral_kernels(const SpectralDensity& density, double s);

/// Influence phase W[x, y]. Re W is the ordered double trapezoid of
/// (x-y) eta (x+y); Im W the full-square double trapezoid of
/// (x-y) nu (x-y) / 2. Units of action.
std::complex<double> influence_phase(const DiscretizedPath& x, const DiscretizedPath& y,
                                     const OscillatorBath& bath);

/// Same quadrature with caller-supplied stationary kernels.
std::complex<double> influence_phase(const DiscretizedPath& x, const DiscretizedPath& y,
                                     const std::function<double(double)>& eta,
                                     const std::function<double(double)>& nu);

/// Driven-oscillator propagator coefficients over the path's horizon.
/// Throws ResonantHorizonError when |sin(omega tau)| <= 1e-9.
PropagatorCoefficients propagator_coefficients(const DiscretizedPath& x, const BathMode& mode,
                                               double hbar);

ThermalCoefficients thermal_coefficients(const BathMode& mode, double temperature, double hbar);

inline constexpr double resonance_guard = 1e-9;

}  // namespace dechist::qbm
