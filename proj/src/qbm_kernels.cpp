#include "dechist/qbm_kernels.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dechist::qbm {

void BathMode::validate() const {
    if (mass <= 0.0 || omega <= 0.0)
        throw std::invalid_argument("BathMode: mass and frequency must be positive");
    if (!std::isfinite(coupling)) throw std::invalid_argument("BathMode: non-finite coupling");
}

void OscillatorBath::validate() const {
    for (const BathMode& m : modes) m.validate();
    if (temperature < 0.0) throw std::invalid_argument("OscillatorBath: negative temperature");
    if (hbar <= 0.0) throw std::invalid_argument("OscillatorBath: hbar must be positive");
}

SpectralDensity SpectralDensity::ohmic(double m_gamma, double cutoff, double temperature,
                                       double hbar) {
    SpectralDensity d;
    d.kind = Kind::ohmic;
    d.m_gamma = m_gamma;
    d.cutoff = cutoff;
    d.bath.temperature = temperature;
    d.bath.hbar = hbar;
    d.validate();
    return d;
}

SpectralDensity SpectralDensity::discrete(OscillatorBath bath) {
    SpectralDensity d;
    d.kind = Kind::discrete;
    d.bath = std::move(bath);
    d.validate();
    return d;
}

void SpectralDensity::validate() const {
    bath.validate();
    if (kind == Kind::ohmic) {
        if (cutoff <= 0.0) throw std::invalid_argument("SpectralDensity: cutoff must be positive");
        if (m_gamma < 0.0) throw std::invalid_argument("SpectralDensity: negative damping");
    }
}

void DiscretizedPath::validate() const {
    if (horizon <= 0.0) throw std::invalid_argument("DiscretizedPath: horizon must be positive");
    if (samples.size() < 3) throw std::invalid_argument("DiscretizedPath: need at least 2 intervals");
    for (Eigen::Index i = 0; i < samples.size(); ++i)
        if (!std::isfinite(samples(i)))
            throw std::invalid_argument("DiscretizedPath: non-finite sample");
}

namespace detail {

double coth(double z) {
    if (z <= 0.0) throw std::invalid_argument("coth: argument must be positive");
    const double denom = -std::expm1(-2.0 * z);  // 1 - e^{-2z}, no cancellation
    return (1.0 + std::exp(-2.0 * z)) / denom;
}

double csch(double z) {
    if (z <= 0.0) throw std::invalid_argument("csch: argument must be positive");
    return 2.0 * std::exp(-z) / -std::expm1(-2.0 * z);
}

double thermal_coth_half(double omega, double temperature, double hbar) {
    if (temperature == 0.0) return 1.0;
    return coth(hbar * omega / (2.0 * temperature));
}

}  // namespace detail

double eta_kernel(double s, const OscillatorBath& bath) {
    bath.validate();
    double sum = 0.0;
    for (const BathMode& m : bath.modes)
        sum -= m.coupling * m.coupling / (2.0 * m.mass * m.omega) * std::sin(m.omega * s);
    return sum;
}

double nu_kernel(double s, const OscillatorBath& bath) {
    bath.validate();
    double sum = 0.0;
    for (const BathMode& m : bath.modes)
        sum += m.coupling * m.coupling / (2.0 * m.mass * m.omega) *
               detail::thermal_coth_half(m.omega, bath.temperature, bath.hbar) *
               std::cos(m.omega * s);
    return sum;
}

double gamma_kernel(double s, const OscillatorBath& bath) {
    bath.validate();
    double sum = 0.0;
    for (const BathMode& m : bath.modes)
        sum += m.coupling * m.coupling / (2.0 * m.mass * m.omega * m.omega) * std::cos(m.omega * s);
    return sum;
}

namespace {

double ohmic_nu(const SpectralDensity& density, double s) {
    const double lambda = density.cutoff;
    const double hbar = density.bath.hbar;
    const double temperature = density.bath.temperature;
    // I(w) coth(hbar w / 2kT) -> 2 M gamma kT / hbar as w -> 0.
    auto integrand = [&](double w) {
        if (w <= 0.0)
            return (temperature == 0.0)
                       ? 0.0
                       : 2.0 * density.m_gamma * temperature / (hbar * std::numbers::pi);
        const double spectral = density.m_gamma * w * std::exp(-w * w / (lambda * lambda));
        return spectral * detail::thermal_coth_half(w, temperature, hbar) * std::cos(w * s) /
               std::numbers::pi;
    };

    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    const double value = gauss_kronrod<double, 15>::integrate(integrand, 0.0, 40.0 * lambda,
                                                              15, 1e-10, &error);
    const double scale = std::max(std::abs(value), density.m_gamma * lambda);
    if (scale > 0.0 && error > 1e-8 * scale)
        throw QuadratureError("spectral_kernels: ohmic nu quadrature did not converge, residual " +
                              std::to_string(error));
    return value;
}

}  // namespace

KernelSample spectral_kernels(const SpectralDensity& density, double s) {
    density.validate();
    if (density.kind == SpectralDensity::Kind::discrete)
        return KernelSample{nu_kernel(s, density.bath), gamma_kernel(s, density.bath)};

    const double lambda = density.cutoff;
    const double gamma = density.m_gamma * lambda / (2.0 * std::sqrt(std::numbers::pi)) *
                         std::exp(-lambda * lambda * s * s / 4.0);
    return KernelSample{ohmic_nu(density, s), gamma};
}

namespace {

Eigen::VectorXd trapezoid_weights(int knots, double dt) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(knots, dt);
    w(0) = dt / 2.0;
    w(knots - 1) = dt / 2.0;
    return w;
}

void check_shared_grid(const DiscretizedPath& x, const DiscretizedPath& y) {
    x.validate();
    y.validate();
    if (x.samples.size() != y.samples.size() || x.horizon != y.horizon)
        throw std::invalid_argument("influence_phase: paths must share one grid");
}

std::complex<double> influence_phase_impl(const DiscretizedPath& x, const DiscretizedPath& y,
                                          const Eigen::VectorXd& eta_lag,
                                          const Eigen::VectorXd& nu_lag) {
    const int knots = static_cast<int>(x.samples.size());
    const double dt = x.dt();
    const Eigen::VectorXd w = trapezoid_weights(knots, dt);
    const Eigen::VectorXd diff = x.samples - y.samples;
    const Eigen::VectorXd sum = x.samples + y.samples;

    // Ordered double integral, inner trapezoid over [0, t_k]: the
    // diagonal carries half weight, the k = 0 row none.
    double re = 0.0;
    for (int k = 1; k < knots; ++k) {
        double inner = 0.5 * eta_lag(k) * sum(0) + 0.5 * eta_lag(0) * sum(k);
        for (int j = 1; j < k; ++j) inner += eta_lag(k - j) * sum(j);
        re -= w(k) * diff(k) * inner * dt;
    }

    double im = 0.0;
    for (int k = 0; k < knots; ++k) {
        double row = 0.0;
        for (int j = 0; j < knots; ++j) row += w(j) * nu_lag(std::abs(k - j)) * diff(j);
        im += w(k) * diff(k) * row;
    }
    im *= 0.5;
    if (im < -1e-12)
        throw std::runtime_error("influence_phase: negative noise form, Im W = " +
                                 std::to_string(im));
    return {re, im};
}

}  // namespace

std::complex<double> influence_phase(const DiscretizedPath& x, const DiscretizedPath& y,
                                     const OscillatorBath& bath) {
    check_shared_grid(x, y);
    bath.validate();
    const int knots = static_cast<int>(x.samples.size());
    Eigen::VectorXd eta_lag(knots), nu_lag(knots);
    for (int m = 0; m < knots; ++m) {
        const double s = x.dt() * m;
        eta_lag(m) = eta_kernel(s, bath);
        nu_lag(m) = nu_kernel(s, bath);
    }
    return influence_phase_impl(x, y, eta_lag, nu_lag);
}

std::complex<double> influence_phase(const DiscretizedPath& x, const DiscretizedPath& y,
                                     const std::function<double(double)>& eta,
                                     const std::function<double(double)>& nu) {
    check_shared_grid(x, y);
    const int knots = static_cast<int>(x.samples.size());
    Eigen::VectorXd eta_lag(knots), nu_lag(knots);
    for (int m = 0; m < knots; ++m) {
        const double s = x.dt() * m;
        eta_lag(m) = eta(s);
        nu_lag(m) = nu(s);
    }
    return influence_phase_impl(x, y, eta_lag, nu_lag);
}

PropagatorCoefficients propagator_coefficients(const DiscretizedPath& x, const BathMode& mode,
                                               double hbar) {
    x.validate();
    mode.validate();
    if (hbar <= 0.0) throw std::invalid_argument("propagator_coefficients: hbar must be positive");
    const double tau = x.horizon;
    const double sin_wt = std::sin(mode.omega * tau);
    if (std::abs(sin_wt) <= resonance_guard)
        throw ResonantHorizonError("propagator_coefficients: resonant horizon, sin(omega tau) = " +
                                   std::to_string(sin_wt));

    const int knots = static_cast<int>(x.samples.size());
    const Eigen::VectorXd w = trapezoid_weights(knots, x.dt());

    double int_sin = 0.0, int_sin_rev = 0.0;
    for (int k = 0; k < knots; ++k) {
        const double t = x.time_at(k);
        int_sin += w(k) * x.samples(k) * std::sin(mode.omega * t);
        int_sin_rev += w(k) * x.samples(k) * std::sin(mode.omega * (tau - t));
    }

    // Ordered double integral of x(t) x(s) sin w(tau-t) sin w(s), s <= t.
    double ordered = 0.0;
    for (int k = 0; k < knots; ++k) {
        const double outer = x.samples(k) * std::sin(mode.omega * (tau - x.time_at(k)));
        double inner = 0.0;
        for (int j = 0; j < k; ++j)
            inner += (j == 0 ? 0.5 : 1.0) * x.dt() * x.samples(j) * std::sin(mode.omega * x.time_at(j));
        inner += 0.5 * x.dt() * x.samples(k) * std::sin(mode.omega * x.time_at(k));
        if (k == 0) inner = 0.0;
        ordered += w(k) * outer * inner;
    }

    PropagatorCoefficients out;
    out.a = mode.mass * mode.omega * std::cos(mode.omega * tau) / (2.0 * sin_wt);
    out.b = -mode.mass * mode.omega / sin_wt;
    out.c = mode.coupling / sin_wt * int_sin;
    out.d = mode.coupling / sin_wt * int_sin_rev;
    out.f = mode.coupling * mode.coupling / (mode.mass * mode.omega * sin_wt) * ordered;
    return out;
}

ThermalCoefficients thermal_coefficients(const BathMode& mode, double temperature, double hbar) {
    mode.validate();
    if (temperature < 0.0) throw std::invalid_argument("thermal_coefficients: negative temperature");
    if (hbar <= 0.0) throw std::invalid_argument("thermal_coefficients: hbar must be positive");
    const double scale = mode.mass * mode.omega / hbar;
    if (temperature == 0.0) return ThermalCoefficients{scale / 2.0, 0.0};
    const double z = hbar * mode.omega / temperature;  // hbar omega beta
    return ThermalCoefficients{scale / 2.0 * detail::coth(z), scale * detail::csch(z)};
}

}  // namespace dechist::qbm
