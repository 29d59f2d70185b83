#include "dechist/qbm_records.hpp"

#include <cmath>
#include <numbers>

namespace dechist::qbm {

namespace {

Eigen::VectorXd trapezoid_weights(int knots, double dt) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(knots, dt);
    w(0) = dt / 2.0;
    w(knots - 1) = dt / 2.0;
    return w;
}

}  // namespace

FourierModes fourier_modes(const DiscretizedPath& x, const BathMode& mode) {
    x.validate();
    mode.validate();
    const int knots = static_cast<int>(x.samples.size());
    const Eigen::VectorXd w = trapezoid_weights(knots, x.dt());
    double xs = 0.0, xc = 0.0;
    for (int k = 0; k < knots; ++k) {
        const double phase = mode.omega * (x.horizon - x.time_at(k));
        xs += w(k) * x.samples(k) * std::sin(phase);
        xc += w(k) * x.samples(k) * std::cos(phase);
    }
    return FourierModes{xs, xc};
}

double im_w_fourier(const std::vector<FourierModes>& x, const std::vector<FourierModes>& y,
                    const OscillatorBath& bath) {
    bath.validate();
    if (x.size() != bath.modes.size() || y.size() != bath.modes.size())
        throw std::invalid_argument("im_w_fourier: one mode entry per bath mode required");
    double total = 0.0;
    for (std::size_t n = 0; n < bath.modes.size(); ++n) {
        const BathMode& m = bath.modes[n];
        const double ds = x[n].x_sin - y[n].x_sin;
        const double dc = x[n].x_cos - y[n].x_cos;
        total += m.coupling * m.coupling / (4.0 * m.mass * m.omega) *
                 detail::thermal_coth_half(m.omega, bath.temperature, bath.hbar) *
                 (ds * ds + dc * dc);
    }
    return total;
}

DecoherenceCondition decoherence_condition(const BathMode& mode, double temperature,
                                           double delta, double hbar, double threshold) {
    mode.validate();
    if (delta <= 0.0) throw std::invalid_argument("decoherence_condition: width must be positive");
    if (hbar <= 0.0) throw std::invalid_argument("decoherence_condition: hbar must be positive");
    const double exponent = delta * delta * mode.coupling * mode.coupling /
                            (mode.mass * hbar * mode.omega) *
                            detail::thermal_coth_half(mode.omega, temperature, hbar);
    // Cell centers one width apart pick up Im W / hbar = exponent / 4.
    return DecoherenceCondition{exponent, exponent >= threshold, std::exp(-exponent / 4.0),
                                threshold};
}

void CoarseGraining::validate() const {
    if (delta <= 0.0) throw std::invalid_argument("CoarseGraining: width must be positive");
    if (!std::isfinite(center.x_sin) || !std::isfinite(center.x_cos))
        throw std::invalid_argument("CoarseGraining: non-finite cell center");
}

double cell_suppression(const CoarseGraining& a, const CoarseGraining& b, const BathMode& mode,
                        double temperature, double hbar) {
    a.validate();
    b.validate();
    mode.validate();
    if (hbar <= 0.0) throw std::invalid_argument("cell_suppression: hbar must be positive");
    const OscillatorBath single{{mode}, temperature, hbar};
    const double im_w = im_w_fourier({a.center}, {b.center}, single);
    return std::exp(-im_w / hbar);
}

PhasePoint classical_response(const DiscretizedPath& x, const BathMode& mode, double q0,
                              double p0) {
    const FourierModes f = fourier_modes(x, mode);
    const double wt = mode.omega * x.horizon;
    const double c = std::cos(wt), s = std::sin(wt);
    return PhasePoint{
        q0 * c + p0 / (mode.mass * mode.omega) * s - mode.coupling / (mode.mass * mode.omega) * f.x_sin,
        p0 * c - mode.mass * mode.omega * q0 * s - mode.coupling * f.x_cos};
}

std::vector<PhasePoint> classical_trajectory(const DiscretizedPath& x, const BathMode& mode,
                                             double q0, double p0) {
    x.validate();
    mode.validate();
    const int knots = static_cast<int>(x.samples.size());
    const double dt = x.dt();
    std::vector<PhasePoint> out(static_cast<std::size_t>(knots));

    // Running trapezoids of x cos(wt) and x sin(wt); the horizon-t_k
    // functionals follow by rotation.
    double ic = 0.0, is = 0.0;
    auto gc = [&](int k) { return x.samples(k) * std::cos(mode.omega * x.time_at(k)); };
    auto gs = [&](int k) { return x.samples(k) * std::sin(mode.omega * x.time_at(k)); };
    for (int k = 0; k < knots; ++k) {
        if (k > 0) {
            ic += dt / 2.0 * (gc(k - 1) + gc(k));
            is += dt / 2.0 * (gs(k - 1) + gs(k));
        }
        const double wt = mode.omega * x.time_at(k);
        const double xs_k = std::sin(wt) * ic - std::cos(wt) * is;
        const double xc_k = std::cos(wt) * ic + std::sin(wt) * is;
        out[static_cast<std::size_t>(k)] = PhasePoint{
            q0 * std::cos(wt) + p0 / (mode.mass * mode.omega) * std::sin(wt) -
                mode.coupling / (mode.mass * mode.omega) * xs_k,
            p0 * std::cos(wt) - mode.mass * mode.omega * q0 * std::sin(wt) -
                mode.coupling * xc_k};
    }
    return out;
}

namespace {

double gaussian_norm(const ThermalCoefficients& tc) {
    return std::sqrt((2.0 * tc.A - tc.B) / std::numbers::pi);
}

}  // namespace

GeneralizedInfluence::GeneralizedInfluence(const DiscretizedPath& x, const DiscretizedPath& y,
                                           const BathMode& mode, double temperature,
                                           double hbar)
    : hbar_(hbar) {
    if (x.samples.size() != y.samples.size() || x.horizon != y.horizon)
        throw std::invalid_argument("generalized_influence: paths must share one grid");
    const PropagatorCoefficients px = propagator_coefficients(x, mode, hbar);
    const PropagatorCoefficients py = propagator_coefficients(y, mode, hbar);
    tc_ = thermal_coefficients(mode, temperature, hbar);
    norm_ = gaussian_norm(tc_);

    // Xs~ = (c/mw) Xs = -d[x]/b; the momentum shift is c Xc = c + cos(wt) d.
    xs_shift_x_ = -px.d / px.b;
    xs_shift_y_ = -py.d / py.b;
    const double wt = mode.omega * x.horizon;
    p_shift_x_ = px.c + std::cos(wt) * px.d;
    p_shift_y_ = py.c + std::cos(wt) * py.d;

    static_phase_ = -std::sin(wt) * std::cos(wt) * (px.d * px.d - py.d * py.d) /
                        (2.0 * hbar * mode.mass * mode.omega) -
                    (px.f - py.f) / hbar;
}

std::complex<double> GeneralizedInfluence::operator()(double q_pp, double r_pp) const {
    const double u = q_pp + xs_shift_x_;
    const double v = r_pp + xs_shift_y_;
    const double gauss = -tc_.A * u * u - tc_.A * v * v + tc_.B * u * v;
    const double phase =
        static_phase_ - (q_pp * p_shift_x_ - r_pp * p_shift_y_) / hbar_;
    return norm_ * std::exp(gauss) * std::exp(std::complex<double>(0.0, phase));
}

std::complex<double> generalized_influence(const DiscretizedPath& x, const DiscretizedPath& y,
                                           const BathMode& mode, double temperature, double hbar,
                                           double q_pp, double r_pp) {
    return GeneralizedInfluence(x, y, mode, temperature, hbar)(q_pp, r_pp);
}

std::complex<double> displaced_thermal_element(const BathMode& mode, double temperature,
                                               double hbar, double q_pp, double r_pp,
                                               const FourierModes& x, const FourierModes& y) {
    mode.validate();
    const ThermalCoefficients tc = thermal_coefficients(mode, temperature, hbar);
    const double xs_t = mode.coupling / (mode.mass * mode.omega) * x.x_sin;
    const double ys_t = mode.coupling / (mode.mass * mode.omega) * y.x_sin;
    const double px = mode.coupling * x.x_cos;
    const double py = mode.coupling * y.x_cos;

    const double u = q_pp + xs_t;
    const double v = r_pp + ys_t;
    const double gauss = -tc.A * u * u - tc.A * v * v + tc.B * u * v;
    // U(q0, p0) acts as exp(i p0 (q - q0/2) / hbar) after translation.
    const double phase = (-px * (q_pp + xs_t / 2.0) + py * (r_pp + ys_t / 2.0)) / hbar;
    return gaussian_norm(tc) * std::exp(gauss) * std::exp(std::complex<double>(0.0, phase));
}

GaussianWidths gaussian_widths(const BathMode& mode, double temperature, double hbar) {
    const ThermalCoefficients tc = thermal_coefficients(mode, temperature, hbar);
    return GaussianWidths{1.0 / std::sqrt(2.0 * tc.A + tc.B), 1.0 / std::sqrt(2.0 * tc.A - tc.B)};
}

namespace {

double gaussian_window_weight(const Window& window, double center, double sigma) {
    if (!(window.hi > window.lo))
        throw std::invalid_argument("record_trace_factor: empty window");
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    return 0.5 * (std::erf((window.hi - center) * scale) - std::erf((window.lo - center) * scale));
}

}  // namespace

double record_trace_factor(const Window& window, const BathMode& mode, double temperature,
                           double hbar, const FourierModes& x) {
    mode.validate();
    const ThermalCoefficients tc = thermal_coefficients(mode, temperature, hbar);
    const double center = -mode.coupling / (mode.mass * mode.omega) * x.x_sin;
    const double sigma = 1.0 / std::sqrt(2.0 * (2.0 * tc.A - tc.B));
    return gaussian_window_weight(window, center, sigma);
}

double record_trace_factor(const PhaseSpaceCell& cell, const BathMode& mode, double temperature,
                           double hbar, const FourierModes& x) {
    mode.validate();
    const double q_weight = record_trace_factor(cell.position, mode, temperature, hbar, x);
    const double p_center = -mode.coupling * x.x_cos;
    const double p_sigma = std::sqrt(mode.mass * hbar * mode.omega / 2.0 *
                                     detail::thermal_coth_half(mode.omega, temperature, hbar));
    return q_weight * gaussian_window_weight(cell.momentum, p_center, p_sigma);
}

InfoCount info_counts(const BathMode& mode, double temperature, double box_length, double tau,
                      double hbar) {
    mode.validate();
    if (box_length <= 0.0 || tau <= 0.0)
        throw std::invalid_argument("info_counts: box length and horizon must be positive");
    if (hbar <= 0.0) throw std::invalid_argument("info_counts: hbar must be positive");
    const double base = mode.coupling * mode.coupling * box_length * box_length * tau * tau /
                        (mode.mass * hbar * mode.omega);
    const double thermal = detail::thermal_coth_half(mode.omega, temperature, hbar);

    double entropy = 0.0;
    if (temperature > 0.0) {
        const double z = hbar * mode.omega / temperature;
        if (z < 700.0) {  // below the expm1 overflow edge; otherwise S ~ 0
            const double nbar = 1.0 / std::expm1(z);
            entropy = (nbar + 1.0) * std::log1p(nbar) - nbar * std::log(nbar);
        }
    }
    return InfoCount{base * thermal, base, thermal, std::exp(entropy)};
}

double system_action(const DiscretizedPath& x, double mass,
                     const std::function<double(double)>& potential) {
    x.validate();
    if (mass <= 0.0) throw std::invalid_argument("system_action: mass must be positive");
    const double dt = x.dt();
    double action = 0.0;
    for (int k = 0; k + 1 < static_cast<int>(x.samples.size()); ++k) {
        const double v = (x.samples(k + 1) - x.samples(k)) / dt;
        const double mid = 0.5 * (x.samples(k) + x.samples(k + 1));
        action += dt * (0.5 * mass * v * v - potential(mid));
    }
    return action;
}

DiscretizedPath random_smooth_path(Rng& rng, double tau, int knots, int harmonics,
                                   double amplitude, bool pin_endpoints) {
    if (knots < 3) throw std::invalid_argument("random_smooth_path: need at least 3 knots");
    std::vector<double> a(static_cast<std::size_t>(harmonics) + 1), b(a.size());
    for (auto& c : a) c = rng.normal();
    for (auto& c : b) c = rng.normal();

    DiscretizedPath path{tau, Eigen::VectorXd::Zero(knots)};
    for (int k = 0; k < knots; ++k) {
        const double t = tau * k / (knots - 1);
        double value = pin_endpoints ? 0.0 : a[0];
        for (int m = 1; m <= harmonics; ++m) {
            const double damp = 1.0 / (m * m);
            value += damp * b[static_cast<std::size_t>(m)] * std::sin(std::numbers::pi * m * t / tau);
            if (!pin_endpoints)
                value += damp * a[static_cast<std::size_t>(m)] *
                         std::cos(std::numbers::pi * m * t / tau);
        }
        path.samples(k) = amplitude * value;
    }
    return path;
}

OscillatorBath ladder_bath(int n_modes, double tau, double mass, double coupling,
                           double temperature, double hbar) {
    if (n_modes < 1) throw std::invalid_argument("ladder_bath: need at least one mode");
    if (tau <= 0.0) throw std::invalid_argument("ladder_bath: horizon must be positive");
    OscillatorBath bath;
    bath.temperature = temperature;
    bath.hbar = hbar;
    for (int n = 1; n <= n_modes; ++n)
        bath.modes.push_back(BathMode{mass, n * std::numbers::pi / tau, coupling});
    bath.validate();
    return bath;
}

}  // namespace dechist::qbm
