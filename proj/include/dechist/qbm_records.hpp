#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "dechist/qbm_kernels.hpp"
#include "dechist/random.hpp"

namespace dechist::qbm {

/// Fourier-type functionals of one trajectory for one bath mode:
/// X_s = int x(t) sin w(tau - t) dt, X_c likewise with cosine.
struct FourierModes {
    double x_sin;
    double x_cos;
};

FourierModes fourier_modes(const DiscretizedPath& x, const BathMode& mode);

/// Im W assembled per mode from the Fourier functionals:
/// sum c^2/(4 m w) coth(hbar w / 2kT) [(Xs-Ys)^2 + (Xc-Yc)^2].
double im_w_fourier(const std::vector<FourierModes>& x, const std::vector<FourierModes>& y,
                    const OscillatorBath& bath);

struct DecoherenceCondition {
    double exponent;              // Delta^2 c^2/(m hbar w) coth(hbar w / 2kT)
    bool decoherent;              // exponent >= threshold
    double adjacent_suppression;  // exp(-exponent / 4) between neighbouring cells
    double threshold;
};

DecoherenceCondition decoherence_condition(const BathMode& mode, double temperature,
                                           double delta, double hbar, double threshold = 10.0);

/// One mode's coarse graining: cells of width `delta` around centers
/// in the (X_s, X_c) plane.
struct CoarseGraining {
    double delta;
    FourierModes center;

    void validate() const;
};

/// Off-diagonal magnitude exp(-Im W / hbar) between two cells of one
/// mode, evaluated at the cell centers.
double cell_suppression(const CoarseGraining& a, const CoarseGraining& b, const BathMode& mode,
                        double temperature, double hbar);

struct PhasePoint {
    double q;
    double p;
};

/// Final phase-space point of a bath oscillator driven by x(t); the
/// driven part is proportional to the Fourier functionals.
PhasePoint classical_response(const DiscretizedPath& x, const BathMode& mode, double q0,
                              double p0);

/// The driven solution sampled on the path grid.
std::vector<PhasePoint> classical_trajectory(const DiscretizedPath& x, const BathMode& mode,
                                             double q0, double p0);

/// Influence functional with open final ends q'', r'' for one mode,
/// built on the normalized thermal Gaussian. Setting r'' = q'' and
/// integrating over q'' recovers the closed per-mode factor. The
/// evaluator caches the path functionals so repeated (q'', r'')
/// evaluations cost O(1).
class GeneralizedInfluence {
public:
    GeneralizedInfluence(const DiscretizedPath& x, const DiscretizedPath& y,
                         const BathMode& mode, double temperature, double hbar);
    std::complex<double> operator()(double q_pp, double r_pp) const;

    double shift_x() const { return xs_shift_x_; }  // Xs~ of the x path
    double shift_y() const { return xs_shift_y_; }

private:
    ThermalCoefficients tc_;
    double norm_;
    double xs_shift_x_, xs_shift_y_;  // (c/mw) Xs
    double p_shift_x_, p_shift_y_;    // c Xc
    double static_phase_;             // q''-independent part
    double hbar_;
};

std::complex<double> generalized_influence(const DiscretizedPath& x, const DiscretizedPath& y,
                                           const BathMode& mode, double temperature, double hbar,
                                           double q_pp, double r_pp);

/// Matrix element <q''| U(-Xs~, -c Xc) rho_thermal U^dag(-Ys~, -c Yc) |r''>
/// of the displaced thermal state; equals the generalized influence
/// functional up to a path-dependent global phase.
std::complex<double> displaced_thermal_element(const BathMode& mode, double temperature,
                                               double hbar, double q_pp, double r_pp,
                                               const FourierModes& x, const FourierModes& y);

struct GaussianWidths {
    double history_width;  // (2A+B)^{-1/2}: resolution of the decohering modes
    double record_width;   // (2A-B)^{-1/2}: spread of the recording marginal
};

GaussianWidths gaussian_widths(const BathMode& mode, double temperature, double hbar);

struct Window {
    double lo;
    double hi;
};

struct PhaseSpaceCell {
    Window position;
    Window momentum;
};

/// Tr(R U rho U^dag) for a position-window record projector against
/// the displaced thermal marginal; approaches 1 with growing width.
double record_trace_factor(const Window& window, const BathMode& mode, double temperature,
                           double hbar, const FourierModes& x);
/// Phase-space cell variant: product of the position and momentum
/// marginal weights (the thermal state factorizes).
double record_trace_factor(const PhaseSpaceCell& cell, const BathMode& mode, double temperature,
                           double hbar, const FourierModes& x);

struct InfoCount {
    double n_d_max;         // upper bound on histories in the decoherent set
    double n_env;           // distinct environment states swept out
    double ratio;           // n_d_max / n_env = coth(hbar w / 2kT)
    double entropy_factor;  // exp(S) of the thermal mode, reported alongside
};

InfoCount info_counts(const BathMode& mode, double temperature, double box_length, double tau,
                      double hbar);

/// Midpoint-velocity trapezoid action of the system path.
double system_action(const DiscretizedPath& x, double mass,
                     const std::function<double(double)>& potential);

/// Smooth random test path: a short, seeded harmonic sum. With pinned
/// endpoints the path vanishes at t = 0 and t = tau.
DiscretizedPath random_smooth_path(Rng& rng, double tau, int knots, int harmonics = 4,
                                   double amplitude = 1.0, bool pin_endpoints = false);

/// Bath whose frequencies sit on the ladder w_n = n pi / tau, making
/// the mode functionals a complete basis on [0, tau].
OscillatorBath ladder_bath(int n_modes, double tau, double mass, double coupling,
                           double temperature, double hbar = 1.0);

}  // namespace dechist::qbm
