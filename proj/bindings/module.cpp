#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dechist/histories.hpp"
#include "dechist/qbm_records.hpp"
#include "dechist/random.hpp"
#include "dechist/two_state.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace dechist;

namespace {

ProjectorFamily family_from_lists(const std::vector<Operator>& members,
                                  const std::vector<std::string>& labels) {
    if (labels.empty()) {
        std::vector<std::string> numbered;
        for (std::size_t i = 0; i < members.size(); ++i) numbered.push_back(std::to_string(i));
        return ProjectorFamily(members, numbered);
    }
    return ProjectorFamily(members, labels);
}

histories::HistorySpec make_spec(const Operator& hamiltonian, const std::vector<double>& times,
                                 const std::vector<std::vector<Operator>>& families,
                                 const std::vector<std::vector<std::string>>& labels,
                                 double hbar) {
    histories::HistorySpec spec;
    spec.hamiltonian = hamiltonian;
    spec.times = times;
    for (std::size_t k = 0; k < families.size(); ++k)
        spec.families.push_back(family_from_lists(
            families[k], k < labels.size() ? labels[k] : std::vector<std::string>{}));
    spec.hbar = hbar;
    spec.validate();
    return spec;
}

qbm::DiscretizedPath make_path(double horizon, const Eigen::VectorXd& samples) {
    qbm::DiscretizedPath path{horizon, samples};
    path.validate();
    return path;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "decoherent-histories toolkit: class operators, decoherence "
              "functionals, records, and oscillator-bath influence machinery";
    m.attr("__version__") = "0.1.0";

    py::register_exception<histories::NoRecordsError>(m, "NoRecordsError", PyExc_RuntimeError);
    py::register_exception<histories::NullBranchError>(m, "NullBranchError", PyExc_RuntimeError);
    py::register_exception<qbm::ResonantHorizonError>(m, "ResonantHorizonError",
                                                      PyExc_RuntimeError);

    // ---- operator algebra ------------------------------------------

    m.def("tensor", py::overload_cast<const Operator&, const Operator&>(&tensor), "a"_a, "b"_a,
          "Kronecker product, first factor slow");
    m.def(
        "tensor_state",
        [](const StateVector& a, const StateVector& b) { return tensor(a, b); }, "a"_a, "b"_a);
    m.def(
        "partial_trace",
        [](const Operator& op, const std::vector<Eigen::Index>& dims,
           const std::vector<int>& keep) { return partial_trace(op, dims, keep); },
        "op"_a, "dims"_a, "keep"_a, "Trace out the factors not listed in keep");
    m.def("evolve", &evolve, "hamiltonian"_a, "t"_a, "hbar"_a = 1.0,
          "exp(-i H t / hbar) via the eigendecomposition of a Hermitian H");
    m.def(
        "purify",
        [](const Operator& rho) { return purify(DensityOperator(rho)).amplitudes(); }, "rho"_a,
        "Pure amplitudes on the doubled space whose reduced state is rho");

    py::class_<ProjectorFamily>(m, "ProjectorFamily")
        .def(py::init(&family_from_lists), "members"_a, "labels"_a = std::vector<std::string>{})
        .def_property_readonly("members", &ProjectorFamily::members)
        .def_property_readonly("labels", &ProjectorFamily::labels)
        .def("__len__", &ProjectorFamily::size);

    // ---- histories ---------------------------------------------------

    py::class_<histories::HistorySpec>(m, "HistorySpec")
        .def(py::init(&make_spec), "hamiltonian"_a, "times"_a, "families"_a,
             "labels"_a = std::vector<std::vector<std::string>>{}, "hbar"_a = 1.0)
        .def_readonly("times", &histories::HistorySpec::times)
        .def_readonly("hbar", &histories::HistorySpec::hbar)
        .def_property_readonly("history_count", &histories::HistorySpec::history_count);

    py::class_<histories::DecoherenceMatrix>(m, "DecoherenceMatrix")
        .def_property_readonly("entries", &histories::DecoherenceMatrix::entries)
        .def_property_readonly("family_sizes", &histories::DecoherenceMatrix::family_sizes)
        .def_property_readonly("labels", &histories::DecoherenceMatrix::labels)
        .def_property_readonly("tolerance", &histories::DecoherenceMatrix::tolerance)
        .def("flat_index", &histories::DecoherenceMatrix::flat_index, "alpha"_a)
        .def("index_at", &histories::DecoherenceMatrix::index_at, "flat"_a)
        .def("__len__", &histories::DecoherenceMatrix::size);

    m.def("class_operator", &histories::class_operator, "spec"_a, "alpha"_a);
    m.def(
        "decoherence_matrix",
        [](const histories::HistorySpec& spec, const Operator& rho, double tolerance) {
            return histories::decoherence_matrix(spec, DensityOperator(rho), tolerance);
        },
        "spec"_a, "rho"_a, "tolerance"_a = histories::default_decoherence_tolerance);
    m.def(
        "probabilities",
        [](const histories::DecoherenceMatrix& d) {
            const histories::ProbabilityTable table = histories::probabilities(d);
            return py::make_tuple(table.p, table.sum_rule_defect);
        },
        "d"_a, "Diagonal probabilities and the worst single-merge sum-rule defect");
    m.def("decoherence_defect", &histories::decoherence_defect, "d"_a);
    m.def("consistency_defect", &histories::consistency_defect, "d"_a);
    m.def("merge_labels", &histories::merge_labels, "d"_a, "time_index"_a, "label_a"_a,
          "label_b"_a);

    py::class_<histories::RecordProjectorSet>(m, "RecordProjectorSet")
        .def_readonly("projectors", &histories::RecordProjectorSet::projectors)
        .def_readonly("correlation_map", &histories::RecordProjectorSet::correlation_map);

    m.def(
        "find_records",
        [](const histories::HistorySpec& spec, const StateVector& psi, double tol) {
            return histories::find_records(spec, PureState(psi), tol);
        },
        "spec"_a, "psi"_a, "defect_tol"_a = histories::default_decoherence_tolerance);

    py::class_<histories::JointDistribution>(m, "JointDistribution")
        .def_readonly("p", &histories::JointDistribution::p)
        .def_readonly("record_labels", &histories::JointDistribution::record_labels)
        .def_readonly("family_sizes", &histories::JointDistribution::family_sizes);

    m.def(
        "joint_probability",
        [](const histories::HistorySpec& spec, const Operator& rho,
           const histories::RecordProjectorSet& records) {
            return histories::joint_probability(spec, DensityOperator(rho), records);
        },
        "spec"_a, "rho"_a, "records"_a);
    m.def(
        "conditional_record_probability",
        [](const histories::JointDistribution& joint) {
            const histories::ConditionalRecordTable t =
                histories::conditional_record_probability(joint);
            return py::make_tuple(t.best, t.best_record, t.defined);
        },
        "joint"_a);
    m.def(
        "effective_density",
        [](const histories::HistorySpec& spec, const Operator& rho,
           const histories::HistoryIndex& alpha) {
            const histories::EffectiveDensity eff =
                histories::effective_density(spec, DensityOperator(rho), alpha);
            return py::make_tuple(eff.rho.matrix(), eff.purity);
        },
        "spec"_a, "rho"_a, "alpha"_a);
    m.def(
        "record_capacity",
        [](std::uint64_t alternatives, std::uint64_t n_times) {
            const histories::RecordCapacity c =
                histories::record_capacity_check(alternatives, n_times);
            return py::make_tuple(c.min_records, c.saturated);
        },
        "alternatives"_a, "n_times"_a,
        "Least record count compatible with decoherence, with a saturation flag");

    // ---- two-state detector model ------------------------------------

    py::module_ ts = m.def_submodule("twostate", "kicked two-level detector model");

    py::class_<twostate::Config>(ts, "Config")
        .def(py::init<>())
        .def_readwrite("grid_points", &twostate::Config::grid_points)
        .def_readwrite("box_length", &twostate::Config::box_length)
        .def_readwrite("mass", &twostate::Config::mass)
        .def_readwrite("t1", &twostate::Config::t1)
        .def_readwrite("t_final", &twostate::Config::t_final)
        .def_readwrite("region_a", &twostate::Config::region_a)
        .def_readwrite("region_b", &twostate::Config::region_b)
        .def_readwrite("lambda_over_hbar", &twostate::Config::lambda_over_hbar)
        .def_readwrite("hbar", &twostate::Config::hbar)
        .def_readwrite("weight_a", &twostate::Config::weight_a)
        .def_readwrite("weight_b", &twostate::Config::weight_b)
        .def_readwrite("final_bins", &twostate::Config::final_bins);

    ts.def("window_mask", &twostate::window_mask, "config"_a);
    ts.def(
        "kinetic_hamiltonian",
        [](const twostate::Config& c) { return twostate::build_model(c).h0; }, "config"_a);
    ts.def(
        "detection_probability",
        [](const twostate::Config& c, const StateVector& psi) {
            return twostate::detection_probability(twostate::build_model(c), PureState(psi));
        },
        "config"_a, "psi"_a);
    ts.def(
        "branch_state",
        [](const twostate::Config& c, const StateVector& psi, int alpha1, int alpha2) {
            return twostate::branch_state(twostate::build_model(c), PureState(psi), alpha1,
                                          alpha2);
        },
        "config"_a, "psi"_a, "alpha1"_a, "alpha2"_a,
        "Composite branch amplitudes; alpha1 = 0 means the detector fires");

    py::class_<twostate::JointTable>(ts, "JointTable")
        .def_readonly("n_bins", &twostate::JointTable::n_bins)
        .def("p", &twostate::JointTable::p, "alpha1"_a, "alpha2"_a, "beta"_a)
        .def("marginal_alpha1", &twostate::JointTable::marginal_alpha1, "alpha1"_a)
        .def("conditional_record", &twostate::JointTable::conditional_record, "alpha1"_a,
             "beta"_a);

    ts.def(
        "joint_prob_mixed",
        [](const twostate::Config& c, const StateVector& psi) {
            return twostate::joint_prob_mixed(twostate::build_model(c), PureState(psi));
        },
        "config"_a, "psi"_a);
    ts.def(
        "decoherence_matrix",
        [](const twostate::Config& c, const StateVector& psi) {
            return twostate::history_decoherence_matrix(twostate::build_model(c),
                                                        PureState(psi));
        },
        "config"_a, "psi"_a);
    ts.def("cosine_influence", &twostate::cosine_influence, "x_in_region"_a, "y_in_region"_a);

    // ---- oscillator bath ----------------------------------------------

    py::module_ qb = m.def_submodule("qbm", "oscillator-bath influence machinery");

    py::class_<qbm::BathMode>(qb, "BathMode")
        .def(py::init<double, double, double>(), "mass"_a, "omega"_a, "coupling"_a)
        .def_readwrite("mass", &qbm::BathMode::mass)
        .def_readwrite("omega", &qbm::BathMode::omega)
        .def_readwrite("coupling", &qbm::BathMode::coupling);

    py::class_<qbm::OscillatorBath>(qb, "OscillatorBath")
        .def(py::init([](std::vector<qbm::BathMode> modes, double temperature, double hbar) {
                 qbm::OscillatorBath bath{std::move(modes), temperature, hbar};
                 bath.validate();
                 return bath;
             }),
             "modes"_a, "temperature"_a = 0.0, "hbar"_a = 1.0)
        .def_readwrite("modes", &qbm::OscillatorBath::modes)
        .def_readwrite("temperature", &qbm::OscillatorBath::temperature)
        .def_readwrite("hbar", &qbm::OscillatorBath::hbar);

    py::class_<qbm::DiscretizedPath>(qb, "DiscretizedPath")
        .def(py::init(&make_path), "horizon"_a, "samples"_a)
        .def_readonly("horizon", &qbm::DiscretizedPath::horizon)
        .def_readonly("samples", &qbm::DiscretizedPath::samples);

    qb.def("eta_kernel", &qbm::eta_kernel, "s"_a, "bath"_a);
    qb.def("nu_kernel", &qbm::nu_kernel, "s"_a, "bath"_a);
    qb.def("gamma_kernel", &qbm::gamma_kernel, "s"_a, "bath"_a);
    qb.def(
        "ohmic_kernels",
        [](double m_gamma, double cutoff, double temperature, double hbar, double s) {
            const qbm::KernelSample k = qbm::spectral_kernels(
                qbm::SpectralDensity::ohmic(m_gamma, cutoff, temperature, hbar), s);
            return py::make_tuple(k.nu, k.gamma);
        },
        "m_gamma"_a, "cutoff"_a, "temperature"_a, "hbar"_a, "s"_a,
        "(nu, gamma) of the ohmic spectral density at lag s");

    qb.def(
        "influence_phase",
        [](const qbm::DiscretizedPath& x, const qbm::DiscretizedPath& y,
           const qbm::OscillatorBath& bath) { return qbm::influence_phase(x, y, bath); },
        "x"_a, "y"_a, "bath"_a, "Complex phase W[x, y] of the traced-out bath");

    py::class_<qbm::FourierModes>(qb, "FourierModes")
        .def(py::init<double, double>(), "x_sin"_a, "x_cos"_a)
        .def_readwrite("x_sin", &qbm::FourierModes::x_sin)
        .def_readwrite("x_cos", &qbm::FourierModes::x_cos);

    qb.def("fourier_modes", &qbm::fourier_modes, "x"_a, "mode"_a);
    qb.def("im_w_fourier", &qbm::im_w_fourier, "x"_a, "y"_a, "bath"_a);

    py::class_<qbm::DecoherenceCondition>(qb, "DecoherenceCondition")
        .def_readonly("exponent", &qbm::DecoherenceCondition::exponent)
        .def_readonly("decoherent", &qbm::DecoherenceCondition::decoherent)
        .def_readonly("adjacent_suppression", &qbm::DecoherenceCondition::adjacent_suppression)
        .def_readonly("threshold", &qbm::DecoherenceCondition::threshold);

    qb.def("decoherence_condition", &qbm::decoherence_condition, "mode"_a, "temperature"_a,
           "delta"_a, "hbar"_a = 1.0, "threshold"_a = 10.0);

    py::class_<qbm::CoarseGraining>(qb, "CoarseGraining")
        .def(py::init([](double delta, const qbm::FourierModes& center) {
                 qbm::CoarseGraining cg{delta, center};
                 cg.validate();
                 return cg;
             }),
             "delta"_a, "center"_a)
        .def_readwrite("delta", &qbm::CoarseGraining::delta)
        .def_readwrite("center", &qbm::CoarseGraining::center);

    qb.def("cell_suppression", &qbm::cell_suppression, "a"_a, "b"_a, "mode"_a, "temperature"_a,
           "hbar"_a = 1.0);

    py::class_<qbm::PhasePoint>(qb, "PhasePoint")
        .def_readonly("q", &qbm::PhasePoint::q)
        .def_readonly("p", &qbm::PhasePoint::p);

    qb.def("classical_response", &qbm::classical_response, "x"_a, "mode"_a, "q0"_a, "p0"_a);
    qb.def("classical_trajectory", &qbm::classical_trajectory, "x"_a, "mode"_a, "q0"_a, "p0"_a);

    qb.def("generalized_influence", &qbm::generalized_influence, "x"_a, "y"_a, "mode"_a,
           "temperature"_a, "hbar"_a, "q_pp"_a, "r_pp"_a);
    qb.def("displaced_thermal_element", &qbm::displaced_thermal_element, "mode"_a,
           "temperature"_a, "hbar"_a, "q_pp"_a, "r_pp"_a, "x"_a, "y"_a);

    py::class_<qbm::GaussianWidths>(qb, "GaussianWidths")
        .def_readonly("history_width", &qbm::GaussianWidths::history_width)
        .def_readonly("record_width", &qbm::GaussianWidths::record_width);

    qb.def("gaussian_widths", &qbm::gaussian_widths, "mode"_a, "temperature"_a, "hbar"_a = 1.0);

    qb.def(
        "record_trace_factor",
        [](std::pair<double, double> window, const qbm::BathMode& mode, double temperature,
           double hbar, const qbm::FourierModes& x) {
            return qbm::record_trace_factor(qbm::Window{window.first, window.second}, mode,
                                            temperature, hbar, x);
        },
        "window"_a, "mode"_a, "temperature"_a, "hbar"_a, "modes"_a,
        "Weight of a position-window record against the displaced thermal marginal");
    qb.def(
        "phase_cell_trace_factor",
        [](std::pair<double, double> q_window, std::pair<double, double> p_window,
           const qbm::BathMode& mode, double temperature, double hbar,
           const qbm::FourierModes& x) {
            return qbm::record_trace_factor(
                qbm::PhaseSpaceCell{qbm::Window{q_window.first, q_window.second},
                                    qbm::Window{p_window.first, p_window.second}},
                mode, temperature, hbar, x);
        },
        "q_window"_a, "p_window"_a, "mode"_a, "temperature"_a, "hbar"_a, "modes"_a);

    py::class_<qbm::InfoCount>(qb, "InfoCount")
        .def_readonly("n_d_max", &qbm::InfoCount::n_d_max)
        .def_readonly("n_env", &qbm::InfoCount::n_env)
        .def_readonly("ratio", &qbm::InfoCount::ratio)
        .def_readonly("entropy_factor", &qbm::InfoCount::entropy_factor);

    qb.def("info_counts", &qbm::info_counts, "mode"_a, "temperature"_a, "box_length"_a, "tau"_a,
           "hbar"_a = 1.0);

    py::class_<qbm::PropagatorCoefficients>(qb, "PropagatorCoefficients")
        .def_readonly("a", &qbm::PropagatorCoefficients::a)
        .def_readonly("b", &qbm::PropagatorCoefficients::b)
        .def_readonly("c", &qbm::PropagatorCoefficients::c)
        .def_readonly("d", &qbm::PropagatorCoefficients::d)
        .def_readonly("f", &qbm::PropagatorCoefficients::f);

    qb.def("propagator_coefficients", &qbm::propagator_coefficients, "x"_a, "mode"_a,
           "hbar"_a = 1.0);

    py::class_<qbm::ThermalCoefficients>(qb, "ThermalCoefficients")
        .def_readonly("A", &qbm::ThermalCoefficients::A)
        .def_readonly("B", &qbm::ThermalCoefficients::B);

    qb.def("thermal_coefficients", &qbm::thermal_coefficients, "mode"_a, "temperature"_a,
           "hbar"_a = 1.0);

    qb.def("system_action", &qbm::system_action, "x"_a, "mass"_a, "potential"_a);

    qb.def(
        "random_smooth_path",
        [](std::uint64_t seed, double tau, int knots, int harmonics, double amplitude,
           bool pin_endpoints) {
            Rng rng(seed);
            return qbm::random_smooth_path(rng, tau, knots, harmonics, amplitude, pin_endpoints);
        },
        "seed"_a, "tau"_a, "knots"_a, "harmonics"_a = 4, "amplitude"_a = 1.0,
        "pin_endpoints"_a = false);
    qb.def("ladder_bath", &qbm::ladder_bath, "n_modes"_a, "tau"_a, "mass"_a, "coupling"_a,
           "temperature"_a, "hbar"_a = 1.0);
}
