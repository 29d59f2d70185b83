#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dechist/hilbert.hpp"

namespace dechist::histories {

/// Thrown by find_records when the induced decoherence functional is
/// not diagonal to the requested tolerance.
class NoRecordsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by effective_density on a branch of vanishing norm.
class NullBranchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One label per time, indexing into the projector family at that time.
using HistoryIndex = std::vector<int>;

/// The data defining a set of histories: a Hamiltonian, strictly
/// increasing times, and one projector family per time. An optional
/// preparation time adds evolution from t0 to the first time; by
/// default the first projector acts on the initial state directly.
struct HistorySpec {
    Operator hamiltonian;
    std::vector<double> times;
    std::vector<ProjectorFamily> families;
    double hbar = 1.0;
    std::optional<double> preparation_time;

    void validate() const;
    int n_times() const { return static_cast<int>(times.size()); }
    std::size_t history_count() const;
};

class DecoherenceMatrix {
public:
    DecoherenceMatrix(std::vector<int> family_sizes,
                      std::vector<std::vector<std::string>> labels, Operator entries,
                      double tolerance);

    int n_times() const { return static_cast<int>(family_sizes_.size()); }
    const std::vector<int>& family_sizes() const { return family_sizes_; }
    const std::vector<std::vector<std::string>>& labels() const { return labels_; }
    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    const Operator& entries() const { return entries_; }
    double tolerance() const { return tolerance_; }

    std::size_t flat_index(const HistoryIndex& alpha) const;
    HistoryIndex index_at(std::size_t flat) const;
    Complex entry(const HistoryIndex& a, const HistoryIndex& b) const;

private:
    std::vector<int> family_sizes_;
    std::vector<std::vector<std::string>> labels_;
    Operator entries_;  // histories x histories, lexicographic flat order
    double tolerance_;
};

inline constexpr double default_decoherence_tolerance = 1e-8;

// All operations below are pure functions of immutable inputs and may
// run concurrently; the engine holds no state between calls.

/// C_alpha: the final projector, then alternating evolution operators
/// and projectors back to the first time; no evolution precedes the
/// first projector unless a preparation time is set.
Operator class_operator(const HistorySpec& spec, const HistoryIndex& alpha);

DecoherenceMatrix decoherence_matrix(const HistorySpec& spec, const DensityOperator& rho,
                                     double tolerance = default_decoherence_tolerance);

struct ProbabilityTable {
    std::vector<int> family_sizes;
    std::vector<double> p;  // lexicographic flat order
    double sum_rule_defect = 0.0;
};

/// Diagonal probabilities plus the worst sum-rule violation over
/// single merges of adjacent labels within one family.
ProbabilityTable probabilities(const DecoherenceMatrix& d);

/// max |D(a,b)| / sqrt(D(a,a) D(b,b)) over distinct pairs.
double decoherence_defect(const DecoherenceMatrix& d);
/// Same with |Re D(a,b)|: the weaker consistency condition.
double consistency_defect(const DecoherenceMatrix& d);

/// Coarse graining: sum the rows/columns of two labels of one family.
DecoherenceMatrix merge_labels(const DecoherenceMatrix& d, int time_index, int label_a,
                               int label_b);

struct RecordProjectorSet {
    ProjectorFamily projectors;
    std::map<HistoryIndex, int> correlation_map;  // history -> projector position
};

/// Projectors onto the orthonormalized branch supports of a pure
/// state, one per surviving history, plus a complement block.
RecordProjectorSet find_records(const HistorySpec& spec, const PureState& psi,
                                double defect_tol = default_decoherence_tolerance);

struct JointDistribution {
    std::vector<int> family_sizes;
    std::vector<std::string> record_labels;
    Eigen::MatrixXd p;  // histories x records
};

JointDistribution joint_probability(const HistorySpec& spec, const DensityOperator& rho,
                                    const RecordProjectorSet& records);

struct ConditionalRecordTable {
    std::vector<int> family_sizes;
    std::vector<double> best;      // max_beta p(beta|alpha), per history
    std::vector<int> best_record;  // argmax record position, -1 if skipped
    std::vector<bool> defined;     // false where p(alpha) == 0
};

ConditionalRecordTable conditional_record_probability(const JointDistribution& joint);

struct EffectiveDensity {
    DensityOperator rho;
    double purity;
};

/// Normalized branch state C_a rho C_a^dag / tr and its purity.
EffectiveDensity effective_density(const HistorySpec& spec, const DensityOperator& rho,
                                   const HistoryIndex& alpha);

struct RecordCapacity {
    std::uint64_t min_records;
    bool saturated;  // true when the count exceeds 2^63
};

/// Least number of distinct record states compatible with decoherence
/// of n-time histories with `alternatives` choices per time.
RecordCapacity record_capacity_check(std::uint64_t alternatives, std::uint64_t n_times);

}  // namespace dechist::histories
