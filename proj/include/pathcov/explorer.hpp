#pragma once

#include "pathcov/alpha.hpp"
#include "pathcov/automaton.hpp"
#include "pathcov/lp.hpp"
#include "pathcov/paths.hpp"
#include "pathcov/rng.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathcov {

enum class StrategyKind { rw, uniform, exact_biased, approx_biased };

struct StrategySpec {
    StrategyKind kind = StrategyKind::uniform;
    std::size_t m_factor = 0; // approx: samples = m_factor * n
    std::size_t r = 0;        // approx: refinement threshold

    /// rw | uniform | exact | approx:<m-factor>:<r>
    std::string label() const;
};

/// Throws Error(usage) on an unknown name or malformed approx fields.
StrategySpec parse_strategy(std::string_view text);

/// max(1, 2 * eccentricity).
std::size_t default_length_bound(const Automaton& a);

/// Draws i ~ pi, then a uniform bounded path visiting i.
class BiasedSampler {
public:
    /// Throws Error(unreachable_mass) if some state with positive mass has no
    /// bounded path visiting it.
    BiasedSampler(const Automaton& a, const std::vector<double>& pi, std::size_t bound);

    Path sample(RngHandle& rng) const;

private:
    std::vector<StateId> support_;
    std::vector<double> cumulative_;
    std::vector<std::unique_ptr<VisitingSampler>> samplers_;
};

std::vector<Path> generate_biased(const Automaton& a, const CoverageDistribution& dist, std::size_t bound,
                                  std::size_t k, RngHandle& rng);

/// Per-strategy preprocessing shared by every trial: the count table, and for
/// the biased kinds the alpha matrix, the LP solution and the samplers.
class PreparedStrategy {
public:
    /// `seed` feeds the approximation pass of approx strategies.
    PreparedStrategy(const Automaton& a, const StrategySpec& spec, std::size_t bound, std::uint64_t seed);

    const StrategySpec& spec() const noexcept { return spec_; }
    std::size_t bound() const noexcept { return bound_; }
    const std::optional<CoverageDistribution>& distribution() const noexcept { return dist_; }
    const std::optional<AlphaMatrix>& alpha() const noexcept { return alpha_; }
    double preprocessing_seconds() const noexcept { return seconds_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    Path next(RngHandle& rng) const;

private:
    const Automaton* a_;
    StrategySpec spec_;
    std::size_t bound_;
    std::optional<PathCountTable> table_;
    std::optional<AlphaMatrix> alpha_;
    std::optional<CoverageDistribution> dist_;
    std::unique_ptr<BiasedSampler> biased_;
    double seconds_ = 0.0;
    std::vector<std::string> warnings_;
};

struct CoverageTrialResult {
    std::vector<double> thresholds;                  // percentages, ascending
    std::vector<std::optional<std::size_t>> first_hit; // paths generated when reached
    std::size_t total_states = 0;
    std::size_t paths_generated = 0;
    bool exhausted = false; // cap reached before the last threshold
    /// (1-based path index, states it covered first), in generation order.
    std::vector<std::pair<std::size_t, std::vector<StateId>>> trace;
};

/// Throws Error(domain) unless thresholds are ascending within (0, 100] and cap >= 1.
CoverageTrialResult run_coverage_trial(const Automaton& a, const PreparedStrategy& strategy,
                                       const std::vector<double>& thresholds, std::size_t cap, RngHandle& rng);

CoverageTrialResult run_coverage_trial(const Automaton& a, const StrategySpec& spec, std::size_t bound,
                                       const std::vector<double>& thresholds, std::size_t cap, RngHandle& rng);

struct ThresholdStats {
    double threshold = 0.0;
    std::size_t reached = 0; // trials that reached it
    std::optional<double> average;
    std::optional<std::size_t> minimum;
    std::optional<std::size_t> maximum;
};

struct StrategyReport {
    StrategySpec spec;
    std::vector<ThresholdStats> stats;
    std::optional<double> p_min;
    double preprocessing_seconds = 0.0;
    double trial_seconds = 0.0;
    std::vector<std::string> warnings;
};

struct ModelInfo {
    std::string name;
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t eccentricity = 0;
    std::size_t bound = 0;
    std::string paths; // exact grand total at `bound`
};

struct ExperimentOptions {
    std::string model_name = "model";
    std::optional<std::size_t> bound; // default 2 * eccentricity
    std::optional<std::size_t> cap;   // default from calibration
    std::size_t workers = 1;
};

struct ExperimentReport {
    ModelInfo model;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t cap = 0;
    std::vector<double> thresholds;
    std::vector<StrategyReport> strategies;
};

/// 10 x the paths a calibration uniform run needs for 100% coverage, at
/// least 1e5. A calibration run that never reaches 100% yields 1e6.
std::size_t default_cap(const Automaton& a, std::size_t bound, std::uint64_t seed);

/// T trials per strategy; trial t of every strategy uses seed + t.
ExperimentReport run_experiment(const Automaton& a, const std::vector<StrategySpec>& strategies,
                                const std::vector<double>& thresholds, std::size_t trials, std::uint64_t seed,
                                const ExperimentOptions& options = {});

std::string report_to_csv(const ExperimentReport& report);
/// Timings are left out unless asked for, so equal seeds give equal bytes.
std::string report_to_json(const ExperimentReport& report, bool include_timings = false);

/// Complete deterministic transition function drawn uniformly, finals drawn
/// with probability `final_density` (at least one), state 0 initial, then
/// trimmed. Retries up to 100 times on an empty trim, then Error(give_up).
/// Not a uniform sampler of trim automata.
Automaton random_trim_automaton(std::size_t n_target, std::size_t alphabet_size, double final_density,
                                RngHandle& rng);

} // namespace pathcov
