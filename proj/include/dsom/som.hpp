#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dsom/dissim.hpp"
#include "dsom/kernel.hpp"
#include "dsom/topology.hpp"

namespace dsom {

/// A_c for every neuron c: q observation indices each, pairwise disjoint.
/// Indices within a set are kept in selection order (best first).
using PrototypeSets = std::vector<std::vector<std::size_t>>;

struct SomState {
    std::vector<NeuronId> assignment;  // f, one neuron per observation
    PrototypeSets prototypes;
    double temperature = 1.0;
    std::size_t step = 0;

    bool operator==(const SomState&) const = default;
};

inline constexpr std::uint64_t default_seed = 20050101;

struct TrainConfig {
    std::size_t num_steps = 100;
    KernelKind kernel = KernelKind::gaussian;
    std::optional<double> t_init;  // unset: half the map diameter
    double t_final = 0.3;
    std::size_t q = 1;
    std::size_t restarts = 5;
    std::uint64_t seed = default_seed;
    /// Bypasses random initialization (all restarts then coincide).
    std::optional<PrototypeSets> initial_prototypes;

    /// Resolves the default t_init against the map. Never below t_final.
    TemperatureSchedule schedule(const MapGraph& g) const;
    void validate(std::size_t n, const MapGraph& g) const;
};

struct EnergyComponents {
    double quantization = 0.0;  // E_R
    double topology = 0.0;      // E_S
    double total() const { return quantization + topology; }
};

struct TrainedMap {
    SomState state;
    double energy = 0.0;  // at the final temperature
    EnergyComponents components;
    std::vector<double> energy_trace;  // one entry per iteration, each at its own T
    /// Energy of the chosen restart's random initialization at the final
    /// temperature, after an optimal assignment step.
    double initial_energy = 0.0;
    std::size_t restart = 0;
    MapGraph graph;
    TrainConfig config;
    TemperatureSchedule schedule;
};

/// Portable uniform integer in [0, bound). Unlike std::uniform_int_distribution
/// the output sequence is fixed by the generator alone.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// M*q distinct indices drawn uniformly without replacement, cut into M
/// consecutive sets of q.
PrototypeSets init_prototypes(std::uint64_t seed, std::size_t n, std::size_t num_neurons,
                              std::size_t q);

/// Checks the prototype-set invariants; throws std::invalid_argument.
void check_prototypes(const PrototypeSets& prototypes, std::size_t n, std::size_t num_neurons);

/// K^T(delta(r, c)) for all neuron pairs, row-major M x M.
std::vector<double> neighborhood_weights(const MapGraph& g, KernelKind kernel, double temperature);

/// gamma^T(x, r) = sum_c K^T(delta(r, c)) sum_{x_j in A_c} d(x, x_j).
double gamma(std::size_t x, NeuronId r, const SomState& s, const DissimMatrix& m,
             const MapGraph& g, KernelKind kernel, double temperature);

/// f(x) = argmin_r gamma^T(x, r), lowest neuron id on exact ties.
std::vector<NeuronId> assign_all(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                                 KernelKind kernel, double temperature);

/// e_c(x) = sum_i K^T(delta(f(x_i), c)) d(x_i, x) for every neuron c and
/// observation x, row-major M x N. Computed through per-neuron partial sums
/// D(r, x), O(N^2 + N M^2).
std::vector<double> representation_costs(const std::vector<NeuronId>& assignment,
                                         const DissimMatrix& m, const MapGraph& g,
                                         KernelKind kernel, double temperature);

/// Neurons in ascending id each claim the q cheapest observations not already
/// claimed in this pass; ties go to the lowest observation index.
PrototypeSets represent_all(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                            KernelKind kernel, double temperature);

double energy(const SomState& s, const DissimMatrix& m, const MapGraph& g, KernelKind kernel,
              double temperature);

EnergyComponents energy_components(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                                   KernelKind kernel, double temperature);

/// One assignment pass followed by one representation pass at a fixed
/// temperature. Returns true when either step changed the state.
bool batch_iteration(SomState& s, const DissimMatrix& m, const MapGraph& g, KernelKind kernel,
                     double temperature);

/// Full training with restarts; keeps the restart of lowest final energy
/// (lowest restart index on ties). Restart r is seeded with seed + r.
TrainedMap train(const DissimMatrix& m, const MapGraph& g, const TrainConfig& cfg);

/// Spearman rank correlation (average ranks for ties). Returns 0 when either
/// side is constant.
double rank_correlation(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman correlation between delta(c, r) and the dissimilarity between the
/// prototype sets of c and r, over all pairs c < r.
double topographic_correlation(const SomState& s, const DissimMatrix& m, const MapGraph& g);

/// Number of observations assigned to each neuron.
std::vector<std::size_t> class_sizes(const SomState& s, std::size_t num_neurons);

}  // namespace dsom
