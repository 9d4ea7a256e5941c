#include "dsom/som.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsom {

namespace {

/// P(c, x) = sum_{x_j in A_c} d(x, x_j), row-major M x N.
std::vector<double> prototype_sums(const PrototypeSets& prototypes, const DissimMatrix& m) {
    const std::size_t n = m.size();
    std::vector<double> sums(prototypes.size() * n, 0.0);
    for (std::size_t c = 0; c < prototypes.size(); ++c) {
        double* row = sums.data() + c * n;
        for (std::size_t j : prototypes[c]) {
            const auto dj = m.row(j);
            for (std::size_t x = 0; x < n; ++x) row[x] += dj[x];
        }
    }
    return sums;
}

}  // namespace

TemperatureSchedule TrainConfig::schedule(const MapGraph& g) const {
    TemperatureSchedule sched;
    sched.num_steps = num_steps;
    sched.t_final = t_final;
    sched.t_init = t_init ? *t_init : std::max(g.max_dist() / 2.0, t_final);
    return sched;
}

void TrainConfig::validate(std::size_t n, const MapGraph& g) const {
    if (num_steps == 0) throw std::invalid_argument("num_steps must be positive");
    if (q == 0) throw std::invalid_argument("q must be positive");
    if (restarts == 0) throw std::invalid_argument("restarts must be positive");
    schedule(g).validate();
    if (g.num_neurons() * q > n) {
        throw std::invalid_argument("M*q = " + std::to_string(g.num_neurons() * q) +
                                    " exceeds N = " + std::to_string(n));
    }
    if (initial_prototypes) {
        check_prototypes(*initial_prototypes, n, g.num_neurons());
        for (const auto& set : *initial_prototypes) {
            if (set.size() != q) throw std::invalid_argument("initial prototype set size != q");
        }
    }
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("empty range");
    // Reject the low 2^64 mod bound values so the modulo is unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

PrototypeSets init_prototypes(std::uint64_t seed, std::size_t n, std::size_t num_neurons,
                              std::size_t q) {
    if (q == 0 || num_neurons == 0) throw std::invalid_argument("need q >= 1 and M >= 1");
    const std::size_t total = num_neurons * q;
    if (total > n) {
        throw std::invalid_argument("cannot draw " + std::to_string(total) +
                                    " disjoint prototypes from " + std::to_string(n) +
                                    " observations");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `total` slots become a uniform sample.
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t k = i + uniform_below(rng, n - i);
        std::swap(pool[i], pool[k]);
    }
    PrototypeSets sets(num_neurons);
    for (std::size_t c = 0; c < num_neurons; ++c) {
        sets[c].assign(pool.begin() + c * q, pool.begin() + (c + 1) * q);
    }
    return sets;
}

void check_prototypes(const PrototypeSets& prototypes, std::size_t n, std::size_t num_neurons) {
    if (prototypes.size() != num_neurons) {
        throw std::invalid_argument("need one prototype set per neuron");
    }
    std::vector<bool> used(n, false);
    const std::size_t q = prototypes.empty() ? 0 : prototypes.front().size();
    for (const auto& set : prototypes) {
        if (set.empty() || set.size() != q) {
            throw std::invalid_argument("prototype sets must all have the same positive size");
        }
        for (std::size_t j : set) {
            if (j >= n) throw std::invalid_argument("prototype index out of range");
            if (used[j]) throw std::invalid_argument("prototype sets overlap at " + std::to_string(j));
            used[j] = true;
        }
    }
}

std::vector<double> neighborhood_weights(const MapGraph& g, KernelKind kernel, double temperature) {
    const std::size_t num = g.num_neurons();
    std::vector<double> w(num * num);
    for (std::size_t r = 0; r < num; ++r) {
        for (std::size_t c = 0; c < num; ++c) {
            w[r * num + c] = kernel_value(kernel, temperature, g.dist(r, c));
        }
    }
    return w;
}

double gamma(std::size_t x, NeuronId r, const SomState& s, const DissimMatrix& m,
             const MapGraph& g, KernelKind kernel, double temperature) {
    if (x >= m.size() || r >= g.num_neurons()) throw std::invalid_argument("index out of range");
    double total = 0.0;
    for (NeuronId c = 0; c < g.num_neurons(); ++c) {
        const double k = kernel_value(kernel, temperature, g.dist(r, c));
        if (k == 0.0) continue;
        double sum = 0.0;
        for (std::size_t j : s.prototypes[c]) sum += m(x, j);
        total += k * sum;
    }
    return total;
}

std::vector<NeuronId> assign_all(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                                 KernelKind kernel, double temperature) {
    const std::size_t n = m.size();
    const std::size_t num = g.num_neurons();
    const std::vector<double> w = neighborhood_weights(g, kernel, temperature);
    const std::vector<double> sums = prototype_sums(s.prototypes, m);

    std::vector<NeuronId> assignment(n, 0);
    std::vector<double> best(n, 0.0);
    std::vector<double> cost(n);
    for (NeuronId r = 0; r < num; ++r) {
        std::fill(cost.begin(), cost.end(), 0.0);
        for (NeuronId c = 0; c < num; ++c) {
            const double k = w[r * num + c];
            if (k == 0.0) continue;
            const double* row = sums.data() + c * n;
            for (std::size_t x = 0; x < n; ++x) cost[x] += k * row[x];
        }
        for (std::size_t x = 0; x < n; ++x) {
            // Strict comparison keeps the lowest neuron id on ties.
            if (r == 0 || cost[x] < best[x]) {
                best[x] = cost[x];
                assignment[x] = r;
            }
        }
    }
    return assignment;
}

std::vector<double> representation_costs(const std::vector<NeuronId>& assignment,
                                         const DissimMatrix& m, const MapGraph& g,
                                         KernelKind kernel, double temperature) {
    const std::size_t n = m.size();
    const std::size_t num = g.num_neurons();
    if (assignment.size() != n) throw std::invalid_argument("assignment size != N");

    // D(r, x) = sum over x_i in class r of d(x_i, x).
    std::vector<double> partial(num * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] >= num) throw std::invalid_argument("assignment names unknown neuron");
        double* row = partial.data() + assignment[i] * n;
        const auto di = m.row(i);
        for (std::size_t x = 0; x < n; ++x) row[x] += di[x];
    }

    const std::vector<double> w = neighborhood_weights(g, kernel, temperature);
    std::vector<double> costs(num * n, 0.0);
    for (NeuronId c = 0; c < num; ++c) {
        double* out = costs.data() + c * n;
        for (NeuronId r = 0; r < num; ++r) {
            const double k = w[c * num + r];
            if (k == 0.0) continue;
            const double* row = partial.data() + r * n;
            for (std::size_t x = 0; x < n; ++x) out[x] += k * row[x];
        }
    }
    return costs;
}

PrototypeSets represent_all(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                            KernelKind kernel, double temperature) {
    const std::size_t n = m.size();
    const std::size_t num = g.num_neurons();
    const std::size_t q = s.prototypes.empty() ? 1 : s.prototypes.front().size();
    const std::vector<double> costs = representation_costs(s.assignment, m, g, kernel, temperature);

    std::vector<bool> claimed(n, false);
    std::vector<std::size_t> candidates;
    candidates.reserve(n);
    PrototypeSets result(num);
    for (NeuronId c = 0; c < num; ++c) {
        const double* cost = costs.data() + c * n;
        candidates.clear();
        for (std::size_t x = 0; x < n; ++x) {
            if (!claimed[x]) candidates.push_back(x);
        }
        if (candidates.size() < q) {
            throw std::logic_error("not enough unclaimed observations for neuron " + std::to_string(c));
        }
        std::partial_sort(candidates.begin(), candidates.begin() + q, candidates.end(),
                          [cost](std::size_t a, std::size_t b) {
                              if (cost[a] != cost[b]) return cost[a] < cost[b];
                              return a < b;
                          });
        result[c].assign(candidates.begin(), candidates.begin() + q);
        for (std::size_t x : result[c]) claimed[x] = true;
    }
    return result;
}

EnergyComponents energy_components(const SomState& s, const DissimMatrix& m, const MapGraph& g,
                                   KernelKind kernel, double temperature) {
    const std::size_t n = m.size();
    const std::size_t num = g.num_neurons();
    const std::vector<double> w = neighborhood_weights(g, kernel, temperature);
    const std::vector<double> sums = prototype_sums(s.prototypes, m);

    EnergyComponents e;
    for (std::size_t i = 0; i < n; ++i) {
        const NeuronId own = s.assignment[i];
        e.quantization += sums[own * n + i];
        for (NeuronId c = 0; c < num; ++c) {
            if (c == own) continue;
            const double k = w[own * num + c];
            if (k != 0.0) e.topology += k * sums[c * n + i];
        }
    }
    return e;
}

double energy(const SomState& s, const DissimMatrix& m, const MapGraph& g, KernelKind kernel,
              double temperature) {
    return energy_components(s, m, g, kernel, temperature).total();
}

bool batch_iteration(SomState& s, const DissimMatrix& m, const MapGraph& g, KernelKind kernel,
                     double temperature) {
    auto assignment = assign_all(s, m, g, kernel, temperature);
    bool changed = assignment != s.assignment;
    s.assignment = std::move(assignment);
    auto prototypes = represent_all(s, m, g, kernel, temperature);
    changed = changed || prototypes != s.prototypes;
    s.prototypes = std::move(prototypes);
    s.temperature = temperature;
    ++s.step;
    return changed;
}

TrainedMap train(const DissimMatrix& m, const MapGraph& g, const TrainConfig& cfg) {
    if (auto report = validate_matrix(m); !report.ok()) throw ValidationError(report);
    cfg.validate(m.size(), g);
    const TemperatureSchedule sched = cfg.schedule(g);

    std::optional<TrainedMap> best;
    for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
        SomState s;
        s.prototypes = cfg.initial_prototypes
                           ? *cfg.initial_prototypes
                           : init_prototypes(cfg.seed + restart, m.size(), g.num_neurons(), cfg.q);
        s.temperature = sched.t_init;

        SomState initial = s;
        initial.assignment = assign_all(initial, m, g, cfg.kernel, sched.t_final);
        const double initial_energy = energy(initial, m, g, cfg.kernel, sched.t_final);

        std::vector<double> trace;
        trace.reserve(sched.num_steps);
        for (std::size_t l = 0; l < sched.num_steps; ++l) {
            const double t = temperature_at(sched, l);
            batch_iteration(s, m, g, cfg.kernel, t);
            trace.push_back(energy(s, m, g, cfg.kernel, t));
        }

        const double final_energy = trace.back();
        if (!best || final_energy < best->energy) {
            const EnergyComponents parts = energy_components(s, m, g, cfg.kernel, sched.t_final);
            best = TrainedMap{std::move(s),
                              final_energy,
                              parts,
                              std::move(trace),
                              initial_energy,
                              restart,
                              g,
                              cfg,
                              sched};
        }
    }
    return std::move(*best);
}

double rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("rank correlation needs equal lengths");
    const std::size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double topographic_correlation(const SomState& s, const DissimMatrix& m, const MapGraph& g) {
    std::vector<double> grid;
    std::vector<double> data;
    for (NeuronId c = 0; c < g.num_neurons(); ++c) {
        for (NeuronId r = c + 1; r < g.num_neurons(); ++r) {
            double d = 0.0;
            for (std::size_t a : s.prototypes[c]) {
                for (std::size_t b : s.prototypes[r]) d += m(a, b);
            }
            grid.push_back(g.dist(c, r));
            data.push_back(d);
        }
    }
    return rank_correlation(grid, data);
}

std::vector<std::size_t> class_sizes(const SomState& s, std::size_t num_neurons) {
    std::vector<std::size_t> sizes(num_neurons, 0);
    for (NeuronId c : s.assignment) ++sizes.at(c);
    return sizes;
}

}  // namespace dsom
