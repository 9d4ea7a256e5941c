#pragma once

#include <cstddef>
#include <string_view>

namespace dsom {

/// Neighborhood kernel shape. gaussian: K(x) = exp(-x^2); threshold: K(0) = 1
/// and K(x) = 0 for x > 0.
enum class KernelKind { gaussian, threshold };

KernelKind parse_kernel_kind(std::string_view name);
std::string_view to_string(KernelKind kind);

/// K^T(x) = K(x / T).
double kernel_value(KernelKind kind, double temperature, double x);

/// Exponential decay from t_init to t_final over num_steps steps.
struct TemperatureSchedule {
    double t_init = 1.0;
    double t_final = 1.0;
    std::size_t num_steps = 1;

    void validate() const;
};

double temperature_at(const TemperatureSchedule& sched, std::size_t step);

}  // namespace dsom
