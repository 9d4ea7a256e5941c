#include "dsom/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dsom {

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "gaussian") return KernelKind::gaussian;
    if (name == "threshold") return KernelKind::threshold;
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string_view to_string(KernelKind kind) {
    return kind == KernelKind::gaussian ? "gaussian" : "threshold";
}

double kernel_value(KernelKind kind, double temperature, double x) {
    if (!(temperature > 0.0)) {
        throw std::invalid_argument("temperature must be positive");
    }
    if (!(x >= 0.0)) throw std::invalid_argument("kernel argument must be nonnegative");
    switch (kind) {
        case KernelKind::gaussian: {
            const double u = x / temperature;
            return std::exp(-u * u);
        }
        case KernelKind::threshold:
            return x == 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

void TemperatureSchedule::validate() const {
    if (num_steps == 0) throw std::invalid_argument("schedule needs at least one step");
    if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
    if (!(t_init >= t_final)) throw std::invalid_argument("t_init must be >= t_final");
}

double temperature_at(const TemperatureSchedule& sched, std::size_t step) {
    sched.validate();
    if (step >= sched.num_steps) throw std::invalid_argument("schedule step out of range");
    if (sched.num_steps == 1 || step == 0) return sched.t_init;
    if (step + 1 == sched.num_steps) return sched.t_final;
    const double fraction =
        static_cast<double>(step) / static_cast<double>(sched.num_steps - 1);
    return sched.t_init * std::pow(sched.t_final / sched.t_init, fraction);
}

}  // namespace dsom
