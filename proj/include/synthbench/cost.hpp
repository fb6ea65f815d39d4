#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"
#include "detail/numeric.hpp"
#include "error.hpp"

namespace synthbench {

/// Wall-time source. The null clock always reads zero, which makes every
/// recorded duration zero and run outputs reproducible byte for byte.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() const = 0;
};

class SteadyClock final : public Clock {
public:
    double now() const override {
        using namespace std::chrono;
        return duration<double>(steady_clock::now().time_since_epoch()).count();
    }
};

class NullClock final : public Clock {
public:
    double now() const override { return 0.0; }
};

inline const Clock& steady_clock() {
    static const SteadyClock c;
    return c;
}

inline const Clock& null_clock() {
    static const NullClock c;
    return c;
}

/// Wall seconds spent running `block`.
template <class F>
double measure(F&& block, const Clock& clock = steady_clock()) {
    const double start = clock.now();
    std::forward<F>(block)();
    const double elapsed = clock.now() - start;
    return elapsed > 0.0 ? elapsed : 0.0;
}

struct CostRecord {
    double init_seconds = 0.0;
    double seconds_per_step = 0.0;
    std::size_t num_steps = 0;
    double sample_seconds = 0.0;

    void validate() const {
        if (init_seconds < 0 || seconds_per_step < 0 || sample_seconds < 0)
            throw Error("cost record fields must be nonnegative");
    }
};

struct DeviceModel {
    double power_watts = 300.0;
    double carbon_g_per_kwh = 50.0;
    std::size_t trials_per_device = 1;

    void validate() const {
        if (!(power_watts > 0)) throw Error("power_watts must be positive");
        if (!(carbon_g_per_kwh > 0)) throw Error("carbon_g_per_kwh must be positive");
        if (trials_per_device < 1) throw Error("trials_per_device must be >= 1");
    }

    /// Default profile with SYNTHBENCH_POWER_WATTS, SYNTHBENCH_CARBON_G_PER_KWH
    /// and SYNTHBENCH_TRIALS_PER_DEVICE applied when set.
    static DeviceModel from_environment() {
        DeviceModel d;
        auto real = [](const char* name, double& field) {
            if (const char* v = std::getenv(name)) {
                auto parsed = detail::parse_double(v);
                if (!parsed) throw Error(std::string(name) + ": not a number: '" + v + "'");
                field = *parsed;
            }
        };
        real("SYNTHBENCH_POWER_WATTS", d.power_watts);
        real("SYNTHBENCH_CARBON_G_PER_KWH", d.carbon_g_per_kwh);
        if (const char* v = std::getenv("SYNTHBENCH_TRIALS_PER_DEVICE")) {
            auto parsed = detail::parse_int(v);
            if (!parsed || *parsed < 1) throw Error(std::string("SYNTHBENCH_TRIALS_PER_DEVICE: invalid value '") + v + "'");
            d.trials_per_device = static_cast<std::size_t>(*parsed);
        }
        d.validate();
        return d;
    }
};

struct TuningCost {
    double device_seconds = 0.0;
    double kwh = 0.0;
    double co2_kg = 0.0;
};

inline double energy_kwh(double device_seconds, const DeviceModel& device) {
    return device_seconds * device.power_watts / 3.6e6;
}

inline double emissions_kg(double kwh, const DeviceModel& device) { return kwh * device.carbon_g_per_kwh / 1000.0; }

/// Sum over trials of (init + seconds_per_step * steps), shared among the
/// trials that run concurrently on one device.
inline TuningCost estimate_tuning_cost(std::span<const CostRecord> trials, const DeviceModel& device) {
    if (trials.empty()) throw Error("estimate_tuning_cost: no trials");
    device.validate();
    double total = 0.0;
    for (const auto& t : trials) {
        t.validate();
        total += t.init_seconds + t.seconds_per_step * static_cast<double>(t.num_steps);
    }
    TuningCost c;
    c.device_seconds = total / static_cast<double>(device.trials_per_device);
    c.kwh = energy_kwh(c.device_seconds, device);
    c.co2_kg = emissions_kg(c.kwh, device);
    return c;
}

struct CostRow {
    std::string model;
    std::string dataset;
    TuningCost cost;
};

inline void write_cost_csv(std::ostream& out, std::span<const CostRow> rows) {
    csv::write_record(out, {"model", "dataset", "device_seconds", "kwh", "co2_kg"});
    for (const auto& r : rows)
        csv::write_record(out, {r.model, r.dataset, detail::format_double(r.cost.device_seconds),
                                detail::format_double(r.cost.kwh), detail::format_double(r.cost.co2_kg)});
}

}  // namespace synthbench
