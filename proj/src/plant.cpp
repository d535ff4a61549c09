#include "ilcmbk/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ilcmbk/config.hpp"

namespace ilcmbk {

EnvironmentModel EnvironmentModel::linear(double stiffness, std::string name) {
    return make_environment(std::move(name), {{0.0, 0.0}, {1.0, stiffness}});
}

EnvironmentModel make_environment(std::string name,
                                  std::vector<std::pair<double, double>> breakpoints) {
    if (breakpoints.size() < 2) {
        throw std::invalid_argument("environment '" + name + "': need at least two breakpoints");
    }
    if (breakpoints.front().first != 0.0 || breakpoints.front().second != 0.0) {
        throw std::invalid_argument("environment '" + name + "': first breakpoint must be (0, 0)");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i].first > breakpoints[i - 1].first)) {
            throw std::invalid_argument("environment '" + name +
                                        "': breakpoint positions must be strictly increasing");
        }
    }
    for (const auto& [x, f] : breakpoints) {
        if (!std::isfinite(x) || !std::isfinite(f)) {
            throw std::invalid_argument("environment '" + name + "': non-finite breakpoint");
        }
    }
    return EnvironmentModel{std::move(name), std::move(breakpoints)};
}

namespace {

double segment_slope(const EnvironmentModel& env, std::size_t seg) {
    const auto& [x0, f0] = env.breakpoints[seg];
    const auto& [x1, f1] = env.breakpoints[seg + 1];
    return (f1 - f0) / (x1 - x0);
}

}  // namespace

double force_at(const EnvironmentModel& env, double x) {
    const auto& bps = env.breakpoints;
    if (x <= bps.front().first) {
        return bps.front().second + segment_slope(env, 0) * (x - bps.front().first);
    }
    if (x >= bps.back().first) {
        return bps.back().second +
               segment_slope(env, bps.size() - 2) * (x - bps.back().first);
    }
    auto hi = std::upper_bound(bps.begin(), bps.end(), x,
                               [](double v, const auto& bp) { return v < bp.first; });
    const std::size_t seg = static_cast<std::size_t>(hi - bps.begin()) - 1;
    return bps[seg].second + segment_slope(env, seg) * (x - bps[seg].first);
}

double secant_stiffness(const EnvironmentModel& env, double x) {
    if (std::abs(x) < 1e-9) return segment_slope(env, 0);
    return force_at(env, x) / x;
}

ReferenceTrajectory make_reference(const EnvironmentModel& env, double depth, double t_end,
                                   double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("make_reference: dt must be positive");
    if (depth < 0.0) throw std::invalid_argument("make_reference: depth must be non-negative");
    if (t_end < 2.0 * dt) throw std::invalid_argument("make_reference: t_end must be at least 2*dt");

    const std::size_t n = static_cast<std::size_t>(std::llround(t_end / dt));
    ReferenceTrajectory ref;
    ref.dt = dt;
    ref.consistent = true;
    ref.samples.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double tau = static_cast<double>(i) / static_cast<double>(n);
        const double x = depth * (tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau)));
        const double v = depth * (tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau))) / t_end;
        ref.samples.push_back({v, x, force_at(env, x)});
    }
    return ref;
}

ReferenceTrajectory perturb_force_reference(ReferenceTrajectory ref, double amplitude,
                                            std::uint64_t seed) {
    if (amplitude == 0.0) return ref;
    double peak = 0.0;
    for (const auto& s : ref.samples) peak = std::max(peak, std::abs(s[2]));
    if (peak == 0.0) peak = 1.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> noise(ref.samples.size());
    for (double& x : noise) x = unit(rng);
    // 5-sample moving average keeps the perturbation smooth.
    std::vector<double> smooth(noise.size(), 0.0);
    const std::ptrdiff_t w = 2;
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(noise.size()); ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (std::ptrdiff_t j = i - w; j <= i + w; ++j) {
            if (j < 0 || j >= static_cast<std::ptrdiff_t>(noise.size())) continue;
            acc += noise[static_cast<std::size_t>(j)];
            ++cnt;
        }
        smooth[static_cast<std::size_t>(i)] = acc / cnt;
    }
    for (std::size_t i = 0; i < ref.samples.size(); ++i) {
        ref.samples[i][2] += amplitude * peak * smooth[i];
    }
    ref.consistent = false;
    return ref;
}

namespace {

// Invented stand-ins for the measured force-position curves. Secant
// stiffness stays below each task's initial admittance stiffness k so the
// initial loop is stable at dt = 0.05.
const std::vector<Preset>& builtin_presets() {
    static const std::vector<Preset> presets = [] {
        std::vector<Preset> v;
        // Panel push button: rise to the snap point at 60% travel, ~30% force
        // drop, re-rise to bottoming. Secants 1200..2000 N/m vs k = 2784.
        v.push_back({"auto_reset_button",
                     make_environment("auto_reset_button",
                                      {{0.0, 0.0}, {0.0048, 9.6}, {0.0056, 6.7}, {0.008, 12.0}}),
                     {12.0, 19.0, 2784.0},
                     0.008, 2.0, "force"});
        // Two-detent gear knob: torque dips at each detent. Secants
        // 0.33..0.70 N·m/rad vs k = 0.945.
        v.push_back({"second_gear_knob",
                     make_environment("second_gear_knob",
                                      {{0.0, 0.0}, {0.3, 0.21}, {0.45, 0.15}, {0.75, 0.48},
                                       {0.9, 0.36}, {1.2, 0.84}}),
                     {1.0, 0.945, 0.945},
                     1.2, 2.0, "torque"});
        // Mushroom e-stop press: steep rise, latch snap at 70% travel with a
        // 25% drop. Secants 1400..2150 N/m vs k = 2840.
        v.push_back({"emergency_press",
                     make_environment("emergency_press",
                                      {{0.0, 0.0}, {0.0042, 9.0}, {0.0048, 6.75}, {0.006, 10.2}}),
                     {20.0, 7.0, 2840.0},
                     0.006, 2.0, "force"});
        // Twist-release of the e-stop: cam torque releases at 70% rotation
        // with a 40% drop. Secants 0.032..0.060 N·m/rad vs k = 0.084.
        v.push_back({"emergency_reset",
                     make_environment("emergency_reset",
                                      {{0.0, 0.0}, {0.56, 0.0336}, {0.64, 0.0202}, {0.8, 0.028}}),
                     {0.06, 0.084, 0.084},
                     0.8, 2.0, "torque"});
        return v;
    }();
    return presets;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& p : builtin_presets()) v.push_back(p.name);
        return v;
    }();
    return names;
}

Preset preset(const std::string& name) {
    for (const auto& p : builtin_presets()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

Preset plant_from_config(const ConfigTree& cfg) {
    Preset p;
    p.name = cfg.get_string("plant.name");
    p.env = make_environment(p.name, cfg.get_pairs("plant.breakpoints"));
    p.params = {cfg.get_double("plant.m"), cfg.get_double("plant.b"), cfg.get_double("plant.k")};
    p.depth = cfg.get_double("plant.depth");
    p.t_end = cfg.get_double("plant.t_end");
    p.channel = cfg.get_string("plant.channel", "force");
    if (p.channel != "force" && p.channel != "torque") {
        throw std::runtime_error("plant.channel must be 'force' or 'torque'");
    }
    return p;
}

Preset load_plant(const std::string& path) {
    return plant_from_config(ConfigTree::parse_file(path));
}

}  // namespace ilcmbk
