#include "gridsr/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace gridsr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Sum of fixed-seed random-phase sinusoids over the unit square; smooth with
// structure down to roughly 1/16 of the domain.
struct SinusoidPattern {
    struct Mode {
        double kx, ky, phase, amp;
    };
    std::vector<Mode> modes;

    SinusoidPattern(Rng& rng, int n_modes, double min_waves, double max_waves) {
        modes.reserve(n_modes);
        double power = 0.0;
        for (int m = 0; m < n_modes; ++m) {
            const double waves = min_waves + (max_waves - min_waves) * rng.next_double();
            const double dir = kTwoPi * rng.next_double();
            Mode mode;
            mode.kx = kTwoPi * waves * std::cos(dir);
            mode.ky = kTwoPi * waves * std::sin(dir);
            mode.phase = kTwoPi * rng.next_double();
            mode.amp = 1.0 / std::sqrt(1.0 + waves);
            power += 0.5 * mode.amp * mode.amp;
            modes.push_back(mode);
        }
        // Unit variance regardless of mode count.
        const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 1.0;
        for (Mode& m : modes) m.amp *= scale;
    }

    double operator()(double u, double v) const {
        double s = 0.0;
        for (const auto& m : modes) s += m.amp * std::sin(m.kx * u + m.ky * v + m.phase);
        return s;
    }
};

double smoothstep(double lo, double hi, double x) {
    const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

} // namespace

GridSpec block_mean_spec(const GridSpec& hr, int scale) {
    if (scale < 1 || hr.n_lat % scale != 0 || hr.n_lon % scale != 0)
        throw ConfigError("block_mean: HR dims " + std::to_string(hr.n_lat) + "x" +
                          std::to_string(hr.n_lon) + " not divisible by scale factor " +
                          std::to_string(scale));
    GridSpec lr;
    lr.dlat = hr.dlat * scale;
    lr.dlon = hr.dlon * scale;
    // Block center = mean of the block's cell centers.
    lr.lat_start = hr.lat_start + 0.5 * (scale - 1) * hr.dlat;
    lr.lon_start = hr.lon_start + 0.5 * (scale - 1) * hr.dlon;
    lr.n_lat = hr.n_lat / scale;
    lr.n_lon = hr.n_lon / scale;
    return lr;
}

Field block_mean(const Field& hr, int scale) {
    const GridSpec lr_spec = block_mean_spec(hr.spec, scale);
    Field lr(lr_spec, hr.time);
    const double inv = 1.0 / (scale * scale);
    for (int i = 0; i < lr_spec.n_lat; ++i) {
        for (int j = 0; j < lr_spec.n_lon; ++j) {
            double acc = 0.0;
            for (int a = 0; a < scale; ++a)
                for (int b = 0; b < scale; ++b) acc += hr.at(i * scale + a, j * scale + b);
            lr.at(i, j) = acc * inv;
        }
    }
    return lr;
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
    config.hr_spec.validate();
    if (config.step_hours <= 0 || config.step_hours % 3 != 0)
        throw ConfigError("generate_synthetic: step_hours must be a positive multiple of 3");
    if (config.n_timesteps < 0) throw ConfigError("generate_synthetic: negative n_timesteps");
    const int s = config.scale_factor;
    const GridSpec& hr = config.hr_spec;
    (void)block_mean_spec(hr, s); // divisibility check

    Rng root(config.seed);
    Rng oro_rng = root.fork(1);
    Rng sea_rng = root.fork(2);
    Rng noise_rng = root.fork(3);

    const SinusoidPattern oro_pattern(oro_rng, 24, 1.0, 16.0);
    const SinusoidPattern sea_pattern(sea_rng, 8, 0.5, 3.0);

    SyntheticDataset out;
    const double nu = hr.n_lat > 1 ? 1.0 / (hr.n_lat - 1) : 1.0;
    const double nv = hr.n_lon > 1 ? 1.0 / (hr.n_lon - 1) : 1.0;

    Field hr_oro(hr, 0);
    Field hr_sea(hr, 0);
    for (int i = 0; i < hr.n_lat; ++i) {
        for (int j = 0; j < hr.n_lon; ++j) {
            const double u = i * nu, v = j * nv;
            const double land = smoothstep(-0.3, 0.5, sea_pattern(u, v));
            const double relief = std::max(0.0, oro_pattern(u, v));
            hr_sea.at(i, j) = land;
            hr_oro.at(i, j) = 0.5 * config.orography_height * relief * relief * land;
        }
    }
    out.covariates.hr_orography = hr_oro;
    out.covariates.hr_landsea = hr_sea;
    out.covariates.lr_orography = block_mean(hr_oro, s);
    out.covariates.lr_landsea = block_mean(hr_sea, s);

    out.hr.reserve(config.n_timesteps);
    out.lr.reserve(config.n_timesteps);
    for (std::int64_t t = 0; t < config.n_timesteps; ++t) {
        const TimeStamp ts = config.start_time + t * config.step_hours * kSecondsPerHour;
        if (!on_time_grid(ts)) throw ConfigError("generate_synthetic: start_time off the 3h grid");
        Field f(hr, ts);

        const double day_of_year =
            static_cast<double>((ts / 86400) % 365) + static_cast<double>(ts % 86400) / 86400.0;
        const double seasonal =
            config.base_mean +
            config.seasonal_amplitude * std::cos(kTwoPi * (day_of_year - 200.0) / 365.25);

        SinusoidPattern noise(noise_rng, config.noise_modes, 0.5, 6.0);
        const double weather = 2.0 * (noise_rng.next_double() - 0.5); // domain-wide anomaly

        for (int i = 0; i < hr.n_lat; ++i) {
            for (int j = 0; j < hr.n_lon; ++j) {
                const double u = i * nu, v = j * nv;
                double val = seasonal + 1.5 * weather - config.lapse_rate * hr_oro.at(i, j);
                if (config.noise_amplitude != 0.0)
                    val += config.noise_amplitude * noise(u, v);
                f.at(i, j) = val;
            }
        }
        out.lr.push_back(block_mean(f, s));
        out.hr.push_back(std::move(f));
    }
    return out;
}

} // namespace gridsr
