#include "gridsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridsr/kernels.hpp"

namespace gridsr::metrics {

namespace {

void check_sizes(std::span<const double> pred, std::span<const double> ref, const char* op) {
    if (pred.size() != ref.size())
        throw ShapeError(std::string(op) + ": size mismatch " + std::to_string(pred.size()) +
                         " vs " + std::to_string(ref.size()));
    if (pred.empty()) throw ShapeError(std::string(op) + ": empty input");
}

double mean_of(std::span<const double> v) {
    return kernels::sum(v.data(), static_cast<kernels::i64>(v.size())) /
           static_cast<double>(v.size());
}

void check_series(const std::vector<Field>& pred, const std::vector<Field>& ref, const char* op) {
    if (pred.size() != ref.size())
        throw ShapeError(std::string(op) + ": series length mismatch");
    if (pred.empty()) throw ShapeError(std::string(op) + ": empty series");
    for (std::size_t t = 0; t < pred.size(); ++t) {
        if (pred[t].time != ref[t].time)
            throw AlignmentError(std::string(op) + ": series not time-aligned at " +
                                 format_time(ref[t].time));
        if (pred[t].values.size() != ref[t].values.size())
            throw ShapeError(std::string(op) + ": grid mismatch at " + format_time(ref[t].time));
    }
}

} // namespace

double rmse(std::span<const double> pred, std::span<const double> ref) {
    check_sizes(pred, ref, "rmse");
    std::vector<double> sq(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - ref[i];
        sq[i] = d * d;
    }
    return std::sqrt(mean_of(sq));
}

double mae(std::span<const double> pred, std::span<const double> ref) {
    check_sizes(pred, ref, "mae");
    std::vector<double> ad(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) ad[i] = std::abs(pred[i] - ref[i]);
    return mean_of(ad);
}

double bias(std::span<const double> pred, std::span<const double> ref) {
    check_sizes(pred, ref, "bias");
    std::vector<double> d(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) d[i] = pred[i] - ref[i];
    return mean_of(d);
}

SSIMParams SSIMParams::from_range(double L) {
    SSIMParams p;
    p.c1 = (0.01 * L) * (0.01 * L);
    p.c2 = (0.03 * L) * (0.03 * L);
    if (p.c1 <= 0.0 || p.c2 <= 0.0)
        throw DomainError("SSIMParams: dynamic range must be positive");
    return p;
}

double ssim(std::span<const double> pred, std::span<const double> ref, const SSIMParams& params) {
    check_sizes(pred, ref, "ssim");
    const double mu_p = mean_of(pred);
    const double mu_r = mean_of(ref);
    std::vector<double> vp(pred.size()), vr(pred.size()), cov(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dp = pred[i] - mu_p;
        const double dr = ref[i] - mu_r;
        vp[i] = dp * dp;
        vr[i] = dr * dr;
        cov[i] = dp * dr;
    }
    const double var_p = mean_of(vp);
    const double var_r = mean_of(vr);
    const double cov_pr = mean_of(cov);
    return ((2.0 * mu_r * mu_p + params.c1) * (2.0 * cov_pr + params.c2)) /
           ((mu_r * mu_r + mu_p * mu_p + params.c1) * (var_r + var_p + params.c2));
}

double psnr(std::span<const double> pred, std::span<const double> ref, const PSNRParams& params) {
    check_sizes(pred, ref, "psnr");
    if (params.max_value <= 0.0) throw DomainError("psnr: MAX must be positive");
    std::vector<double> sq(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - ref[i];
        sq[i] = d * d;
    }
    const double mse = mean_of(sq);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(params.max_value * params.max_value / mse);
}

double rmse(const Field& pred, const Field& ref) {
    if (!pred.spec.same_layout(ref.spec)) throw ShapeError("rmse: grid mismatch");
    return rmse(std::span(pred.values), std::span(ref.values));
}
double mae(const Field& pred, const Field& ref) {
    if (!pred.spec.same_layout(ref.spec)) throw ShapeError("mae: grid mismatch");
    return mae(std::span(pred.values), std::span(ref.values));
}
double bias(const Field& pred, const Field& ref) {
    if (!pred.spec.same_layout(ref.spec)) throw ShapeError("bias: grid mismatch");
    return bias(std::span(pred.values), std::span(ref.values));
}
double ssim(const Field& pred, const Field& ref, const SSIMParams& params) {
    if (!pred.spec.same_layout(ref.spec)) throw ShapeError("ssim: grid mismatch");
    return ssim(std::span(pred.values), std::span(ref.values), params);
}
double psnr(const Field& pred, const Field& ref, const PSNRParams& params) {
    if (!pred.spec.same_layout(ref.spec)) throw ShapeError("psnr: grid mismatch");
    return psnr(std::span(pred.values), std::span(ref.values), params);
}

std::size_t MetricMaps::undefined_count() const {
    std::size_t n = 0;
    for (std::uint8_t u : undefined) n += u;
    return n;
}

MetricMaps gridbox_maps(const std::vector<Field>& pred, const std::vector<Field>& ref) {
    check_series(pred, ref, "gridbox_maps");
    const GridSpec g = ref.front().spec;
    const std::size_t cells = g.size();
    const double nt = static_cast<double>(ref.size());

    MetricMaps maps;
    maps.bias = Field(g, ref.front().time);
    maps.rmse = Field(g, ref.front().time);
    maps.rmse_over_std = Field(g, ref.front().time);
    maps.undefined.assign(cells, 0);

    for (std::size_t c = 0; c < cells; ++c) {
        double sum_d = 0.0, sum_sq = 0.0, sum_r = 0.0, sum_r2 = 0.0;
        for (std::size_t t = 0; t < ref.size(); ++t) {
            const double d = pred[t].values[c] - ref[t].values[c];
            const double r = ref[t].values[c];
            sum_d += d;
            sum_sq += d * d;
            sum_r += r;
            sum_r2 += r * r;
        }
        maps.bias.values[c] = sum_d / nt;
        maps.rmse.values[c] = std::sqrt(sum_sq / nt);
        const double mean_r = sum_r / nt;
        const double std_r = std::sqrt(std::max(0.0, sum_r2 / nt - mean_r * mean_r));
        if (std_r > 0.0) {
            maps.rmse_over_std.values[c] = maps.rmse.values[c] / std_r;
        } else {
            maps.undefined[c] = 1;
            maps.rmse_over_std.values[c] = 0.0;
        }
    }
    return maps;
}

MetricTable seasonal_table(
    const std::vector<std::pair<std::string, const std::vector<Field>*>>& methods,
    const std::vector<Field>& ref) {
    if (methods.empty()) throw ConfigError("seasonal_table: no methods given");
    if (ref.empty()) throw ShapeError("seasonal_table: empty reference series");
    for (const auto& [name, series] : methods) check_series(*series, ref, "seasonal_table");

    // Column timestep sets: the four seasons plus all timestamps.
    std::array<std::vector<std::size_t>, 5> columns;
    for (std::size_t t = 0; t < ref.size(); ++t) {
        columns[static_cast<int>(season_of(ref[t].time))].push_back(t);
        columns[4].push_back(t);
    }

    double vmin = ref.front().values.front(), vmax = vmin;
    for (const Field& f : ref)
        for (double v : f.values) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    MetricTable table;
    table.range_L = vmax - vmin;
    const SSIMParams sp = SSIMParams::from_range(std::max(table.range_L, 1e-12));
    const PSNRParams pp{std::max(table.range_L, 1e-12)};

    const std::size_t cells = ref.front().values.size();

    for (const auto& [name, series_ptr] : methods) {
        table.methods.push_back(name);
        const std::vector<Field>& series = *series_ptr;
        std::array<std::array<MetricTable::Cell, 5>, 5> rows{};
        for (int col = 0; col < 5; ++col) {
            const auto& ts = columns[col];
            if (ts.empty()) continue;
            // Per-gridbox over time, then spatial mean.
            std::vector<double> cell_rmse(cells), cell_mae(cells), cell_bias(cells);
            for (std::size_t c = 0; c < cells; ++c) {
                double sum_d = 0.0, sum_sq = 0.0, sum_ad = 0.0;
                for (std::size_t t : ts) {
                    const double d = series[t].values[c] - ref[t].values[c];
                    sum_d += d;
                    sum_sq += d * d;
                    sum_ad += std::abs(d);
                }
                const double n = static_cast<double>(ts.size());
                cell_rmse[c] = std::sqrt(sum_sq / n);
                cell_mae[c] = sum_ad / n;
                cell_bias[c] = sum_d / n;
            }
            rows[0][col] = {mean_of(cell_rmse), true, false, false};
            rows[1][col] = {mean_of(cell_mae), true, false, false};
            rows[2][col] = {mean_of(cell_bias), true, false, false};
            // Whole-field per timestep, then time mean.
            std::vector<double> ssims(ts.size()), psnrs(ts.size());
            for (std::size_t k = 0; k < ts.size(); ++k) {
                ssims[k] = ssim(std::span(series[ts[k]].values), std::span(ref[ts[k]].values), sp);
                psnrs[k] = psnr(std::span(series[ts[k]].values), std::span(ref[ts[k]].values), pp);
            }
            rows[3][col] = {mean_of(ssims), true, false, false};
            double psum = 0.0;
            for (double v : psnrs) psum += v; // may be +inf (sentinel propagates)
            rows[4][col] = {psum / static_cast<double>(psnrs.size()), true, false, false};
        }
        if (table.cells.empty()) table.cells.resize(5);
        for (int m = 0; m < 5; ++m) table.cells[m].push_back(rows[m]);
    }

    // Best-per-cell marking: minimum for RMSE/MAE, minimum magnitude for
    // Bias, maximum for SSIM/PSNR; ties flagged at 2-decimal rounding.
    for (int m = 0; m < 5; ++m) {
        for (int col = 0; col < 5; ++col) {
            double best_key = 0.0;
            bool have = false;
            auto key = [&](double v) {
                if (m == 2) return std::abs(v);
                if (m >= 3) return -v;
                return v;
            };
            for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
                const auto& cell = table.cells[m][mi][col];
                if (!cell.defined) continue;
                if (!have || key(cell.value) < best_key) {
                    best_key = key(cell.value);
                    have = true;
                }
            }
            if (!have) continue;
            auto rounded = [](double v) { return std::round(v * 100.0) / 100.0; };
            int best_count = 0;
            for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
                auto& cell = table.cells[m][mi][col];
                if (!cell.defined) continue;
                if (rounded(key(cell.value)) == rounded(best_key)) {
                    cell.best = true;
                    ++best_count;
                }
            }
            if (best_count > 1)
                for (std::size_t mi = 0; mi < table.methods.size(); ++mi)
                    if (table.cells[m][mi][col].best) table.cells[m][mi][col].tie = true;
        }
    }
    return table;
}

} // namespace gridsr::metrics
