#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bioplan {

struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// Deterministic 64-bit mix (splitmix64) for fanning one seed into streams.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Standard normal draws via Box-Muller on mt19937_64 output, so the
/// stream depends only on the engine state, not on library internals.
class GaussianStream {
public:
    explicit GaussianStream(uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() {
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
    }
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Solves A x = b in place by Gauss-Jordan; returns false on a singular pivot.
inline bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        double inv = 1.0 / a[col][col];
        for (size_t c = col; c < n; ++c) a[col][c] *= inv;
        b[col] *= inv;
        for (size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            double factor = a[r][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    return true;
}

struct LeastSquares {
    std::vector<double> coef;
    std::vector<double> std_error;
    double residual_std = 0;
    std::vector<double> residuals;
};

/**
 * Ordinary least squares via normal equations. A vanishing ridge penalty is
 * applied to every column except the intercept (column 0) so collinear
 * designs (e.g. a constant series regressed on its own lags) resolve to the
 * deterministic part instead of a unit root.
 */
inline LeastSquares least_squares(const std::vector<std::vector<double>>& rows,
                                  const std::vector<double>& y, double ridge = 1e-8) {
    const size_t n = rows.size();
    const size_t k = rows.empty() ? 0 : rows.front().size();
    if (n <= k) throw FitError("insufficient data for least squares");

    std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
    std::vector<double> xty(k, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t a = 0; a < k; ++a) {
            xty[a] += rows[i][a] * y[i];
            for (size_t b = a; b < k; ++b) xtx[a][b] += rows[i][a] * rows[i][b];
        }
    }
    for (size_t a = 0; a < k; ++a)
        for (size_t b = 0; b < a; ++b) xtx[a][b] = xtx[b][a];

    double scale = 0;
    for (size_t a = 0; a < k; ++a) scale = std::max(scale, xtx[a][a]);
    for (size_t a = 1; a < k; ++a) xtx[a][a] += ridge * std::max(scale, 1.0);

    // keep a copy for the covariance computation
    std::vector<std::vector<double>> xtx_copy = xtx;

    LeastSquares out;
    out.coef = xty;
    if (!solve_dense(xtx, out.coef)) throw FitError("singular design matrix");

    out.residuals.resize(n);
    double sse = 0;
    for (size_t i = 0; i < n; ++i) {
        double fit = 0;
        for (size_t a = 0; a < k; ++a) fit += rows[i][a] * out.coef[a];
        out.residuals[i] = y[i] - fit;
        sse += out.residuals[i] * out.residuals[i];
    }
    double sigma2 = sse / static_cast<double>(n - k);
    out.residual_std = std::sqrt(sigma2);

    // diagonal of (X'X)^-1 for coefficient standard errors
    out.std_error.assign(k, 0.0);
    for (size_t a = 0; a < k; ++a) {
        std::vector<std::vector<double>> m = xtx_copy;
        std::vector<double> e(k, 0.0);
        e[a] = 1.0;
        if (solve_dense(m, e)) out.std_error[a] = std::sqrt(std::max(e[a], 0.0) * sigma2);
    }
    return out;
}

/// All roots of a polynomial via Durand-Kerner; coefficients low to high.
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs) {
    size_t degree = coeffs.size();
    while (degree > 1 && coeffs[degree - 1] == 0.0) --degree;
    if (degree <= 1) return {};
    size_t n = degree - 1;

    std::vector<std::complex<double>> z(n);
    std::complex<double> start(0.4, 0.9);
    z[0] = start;
    for (size_t i = 1; i < n; ++i) z[i] = z[i - 1] * start;

    auto poly = [&](std::complex<double> x) {
        std::complex<double> acc = 0;
        for (size_t i = degree; i-- > 0;) acc = acc * x + coeffs[i];
        return acc;
    };

    for (int iter = 0; iter < 500; ++iter) {
        double worst = 0;
        for (size_t i = 0; i < n; ++i) {
            std::complex<double> denom = coeffs[degree - 1];
            for (size_t j = 0; j < n; ++j)
                if (j != i) denom *= z[i] - z[j];
            std::complex<double> delta = poly(z[i]) / denom;
            z[i] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < 1e-12) break;
    }
    return z;
}

}  // namespace detail

/**
 * ARMA model with Fourier seasonal regressors at a fixed period (168 hours
 * for weekly seasonality). Fitted by two-stage conditional least squares:
 * a long autoregression proxies the innovations, then the AR, MA and
 * Fourier terms are estimated jointly on the augmented design.
 */
struct ArmaxModel {
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    std::vector<double> fourier_coeffs;  // [sin_1, cos_1, sin_2, cos_2, ...]
    double intercept = 0;
    double residual_std = 0;
    int fit_window = 0;
    int period = 168;

    // fit-time context needed to continue the recursion
    std::vector<double> tail_values;     // last max(p, 1) observations, oldest first
    std::vector<double> tail_residuals;  // last max(q, 1) residuals, oldest first
    int next_time_index = 0;             // absolute hour index of the first forecast period

    // standard errors aligned with [intercept, fourier..., ar..., ma...]
    std::vector<double> std_errors;

    void validate() const {
        if (residual_std < 0) throw FitError("residual_std must be non-negative");
        if (fourier_coeffs.size() % 2 != 0)
            throw FitError("fourier coefficients must come in sin/cos pairs");
    }

    double seasonal_term(int time_index) const {
        double value = 0;
        for (size_t h = 0; h < fourier_coeffs.size() / 2; ++h) {
            double angle = 2.0 * std::numbers::pi * static_cast<double>(h + 1) *
                           static_cast<double>(time_index % period) / period;
            value += fourier_coeffs[2 * h] * std::sin(angle) +
                     fourier_coeffs[2 * h + 1] * std::cos(angle);
        }
        return value;
    }
};

/** Equal-weight Monte Carlo trajectories from one model. */
struct PathBundle {
    int horizon = 0;
    uint64_t seed = 0;
    std::vector<std::vector<double>> paths;  // n_paths x horizon

    int n_paths() const { return static_cast<int>(paths.size()); }
};

/**
 * Fits an ARMAX(ar_order, ma_order) model with `n_harmonics` Fourier
 * sin/cos pairs to the trailing portion of `history`. The AR polynomial is
 * checked for stationarity; explosive fits are rejected.
 */
inline ArmaxModel fit_armax(const std::vector<double>& history, int ar_order, int ma_order,
                            int n_harmonics, int period = 168) {
    if (ar_order < 0 || ma_order < 0 || n_harmonics < 0)
        throw FitError("model orders must be non-negative");
    const int n = static_cast<int>(history.size());
    if (n < 4 * period) throw FitError("insufficient data: need at least 4 seasonal periods");
    for (double v : history)
        if (!std::isfinite(v)) throw FitError("history contains non-finite values");

    const int k_fourier = 2 * n_harmonics;

    auto fourier_row = [&](int t, std::vector<double>& row) {
        for (int h = 0; h < n_harmonics; ++h) {
            double angle = 2.0 * std::numbers::pi * (h + 1) * static_cast<double>(t % period) / period;
            row.push_back(std::sin(angle));
            row.push_back(std::cos(angle));
        }
    };

    // stage 1: long AR to proxy the innovations
    const int p_long = std::min(std::max(2 * (ar_order + ma_order), 8), n / 4);
    std::vector<double> proxy(n, 0.0);
    {
        std::vector<std::vector<double>> rows;
        std::vector<double> ys;
        for (int t = p_long; t < n; ++t) {
            std::vector<double> row;
            row.push_back(1.0);
            fourier_row(t, row);
            for (int l = 1; l <= p_long; ++l) row.push_back(history[t - l]);
            rows.push_back(std::move(row));
            ys.push_back(history[t]);
        }
        auto stage1 = detail::least_squares(rows, ys);
        for (int t = p_long; t < n; ++t) proxy[t] = stage1.residuals[t - p_long];
    }

    // stage 2: joint AR + Fourier + lagged-innovation regression, skipping
    // rows whose innovation lags fall before the proxy window
    const int skip = std::max(ar_order, p_long + ma_order);
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (int t = skip; t < n; ++t) {
        std::vector<double> row;
        row.push_back(1.0);
        fourier_row(t, row);
        for (int l = 1; l <= ar_order; ++l) row.push_back(history[t - l]);
        for (int l = 1; l <= ma_order; ++l) row.push_back(proxy[t - l]);
        rows.push_back(std::move(row));
        ys.push_back(history[t]);
    }
    auto fit = detail::least_squares(rows, ys);

    ArmaxModel model;
    model.period = period;
    model.fit_window = n;
    model.intercept = fit.coef[0];
    model.fourier_coeffs.assign(fit.coef.begin() + 1, fit.coef.begin() + 1 + k_fourier);
    model.ar_coeffs.assign(fit.coef.begin() + 1 + k_fourier,
                           fit.coef.begin() + 1 + k_fourier + ar_order);
    model.ma_coeffs.assign(fit.coef.begin() + 1 + k_fourier + ar_order, fit.coef.end());
    model.residual_std = fit.residual_std;
    model.std_errors = fit.std_error;

    // stationarity: all roots of 1 - phi_1 z - ... - phi_p z^p outside the unit circle
    if (ar_order > 0) {
        std::vector<double> poly;
        poly.push_back(1.0);
        for (double phi : model.ar_coeffs) poly.push_back(-phi);
        for (const auto& root : detail::polynomial_roots(poly))
            if (std::abs(root) <= 1.001)
                throw FitError("non-stationary fit: AR root with modulus <= 1.001");
    }

    int p_keep = std::max(ar_order, 1);
    int q_keep = std::max(ma_order, 1);
    model.tail_values.assign(history.end() - p_keep, history.end());
    model.tail_residuals.assign(q_keep, 0.0);
    for (int l = 0; l < q_keep && l < static_cast<int>(fit.residuals.size()); ++l)
        model.tail_residuals[q_keep - 1 - l] = fit.residuals[fit.residuals.size() - 1 - l];
    model.next_time_index = n;
    return model;
}

/**
 * Simulates `n_paths` trajectories of `horizon` periods with Gaussian
 * innovations. Deterministic given (model, horizon, n_paths, seed); each
 * path owns an independent stream derived from (seed, path index), so
 * results do not depend on evaluation order. With clip_at_zero the series
 * is truncated at 0 (demand convention).
 */
inline PathBundle simulate_paths(const ArmaxModel& model, int horizon, int n_paths, uint64_t seed,
                                 bool clip_at_zero = true) {
    if (horizon < 1) throw FitError("horizon must be at least 1");
    if (n_paths < 1) throw FitError("n_paths must be at least 1");
    model.validate();

    const int p = static_cast<int>(model.ar_coeffs.size());
    const int q = static_cast<int>(model.ma_coeffs.size());

    PathBundle bundle;
    bundle.horizon = horizon;
    bundle.seed = seed;
    bundle.paths.resize(n_paths);

    for (int path = 0; path < n_paths; ++path) {
        detail::GaussianStream noise(detail::mix_seed(seed, static_cast<uint64_t>(path)));
        std::vector<double> values(model.tail_values);
        std::vector<double> shocks(model.tail_residuals);
        std::vector<double>& out = bundle.paths[path];
        out.reserve(horizon);
        for (int k = 0; k < horizon; ++k) {
            double eps = model.residual_std > 0 ? model.residual_std * noise.next() : 0.0;
            double y = model.intercept + model.seasonal_term(model.next_time_index + k) + eps;
            for (int l = 1; l <= p; ++l) y += model.ar_coeffs[l - 1] * values[values.size() - l];
            for (int l = 1; l <= q; ++l) y += model.ma_coeffs[l - 1] * shocks[shocks.size() - l];
            if (clip_at_zero && y < 0) y = 0;
            out.push_back(y);
            values.push_back(y);
            shocks.push_back(eps);
        }
    }
    return bundle;
}

/// Zero-innovation recursion: the point forecast the simulations fan around.
inline std::vector<double> point_forecast(const ArmaxModel& model, int horizon) {
    ArmaxModel quiet = model;
    quiet.residual_std = 0;
    return simulate_paths(quiet, horizon, 1, 0, false).paths.front();
}

}  // namespace bioplan
