#include "fatnode/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fatnode/errors.hpp"

namespace fatnode {

namespace {

struct FreeParam {
    enum class Kind { rate, mp_overhead, ht_sigma } kind;
    int ht_index = 0;  // threads-per-core, >= 2
    std::string name;
};

FreeParam parse_free_param(const std::string& name) {
    if (name == "single_thread_rate_epm")
        return {FreeParam::Kind::rate, 0, name};
    if (name == "mp_overhead")
        return {FreeParam::Kind::mp_overhead, 0, name};
    if (name.rfind("ht_scaling[", 0) == 0 && name.back() == ']') {
        const std::string digits = name.substr(11, name.size() - 12);
        int t = 0;
        try {
            t = std::stoi(digits);
        } catch (const std::exception&) {
            throw ValidationError("free parameter '" + name + "' has a bad index");
        }
        if (t < 2)
            throw ValidationError("free parameter '" + name +
                                  "': only ht_scaling[t] with t >= 2 can be fitted "
                                  "(sigma(1) is pinned to 1)");
        return {FreeParam::Kind::ht_sigma, t, name};
    }
    throw ValidationError("unknown free parameter '" + name +
                          "' (expected single_thread_rate_epm, mp_overhead, "
                          "or ht_scaling[t])");
}

void apply(ApplicationProfile& profile, const std::vector<FreeParam>& params,
           const std::vector<double>& x) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        switch (params[i].kind) {
            case FreeParam::Kind::rate:
                profile.single_thread_rate_epm = x[i];
                break;
            case FreeParam::Kind::mp_overhead:
                profile.mp_overhead = x[i];
                break;
            case FreeParam::Kind::ht_sigma: {
                const std::size_t idx = static_cast<std::size_t>(params[i].ht_index) - 1;
                if (profile.ht_scaling.size() <= idx)
                    profile.ht_scaling.resize(idx + 1, profile.ht_scaling.back());
                profile.ht_scaling[idx] = x[i];
                break;
            }
        }
    }
}

double clamp_param(const FreeParam& p, double v) {
    switch (p.kind) {
        case FreeParam::Kind::rate:
            return std::max(v, 1e-12);
        case FreeParam::Kind::mp_overhead:
            return std::clamp(v, 0.0, 1.0 - 1e-9);
        case FreeParam::Kind::ht_sigma:
            return std::max(v, 1e-9);
    }
    return v;
}

// Relative residuals e_i = (model_i - observed_i) / observed_i.
std::vector<double> residuals(const NodeSpec& spec, ApplicationProfile profile,
                              const std::vector<FreeParam>& params,
                              const std::vector<double>& x,
                              const std::vector<CalibrationObservation>& obs) {
    apply(profile, params, x);
    std::vector<double> r(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double model =
            configuration_throughput(profile, obs[i].config, spec).total_rate_epm;
        r[i] = (model - obs[i].total_rate_epm) / obs[i].total_rate_epm;
    }
    return r;
}

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

// Solve (A + lambda*I) x = b for n <= 3 by Gaussian elimination with
// partial pivoting. A is n x n row-major.
bool solve_damped(std::vector<double> a, std::vector<double> b, double lambda,
                  std::vector<double>& out) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += lambda;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (std::abs(a[pivot * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] / a[col * n + col];
            for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
            b[row] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * out[k];
        out[i] = s / a[i * n + i];
    }
    return true;
}

}  // namespace

CalibrationResult calibrate(const NodeSpec& spec, const ApplicationProfile& base,
                            const std::vector<std::string>& free_param_names,
                            const std::vector<CalibrationObservation>& observations) {
    spec.validate();

    std::vector<FreeParam> params;
    params.reserve(free_param_names.size());
    for (const auto& name : free_param_names) params.push_back(parse_free_param(name));

    if (observations.empty() || observations.size() < params.size()) {
        std::string what = "under-determined fit: " + std::to_string(observations.size()) +
                           " observation(s) for " + std::to_string(params.size()) +
                           " free parameter(s)";
        if (!free_param_names.empty()) {
            what += " [";
            for (std::size_t i = 0; i < free_param_names.size(); ++i)
                what += (i ? ", " : "") + free_param_names[i];
            what += "]";
        }
        throw UnderdeterminedError(what, free_param_names);
    }
    for (const auto& obs : observations) {
        if (obs.config.instances < 1 || obs.config.workers_per_instance < 1)
            throw ValidationError("observation: instances and workers must be >= 1");
        if (!(obs.total_rate_epm > 0.0))
            throw ValidationError("observation: total_rate_epm must be > 0");
    }

    const std::size_t n = params.size();

    // Starting point: the base profile's current values, nudged into bounds.
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (params[i].kind) {
            case FreeParam::Kind::rate:
                x[i] = base.single_thread_rate_epm > 0 ? base.single_thread_rate_epm : 0.1;
                break;
            case FreeParam::Kind::mp_overhead:
                x[i] = base.mp_overhead;
                break;
            case FreeParam::Kind::ht_sigma: {
                ApplicationProfile tmp = base;
                x[i] = tmp.sigma(params[i].ht_index);
                break;
            }
        }
        x[i] = clamp_param(params[i], x[i]);
    }

    if (n == 0) {
        // Nothing to fit; just report how well the base profile matches.
        const auto r = residuals(spec, base, params, x, observations);
        CalibrationResult res{base, std::sqrt(sum_sq(r) / r.size()), 0.0};
        for (double v : r) res.max_relative_residual = std::max(res.max_relative_residual, std::abs(v));
        return res;
    }

    // Damped Gauss-Newton with a central-difference Jacobian. The objective
    // is smooth and at most 3-dimensional; this reaches machine precision on
    // exactly-determined systems.
    double lambda = 1e-3;
    std::vector<double> r = residuals(spec, base, params, x, observations);
    double cost = sum_sq(r);
    const std::size_t m = observations.size();

    for (int iter = 0; iter < 200; ++iter) {
        // Jacobian, m x n
        std::vector<double> jac(m * n);
        for (std::size_t j = 0; j < n; ++j) {
            const double h = std::max(1e-7 * std::abs(x[j]), 1e-9);
            auto xp = x, xm = x;
            xp[j] = clamp_param(params[j], x[j] + h);
            xm[j] = clamp_param(params[j], x[j] - h);
            const auto rp = residuals(spec, base, params, xp, observations);
            const auto rm = residuals(spec, base, params, xm, observations);
            const double denom = xp[j] - xm[j];
            for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - rm[i]) / denom;
        }

        // Normal equations: (J^T J) delta = -J^T r
        std::vector<double> jtj(n * n, 0.0), jtr(n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t a = 0; a < n; ++a) {
                jtr[a] += jac[i * n + a] * r[i];
                for (std::size_t b = 0; b < n; ++b)
                    jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
            }
        for (auto& v : jtr) v = -v;

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            std::vector<double> delta;
            if (!solve_damped(jtj, jtr, lambda, delta)) {
                lambda *= 10.0;
                continue;
            }
            auto xn = x;
            double step_norm = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                xn[j] = clamp_param(params[j], x[j] + delta[j]);
                step_norm += delta[j] * delta[j];
            }
            const auto rn = residuals(spec, base, params, xn, observations);
            const double cn = sum_sq(rn);
            if (cn <= cost) {
                x = xn;
                r = rn;
                const bool converged =
                    std::abs(cost - cn) < 1e-30 || std::sqrt(step_norm) < 1e-14;
                cost = cn;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (converged) iter = 200;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;  // no descent direction left
    }

    ApplicationProfile fitted = base;
    apply(fitted, params, x);
    fitted.validate();

    CalibrationResult result;
    result.profile = fitted;
    result.rms_relative_residual = std::sqrt(cost / m);
    result.max_relative_residual = 0.0;
    for (double v : r)
        result.max_relative_residual = std::max(result.max_relative_residual, std::abs(v));
    return result;
}

}  // namespace fatnode
