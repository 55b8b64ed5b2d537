#include "loewner_lab/sle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "loewner_lab/ensemble.hpp"
#include "loewner_lab/rng.hpp"

namespace ll {

void validate_sle(const SleSpec& s) {
    if (!(s.kappa >= 0.0) || !std::isfinite(s.kappa)) throw InvalidInput("kappa must be >= 0");
    if (!(s.dt > 0.0)) throw InvalidInput("dt must be positive");
    if (!(s.T >= s.dt)) throw InvalidInput("horizon T must be at least one step");
}

DrivingFunction sample_sle_driving(const SleSpec& s) {
    validate_sle(s);
    const long n = std::lround(s.T / s.dt);
    const double sk = std::sqrt(s.kappa), sdt = std::sqrt(s.dt);
    Rng rng(s.seed);
    DrivingFunction w;
    w.times.reserve(n + 1);
    w.values.reserve(n + 1);
    double b = 0.0;
    w.times.push_back(0.0);
    w.values.push_back(0.0);
    for (long k = 1; k <= n; ++k) {
        b += sdt * rng.normal();
        w.times.push_back(double(k) * s.dt);
        w.values.push_back(s.kappa == 0.0 ? 0.0 : sk * b);
    }
    return w;
}

namespace {

Curve truncated_trace(const DrivingFunction& w, double horizon, double eps) {
    Curve c = solve_trace_on_grid(w, eps);
    std::size_t keep = 0;
    while (keep < w.times.size() && w.times[keep] <= horizon * (1.0 + 1e-12)) ++keep;
    c.points.resize(std::max<std::size_t>(keep, 2));
    return c;
}

void require_common_grid(const std::vector<DrivingFunction>& w) {
    for (const auto& x : w) validate_driving(x);
    const auto& t0 = w.front().times;
    const double tol = 1e-9 * std::max(1.0, t0.back());
    for (const auto& x : w) {
        if (x.times.size() != t0.size()) throw InvalidInput("drivings are not on a common time grid");
        for (std::size_t k = 0; k < t0.size(); ++k)
            if (std::abs(x.times[k] - t0[k]) > tol) throw InvalidInput("drivings are not on a common time grid");
    }
}

double slope_through_origin(const std::vector<double>& t, const std::vector<double>& v) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        num += t[k] * v[k];
        den += t[k] * t[k];
    }
    return num / den;
}

double sample_variance(const std::vector<double>& x) {
    const double n = double(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (n - 1.0);
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

double pooled_ac1(const std::vector<DrivingFunction>& w) {
    std::vector<double> a, b;
    for (const auto& x : w)
        for (std::size_t k = 2; k < x.values.size(); ++k) {
            a.push_back(x.values[k - 1] - x.values[k - 2]);
            b.push_back(x.values[k] - x.values[k - 1]);
        }
    return a.empty() ? 0.0 : correlation(a, b);
}

}  // namespace

ContinuityTable kappa_continuity_experiment(double kappa, const std::vector<double>& deltas, double T,
                                            double dt, int seeds, std::uint64_t seed, int workers) {
    if (!(kappa >= 0.0 && kappa < 8.0)) throw InvalidInput("kappa must lie in [0, 8)");
    for (double d : deltas)
        if (!(kappa + d >= 0.0 && kappa + d < 8.0)) throw InvalidInput("kappa + delta must lie in [0, 8)");
    if (seeds < 1) throw InvalidInput("need at least one seed");
    validate_sle({kappa, T, dt, seed});
    const double horizon = 0.9 * T, eps = std::sqrt(dt), refine = std::sqrt(dt);
    const std::size_t nd = deltas.size();

    // per seed: distances for each delta, then the diameter of the kappa trace
    auto job = [&](std::size_t s) {
        SleSpec spec{kappa, T, dt, job_seed(seed, s)};
        Curve base = truncated_trace(sample_sle_driving(spec), horizon, eps);
        std::vector<double> out(nd + 1);
        for (std::size_t k = 0; k < nd; ++k) {
            if (deltas[k] == 0.0) {
                out[k] = 0.0;
                continue;
            }
            SleSpec other = spec;
            other.kappa = kappa + deltas[k];
            Curve c = truncated_trace(sample_sle_driving(other), horizon, eps);
            out[k] = curve_distance(base, c, refine);
        }
        out[nd] = diameter(base.points);
        return out;
    };
    auto res = run_ensemble<std::vector<double>>(std::size_t(seeds), workers, job);

    ContinuityTable tab;
    tab.kappa = kappa;
    tab.T = T;
    tab.dt = dt;
    tab.seed = seed;
    double diam = 0.0;
    for (const auto& r : res) diam += r[nd];
    diam /= seeds;
    for (std::size_t k = 0; k < nd; ++k) {
        ContinuityRow row;
        row.delta = deltas[k];
        row.seeds = seeds;
        row.diameter = diam;
        for (const auto& r : res) row.mean += r[k];
        row.mean /= seeds;
        for (const auto& r : res) row.sd += (r[k] - row.mean) * (r[k] - row.mean);
        row.sd = seeds > 1 ? std::sqrt(row.sd / (seeds - 1)) : 0.0;
        tab.rows.push_back(row);
    }
    std::vector<ContinuityRow> by_size = tab.rows;
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.delta) > std::abs(b.delta); });
    tab.decreasing = by_size.size() >= 2;
    for (std::size_t k = 1; k < by_size.size(); ++k)
        if (!(by_size[k].mean < by_size[k - 1].mean)) tab.decreasing = false;
    return tab;
}

KappaEstimate estimate_kappa(const std::vector<DrivingFunction>& w, int bootstrap, std::uint64_t seed) {
    if (w.size() < 30) throw InvalidInput("estimate_kappa needs at least 30 drivings");
    if (bootstrap < 1) throw InvalidInput("bootstrap count must be positive");
    require_common_grid(w);
    const double T = w.front().horizon();
    if (!(T > 0.0)) throw InvalidInput("drivings have zero horizon");
    const std::size_t n = w.size();
    const std::size_t K = std::min<std::size_t>(100, w.front().times.size() - 1);

    KappaEstimate est;
    est.samples = int(n);
    for (std::size_t k = 1; k <= K; ++k) est.times.push_back(T * double(k) / double(K));
    std::vector<std::vector<double>> M(K, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < K; ++k) M[k][i] = w[i].at(est.times[k]);
    for (std::size_t k = 0; k < K; ++k) est.var.push_back(sample_variance(M[k]));
    est.kappa = slope_through_origin(est.times, est.var);

    Rng rng(seed);
    std::vector<double> slopes(bootstrap), col(n), v(K);
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < bootstrap; ++b) {
        for (auto& i : idx) i = std::size_t(rng.below(n));
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t i = 0; i < n; ++i) col[i] = M[k][idx[i]];
            v[k] = sample_variance(col);
        }
        slopes[b] = slope_through_origin(est.times, v);
    }
    std::sort(slopes.begin(), slopes.end());
    auto quantile = [&](double q) {
        double pos = q * double(bootstrap - 1);
        std::size_t lo = std::size_t(std::floor(pos));
        std::size_t hi = std::min<std::size_t>(lo + 1, bootstrap - 1);
        return slopes[lo] + (pos - double(lo)) * (slopes[hi] - slopes[lo]);
    };
    est.ci_lo = quantile(0.025);
    est.ci_hi = quantile(0.975);
    est.ac1 = pooled_ac1(w);
    return est;
}

std::vector<DrivingFunction> common_grid(const std::vector<DrivingFunction>& w, double dt) {
    if (w.empty()) throw InvalidInput("no drivings");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    double T = w.front().horizon();
    for (const auto& x : w) T = std::min(T, x.horizon());
    if (T < dt) throw InvalidInput("shortest driving is shorter than one grid step");
    const std::size_t keep = std::size_t(std::floor(T / dt * (1.0 + 1e-12))) + 1;
    std::vector<DrivingFunction> out;
    out.reserve(w.size());
    for (const auto& x : w) {
        DrivingFunction r = resample_driving(x, dt);
        r.times.resize(keep);
        r.values.resize(keep);
        out.push_back(std::move(r));
    }
    return out;
}

DrivingStats driving_tail_report(const std::vector<DrivingFunction>& w, const std::vector<double>& x_grid,
                                 double eps) {
    if (w.empty()) throw InvalidInput("no drivings");
    require_common_grid(w);
    const std::size_t n = w.size(), m = w.front().times.size();
    const double T = w.front().horizon();
    if (m < 3 || !(T > 0.0)) throw InvalidInput("drivings need at least two steps");

    DrivingStats st;
    st.samples = int(n);
    st.exp_eps = eps;
    std::vector<double> col(n), a(n), b(n);
    for (std::size_t k = 1; k + 1 < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = w[i].values[k];
            a[i] = w[i].values[k] - w[i].values[k - 1];
            b[i] = w[i].values[k + 1] - w[i].values[k];
        }
        st.times.push_back(w.front().times[k]);
        st.var.push_back(n > 1 ? sample_variance(col) : 0.0);
        st.ac1.push_back(n > 1 ? correlation(a, b) : 0.0);
    }

    // P(|W(u^2/4)| >= 2L) with u^2/4 at a quarter, half and all of the horizon
    const double fracs[3] = {0.25, 0.5, 1.0};
    for (double x : x_grid) {
        ExceedanceRow row;
        row.x = x;
        for (double f : fracs) {
            double u = 2.0 * std::sqrt(f * T), L = x * u;
            for (const auto& d : w) {
                row.count += std::abs(d.at(f * T)) >= 2.0 * L;
                ++row.total;
            }
        }
        row.freq = double(row.count) / double(row.total);
        st.exceedance.push_back(row);
    }
    std::vector<double> xs, ys;
    for (const auto& r : st.exceedance)
        if (r.count > 0) {
            xs.push_back(r.x);
            ys.push_back(std::log(r.freq));
        }
    if (xs.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
        mx /= double(xs.size());
        my /= double(xs.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx) * (xs[k] - mx);
        }
        double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        st.decay_c = -slope;
        st.decay_K = std::exp(my - slope * mx);
        for (std::size_t k = 0; k < xs.size(); ++k)
            st.decay_residual = std::max(st.decay_residual, std::abs(ys[k] - (my + slope * (xs[k] - mx))));
        st.decay_fitted = true;
    }

    // dyadic oscillations sup_{u in block j} |W_u - W_{j 2^-n}| in units of sqrt(T)
    int levels = 0;
    while (levels < 12 && (std::size_t(2) << levels) < m) ++levels;
    std::vector<std::vector<double>> osc(levels, std::vector<double>(n, 0.0));
    const double rt = std::sqrt(T);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = w[i];
        for (int lv = 1; lv <= levels; ++lv) {
            const double h = T / double(1 << lv);
            std::size_t k = 0;
            for (int j = 0; j < (1 << lv); ++j) {
                double s0 = j * h, s1 = (j + 1) * h, w0 = d.at(s0);
                double worst = std::abs(d.at(s1) - w0);
                while (k < m && d.times[k] < s0) ++k;
                for (std::size_t q = k; q < m && d.times[q] <= s1; ++q)
                    worst = std::max(worst, std::abs(d.values[q] - w0));
                osc[lv - 1][i] = std::max(osc[lv - 1][i], worst / rt);
            }
        }
    }
    for (double alpha : {0.3, 0.4, 0.45})
        for (int lv = 1; lv <= levels; ++lv) {
            HolderRow row;
            row.alpha = alpha;
            row.level = lv;
            const double bound = std::pow(2.0, -alpha * lv);
            std::vector<double> ratio(n);
            int ok = 0;
            for (std::size_t i = 0; i < n; ++i) {
                ok += osc[lv - 1][i] <= bound;
                ratio[i] = osc[lv - 1][i] / bound;
            }
            std::nth_element(ratio.begin(), ratio.begin() + n / 2, ratio.end());
            row.within = double(ok) / double(n);
            row.median_ratio = ratio[n / 2];
            st.holder.push_back(row);
        }

    for (const auto& d : w) st.exp_moment += std::exp(eps * std::abs(d.values.back()) / rt);
    st.exp_moment /= double(n);
    return st;
}

void write_stats_csv(std::ostream& out, const DrivingStats& s) {
    out << "t,var,ac1\n";
    char buf[128];
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.6g\n", s.times[k], s.var[k], s.ac1[k]);
        out << buf;
    }
}

std::string stats_json(const DrivingStats& s, const KappaEstimate* k) {
    nlohmann::ordered_json j;
    j["schema"] = "loewner-lab/driving-stats@1";
    j["samples"] = s.samples;
    if (k) {
        j["kappa"] = {{"estimate", k->kappa}, {"ci_lo", k->ci_lo}, {"ci_hi", k->ci_hi}, {"ac1", k->ac1}};
    }
    auto& ex = j["exceedance"] = nlohmann::ordered_json::array();
    for (const auto& r : s.exceedance)
        ex.push_back({{"x", r.x}, {"count", r.count}, {"total", r.total}, {"freq", r.freq}});
    if (s.decay_fitted)
        j["decay"] = {{"c", s.decay_c}, {"K", s.decay_K}, {"max_residual", s.decay_residual}};
    else
        j["decay"] = nullptr;
    auto& ho = j["holder"] = nlohmann::ordered_json::array();
    for (const auto& r : s.holder)
        ho.push_back({{"alpha", r.alpha}, {"level", r.level}, {"within", r.within}, {"median_ratio", r.median_ratio}});
    j["exp_moment"] = {{"eps", s.exp_eps}, {"value", s.exp_moment}};
    return j.dump(2);
}

DrivingFunction initial_driving(const Curve& c, Point inward, double radius) {
    if (c.points.size() < 2) throw InvalidInput("curve too short");
    if (!(std::abs(inward) > 0.0) || !(radius > 0.0)) throw InvalidInput("bad inward direction or radius");
    const Point p0 = c.points.front();
    const Point rot = Point(0.0, 1.0) * std::conj(inward) / std::abs(inward);
    Curve part;
    part.meta = c.meta;
    for (Point z : c.points) {
        Point u = (z - p0) * rot;
        part.points.push_back(u);
        if (std::abs(z - p0) > radius) break;
    }
    part.points.front() = Point(0.0, 0.0);
    return extract_driving(part);
}

}  // namespace ll
