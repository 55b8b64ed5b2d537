#include "loewner_lab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loewner_lab/ensemble.hpp"

namespace ll {

DomainState time_zero_state(const DiscreteDomain& d) {
    DomainState st;
    st.domain = &d;
    st.label.assign(d.size(), 0);
    for (int s = 0; s < d.size(); ++s) st.label[s] = std::int8_t(d.role[s]);
    return st;
}

DomainState exploration_state(const HexExploration& ex, std::size_t tau) {
    DomainState st = time_zero_state(*ex.domain);
    for (int s : ex.revealed)
        if (ex.revealed_at[s] >= 0 && std::size_t(ex.revealed_at[s]) <= tau)
            st.label[s] = ex.color[s] == 1 ? 1 : 2;
    return st;
}

HexExploration rewind_exploration(const HexExploration& full, std::size_t tau) {
    HexExploration ex = start_hex_exploration_unchecked(*full.domain);
    while (ex.points.size() < tau + 1 && !ex.done()) ex.step(full.color[ex.ahead]);
    return ex;
}

namespace {

bool square_based(const DiscreteDomain& d) {
    return d.kind == LatticeKind::Square || d.kind == LatticeKind::ModifiedMedial;
}

// Sites whose blocking counts as touching s: lattice neighbours, plus the
// diagonal ones on square lattices (a *-connected wall blocks 4-paths).
template <class F>
void for_touching(const DiscreteDomain& d, int s, F&& f) {
    for (int t : d.nbr[s]) f(t);
    if (!square_based(d)) return;
    for (int dx : {-1, 1})
        for (int dy : {-1, 1}) {
            int t = d.find(d.coord[s][0] + dx, d.coord[s][1] + dy);
            if (t >= 0) f(t);
        }
}

std::vector<int> free_sites_near(const DomainState& st, Point p, double radius, int skip_comp,
                                 const AvoidableSet* s) {
    std::vector<int> out;
    for (int v : st.domain->sites_near(p, radius))
        if (st.free(v) && (!s || s->component_of[v] != skip_comp || skip_comp < 0)) out.push_back(v);
    return out;
}

}  // namespace

AvoidableSet avoidable_components(const DomainState& st, const Annulus& a, Point tip, Point target) {
    validate_annulus(a);
    const DiscreteDomain& d = *st.domain;
    if (d.sites_near(tip, 1.5 * d.spacing).empty())
        throw InvalidInput("tip is not in the closure of the domain");
    AvoidableSet out;
    out.tip = tip;
    out.target = target;
    out.component_of.assign(d.size(), -1);
    for (int s : d.sites_near(a.z0, a.r + d.spacing))
        if (!st.free(s) && std::abs(d.pos[s] - a.z0) - 0.5 * d.spacing <= a.r) {
            out.inner_meets_boundary = true;
            break;
        }
    if (!out.inner_meets_boundary) return out;
    std::vector<int> cand = d.sites_near(a.z0, a.R);
    auto in_ring = [&](int s) {
        double rho = std::abs(d.pos[s] - a.z0);
        return st.free(s) && rho > a.r && rho < a.R;
    };
    std::vector<int> stack;
    for (int s0 : cand) {
        if (!in_ring(s0) || out.component_of[s0] >= 0) continue;
        const int id = int(out.components.size());
        out.components.emplace_back();
        auto& comp = out.components.back();
        out.component_of[s0] = id;
        stack.assign(1, s0);
        bool t1 = false, t2 = false;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            comp.push_back(u);
            for_touching(d, u, [&](int t) {
                if (st.label[t] == 1) t1 = true;
                if (st.label[t] == 2) t2 = true;
            });
            for (int v : d.nbr[u])
                if (in_ring(v) && out.component_of[v] < 0) {
                    out.component_of[v] = id;
                    stack.push_back(v);
                }
        }
        std::sort(comp.begin(), comp.end());
        out.avoidable.push_back(!(t1 && t2));
    }
    out.empty = std::none_of(out.avoidable.begin(), out.avoidable.end(), [](auto f) { return f != 0; });
    return out;
}

bool component_disconnects(const DomainState& st, const AvoidableSet& s, int k) {
    const DiscreteDomain& d = *st.domain;
    const double reach = 1.01 * d.spacing;
    auto from = free_sites_near(st, s.tip, reach, -1, nullptr);
    auto to = free_sites_near(st, s.target, reach, -1, nullptr);
    auto keep = [&](int v) { return s.component_of[v] != k; };
    std::vector<int> src, dst;
    for (int v : from)
        if (keep(v)) src.push_back(v);
    for (int v : to)
        if (keep(v)) dst.push_back(v);
    if (src.empty() || dst.empty()) return !from.empty() && !to.empty();
    std::vector<char> seen(d.size(), 0);
    std::vector<int> stack = src;
    for (int v : src) seen[v] = 1;
    std::set<int> goal(dst.begin(), dst.end());
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (goal.count(u)) return false;
        for (int v : d.nbr[u])
            if (!seen[v] && st.free(v) && keep(v)) {
                seen[v] = 1;
                stack.push_back(v);
            }
    }
    return true;
}

bool unforced_crossing(const std::vector<Point>& future, const Annulus& a, const DomainState& st,
                       const AvoidableSet& s) {
    if (s.empty || future.size() < 2) return false;
    const DiscreteDomain& d = *st.domain;
    Curve c;
    c.points = future;
    CrossingCount cc = count_crossings(c, a);
    for (const auto& cr : cc.crossings) {
        if (!cr.minimal) continue;
        bool seen_avoidable = false, seen_forced = false;
        for (std::size_t k = cr.first; k <= cr.last && !seen_forced; ++k)
            for (int v : d.sites_near(future[k], 0.6 * d.spacing)) {
                int id = s.component_of[v];
                if (id < 0) continue;
                if (s.avoidable[id])
                    seen_avoidable = true;
                else
                    seen_forced = true;
            }
        if (seen_avoidable && !seen_forced) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

Interval wilson_interval(long trials, long hits, double z) {
    if (trials <= 0) return {0.0, 1.0};
    if (hits < 0 || hits > trials) throw InvalidInput("hits must lie in [0, trials]");
    if (hits == 0) return {0.0, std::min(1.0, 3.0 / double(trials))};
    const double n = double(trials), p = double(hits) / n, z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void assign_verdict(CrossingReport& rep) {
    rep.conclusive = rep.inconclusive = rep.failing = 0;
    for (auto& row : rep.rows) {
        row.refresh_ci();
        if (row.R < rep.C * row.r * (1 - 1e-12)) continue;
        if (row.trials < rep.min_trials) {
            ++rep.inconclusive;
            continue;
        }
        ++rep.conclusive;
        if (row.ci_hi >= 0.5) ++rep.failing;
    }
    rep.verdict = rep.failing > 0 ? "FAIL" : "PASS";
}

namespace {

std::string fmt(double v, const char* f = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string row_key(const ReportRow& r) {
    return r.model + "|" + r.shape + "|" + fmt(r.z0x) + "|" + fmt(r.z0y) + "|" + fmt(r.r) + "|" +
           fmt(r.R) + "|" + r.tau_rule;
}

}  // namespace

CrossingReport merge_reports(const CrossingReport& a, const CrossingReport& b) {
    if (a.rows.empty() && a.samples == 0) return b;
    if (b.rows.empty() && b.samples == 0) return a;
    if (a.C != b.C && a.C != 0.0 && b.C != 0.0)
        throw InvalidInput("cannot merge reports with different C");
    CrossingReport out = a;
    out.C = a.C != 0.0 ? a.C : b.C;
    out.samples = a.samples + b.samples;
    out.fit.reset();
    std::map<std::string, std::size_t> at;
    for (std::size_t k = 0; k < out.rows.size(); ++k) at[row_key(out.rows[k])] = k;
    for (const auto& row : b.rows) {
        auto it = at.find(row_key(row));
        if (it == at.end()) {
            at[row_key(row)] = out.rows.size();
            out.rows.push_back(row);
        } else {
            out.rows[it->second].trials += row.trials;
            out.rows[it->second].hits += row.hits;
        }
    }
    for (auto& [k, v] : b.notes) out.notes.emplace(k, v);
    assign_verdict(out);
    return out;
}

static const char* kCsvHeader = "model,shape,z0x,z0y,r,R,tau_rule,trials,hits,ci_lo,ci_hi";

void write_report_csv(std::ostream& out, const CrossingReport& rep) {
    out << kCsvHeader << "\n";
    for (const auto& r : rep.rows)
        out << r.model << ',' << r.shape << ',' << fmt(r.z0x) << ',' << fmt(r.z0y) << ',' << fmt(r.r)
            << ',' << fmt(r.R) << ',' << r.tau_rule << ',' << r.trials << ',' << r.hits << ','
            << fmt(r.ci_lo, "%.6g") << ',' << fmt(r.ci_hi, "%.6g") << "\n";
}

CrossingReport read_report_csv(std::istream& in) {
    CrossingReport rep;
    std::string line;
    if (!std::getline(in, line)) return rep;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw InvalidInput("report schema mismatch: unexpected CSV header");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 11)
            throw InvalidInput("report line " + std::to_string(lineno) + ": expected 11 fields");
        ReportRow r;
        try {
            r.model = f[0];
            r.shape = f[1];
            r.z0x = std::stod(f[2]);
            r.z0y = std::stod(f[3]);
            r.r = std::stod(f[4]);
            r.R = std::stod(f[5]);
            r.tau_rule = f[6];
            r.trials = std::stol(f[7]);
            r.hits = std::stol(f[8]);
        } catch (const std::exception&) {
            throw InvalidInput("report line " + std::to_string(lineno) + ": bad number");
        }
        r.refresh_ci();
        rep.rows.push_back(r);
    }
    return rep;
}

std::string report_summary_json(const CrossingReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = "loewner-lab/report@1";
    j["verdict"] = rep.verdict;
    j["C"] = rep.C;
    j["min_trials"] = rep.min_trials;
    j["base_seed"] = rep.base_seed;
    j["samples"] = rep.samples;
    j["cells"] = rep.rows.size();
    j["conclusive"] = rep.conclusive;
    j["inconclusive"] = rep.inconclusive;
    j["failing"] = rep.failing;
    if (rep.fit) {
        nlohmann::ordered_json f;
        f["K"] = rep.fit->K;
        if (rep.fit->degenerate)
            f["Delta"] = "inf";
        else
            f["Delta"] = rep.fit->Delta;
        f["se"] = rep.fit->se;
        f["ci"] = {rep.fit->ci_lo, rep.fit->ci_hi};
        j["power_law"] = f;
    }
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<Annulus> annulus_grid(const DiscreteDomain& d, const std::vector<double>& inner,
                                  const std::vector<double>& outer, double center_spacing) {
    if (inner.size() != outer.size()) throw InvalidInput("radius lists differ in length");
    if (!(center_spacing > 0.0)) throw InvalidInput("centre spacing must be positive");
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (Point p : d.pos) {
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    const double extent = std::max(x1 - x0, y1 - y0);
    std::vector<Annulus> out;
    for (std::size_t k = 0; k < inner.size(); ++k) {
        Annulus a{Point(0, 0), inner[k], outer[k]};
        validate_annulus(a);
        if (2.0 * a.R > extent) continue;
        const double step = center_spacing * a.R;
        for (int iy = 0; y0 + iy * step <= y1 + 1e-9; ++iy)
            for (int ix = 0; x0 + ix * step <= x1 + 1e-9; ++ix) {
                a.z0 = Point(x0 + ix * step, y0 + iy * step);
                out.push_back(a);
            }
    }
    return out;
}

namespace {

enum class Estimator { Restart, Continuation, Own };

struct Cell {
    std::uint8_t trial = 0, hit = 0;
};

std::vector<Cell> g2_job(const ModelSpec& base, const std::vector<Annulus>& cells, bool hit_rule,
                         Estimator est, std::uint64_t seed) {
    const DiscreteDomain& d = base.domain;
    std::vector<Cell> out(cells.size());
    const bool hex = base.model == Model::Percolation || base.model == Model::HarmonicExplorer;
    HexExploration ex;
    std::vector<Point> pts;
    DomainState st0;
    if (hex) {
        ex = start_hex_exploration_unchecked(d);
        Rng rng(seed);
        if (base.model == Model::Percolation)
            continue_percolation(ex, effective_p(base), rng);
        else
            continue_harmonic_explorer(ex, rng);
        pts = ex.points;
    } else {
        ModelSpec s = base;
        s.seed = seed;
        pts = sample(s).points;
        st0 = time_zero_state(d);
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const Annulus& a = cells[k];
        std::size_t tau = 0;
        if (hit_rule) {
            tau = pts.size();
            for (std::size_t i = 0; i < pts.size(); ++i)
                if (std::abs(pts[i] - a.z0) <= a.r) {
                    tau = i;
                    break;
                }
            if (tau == pts.size()) continue;
        }
        DomainState st = hex ? exploration_state(ex, tau) : st0;
        AvoidableSet av = avoidable_components(st, a, pts[tau], d.b);
        if (av.empty) continue;
        out[k].trial = 1;
        std::vector<Point> future;
        if (est == Estimator::Restart) {
            HexExploration fut = rewind_exploration(ex, tau);
            Rng rng(job_seed(seed, k + 1));
            if (base.model == Model::Percolation)
                continue_percolation(fut, effective_p(base), rng);
            else
                continue_harmonic_explorer(fut, rng);
            future.assign(fut.points.begin() + tau, fut.points.end());
        } else {
            future.assign(pts.begin() + tau, pts.end());
        }
        out[k].hit = unforced_crossing(future, a, st, av);
    }
    return out;
}

CrossingReport g2_impl(const ModelSpec& base, const G2Options& opt, bool serial) {
    if (!(opt.C > 1.0)) throw InvalidInput("C must exceed 1");
    if (opt.samples < 0) throw InvalidInput("sample count must be nonnegative");
    validate_spec(base);
    const bool hex = base.model == Model::Percolation || base.model == Model::HarmonicExplorer;
    if (hex) check_hex_admissible(base.domain);
    CrossingReport rep;
    rep.C = opt.C;
    rep.min_trials = opt.min_trials;
    rep.base_seed = long(opt.seed);
    rep.samples = opt.samples;

    std::string rule = opt.tau_rule;
    if (rule != "hit" && rule != "t0") throw InvalidInput("unknown stopping rule '" + rule + "'");
    if (!hex && rule == "hit") {
        rule = "t0";
        rep.notes["stopping_rule"] = "time zero only: no resampling from a stopped state for this model";
    }
    Estimator est = Estimator::Own;
    if (rule == "hit") {
        if (opt.estimator == "restart")
            est = Estimator::Restart;
        else if (opt.estimator == "continuation")
            est = Estimator::Continuation;
        else if (opt.estimator == "auto")
            est = base.model == Model::Percolation ? Estimator::Restart : Estimator::Continuation;
        else
            throw InvalidInput("unknown estimator '" + opt.estimator + "'");
    }
    const char* est_name = est == Estimator::Restart ? "restart" : est == Estimator::Continuation ? "continuation" : "own";

    std::vector<double> outer;
    for (double r : opt.inner_radii) outer.push_back(opt.C * r);
    auto cells = annulus_grid(base.domain, opt.inner_radii, outer, opt.center_spacing);

    auto job = [&](std::size_t i) {
        return g2_job(base, cells, rule == "hit", est, job_seed(opt.seed, i));
    };
    auto parts = serial ? run_ensemble_serial<std::vector<Cell>>(opt.samples, job)
                        : run_ensemble<std::vector<Cell>>(opt.samples, opt.workers, job);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        ReportRow row;
        row.model = to_string(base.model);
        row.shape = opt.shape;
        row.z0x = cells[k].z0.real();
        row.z0y = cells[k].z0.imag();
        row.r = cells[k].r;
        row.R = cells[k].R;
        row.tau_rule = rule + "/" + est_name;
        for (const auto& p : parts) {
            row.trials += p[k].trial;
            row.hits += p[k].hit;
        }
        rep.rows.push_back(row);
    }
    assign_verdict(rep);
    auto pooled = pool_by_ratio(rep.rows);
    if (pooled.size() >= 3) rep.fit = fit_power_law(pooled);
    return rep;
}

}  // namespace

CrossingReport test_condition_G2(const ModelSpec& base, const G2Options& opt) {
    return g2_impl(base, opt, false);
}

CrossingReport test_condition_G2_serial(const ModelSpec& base, const G2Options& opt) {
    return g2_impl(base, opt, true);
}

// ---------------------------------------------------------------------------

std::vector<PowerLawRow> pool_by_ratio(const std::vector<ReportRow>& rows) {
    std::map<double, PowerLawRow> by;
    for (const auto& r : rows) {
        if (r.trials <= 0) continue;
        double ratio = r.r / r.R;
        auto& p = by[ratio];
        p.ratio = ratio;
        p.trials += r.trials;
        p.hits += r.hits;
    }
    std::vector<PowerLawRow> out;
    for (auto& [k, v] : by) out.push_back(v);
    return out;
}

PowerLawFit fit_power_law(const std::vector<PowerLawRow>& rows) {
    std::set<double> ratios;
    for (const auto& r : rows) {
        if (!(r.ratio > 0.0 && r.ratio < 1.0)) throw InvalidInput("ratios r/R must lie in (0,1)");
        ratios.insert(r.ratio);
    }
    if (ratios.size() < 3) throw InvalidInput("power-law fit needs at least 3 distinct ratios");
    PowerLawFit fit;
    bool counted = false, all_zero = true;
    std::vector<double> x, y, w;
    for (const auto& r : rows) {
        double p, wt;
        if (r.trials > 0) {
            counted = true;
            const double n = double(r.trials);
            long h = r.hits;
            if (h > 0) all_zero = false;
            p = h > 0 ? double(h) / n : std::min(1.0, 3.0 / n);
            double pc = std::min(p, 1.0 - 0.5 / n);
            wt = n * pc / (1.0 - pc);
        } else {
            if (!(r.p > 0.0)) throw InvalidInput("exact rows need p > 0");
            all_zero = false;
            p = r.p;
            wt = 1.0;
        }
        x.push_back(std::log(r.ratio));
        y.push_back(std::log(p));
        w.push_back(wt);
    }
    if (counted && all_zero) {
        fit.degenerate = true;
        fit.Delta = std::numeric_limits<double>::infinity();
        fit.K = std::exp(*std::max_element(y.begin(), y.end()));
        fit.ci_lo = fit.ci_hi = fit.Delta;
        return fit;
    }
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    fit.Delta = sxy / sxx;
    const double logK = my - fit.Delta * mx;
    fit.K = std::exp(logK);
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double res = y[i] - (logK + fit.Delta * x[i]);
        fit.residuals.push_back(res);
        ss += w[i] * res * res;
    }
    if (counted)
        fit.se = std::sqrt(1.0 / sxx);
    else
        fit.se = x.size() > 2 ? std::sqrt(ss / double(x.size() - 2) / sxx) : 0.0;
    fit.ci_lo = fit.Delta - 1.96 * fit.se;
    fit.ci_hi = fit.Delta + 1.96 * fit.se;
    return fit;
}

G3Constants g2_to_g3(double C) {
    if (!(C > 1.0)) throw InvalidInput("C must exceed 1");
    return {2.0, std::log(2.0) / std::log(C)};
}

double g2_to_c2(double C) {
    if (!(C > 1.0)) throw InvalidInput("C must exceed 1");
    return 4.0 * (C + 1.0) * (C + 1.0);
}

double c3_to_g2(double K, double eps) {
    if (!(K > 0.0) || !(eps > 0.0)) throw InvalidInput("K and eps must be positive");
    return std::pow(2.0 * K * std::exp(2.0), 2.0 * M_PI / eps);
}

double g3_to_g2(double K, double Delta) {
    if (!(K > 0.0) || !(Delta > 0.0)) throw InvalidInput("K and Delta must be positive");
    return std::pow(2.0 * K, 1.0 / Delta);
}

std::map<std::string, double> convert_constants(const std::string& direction,
                                                const std::map<std::string, double>& in) {
    auto get = [&](const char* k) {
        auto it = in.find(k);
        if (it == in.end()) throw InvalidInput(std::string("missing input ") + k);
        return it->second;
    };
    if (direction == "G2->G3") {
        auto g = g2_to_g3(get("C"));
        return {{"K", g.K}, {"Delta", g.Delta}};
    }
    if (direction == "G2->C2") return {{"M", g2_to_c2(get("C"))}};
    if (direction == "C3->G2") return {{"C", c3_to_g2(get("K"), get("eps"))}};
    if (direction == "G3->G2") return {{"C", g3_to_g2(get("K"), get("Delta"))}};
    throw InvalidInput("unknown direction '" + direction + "'");
}

ReportRow count_multiple_crossings(const std::vector<Curve>& ensemble, const Annulus& a, int n) {
    if (n < 1) throw InvalidInput("n must be >= 1");
    validate_annulus(a);
    ReportRow row;
    row.model = ensemble.empty() ? "" : ensemble.front().meta.model;
    row.shape = "annulus";
    row.z0x = a.z0.real();
    row.z0y = a.z0.imag();
    row.r = a.r;
    row.R = a.R;
    row.tau_rule = "n>=" + std::to_string(n);
    for (const auto& c : ensemble) {
        ++row.trials;
        if (count_crossings(c, a).total >= n) ++row.hits;
    }
    row.refresh_ci();
    return row;
}

}  // namespace ll
