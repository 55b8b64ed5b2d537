#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "loewner_lab/conditions.hpp"
#include "loewner_lab/ensemble.hpp"
#include "loewner_lab/loewner.hpp"
#include "loewner_lab/models.hpp"
#include "loewner_lab/rng.hpp"
#include "loewner_lab/sle.hpp"

using namespace ll;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kConfigSchema = "loewner-lab/config@1";

const std::set<std::string> kVerbs = {"sample",   "extract-driving", "trace",      "check-condition",
                                      "capacity", "six-arm",         "kappa",      "continuity",
                                      "merge-reports", "modulus",    "convert"};

// JSON experiment configs.  Top-level keys are option names of the verb given
// on the command line; a nested object keyed by a verb name is also accepted.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::string verb) : verb_(std::move(verb)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConfigError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConfigError("config: top level must be an object");
        std::vector<CLI::ConfigItem> items;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "schema") {
                if (it.value() != kConfigSchema)
                    throw CLI::ConfigError("config field 'schema': expected \"" + std::string(kConfigSchema) + "\"");
                continue;
            }
            if (it.value().is_object()) {
                if (!kVerbs.count(it.key())) throw CLI::ConfigError("config field '" + it.key() + "': unknown verb");
                for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
                    items.push_back(item(it.key(), jt.key(), jt.value()));
            } else {
                items.push_back(item(verb_, it.key(), it.value()));
            }
        }
        return items;
    }

private:
    static std::string scalar(const std::string& field, const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConfigError("config field '" + field + "': expected a string, number or boolean");
    }

    static CLI::ConfigItem item(const std::string& verb, std::string key, const nlohmann::json& v) {
        for (auto& ch : key)
            if (ch == '_') ch = '-';
        CLI::ConfigItem ci;
        if (!verb.empty()) ci.parents = {verb};
        ci.name = key;
        if (v.is_array()) {
            for (const auto& e : v) ci.inputs.push_back(scalar(key, e));
        } else {
            ci.inputs.push_back(scalar(key, v));
        }
        return ci;
    }

    std::string verb_;
};

std::string find_verb(int argc, char** argv) {
    for (int i = 1; i < argc; ++i)
        if (kVerbs.count(argv[i])) return argv[i];
    return {};
}

// "-" or empty writes to stdout
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw InvalidInput("cannot open output file " + path);
        }
    }
    std::ostream& operator*() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    Output out(path);
    *out << text;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// data file plus a gnuplot script that draws it
void write_plot(const std::string& prefix, const std::string& data, const std::string& script) {
    if (prefix.empty()) return;
    write_text(prefix + ".dat", data);
    write_text(prefix + ".gp", "set datafile separator ','\nset key autotitle columnhead\n"
                               "set terminal pngcairo size 800,600\nset output '" +
                                   prefix + ".png'\n" + script);
}

struct ModelOpts {
    std::string model = "percolation", domain;
    double p = -1.0, q = 2.0;
    int sweeps = 200;

    void add(CLI::App* app) {
        app->add_option("--model", model, "percolation | lerw | harmonic-explorer | fk-ising | ust-peano");
        app->add_option("--domain", domain, "domain spec JSON file")->check(CLI::ExistingFile);
        app->add_option("--p", p, "edge/site parameter (model default when < 0)");
        app->add_option("--q", q, "fk-ising cluster weight");
        app->add_option("--sweeps", sweeps, "fk-ising heat-bath sweeps");
    }

    ModelSpec spec() const {
        if (domain.empty()) throw InvalidInput("--domain is required");
        ModelSpec s;
        s.model = model_from_string(model);
        s.domain = load_domain_file(domain);
        s.p = p;
        s.q = q;
        s.sweeps = sweeps;
        if (s.model == Model::FkIsing && q != 2.0)
            std::cerr << "warning: q = " << q << " is not the Ising point; results are outside the tested range\n";
        validate_spec(s);
        return s;
    }
};

std::vector<Point> boundary_points(const DiscreteDomain& d) {
    std::vector<Point> out;
    for (int s : d.arc1) out.push_back(d.pos[s]);
    for (int s : d.arc2) out.push_back(d.pos[s]);
    return out;
}

Point default_inward(const DiscreteDomain& d) {
    Point sum(0.0, 0.0);
    for (int v : d.nbr[d.a_site])
        if (d.role[v] == SiteRole::Interior) sum += d.pos[v] - d.pos[d.a_site];
    if (std::abs(sum) == 0.0) throw InvalidInput("start site has no interior neighbour");
    return sum / std::abs(sum);
}

double reference_kappa(Model m) {
    switch (m) {
        case Model::Lerw: return 2.0;
        case Model::Percolation: return 6.0;
        case Model::HarmonicExplorer: return 4.0;
        case Model::FkIsing: return 16.0 / 3.0;
        case Model::UstPeano: return 8.0;
    }
    return 0.0;
}

Curve pick_curve(const std::string& path, std::size_t index) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    auto curves = read_curves(in);
    if (index >= curves.size()) throw InvalidInput("curve index out of range");
    return curves[index];
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice interfaces, Loewner chains and crossing conditions"};
    app.require_subcommand(1);
    app.set_config("--config", "", "JSON experiment config (flags override its fields)")->check(CLI::ExistingFile);
    app.config_formatter(std::make_shared<JsonConfig>(find_verb(argc, argv)));
    app.allow_config_extras(CLI::config_extras_mode::error);

    int workers = workers_from_env(1);
    std::uint64_t seed = 1;
    int n = 100;
    std::string out_path = "-", csv_path, json_path, plot_prefix, in_path;
    ModelOpts mo;
    int status = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "base seed; job k uses hash(seed, k)");
        sub->add_option("--workers", workers, "worker threads (default: LOEWNER_LAB_WORKERS or 1)");
    };

    // sample ---------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "sample interfaces as NDJSON");
    mo.add(sample_cmd);
    common(sample_cmd);
    sample_cmd->add_option("--n", n, "number of curves");
    sample_cmd->add_option("--out", out_path, "output NDJSON");
    sample_cmd->callback([&] {
        ModelSpec base = mo.spec();
        if (n < 0) throw InvalidInput("--n must be >= 0");
        auto curves = run_ensemble<Curve>(std::size_t(n), workers, [&](std::size_t k) {
            ModelSpec s = base;
            s.seed = job_seed(seed, k);
            return sample(s);
        });
        Output out(out_path);
        write_curves(*out, curves);
    });

    // extract-driving ----------------------------------------------------------
    std::size_t index = 0;
    double radius = 0.0;
    std::vector<double> inward{0.0, 1.0};
    auto* extract_cmd = app.add_subcommand("extract-driving", "unzip a curve into its driving function");
    extract_cmd->add_option("--in", in_path, "curves NDJSON")->check(CLI::ExistingFile);
    extract_cmd->add_option("--index", index, "which curve of the file");
    extract_cmd->add_option("--radius", radius,
                            "lattice curves: keep the part inside this disk around the start and rotate "
                            "--inward to the imaginary axis");
    extract_cmd->add_option("--inward", inward, "inward direction x y")->expected(2);
    extract_cmd->add_option("--out", out_path, "output CSV (t,w)");
    extract_cmd->callback([&] {
        if (in_path.empty()) throw InvalidInput("--in is required");
        Curve c = pick_curve(in_path, index);
        DrivingFunction w = radius > 0.0 ? initial_driving(c, Point(inward[0], inward[1]), radius) : extract_driving(c);
        Output out(out_path);
        write_driving_csv(*out, w);
    });

    // trace --------------------------------------------------------------------
    SleSpec sle;
    double trace_dt = 0.0;
    auto* trace_cmd = app.add_subcommand("trace", "Loewner trace of a driving function");
    trace_cmd->add_option("--driving", in_path, "driving CSV (t,w); without it an SLE driving is sampled")
        ->check(CLI::ExistingFile);
    trace_cmd->add_option("--kappa", sle.kappa, "SLE kappa");
    trace_cmd->add_option("--T", sle.T, "capacity horizon");
    trace_cmd->add_option("--dt", sle.dt, "SLE time step");
    trace_cmd->add_option("--trace-dt", trace_dt, "uniform solver step (default: the driving's own grid)");
    trace_cmd->add_option("--seed", seed, "SLE seed");
    trace_cmd->add_option("--out", out_path, "output NDJSON");
    trace_cmd->callback([&] {
        DrivingFunction w;
        if (!in_path.empty()) {
            std::ifstream in(in_path);
            w = read_driving_csv(in);
        } else {
            sle.seed = seed;
            w = sample_sle_driving(sle);
        }
        Curve c = trace_dt > 0.0 ? solve_trace(w, trace_dt) : solve_trace_on_grid(w, std::sqrt(w.times.size() > 1 ? w.times[1] : 1e-4));
        c.meta.seed = seed;
        Output out(out_path);
        *out << curve_to_ndjson(c) << '\n';
    });

    // check-condition ----------------------------------------------------------
    G2Options g2;
    auto* check_cmd = app.add_subcommand("check-condition", "empirical test of the unforced-crossing condition");
    mo.add(check_cmd);
    common(check_cmd);
    check_cmd->add_option("--n", g2.samples, "samples per annulus grid");
    check_cmd->add_option("--C", g2.C, "ratio R/r");
    check_cmd->add_option("--r", g2.inner_radii, "inner radii in lattice units");
    check_cmd->add_option("--tau-rule", g2.tau_rule, "hit | t0");
    check_cmd->add_option("--estimator", g2.estimator, "auto | restart | continuation");
    check_cmd->add_option("--min-trials", g2.min_trials, "trials for a conclusive cell");
    check_cmd->add_option("--spacing", g2.center_spacing, "annulus centre spacing in units of R");
    check_cmd->add_option("--shape", g2.shape, "shape label for the report");
    check_cmd->add_option("--csv", csv_path, "per-cell report CSV");
    check_cmd->add_option("--json", out_path, "summary JSON");
    check_cmd->add_option("--plot", plot_prefix, "plot data and gnuplot script prefix");
    check_cmd->callback([&] {
        ModelSpec base = mo.spec();
        g2.seed = seed;
        g2.workers = workers;
        CrossingReport rep = test_condition_G2(base, g2);
        if (!csv_path.empty()) {
            Output csv(csv_path);
            write_report_csv(*csv, rep);
        }
        Output out(out_path);
        *out << report_summary_json(rep) << '\n';
        std::ostringstream data;
        data << "r_over_R,rate,ci_hi\n";
        for (const auto& r : rep.rows)
            if (r.trials > 0) data << num(r.r / r.R) << ',' << num(r.rate()) << ',' << num(r.ci_hi) << '\n';
        write_plot(plot_prefix, data.str(),
                   "set logscale x\nset xlabel 'r/R'\nset ylabel 'unforced crossing rate'\n"
                   "plot '" + plot_prefix + ".dat' using 1:2 with points, '' using 1:3 with points, 0.5 with lines\n");
        if (rep.verdict == "FAIL") status = 2;
    });

    // capacity -----------------------------------------------------------------
    std::string cap_shape = "rect";
    double cw = 1.0, ch = 1.0, cx = 0.0;
    auto* cap_cmd = app.add_subcommand("capacity", "half-plane capacity of a hull");
    cap_cmd->set_help_flag("--help", "print this help message and exit");  // frees -h for the height
    cap_cmd->add_option("--shape", cap_shape, "slit | rect | curve");
    cap_cmd->add_option("--w", cw, "rectangle width");
    cap_cmd->add_option("--h", ch, "slit or rectangle height");
    cap_cmd->add_option("--x", cx, "base point on the real line");
    cap_cmd->add_option("--in", in_path, "curves NDJSON for --shape curve")->check(CLI::ExistingFile);
    cap_cmd->add_option("--index", index, "which curve of the file");
    cap_cmd->add_option("--out", out_path, "output JSON");
    cap_cmd->callback([&] {
        ojson j;
        j["shape"] = cap_shape;
        CapacityReport rep;
        if (cap_shape == "slit") {
            Curve c;
            c.points = {Point(cx, 0.0), Point(cx, ch)};
            rep = hcap_curve(c);
            j["h"] = ch;
            j["closed_form"] = 0.5 * ch * ch;
        } else if (cap_shape == "rect") {
            rep = hcap_polygon({Point(cx, 0.0), Point(cx, ch), Point(cx + cw, ch), Point(cx + cw, 0.0)});
            j["w"] = cw;
            j["h"] = ch;
            j["ratio"] = rep.hcap / (cw * ch / (2.0 * M_PI));
        } else if (cap_shape == "curve") {
            if (in_path.empty()) throw InvalidInput("--in is required for --shape curve");
            rep = hcap_curve(pick_curve(in_path, index));
        } else {
            throw InvalidInput("unknown capacity shape '" + cap_shape + "'");
        }
        j["hcap"] = rep.hcap;
        j["method"] = to_string(rep.method);
        j["error"] = rep.error;
        Output out(out_path);
        *out << j.dump(2) << '\n';
    });

    // six-arm --------------------------------------------------------------------
    std::vector<double> six_r{8.0, 4.0, 2.0};
    double six_R = 16.0, six_rho = 16.0;
    auto* six_cmd = app.add_subcommand("six-arm", "frequency of the deep-fjord event E(r, R)");
    mo.add(six_cmd);
    common(six_cmd);
    six_cmd->add_option("--n", n, "samples");
    six_cmd->add_option("--r", six_r, "crosscut diameters in lattice units");
    six_cmd->add_option("--R", six_R, "fjord diameter in lattice units");
    six_cmd->add_option("--rho", six_rho, "distance kept from the target point");
    six_cmd->add_option("--out", out_path, "output JSON");
    six_cmd->callback([&] {
        ModelSpec base = mo.spec();
        const double h = base.domain.spacing;
        const auto bnd = boundary_points(base.domain);
        auto hits = run_ensemble<std::vector<int>>(std::size_t(n), workers, [&](std::size_t k) {
            ModelSpec s = base;
            s.seed = job_seed(seed, k);
            Curve c = sample(s);
            std::vector<int> row;
            for (double r : six_r) row.push_back(detect_six_arm(c, bnd, base.domain.b, r * h, six_R * h, six_rho * h) ? 1 : 0);
            return row;
        });
        ojson j;
        j["schema"] = "loewner-lab/six-arm@1";
        j["model"] = mo.model;
        j["base_seed"] = seed;
        j["samples"] = n;
        j["R"] = six_R;
        j["rho"] = six_rho;
        auto& rows = j["rows"] = ojson::array();
        std::vector<double> freq;
        for (std::size_t i = 0; i < six_r.size(); ++i) {
            long events = 0;
            for (const auto& h : hits) events += h[i];
            Interval iv = wilson_interval(n, events);
            freq.push_back(n > 0 ? double(events) / n : 0.0);
            rows.push_back({{"r", six_r[i]}, {"events", events}, {"freq", freq.back()}, {"ci_lo", iv.lo}, {"ci_hi", iv.hi}});
        }
        // monotone in r: larger crosscuts make the event more likely
        bool mono = true;
        for (std::size_t a = 0; a < six_r.size(); ++a)
            for (std::size_t b = 0; b < six_r.size(); ++b)
                if (six_r[a] > six_r[b] && !(freq[a] > freq[b])) mono = false;
        j["decreasing_in_r"] = mono;
        Output out(out_path);
        *out << j.dump(2) << '\n';
    });

    // kappa ------------------------------------------------------------------------
    double synthetic = -1.0, reference = -1.0, grid_dt = 0.0;
    int bootstrap = 1000;
    double kradius = 16.0;
    auto* kappa_cmd = app.add_subcommand("kappa", "estimate kappa from driving functions");
    mo.add(kappa_cmd);
    common(kappa_cmd);
    kappa_cmd->add_option("--n", n, "number of drivings");
    kappa_cmd->add_option("--synthetic", synthetic, "use SLE drivings of this kappa instead of a lattice model");
    kappa_cmd->add_option("--T", sle.T, "synthetic horizon");
    kappa_cmd->add_option("--dt", sle.dt, "synthetic time step");
    kappa_cmd->add_option("--radius", kradius, "lattice curves are cut on leaving this disk (lattice units)");
    kappa_cmd->add_option("--grid-dt", grid_dt, "common grid step (default: horizon / 200)");
    kappa_cmd->add_option("--bootstrap", bootstrap, "bootstrap resamples");
    kappa_cmd->add_option("--reference", reference, "external reference value to compare against");
    kappa_cmd->add_option("--csv", csv_path, "stats CSV (t,var,ac1)");
    kappa_cmd->add_option("--out", out_path, "output JSON");
    kappa_cmd->add_option("--plot", plot_prefix, "plot data and gnuplot script prefix");
    kappa_cmd->callback([&] {
        std::vector<DrivingFunction> w;
        std::string source;
        if (synthetic >= 0.0) {
            source = "sle";
            SleSpec s = sle;
            s.kappa = synthetic;
            w = run_ensemble<DrivingFunction>(std::size_t(n), workers, [&](std::size_t k) {
                SleSpec t = s;
                t.seed = job_seed(seed, k);
                return sample_sle_driving(t);
            });
        } else {
            ModelSpec base = mo.spec();
            source = mo.model;
            if (reference < 0.0) reference = reference_kappa(base.model);
            const Point in = default_inward(base.domain);
            const double rad = kradius * base.domain.spacing;
            auto raw = run_ensemble<DrivingFunction>(std::size_t(n), workers, [&](std::size_t k) {
                ModelSpec s = base;
                s.seed = job_seed(seed, k);
                return initial_driving(sample(s), in, rad);
            });
            double T = raw.front().horizon();
            for (const auto& d : raw) T = std::min(T, d.horizon());
            w = common_grid(raw, grid_dt > 0.0 ? grid_dt : T / 200.0);
        }
        KappaEstimate est = estimate_kappa(w, bootstrap, seed);
        DrivingStats st = driving_tail_report(w);
        if (!csv_path.empty()) {
            Output csv(csv_path);
            write_stats_csv(*csv, st);
        }
        ojson j = ojson::parse(stats_json(st, &est));
        j["source"] = source;
        j["base_seed"] = seed;
        j["horizon"] = w.front().horizon();
        if (reference >= 0.0)
            j["reference"] = {{"kappa", reference}, {"label", "external"},
                              {"inside_ci", est.ci_lo <= reference && reference <= est.ci_hi}};
        Output out(out_path);
        *out << j.dump(2) << '\n';
        std::ostringstream data;
        data << "t,var\n";
        for (std::size_t k = 0; k < est.times.size(); ++k) data << num(est.times[k]) << ',' << num(est.var[k]) << '\n';
        write_plot(plot_prefix, data.str(),
                   "set xlabel 't'\nset ylabel 'Var W_t'\nplot '" + plot_prefix + ".dat' using 1:2 with points, " +
                       num(est.kappa) + "*x with lines title 'fit'\n");
    });

    // continuity ---------------------------------------------------------------------
    double ck = 2.0, cT = 1.0, cdt = 1e-3;
    std::vector<double> deltas{0.5, 0.25, 0.125};
    int seeds = 50;
    auto* cont_cmd = app.add_subcommand("continuity", "coupled-noise trace distance as kappa varies");
    common(cont_cmd);
    cont_cmd->add_option("--kappa", ck, "base kappa");
    cont_cmd->add_option("--deltas", deltas, "kappa offsets");
    cont_cmd->add_option("--T", cT, "capacity horizon");
    cont_cmd->add_option("--dt", cdt, "time step");
    cont_cmd->add_option("--seeds", seeds, "coupled samples");
    cont_cmd->add_option("--csv", csv_path, "table CSV");
    cont_cmd->add_option("--out", out_path, "output JSON");
    cont_cmd->add_option("--plot", plot_prefix, "plot data and gnuplot script prefix");
    cont_cmd->callback([&] {
        ContinuityTable tab = kappa_continuity_experiment(ck, deltas, cT, cdt, seeds, seed, workers);
        std::ostringstream data;
        data << "delta,mean,sd,diameter,seeds\n";
        for (const auto& r : tab.rows)
            data << num(r.delta) << ',' << num(r.mean) << ',' << num(r.sd) << ',' << num(r.diameter) << ','
                 << r.seeds << '\n';
        write_text(csv_path, data.str());
        ojson j;
        j["schema"] = "loewner-lab/continuity@1";
        j["kappa"] = ck;
        j["T"] = cT;
        j["dt"] = cdt;
        j["base_seed"] = seed;
        auto& rows = j["rows"] = ojson::array();
        for (const auto& r : tab.rows)
            rows.push_back({{"delta", r.delta}, {"mean", r.mean}, {"sd", r.sd}, {"diameter", r.diameter}, {"seeds", r.seeds}});
        j["decreasing"] = tab.decreasing;
        Output out(out_path);
        *out << j.dump(2) << '\n';
        write_plot(plot_prefix, data.str(),
                   "set logscale xy\nset xlabel 'delta'\nset ylabel 'mean trace distance'\nplot '" + plot_prefix +
                       ".dat' using 1:2:3 with yerrorbars\n");
    });

    // merge-reports -------------------------------------------------------------------
    std::vector<std::string> paths;
    double mC = 8.0;
    long mmin = 30;
    auto* merge_cmd = app.add_subcommand("merge-reports", "count-additive merge of report CSVs");
    merge_cmd->add_option("paths", paths, "report CSV files")->check(CLI::ExistingFile);
    merge_cmd->add_option("--C", mC, "ratio R/r used for the verdict");
    merge_cmd->add_option("--min-trials", mmin, "trials for a conclusive cell");
    merge_cmd->add_option("--csv", csv_path, "merged CSV");
    merge_cmd->add_option("--json", out_path, "summary JSON");
    merge_cmd->callback([&] {
        CrossingReport acc;
        acc.C = mC;
        acc.min_trials = mmin;
        for (const auto& p : paths) {
            std::ifstream in(p);
            CrossingReport r = read_report_csv(in);
            r.C = mC;
            r.min_trials = mmin;
            acc = merge_reports(acc, r);
        }
        acc.C = mC;
        acc.min_trials = mmin;
        assign_verdict(acc);
        if (!csv_path.empty()) {
            Output csv(csv_path);
            write_report_csv(*csv, acc);
        }
        Output out(out_path);
        *out << report_summary_json(acc) << '\n';
        if (acc.verdict == "FAIL") status = 2;
    });

    // modulus ---------------------------------------------------------------------------
    std::string quad = "rect";
    double qL = 1.0, qH = 1.0, qr = 1.0, qR = 4.0;
    std::vector<int> refinements{4};
    auto* mod_cmd = app.add_subcommand("modulus", "discrete extremal length of a quadrilateral");
    mod_cmd->add_option("--shape", quad, "rect | annulus | lshape");
    mod_cmd->add_option("--L", qL, "rectangle length");
    mod_cmd->add_option("--H", qH, "rectangle height");
    mod_cmd->add_option("--r", qr, "annulus inner radius");
    mod_cmd->add_option("--R", qR, "annulus outer radius");
    mod_cmd->add_option("--refinement", refinements, "grid refinements");
    mod_cmd->add_option("--out", out_path, "output JSON");
    mod_cmd->callback([&] {
        TopQuad q;
        ojson j;
        j["shape"] = quad;
        if (quad == "rect") {
            q = rectangle_quad(qL, qH);
            j["exact"] = qL / qH;
        } else if (quad == "annulus") {
            q = cut_annulus_quad(qr, qR);
            j["lower_bound"] = std::log(qR / qr) / (2.0 * M_PI);
        } else if (quad == "lshape") {
            q = l_shaped_quad();
        } else {
            throw InvalidInput("unknown quadrilateral '" + quad + "'");
        }
        auto& rows = j["rows"] = ojson::array();
        for (int r : refinements) rows.push_back({{"refinement", r}, {"modulus", modulus_quad(q, r)}});
        Output out(out_path);
        *out << j.dump(2) << '\n';
    });

    // convert ------------------------------------------------------------------------------
    std::string direction = "G2->G3";
    std::map<std::string, double> cin;
    auto* conv_cmd = app.add_subcommand("convert", "translate constants between crossing conditions");
    conv_cmd->add_option("--direction", direction, "G2->G3 | G2->C2 | C3->G2 | G3->G2");
    for (const char* key : {"C", "K", "eps", "Delta"})
        conv_cmd->add_option_function<double>(std::string("--") + key, [&cin, key](double v) { cin[key] = v; },
                                              std::string("constant ") + key);
    conv_cmd->add_option("--out", out_path, "output JSON");
    conv_cmd->callback([&] {
        ojson j;
        j["direction"] = direction;
        for (const auto& [k, v] : convert_constants(direction, cin)) j[k] = v;
        Output out(out_path);
        *out << j.dump(2) << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConditioningImpossible& e) {
        std::cerr << "error: conditioning impossible: " << e.what() << '\n';
        return 1;
    } catch (const ResolutionError& e) {
        std::cerr << "error: resolution: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return status;
}
