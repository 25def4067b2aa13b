// hdl_cli: discrepancy reports, certification grids, lattice fuzzing and the
// sieve-MLE rate experiment, written as CSV or JSON.
//
// Exit codes: 0 pass, 1 check failed, 2 usage error, 3 numerical error.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hdl/hdl.hpp"

namespace {

using hdl::kInf;
using json = nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunSpec {
    std::string command;
    std::vector<std::string> families;
    std::string theta_grid;
    std::vector<double> deltas{0.25, 0.5, 1.0};
    std::vector<double> ks{2.0, 3.0};
    std::vector<double> k_primes{3.0, 4.0};
    double rel_tol = 1e-10;
    std::uint64_t seed = 20240601;
    std::string out;
    std::string format = "csv";
    long trials = 10000;
    std::vector<int> atoms{2, 4, 8, 16};
    bool gap_search = false;
    long gap_trials = 100000;
    std::vector<long> sample_sizes{100, 400, 1600, 6400};
    long replications = 200;
    double sieve_radius = 0.0;  // 0: the default 1/sqrt(n) rule
    double slack = 0.0;
    std::string slope_window = "-0.6:-0.4";
    // Test-only constant overrides.
    double mutate_bn = 18.0;
    double mutate_offset = 1.0;
};

// ---- formatting

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json jnum(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

class Table {
public:
    explicit Table(std::vector<std::string> cols) : cols_(std::move(cols)) {}

    void add(std::vector<std::string> row) {
        if (row.size() != cols_.size()) throw std::logic_error("row width mismatch");
        rows_.push_back(std::move(row));
    }

    void write_csv(std::ostream& os) const {
        write_line(os, cols_);
        for (const auto& r : rows_) write_line(os, r);
    }

    const std::vector<std::string>& columns() const { return cols_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << csv_field(v[i]);
        os << "\r\n";
    }

    std::vector<std::string> cols_;
    std::vector<std::vector<std::string>> rows_;
};

void emit(const RunSpec& spec, const std::function<void(std::ostream&)>& write) {
    if (spec.out.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(spec.out, std::ios::binary);
    if (!f) throw UsageError("cannot open output file " + spec.out);
    write(f);
}

// ---- grid parsing

std::vector<double> parse_theta_grid(const std::string& s) {
    std::vector<std::string> parts;
    const char sep = s.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
    auto num = [&](const std::string& p) {
        try {
            std::size_t used = 0;
            const double v = std::stod(p, &used);
            if (used != p.size()) throw UsageError("bad number in theta grid: " + p);
            return v;
        } catch (const std::logic_error&) {
            throw UsageError("bad number in theta grid: " + p);
        }
    };
    if (sep == ',') {
        std::vector<double> v;
        for (const auto& p : parts) v.push_back(num(p));
        if (v.empty()) throw UsageError("empty theta grid");
        return v;
    }
    // lo:hi:steps with an optional log/lin scale, as a fourth field or a suffix.
    if (parts.size() < 3 || parts.size() > 4) throw UsageError("theta grid must be lo:hi:steps[log|lin]");
    std::string steps = parts[2];
    std::string scale = parts.size() == 4 ? parts[3] : "log";
    for (const char* sfx : {"log", "lin"}) {
        if (steps.size() > 3 && steps.compare(steps.size() - 3, 3, sfx) == 0) {
            scale = sfx;
            steps.resize(steps.size() - 3);
        }
    }
    const double lo = num(parts[0]), hi = num(parts[1]);
    int n = 0;
    try {
        n = std::stoi(steps);
    } catch (const std::logic_error&) {
        throw UsageError("bad step count in theta grid: " + parts[2]);
    }
    if (n < 1) throw UsageError("theta grid needs at least one step");
    if (!(lo <= hi)) throw UsageError("theta grid needs lo <= hi");
    if (scale == "log") {
        if (!(lo > 0.0)) throw UsageError("log theta grid needs lo > 0");
        return hdl::log_grid(lo, hi, n);
    }
    if (scale != "lin") throw UsageError("theta grid scale must be log or lin");
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return v;
}

std::vector<hdl::PairSpec> build_pairs(const RunSpec& spec) {
    if (spec.families.empty()) {
        if (!spec.theta_grid.empty()) throw UsageError("--theta-grid needs --family");
        return hdl::standard_pairs();
    }
    std::vector<hdl::PairSpec> out;
    for (const auto& name : spec.families) {
        const auto f = hdl::parse_family(name);
        if (!f) throw UsageError("unknown family: " + name);
        std::vector<double> grid;
        if (*f == hdl::Family::Uniform01 || *f == hdl::Family::Triangular01) {
            grid = {0.0};
        } else if (!spec.theta_grid.empty()) {
            grid = parse_theta_grid(spec.theta_grid);
        } else if (*f == hdl::Family::NormalLoc) {
            grid = {0.25, 0.5, 1.0, 2.0};
        } else {
            grid = hdl::log_grid(1e-3, 0.2, 12);
        }
        for (double t : grid) {
            (void)hdl::make_family(*f, t);  // validates theta
            out.push_back({*f, t});
        }
    }
    return out;
}

void validate(const RunSpec& spec) {
    if (spec.deltas.empty() || spec.ks.empty()) throw UsageError("delta and k lists must be non-empty");
    for (double d : spec.deltas) {
        if (!(d > 0.0 && d <= 1.0)) throw UsageError("delta must lie in (0, 1]");
    }
    for (double k : spec.ks) {
        if (!(k >= 1.0)) throw UsageError("k must be >= 1");
    }
    for (double k : spec.k_primes) {
        if (!(k >= 1.0)) throw UsageError("k' must be >= 1");
    }
    if (!(spec.rel_tol > 0.0 && spec.rel_tol < 1.0)) throw UsageError("rel-tol must lie in (0, 1)");
    if (spec.format != "csv" && spec.format != "json") throw UsageError("format must be csv or json");
}

hdl::QuadConfig quad_config(const RunSpec& spec) {
    hdl::QuadConfig q;
    q.rel_tol = spec.rel_tol;
    return q;
}

double ratio_err(double a, double ea, double b, double eb) {
    if (!std::isfinite(a) || !(b > 0.0)) return 0.0;
    return ea / b + std::fabs(a) * eb / (b * b);
}

double safe_ratio(double a, double b) {
    if (b > 0.0) return a / b;
    return a == 0.0 ? std::nan("") : kInf;
}

// ---- report

int cmd_report(const RunSpec& spec) {
    const auto pairs = build_pairs(spec);
    const auto cfg = quad_config(spec);
    std::vector<std::string> cols{"pair", "family", "theta", "delta", "k"};
    for (const char* n : {"h_sq", "kl", "v_k", "v_k0", "bern_sq", "conv_sq", "ub", "cm", "fm", "ws", "nc", "l1",
                          "lk", "nc_over_hsq", "lk_over_hsq", "ws_over_hsq"}) {
        cols.push_back(n);
        cols.push_back(std::string(n) + "_err");
    }
    cols.insert(cols.end(), {"cm_c_star", "ub_analytic"});

    const auto blocks = hdl::parallel_map<std::vector<std::vector<std::string>>>(pairs.size(), [&](std::size_t i) {
        const auto& ps = pairs[i];
        hdl::PairEvaluator<hdl::ContinuousPair> ev(hdl::ContinuousPair(ps.p0(), ps.p(), cfg));
        std::vector<std::vector<std::string>> rows;
        for (double d : spec.deltas) {
            for (double k : spec.ks) {
                std::vector<std::string> r{ev.pair().label(), hdl::family_name(ps.family), fmt(ps.theta), fmt(d),
                                           fmt(k)};
                auto put = [&r](double v, double e) {
                    r.push_back(fmt(v));
                    r.push_back(std::isfinite(v) ? fmt(e) : "0");
                };
                auto put_est = [&](const hdl::IntegralEstimate& e) { put(e.value, e.abs_err); };
                const auto& h2 = ev.h_sq();
                put_est(h2);
                put_est(ev.kl());
                if (k > 1.0) {
                    put_est(ev.v_k(k));
                    if (ev.kl().finite()) put_est(ev.v_k0(k));
                    else put(std::nan(""), 0.0);
                } else {
                    put(std::nan(""), 0.0);
                    put(std::nan(""), 0.0);
                }
                put_est(ev.bern(d));
                put_est(ev.conv(d));
                put(ev.ub().value, 0.0);
                put(ev.cm().value, ev.cm().abs_err);
                put_est(ev.fm());
                const auto& ws = ev.ws(d);
                const auto& nc = ev.nc(d);
                const auto& lk = ev.lk(k);
                put_est(ws);
                put_est(nc);
                put_est(ev.lk(1.0));
                put_est(lk);
                for (const auto* e : {&nc, &lk, &ws}) {
                    put(safe_ratio(e->value, h2.value), ratio_err(e->value, e->abs_err, h2.value, h2.abs_err));
                }
                r.push_back(fmt(ev.cm().c_star));
                r.push_back(ev.ub().analytic ? "true" : "false");
                rows.push_back(std::move(r));
            }
        }
        return rows;
    });

    Table t(cols);
    for (const auto& b : blocks)
        for (const auto& r : b) t.add(r);
    emit(spec, [&](std::ostream& os) {
        if (spec.format == "csv") {
            t.write_csv(os);
            return;
        }
        json rows = json::array();
        for (const auto& r : t.rows()) {
            json o;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const auto& c = t.columns()[i];
                if (c == "pair" || c == "family" || c == "ub_analytic") {
                    o[c] = c == "ub_analytic" ? json(r[i] == "true") : json(r[i]);
                } else {
                    o[c] = r[i] == "inf" || r[i] == "nan" || r[i] == "-inf" ? json(r[i]) : json(std::stod(r[i]));
                }
            }
            rows.push_back(std::move(o));
        }
        os << json{{"rows", rows}}.dump(2) << "\n";
    });
    return kExitPass;
}

// ---- certify

std::vector<std::string> cert_columns() {
    return {"pair", "name", "delta", "k", "k_prime", "lhs", "rhs", "margin", "err_budget", "pass", "vacuous",
            "skipped", "note"};
}

std::vector<std::string> cert_row(const hdl::Certificate& c) {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {c.pair, c.name, fmt(c.delta), fmt(c.k), fmt(c.k_prime), fmt(c.lhs), fmt(c.rhs), fmt(c.margin),
            fmt(c.err_budget), b(c.pass), b(c.vacuous), b(c.skipped), c.note};
}

json cert_json(const hdl::Certificate& c) {
    return json{{"pair", c.pair},         {"name", c.name},   {"delta", jnum(c.delta)},
                {"k", jnum(c.k)},         {"k_prime", jnum(c.k_prime)}, {"lhs", jnum(c.lhs)},
                {"rhs", jnum(c.rhs)},     {"margin", jnum(c.margin)},   {"err_budget", jnum(c.err_budget)},
                {"pass", c.pass},         {"vacuous", c.vacuous},       {"skipped", c.skipped},
                {"note", c.note}};
}

bool is_failure(const hdl::Certificate& c) { return !c.skipped && !c.vacuous && !c.pass; }

int cmd_certify(const RunSpec& spec) {
    const auto pairs = build_pairs(spec);
    const auto cfg = quad_config(spec);
    hdl::GridSpec grid{spec.deltas, {}, spec.k_primes};
    for (double k : spec.ks) {
        if (k >= 2.0) grid.ks.push_back(k);
    }
    hdl::CertConstants C;
    C.bn_hellinger = spec.mutate_bn;
    C.suff_offset = spec.mutate_offset;

    const auto blocks = hdl::parallel_map<std::vector<hdl::Certificate>>(pairs.size(), [&](std::size_t i) {
        hdl::PairEvaluator<hdl::ContinuousPair> ev(hdl::ContinuousPair(pairs[i].p0(), pairs[i].p(), cfg));
        return hdl::certify_pair(ev, grid, C);
    });
    std::vector<hdl::Certificate> all;
    for (const auto& b : blocks) all.insert(all.end(), b.begin(), b.end());

    long failures = 0, vacuous = 0, skipped = 0;
    for (const auto& c : all) {
        failures += is_failure(c);
        vacuous += c.vacuous;
        skipped += c.skipped;
    }
    emit(spec, [&](std::ostream& os) {
        if (spec.format == "csv") {
            Table t(cert_columns());
            for (const auto& c : all) t.add(cert_row(c));
            t.write_csv(os);
            return;
        }
        json certs = json::array();
        for (const auto& c : all) certs.push_back(cert_json(c));
        json summary{{"total", all.size()}, {"failures", failures}, {"vacuous", vacuous}, {"skipped", skipped}};
        os << json{{"summary", summary}, {"certificates", certs}}.dump(2) << "\n";
    });
    std::cerr << "certificates: " << all.size() << " failures: " << failures << " vacuous: " << vacuous
              << " skipped: " << skipped << "\n";
    return failures == 0 ? kExitPass : kExitFail;
}

// ---- lattice

std::string masses_str(const std::vector<double>& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) s += (i ? " " : "") + fmt(m[i]);
    return s;
}

int cmd_lattice(const RunSpec& spec) {
    if (spec.trials < 1) throw UsageError("trials must be positive");
    for (int n : spec.atoms) {
        if (n < 1 || n > 16) throw UsageError("atoms must lie in [1, 16]");
    }
    Table t({"record", "n_atoms", "trials", "index", "name", "value", "value_err", "feasible", "p0_masses",
             "p_masses"});
    json jfuzz = json::array();
    long total_violations = 0;
    for (int n : spec.atoms) {
        const auto s = hdl::fuzz_implications(spec.trials, spec.seed, n);
        total_violations += static_cast<long>(s.violations.size());
        t.add({"fuzz", std::to_string(n), std::to_string(s.trials), "", "violations",
               std::to_string(s.violations.size()), "0", "", "", ""});
        json jv = json::array();
        for (const auto& v : s.violations) {
            std::string names;
            for (const auto& x : v.violations) names += (names.empty() ? "" : " ") + x;
            t.add({"violation", std::to_string(n), std::to_string(s.trials), std::to_string(v.index), names, "", "",
                   "", masses_str(v.p0.masses), masses_str(v.p.masses)});
            jv.push_back({{"index", v.index}, {"violations", v.violations}, {"p0", v.p0.masses}, {"p", v.p.masses}});
        }
        jfuzz.push_back({{"n_atoms", n}, {"trials", s.trials}, {"violations", jv}});
    }
    json jgap = json::array();
    if (spec.gap_search) {
        for (auto obj : {hdl::GapObjective::NcHalfOverHsqWithFm, hdl::GapObjective::CmWithNcRatio}) {
            const auto g = hdl::search_gap(obj, spec.gap_trials, spec.seed);
            const auto& b = g.best;
            t.add({"gap", std::to_string(b.p0.size()), std::to_string(g.evaluations), "", hdl::to_string(obj),
                   fmt(g.value), "0", g.feasible ? "true" : "false", masses_str(b.p0.masses),
                   masses_str(b.p.masses)});
            jgap.push_back({{"objective", hdl::to_string(obj)}, {"value", jnum(g.value)}, {"value_err", 0.0},
                            {"feasible", g.feasible}, {"evaluations", g.evaluations}, {"p0", b.p0.masses},
                            {"p", b.p.masses}});
        }
    }
    emit(spec, [&](std::ostream& os) {
        if (spec.format == "csv") {
            t.write_csv(os);
            return;
        }
        os << json{{"seed", spec.seed}, {"fuzz", jfuzz}, {"gap", jgap}}.dump(2) << "\n";
    });
    std::cerr << "lattice violations: " << total_violations << "\n";
    return total_violations == 0 ? kExitPass : kExitFail;
}

// ---- mle-rate

int cmd_mle_rate(const RunSpec& spec) {
    hdl::RateConfig cfg;
    cfg.sample_sizes = spec.sample_sizes;
    cfg.replications = spec.replications;
    cfg.seed = spec.seed;
    cfg.tolerance_slack = spec.slack;
    if (spec.sieve_radius < 0.0) throw UsageError("sieve radius must be positive");
    if (spec.sieve_radius > 0.0) {
        const double r = spec.sieve_radius;
        cfg.sieve_rule = [r](long) { return r; };
    }
    if (cfg.replications < 50) throw UsageError("replications must be >= 50");
    try {
        cfg.validate();
    } catch (const hdl::Error& e) {
        throw UsageError(e.what());
    }
    const auto win = parse_theta_grid(spec.slope_window + ":2:lin");
    const double lo = win.front(), hi = win.back();

    const auto res = hdl::run_rate_experiment(cfg);
    const bool ok = res.slope >= lo && res.slope <= hi;
    const double R = static_cast<double>(cfg.replications);
    // Normal-theory standard error of a sample median, sigma estimated by IQR / 1.349.
    auto median_se = [R](double iqr) { return 1.2533 * iqr / 1.349 / std::sqrt(R); };
    emit(spec, [&](std::ostream& os) {
        if (spec.format == "csv") {
            Table t({"n", "median_h", "median_h_err", "iqr_h", "iqr_h_err"});
            for (const auto& r : res.rows) {
                t.add({std::to_string(r.n), fmt(r.median_h), fmt(median_se(r.iqr_h)), fmt(r.iqr_h), "0"});
            }
            t.write_csv(os);
            return;
        }
        json rows = json::array();
        for (const auto& r : res.rows) {
            rows.push_back({{"n", r.n}, {"median_h", r.median_h}, {"median_h_err", median_se(r.iqr_h)},
                            {"iqr_h", r.iqr_h}, {"iqr_h_err", 0.0}});
        }
        os << json{{"rows", rows},
                   {"slope", res.slope},
                   {"intercept", res.intercept},
                   {"slope_window", {lo, hi}},
                   {"within_window", ok}}
                  .dump(2)
           << "\n";
    });
    std::cerr << "slope: " << fmt(res.slope) << " window: [" << fmt(lo) << ", " << fmt(hi) << "]\n";
    return ok ? kExitPass : kExitFail;
}

int run(const RunSpec& spec) {
    validate(spec);
    if (spec.command == "report") return cmd_report(spec);
    if (spec.command == "certify") return cmd_certify(spec);
    if (spec.command == "lattice") return cmd_lattice(spec);
    if (spec.command == "mle-rate") return cmd_mle_rate(spec);
    throw UsageError("unknown command: " + spec.command);
}

int exit_for(const hdl::Error& e) {
    switch (e.kind()) {
    case hdl::ErrorKind::IntegrandInvalid:
    case hdl::ErrorKind::Arithmetic:
    case hdl::ErrorKind::UndefinedCentering: return kExitNumeric;
    default: return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    RunSpec spec;
    CLI::App app{"Hellinger and Kullback-Leibler discrepancy checks"};
    app.set_config("--config", "", "TOML or INI file with option values; flags override it");
    app.add_option("command,--command", spec.command, "report | certify | lattice | mle-rate")
        ->required()
        ->check(CLI::IsMember({"report", "certify", "lattice", "mle-rate"}));
    app.add_option("--family", spec.families, "family name (repeatable); default: the standard grid");
    app.add_option("--theta-grid", spec.theta_grid, "lo:hi:steps[log|lin] or a comma list");
    app.add_option("--delta", spec.deltas, "delta values in (0, 1]")->delimiter(',');
    app.add_option("--k", spec.ks, "k values (>= 1)")->delimiter(',');
    app.add_option("--k-prime", spec.k_primes, "k' values for the L_k ordering")->delimiter(',');
    app.add_option("--rel-tol", spec.rel_tol, "quadrature relative tolerance");
    app.add_option("--seed", spec.seed, "random seed");
    app.add_option("--out", spec.out, "output file (default stdout)");
    app.add_option("--format", spec.format, "csv or json");
    app.add_option("--trials", spec.trials, "lattice trials per atom count");
    app.add_option("--atoms", spec.atoms, "atom counts for lattice fuzzing")->delimiter(',');
    app.add_flag("--gap-search", spec.gap_search, "also run the separating-example searches");
    app.add_option("--gap-trials", spec.gap_trials, "evaluations per gap search");
    app.add_option("--sample-sizes", spec.sample_sizes, "mle-rate sample sizes")->delimiter(',');
    app.add_option("--replications", spec.replications, "mle-rate replications per sample size");
    app.add_option("--sieve-radius", spec.sieve_radius, "constant exclusion radius (default 1/sqrt(n))");
    app.add_option("--slack", spec.slack, "log-likelihood suboptimality of the estimator");
    app.add_option("--slope-window", spec.slope_window, "accepted slope range lo:hi");
    app.add_option("--mutate-bn-hellinger", spec.mutate_bn)->group("");
    app.add_option("--mutate-suff-offset", spec.mutate_offset)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }
    try {
        return run(spec);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const hdl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
