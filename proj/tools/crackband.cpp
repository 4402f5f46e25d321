// crackband: band structure of a periodic strip coupled through small
// windows in its vertical walls. Subcommands: modes, band, fit, prop2.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crackband/asymptotics.hpp"
#include "crackband/band_io.hpp"
#include "crackband/cell.hpp"
#include "crackband/errors.hpp"
#include "crackband/fd.hpp"
#include "crackband/pencil.hpp"

namespace cb = crackband;
using ojson = nlohmann::ordered_json;

namespace {

struct RunConfig {
    double H = 1.5;
    int m = 1;
    int n = 0;
    std::vector<double> epsilons = {1e-2, 1e-3, 1e-4, 1e-5};
    int theta_count = 33;
    double theta = 0.0; // prop2 quasimomentum
    int N = 32;
    double h = 0.0; // 0 = unset
    std::string method = "root";
    std::string out;
    std::string band_csv;
    int count = 8;
    bool strict = false;
    int jobs = 1;
};

double want_number(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number())
        throw cb::ConfigError("config field '" + key + "' must be a number");
    return v.get<double>();
}

int want_int(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw cb::ConfigError("config field '" + key + "' must be an integer");
    return v.get<int>();
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in)
        throw cb::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw cb::ConfigError(std::string("config parse: ") + e.what());
    }
    if (!j.is_object())
        throw cb::ConfigError("config root must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const auto& v = it.value();
        if (k == "H") cfg.H = want_number(v, k);
        else if (k == "m") cfg.m = want_int(v, k);
        else if (k == "n") cfg.n = want_int(v, k);
        else if (k == "epsilons") {
            if (!v.is_array() || v.empty())
                throw cb::ConfigError("config field 'epsilons' must be a nonempty array");
            cfg.epsilons.clear();
            for (const auto& e : v) cfg.epsilons.push_back(want_number(e, k));
        } else if (k == "theta_count") cfg.theta_count = want_int(v, k);
        else if (k == "theta") cfg.theta = want_number(v, k);
        else if (k == "N") cfg.N = want_int(v, k);
        else if (k == "h") cfg.h = want_number(v, k);
        else if (k == "method") {
            if (!v.is_string())
                throw cb::ConfigError("config field 'method' must be a string");
            cfg.method = v.get<std::string>();
        } else if (k == "out") {
            if (!v.is_string())
                throw cb::ConfigError("config field 'out' must be a string");
            cfg.out = v.get<std::string>();
        } else if (k == "band_csv") {
            if (!v.is_string())
                throw cb::ConfigError("config field 'band_csv' must be a string");
            cfg.band_csv = v.get<std::string>();
        } else if (k == "count") cfg.count = want_int(v, k);
        else if (k == "strict") {
            if (!v.is_boolean())
                throw cb::ConfigError("config field 'strict' must be a boolean");
            cfg.strict = v.get<bool>();
        } else if (k == "jobs") cfg.jobs = want_int(v, k);
        else
            throw cb::ConfigError("unknown config field '" + k + "'");
    }
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (!(cfg.H > 0.0)) throw cb::ConfigError("H must be positive");
    if (cfg.m < 0 || cfg.n < 0)
        throw cb::ConfigError("mode indices m, n must be nonnegative");
    for (size_t i = 0; i < cfg.epsilons.size(); ++i) {
        const double e = cfg.epsilons[i];
        if (!(e > 0.0) || !(e < cfg.H / 2.0)) {
            std::ostringstream os;
            os << "epsilons[" << i << "] = " << e
               << " out of range (0, H/2)";
            throw cb::ConfigError(os.str());
        }
    }
    if (cfg.theta_count < 2)
        throw cb::ConfigError("theta_count must be >= 2");
    if (cfg.N < 8) throw cb::ConfigError("N must be >= 8");
    if (cfg.jobs < 1) throw cb::ConfigError("jobs must be >= 1");
    if (cfg.method != "root" && cfg.method != "reduced" &&
        cfg.method != "fd_oracle" && cfg.method != "all")
        throw cb::ConfigError(
            "method must be one of root, reduced, fd_oracle, all");
}

std::vector<double> theta_grid(int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = 2.0 * cb::kPi * i / (count - 1);
    return g;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw cb::ConfigError("cannot open output file: " + out);
    f << text;
}

int cmd_modes(const RunConfig& cfg) {
    if (cfg.count < 1) throw cb::ConfigError("count must be >= 1");
    cb::CellSpec cell(cfg.H, cfg.epsilons.front(), {cfg.m, cfg.n});
    auto pairs = cb::neumann_eigenpairs(cell, cfg.count);
    ojson rows = ojson::array();
    for (const auto& [mi, ep] : pairs) {
        bool simple = true;
        try {
            cb::assert_simple(cell, mi, std::max(50.0, 2.0 * ep.E + 10.0));
        } catch (const cb::DegenerateMode&) {
            simple = false;
        }
        rows.push_back({{"m", mi.m},
                        {"n", mi.n},
                        {"E", ep.E},
                        {"uA0", ep.uA0},
                        {"uA1", ep.uA1},
                        {"simple", simple}});
    }
    ojson doc{{"H", cfg.H}, {"count", cfg.count}, {"rows", rows}};
    emit(cfg.out, doc.dump(2) + "\n");
    return 0;
}

int cmd_band(const RunConfig& cfg) {
    cb::CellSpec cell(cfg.H, cfg.epsilons.front(), {cfg.m, cfg.n});
    try {
        cb::assert_simple(cell, cell.mode, std::max(50.0, 2.0 * cb::mode_eigenvalue(cfg.H, cell.mode) + 10.0));
    } catch (const cb::DegenerateMode& e) {
        throw cb::ConfigError(std::string("tracked mode is degenerate: ") + e.what());
    }
    std::vector<std::string> pencil_methods;
    bool use_fd = false;
    if (cfg.method == "all") {
        pencil_methods = {"root", "reduced"};
        use_fd = true;
    } else if (cfg.method == "fd_oracle") {
        use_fd = true;
    } else {
        pencil_methods = {cfg.method};
    }
    if (use_fd && !(cfg.h > 0.0))
        throw cb::ConfigError("method " + cfg.method + " requires config field 'h'");

    const auto thetas = theta_grid(cfg.theta_count);
    cb::BandTable pencil;
    if (!pencil_methods.empty())
        pencil = cb::band_sweep(cell, cfg.epsilons, cell.mode, thetas, cfg.N,
                                pencil_methods, cfg.jobs);
    std::vector<cb::BandTable> fd_tables; // one per epsilon
    if (use_fd)
        for (double e : cfg.epsilons)
            fd_tables.push_back(cb::oracle_band(cell, e, thetas, cfg.h));

    // theta outer, epsilon inner, method last (root, reduced, fd_oracle)
    cb::BandTable table;
    const size_t pm = pencil_methods.size();
    const size_t ne = cfg.epsilons.size();
    for (size_t i = 0; i < thetas.size(); ++i)
        for (size_t j = 0; j < ne; ++j) {
            for (size_t k = 0; k < pm; ++k)
                table.rows.push_back(pencil.rows[(i * ne + j) * pm + k]);
            if (use_fd) table.rows.push_back(fd_tables[j].rows[i]);
        }

    bool any_failed = false;
    for (const auto& r : table.rows)
        if (!std::isfinite(r.E_numeric)) {
            any_failed = true;
            std::cerr << "warning: point theta=" << r.theta << " epsilon="
                      << r.epsilon << " method=" << r.method << " failed";
            if (!r.note.empty()) std::cerr << ": " << r.note;
            std::cerr << "\n";
        }

    emit(cfg.out, cb::band_to_csv(table));
    if (any_failed && cfg.strict) return 3;
    return 0;
}

int cmd_fit(const RunConfig& cfg) {
    if (cfg.band_csv.empty())
        throw cb::ConfigError("fit requires a band CSV (positional argument or "
                              "config field 'band_csv')");
    std::ifstream in(cfg.band_csv, std::ios::binary);
    if (!in) throw cb::ConfigError("cannot open band CSV: " + cfg.band_csv);
    std::stringstream ss;
    ss << in.rdbuf();
    cb::BandTable band = cb::read_band_csv(ss.str());

    cb::CellSpec cell(cfg.H, cfg.epsilons.front(), {cfg.m, cfg.n});
    const double E = cb::mode_eigenvalue(cfg.H, cell.mode);

    std::vector<double> thetas;
    for (const auto& r : band.rows) {
        bool seen = false;
        for (double t : thetas)
            if (std::abs(t - r.theta) <= 1e-12) seen = true;
        if (!seen) thetas.push_back(r.theta);
    }
    std::sort(thetas.begin(), thetas.end());

    ojson rows = ojson::array();
    bool any_failed = false;
    for (double th : thetas) {
        ojson row;
        row["theta"] = th;
        const double c1_theory = 2.0 * cb::kPi * cb::junction_coupling(cell, cell.mode, th);
        try {
            cb::LeadingFit fit = cb::fit_leading_coefficient(band, th, E);
            row["c1_fitted"] = fit.c1;
            row["c1_theory"] = c1_theory;
            row["c2_fitted"] = fit.c2;
            row["rms"] = fit.rms;
            row["relative_error"] =
                c1_theory != 0.0 ? std::abs(fit.c1 - c1_theory) / c1_theory
                                 : std::abs(fit.c1);
        } catch (const cb::Error& e) {
            any_failed = true;
            row["c1_theory"] = c1_theory;
            row["error"] = e.what();
            std::cerr << "warning: fit at theta=" << th << " failed: "
                      << e.what() << "\n";
        }
        rows.push_back(std::move(row));
    }
    ojson doc{{"H", cfg.H},
              {"m", cfg.m},
              {"n", cfg.n},
              {"E", E},
              {"rows", rows}};
    emit(cfg.out, doc.dump(2) + "\n");
    if (any_failed && cfg.strict) return 3;
    return 0;
}

int cmd_prop2(const RunConfig& cfg) {
    cb::CellSpec cell(cfg.H, cfg.epsilons.front(), {cfg.m, cfg.n});
    const double coupling = cb::junction_coupling(cell, cell.mode, cfg.theta);
    ojson rows = ojson::array();
    bool any_failed = false;
    for (double e : cfg.epsilons) {
        ojson row;
        row["epsilon"] = e;
        try {
            const double inner =
                cb::log_inverse_inner(cell, cfg.theta, e, cell.mode, cfg.N).real();
            const double scaled = inner * std::log(e);
            row["inner_scaled"] = scaled;
            row["coupling"] = coupling;
            row["deviation"] = std::abs(scaled - coupling);
        } catch (const cb::Error& ex) {
            any_failed = true;
            row["error"] = ex.what();
            std::cerr << "warning: prop2 at epsilon=" << e << " failed: "
                      << ex.what() << "\n";
        }
        rows.push_back(std::move(row));
    }
    ojson doc{{"H", cfg.H},
              {"m", cfg.m},
              {"n", cfg.n},
              {"theta", cfg.theta},
              {"rows", rows}};
    emit(cfg.out, doc.dump(2) + "\n");
    if (any_failed && cfg.strict) return 3;
    return 0;
}

struct Flags {
    std::string config, out, method, band_csv;
    int jobs = 0, theta_count = 0, N = 0, m = -1, n = -1, count = 0;
    double H = 0.0, h = 0.0, theta = 0.0;
    std::string epsilons; // comma separated
    bool strict = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--jobs", f.jobs, "worker pool size");
    sub->add_flag("--strict", f.strict, "fail (exit 3) if any point fails");
    sub->add_option("--out", f.out, "output path (default: stdout)");
    sub->add_option("--H", f.H, "strip height");
    sub->add_option("--mode-m", f.m, "tracked mode index m");
    sub->add_option("--mode-n", f.n, "tracked mode index n");
    sub->add_option("--epsilons", f.epsilons, "comma-separated half-apertures");
    sub->add_option("--theta-count", f.theta_count, "quasimomentum grid size");
    sub->add_option("--theta", f.theta, "quasimomentum (prop2)");
    sub->add_option("--N", f.N, "pencil discretization order");
    sub->add_option("--grid-h", f.h, "finite-difference spacing");
    sub->add_option("--method", f.method, "root|reduced|fd_oracle|all");
    sub->add_option("--count", f.count, "number of modes to list");
}

RunConfig merge(const CLI::App* sub, const Flags& f) {
    RunConfig cfg = load_config(f.config);
    auto set = [&](const char* name) { return sub->count(name) > 0; };
    if (set("--jobs")) cfg.jobs = f.jobs;
    if (set("--strict")) cfg.strict = true;
    if (set("--out")) cfg.out = f.out;
    if (set("--H")) cfg.H = f.H;
    if (set("--mode-m")) cfg.m = f.m;
    if (set("--mode-n")) cfg.n = f.n;
    if (set("--theta-count")) cfg.theta_count = f.theta_count;
    if (set("--theta")) cfg.theta = f.theta;
    if (set("--N")) cfg.N = f.N;
    if (set("--grid-h")) cfg.h = f.h;
    if (set("--method")) cfg.method = f.method;
    if (set("--count")) cfg.count = f.count;
    if (set("--epsilons")) {
        cfg.epsilons.clear();
        std::stringstream ss(f.epsilons);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                cfg.epsilons.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw cb::ConfigError("bad --epsilons entry: " + tok);
            }
        }
        if (cfg.epsilons.empty())
            throw cb::ConfigError("--epsilons produced an empty list");
    }
    if (!f.band_csv.empty()) cfg.band_csv = f.band_csv;
    validate(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"band structure of a strip with windowed walls"};
    app.require_subcommand(1);
    Flags f;
    CLI::App* modes = app.add_subcommand("modes", "list cell eigenpairs");
    CLI::App* band = app.add_subcommand("band", "sweep the dispersion band to CSV");
    CLI::App* fit = app.add_subcommand("fit", "fit the leading band-shift coefficient");
    CLI::App* prop2 = app.add_subcommand("prop2", "window inner-product probe table");
    for (CLI::App* s : {modes, band, fit, prop2}) add_common(s, f);
    fit->add_option("csv", f.band_csv, "band CSV produced by `band`");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig cfg = merge(sub, f);
        if (sub == modes) return cmd_modes(cfg);
        if (sub == band) return cmd_band(cfg);
        if (sub == fit) return cmd_fit(cfg);
        return cmd_prop2(cfg);
    } catch (const cb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cb::MalformedData& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return 4;
    } catch (const cb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
