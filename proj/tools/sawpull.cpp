// sawpull: enumerate, sample, and analyse adsorbing pulled lattice walks.
//
// Subcommands: enumerate, thermo, analyze, phase, force, mc, check.
// Failures print a one-line JSON error record {"error": code, "message": ...}
// on stderr and exit nonzero. SAWPULL_WORKERS overrides worker counts.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sawpull/curves.hpp"
#include "sawpull/enumerate.hpp"
#include "sawpull/flatperm.hpp"
#include "sawpull/inequalities.hpp"
#include "sawpull/io.hpp"
#include "sawpull/legendre.hpp"
#include "sawpull/oracle.hpp"
#include "sawpull/phase.hpp"

namespace {

using namespace sawpull;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Explicit value wins; otherwise SAWPULL_WORKERS; otherwise `fallback`.
int resolve_workers(int flag, int fallback) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("SAWPULL_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return fallback;
}

// ---------------------------------------------------------------------------
// table-directory loading

struct DirEntry {
    fs::path path;
    Manifest manifest;
};

std::vector<DirEntry> scan_tables(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<DirEntry> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && fs::exists(manifest_path(e.path()))) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) out.push_back({p, read_manifest(p)});
    if (out.empty())
        throw IoError("no tables with manifest sidecars found in '" + dir.string() + "'");
    return out;
}

// Exact tables needed by the analysis commands: for each slot, the entry of
// the right class and dimension with the largest n_max.
struct AnalysisSet {
    int dim = 0;
    std::optional<CountTable> positive, unfolded, plane, full;
};

int infer_dimension(const std::vector<DirEntry>& entries) {
    std::map<int, int> best;  // dim -> max positive n_max
    for (const DirEntry& e : entries)
        if (!e.manifest.stochastic && e.manifest.cls == WalkClass::positive) {
            int& b = best[e.manifest.dimension];
            b = std::max(b, e.manifest.n_max);
        }
    if (best.empty()) throw DomainError("no exact positive-walk table in the directory");
    if (best.size() > 1)
        throw DomainError("positive tables for several dimensions present; pass --dim");
    return best.begin()->first;
}

AnalysisSet load_analysis_set(const fs::path& dir, int dim_flag) {
    const std::vector<DirEntry> entries = scan_tables(dir);
    AnalysisSet s;
    s.dim = dim_flag > 0 ? dim_flag : infer_dimension(entries);
    const auto pick = [&](WalkClass cls, int want_dim, std::optional<CountTable>& slot) {
        const DirEntry* best = nullptr;
        for (const DirEntry& e : entries)
            if (!e.manifest.stochastic && e.manifest.cls == cls &&
                e.manifest.dimension == want_dim &&
                (!best || e.manifest.n_max > best->manifest.n_max))
                best = &e;
        if (best) slot = parse_table(best->path);
    };
    pick(WalkClass::positive, s.dim, s.positive);
    pick(WalkClass::positive_unfolded, s.dim, s.unfolded);
    pick(WalkClass::plane, s.dim - 1, s.plane);
    pick(WalkClass::full_lattice, s.dim, s.full);
    return s;
}

const CountTable& require_table(const std::optional<CountTable>& slot, const char* what, int dim) {
    if (!slot)
        throw DomainError("missing " + std::string(what) + " table for dimension " +
                          std::to_string(dim) + "; run `sawpull enumerate` first");
    return *slot;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_enumerate(int dim, int nmax, const std::string& cls_name, const fs::path& out,
                  const fs::path& cache_dir, bool no_cache, int workers) {
    const WalkClass cls = walk_class_from_string(cls_name);
    EnumerateOptions opt;
    opt.workers = resolve_workers(workers, 0);
    const auto t0 = std::chrono::steady_clock::now();
    const CountTable t =
        cached_enumerate(dim, nmax, cls, CacheOptions{cache_dir, !no_cache && !cache_dir.empty()},
                         opt);
    const Manifest m = serialize_table(t, out, elapsed_s(t0));
    std::cout << manifest_json(m).dump() << "\n";
    return 0;
}

int cmd_mc(int dim, int nmax, std::uint64_t tours, std::uint64_t seed, const fs::path& out,
           int workers) {
    FlatPermOptions opt;
    opt.workers = resolve_workers(workers, 1);
    const auto t0 = std::chrono::steady_clock::now();
    const DoSEstimate e = run_flatperm(dim, nmax, tours, seed, opt);
    const Manifest m = serialize_estimate(e, out, elapsed_s(t0));
    std::cout << manifest_json(m).dump() << "\n";
    return 0;
}

int cmd_thermo(const fs::path& table_path, const std::string& a_spec, const std::string& y_spec,
               const fs::path& out) {
    const CountTable t = parse_table(table_path);
    const std::vector<double> log_as = parse_grid_spec(a_spec).points();
    const std::vector<double> log_ys = parse_grid_spec(y_spec).points();
    const TableSource src(t);
    std::string tsv =
        "n\tlog_a\tlog_y\tlog_C\tlog_L\tlog_T\tfree_energy\t"
        "mean_visits\tvar_visits\tmean_height\tvar_height\n";
    char row[512];
    for (int n = 1; n <= t.n_max(); ++n)
        for (double u : log_as)
            for (double w : log_ys) {
                const WeightPoint p{std::exp(u), std::exp(w)};
                const double logC = src.log_partition(p, n, PartitionKind::C);
                const double logL = src.log_partition(p, n, PartitionKind::L);
                const double logT = src.log_partition(p, n, PartitionKind::T);
                const MomentReport mv = moment(t, p, n, Observable::visits);
                const MomentReport mh = moment(t, p, n, Observable::height);
                std::snprintf(row, sizeof row,
                              "%d\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\t%.10g\n",
                              n, u, w, logC, logL, logT, logC / n, mv.mean, mv.variance, mh.mean,
                              mh.variance);
                tsv += row;
            }
    io_detail::write_file(out, tsv);
    std::cout << "thermo: " << (t.n_max() * log_as.size() * log_ys.size()) << " rows -> "
              << out.string() << "\n";
    return 0;
}

json report_json(const InequalityReport& r) {
    json j;
    j["name"] = r.name;
    j["limit_level"] = r.limit_level;
    j["pass"] = r.pass;
    j["instances"] = r.instances.size();
    const InequalityInstance* worst = nullptr;
    for (const InequalityInstance& i : r.instances)
        if (!worst || i.slack < worst->slack) worst = &i;
    if (worst) {
        j["worst"] = {{"where", worst->where},
                      {"lhs", worst->lhs},
                      {"rhs", worst->rhs},
                      {"slack", worst->slack}};
    }
    return j;
}

int cmd_analyze(const fs::path& dir, const std::string& a_spec, const std::string& y_spec,
                const fs::path& out, int dim_flag) {
    const AnalysisSet s = load_analysis_set(dir, dim_flag);
    const CountTable& pos = require_table(s.positive, "positive", s.dim);
    const CountTable& unf = require_table(s.unfolded, "positive-unfolded", s.dim);
    const CountTable& pla = require_table(s.plane, "plane", s.dim - 1);

    AnalysisTables tabs;
    tabs.positive = &pos;
    tabs.unfolded = &unf;
    tabs.plane = &pla;
    if (s.full) tabs.full = &*s.full;

    const std::vector<double> log_as = parse_grid_spec(a_spec).points();
    const std::vector<double> log_ys = parse_grid_spec(y_spec).points();
    std::vector<WeightPoint> grid = weights_along_a(log_as);
    for (const WeightPoint& w : weights_along_y(log_ys)) grid.push_back(w);

    json doc;
    doc["dimension"] = s.dim;
    doc["n_max"] = pos.n_max();

    bool all_exact_pass = true;
    doc["inequalities"] = json::array();
    for (const InequalityReport& r : inequality_report(tabs, grid)) {
        doc["inequalities"].push_back(report_json(r));
        if (!r.limit_level && !r.pass) all_exact_pass = false;
    }

    if (s.full) {
        const TableSource pos_src(pos);
        const ModelCurves curves = build_model_curves(pos_src, *s.full, pla);
        doc["asymptotes"] = json::array();
        for (const InequalityReport& r : asymptote_check(curves, log_as, log_ys))
            doc["asymptotes"].push_back(report_json(r));
    }

    // Legendre transforms of the loop and tail free energies with the exact
    // inverse reconstruction residual.
    doc["legendre"] = json::array();
    const FreeEnergyCurve loops = free_energy_curve(pos, weights_along_a(log_as), PartitionKind::L);
    const FreeEnergyCurve tails = free_energy_curve(pos, weights_along_y(log_ys), PartitionKind::T);
    for (int n : {8, 12, 16}) {
        if (n > pos.n_max()) continue;
        for (const auto* c : {&loops, &tails}) {
            const LegendreTable lt = legendre_transform(*c, n);
            double worst = 0.0;
            for (double r : lt.inverse_residuals) worst = std::max(worst, r);
            int flagged = 0;
            for (char f : lt.boundary_flag) flagged += f != 0;
            doc["legendre"].push_back({{"kind", to_string(c->kind)},
                                       {"n", n},
                                       {"densities", lt.densities.size()},
                                       {"max_inverse_residual", worst},
                                       {"boundary_flagged", flagged}});
        }
    }

    doc["density"] = json::array();
    for (int n : {8, 12, 16}) {
        if (n > pos.n_max()) continue;
        const DensityReport r = density_consistency(pos, {5.0, 1.0}, n);
        doc["density"].push_back({{"n", r.n},
                                  {"a", r.a},
                                  {"mean_density", r.mean_density},
                                  {"alpha_star", r.alpha_star},
                                  {"gap", r.gap},
                                  {"e_minus", r.e_minus},
                                  {"e_plus", r.e_plus},
                                  {"one_sided_ok", r.one_sided_ok}});
    }

    doc["exact_inequalities_pass"] = all_exact_pass;
    io_detail::write_file(out, doc.dump(2) + "\n");
    std::cout << "analyze: d=" << s.dim << " exact inequalities "
              << (all_exact_pass ? "pass" : "FAIL") << " -> " << out.string() << "\n";
    return 0;
}

int cmd_phase(const fs::path& dir, const std::string& a_spec, const fs::path& out, int dim_flag) {
    const AnalysisSet s = load_analysis_set(dir, dim_flag);
    const CountTable& pos = require_table(s.positive, "positive", s.dim);
    const CountTable& pla = require_table(s.plane, "plane", s.dim - 1);
    const CountTable& ful = require_table(s.full, "full-lattice", s.dim);

    const TableSource pos_src(pos);
    const ModelCurves curves = build_model_curves(pos_src, ful, pla);
    std::vector<double> a_values;
    for (double u : parse_grid_spec(a_spec).points()) a_values.push_back(std::exp(u));
    const PhaseDiagram d = phase_diagram(pos, curves, a_values);

    char line[256];
    std::string tsv = "# adsorption-pulling phase boundary, d=" + std::to_string(s.dim) + "\n";
    std::snprintf(line, sizeof line, "# a_c_estimate\t%.10g\t%.10g\n", d.a_c_estimate.value,
                  d.a_c_estimate.half_width);
    tsv += line;
    std::snprintf(line, sizeof line, "# y_c0_estimate\t%.10g\t%.10g\n", d.y_c0_estimate.value,
                  d.y_c0_estimate.half_width);
    tsv += line;
    std::snprintf(line, sizeof line, "# monotonic\t%d\n# lemma_bounds\t%d\n# asymptote\t%d\n",
                  d.monotonicity_pass ? 1 : 0, d.bounds_pass ? 1 : 0, d.asymptote_pass ? 1 : 0);
    tsv += line;
    tsv += "a\ty_c\thalf_width_log\n";
    for (const BoundarySample& b : d.boundary) {
        std::snprintf(line, sizeof line, "%.10g\t%.10g\t%.10g\n", b.a, b.y_c, b.half_width);
        tsv += line;
    }
    io_detail::write_file(out, tsv);
    std::cout << "phase: " << d.boundary.size() << " boundary points, monotonic="
              << (d.monotonicity_pass ? "yes" : "NO") << " -> " << out.string() << "\n";
    return 0;
}

int cmd_force(const fs::path& dir, double epsilon, const std::string& t_spec, const fs::path& out,
              int dim_flag) {
    const AnalysisSet s = load_analysis_set(dir, dim_flag);
    const CountTable& pos = require_table(s.positive, "positive", s.dim);
    const CountTable& pla = require_table(s.plane, "plane", s.dim - 1);
    const CountTable& ful = require_table(s.full, "full-lattice", s.dim);

    const TableSource pos_src(pos);
    const ModelCurves curves = build_model_curves(pos_src, ful, pla);
    std::vector<double> ts;
    for (double u : parse_grid_spec(t_spec).points()) ts.push_back(std::exp(u));
    const ForceCurve fc = force_curve(epsilon, ts, curves);

    char line[256];
    std::string tsv = "# critical force f_c(T), epsilon=" + io_detail::fmt_double(epsilon) +
                      ", d=" + std::to_string(s.dim) + "\n";
    std::snprintf(line, sizeof line, "# slope_at_low_T\t%.10g\t%.10g\n", fc.slope_at_low_T,
                  fc.slope_half_width);
    tsv += line;
    for (const auto& [T, why] : fc.skipped)
        tsv += "# skipped T=" + io_detail::fmt_double(T) + ": " + why + "\n";
    tsv += "T\ta\tf_c\thalf_width\n";
    for (const ForceSample& p : fc.samples) {
        std::snprintf(line, sizeof line, "%.10g\t%.10g\t%.10g\t%.10g\n", p.T, p.a, p.f_c,
                      p.half_width);
        tsv += line;
    }
    io_detail::write_file(out, tsv);
    std::cout << "force: " << fc.samples.size() << " samples, " << fc.skipped.size()
              << " skipped -> " << out.string() << "\n";
    return 0;
}

int cmd_check(const fs::path& dir) {
    int failures = 0;
    const auto report = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
        if (!ok) ++failures;
    };

    const std::vector<DirEntry> entries = scan_tables(dir);

    // 1. every payload parses with a matching checksum
    std::vector<std::pair<DirEntry, CountTable>> exacts;
    for (const DirEntry& e : entries) {
        const std::string name = e.path.filename().string();
        try {
            if (e.manifest.stochastic) {
                parse_estimate(e.path);
                report(true, "checksum+parse " + name);
            } else {
                exacts.emplace_back(e, parse_table(e.path));
                report(true, "checksum+parse " + name);
            }
        } catch (const Error& err) {
            report(false, "checksum+parse " + name + ": " + err.what());
        }
    }

    // 2. brute-force oracle agreement on a short prefix of every exact table
    for (const auto& [e, t] : exacts) {
        const int cap = t.dimension() <= 2 ? 8 : 6;
        const int n = std::min(t.n_max(), cap);
        const VerifyResult v = verify_oracle(t.dimension(), n, t.walk_class(), t);
        report(v.ok, "oracle n<=" + std::to_string(n) + " " + e.path.filename().string() +
                         (v.ok ? "" : ": " + v.first_mismatch));
    }

    // 3. exact inequality suite per dimension with a complete class set
    std::map<int, AnalysisTables> sets;
    for (const auto& [e, t] : exacts) {
        const int d = t.walk_class() == WalkClass::plane ? t.dimension() + 1 : t.dimension();
        AnalysisTables& tabs = sets[d];
        const auto slot = [&]() -> const CountTable** {
            switch (t.walk_class()) {
                case WalkClass::positive: return &tabs.positive;
                case WalkClass::positive_unfolded: return &tabs.unfolded;
                case WalkClass::plane: return &tabs.plane;
                case WalkClass::full_lattice: return &tabs.full;
            }
            return nullptr;
        }();
        if (!*slot || (*slot)->n_max() < t.n_max()) *slot = &t;
    }
    for (const auto& [d, tabs] : sets) {
        if (!tabs.positive || !tabs.unfolded || !tabs.plane) {
            std::cout << "[skip] inequalities d=" << d << " (incomplete class set)\n";
            continue;
        }
        const std::vector<double> us = log_grid(-1.0, 0.5, 2.0);
        std::vector<WeightPoint> grid = weights_along_a(us);
        for (const WeightPoint& w : weights_along_y(us)) grid.push_back(w);
        for (const InequalityReport& r : inequality_report(tabs, grid))
            if (!r.limit_level)
                report(r.pass, "inequality d=" + std::to_string(d) + " " + r.name);
    }

    // 4. determinism: double runs across worker counts, compared by checksum
    {
        EnumerateOptions w1, w4;
        w1.workers = 1;
        w4.workers = 4;
        const std::string a = table_payload(enumerate(2, 8, WalkClass::positive, w1));
        const std::string b = table_payload(enumerate(2, 8, WalkClass::positive, w4));
        report(checksum_string(a) == checksum_string(b),
               "determinism enumerate d=2 n=8 (1 vs 4 workers)");
        const std::string ma = estimate_payload(run_flatperm(2, 6, 2000, 1, {.workers = 1}));
        const std::string mb = estimate_payload(run_flatperm(2, 6, 2000, 1, {.workers = 4}));
        report(checksum_string(ma) == checksum_string(mb),
               "determinism mc d=2 n=6 (1 vs 4 workers)");
    }

    if (failures > 0) {
        json err;
        err["error"] = "check-failed";
        err["message"] = std::to_string(failures) + " check(s) failed in '" + dir.string() + "'";
        std::cerr << err.dump() << "\n";
        return 1;
    }
    std::cout << "all checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adsorbing pulled self-avoiding walks: exact enumeration, stochastic "
                 "estimation, and phase analysis"};
    app.require_subcommand(1);

    // enumerate
    auto* en = app.add_subcommand("enumerate", "exactly enumerate a walk class");
    int en_dim = 2, en_nmax = 10, en_workers = 0;
    std::string en_class = "positive", en_out, en_cache;
    bool en_no_cache = false;
    en->add_option("--dim", en_dim, "lattice dimension")->required();
    en->add_option("--nmax", en_nmax, "maximum walk length")->required();
    en->add_option("--class", en_class,
                   "positive | positive-unfolded | full-lattice | plane")
        ->required();
    en->add_option("--out", en_out, "output table path")->required();
    en->add_option("--cache-dir", en_cache, "cache directory for enumerated tables");
    en->add_flag("--no-cache", en_no_cache, "bypass the cache");
    en->add_option("--workers", en_workers, "worker threads (0 = auto)");

    // mc
    auto* mc = app.add_subcommand("mc", "flatPERM stochastic estimate of positive walks");
    int mc_dim = 2, mc_nmax = 10, mc_workers = 0;
    std::uint64_t mc_tours = 100000, mc_seed = 1;
    std::string mc_out;
    mc->add_option("--dim", mc_dim, "lattice dimension")->required();
    mc->add_option("--nmax", mc_nmax, "maximum walk length")->required();
    mc->add_option("--tours", mc_tours, "number of tours")->required();
    mc->add_option("--seed", mc_seed, "RNG seed")->required();
    mc->add_option("--out", mc_out, "output estimate path")->required();
    mc->add_option("--workers", mc_workers, "worker threads (0 = auto)");

    // thermo
    auto* th = app.add_subcommand("thermo", "free-energy and moment tables for one table");
    std::string th_table, th_a = "-1:0.5:3", th_y = "-1:0.5:3", th_out;
    th->add_option("--table", th_table, "serialized table path")->required();
    th->add_option("--a-grid", th_a, "log a grid, lo:step:hi");
    th->add_option("--y-grid", th_y, "log y grid, lo:step:hi");
    th->add_option("--out", th_out, "output TSV path")->required();

    // analyze
    auto* an = app.add_subcommand("analyze", "Legendre and inequality reports from a table dir");
    std::string an_dir, an_a = "-1:0.5:3", an_y = "-1:0.5:3", an_out;
    int an_dim = 0;
    an->add_option("--tables", an_dir, "directory of serialized tables")->required();
    an->add_option("--a-grid", an_a, "log a grid, lo:step:hi");
    an->add_option("--y-grid", an_y, "log y grid, lo:step:hi");
    an->add_option("--out", an_out, "output JSON path")->required();
    an->add_option("--dim", an_dim, "dimension (default: inferred)");

    // phase
    auto* ph = app.add_subcommand("phase", "phase boundary and critical points, plot-ready TSV");
    std::string ph_dir, ph_a = "1.4:0.1:3", ph_out;
    int ph_dim = 0;
    ph->add_option("--tables", ph_dir, "directory of serialized tables")->required();
    ph->add_option("--a-grid", ph_a, "log a grid, lo:step:hi");
    ph->add_option("--out", ph_out, "output TSV path")->required();
    ph->add_option("--dim", ph_dim, "dimension (default: inferred)");

    // force
    auto* fo = app.add_subcommand("force", "critical force-temperature curve");
    std::string fo_dir, fo_t = "-2.3:0.35:-0.2", fo_out;
    double fo_eps = -1.0;
    int fo_dim = 0;
    fo->add_option("--tables", fo_dir, "directory of serialized tables")->required();
    fo->add_option("--epsilon", fo_eps, "adsorption energy (negative = attractive)")->required();
    fo->add_option("--t-grid", fo_t, "log T grid, lo:step:hi");
    fo->add_option("--out", fo_out, "output TSV path")->required();
    fo->add_option("--dim", fo_dim, "dimension (default: inferred)");

    // check
    auto* ck = app.add_subcommand("check",
                                  "verify checksums, oracle counts, inequalities, determinism");
    std::string ck_dir;
    ck->add_option("--tables", ck_dir, "directory of serialized tables")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        nlohmann::ordered_json err;
        err["error"] = "usage";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        if (en->parsed())
            return cmd_enumerate(en_dim, en_nmax, en_class, en_out, en_cache, en_no_cache,
                                 en_workers);
        if (mc->parsed()) return cmd_mc(mc_dim, mc_nmax, mc_tours, mc_seed, mc_out, mc_workers);
        if (th->parsed()) return cmd_thermo(th_table, th_a, th_y, th_out);
        if (an->parsed()) return cmd_analyze(an_dir, an_a, an_y, an_out, an_dim);
        if (ph->parsed()) return cmd_phase(ph_dir, ph_a, ph_out, ph_dim);
        if (fo->parsed()) return cmd_force(fo_dir, fo_eps, fo_t, fo_out, fo_dim);
        if (ck->parsed()) return cmd_check(ck_dir);
    } catch (const sawpull::Error& e) {
        nlohmann::ordered_json err;
        err["error"] = e.code();
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = "internal";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
