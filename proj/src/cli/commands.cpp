#include "rician/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "rician/channel.hpp"
#include "rician/constraints.hpp"
#include "rician/density.hpp"
#include "rician/error.hpp"
#include "rician/io.hpp"
#include "rician/mc.hpp"
#include "rician/parallel.hpp"

namespace rician::cli {

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError(std::string("malformed value '") + item + "' in " + what);
        }
    }
    if (out.empty())
        throw DomainError(std::string(what) + " is empty");
    return out;
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DomainError("config key '" + key + "' has the wrong type");
    }
}

std::vector<double> number_or_list(const nlohmann::json& j, const std::string& key) {
    if (j.is_number())
        return {j.get<double>()};
    if (j.is_string())
        return key == "snr_grid" ? parse_grid(j.get<std::string>())
                                 : parse_list(j.get<std::string>(), key.c_str());
    return get_as<std::vector<double>>(j, key);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object())
        throw DomainError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw DomainError("unknown config key '" + key + "' in " + where);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        return parse_list(text, "--snr-grid");
    const std::string kind = text.substr(0, colon);
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(item);
    if ((kind != "log" && kind != "lin") || parts.size() != 3)
        throw DomainError("--snr-grid must be a comma list, log:a:b:n or lin:a:b:n");
    const std::vector<double> ab = parse_list(parts[0] + "," + parts[1], "--snr-grid");
    const double count = parse_list(parts[2], "--snr-grid")[0];
    if (!(count >= 1.0) || count != std::floor(count))
        throw DomainError("--snr-grid point count must be a positive integer");
    const int n = static_cast<int>(count);
    const double a = ab[0], b = ab[1];
    if (kind == "log" && !(a > 0.0 && b > 0.0))
        throw DomainError("log grids need positive end points");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out.push_back(kind == "log" ? std::pow(10.0, std::log10(a) + t * (std::log10(b) - std::log10(a)))
                                    : a + t * (b - a));
    }
    return out;
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
    check_keys(j,
               {"model", "constraint", "K", "snr", "snr_grid", "kappa", "seed", "out", "format",
                "kt_tol", "warm_start", "bits", "dist", "samples", "quadrature", "solver"},
               "config");
    for (const auto& [key, v] : j.items()) {
        if (key == "model") cfg.model = get_as<std::string>(v, key);
        else if (key == "constraint") cfg.constraint = get_as<std::string>(v, key);
        else if (key == "K") cfg.rician_k = get_as<double>(v, key);
        else if (key == "snr") cfg.snr = get_as<double>(v, key);
        else if (key == "snr_grid") cfg.snr_grid = number_or_list(v, key);
        else if (key == "kappa") cfg.kappa = number_or_list(v, key);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, key);
        else if (key == "out") cfg.out = get_as<std::string>(v, key);
        else if (key == "format") cfg.format = get_as<std::string>(v, key);
        else if (key == "kt_tol") cfg.kt_tol = get_as<double>(v, key);
        else if (key == "warm_start") cfg.warm_start = get_as<bool>(v, key);
        else if (key == "bits") cfg.bits = get_as<bool>(v, key);
        else if (key == "dist") cfg.dist = get_as<std::string>(v, key);
        else if (key == "samples") cfg.samples = get_as<std::int64_t>(v, key);
        else if (key == "quadrature") {
            check_keys(v, {"r_tail_mass_tol", "panel_rel_tol", "max_panels"}, "quadrature");
            for (const auto& [k, w] : v.items()) {
                if (k == "r_tail_mass_tol") cfg.quadrature.r_tail_mass_tol = get_as<double>(w, k);
                else if (k == "panel_rel_tol") cfg.quadrature.panel_rel_tol = get_as<double>(w, k);
                else cfg.quadrature.max_panels = get_as<int>(w, k);
            }
        } else if (key == "solver") {
            check_keys(v, {"max_points", "restarts", "prob_opt_tol", "loc_opt_tol", "max_outer_iters"},
                       "solver");
            for (const auto& [k, w] : v.items()) {
                if (k == "max_points") cfg.solver.max_points = get_as<int>(w, k);
                else if (k == "restarts") cfg.solver.restarts = get_as<int>(w, k);
                else if (k == "prob_opt_tol") cfg.solver.prob_opt_tol = get_as<double>(w, k);
                else if (k == "loc_opt_tol") cfg.solver.loc_opt_tol = get_as<double>(w, k);
                else cfg.solver.max_outer_iters = get_as<int>(w, k);
            }
        }
    }
}

void RunConfig::validate(const std::string& command) const {
    parse_channel_model(model);
    if (!std::isfinite(rician_k) || rician_k < 0.0)
        throw DomainError("--K must be finite and nonnegative");
    quadrature.validate();
    solver.validate();
    if (!(kt_tol > 0.0))
        throw DomainError("--kt-tol must be positive");
    const std::string fmt = format.empty() ? (command == "sweep" ? "csv" : "json") : format;
    if (fmt != "csv" && fmt != "json")
        throw DomainError("--format must be csv or json");
    if ((command == "kt-check" || command == "mc-check") && fmt != "json")
        throw DomainError(command + " only writes json");
    if (command == "mc-check") {
        if (samples < kMCMinSamples)
            throw DomainError("--samples must be at least 10000");
    } else {
        const bool m4 = constraint == "moment4";
        if (command == "sweep") {
            if (snr_grid.empty())
                throw DomainError("sweep needs --snr-grid");
            for (std::size_t i = 0; i < snr_grid.size(); ++i) {
                if (!std::isfinite(snr_grid[i]) || !(snr_grid[i] > 0.0))
                    throw DomainError("SNR grid values must be positive");
                if (i > 0 && !(snr_grid[i] > snr_grid[i - 1]))
                    throw DomainError("SNR grid must be strictly increasing");
            }
            if (m4 && kappa.empty())
                throw DomainError("moment4 needs --kappa");
        } else {
            if (!snr)
                throw DomainError(command + " needs --snr");
            if (m4 && kappa.size() != 1)
                throw DomainError("moment4 needs exactly one --kappa value");
            make_constraint(constraint, *snr, m4 ? std::optional(kappa[0]) : std::nullopt);
        }
        if (!m4 && !kappa.empty())
            throw DomainError("--kappa only applies to the moment4 constraint");
        for (double k : kappa)
            make_constraint("moment4", 1.0, k);
        make_constraint(constraint, 1.0, m4 ? std::optional(kappa.empty() ? 2.0 : kappa[0]) : std::nullopt);
    }
    if ((command == "kt-check" || command == "mc-check") && dist.empty())
        throw DomainError(command + " needs --dist");
}

namespace {

struct Context {
    std::string command;
    RunConfig cfg;
    std::ostream& out;
    std::ostream& err;

    std::string format() const {
        return cfg.format.empty() ? (command == "sweep" ? "csv" : "json") : cfg.format;
    }
    ChannelSpec channel() const { return {parse_channel_model(cfg.model), cfg.rician_k}; }
    SolverConfig solver() const {
        SolverConfig s = cfg.solver;
        s.seed = cfg.seed;
        s.verify.kt_tol = cfg.kt_tol;
        return s;
    }
    ConstraintSet constraints(double alpha, std::optional<double> kappa) const {
        return make_constraint(cfg.constraint, alpha, kappa);
    }
    /// Where the human-readable summary goes.
    std::ostream& summary() const { return cfg.out.empty() ? err : out; }
};

/// Machine-readable sink: --out file or the primary stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_)
                throw DomainError("cannot write '" + path + "'");
        }
        stream_ = file_ ? file_.get() : &fallback;
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

double presented(double nats, bool bits) { return bits ? nats / std::log(2.0) : nats; }

void print_solution(std::ostream& os, const Solution& sol, const Context& ctx) {
    const char* unit = ctx.cfg.bits ? "bits" : "nats";
    os << "capacity: " << io::format_number(presented(sol.capacity_nats, ctx.cfg.bits), 10) << ' '
       << unit << (sol.converged ? " (certified)" : " (NOT certified)") << '\n';
    os << "mass points: " << sol.distribution.size() << '\n';
    for (const MassPoint& mp : sol.distribution.points())
        os << "  r = " << io::format_number(mp.location, 10)
           << "  p = " << io::format_number(mp.probability, 10) << '\n';
    os << "multipliers: lambda1 = " << io::format_number(sol.report.lambda1, 8)
       << ", lambda2 = " << io::format_number(sol.report.lambda2, 8) << '\n';
    os << "KT grid minimum: " << io::format_number(sol.report.grid_min, 6)
       << " at r = " << io::format_number(sol.report.argmin_r, 6) << " (tolerance "
       << io::format_number(sol.report.tolerance, 3) << ")\n";
}

nlohmann::ordered_json problem_json(const Context& ctx, const ConstraintSet& cs) {
    nlohmann::ordered_json j;
    j["model"] = ctx.cfg.model;
    j["constraint"] = std::string(cs.name());
    j["rician_k"] = ctx.cfg.rician_k;
    j["snr_alpha"] = cs.alpha();
    j["kappa"] = cs.kappa() ? nlohmann::ordered_json(*cs.kappa()) : nlohmann::ordered_json(nullptr);
    return j;
}

int cmd_solve(const Context& ctx) {
    const ChannelSpec ch = ctx.channel();
    const ConstraintSet cs = ctx.constraints(
        *ctx.cfg.snr, ctx.cfg.kappa.empty() ? std::nullopt : std::optional(ctx.cfg.kappa[0]));
    const Solution sol = solve_capacity(ch, cs, ctx.solver(), ctx.cfg.quadrature);

    Sink sink(ctx.cfg.out, ctx.out);
    if (ctx.format() == "csv") {
        io::write_csv_preamble(*sink);
        *sink << io::to_csv_row(io::make_record(sol, ch, cs)) << '\n';
    } else {
        nlohmann::ordered_json j;
        j["schema"] = io::kSolutionSchema;
        j.update(problem_json(ctx, cs));
        j["capacity_nats"] = sol.capacity_nats;
        if (ctx.cfg.bits)
            j["capacity_bits"] = presented(sol.capacity_nats, true);
        j["converged"] = sol.converged;
        j["n_points_tried"] = sol.n_points_tried;
        j["distribution"] = io::to_json(sol.distribution);
        j["report"] = io::to_json(sol.report);
        *sink << j.dump(2) << '\n';
    }
    print_solution(ctx.summary(), sol, ctx);
    return sol.converged ? kSuccess : kNotConverged;
}

int cmd_sweep(const Context& ctx) {
    const ChannelSpec ch = ctx.channel();
    const SolverConfig solver = ctx.solver();
    std::vector<std::optional<double>> kappas;
    if (ctx.cfg.constraint == "moment4")
        for (double k : ctx.cfg.kappa)
            kappas.emplace_back(k);
    else
        kappas.emplace_back(std::nullopt);
    const std::vector<double>& grid = ctx.cfg.snr_grid;
    const bool csv = ctx.format() == "csv";

    Sink sink(ctx.cfg.out, ctx.out);
    if (csv) {
        io::write_csv_preamble(*sink);
        (*sink).flush();
    }
    std::vector<io::SweepRecord> records;
    bool all_converged = true;
    int status = kSuccess;
    const auto emit = [&](const io::SweepRecord& r) {
        all_converged = all_converged && r.converged;
        records.push_back(r);
        if (csv) {
            *sink << io::to_csv_row(r) << '\n';
            (*sink).flush();
        }
        ctx.summary() << "alpha = " << io::format_number(r.snr_alpha, 6)
                      << (r.kappa ? " kappa = " + io::format_number(*r.kappa, 6) : std::string())
                      << ": C = " << io::format_number(presented(r.capacity_nats, ctx.cfg.bits), 8)
                      << (ctx.cfg.bits ? " bits" : " nats") << ", " << r.n_points << " points"
                      << (r.converged ? "" : " (NOT certified)") << '\n';
    };
    try {
        for (const std::optional<double>& kappa : kappas) {
            if (ctx.cfg.warm_start) {
                std::optional<AmplitudeDistribution> warm;
                for (double alpha : grid) {
                    const ConstraintSet cs = ctx.constraints(alpha, kappa);
                    const Solution sol = solve_capacity(ch, cs, solver, ctx.cfg.quadrature, warm);
                    warm = sol.distribution;
                    emit(io::make_record(sol, ch, cs));
                }
            } else {
                std::vector<std::optional<io::SweepRecord>> rows(grid.size());
                parallel_for(grid.size(), [&](std::size_t i) {
                    const ConstraintSet cs = ctx.constraints(grid[i], kappa);
                    rows[i] = io::make_record(solve_capacity(ch, cs, solver, ctx.cfg.quadrature), ch, cs);
                });
                for (const auto& r : rows)
                    emit(*r);
            }
        }
    } catch (const NumericalFailure& e) {
        ctx.err << "error: " << e.what() << " (partial output kept)\n";
        status = kNotConverged;
    }
    if (!csv)
        *sink << io::sweep_to_json(records).dump(2) << '\n';
    if (status == kSuccess && !all_converged)
        status = kNotConverged;
    return status;
}

int cmd_kt_check(const Context& ctx) {
    const ChannelSpec ch = ctx.channel();
    const ConstraintSet cs = ctx.constraints(
        *ctx.cfg.snr, ctx.cfg.kappa.empty() ? std::nullopt : std::optional(ctx.cfg.kappa[0]));
    const AmplitudeDistribution F = io::parse_distribution(io::read_file(ctx.cfg.dist));
    const double mi = mutual_information(F, ch, ctx.cfg.quadrature);
    VerifyOptions opts = ctx.solver().verify;
    opts.keep_curve = true;
    const KTReport rep = verify(F, ch, cs, mi, ctx.cfg.quadrature, opts);

    Sink sink(ctx.cfg.out, ctx.out);
    nlohmann::ordered_json j;
    j["schema"] = io::kKTSchema;
    j.update(problem_json(ctx, cs));
    j["distribution"] = io::to_json(F);
    j["mutual_information_nats"] = mi;
    j["report"] = io::to_json(rep);
    *sink << j.dump(2) << '\n';

    std::ostream& os = ctx.summary();
    os << "mutual information: " << io::format_number(presented(mi, ctx.cfg.bits), 10)
       << (ctx.cfg.bits ? " bits" : " nats") << '\n'
       << "multipliers: lambda1 = " << io::format_number(rep.lambda1, 8)
       << ", lambda2 = " << io::format_number(rep.lambda2, 8) << '\n'
       << "KT grid minimum: " << io::format_number(rep.grid_min, 6) << " at r = "
       << io::format_number(rep.argmin_r, 6) << '\n'
       << "feasible: " << (rep.feasible ? "yes" : "no") << '\n'
       << "certificate: " << (rep.pass ? "PASS" : "FAIL") << '\n';
    return rep.pass ? kSuccess : kNotConverged;
}

int cmd_mc_check(const Context& ctx) {
    const ChannelSpec ch = ctx.channel();
    const AmplitudeDistribution F = io::parse_distribution(io::read_file(ctx.cfg.dist));
    const double quad = mutual_information(F, ch, ctx.cfg.quadrature);
    const MCEstimate mc = mc_mutual_information(F, ch, ctx.cfg.samples, ctx.cfg.seed);
    const double delta = mc.value - quad;
    const bool agree = std::abs(delta) <= 3.0 * mc.std_err;

    Sink sink(ctx.cfg.out, ctx.out);
    nlohmann::ordered_json j;
    j["schema"] = io::kMCSchema;
    j["model"] = ctx.cfg.model;
    j["rician_k"] = ctx.cfg.rician_k;
    j["distribution"] = io::to_json(F);
    j["quadrature_nats"] = quad;
    j["mc_nats"] = mc.value;
    j["std_err"] = mc.std_err;
    j["n_samples"] = mc.n_samples;
    j["seed"] = mc.seed;
    j["delta"] = delta;
    j["agree"] = agree;
    *sink << j.dump(2) << '\n';

    ctx.summary() << "quadrature: " << io::format_number(quad, 10) << " nats\n"
                  << "monte carlo: " << io::format_number(mc.value, 10) << " +- "
                  << io::format_number(mc.std_err, 3) << " nats (" << mc.n_samples
                  << " samples)\n"
                  << (agree ? "agree" : "DISAGREE") << " within 3 standard errors\n";
    return agree ? kSuccess : kNotConverged;
}

/// Flag values as parsed; only flags actually given override the config.
struct Flags {
    std::string config, model, constraint, snr_grid, kappa, out, format, dist;
    double K = 0.0, snr = 0.0, kt_tol = 0.0;
    std::uint64_t seed = 0;
    std::int64_t samples = 0;
    bool no_warm_start = false, bits = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON file with any of the settings below");
    sub->add_option("--model", f.model, "rician | rician-pn");
    sub->add_option("--constraint", f.constraint, "moment4 | peak | avg-power");
    sub->add_option("--K", f.K, "Rician factor K >= 0");
    sub->add_option("--snr", f.snr, "normalized SNR alpha > 0");
    sub->add_option("--snr-grid", f.snr_grid, "a,b,c | log:a:b:n | lin:a:b:n");
    sub->add_option("--kappa", f.kappa, "kurtosis bound(s) > 1, comma separated for sweeps");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--out", f.out, "output file (default: standard output)");
    sub->add_option("--format", f.format, "csv | json");
    sub->add_option("--kt-tol", f.kt_tol, "certificate tolerance in nats (default 1e-3)");
    sub->add_flag("--no-warm-start", f.no_warm_start, "solve sweep points independently");
    sub->add_flag("--bits", f.bits, "report capacities in bits");
    sub->add_option("--dist", f.dist, "distribution file: 'location probability' per line");
    sub->add_option("--samples", f.samples, "Monte Carlo sample count (default 1e6)");
}

RunConfig build_config(const CLI::App* sub, const Flags& f) {
    RunConfig cfg;
    if (sub->count("--config")) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(io::read_file(f.config));
        } catch (const nlohmann::json::parse_error& e) {
            throw DomainError(std::string("config is not valid JSON: ") + e.what());
        }
        apply_json(cfg, j);
    }
    const auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--model")) cfg.model = f.model;
    if (given("--constraint")) cfg.constraint = f.constraint;
    if (given("--K")) cfg.rician_k = f.K;
    if (given("--snr")) cfg.snr = f.snr;
    if (given("--snr-grid")) cfg.snr_grid = parse_grid(f.snr_grid);
    if (given("--kappa")) cfg.kappa = parse_list(f.kappa, "--kappa");
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--out")) cfg.out = f.out;
    if (given("--format")) cfg.format = f.format;
    if (given("--kt-tol")) cfg.kt_tol = f.kt_tol;
    if (given("--no-warm-start")) cfg.warm_start = false;
    if (given("--bits")) cfg.bits = true;
    if (given("--dist")) cfg.dist = f.dist;
    if (given("--samples")) cfg.samples = f.samples;
    return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacity of noncoherent Rician fading channels", "rician-capacity"};
    app.require_subcommand(1);
    Flags flags;
    const std::pair<const char*, const char*> commands[] = {
        {"solve", "capacity and optimal input for one SNR"},
        {"sweep", "capacity over an SNR grid (CSV or JSON records)"},
        {"kt-check", "certify a distribution file with the optimality condition"},
        {"mc-check", "compare quadrature and Monte Carlo mutual information"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_flags(sub, flags);
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForAllHelp*>(&e) ? app.help("", CLI::AppFormatMode::All)
                                                                  : app.help());
            for (CLI::App* sub : subs)
                if (sub->parsed())
                    out << sub->help();
            return kSuccess;
        }
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }

    CLI::App* chosen = nullptr;
    for (CLI::App* sub : subs)
        if (sub->parsed())
            chosen = sub;
    const std::string command = chosen->get_name();
    try {
        Context ctx{command, build_config(chosen, flags), out, err};
        ctx.cfg.validate(command);
        if (command == "solve") return cmd_solve(ctx);
        if (command == "sweep") return cmd_sweep(ctx);
        if (command == "kt-check") return cmd_kt_check(ctx);
        return cmd_mc_check(ctx);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const InfeasibleError& e) {
        err << "error: infeasible (" << e.constraint() << "): " << e.what() << '\n';
        return kInvalidInput;
    } catch (const NumericalFailure& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    }
}

}  // namespace rician::cli
