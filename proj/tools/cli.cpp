#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "blowup/acceptance.hpp"
#include "blowup/bifurcation.hpp"
#include "blowup/bubble_analysis.hpp"
#include "blowup/errors.hpp"
#include "blowup/io.hpp"
#include "blowup/profiles.hpp"
#include "blowup/radial_solver.hpp"
#include "blowup/recurrence.hpp"
#include "blowup/spec_json.hpp"

namespace blowup::cli {

namespace fs = std::filesystem;

namespace {

/// Bad user input discovered after parsing (exit 2).
struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads {"jobs": 4, "diagram": {"points": 81}} style config files. Nested
/// objects address subcommands; "spec" may be given as an object.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError(fmt::format("config is not valid JSON: {}", e.what()));
        }
        if (!j.is_object())
            throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v)
    {
        if (v.is_string())
            return v.get<std::string>();
        return v.dump();
    }

    static void walk(const nlohmann::json& obj, const std::vector<std::string>& parents,
                     std::vector<CLI::ConfigItem>& items)
    {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object() && key != "spec") {
                auto next = parents;
                next.push_back(key);
                walk(value, next, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value)
                    item.inputs.push_back(scalar(v));
            } else if (value.is_object()) {
                item.inputs.push_back(value.dump());
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct Globals {
    unsigned jobs = 0;
    std::string out_dir = "out";
    std::string format = "both";
};

struct Output {
    const Globals& g;
    std::ostream& out;

    bool csv() const { return g.format != "json"; }
    bool json() const { return g.format != "csv"; }

    fs::path emit(const std::string& name, const std::string& content) const
    {
        const fs::path path = fs::path(g.out_dir) / name;
        write_text(path, content);
        return path;
    }
};

void write_or_stream(const std::string& path, const std::string& content, std::ostream& out)
{
    if (path == "-")
        out << content;
    else
        write_text(path, content);
}

Nonlinearity load_nonlinearity(const std::string& arg)
{
    try {
        return Nonlinearity(load_spec(arg));
    } catch (const Error& e) {
        throw ArgumentError(fmt::format("invalid --spec: {}", e.what()));
    }
}

void add_solver_options(CLI::App* sub, SolverOptions& opts)
{
    sub->add_option("--rel-tol", opts.rel_tol, "Relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--abs-tol", opts.abs_tol, "Absolute tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-steps", opts.max_steps, "Step budget")->capture_default_str()->check(CLI::Range(
        std::size_t{10000}, std::numeric_limits<std::size_t>::max()));
    sub->add_option("--s-offset", opts.s_start_offset, "Start at gamma_0 e^{-offset}")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--dense-samples", opts.dense_samples, "Uniform samples added to the output")
        ->capture_default_str();
}

Curve parse_curve(const std::string& token, const NonlinearitySpec& spec)
{
    const auto colon = token.find(':');
    if (colon == std::string::npos || colon == 0)
        throw ArgumentError(fmt::format("curve '{}' must look like U:<beta> or V:<L>", token));
    const std::string kind = token.substr(0, colon);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(token.substr(colon + 1), &used);
        if (used != token.size() - colon - 1)
            throw std::invalid_argument(token);
    } catch (const std::exception&) {
        throw ArgumentError(fmt::format("curve '{}' has a malformed number", token));
    }
    if (kind == "U") {
        if (!(value > 0.0))
            throw ArgumentError("U curves need beta > 0");
        return UBeta{value, spec.p};
    }
    if (kind == "V") {
        // Power of t in h at large t.
        double m = 0.0;
        if (const auto* pe = std::get_if<PowerExp>(&spec.variant))
            m = pe->m;
        else if (std::holds_alternative<H4>(spec.variant))
            m = 1.0 - 2.0 * spec.p;
        return VL{value, spec.p, m};
    }
    throw ArgumentError(fmt::format("unknown curve kind '{}' (U or V)", kind));
}

std::string recurrence_json(const RecurrenceTable& t)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows())
        rows.push_back({{"k", r.k},
                        {"delta", r.delta},
                        {"a", r.a},
                        {"d", std::isnan(r.d) ? nlohmann::json() : nlohmann::json(r.d)},
                        {"E", r.E},
                        {"delta_star", r.delta_star},
                        {"beta_star", r.beta_star}});
    return nlohmann::json{{"p", t.p()}, {"tol", t.tol()}, {"rows", rows}}.dump(2) + "\n";
}

std::string error_json(const std::string& code, const std::string& detail)
{
    return nlohmann::json{{"error", code}, {"detail", detail}}.dump() + "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Radial blow-up solutions of -u'' - u'/r = lambda h(u) e^{u^p}: recurrences, profiles, "
                 "shooting, bubble analysis and bifurcation diagrams."};
    app.name("blowup");
    app.fallthrough();
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (flags override it)");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Globals g;
    app.add_option("--jobs", g.jobs, "Worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "Artifact formats")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json", "both"}));

    // recurrence
    double rec_p = 3.0, rec_tol = 1e-10;
    int rec_k = 10;
    auto* rec = app.add_subcommand("recurrence", "Bubble recurrence table for p > 2");
    rec->add_option("--p", rec_p, "Exponent p > 2")->required()->check(
        [](const std::string& v) {
            double x = 0.0;
            return CLI::detail::lexical_cast(v, x) && x > 2.0 ? std::string() : std::string("p must exceed 2");
        });
    rec->add_option("--k", rec_k, "Rows 0..K")->required()->check(CLI::Range(1, 100000));
    rec->add_option("--tol", rec_tol, "Root tolerance")->capture_default_str()->check(CLI::Range(1e-300, 1e-6));

    // hat-recurrence
    int hat_k = 10;
    auto* hat = app.add_subcommand("hat-recurrence", "Limit sequences as p -> infinity");
    hat->add_option("--k", hat_k, "Rows 0..K")->required()->check(CLI::Range(1, 100000));

    // profile
    std::string prof_kind, prof_dump;
    double prof_a = 1.0;
    auto* prof = app.add_subcommand("profile", "Dump a Liouville profile");
    prof->add_option("--kind", prof_kind, "Profile")->required()->check(CLI::IsMember({"z0", "tilde0", "singular"}));
    prof->add_option("--a", prof_a, "Singular profile parameter in (0,2)")->capture_default_str()->check(
        CLI::Range(0.0, 2.0));
    prof->add_option("--dump", prof_dump, "CSV destination, - for stdout")->required();

    // shoot
    std::string spec_arg;
    double mu = 0.0;
    SolverOptions solver;
    auto* shoot = app.add_subcommand("shoot", "Solve the scaled problem to its first zero");
    shoot->add_option("--spec", spec_arg, "Nonlinearity JSON or path")->required();
    shoot->add_option("--mu", mu, "u(0)")->required()->check(CLI::PositiveNumber);
    add_solver_options(shoot, solver);

    // analyze
    std::vector<std::string> curve_tokens;
    double min_phi = 0.05;
    auto* analyze = app.add_subcommand("analyze", "Bubbles, oscillation and intersections of one solution");
    analyze->add_option("--spec", spec_arg, "Nonlinearity JSON or path")->required();
    analyze->add_option("--mu", mu, "u(0)")->required()->check(CLI::PositiveNumber);
    analyze->add_option("--curves", curve_tokens, "Comma list of U:<beta> and V:<L>")->delimiter(',');
    analyze->add_option("--min-phi", min_phi, "Bubble threshold on phi")->capture_default_str()->check(
        CLI::PositiveNumber);
    add_solver_options(analyze, solver);

    // singular
    auto* singular = app.add_subcommand("singular", "Singular solution of an H4 nonlinearity");
    singular->add_option("--spec", spec_arg, "Nonlinearity JSON or path")->required();
    add_solver_options(singular, solver);

    // diagram
    double mu_min = 0.0, mu_max = 0.0;
    int points = 0;
    DiagramOptions dopts;
    auto* diagram = app.add_subcommand("diagram", "Bifurcation diagram lambda(mu)");
    diagram->add_option("--spec", spec_arg, "Nonlinearity JSON or path")->required();
    diagram->add_option("--mu-min", mu_min, "Smallest mu")->required()->check(CLI::PositiveNumber);
    diagram->add_option("--mu-max", mu_max, "Largest mu")->required()->check(CLI::PositiveNumber);
    diagram->add_option("--points", points, "Uniform grid points")->required()->check(CLI::Range(2, 1000000));
    diagram->add_option("--refine-dx", dopts.refine_dx, "Crossing refinement spacing")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    diagram->add_option("--max-refine-shots", dopts.max_refine_shots, "Extra shots per crossing")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    diagram->add_option("--min-phi", dopts.min_phi, "Bubble threshold on phi")->capture_default_str();
    add_solver_options(diagram, dopts.solver);

    // verify
    bool no_determinism = false;
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_flag("--skip-determinism", no_determinism, "Skip the rerun comparison");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Output o{g, out};
    try {
        if (*rec) {
            const RecurrenceTable t = compute_recurrence(rec_p, rec_k, rec_tol);
            if (o.csv())
                o.emit("recurrence.csv", t.to_csv());
            if (o.json())
                o.emit("recurrence.json", recurrence_json(t));
            out << fmt::format("recurrence p={} K={}: delta_1={} a_1={} -> {}\n", rec_p, rec_k,
                               fmt_real(t.row(1).delta), fmt_real(t.row(1).a), g.out_dir);
        } else if (*hat) {
            const auto rows = compute_hat_recurrence(hat_k);
            if (o.csv())
                o.emit("hat_recurrence.csv", hat_table_csv(rows));
            if (o.json()) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& r : rows)
                    j.push_back({{"k", r.k}, {"c_hat", r.c_hat}, {"a_hat", r.a_hat}, {"beta_hat_star", r.beta_hat_star}});
                o.emit("hat_recurrence.json", j.dump(2) + "\n");
            }
            out << fmt::format("hat recurrence K={}: c_hat_1={} a_hat_1={} -> {}\n", hat_k, fmt_real(rows[1].c_hat),
                               fmt_real(rows[1].a_hat), g.out_dir);
        } else if (*prof) {
            Profile profile = Regular0{};
            if (prof_kind == "tilde0")
                profile = Tilde0{};
            else if (prof_kind == "singular")
                profile = singular_profile(prof_a);
            write_or_stream(prof_dump, profile_csv(profile), out);
            (prof_dump == "-" ? err : out) << fmt::format("profile {}: mass {} -> {}\n", prof_kind,
                                                          fmt_real(profile_mass_exact(profile)), prof_dump);
        } else if (*shoot) {
            const Nonlinearity nl = load_nonlinearity(spec_arg);
            const ShotResult shot = shoot_first_zero(nl, mu, solver);
            if (o.csv())
                o.emit("solution.csv", shot.solution.to_csv());
            if (o.json()) {
                nlohmann::json j{{"spec", nlohmann::json::parse(spec_to_json(nl.spec()))},
                                 {"mu", shot.mu},
                                 {"lambda", shot.lambda},
                                 {"lambda_error", shot.lambda_error},
                                 {"s_bar", shot.s_bar},
                                 {"steps", shot.solution.steps()},
                                 {"samples", shot.solution.samples().size()},
                                 {"termination", to_string(shot.solution.termination())}};
                o.emit("shot.json", j.dump(2) + "\n");
            }
            out << fmt::format("shoot mu={}: lambda={} (+-{:.2g}), s_bar={} -> {}\n", mu, fmt_real(shot.lambda),
                               shot.lambda_error, fmt_real(shot.s_bar), g.out_dir);
        } else if (*analyze) {
            const Nonlinearity nl = load_nonlinearity(spec_arg);
            std::vector<Curve> curves;
            for (const auto& tok : curve_tokens)
                curves.push_back(parse_curve(tok, nl.spec()));
            const ShotResult shot = shoot_first_zero(nl, mu, solver);
            std::shared_ptr<const RecurrenceTable> table;
            if (nl.p() > 2.0)
                table = cached_recurrence(nl.p());
            AnalysisReport rep;
            rep.mu = mu;
            rep.lambda = shot.lambda;
            rep.p = nl.p();
            rep.bubbles = detect_bubbles(shot.solution, table.get(), min_phi);
            rep.oscillation = oscillation_report(shot.solution, rep.bubbles, table.get());
            for (const auto& c : curves)
                rep.intersections.push_back(count_intersections(shot.solution, c, shot.solution.s_start(),
                                                                shot.solution.s_end(), Frame::Disc));
            if (o.json())
                o.emit("analysis.json", analysis_json(rep));
            if (o.csv()) {
                o.emit("solution.csv", shot.solution.to_csv());
                o.emit("phi_psi.csv", phi_psi_csv(compute_phi_psi(shot.solution)));
            }
            std::string zs;
            for (const auto& i : rep.intersections)
                zs += fmt::format(" Z[{}]={}", i.curve, i.Z());
            out << fmt::format("analyze mu={}: {} bubble(s), phi_0={:.6g}, top_beta_0={:.6g}{} -> {}\n", mu,
                               rep.bubbles.size(), rep.bubbles.front().phi, rep.oscillation.front().top_beta.value,
                               zs, g.out_dir);
        } else if (*singular) {
            const Nonlinearity nl = load_nonlinearity(spec_arg);
            if (!nl.is_h4())
                throw ArgumentError("singular needs an H4 spec");
            const SingularSolution sg = build_singular_solution(nl, solver);
            if (o.csv())
                o.emit("singular.csv", sg.to_csv());
            if (o.json()) {
                nlohmann::json j{{"R_bar_star", sg.R_bar_star()},
                                 {"lambda_star", sg.lambda_star()},
                                 {"s_join", sg.s_join()},
                                 {"tau0", sg.tau0()}};
                o.emit("singular.json", j.dump(2) + "\n");
            }
            out << fmt::format("singular: R_bar*={} lambda*={} -> {}\n", fmt_real(sg.R_bar_star()),
                               fmt_real(sg.lambda_star()), g.out_dir);
        } else if (*diagram) {
            if (!(mu_max > mu_min))
                throw ArgumentError("--mu-max must exceed --mu-min");
            const Nonlinearity nl = load_nonlinearity(spec_arg);
            std::vector<double> grid;
            for (int i = 0; i < points; ++i)
                grid.push_back(mu_min + (mu_max - mu_min) * i / (points - 1));
            dopts.jobs = g.jobs;
            std::optional<SingularSolution> sg;
            if (nl.is_h4())
                sg.emplace(build_singular_solution(nl, dopts.solver));
            const Diagram d = trace_diagram(nl, grid, dopts, sg ? &*sg : nullptr);
            const CrossingReport cr = d.lambda_star ? count_lambda_crossings(d) : CrossingReport{};
            const KaplanReport kap = kaplan_check(nl, d);
            if (o.csv())
                o.emit("diagram.csv", diagram_csv(d));
            if (o.json())
                o.emit("diagram.json", diagram_json(d, cr, kap));
            const auto failed = std::count_if(d.rows.begin(), d.rows.end(), [](const auto& r) { return !r.ok(); });
            out << fmt::format("diagram: {} rows ({} failed), max lambda {}, {} crossing(s) of lambda* -> {}\n",
                               d.rows.size(), failed, fmt_real(kap.max_lambda), cr.count, g.out_dir);
        } else if (*verify) {
            AcceptanceOptions aopts;
            aopts.out_dir = fs::path(g.out_dir) / "verify";
            aopts.jobs = g.jobs;
            aopts.check_determinism = !no_determinism;
            const auto results = run_acceptance(aopts);
            out << format_results(results);
            const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
            return all ? 0 : 1;
        }
    } catch (const ArgumentError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        out << error_json(std::string(to_string(e.code())), e.what());
        return 1;
    } catch (const std::exception& e) {
        out << error_json("internal_error", e.what());
        return 1;
    }
    return 0;
}

} // namespace blowup::cli
