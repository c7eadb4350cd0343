#include "pathcov/cli.hpp"

#include "pathcov/alpha.hpp"
#include "pathcov/automaton.hpp"
#include "pathcov/error.hpp"
#include "pathcov/explorer.hpp"
#include "pathcov/lp.hpp"
#include "pathcov/paths.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace pathcov {

namespace {

struct RunConfig {
    std::string model;
    std::optional<std::size_t> length_bound;
    std::string seed = std::to_string(RngHandle::default_seed);
    std::string format;
    std::string out_path;

    // alpha / solve
    std::string mode = "exact";
    std::size_t m_factor = 10;
    std::size_t r = 0;
    std::string alpha_path;
    std::optional<double> floor;
    std::string mps_path;

    // explore
    std::vector<std::string> strategies;
    std::vector<double> thresholds;
    std::size_t trials = 100;
    std::optional<std::size_t> cap;
    std::size_t workers = 1;
    std::string timings_path;

    // sample
    std::size_t count = 1;
    std::string visiting;
    bool labels_only = false;

    // gen
    std::size_t gen_states = 0;
    std::size_t gen_alphabet = 2;
    double gen_density = 0.5;
};

std::uint64_t resolve_seed(const std::string& text)
{
    if (text == "random") {
        std::random_device dev;
        return (std::uint64_t{dev()} << 32) ^ dev();
    }
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::usage, "--seed expects an unsigned integer or 'random'");
    return seed;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw Error(ErrorCode::io, "cannot write '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string shortest(double v)
{
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

Automaton load_model(const RunConfig& cfg)
{
    if (cfg.model.empty())
        throw Error(ErrorCode::usage, "--model is required");
    return load_automaton(cfg.model);
}

std::size_t bound_for(const RunConfig& cfg, const Automaton& a)
{
    const auto bound = cfg.length_bound.value_or(default_length_bound(a));
    if (bound == 0)
        throw Error(ErrorCode::usage, "--length-bound must be at least 1");
    return bound;
}

AlphaMatrix compute_alpha(const RunConfig& cfg, const Automaton& a, std::ostream& err)
{
    const auto bound = bound_for(cfg, a);
    if (cfg.mode == "exact")
        return alpha_exact(a, bound);
    if (cfg.mode != "approx")
        throw Error(ErrorCode::usage, "--mode expects exact or approx");
    RngHandle rng(resolve_seed(cfg.seed));
    auto alpha = alpha_approx(a, bound, cfg.m_factor * a.num_states(), cfg.r, rng);
    for (auto j : alpha.refined_columns)
        err << "refined column " << a.state_name(j) << " (m_j=" << alpha.counts->per_state[j] << " <= r=" << cfg.r
            << ") from " << cfg.r << " conditioned paths\n";
    return alpha;
}

// ---------------------------------------------------------------------------

void cmd_count(const RunConfig& cfg, std::ostream& out)
{
    const auto a = load_model(cfg);
    const auto table = num_paths(a, bound_for(cfg, a));
    if (cfg.format == "json") {
        nlohmann::json doc;
        doc["bound"] = table.bound();
        doc["per_length"] = nlohmann::json::array();
        for (std::size_t len = 1; len <= table.bound(); ++len)
            doc["per_length"].push_back(table.total(len).get_str());
        doc["total"] = table.grand_total().get_str();
        out << doc.dump(2) << '\n';
        return;
    }
    for (std::size_t len = 1; len <= table.bound(); ++len)
        out << len << ':' << table.total(len).get_str() << ' ';
    out << "total:" << table.grand_total().get_str() << '\n';
}

void cmd_alpha(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto a = load_model(cfg);
    const auto alpha = compute_alpha(cfg, a, err);
    if (cfg.format == "json")
        out << alpha_to_json(alpha);
    else
        out << alpha_to_csv(alpha);
}

void cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    AlphaMatrix alpha;
    if (!cfg.alpha_path.empty()) {
        const auto text = read_file(cfg.alpha_path);
        const auto first = text.find_first_not_of(" \t\r\n");
        alpha = first != std::string::npos && text[first] == '{' ? alpha_from_json(text) : alpha_from_csv(text);
    } else {
        const auto a = load_model(cfg);
        alpha = compute_alpha(cfg, a, err);
    }
    const auto lp = build_lp(alpha, cfg.floor);
    if (!cfg.mps_path.empty()) {
        std::ofstream mps(cfg.mps_path, std::ios::binary);
        if (!mps)
            throw Error(ErrorCode::io, "cannot write '" + cfg.mps_path + "'");
        mps << lp_to_mps(lp);
    }
    const auto dist = solve_lp(lp);
    const auto check = verify_solution(alpha, dist, cfg.floor);
    if (cfg.format == "json") {
        out << distribution_to_json(dist, check, alpha.state_names);
        return;
    }
    out << "p_min " << shortest(dist.p_min) << '\n';
    for (std::size_t i = 0; i < dist.pi.size(); ++i)
        out << "pi " << (i < alpha.state_names.size() ? alpha.state_names[i] : std::to_string(i)) << ' '
            << shortest(dist.pi[i]) << '\n';
    out << "feasible " << (check.feasible ? "yes" : "no") << '\n';
    out << "optimal " << (check.optimal ? "yes" : "no") << " (" << check.note << ")\n";
}

void cmd_explore(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto a = load_model(cfg);
    if (cfg.strategies.empty())
        throw Error(ErrorCode::usage, "at least one --strategy is required");
    std::vector<StrategySpec> specs;
    for (const auto& s : cfg.strategies)
        specs.push_back(parse_strategy(s));
    auto thresholds = cfg.thresholds;
    if (thresholds.empty())
        thresholds = {50, 90, 95, 99, 100};

    ExperimentOptions options;
    options.model_name = cfg.model;
    options.bound = cfg.length_bound;
    options.cap = cfg.cap;
    options.workers = cfg.workers;
    const auto report = run_experiment(a, specs, thresholds, cfg.trials, resolve_seed(cfg.seed), options);

    if (cfg.format == "json")
        out << report_to_json(report);
    else
        out << report_to_csv(report);

    std::ostringstream timings;
    for (const auto& sr : report.strategies) {
        timings << "timing " << sr.spec.label() << " preprocessing_s=" << sr.preprocessing_seconds
                << " trials_s=" << sr.trial_seconds << '\n';
        for (const auto& w : sr.warnings)
            err << "warning " << sr.spec.label() << ": " << w << '\n';
    }
    if (cfg.timings_path.empty()) {
        err << timings.str();
    } else {
        std::ofstream t(cfg.timings_path, std::ios::binary);
        if (!t)
            throw Error(ErrorCode::io, "cannot write '" + cfg.timings_path + "'");
        t << report_to_json(report, true);
    }
}

void cmd_sample(const RunConfig& cfg, std::ostream& out)
{
    const auto a = load_model(cfg);
    const auto bound = bound_for(cfg, a);
    RngHandle rng(resolve_seed(cfg.seed));
    std::vector<Path> paths;
    if (cfg.visiting.empty()) {
        paths = sample_uniform(a, num_paths(a, bound), cfg.count, rng);
    } else {
        const auto q = a.find_state(cfg.visiting);
        if (!q)
            throw Error(ErrorCode::undeclared_state, "unknown state '" + cfg.visiting + "'");
        paths = sample_visiting(a, *q, bound, cfg.count, rng);
    }
    for (const auto& p : paths)
        out << (cfg.labels_only ? format_word(a, p) : format_path(a, p)) << '\n';
}

void cmd_gen(const RunConfig& cfg, std::ostream& out)
{
    RngHandle rng(resolve_seed(cfg.seed));
    const auto a = random_trim_automaton(cfg.gen_states, cfg.gen_alphabet, cfg.gen_density, rng);
    out << serialize_automaton(a);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Biased random path generation for state coverage of finite automata", "pathcov"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "Model file")->required();
        sub->add_option("--length-bound", cfg.length_bound, "Path length bound N (default 2 x eccentricity)");
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "Seed (integer or 'random')")->capture_default_str();
    };
    auto add_out = [&](CLI::App* sub, std::vector<std::string> formats) {
        sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(formats));
        sub->add_option("--out", cfg.out_path, "Output file (default stdout)");
    };
    auto add_alpha_mode = [&](CLI::App* sub) {
        sub->add_option("--mode", cfg.mode, "exact or approx")->check(CLI::IsMember({"exact", "approx"}));
        sub->add_option("--m-factor", cfg.m_factor, "Approx: samples = factor x states")->check(CLI::PositiveNumber);
        sub->add_option("--r", cfg.r, "Approx: refinement threshold");
    };

    auto* count = app.add_subcommand("count", "Count bounded successful paths");
    add_model(count);
    add_out(count, {"text", "json"});

    auto* alpha = app.add_subcommand("alpha", "Compute the conditional visit matrix");
    add_model(alpha);
    add_alpha_mode(alpha);
    add_seed(alpha);
    add_out(alpha, {"csv", "json"});

    auto* solve = app.add_subcommand("solve", "Solve the max-min coverage LP");
    solve->add_option("--alpha", cfg.alpha_path, "Alpha matrix file (CSV or JSON)");
    solve->add_option("--model", cfg.model, "Model file (alpha computed on the fly)");
    solve->add_option("--length-bound", cfg.length_bound, "Path length bound N (default 2 x eccentricity)");
    add_alpha_mode(solve);
    add_seed(solve);
    solve->add_option("--floor", cfg.floor, "Minimal probability for every state");
    solve->add_option("--export-mps", cfg.mps_path, "Also write the LP in fixed MPS format");
    add_out(solve, {"text", "json"});

    auto* explore = app.add_subcommand("explore", "Run coverage experiments");
    add_model(explore);
    explore->add_option("--strategy", cfg.strategies, "rw | uniform | exact | approx:<m-factor>:<r>");
    explore->add_option("--trials", cfg.trials, "Trials per strategy")->check(CLI::PositiveNumber);
    explore->add_option("--thresholds", cfg.thresholds, "Coverage percentages")->delimiter(',');
    explore->add_option("--cap", cfg.cap, "Max paths per trial");
    explore->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
    explore->add_option("--timings", cfg.timings_path, "Write report with timings here instead of stderr");
    add_seed(explore);
    add_out(explore, {"csv", "json"});

    auto* sample = app.add_subcommand("sample", "Draw uniform bounded successful paths");
    add_model(sample);
    sample->add_option("--count", cfg.count, "Number of paths");
    sample->add_option("--visiting", cfg.visiting, "Only paths visiting this state");
    sample->add_flag("--labels-only", cfg.labels_only, "Print symbol words only");
    add_seed(sample);
    sample->add_option("--out", cfg.out_path, "Output file (default stdout)");

    auto* gen = app.add_subcommand("gen", "Generate a random trim automaton");
    gen->add_option("--states", cfg.gen_states, "Target state count")->required()->check(CLI::PositiveNumber);
    gen->add_option("--alphabet", cfg.gen_alphabet, "Alphabet size")->check(CLI::PositiveNumber);
    gen->add_option("--final-density", cfg.gen_density, "Probability that a state is final");
    add_seed(gen);
    gen->add_option("--out", cfg.out_path, "Output file (default stdout)");

    std::vector<std::string> argv_storage{"pathcov"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage)
        argv.push_back(a.data());
    argv.push_back(nullptr);

    try {
        app.parse(static_cast<int>(argv_storage.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error " << to_string(ErrorCode::usage) << ": " << msg << '\n';
        return 2;
    }

    try {
        Output output(cfg.out_path, out);
        auto& o = output.get();
        if (*count)
            cmd_count(cfg, o);
        else if (*alpha)
            cmd_alpha(cfg, o, err);
        else if (*solve)
            cmd_solve(cfg, o, err);
        else if (*explore)
            cmd_explore(cfg, o, err);
        else if (*sample)
            cmd_sample(cfg, o);
        else if (*gen)
            cmd_gen(cfg, o);
        o.flush();
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error " << to_string(e.code()) << ": " << msg << '\n';
        return e.code() == ErrorCode::usage ? 2 : 1;
    }
    return 0;
}

} // namespace pathcov
