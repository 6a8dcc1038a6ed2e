// mbk: command-line front end for the mini-batch k-means library.
//
//   mbk run    --gen mixture:n=10000,d=4 --k 5 --eps 0.5 --trials 20 --out-dir out
//   mbk sweep  --data points.csv --normalize --eps 0.1,0.25,0.5 --trials 5
//   mbk audit  out/trace_*.json --report out/audit.json
//   mbk gen    --gen uniform:n=1000,d=3,seed=7 --out points.csv
//
// Every run/sweep option may also come from `--config file` (flat
// `key = value` lines, keys are option names without dashes); flags given
// on the command line win.

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbk/error.hpp"
#include "mbk/experiment.hpp"
#include "mbk/io.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        auto item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start);
        if (!item.empty()) items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        T value{};
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw mbk::ContractViolation(std::string("bad value '") + item + "' for --" + what);
        }
        out.push_back(value);
    }
    if (out.empty()) throw mbk::ContractViolation(std::string("--") + what + " needs a value");
    return out;
}

struct DataFlags {
    std::string data;
    std::string gen;
    bool normalize = false;
    bool header = false;

    void attach(CLI::App& cmd) {
        auto* d = cmd.add_option("--data", data, "CSV file, one point per line");
        auto* g = cmd.add_option("--gen", gen,
                                 "Synthetic data, e.g. gaussian_mixture:n=10000,d=4,"
                                 "components=5,sigma=0.05,seed=1 or uniform:n=1000,d=2");
        d->excludes(g);
        cmd.add_flag("--normalize", normalize, "Min-max scale each coordinate into [0,1]");
        cmd.add_flag("--header", header, "Skip the first CSV line");
    }

    bool given() const { return !data.empty() || !gen.empty(); }

    mbk::io::DataSource source() const {
        mbk::io::DataSource src;
        if (!data.empty()) {
            src.kind = mbk::io::DataSource::Kind::File;
            src.path = data;
            src.ingest = {normalize, header};
        } else if (!gen.empty()) {
            src.kind = mbk::io::DataSource::Kind::Generated;
            src.gen = mbk::io::parse_gen_spec(gen);
        } else {
            throw mbk::ContractViolation("need a dataset: pass --data or --gen");
        }
        return src;
    }
};

struct RunFlags {
    DataFlags data;
    std::string k = "5";
    std::string b;
    std::string eps = "0.5";
    std::string rate = "paper";
    std::string stop = "improve";
    std::string init = "kmeanspp";
    std::string algo = "minibatch";
    std::string batch_mode = "sampled";
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::size_t cap = 0;
    std::size_t threads = 0;
    double batch_const = 1.0;
    bool audit_global = false;
    std::string out_dir = ".";

    void attach(CLI::App& cmd) {
        data.attach(cmd);
        cmd.add_option("--k", k, "Number of centers (comma list sweeps)");
        cmd.add_option("--b", b, "Batch size (comma list sweeps); default from the batch-size formula");
        cmd.add_option("--eps", eps, "Stopping threshold (comma list sweeps)");
        cmd.add_option("--rate", rate, "Learning rate: paper | sklearn | const:<c>");
        cmd.add_option("--stop", stop, "Stopping rule: improve | move");
        cmd.add_option("--init", init, "Initialization: kmeanspp | random");
        cmd.add_option("--algo", algo, "minibatch | lloyd");
        cmd.add_option("--batch-mode", batch_mode, "sampled | full (batch = whole dataset)");
        cmd.add_option("--seed", seed, "Root seed; trial t runs on a derived substream");
        cmd.add_option("--trials", trials, "Seeds per sweep point")->check(CLI::PositiveNumber);
        cmd.add_option("--cap", cap, "Iteration cap (0: 10*ceil(d/eps))");
        cmd.add_option("--threads", threads, "Worker threads (0: MBK_THREADS or all cores)");
        cmd.add_option("--batch-const", batch_const, "Constant c in the batch-size formula");
        cmd.add_flag("--audit-global", audit_global,
                     "Record f_X and C-bar distances every iteration");
        cmd.add_option("--out-dir", out_dir, "Directory for traces and metrics.csv");
    }

    mbk::ExperimentSpec spec() const {
        mbk::ExperimentSpec s;
        s.data = data.source();
        s.algorithm = mbk::parse_algorithm(algo);
        s.k_values = parse_list<std::size_t>(k, "k");
        if (!b.empty()) s.b_values = parse_list<std::size_t>(b, "b");
        s.eps_values = parse_list<double>(eps, "eps");
        s.rate = mbk::LearningRatePolicy::parse(rate);
        s.stop = mbk::parse_stopping_kind(stop);
        s.init = mbk::parse_init_scheme(init);
        if (s.init == mbk::InitScheme::Explicit) {
            throw mbk::ContractViolation("--init explicit is library-only");
        }
        s.batch_mode = mbk::parse_batch_mode(batch_mode);
        s.seed = seed;
        s.trials = trials;
        s.cap = cap;
        s.threads = threads;
        s.batch_constant = batch_const;
        s.audit_global = audit_global;
        s.out_dir = out_dir;
        return s;
    }
};

// Splices `--config FILE` entries in front of the real arguments so that
// command-line flags, parsed later, take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::vector<std::string> rest;
    std::optional<std::string> config;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[++i];
        } else if (args[i].starts_with("--config=")) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> out{args[0]};
    if (!config) {
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
    }
    if (rest.empty()) throw mbk::ContractViolation("--config needs a subcommand");
    out.push_back(rest.front());
    for (const auto& [key, value] : mbk::io::parse_config(mbk::io::read_text_file(*config))) {
        out.push_back("--" + key + "=" + value);
    }
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const mbk::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return mbk::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mbk::kExitContract;
    }

    CLI::App app{"Mini-batch k-means with early stopping, plus audits of its termination behavior"};
    app.require_subcommand(1);
    app.footer("Options for run/sweep may also come from --config FILE (key = value lines).");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    RunFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Run trials (and sweeps) and write traces + metrics.csv");
    run_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run_flags.attach(*run_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "Alias of run; comma lists in --k/--b/--eps span the grid");
    sweep_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run_flags.attach(*sweep_cmd);

    mbk::AuditRequest audit;
    std::vector<std::string> audit_traces;
    std::string audit_checks;
    double audit_eps = 0.0;
    std::string audit_report = "audit.json";
    bool concentration = false;
    DataFlags audit_data;
    auto* audit_cmd = app.add_subcommand("audit", "Audit recorded traces and write an AuditReport JSON");
    audit_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    audit_cmd->add_option("traces", audit_traces, "Trace JSON files")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    audit_cmd->add_option("--check", audit_checks, "Comma list of progress,proximity,implication");
    auto* eps_opt = audit_cmd->add_option("--eps", audit_eps, "Audit epsilon (default: each trace's)");
    audit_cmd->add_option("--report", audit_report, "Report path");
    audit_cmd->add_flag("--concentration", concentration,
                        "Also run the batch-cost concentration audit on --data/--gen");
    audit_data.attach(*audit_cmd);
    audit_cmd->add_option("--k", audit.k, "Centers for the concentration audit");
    audit_cmd->add_option("--b", audit.b, "Batch size for the concentration audit");
    audit_cmd->add_option("--delta", audit.delta, "Deviation threshold for the concentration audit");
    audit_cmd->add_option("--trials", audit.trials, "Batches drawn by the concentration audit");
    audit_cmd->add_option("--seed", audit.seed, "Seed for the concentration audit");

    std::string gen_spec;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen_cmd->add_option("--gen", gen_spec, "Generator spec")->required();
    gen_cmd->add_option("--out", gen_out, "Output CSV path")->required();

    DataFlags oracle_data;
    std::size_t oracle_k = 2;
    std::uint64_t oracle_seed = 0;
    std::size_t oracle_trials = 200;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare k-means++ with the exact optimum");
    oracle_cmd->group("");
    oracle_data.attach(*oracle_cmd);
    oracle_cmd->add_option("--k", oracle_k);
    oracle_cmd->add_option("--seed", oracle_seed);
    oracle_cmd->add_option("--trials", oracle_trials);

    try {
        std::vector<const char*> cargv;
        for (const auto& a : args) cargv.push_back(a.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mbk::kExitContract;
    }

    try {
        if (run_cmd->parsed() || sweep_cmd->parsed()) {
            return mbk::cmd_run(run_flags.spec(), std::cout, std::cerr);
        }
        if (audit_cmd->parsed()) {
            for (const auto& t : audit_traces) audit.traces.emplace_back(t);
            audit.checks = split_list(audit_checks);
            if (eps_opt->count() > 0) audit.eps = audit_eps;
            audit.report = audit_report;
            if (concentration) audit.concentration_data = audit_data.source();
            return mbk::cmd_audit(audit, std::cout, std::cerr);
        }
        if (gen_cmd->parsed()) {
            return mbk::cmd_gen(mbk::io::parse_gen_spec(gen_spec), gen_out, std::cout, std::cerr);
        }
        if (oracle_cmd->parsed()) {
            return mbk::cmd_oracle_check(oracle_data.source(), oracle_k, oracle_seed,
                                         oracle_trials, std::cout, std::cerr);
        }
    } catch (const mbk::ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mbk::kExitContract;
    }
    return mbk::kExitContract;
}
