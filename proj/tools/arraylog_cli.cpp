// Command-line front end: loads fact files, evaluates a built-in or .dl
// program to fixpoint, and writes result relations and run statistics.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arraylog/arraylog.hpp"

namespace fs = std::filesystem;

namespace {

struct run_options {
    std::string program;
    std::vector<std::string> fact_args;
    std::string out_dir;
    unsigned workers = 0;
    std::uint64_t memory_budget = 0;  // 0 = unlimited
    std::string ebm = "on";
    unsigned alpha = 5;
    double load_factor = 0.8;
    std::uint64_t stride = 0;
    bool emit_facts = false;
    bool emit_stats = false;
};

arraylog::program resolve_program(const std::string& spec) {
    if (arraylog::is_builtin_program(spec))
        return arraylog::builtin_program(spec);

    std::ifstream in(spec);
    if (!in)
        throw arraylog::usage_error("cannot open program file '" + spec +
                                    "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto result = arraylog::parse_program(buf.str());
    if (!result.ok()) {
        std::ostringstream msg;
        for (const auto& d : result.diagnostics)
            msg << spec << ":" << d.line << ":" << d.column << ": "
                << d.message << "\n";
        throw arraylog::usage_error(msg.str());
    }
    return std::move(result.prog);
}

std::map<std::string, fs::path> parse_fact_args(
    const std::vector<std::string>& args, const arraylog::program& prog) {
    std::map<std::string, fs::path> facts;
    for (const auto& arg : args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
            throw arraylog::usage_error("--facts expects <relation>=<path>, got '" +
                                        arg + "'");
        std::string rel = arg.substr(0, eq);
        if (!prog.is_edb(rel))
            throw arraylog::usage_error("relation '" + rel +
                                        "' is not a declared EDB");
        facts[rel] = fs::path(arg.substr(eq + 1));
    }
    for (const auto& e : prog.edbs)
        if (!facts.count(e.name))
            throw arraylog::usage_error("no fact file given for EDB '" +
                                        e.name + "' (use --facts " + e.name +
                                        "=<path>)");
    return facts;
}

int run_command(const run_options& opt) {
    arraylog::program prog = resolve_program(opt.program);
    auto fact_paths = parse_fact_args(opt.fact_args, prog);

    if (opt.ebm != "on" && opt.ebm != "off")
        throw arraylog::usage_error("--ebm expects 'on' or 'off'");

    arraylog::engine_config cfg;
    if (opt.memory_budget > 0) cfg.memory_budget_bytes = opt.memory_budget;
    cfg.ebm_enabled = opt.ebm == "on";
    cfg.alpha = opt.alpha;
    cfg.load_factor = opt.load_factor;
    cfg.workers = opt.workers;
    cfg.stride_rows = opt.stride;

    // One namespace per run: raw integer ids unless any file carries
    // non-numeric tokens, in which case everything goes through a shared
    // dictionary and outputs are decoded again.
    bool numeric = true;
    for (const auto& [rel, path] : fact_paths)
        if (!arraylog::file_is_all_integers(path)) numeric = false;
    arraylog::dictionary dict;
    arraylog::dictionary* dictp = numeric ? nullptr : &dict;

    arraylog::engine eng(prog, cfg);
    for (const auto& e : prog.edbs)
        eng.load_edb(e.name,
                     arraylog::read_facts(fact_paths.at(e.name), e.arity,
                                          dictp, cfg.workers));
    eng.run();

    fs::path out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    for (const auto& name : eng.idb_relations()) {
        const auto& rel = eng.relation(name);
        std::cout << name << " " << rel.count() << "\n";
        if (opt.emit_facts)
            arraylog::write_relation(rel, out_dir / (name + ".tsv"), dictp);
    }
    if (opt.emit_stats) {
        std::ofstream stats(out_dir / "stats.tsv", std::ios::binary);
        if (!stats)
            throw arraylog::load_error("cannot write stats.tsv in '" +
                                       out_dir.string() + "'");
        stats << arraylog::to_tsv(eng.stats());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Datalog engine over hash-indexed sorted arrays"};
    app.require_subcommand(1);

    run_options opt;
    CLI::App* run = app.add_subcommand("run", "evaluate a program to fixpoint");
    run->add_option("--program", opt.program,
                    "builtin program (reach|sg|cspa) or a .dl file")
        ->required();
    run->add_option("--facts", opt.fact_args,
                    "EDB fact file as <relation>=<path>; repeatable");
    run->add_option("--out", opt.out_dir, "output directory")->required();
    run->add_option("--workers", opt.workers, "worker threads (0 = all cores)")
        ->envname("ENGINE_WORKERS");
    run->add_option("--memory-budget", opt.memory_budget,
                    "tracked-allocation budget in bytes (0 = unlimited)")
        ->envname("ENGINE_MEMORY_BUDGET");
    run->add_option("--ebm", opt.ebm, "eager merge-buffer management (on|off)")
        ->envname("ENGINE_EBM");
    run->add_option("--alpha", opt.alpha,
                    "eager buffer over-allocation factor")
        ->envname("ENGINE_ALPHA");
    run->add_option("--load-factor", opt.load_factor,
                    "index map load factor in (0, 1)")
        ->envname("ENGINE_LOAD_FACTOR");
    run->add_option("--stride", opt.stride,
                    "join stride in rows (0 = automatic)")
        ->envname("ENGINE_STRIDE");
    run->add_flag("--emit-facts", opt.emit_facts,
                  "write every IDB relation to <out>/<name>.tsv");
    run->add_flag("--stats", opt.emit_stats, "write <out>/stats.tsv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        return run_command(opt);
    } catch (const arraylog::budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
