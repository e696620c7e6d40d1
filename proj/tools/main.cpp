#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include "gradostat/error.hpp"
#include "gradostat/run.hpp"
#include "gradostat/scenario.hpp"

extern char** environ;

using namespace gradostat;
namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string model, out;
    std::optional<double> gamma, gap;
    bool deterministic = false;

    void attach(CLI::App* c)
    {
        c->add_option("--model", model, "rc, rmx or rme");
        c->add_option("--gamma", gamma, "big-Gamma of the design disjunctions");
        c->add_option("--gap", gap, "relative optimality gap");
        c->add_flag("--deterministic", deterministic, "reproducible search order");
        c->add_option("--out", out, "output directory");
    }

    RunOverrides overrides(std::optional<RunMode> mode) const
    {
        RunOverrides o;
        o.mode = mode;
        if (!model.empty())
            o.model = parse_model_kind(model);
        o.gamma = gamma;
        o.gap = gap;
        if (deterministic)
            o.deterministic = true;
        if (!out.empty())
            o.out_dir = out;
        return o;
    }
};

void print_outcome(const RunOutcome& r, bool full)
{
    if (full) {
        for (const auto& [k, v] : r.report)
            fmt::print("{:<34} {}\n", k, v);
    } else {
        fmt::print("status {}  objective {}  exactness {:.3g}\n", r.status, r.objective,
                   r.exactness);
    }
    for (const auto& f : r.files)
        fmt::print("wrote {}\n", f);
}

int run_one(Scenario sc, const Flags& f, std::optional<RunMode> mode, bool full)
{
    apply_overrides(sc, f.overrides(mode));
    RunOutcome r = run_scenario(sc, std::cerr);
    print_outcome(r, full);
    return r.exit_code;
}

// one child process per scenario, at most `jobs` at a time
int batch(const std::string& self, const std::string& dir, const Flags& f, int jobs)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml"))
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error(ErrorCode::BadInput, "no scenario files in " + dir);
    const std::string root = f.out.empty() ? std::string("out") : f.out;

    std::map<pid_t, fs::path> running;
    std::map<fs::path, int> codes;
    auto reap = [&] {
        int st = 0;
        pid_t pid = waitpid(-1, &st, 0);
        if (pid <= 0)
            return;
        int code = WIFEXITED(st) ? WEXITSTATUS(st) : kExitSolverFailure;
        codes[running[pid]] = code;
        running.erase(pid);
    };
    for (const auto& file : files) {
        while (static_cast<int>(running.size()) >= jobs)
            reap();
        std::vector<std::string> args = {self, "run", file.string(), "--out",
                                         (fs::path(root) / file.stem()).string()};
        if (!f.model.empty())
            args.insert(args.end(), {"--model", f.model});
        if (f.gamma)
            args.insert(args.end(), {"--gamma", fmt::format("{}", *f.gamma)});
        if (f.gap)
            args.insert(args.end(), {"--gap", fmt::format("{}", *f.gap)});
        if (f.deterministic)
            args.push_back("--deterministic");
        std::vector<char*> argv;
        for (auto& a : args)
            argv.push_back(a.data());
        argv.push_back(nullptr);
        pid_t pid = 0;
        if (posix_spawn(&pid, self.c_str(), nullptr, nullptr, argv.data(), environ) != 0) {
            codes[file] = kExitSolverFailure;
            continue;
        }
        running[pid] = file;
    }
    while (!running.empty())
        reap();

    int worst = kExitOk;
    for (const auto& [file, code] : codes) {
        fmt::print("{}  exit {}\n", file.string(), code);
        worst = std::max(worst, code);
    }
    return worst;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gradostat: conic relaxations of biogas maximization in bioreactor networks"};
    app.require_subcommand(1);
    Flags flags;

    std::string file;
    auto verb = [&](const char* name, const char* help) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("scenario", file, "scenario YAML file")->required();
        flags.attach(c);
        return c;
    };
    auto* solve = verb("solve", "steady state on a fixed topology");
    auto* design = verb("design", "choose pipes by branch-and-bound");
    auto* dynamic = verb("dynamic", "multi-period horizon");
    verb("run", "use the mode stored in the scenario");
    auto* validate = verb("validate", "run and print the full validation report");

    auto* example = app.add_subcommand("example", "generate and run a built-in instance");
    std::string ex_name, ex_case = "easy", write_only;
    int ex_size = 0;
    example->add_option("name", ex_name, "four_tank, four_tank_modified, wheel, dynamic_four_tank")
        ->required();
    example->add_option("--size", ex_size, "wheel size n");
    example->add_option("--case", ex_case, "wheel case")->check(CLI::IsMember({"easy", "hard"}));
    example->add_option("--write-only", write_only, "write the scenario file and stop");
    flags.attach(example);

    auto* batch_cmd = app.add_subcommand("batch", "run every scenario file in a directory");
    std::string batch_dir;
    int jobs = 0;
    batch_cmd->add_option("dir", batch_dir)->required()->check(CLI::ExistingDirectory);
    batch_cmd->add_option("--jobs", jobs, "parallel processes (default: hardware threads)");
    flags.attach(batch_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (*example) {
            ModelKind kind = flags.model.empty() ? ModelKind::RC : parse_model_kind(flags.model);
            Scenario sc = generate_example(ex_name, ex_size, ex_case == "hard", kind);
            if (!write_only.empty()) {
                save_scenario(sc, write_only);
                fmt::print("wrote {}\n", write_only);
                return kExitOk;
            }
            if (flags.out.empty())
                flags.out = (fs::path("out") / sc.name).string();
            return run_one(sc, flags, std::nullopt, false);
        }
        if (*batch_cmd) {
            if (jobs <= 0)
                jobs = std::max(1u, std::thread::hardware_concurrency());
            return batch(fs::canonical("/proc/self/exe").string(), batch_dir, flags, jobs);
        }
        Scenario sc = load_scenario(file);
        if (*solve)
            return run_one(sc, flags, RunMode::Steady, false);
        if (*design)
            return run_one(sc, flags, RunMode::Design, false);
        if (*dynamic)
            return run_one(sc, flags, RunMode::Dynamic, false);
        if (*validate)
            return run_one(sc, flags, std::nullopt, true);
        return run_one(sc, flags, std::nullopt, false);
    } catch (const Error& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitSolverFailure;
    }
}
