// qchan: command-line front end for Kraus-channel analysis.
//
//   qchan <command> <fixture.json>... [--tol T] [--peripheral-eps E] [--seed S]
//         [--no-identity] [--mmax M] [--channel-tol T] [--steps N] [--out PATH]
//
// One fixture prints a single report object, several print an array.
// Exit status: 0 success, 2 invalid input or unmet precondition, 3 numerical failure.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "qchan/qchan.hpp"

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& text)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw qchan::PreconditionError("cannot write " + tmp.string());
        out << text;
        if (!out.flush())
            throw qchan::PreconditionError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral and algebraic analysis of quantum channels in Kraus form"};
    app.set_version_flag("--version", std::string(qchan::tool_name) + " " + qchan::tool_version);

    std::string command;
    std::vector<std::string> paths;
    std::string out_path;
    qchan::RunOptions opt;
    bool no_identity = false;
    int m_max = 0;

    app.add_option("command", command, "validate | spectrum | algebra | shemesh | primitivity | predict | simulate | report")
        ->required()
        ->check(CLI::IsMember(qchan::commands()));
    app.add_option("fixtures", paths, "fixture files")->required()->check(CLI::ExistingFile);
    app.add_option("--tol", opt.rank_tol, "rank / kernel tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--peripheral-eps", opt.peripheral_eps, "peripheral threshold: |lambda| >= 1 - eps")
        ->capture_default_str();
    app.add_option("--seed", opt.seed, "seed for randomized steps")->capture_default_str();
    app.add_flag("--no-identity", no_identity, "build the algebra basis without the empty word");
    app.add_option("--mmax", m_max, "primitivity cap (default 2 n^2)")->check(CLI::PositiveNumber);
    app.add_option("--channel-tol", opt.channel_tol, "tolerance for the TP / unital checks")->capture_default_str();
    app.add_option("--steps", opt.steps, "iteration count for simulate")->capture_default_str();
    app.add_option("--out", out_path, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    opt.include_identity = !no_identity;
    if (m_max > 0)
        opt.m_max = m_max;

    const bool tty = ::isatty(STDERR_FILENO) != 0;
    int exit_code = 0;
    qchan::Json results = qchan::Json::array();
    for (const auto& p : paths) {
        qchan::Json doc;
        try {
            const auto fx = qchan::load_fixture(p);
            auto r = qchan::run_command(command, fx, opt);
            doc = std::move(r.report);
            exit_code = std::max(exit_code, r.exit_code);
        } catch (const qchan::Error& e) {
            doc = qchan::error_report(p, e);
            exit_code = std::max(exit_code, e.exit_code());
        } catch (const std::exception& e) {
            doc = qchan::error_report(p, qchan::NumericalFailure(e.what()));
            exit_code = std::max(exit_code, 3);
        }
        if (tty)
            std::cerr << qchan::summarize(doc);
        results.push_back(std::move(doc));
    }

    const std::string text = (paths.size() == 1 ? results[0] : results).dump(2) + "\n";
    try {
        if (out_path.empty())
            std::cout << text;
        else
            write_atomically(out_path, text);
    } catch (const std::exception& e) {
        std::cerr << "qchan: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
