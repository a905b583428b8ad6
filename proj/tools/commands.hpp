#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace plate::cli {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kVerdictFail = 4 };

struct Options {
    std::string config;
    std::string out = "out";
    int threads = 1;
    bool plots = false;
    bool overwrite = false;
    bool toy = false;
    std::optional<std::uint64_t> seed;
};

// Dispatches one subcommand; exceptions are mapped to exit codes by the caller.
int run_command(const std::string& name, const Options& opt, std::ostream& log);

}  // namespace plate::cli
