#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cpgibbs/config.hpp"

namespace cpgibbs::commands {

enum ExitCode { kPass = 0, kCheckFailure = 1, kConfigError = 2 };

struct Context {
    config::RunConfig config;
    std::string out_dir;    // --out, else config.output_dir
    std::string cache_dir;  // empty disables the eigendata cache
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

/// Name of the environment variable holding the eigendata cache directory.
inline constexpr const char* kCacheEnv = "CPGIBBS_CACHE_DIR";

const std::vector<std::string>& command_names();

/// Runs one command and returns its exit code. Library errors propagate.
int run(const std::string& command, Context& ctx);

/// Parses the config, runs the command and maps errors onto exit codes.
int run_cli(const std::string& command, const std::string& config_path, const std::string& out_dir,
            std::ostream& out, std::ostream& err);

}  // namespace cpgibbs::commands
