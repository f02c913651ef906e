#pragma once

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// flat key=value text with [section] headers; keys are stored as section.key
//
//   file    := { line }
//   line    := blank | "#" comment | "[" name "]" | key "=" value
//
// every key must appear in the schema; values are type-checked on load
class RunConfig {
public:
    static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
    static RunConfig load(const std::string& path);

    // command-line overrides go through the same validation
    void set(const std::string& key, const std::string& value, const std::string& where = "command line");
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& def) const;
    long integer(const std::string& key, long def) const;
    double real(const std::string& key, double def) const;
    bool flag(const std::string& key, bool def) const;
    std::vector<double> reals(const std::string& key) const;

    static const std::map<std::string, std::string>& schema();   // key -> type name

private:
    struct Entry {
        std::string value, where;
    };
    std::map<std::string, Entry> values_;
    const Entry& entry(const std::string& key) const;
};

// exit codes
enum ExitCode { exit_pass = 0, exit_assertion = 1, exit_config = 2, exit_numerical = 3 };

// runs one command; writes a human-readable summary to out and artifacts to run.out when set
int execute(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

// argv front end shared by the tool and the tests
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ymr
