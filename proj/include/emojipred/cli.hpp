#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emojipred::cli {

// Every accepted configuration key with its default value. Sections:
// seed, threads, paths, pipeline, train, linear, forest, neural, semeval,
// stats, synthetic.
const nlohmann::ordered_json& default_config();

// Dotted keys ("pipeline.num_labels") of every leaf in the default config.
std::vector<std::string> config_keys();

// Merges a config file over the defaults. Unknown keys and type mismatches
// are rejected with InputError; a missing file is MissingResourceError.
nlohmann::ordered_json load_config(const std::filesystem::path& path);
nlohmann::ordered_json merge_config(const nlohmann::ordered_json& overrides);

// Parses `value` according to the type of the default at `dotted_key`.
void set_config_value(nlohmann::ordered_json& config, std::string_view dotted_key, const std::string& value);

// Runs the command line. Output meant for the user (predictions, help) goes
// to `out`; log lines and errors go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace emojipred::cli
