#pragma once
// Scenario files (INI sections [pair] [controller] [disturbance] [sim] [output])
// and CSV traces.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bfsmc/simulation.hpp"

namespace bfsmc {

/// "section.key" = value, applied on top of the file contents.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// A readable path as given, otherwise `<name>.ini` or `<name>` in the bundled
/// scenario directory. Throws ParseError if nothing is found.
std::string resolve_scenario_path(const std::string& name_or_path);

/// Strict parse: unknown sections or keys, keys irrelevant to the controller
/// kind and domain violations raise ParseError with section and line.
Scenario parse_scenario(const std::string& name_or_path, const Overrides& overrides = {});
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<string>",
                             const std::string& base_dir = ".", const Overrides& overrides = {});

/// Real number or ratio "a/b".
double parse_real(const std::string& text);

std::vector<std::string> csv_header(const Trajectory& trajectory);
/// Header, every `decimation`-th row starting with the first, then a
/// '#' block with metadata and events.
void write_csv(const Trajectory& trajectory, std::ostream& out, int decimation = 1);
void write_csv(const Trajectory& trajectory, const std::string& path, int decimation = 1);

Trajectory read_csv(std::istream& in);
Trajectory read_csv(const std::string& path);

}  // namespace bfsmc
