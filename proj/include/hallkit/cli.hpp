#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hallkit/common.hpp"

namespace hallkit::cli {

enum ExitCode { ok = 0, internal_error = 1, validation_error = 2, guard_refusal = 3 };

// Empty cells are written as an empty CSV field and as null in JSON.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;  // echoed into the header block
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// '.' decimal point, 17 significant digits, independent of the global locale
std::string format_double(double x);

std::string to_csv(const Table& table, const NumericPolicy& policy);
nlohmann::json to_json(const Table& table, const NumericPolicy& policy);

nlohmann::json policy_to_json(const NumericPolicy& policy);
// Overrides fields named in doc; unknown keys and non-positive tolerances are validation errors.
NumericPolicy policy_from_json(const nlohmann::json& doc, NumericPolicy base = default_policy());

// Full command line, argv[0] included.  Returns the process exit code.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace hallkit::cli
