#pragma once

#include <string>
#include <utility>

#include "cayrec/baseline.hpp"
#include "cayrec/engine.hpp"

namespace cayrec {

// Table family spec, e.g. {"family":"cyclic","n":6},
// {"family":"dihedral","m":3}, {"family":"klein"},
// {"family":"product","factors":[spec,spec]},
// {"family":"random-latin","n":5,"seed":1},
// {"family":"nonassoc","n":5,"seed":7}, {"family":"file","path":"t.json"}.
// Returns (table_id, table).
std::pair<std::string, CayleyTable> make_table(const std::string& spec_json);

// Applies {"lr":..,"steps_max":..,...} overrides onto defaults.
TrainConfig config_from_json(const std::string& json_text);

// Full sweep driver: parses the spec (see cayrec.h for the schema), reads
// csv_path for already-finished rows, appends the rest as they finish, and
// writes the aggregate summary JSON. Handles both methods.
void run_sweep_to_files(const std::string& spec_json, const std::string& csv_path,
                        const std::string& summary_path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cayrec
