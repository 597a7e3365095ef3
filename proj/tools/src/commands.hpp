#pragma once

#include <iosfwd>
#include <string>

#include <CLI11.hpp>

#include "table.hpp"

namespace petacat::cli {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

/// Adds `--format` (csv by default) bound to `target`.
CLI::Option* add_format_option(CLI::App* sub, std::string& target);

void register_plan(CLI::App& app, Context& ctx);
void register_catalog_commands(CLI::App& app, Context& ctx);  // gen ingest index master query neighbors
void register_mining_commands(CLI::App& app, Context& ctx);   // lc classify trigger movers corr em
void register_bench20(CLI::App& app, Context& ctx);

}  // namespace petacat::cli
