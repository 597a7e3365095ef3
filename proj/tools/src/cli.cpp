#include "petacat_cli/cli.hpp"

#include <algorithm>
#include <ostream>

#include "commands.hpp"
#include "petacat/errors.hpp"

namespace petacat::cli {

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"plan",      "gen", "ingest",   "index",   "master",
                                                 "query",     "neighbors", "lc", "classify", "trigger",
                                                 "movers",    "corr",      "em", "bench20"};
  return names;
}

CLI::Option* add_format_option(CLI::App* sub, std::string& target) {
  return sub->add_option("--format", target, "Output format: csv, table or json")
      ->default_val("csv")
      ->check(CLI::IsMember({"csv", "table", "json"}));
}

std::vector<std::string> split_command_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (const char ch : line) {
    if (quote) {
      if (ch == quote) {
        quote = 0;
      } else {
        cur += ch;
      }
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
      have = true;
    } else if (ch == ' ' || ch == '\t') {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quote) throw ValidationError("unterminated quote in command line");
  if (have) out.push_back(cur);
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"petacat: partitioned time-domain sky catalog engine and survey capacity planner", "petacat"};
  app.require_subcommand(1);
  app.fallthrough(false);
  Context ctx{out, err};
  register_plan(app, ctx);
  register_catalog_commands(app, ctx);
  register_mining_commands(app, ctx);
  register_bench20(app, ctx);

  if (!args.empty() && !args.front().starts_with("-")) {
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), args.front()) == names.end()) {
      err << "error: unknown subcommand '" << args.front() << "'\n" << app.help();
      return kExitValidation;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::Success&) {
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    // Usage for the innermost subcommand that was recognized.
    const CLI::App* target = &app;
    for (;;) {
      const auto subs = target->get_subcommands();
      if (subs.empty()) break;
      target = subs.front();
    }
    err << target->help();
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace petacat::cli
