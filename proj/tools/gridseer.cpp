// gridseer: command-line front end.
//
//   gridseer <inspect|emst|protect|attack|estimate> --case F [--meters F|ids] ...
//
// Writes one JSON report to stdout (or --out). Exit codes: 0 success, 1 usage,
// 2 invalid input, 3 infeasible or unobservable, 4 internal error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "gridseer/gridseer.hpp"

namespace {

using gridseer::ErrorKind;
using gridseer::cli::RunConfig;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    gridseer::fail(ErrorKind::kInternal, "SHA-256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// Hash of every input that can change the result: file contents plus the
// normalized options.
std::string inputs_digest(const RunConfig& cfg) {
  nlohmann::json doc = {{"command", cfg.command},
                        {"case", gridseer::read_file(cfg.case_path)},
                        {"targets", cfg.targets},
                        {"mode", cfg.mode},
                        {"secured", cfg.secured},
                        {"unknown_lines", cfg.unknown_lines},
                        {"seed", cfg.seed},
                        {"sigma", cfg.sigma},
                        {"delta", cfg.delta},
                        {"gross", cfg.gross},
                        {"trials", cfg.trials},
                        {"timeout", cfg.timeout}};
  if (!cfg.meters.empty()) {
    doc["meters"] = std::filesystem::is_regular_file(cfg.meters)
                        ? gridseer::read_file(cfg.meters)
                        : cfg.meters;
  }
  if (!cfg.attack_path.empty()) doc["attack"] = gridseer::read_file(cfg.attack_path);
  return "sha256:" + sha256_hex(doc.dump());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) gridseer::fail(ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  out << text;
}

std::vector<int> parse_targets(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : gridseer::cli::detail::split_list(text)) {
    std::size_t used = 0;
    try {
      out.push_back(std::stoi(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) {
      gridseer::fail(ErrorKind::kUsage, "--targets expects bus ids like 5,8, got '" + item + "'");
    }
  }
  if (out.empty()) gridseer::fail(ErrorKind::kUsage, "target set must be nonempty");
  return out;
}

std::vector<std::pair<int, int>> parse_lines(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : gridseer::cli::detail::split_list(text)) {
    auto dash = item.find('-');
    try {
      if (dash == std::string::npos) throw std::invalid_argument(item);
      out.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    } catch (const std::exception&) {
      gridseer::fail(ErrorKind::kUsage, "--unknown-lines expects pairs like 7-8, got '" + item + "'");
    }
  }
  return out;
}

void configure_trace(RunConfig& cfg) {
  const char* level = std::getenv("GRIDSEER_LOG");
  if (!level) return;
  const std::string value = level;
  if (value != "debug" && value != "info") return;
  cfg.trace_every_node = value == "debug";
  cfg.trace = [](const nlohmann::json& event) { std::cerr << event.dump() << '\n'; };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based security analysis for DC state estimation", "gridseer"};
  app.set_version_flag("--version", gridseer::kToolVersion);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_path, dot_path, unknown_lines, targets;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"inspect", "Validate a case and report its observability"},
      {"emst", "Build an edge-measured Steiner tree for a meter set"},
      {"protect", "Plan the cheapest meters to secure for target buses"},
      {"attack", "Synthesize the cheapest undetectable attack on target buses"},
      {"estimate", "Simulate measurements and run estimation with bad data detection"},
  };
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--case", cfg.case_path, "Case file (.json native or .m MATPOWER)")
        ->required();
    sub->add_option("--meters", cfg.meters, "Meter file, or comma-separated meter ids");
    sub->add_option("--out", out_path, "Write the JSON report here instead of stdout");
    sub->add_option("--seed", cfg.seed, "Seed for simulated quantities");
    const std::string name = cmd.name;
    if (name == "emst" || name == "protect" || name == "attack") {
      sub->add_option("--dot", dot_path, "Write a Graphviz rendering here");
    }
    if (name == "protect" || name == "attack") {
      sub->add_option("--targets", targets, "Target bus ids, e.g. 5,8")->required();
    }
    if (name == "protect") {
      sub->add_option("--mode", cfg.mode, "Planner")
          ->check(CLI::IsMember({"exact", "tph", "both"}));
      sub->add_option("--timeout", cfg.timeout, "Exact solver time limit in seconds")
          ->check(CLI::PositiveNumber);
    }
    if (name == "attack") {
      sub->add_option("--secured", cfg.secured, "Meter ids the attacker cannot alter")
          ->delimiter(',');
      sub->add_option("--unknown-lines", unknown_lines,
                      "Lines the attacker does not know, e.g. 7-8,4-9");
      sub->add_option("--delta", cfg.delta, "Angle bias in radians");
    }
    if (name == "attack" || name == "estimate") {
      sub->add_option("--sigma", cfg.sigma, "Measurement noise standard deviation")
          ->check(CLI::NonNegativeNumber);
    }
    if (name == "estimate") {
      sub->add_option("--attack", cfg.attack_path, "JSON file carrying an attack vector 'a'");
      sub->add_option("--gross", cfg.gross, "Meter id receiving a 10 sigma gross error");
      sub->add_option("--trials", cfg.trials, "Number of independent simulations")
          ->check(CLI::PositiveNumber);
      sub->add_option("--jobs", cfg.jobs, "Worker threads for --trials")
          ->check(CLI::PositiveNumber);
    }
    sub->callback([&cfg, sub] { cfg.command = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gridseer::exit_code(ErrorKind::kUsage);
  }

  configure_trace(cfg);
  const auto start = std::chrono::steady_clock::now();
  nlohmann::json report = {{"command", cfg.command}, {"tool_version", gridseer::kToolVersion}};
  int code = 0;
  try {
    if (cfg.command == "protect" || cfg.command == "attack") cfg.targets = parse_targets(targets);
    cfg.unknown_lines = parse_lines(unknown_lines);
    cfg.want_dot = !dot_path.empty();
    report["inputs_digest"] = inputs_digest(cfg);
    gridseer::cli::CommandOutput output = gridseer::cli::run_command(cfg);
    report["result"] = std::move(output.result);
    if (cfg.want_dot) write_text(dot_path, output.dot);
  } catch (const gridseer::Error& e) {
    code = gridseer::exit_code(e.kind());
    report["error"] = {{"kind", gridseer::to_string(e.kind())}, {"message", e.what()}};
    if (!e.detail().is_null()) report["error"]["detail"] = e.detail();
    std::cerr << "gridseer: " << gridseer::to_string(e.kind()) << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    code = gridseer::exit_code(ErrorKind::kInternal);
    report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    std::cerr << "gridseer: internal: " << e.what() << '\n';
  }
  if (code == gridseer::exit_code(ErrorKind::kUsage)) return code;
  report["timings"] = {
      {"total_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  const std::string text = report.dump(2) + "\n";
  try {
    if (out_path.empty()) {
      std::cout << text;
    } else {
      write_text(out_path, text);
    }
  } catch (const gridseer::Error& e) {
    std::cerr << "gridseer: " << e.what() << '\n';
    return code == 0 ? gridseer::exit_code(e.kind()) : code;
  }
  return code;
}
