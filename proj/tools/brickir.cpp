// brickir command-line tool.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "brickir/brickir.hpp"

namespace fs = std::filesystem;
using namespace brickir;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kParse = 2, kCatalog = 3, kInvalid = 4 };

constexpr const char* kExitHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  I/O error (missing or unreadable file)\n"
    "  2  parse error (LDraw, program or JSON input)\n"
    "  3  catalog or annotation error\n"
    "  4  validation failure under --strict\n";

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

struct InvalidError : Error {
  explicit InvalidError(const std::string& m) : Error("invalid", m) {}
};

struct Config {
  std::string catalog;
  std::uint64_t seed = 0;
  std::size_t max_parts = 100;
  double pos_tol = MatchTolerances{}.position;
  double axis_tol = MatchTolerances{}.axis_deg;
  bool strict = false;
  unsigned jobs = 0;
  std::string out;
  std::string format = "json";
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) {
  const auto text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("json", p.string() + ": " + e.what());
  }
}

/// Expands directories into their regular files, sorted by path.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& s : inputs) {
    const fs::path p(s);
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw IoError("no such file or directory '" + s + "'");
    }
  }
  return out;
}

Catalog load_catalog(const Config& cfg) {
  std::string path = cfg.catalog;
  if (path.empty()) {
    if (const char* env = std::getenv("BRICKIR_CATALOG")) path = env;
  }
  if (path.empty()) throw CatalogError("catalog", "no catalog given (use --catalog or BRICKIR_CATALOG)");
  if (!fs::is_regular_file(path)) throw IoError("cannot read catalog '" + path + "'");
  return Catalog::load(path);
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw IoError("cannot write '" + cfg.out + "'");
  out << text;
}

void emit(const Config& cfg, const json& j) { emit(cfg, j.dump(1) + "\n"); }

void require_format(const Config& cfg, std::initializer_list<std::string_view> allowed) {
  if (std::find(allowed.begin(), allowed.end(), cfg.format) == allowed.end()) {
    throw Error("usage", "--format " + cfg.format + " is not supported by this command");
  }
}

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Input readers

bool is_json_path(const fs::path& p) { return p.extension() == ".json"; }

std::vector<PartInstance> read_instances(const fs::path& p, const Config& cfg, const Catalog* catalog,
                                         std::vector<std::string>* warnings = nullptr) {
  if (is_json_path(p)) {
    const auto j = read_json(p);
    const json& arr = j.is_object() ? j.at("instances") : j;
    std::vector<PartInstance> out;
    for (const auto& e : arr) out.push_back(instance_from_json(e));
    return out;
  }
  ldraw::PartPredicate pred;
  if (catalog) pred = catalog->part_predicate();
  auto parsed = ldraw::parse_structure(read_file(p), pred, {cfg.strict});
  if (warnings) *warnings = parsed.warnings;
  return parsed.instances;
}

ConnectivityGraph read_graph(const fs::path& p) {
  try {
    return graph_from_json(read_json(p));
  } catch (const json::exception& e) {
    throw ParseError("json", p.string() + ": " + e.what());
  }
}

MatchTolerances tolerances(const Config& cfg) { return {cfg.pos_tol, cfg.axis_tol}; }

// ---------------------------------------------------------------------------
// Commands

void cmd_parse(const Config& cfg, const std::string& input) {
  require_format(cfg, {"json", "text"});
  std::vector<std::string> warnings;
  const auto inst = read_instances(input, cfg, nullptr, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (cfg.format == "text") return emit(cfg, ldraw::format_structure(inst));
  json arr = json::array();
  for (const auto& i : inst) arr.push_back(instance_to_json(i));
  emit(cfg, json{{"instances", arr}, {"warnings", warnings}});
}

void cmd_graph(const Config& cfg, const std::string& input) {
  require_format(cfg, {"json"});
  const auto catalog = load_catalog(cfg);
  std::vector<std::string> warnings;
  const auto inst = read_instances(input, cfg, nullptr, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  emit(cfg, to_json(match_connectors(inst, catalog, tolerances(cfg))));
}

void cmd_sample(const Config& cfg, const std::vector<std::string>& inputs, std::size_t count, bool collisions) {
  require_format(cfg, {"json", "text"});
  std::vector<ConnectivityGraph> corpus;
  for (const auto& p : expand_inputs(inputs)) corpus.push_back(read_graph(p));
  std::optional<Catalog> catalog;
  if (collisions || cfg.format == "text") catalog = load_catalog(cfg);
  const auto paths = sample_corpus_paths(corpus, count, cfg.seed, cfg.max_parts, collisions ? &*catalog : nullptr);
  if (cfg.format == "text") {
    std::string out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (i) out += "\n";
      out += serialize(corpus[paths[i].graph], paths[i].path, *catalog);
    }
    return emit(cfg, out);
  }
  json arr = json::array();
  for (const auto& cp : paths) arr.push_back({{"graph", cp.graph}, {"path", to_json(cp.path)}});
  emit(cfg, arr);
}

void cmd_serialize(const Config& cfg, const std::string& graph_file, const std::string& path_file,
                   const std::string& root) {
  require_format(cfg, {"text"});
  const auto catalog = load_catalog(cfg);
  const auto g = read_graph(graph_file);
  BuildPath path;
  if (!path_file.empty()) {
    try {
      path = path_from_json(read_json(path_file));
    } catch (const json::exception& e) {
      throw ParseError("json", path_file + ": " + e.what());
    }
  } else {
    path = sample_path(g, root.empty() ? std::nullopt : std::optional<std::string>(root), cfg.max_parts, cfg.seed);
  }
  emit(cfg, serialize(g, path, catalog));
}

void cmd_execute(const Config& cfg, const std::string& input) {
  require_format(cfg, {"json", "text"});
  const auto catalog = load_catalog(cfg);
  const auto parsed = parse_program(read_file(input), catalog, cfg.strict);
  Executor ex(catalog);
  std::optional<Diagnostic> failure = parsed.error;
  for (const auto& s : parsed.program.steps) {
    try {
      ex.apply(s);
    } catch (const ProgramError& e) {
      if (cfg.strict) throw InvalidError(e.what());
      failure = e.diagnostic();
      break;
    }
  }
  if (failure) std::cerr << "warning: line " << failure->line << ": " << failure->code << ": " << failure->message << "\n";
  if (cfg.format == "text") return emit(cfg, ldraw::format_structure(ex.placed()));
  json arr = json::array();
  for (const auto& i : ex.placed()) arr.push_back(instance_to_json(i));
  emit(cfg, json{{"instances", arr}, {"error", failure ? to_json(*failure) : json(nullptr)}});
}

std::vector<ValidityReport> validate_files(const Config& cfg, const std::vector<fs::path>& files,
                                           const Catalog& catalog, bool collisions) {
  std::vector<std::string> texts(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) texts[i] = read_file(files[i]);
  std::vector<ValidityReport> reports(files.size());
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) { reports[i] = validate_prefix(texts[i], catalog, collisions); });
  return reports;
}

bool fully_valid(const ValidityReport& r) { return !r.first_error && !r.first_collision; }

void cmd_check(const Config& cfg, const std::vector<std::string>& inputs, bool collisions) {
  require_format(cfg, {"json"});
  const auto catalog = load_catalog(cfg);
  const auto files = expand_inputs(inputs);
  const auto reports = validate_files(cfg, files, catalog, collisions);
  json arr = json::array();
  bool all_valid = true;
  for (std::size_t i = 0; i < files.size(); ++i) {
    arr.push_back({{"file", files[i].string()}, {"report", to_json(reports[i])}});
    all_valid = all_valid && fully_valid(reports[i]);
  }
  emit(cfg, arr);
  if (cfg.strict && !all_valid) throw InvalidError("at least one program is not fully valid");
}

void cmd_eval(const Config& cfg, const std::vector<std::string>& inputs, bool collisions) {
  require_format(cfg, {"json", "csv"});
  const auto catalog = load_catalog(cfg);
  const auto files = expand_inputs(inputs);
  const auto reports = validate_files(cfg, files, catalog, collisions);
  const auto summary = summarize(reports);
  if (cfg.format == "csv") {
    std::string out = "k,connectivity,collision\n";
    const std::size_t n = std::max(summary.survival_connectivity.size(), summary.survival_collision.size());
    for (std::size_t k = 0; k < n; ++k) {
      out += std::to_string(k) + "," + ldraw::format_double(summary.survival_connectivity.proportion(k)) + "," +
             ldraw::format_double(summary.survival_collision.proportion(k)) + "\n";
    }
    emit(cfg, out);
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
      arr.push_back({{"file", files[i].string()}, {"report", to_json(reports[i])}});
    }
    emit(cfg, json{{"reports", arr}, {"aggregate", to_json(summary)}});
  }
  if (cfg.strict && !std::all_of(reports.begin(), reports.end(), fully_valid)) {
    throw InvalidError("at least one program is not fully valid");
  }
}

void cmd_stats(const Config& cfg, const std::vector<std::string>& inputs) {
  require_format(cfg, {"json", "csv"});
  std::vector<ConnectivityGraph> corpus;
  for (const auto& p : expand_inputs(inputs)) corpus.push_back(read_graph(p));
  const auto s = dataset_stats(corpus);
  if (cfg.format == "csv") return emit(cfg, to_csv(s));
  emit(cfg, to_json(s));
}

void cmd_catalog_build(const Config& cfg, const std::string& library, std::vector<std::string> parts,
                       const std::string& overrides, const std::string& primitives, bool no_meshes) {
  require_format(cfg, {"json"});
  if (!fs::is_directory(library)) throw IoError("no library directory '" + library + "'");
  if (parts.empty()) {
    const fs::path dir = fs::path(library) / "parts";
    if (!fs::is_directory(dir)) throw IoError("library has no parts/ directory");
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".dat") parts.push_back(e.path().filename().string());
    }
    std::sort(parts.begin(), parts.end());
  }
  CatalogBuildOptions opt;
  if (!overrides.empty()) opt.overrides = overrides_by_part(read_json(overrides));
  if (!primitives.empty()) opt.primitives = primitive_table_from_json(read_json(primitives));
  opt.with_meshes = !no_meshes;
  std::vector<BuildReview> review;
  const auto cat = build_catalog(library, parts, opt, &review);
  for (const auto& r : review) {
    for (const auto& p : r.rejected) std::cerr << "review: " << r.part_id << ": rejected primitive " << p.primitive_name << "\n";
  }
  emit(cfg, cat.to_json());
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const IoError*>(&e) || e.code() == "io") return kIo;
  if (dynamic_cast<const InvalidError*>(&e)) return kInvalid;
  if (dynamic_cast<const CatalogError*>(&e)) return kCatalog;
  if (dynamic_cast<const ParseError*>(&e)) return kParse;
  return kParse;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brick structure graphs, build programs and step-validity metrics.", "brickir"};
  app.footer(kExitHelp);
  app.require_subcommand(1);
  app.fallthrough();

  Config cfg;
  app.add_option("--catalog", cfg.catalog, "Catalog JSON (default: $BRICKIR_CATALOG)");
  app.add_option("--seed", cfg.seed, "Random seed (unsigned 64-bit)");
  app.add_option("--max-parts", cfg.max_parts, "Maximum parts per sampled path")->check(CLI::PositiveNumber);
  app.add_option("--pos-tol", cfg.pos_tol, "Connector position tolerance in LDU")->check(CLI::NonNegativeNumber);
  app.add_option("--axis-tol", cfg.axis_tol, "Connector axis tolerance in degrees")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", cfg.strict, "Fail on the first malformed line or invalid program");
  app.add_option("--jobs", cfg.jobs, "Worker threads for batch commands (default: logical cores)");
  app.add_option("--out", cfg.out, "Write output to a file instead of stdout");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));

  std::string input, graph_file, path_file, root, library, overrides, primitives;
  std::vector<std::string> inputs, part_ids;
  std::size_t count = 1;
  bool collisions = true, cut_collisions = false, no_meshes = false;

  auto* parse = app.add_subcommand("parse", "Parse an .ldr/.mpd file into posed part instances");
  parse->add_option("input", input, "Structure file")->required();

  auto* graph = app.add_subcommand("graph", "Build the connectivity graph of a structure");
  graph->add_option("input", input, "Structure file (.ldr/.mpd) or instances JSON")->required();

  auto* sample = app.add_subcommand("sample", "Sample build paths from a corpus of graphs");
  sample->add_option("inputs", inputs, "Graph JSON files or directories")->required();
  sample->add_option("--count", count, "Number of paths")->check(CLI::PositiveNumber);
  sample->add_flag("--collisions", cut_collisions, "Cut each path before its first colliding placement");

  auto* ser = app.add_subcommand("serialize", "Serialize a build path as a program");
  ser->add_option("graph", graph_file, "Graph JSON")->required();
  ser->add_option("--path", path_file, "Build path JSON (default: sample one with --seed)");
  ser->add_option("--root", root, "Root node for a sampled path");

  auto* exe = app.add_subcommand("execute", "Execute a program into posed parts");
  exe->add_option("input", input, "Program file")->required();

  auto* check = app.add_subcommand("check", "Report step validity of programs");
  check->add_option("inputs", inputs, "Program files or directories")->required();
  check->add_flag("!--no-collisions", collisions, "Skip collision checks");

  auto* stats = app.add_subcommand("stats", "Dataset statistics of a graph corpus");
  stats->add_option("inputs", inputs, "Graph JSON files or directories")->required();

  auto* eval = app.add_subcommand("eval", "Step-validity metrics over generated programs");
  eval->add_option("inputs", inputs, "Program files or directories")->required();
  eval->add_flag("!--no-collisions", collisions, "Skip collision checks");

  auto* cat = app.add_subcommand("catalog", "Catalog tools");
  cat->require_subcommand(1);
  auto* build = cat->add_subcommand("build", "Annotate parts of an LDraw library");
  build->add_option("library", library, "LDraw library root")->required();
  build->add_option("parts", part_ids, "Part files (default: every parts/*.dat)");
  build->add_option("--overrides", overrides, "Annotation overrides JSON");
  build->add_option("--primitives", primitives, "Primitive table JSON");
  build->add_flag("--no-meshes", no_meshes, "Omit collision meshes");

  for (auto* sub : {parse, graph, sample, ser, exe, check, stats, eval, cat}) sub->footer(kExitHelp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (cfg.format == "json" && (*ser)) cfg.format = "text";
    if (*parse) cmd_parse(cfg, input);
    else if (*graph) cmd_graph(cfg, input);
    else if (*sample) cmd_sample(cfg, inputs, count, cut_collisions);
    else if (*ser) cmd_serialize(cfg, graph_file, path_file, root);
    else if (*exe) cmd_execute(cfg, input);
    else if (*check) cmd_check(cfg, inputs, collisions);
    else if (*stats) cmd_stats(cfg, inputs);
    else if (*eval) cmd_eval(cfg, inputs, collisions);
    else if (*build) cmd_catalog_build(cfg, library, part_ids, overrides, primitives, no_meshes);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: json: " << e.what() << "\n";
    return kParse;
  }
  return kOk;
}
