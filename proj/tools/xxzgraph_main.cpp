#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "xxz/io.hpp"
#include "xxz/run.hpp"

namespace {

struct FlagSet {
  CLI::Option* graph = nullptr;
  CLI::Option* family = nullptr;
  CLI::Option* dims = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* particles = nullptr;
  CLI::Option* k = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* field = nullptr;
  CLI::Option* constraint = nullptr;
  CLI::Option* delta_gap = nullptr;
  CLI::Option* shift_imag = nullptr;
  CLI::Option* count = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* dense_cap = nullptr;
  CLI::Option* enum_cap = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* config = nullptr;
};

// One shared value store: only a single subcommand parses per invocation.
struct Store {
  xxz::ExperimentConfig cfg;
  std::string config_file;
};

FlagSet attach_options(CLI::App* sub, Store& s) {
  FlagSet f;
  f.config = sub->add_option("--config", s.config_file,
                             "JSON config mirroring the flags; explicit flags "
                             "override its values");
  f.graph = sub->add_option("--graph", s.cfg.graph_file,
                            "graph JSON file (vertex_count, edges, labels)");
  f.family = sub->add_option("--family", s.cfg.family,
                             "lattice family: path | strip | grid2d");
  f.dims = sub->add_option("--dims", s.cfg.dims, "lattice dimensions")
               ->delimiter(',');
  f.delta = sub->add_option("--delta", s.cfg.delta, "anisotropy Delta > 1");
  f.particles = sub->add_option("--particles", s.cfg.particles,
                                "particle number N");
  f.k = sub->add_option("--k", s.cfg.k, "droplet excess-surface parameter");
  f.lambda = sub->add_option("--lambda", s.cfg.lambda,
                             "regularization weight (default: floor "
                             "k(1-1/Delta)/2)");
  f.field = sub->add_option(
      "--field", s.cfg.field,
      "field mode: none|compensating|restoring|random|file:<path>");
  f.constraint = sub->add_option("--constraint", s.cfg.constraint,
                                 "enumeration domain: none | bulk");
  f.delta_gap = sub->add_option("--delta-gap", s.cfg.delta_gap,
                                "gap-hypothesis width parameter");
  f.shift_imag = sub->add_option("--shift-imag", s.cfg.shift_imag,
                                 "imaginary part of the resolvent energy");
  f.count = sub->add_option("--count", s.cfg.count,
                            "number of states / eigenvalues to report");
  f.out = sub->add_option("--out", s.cfg.out_dir, "artifact directory");
  f.seed = sub->add_option("--seed", s.cfg.seed, "deterministic RNG seed");
  f.dense_cap = sub->add_option("--dense-cap", s.cfg.dense_cap,
                                "max dimension for dense eigensolves");
  f.enum_cap = sub->add_option("--enum-cap", s.cfg.enum_cap,
                               "max configurations to enumerate");
  f.workers = sub->add_option("--workers", s.cfg.workers,
                              "threads for operator application");
  return f;
}

void apply_config_json(const std::string& path, xxz::ExperimentConfig& cfg) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(xxz::io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument("config file " + path +
                                ": root must be an object");
  for (const auto& [key, val] : doc.items()) {
    try {
      if (key == "graph") cfg.graph_file = val.get<std::string>();
      else if (key == "family") cfg.family = val.get<std::string>();
      else if (key == "dims") cfg.dims = val.get<std::vector<int>>();
      else if (key == "delta") cfg.delta = val.get<double>();
      else if (key == "particles") cfg.particles = val.get<int>();
      else if (key == "k") cfg.k = val.get<int>();
      else if (key == "lambda") cfg.lambda = val.get<double>();
      else if (key == "field") cfg.field = val.get<std::string>();
      else if (key == "constraint") cfg.constraint = val.get<std::string>();
      else if (key == "delta_gap") cfg.delta_gap = val.get<double>();
      else if (key == "shift_imag") cfg.shift_imag = val.get<double>();
      else if (key == "count") cfg.count = val.get<int>();
      else if (key == "out") cfg.out_dir = val.get<std::string>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "dense_cap") cfg.dense_cap = val.get<std::uint64_t>();
      else if (key == "enum_cap") cfg.enum_cap = val.get<std::uint64_t>();
      else if (key == "workers") cfg.workers = val.get<int>();
      else
        throw std::invalid_argument("config." + key + ": unknown key");
    } catch (const nlohmann::json::type_error&) {
      throw std::invalid_argument("config." + key + ": wrong value type");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "xxzgraph: droplet spectra, isoperimetric catalogs, gap certificates "
      "and resolvent-decay checks for XXZ systems on general graphs"};
  app.require_subcommand(1);

  Store store;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"build-graph", "construct a lattice window or validate a graph file"},
      {"spectrum", "eigenvalues of the N-particle operator"},
      {"droplet-bands", "band edges inside the droplet window"},
      {"isoperimetric", "surface-minimizing configuration catalog"},
      {"certify-gap", "two-block spectral-gap certificate"},
      {"ct-verify", "resolvent decay bound over a (delta, E) grid"},
      {"eigenstate-decay", "shell concentration of droplet eigenstates"},
      {"projector-decay", "decay of the low-energy spectral projector"},
      {"oracle-check", "particle-sector block decomposition cross-check"}};
  std::vector<std::pair<CLI::App*, FlagSet>> subs;
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    subs.emplace_back(sub, attach_options(sub, store));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [sub, flags] : subs) {
      if (!sub->parsed()) continue;
      xxz::ExperimentConfig cfg;
      if (flags.config->count()) apply_config_json(store.config_file, cfg);
      // Explicit flags win over config-file values.
      auto take = [](CLI::Option* opt, auto& dst, const auto& src) {
        if (opt->count()) dst = src;
      };
      take(flags.graph, cfg.graph_file, store.cfg.graph_file);
      take(flags.family, cfg.family, store.cfg.family);
      take(flags.dims, cfg.dims, store.cfg.dims);
      take(flags.delta, cfg.delta, store.cfg.delta);
      take(flags.particles, cfg.particles, store.cfg.particles);
      take(flags.k, cfg.k, store.cfg.k);
      take(flags.lambda, cfg.lambda, store.cfg.lambda);
      take(flags.field, cfg.field, store.cfg.field);
      take(flags.constraint, cfg.constraint, store.cfg.constraint);
      take(flags.delta_gap, cfg.delta_gap, store.cfg.delta_gap);
      take(flags.shift_imag, cfg.shift_imag, store.cfg.shift_imag);
      take(flags.count, cfg.count, store.cfg.count);
      take(flags.out, cfg.out_dir, store.cfg.out_dir);
      take(flags.seed, cfg.seed, store.cfg.seed);
      take(flags.dense_cap, cfg.dense_cap, store.cfg.dense_cap);
      take(flags.enum_cap, cfg.enum_cap, store.cfg.enum_cap);
      take(flags.workers, cfg.workers, store.cfg.workers);
      cfg.command = sub->get_name();
      return xxz::run(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
