#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xxz/ct.hpp"
#include "xxz/gap.hpp"
#include "xxz/graph.hpp"
#include "xxz/hamiltonian.hpp"
#include "xxz/io.hpp"
#include "xxz/isoperimetry.hpp"
#include "xxz/spectral.hpp"
#include "xxz/sym_space.hpp"

namespace xxz {

// Resolved invocation of one experiment command. The CLI and the test
// harness both funnel through run(); artifact bytes depend only on these
// fields (never on worker count or wall-clock).
struct ExperimentConfig {
  std::string command;
  std::string graph_file;  // JSON graph; alternative to family/dims
  std::string family;      // path | strip | grid2d
  std::vector<int> dims;
  double delta = 2.0;
  int particles = 1;
  int k = 0;
  double lambda = -1.0;  // < 0 selects the floor k(1-1/Delta)/2
  std::string field = "none";  // none|compensating|restoring|random|file:<path>
  std::string constraint = "bulk";  // isoperimetric enumeration domain
  double delta_gap = 0.8;
  double shift_imag = 0.0;
  int count = 5;
  std::string out_dir = "out";
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t dense_cap = kDefaultDenseCap;
  std::uint64_t enum_cap = kDefaultEnumCap;
  int workers = 1;
};

namespace detail {

inline double unit_from(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline BaseGraph resolve_graph(const ExperimentConfig& cfg) {
  if (!cfg.family.empty() && !cfg.graph_file.empty())
    throw std::invalid_argument(
        "config: give either family/dims or graph, not both");
  if (!cfg.family.empty()) return build_lattice_window(cfg.family, cfg.dims);
  if (!cfg.graph_file.empty()) return parse_graph(io::read_file(cfg.graph_file));
  throw std::invalid_argument(
      "config: one of config.family (with config.dims) or config.graph is "
      "required");
}

inline std::vector<double> resolve_field(const ExperimentConfig& cfg,
                                         const BaseGraph& g) {
  if (cfg.field == "none") return {};
  if (cfg.field == "compensating")
    return compensating_boundary_field(g, cfg.delta, g.max_degree());
  if (cfg.field == "restoring")
    return degree_restoring_field(g, g.max_degree());
  if (cfg.field == "random") {
    std::mt19937_64 rng(cfg.seed);
    std::vector<double> v(static_cast<std::size_t>(g.vertex_count()));
    for (double& x : v) x = unit_from(rng);
    return v;
  }
  if (cfg.field.rfind("file:", 0) == 0) {
    std::istringstream in(io::read_file(cfg.field.substr(5)));
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != g.vertex_count())
      throw std::invalid_argument(
          "config.field: file holds " + std::to_string(v.size()) +
          " values for " + std::to_string(g.vertex_count()) + " vertices");
    validate_field(g, v);
    return v;
  }
  throw std::invalid_argument(
      "config.field: unknown mode '" + cfg.field +
      "' (expected none|compensating|restoring|random|file:<path>)");
}

inline double resolve_lambda(const ExperimentConfig& cfg) {
  return cfg.lambda < 0.0 ? lambda_floor(cfg.delta, cfg.k) : cfg.lambda;
}

// Minimum bulk-constrained surface of the base graph; the droplet threshold
// everything downstream keys off.
inline DropletCatalog bulk_catalog(const ExperimentConfig& cfg,
                                   const BaseGraph& g, int k_max) {
  return brute_force_surface_levels(g, cfg.particles, EnumConstraint::kBulk,
                                    cfg.enum_cap, k_max);
}

inline HamiltonianSpec base_spec(const ExperimentConfig& cfg,
                                 const BaseGraph& g) {
  HamiltonianSpec spec{g};
  spec.particles = cfg.particles;
  spec.delta = cfg.delta;
  spec.field = resolve_field(cfg, g);
  return spec;
}

struct ArtifactSink {
  const ExperimentConfig* cfg;
  std::vector<std::pair<std::string, std::string>> hashes;

  void write(const std::string& name, const std::string& content) {
    io::write_file(std::filesystem::path(cfg->out_dir) / name, content);
    hashes.emplace_back(name, io::json_str(io::fnv_hex(content)));
  }

  // Summary is always written last so it can reference sibling hashes.
  void finish(const std::string& command, const BaseGraph& g,
              const std::vector<std::pair<std::string, std::string>>& results,
              bool pass) {
    std::vector<std::string> dims_json;
    for (int d : cfg->dims) dims_json.push_back(io::json_int(d));
    std::vector<std::pair<std::string, std::string>> input{
        {"graph_hash", io::json_str(io::fnv_hex(io::graph_json(g)))},
        {"vertex_count", io::json_int(g.vertex_count())},
        {"family", io::json_str(cfg->family)},
        {"dims", io::json_arr(dims_json)},
        {"delta", io::json_num(cfg->delta)},
        {"particles", io::json_int(cfg->particles)},
        {"k", io::json_int(cfg->k)},
        {"field", io::json_str(cfg->field)},
        {"seed", io::json_uint(cfg->seed)},
        {"dense_cap", io::json_uint(cfg->dense_cap)},
        {"enum_cap", io::json_uint(cfg->enum_cap)}};
    std::string summary =
        io::json_obj({{"command", io::json_str(command)},
                      {"input", io::json_obj(input)},
                      {"results", io::json_obj(results)},
                      {"artifacts", io::json_obj(hashes)},
                      {"pass", io::json_bool(pass)}}) +
        "\n";
    io::write_file(std::filesystem::path(cfg->out_dir) / "summary.json",
                   summary);
  }
};

}  // namespace detail

inline int cmd_build_graph(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  detail::ArtifactSink sink{&cfg, {}};
  sink.write("graph.json", io::graph_json(g));
  sink.finish("build-graph", g,
              {{"vertex_count", io::json_int(g.vertex_count())},
               {"edge_count", io::json_int(g.edge_count())},
               {"max_degree", io::json_int(g.max_degree())},
               {"regular", io::json_bool(g.regular())}},
              true);
  log << "build-graph: " << g.vertex_count() << " vertices, " << g.edge_count()
      << " edges\n";
  return 0;
}

inline int cmd_spectrum(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  HamiltonianSpec spec = detail::base_spec(cfg, g);
  if (cfg.k > 0) {
    DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
    spec.regularization =
        Regularization{cfg.k, detail::resolve_lambda(cfg), cat.d_min,
                       "isoperimetry(bulk)", SurfaceMode::bulk(g.max_degree())};
  }
  HamiltonianOp op(spec, cfg.workers);
  std::vector<double> values;
  double max_residual = 0.0;
  if (op.dimension() <= cfg.dense_cap) {
    SpectrumResult full = dense_spectrum(op.map(), cfg.dense_cap);
    values.assign(full.values.data(), full.values.data() + full.values.size());
    max_residual = full.max_residual;
  } else {
    LanczosOptions opt;
    opt.count = std::min<std::uint64_t>(
        static_cast<std::uint64_t>(std::max(cfg.count, 1)), op.dimension());
    opt.seed = cfg.seed;
    EigResult low = extremal_eigs(op.map(cfg.workers), opt);
    values.assign(low.values.data(), low.values.data() + low.values.size());
    max_residual = low.residuals.size() ? low.residuals.maxCoeff() : 0.0;
  }
  detail::ArtifactSink sink{&cfg, {}};
  sink.write("spectrum.csv", io::spectrum_csv(values));
  sink.finish("spectrum", g,
              {{"dimension", io::json_uint(op.dimension())},
               {"values_written", io::json_uint(values.size())},
               {"max_residual", io::json_num(max_residual)}},
              true);
  log << "spectrum: wrote " << values.size() << " eigenvalues\n";
  return 0;
}

inline int cmd_droplet_bands(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
  Thresholds th = thresholds(cat, cfg.delta, std::max(cfg.k, 1));
  HamiltonianOp op(detail::base_spec(cfg, g), cfg.workers);

  std::vector<double> in_window;
  if (op.dimension() <= cfg.dense_cap) {
    SpectrumResult full = dense_spectrum(op.map(), cfg.dense_cap);
    for (Eigen::Index i = 0; i < full.values.size(); ++i)
      if (full.values[i] > th.window_lo && full.values[i] < th.window_hi)
        in_window.push_back(full.values[i]);
  } else {
    LanczosOptions opt;
    opt.seed = cfg.seed;
    opt.tol = 1e-8;
    Eigen::VectorXd low = eigenvalues_below(op.map(cfg.workers), th.window_hi, opt);
    for (Eigen::Index i = 0; i < low.size(); ++i)
      if (low[i] > th.window_lo && low[i] < th.window_hi)
        in_window.push_back(low[i]);
  }
  if (in_window.empty())
    throw std::runtime_error("droplet-bands: no eigenvalues inside the window (" +
                             io::format_g17(th.window_lo) + "," +
                             io::format_g17(th.window_hi) + ")");
  auto [lo, hi] = extract_band_edges(in_window, 0.012);

  std::vector<std::pair<std::string, std::string>> results{
      {"window", io::json_arr({io::json_num(th.window_lo),
                               io::json_num(th.window_hi)})},
      {"in_window", io::json_uint(in_window.size())},
      {"band_lo", io::json_num(lo)},
      {"band_hi", io::json_num(hi)}};
  if (cfg.family == "path") {
    auto [plo, phi] = chain_band(cfg.delta, cfg.particles);
    results.emplace_back("predicted_lo", io::json_num(plo));
    results.emplace_back("predicted_hi", io::json_num(phi));
    results.emplace_back("err_lo", io::json_num(std::abs(lo - plo)));
    results.emplace_back("err_hi", io::json_num(std::abs(hi - phi)));
  }
  detail::ArtifactSink sink{&cfg, {}};
  sink.write("spectrum.csv", io::spectrum_csv(in_window));
  sink.write("catalog.json", io::catalog_json(cat));
  sink.finish("droplet-bands", g, results, true);
  log << "droplet-bands: " << in_window.size() << " states in window, band ["
      << lo << "," << hi << "]\n";
  return 0;
}

inline int cmd_isoperimetric(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  EnumConstraint constraint;
  if (cfg.constraint == "bulk")
    constraint = EnumConstraint::kBulk;
  else if (cfg.constraint == "none")
    constraint = EnumConstraint::kNone;
  else
    throw std::invalid_argument("config.constraint: unknown value '" +
                                cfg.constraint + "' (expected none|bulk)");
  DropletCatalog cat =
      brute_force_surface_levels(g, cfg.particles, constraint, cfg.enum_cap,
                                 std::max(cfg.k, 1));
  std::vector<std::pair<std::string, std::string>> results{
      {"D_min", io::json_int(cat.d_min)},
      {"second_level", io::json_int(cat.second_level)},
      {"minimizer_count", io::json_uint(cat.minimizers.size())}};
  std::vector<std::string> sizes;
  for (int kk = 0; kk <= cat.k_max; ++kk)
    sizes.push_back(io::json_uint(droplet_set(cat, kk).size()));
  results.emplace_back("k_set_sizes", io::json_arr(sizes));

  bool pass = true;
  if (!cfg.family.empty()) {
    try {
      auto analytic = analytic_minimizers(cfg.family, cfg.dims, cfg.particles);
      bool match = analytic == cat.minimizers;
      results.emplace_back("analytic_match", io::json_bool(match));
      pass = match;
    } catch (const std::invalid_argument& e) {
      results.emplace_back("analytic_note", io::json_str(e.what()));
    }
  }
  detail::ArtifactSink sink{&cfg, {}};
  sink.write("catalog.json", io::catalog_json(cat));
  sink.finish("isoperimetric", g, results, pass);
  log << "isoperimetric: D_min=" << cat.d_min
      << " second=" << cat.second_level
      << " minimizers=" << cat.minimizers.size() << "\n";
  return pass ? 0 : 1;
}

inline int cmd_certify_gap(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
  HamiltonianOp op(detail::base_spec(cfg, g), cfg.workers);

  std::vector<std::pair<std::string, std::string>> results;
  // The chain closed form applies only for Delta > 4k+1; outside that range
  // the numeric certificate below still stands on its own.
  if (cfg.family == "path" && cfg.k >= 1 && cfg.delta > 4.0 * cfg.k + 1.0) {
    auto [glo, ghi] = chain_gamma(cfg.delta, cfg.k);
    GapCertificate bulk = chain_bulk_certificate(cfg.delta, cfg.k);
    results.emplace_back("chain_gamma",
                         io::json_arr({io::json_num(glo), io::json_num(ghi)}));
    results.emplace_back(
        "chain_bulk_interval",
        io::json_arr({io::json_num(bulk.interval_lo),
                      io::json_num(bulk.interval_hi)}));
  }

  Partition part = partition_by_surface(
      op.space(), SurfaceMode::bulk(g.max_degree()), cat.d_min + cfg.k);
  GapCertificate cert = certify(op, part);

  const CertificateVerification* check_ptr = nullptr;
  CertificateVerification check;
  bool pass = true;
  if (!cert.empty) {
    std::vector<double> values;
    if (op.dimension() <= cfg.dense_cap) {
      SpectrumResult full = dense_spectrum(op.map(), cfg.dense_cap);
      values.assign(full.values.data(),
                    full.values.data() + full.values.size());
    } else {
      LanczosOptions opt;
      opt.seed = cfg.seed;
      opt.tol = 1e-8;
      Eigen::VectorXd low =
          eigenvalues_below(op.map(cfg.workers), cert.interval_hi, opt);
      values.assign(low.data(), low.data() + low.size());
    }
    check = verify_certificate(cert, values);
    check_ptr = &check;
    pass = check.pass;
    results.emplace_back("certified", io::json_bool(true));
  } else {
    results.emplace_back("certified", io::json_bool(false));
    results.emplace_back("reason", io::json_str(cert.empty_reason));
  }

  detail::ArtifactSink sink{&cfg, {}};
  sink.write("certificate.json", io::certificate_json(cert, check_ptr));
  sink.finish("certify-gap", g, results, pass);
  if (cert.empty)
    log << "certify-gap: empty certificate (" << cert.empty_reason << ")\n";
  else
    log << "certify-gap: interval [" << cert.interval_lo << ","
        << cert.interval_hi << "] "
        << (pass ? "verified" : "REFUTED") << "\n";
  return pass ? 0 : 1;
}

inline int cmd_ct_verify(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
  HamiltonianSpec spec = detail::base_spec(cfg, g);
  spec.regularization =
      Regularization{cfg.k, detail::resolve_lambda(cfg), cat.d_min,
                     "isoperimetry(bulk)", SurfaceMode::bulk(g.max_degree())};
  HamiltonianOp op(spec, cfg.workers);

  CTGrid grid;
  grid.shift_imag = cfg.shift_imag;
  grid.dense_cap = cfg.dense_cap;
  CTReport report = verify_ct_grid(op, grid);
  bool pass = report.violations == 0;

  detail::ArtifactSink sink{&cfg, {}};
  sink.write("ct_report.csv", io::ct_report_csv(report));
  sink.finish("ct-verify", g,
              {{"rows", io::json_uint(report.rows.size())},
               {"violations", io::json_int(report.violations)},
               {"max_ratio", io::json_num(report.max_ratio)},
               {"droplet_count", io::json_uint(report.droplet_count)},
               {"max_distance", io::json_int(report.max_distance)},
               {"shift_imag", io::json_num(cfg.shift_imag)}},
              pass);
  log << "ct-verify: " << report.rows.size() << " rows, "
      << report.violations << " violations, max ratio " << report.max_ratio
      << "\n";
  return pass ? 0 : 1;
}

inline int cmd_eigenstate_decay(const ExperimentConfig& cfg,
                                std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
  HamiltonianOp op(detail::base_spec(cfg, g), cfg.workers);
  SpectrumResult full = dense_spectrum(op.map(), cfg.dense_cap);
  double e_th = 0.5 * (1.0 - 1.0 / cfg.delta) * (cat.d_min + cfg.k);

  bool pass = true;
  std::vector<std::string> states;
  std::string shells_json;
  int used = 0;
  for (Eigen::Index i = 0;
       i < full.values.size() && used < std::max(cfg.count, 1); ++i) {
    if (!(full.values[i] < e_th)) break;
    EigenstateDecayReport rep = eigenstate_decay_check(
        op, full.values[i], full.vectors.col(i), cfg.k, cat.d_min,
        SurfaceMode::bulk(g.max_degree()));
    bool ok = rep.all_shells_pass && rep.fitted_rate >= rep.gamma - 0.02;
    pass = pass && ok;
    states.push_back(io::json_obj(
        {{"E", io::json_num(rep.e)},
         {"gamma", io::json_num(rep.gamma)},
         {"constant", io::json_num(rep.constant)},
         {"fitted_rate", io::json_num(rep.fitted_rate)},
         {"shells_used", io::json_int(rep.shells_used)},
         {"all_shells_pass", io::json_bool(rep.all_shells_pass)},
         {"pass", io::json_bool(ok)}}));
    if (used == 0) shells_json = io::shells_json(rep.shells);
    ++used;
  }
  if (used == 0)
    throw std::runtime_error(
        "eigenstate-decay: no eigenvalues below the threshold " +
        io::format_g17(e_th));

  detail::ArtifactSink sink{&cfg, {}};
  sink.finish("eigenstate-decay", g,
              {{"e_threshold", io::json_num(e_th)},
               {"states", io::json_arr(states)},
               {"ground_state_shells", shells_json}},
              pass);
  log << "eigenstate-decay: " << used << " states checked, "
      << (pass ? "all pass" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

inline int cmd_projector_decay(const ExperimentConfig& cfg,
                               std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  DropletCatalog cat = detail::bulk_catalog(cfg, g, 0);
  HamiltonianOp op(detail::base_spec(cfg, g), cfg.workers);
  ProjectorDecayReport rep = projector_decay_check(
      op, cfg.delta_gap, cfg.k, cat.d_min, SurfaceMode::bulk(g.max_degree()),
      cfg.dense_cap);
  bool pass = rep.fitted_rate >= rep.eta - 0.02;

  detail::ArtifactSink sink{&cfg, {}};
  sink.finish("projector-decay", g,
              {{"e_threshold", io::json_num(rep.e_threshold)},
               {"gap_lo", io::json_num(rep.gap_lo)},
               {"delta_gap", io::json_num(cfg.delta_gap)},
               {"eta", io::json_num(rep.eta)},
               {"fitted_rate", io::json_num(rep.fitted_rate)},
               {"projector_rank", io::json_int(rep.projector_rank)},
               {"shells_used", io::json_int(rep.shells_used)},
               {"shells", io::shells_json(rep.shells)}},
              pass);
  log << "projector-decay: eta=" << rep.eta << " fitted=" << rep.fitted_rate
      << " over " << rep.shells_used << " shells "
      << (pass ? "pass" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

inline int cmd_oracle_check(const ExperimentConfig& cfg, std::ostream& log) {
  BaseGraph g = detail::resolve_graph(cfg);
  std::vector<double> field = detail::resolve_field(cfg, g);
  Eigen::SparseMatrix<double> full =
      full_spin_hamiltonian(g, cfg.delta, field);
  SectorReport rep = sector_blocks(full, g, cfg.delta, field);
  bool pass = rep.max_leakage <= 1e-12 && rep.max_deviation <= 1e-12;

  std::vector<std::string> per_n;
  for (double d : rep.block_deviation) per_n.push_back(io::json_num(d));
  detail::ArtifactSink sink{&cfg, {}};
  sink.finish("oracle-check", g,
              {{"max_leakage", io::json_num(rep.max_leakage)},
               {"max_deviation", io::json_num(rep.max_deviation)},
               {"block_deviation", io::json_arr(per_n)}},
              pass);
  log << "oracle-check: leakage " << rep.max_leakage << ", deviation "
      << rep.max_deviation << (pass ? " (pass)" : " (FAIL)") << "\n";
  return pass ? 0 : 1;
}

// Dispatch; throws std::exception subclasses on configuration errors, returns
// nonzero when a soundness check fails.
inline int run(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.out_dir.empty())
    throw std::invalid_argument("config.out: output directory is required");
  if (cfg.workers < 1)
    throw std::invalid_argument("config.workers: must be >= 1");
  if (cfg.command == "build-graph") return cmd_build_graph(cfg, log);
  if (cfg.command == "spectrum") return cmd_spectrum(cfg, log);
  if (cfg.command == "droplet-bands") return cmd_droplet_bands(cfg, log);
  if (cfg.command == "isoperimetric") return cmd_isoperimetric(cfg, log);
  if (cfg.command == "certify-gap") return cmd_certify_gap(cfg, log);
  if (cfg.command == "ct-verify") return cmd_ct_verify(cfg, log);
  if (cfg.command == "eigenstate-decay") return cmd_eigenstate_decay(cfg, log);
  if (cfg.command == "projector-decay") return cmd_projector_decay(cfg, log);
  if (cfg.command == "oracle-check") return cmd_oracle_check(cfg, log);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

}  // namespace xxz
