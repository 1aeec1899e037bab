// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "schatten/core/spectral.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/core/stream_io.hpp"
#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/fixtures.hpp"
#include "schatten/multipass.hpp"
#include "schatten/onepass.hpp"
#include "schatten/roworder/roworder_sketch.hpp"

namespace schatten::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitInput = 3;

/// Parameter errors exit 2; errors caused by the input data exit 3.
inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::DuplicateEntry:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::ModeMismatch:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::SparsityExceeded:
    case ErrorKind::StreamDrift:
    case ErrorKind::NoConvergence:
      return kExitInput;
    default:
      return kExitParameter;
  }
}

/// Everything `estimate` and `bench` accept. Size overrides of 0 mean
/// "derive from the defaults".
struct RunConfig {
  std::string algorithm = "onepass";
  int p = 4;
  double epsilon = 0.15;
  std::string kind = "zd";
  std::uint64_t seed = 0;
  std::size_t t = 0;
  std::size_t repetitions = 0;
  std::string aggregate = "mean";
  bool assume_psd = false;
  bool verify_psd = false;
  bool general = false;
  double c_t = 2.0;
  double c_r = 6.0;
  std::size_t sample_budget = 0;
  std::size_t cs_width = 0;
  std::size_t cs_depth = 0;
  std::size_t row_sparsity = 4;
  double c_T = 1.0;
  double c_w = 8.0;
  double c_d = 5.0;
  std::string input;

  std::size_t batch = 1;
  bool no_timing = false;
  int threads = -1;  // -1: take SCHATTEN_THREADS
};

struct GenConfig {
  std::string kind;
  std::size_t m = 4;
  std::size_t copies = 1;
  std::size_t n = 0;
  std::size_t sparsity = 2;
  std::uint64_t seed = 0;
  std::string profile = "uniform";
  double alpha = 1.0;
  std::string values;
  std::string sets;
  bool signed_rows = false;
  std::string mode;
  std::string out;
};

/// Semicolon-separated sets of comma-separated indices: "0,1;2;3,4".
inline std::vector<std::vector<std::size_t>> parse_sets(const std::string& text) {
  std::vector<std::vector<std::size_t>> sets;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    std::vector<std::size_t> set;
    std::stringstream gs(group);
    std::string item;
    while (std::getline(gs, item, ',')) {
      if (item.empty()) continue;
      std::size_t v = 0;
      if (!schatten::detail::parse_number(std::string_view(item), v))
        fail(ErrorKind::InvalidParameter, "cannot parse set element '" + item + "'");
      set.push_back(v);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double v = 0.0;
    if (!schatten::detail::parse_number(std::string_view(item), v))
      fail(ErrorKind::InvalidParameter, "cannot parse value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// Runs the configured algorithm on `stream` with the given seed.
inline SchattenEstimate run_algorithm(const RunConfig& cfg, const MatrixStream& stream,
                                      std::uint64_t seed) {
  const Aggregate mode = parse_aggregate(cfg.aggregate);
  auto optional_size = [](std::size_t v) {
    return v == 0 ? std::optional<std::size_t>{} : std::optional<std::size_t>{v};
  };
  if (cfg.algorithm == "onepass" || cfg.algorithm == "roworder4z") {
    OnepassConfig oc;
    oc.p = cfg.p;
    oc.epsilon = cfg.epsilon;
    oc.kind = rng::parse_generator_kind(cfg.kind);
    oc.seed = seed;
    oc.t = optional_size(cfg.t);
    oc.repetitions = optional_size(cfg.repetitions);
    oc.c_t = cfg.c_t;
    oc.c_r = cfg.c_r;
    oc.psd_asserted = cfg.assume_psd;
    if (cfg.algorithm == "roworder4z") return estimate_4z(stream, oc, mode);
    if (cfg.general || stream.n != stream.m) return estimate_general(stream, oc, mode);
    return estimate_onepass(stream, oc, mode);
  }
  if (cfg.algorithm == "multipass") {
    MultipassConfig mc;
    mc.p = cfg.p;
    mc.epsilon = cfg.epsilon;
    mc.kind = rng::parse_generator_kind(cfg.kind);
    mc.seed = seed;
    mc.t = optional_size(cfg.t);
    mc.repetitions = optional_size(cfg.repetitions);
    mc.c_t = cfg.c_t;
    mc.c_r = cfg.c_r;
    mc.psd_asserted = cfg.assume_psd;
    return estimate_multipass(stream, mc, mode);
  }
  if (cfg.algorithm == "roworder") {
    RowOrderConfig rc;
    rc.p = cfg.p;
    rc.epsilon = cfg.epsilon;
    rc.seed = seed;
    rc.sample_budget = optional_size(cfg.sample_budget);
    rc.cs_width = optional_size(cfg.cs_width);
    rc.cs_depth = optional_size(cfg.cs_depth);
    rc.row_sparsity = cfg.row_sparsity;
    rc.c_T = cfg.c_T;
    rc.c_w = cfg.c_w;
    rc.c_d = cfg.c_d;
    return estimate_roworder(stream, rc);
  }
  fail(ErrorKind::InvalidParameter, "unknown algorithm '" + cfg.algorithm +
                                        "' (expected onepass, multipass, roworder, roworder4z)");
}

/// Checks that do not need the input. Odd p without --assume-psd is refused
/// here so the message can name the flag.
inline void validate_run(const RunConfig& cfg) {
  if (cfg.p % 2 == 1 && !cfg.assume_psd &&
      (cfg.algorithm == "onepass" || cfg.algorithm == "multipass"))
    fail(ErrorKind::RequiresPSD, "odd p = " + std::to_string(cfg.p) +
                                     " is only valid for PSD input; pass --assume-psd "
                                     "(optionally with --verify-psd)");
  if (cfg.algorithm == "onepass" || cfg.algorithm == "multipass" ||
      cfg.algorithm == "roworder4z") {
    (void)rng::parse_generator_kind(cfg.kind);
  }
  (void)parse_aggregate(cfg.aggregate);
}

inline MatrixStream load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) fail(ErrorKind::InvalidParameter, "--input is required");
  MatrixStream s = read_stream_file(cfg.input);
  if (cfg.verify_psd) {
    const DenseMatrix a = materialize(s);
    if (!a.square() || !is_psd(a))
      fail(ErrorKind::RequiresPSD, "--verify-psd: input matrix is not PSD");
  }
  if ((cfg.algorithm == "roworder" || cfg.algorithm == "roworder4z") &&
      s.mode != StreamMode::RowOrder)
    fail(ErrorKind::ModeMismatch, "--algo " + cfg.algorithm + " needs a mode=roworder input");
  return s;
}

inline nlohmann::ordered_json estimate_json(const RunConfig& cfg, const SchattenEstimate& e) {
  nlohmann::ordered_json j;
  j["estimate_pth_power"] = e.value;
  j["p"] = e.p;
  j["algorithm"] = e.algorithm;
  j["epsilon"] = cfg.epsilon;
  if (cfg.algorithm != "roworder") j["kind"] = cfg.kind == "zd_sparse" ? "zd" : cfg.kind;
  j["t"] = e.t;
  j["reps"] = e.repetitions;
  j["aggregate"] = std::string(to_string(e.aggregate));
  j["seed"] = e.seed;
  j["sketch_cells"] = e.sketch_cells;
  j["estimated_bits"] = e.estimated_bits();
  j["updates"] = e.updates;
  j["cells_touched"] = e.cells_touched;
  if (e.passes) j["passes"] = *e.passes;
  if (e.sample_budget) j["T"] = *e.sample_budget;
  if (e.heavy_b_rows) j["K_size"] = *e.heavy_b_rows;
  if (e.heavy_a_rows) j["V_size"] = *e.heavy_a_rows;
  if (e.live_cells) j["live_cells"] = *e.live_cells;
  return j;
}

/// SCHATTEN_THREADS, 0 or unset meaning one worker per hardware thread.
inline unsigned resolve_threads(int requested) {
  long value = requested;
  if (requested < 0) {
    const char* env = std::getenv("SCHATTEN_THREADS");
    value = env ? std::strtol(env, nullptr, 10) : 0;
  }
  if (value <= 0) value = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<unsigned>(value);
}

struct BenchRow {
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double relative_error = 0.0;
  std::size_t sketch_cells = 0;
  std::size_t cells_touched = 0;
  double wall_ms = 0.0;
};

/// CSV with one row per seed base_seed + i, ordered by seed, and a trailing
/// summary row `summary,success_fraction,<f>,batch,<N>,eps,<eps>`.
inline void bench(const RunConfig& cfg, const MatrixStream& stream, std::ostream& out) {
  require(cfg.batch >= 1, ErrorKind::InvalidParameter, "--batch must be >= 1");
  const DenseMatrix a = materialize(stream);
  const double exact = schatten_norm_exact(a, cfg.p);
  std::vector<BenchRow> rows(cfg.batch);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.batch);
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.batch; i = next++) {
      try {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = cfg.seed + i;
        const SchattenEstimate e = run_algorithm(cfg, stream, seed);
        const auto stop = std::chrono::steady_clock::now();
        rows[i].seed = seed;
        rows[i].estimate = e.value;
        rows[i].relative_error =
            exact != 0.0 ? std::abs(e.value - exact) / std::abs(exact) : std::abs(e.value);
        rows[i].sketch_cells = e.sketch_cells;
        rows[i].cells_touched = e.cells_touched;
        rows[i].wall_ms =
            cfg.no_timing ? 0.0
                          : std::chrono::duration<double, std::milli>(stop - start).count();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers =
      std::min<unsigned>(resolve_threads(cfg.threads), static_cast<unsigned>(cfg.batch));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  out << "seed,estimate,exact,relative_error,sketch_cells,cells_touched,wall_ms\n";
  std::size_t successes = 0;
  for (const auto& r : rows) {
    successes += r.relative_error < cfg.epsilon;
    out << r.seed << ',' << format_double(r.estimate) << ',' << format_double(exact) << ','
        << format_double(r.relative_error) << ',' << r.sketch_cells << ',' << r.cells_touched
        << ',' << format_double(r.wall_ms) << '\n';
  }
  out << "summary,success_fraction,"
      << format_double(static_cast<double>(successes) / static_cast<double>(cfg.batch))
      << ",batch," << cfg.batch << ",eps," << format_double(cfg.epsilon) << '\n';
}

inline MatrixStream generate(const GenConfig& g) {
  auto dense_mode = [&](StreamMode fallback) {
    return g.mode.empty() ? fallback : parse_stream_mode(g.mode);
  };
  auto with_mode = [&](MatrixStream s) {
    if (!g.mode.empty()) {
      s.mode = parse_stream_mode(g.mode);
      validate(s);
    }
    return s;
  };
  if (g.kind == "cycle_laplacian")
    return to_stream(fixtures::cycle_laplacian(g.m, g.copies).matrix,
                     dense_mode(StreamMode::Entrywise));
  if (g.kind == "cycle_union_incidence")
    return with_mode(fixtures::cycle_union_incidence(g.m, g.copies, g.signed_rows));
  if (g.kind == "indicator_rows") {
    require(g.n >= 1, ErrorKind::InvalidParameter, "indicator_rows needs --n");
    return with_mode(fixtures::indicator_rows(g.n, parse_sets(g.sets)));
  }
  if (g.kind == "random_psd") {
    require(g.n >= 1, ErrorKind::InvalidParameter, "random_psd needs --n");
    fixtures::SpectrumProfile profile;
    if (g.profile == "uniform")
      profile = fixtures::UniformProfile{};
    else if (g.profile == "power_law")
      profile = fixtures::PowerLawProfile{g.alpha};
    else if (g.profile == "list")
      profile = parse_values(g.values);
    else
      fail(ErrorKind::InvalidParameter,
           "unknown --profile '" + g.profile + "' (expected uniform, power_law, list)");
    return to_stream(fixtures::random_psd(g.n, profile, g.seed).matrix,
                     dense_mode(StreamMode::Entrywise));
  }
  if (g.kind == "random_sparse") {
    require(g.n >= 1, ErrorKind::InvalidParameter, "random_sparse needs --n");
    return with_mode(fixtures::random_sparse(g.n, g.sparsity, g.seed));
  }
  if (g.kind == "diagonal") {
    std::vector<double> values = parse_values(g.values);
    if (values.empty()) {
      require(g.n >= 1, ErrorKind::InvalidParameter, "diagonal needs --values or --n");
      values.assign(g.n, 1.0);
    }
    return to_stream(fixtures::diagonal(values), dense_mode(StreamMode::RowOrder));
  }
  fail(ErrorKind::InvalidParameter,
       "unknown --kind '" + g.kind +
           "' (expected cycle_laplacian, cycle_union_incidence, indicator_rows, "
           "random_psd, random_sparse, diagonal)");
}

inline void add_run_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--algo", cfg.algorithm, "onepass | multipass | roworder | roworder4z");
  cmd.add_option("--p", cfg.p, "Schatten exponent (integer >= 2)");
  cmd.add_option("--eps", cfg.epsilon, "target relative accuracy");
  cmd.add_option("--kind", cfg.kind, "sketch generator: gaussian | zd | identity");
  cmd.add_option("--seed", cfg.seed, "root seed (decimal u64)");
  cmd.add_option("--t", cfg.t, "sketch rows; 0 derives ceil(c_t n^{1-2/p}) or "
                               "ceil(c_t n^{1-1/(p-1)}) for multipass");
  cmd.add_option("--reps", cfg.repetitions, "repetitions; 0 derives ceil(c_r / eps^2)");
  cmd.add_option("--agg", cfg.aggregate, "mean | mom (median of means, groups of ceil(r/9))");
  cmd.add_flag("--assume-psd", cfg.assume_psd, "assert the input is PSD (needed for odd p)");
  cmd.add_flag("--verify-psd", cfg.verify_psd, "check PSD-ness with the exact oracle first");
  cmd.add_flag("--general", cfg.general,
               "treat the input as a general matrix (even p, symmetric embedding)");
  cmd.add_option("--c-t", cfg.c_t, "sketch-size constant c_t");
  cmd.add_option("--c-r", cfg.c_r, "repetition constant c_r");
  cmd.add_option("--T", cfg.sample_budget, "row-order sample budget; 0 derives "
                                           "ceil(c_T n^{1-1/(k+1)} / eps^2)");
  cmd.add_option("--cs-width", cfg.cs_width, "count-sketch width; 0 derives ceil(c_w T log2 n)");
  cmd.add_option("--cs-depth", cfg.cs_depth, "count-sketch depth; 0 derives ceil(c_d log2 n)");
  cmd.add_option("--sparsity", cfg.row_sparsity, "row-order nonzeros bound per row/column");
  cmd.add_option("--c-T", cfg.c_T, "row-order sample-budget constant c_T");
  cmd.add_option("--c-w", cfg.c_w, "count-sketch width constant c_w");
  cmd.add_option("--c-d", cfg.c_d, "count-sketch depth constant c_d");
  cmd.add_option("--input", cfg.input, "stream file (schatten-stream v1)")->required();
}

/// Entry point. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming Schatten p-norm estimation", "schatten"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  RunConfig est_cfg;
  auto* est = app.add_subcommand("estimate", "estimate ||A||_{S_p}^p from a stream file");
  add_run_options(*est, est_cfg);

  RunConfig bench_cfg;
  auto* bench_cmd = app.add_subcommand("bench", "CSV batch over seeds seed..seed+batch-1");
  add_run_options(*bench_cmd, bench_cfg);
  bench_cmd->add_option("--batch", bench_cfg.batch, "number of seeds");
  bench_cmd->add_flag("--no-timing", bench_cfg.no_timing, "report wall_ms as 0");
  bench_cmd->add_option("--threads", bench_cfg.threads,
                        "worker threads; -1 reads SCHATTEN_THREADS (0 = auto)");

  double exact_p = 2.0;
  std::string exact_input;
  auto* exact = app.add_subcommand("exact", "exact ||A||_{S_p}^p via the Jacobi oracle");
  exact->add_option("--p", exact_p, "Schatten exponent (real > 0)");
  exact->add_option("--input", exact_input, "stream file")->required();

  GenConfig gen_cfg;
  auto* gen = app.add_subcommand("gen", "write a fixture as a stream file");
  gen->add_option("--kind", gen_cfg.kind,
                  "cycle_laplacian | cycle_union_incidence | indicator_rows | random_psd | "
                  "random_sparse | diagonal")
      ->required();
  gen->add_option("--m", gen_cfg.m, "cycle length");
  gen->add_option("--copies", gen_cfg.copies, "number of disjoint cycles");
  gen->add_option("--n", gen_cfg.n, "dimension");
  gen->add_option("--sparsity", gen_cfg.sparsity, "nonzeros per row and column (random_sparse)");
  gen->add_option("--seed", gen_cfg.seed, "generator seed");
  gen->add_option("--profile", gen_cfg.profile, "random_psd spectrum: uniform | power_law | list");
  gen->add_option("--alpha", gen_cfg.alpha, "power-law exponent");
  gen->add_option("--values", gen_cfg.values, "comma-separated eigenvalues / diagonal");
  gen->add_option("--sets", gen_cfg.sets, "indicator sets, e.g. \"0,1;2;3,4\"");
  gen->add_flag("--signed", gen_cfg.signed_rows, "signed incidence rows (+1, -1)");
  gen->add_option("--mode", gen_cfg.mode, "override stream mode: turnstile | entrywise | roworder");
  gen->add_option("--out", gen_cfg.out, "output path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  }

  try {
    if (est->parsed()) {
      validate_run(est_cfg);
      const MatrixStream stream = load_input(est_cfg);
      out << estimate_json(est_cfg, run_algorithm(est_cfg, stream, est_cfg.seed)).dump()
          << "\n";
    } else if (bench_cmd->parsed()) {
      validate_run(bench_cfg);
      const MatrixStream stream = load_input(bench_cfg);
      bench(bench_cfg, stream, out);
    } else if (exact->parsed()) {
      require(exact_p > 0.0, ErrorKind::InvalidParameter, "--p must be > 0");
      const MatrixStream stream = read_stream_file(exact_input);
      const SpectralResult spec = singular_values(materialize(stream));
      nlohmann::ordered_json j;
      j["exact_pth_power"] = schatten_power_from_spectrum(spec.singular_values, exact_p);
      j["p"] = exact_p;
      j["n"] = stream.n;
      j["m"] = stream.m;
      j["sigma_max"] = spec.singular_values.empty() ? 0.0 : spec.singular_values.front();
      j["iterations"] = spec.iterations;
      j["off_diagonal_residual"] = spec.off_diagonal_residual;
      out << j.dump() << "\n";
    } else if (gen->parsed()) {
      const MatrixStream s = generate(gen_cfg);
      write_stream_file(gen_cfg.out, s);
      nlohmann::ordered_json j;
      j["generated"] = gen_cfg.kind;
      j["out"] = gen_cfg.out;
      j["n"] = s.n;
      j["m"] = s.m;
      j["mode"] = std::string(to_string(s.mode));
      j["updates"] = s.updates.size();
      out << j.dump() << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return kExitOk;
}

}  // namespace schatten::cli
