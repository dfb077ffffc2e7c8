// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "seqdesign/bridge.hpp"
#include "seqdesign/config.hpp"
#include "seqdesign/csv.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/generator.hpp"
#include "seqdesign/metrics.hpp"
#include "seqdesign/random.hpp"
#include "seqdesign/studies.hpp"
#include "seqdesign/synthetic.hpp"

namespace fs = std::filesystem;
using namespace seqdesign;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  void note(const std::string& text) {
    if (outcome_.pass) outcome_.detail = text;
  }
  Outcome result() const { return outcome_; }

 private:
  Outcome outcome_;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("seqdesign-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

std::string matrix_text(const Matrix& m) {
  std::string s;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) s += (c ? "," : "") + format_double(m(r, c));
    s += "\n";
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. Sequential nearest-neighbour generation reproduces every reference design.
Outcome memorization() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  const auto problem = make_synthetic_problem("linear-sum", 6);
  const Dataset ref = sample_synthetic_dataset(problem, 500, 101);
  const Matrix perf = ref.performances();
  const Matrix params = ref.parameters();
  {
    auto f = perf.column(0);
    std::sort(f.begin(), f.end());
    check.expect(std::adjacent_find(f.begin(), f.end()) == f.end(), "performances are not distinct");
  }

  RegressorSpec spec;
  spec.backend = BackendKind::kKnn;
  spec.neighbors = 1;
  GenerationTask task;
  task.conditions = perf;
  const auto result = generate(ref, spec, task);

  // Oracle: min-max scale by hand, then at every step confirm by brute force
  // that the nearest reference row to the query prefix is the row itself at
  // distance 0.
  const Matrix& raw = ref.rows();
  std::vector<double> lo(raw.cols()), span(raw.cols());
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    const auto col = raw.column(c);
    lo[c] = *std::min_element(col.begin(), col.end());
    span[c] = *std::max_element(col.begin(), col.end()) - lo[c];
  }
  auto z = [&](std::size_t r, std::size_t c) { return (raw(r, c) - lo[c]) / span[c]; };
  std::size_t replay_hits = 0;
  for (std::size_t q = 0; q < raw.rows(); ++q) {
    bool all_steps = true;
    for (std::size_t step = 0; step < 6 && all_steps; ++step) {
      const std::size_t width = 1 + step;  // performance + generated prefix
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < raw.rows(); ++r) {
        double d = 0.0;
        for (std::size_t c = 0; c < width; ++c) d += (z(r, c) - z(q, c)) * (z(r, c) - z(q, c));
        if (d < best_d) {
          best_d = d;
          best = r;
        }
      }
      all_steps = best == q && best_d == 0.0;
    }
    if (all_steps) ++replay_hits;
  }
  check.expect(replay_hits == 500, "brute-force replay matched " + std::to_string(replay_hits) + "/500 rows");

  // Bit-exact in normalized space: the output must be exactly the
  // denormalized image of the normalized reference value.
  const auto norm = NormalizationState::fit(raw, NormalizationMode::kMinMax);
  std::size_t exact = 0, close = 0;
  for (std::size_t r = 0; r < 500; ++r) {
    bool row_exact = true, row_close = true;
    for (std::size_t j = 0; j < 6; ++j) {
      const std::size_t col = 1 + j;
      const double expected = norm.denormalize_value(col, norm.normalize_value(col, params(r, j)));
      row_exact = row_exact && result.designs(r, j) == expected;
      row_close = row_close && std::abs(result.designs(r, j) - params(r, j)) <= 1e-9;
    }
    exact += row_exact;
    close += row_close;
  }
  const double elapsed = seconds_since(start);
  check.expect(exact == 500, "bit-exact rows " + std::to_string(exact) + "/500");
  check.expect(close == 500, "rows within 1e-9: " + std::to_string(close) + "/500");
  check.expect(elapsed < 60.0, "took " + format_double(elapsed) + " s");
  check.note("500/500 reproduced (bit-exact in normalized space, <=1e-9 raw) in " +
             std::to_string(static_cast<int>(elapsed * 1000)) + " ms");
  return check.result();
}

// 2. PRD closed forms.
Outcome prd_closed_form() {
  Checker check;
  Rng rng(202);
  const Matrix samples = random_matrix(1000, 3, rng);
  const auto same = metrics::build_state_space(samples, samples, 20, 7);
  check.expect(same.reference == same.generated, "identical sets gave different histograms");
  const auto curve = metrics::prd_curve(same, 1001);
  double worst = 0.0;
  for (std::size_t i = 0; i < curve.resolution; ++i) {
    const double l = curve.lambdas[i];
    worst = std::max(worst, std::abs(curve.precision[i] - std::min(l, 1.0)));
    worst = std::max(worst, std::abs(curve.recall[i] - std::min(1.0, 1.0 / l)));
  }
  check.expect(worst <= 1e-12, "max deviation from closed form " + format_double(worst));
  check.expect(curve.lambdas[500] == 1.0 && curve.precision[500] == 1.0 && curve.recall[500] == 1.0,
               "(1, 1) is not exactly on the curve at lambda = 1");

  const auto disjoint = metrics::prd_curve({{1.0, 0.0}, {0.0, 1.0}, {}}, 1001);
  bool origin = true;
  for (std::size_t i = 0; i < disjoint.resolution; ++i) {
    origin = origin && disjoint.precision[i] == 0.0 && disjoint.recall[i] == 0.0;
  }
  check.expect(origin, "disjoint histograms left the origin");
  // Same property from sample sets with disjoint supports.
  Matrix far = samples;
  for (std::size_t r = 0; r < far.rows(); ++r) far(r, 0) += 100.0;
  const auto split = metrics::prd_curve(metrics::build_state_space(samples, far, 20, 3), 1001);
  bool origin_samples = true;
  for (std::size_t i = 0; i < split.resolution; ++i) {
    origin_samples = origin_samples && split.precision[i] == 0.0 && split.recall[i] == 0.0;
  }
  check.expect(origin_samples, "disjoint sample sets left the origin");
  check.note("P=Q max deviation " + format_double(worst) + ", (1,1) exact at lambda=1, disjoint -> (0,0)");
  return check.result();
}

double brute_mmd(const Matrix& x, const Matrix& y, double sigma) {
  auto k = [sigma](std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return std::exp(-d / (2.0 * sigma * sigma));
  };
  const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (i != j) xx += k(x.row(i), x.row(j));
    }
    for (std::size_t j = 0; j < y.rows(); ++j) xy += k(x.row(i), y.row(j));
  }
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.rows(); ++j) {
      if (i != j) yy += k(y.row(i), y.row(j));
    }
  }
  return xx / (n * (n - 1)) + yy / (m * (m - 1)) - 2.0 * xy / (n * m);
}

// 3. MMD equals its brute-force definition.
Outcome mmd_oracle() {
  Checker check;
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49), m = 2 + rng.below(49), d = 1 + rng.below(5);
    const double sigma = rng.uniform(0.1, 2.0);
    const Matrix x = random_matrix(n, d, rng);
    const Matrix y = random_matrix(m, d, rng, -0.5, 1.5);
    worst = std::max(worst, std::abs(metrics::mmd_squared(x, y, {sigma}) - brute_mmd(x, y, sigma)));
  }
  check.expect(worst <= 1e-12, "max deviation from brute force " + format_double(worst));
  const Matrix hand{{0.0}, {1.0}};
  const double h = metrics::mmd_squared(hand, hand, {1.0});
  check.expect(std::abs(h - (-0.39347)) <= 1e-5, "hand case gave " + format_double(h));
  double self_max = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = random_matrix(2 + rng.below(60), 1 + rng.below(4), rng);
    self_max = std::max(self_max, metrics::mmd_squared(x, x, {metrics::mmd_default_bandwidth(x, x)}));
  }
  check.expect(self_max <= 1e-12, "MMD^2(X, X) reached " + format_double(self_max));
  check.note("200 instances within " + format_double(worst) + "; hand case " + format_double(h) +
             "; max MMD^2(X,X) " + format_double(self_max));
  return check.result();
}

ExperimentConfig config_from(const std::string& text, const fs::path& out) {
  auto cfg = parse_config(text);
  cfg.output_directory = out;
  return cfg;
}

// 4. Error falls with the reference size on the quadratic bowl.
Outcome reference_size_trend() {
  Checker check;
  const auto cfg = config_from(R"({"seed": 1,
      "dataset": {"kind": "synthetic", "problem": "quadratic-bowl", "dimension": 3, "rows": 2400},
      "regressor": {"backend": "kernel", "bandwidth": 0.02},
      "study": {"sweep_condition_count": 500, "workers": 0}})",
                               scratch("refsize"));
  const auto out = run_reference_size_sweep(cfg, {100, 200, 400, 800, 1600});
  const auto& t = out.table("refsize_sweep");
  const double first = table_value(t, 0, "mape_f");
  const double last = table_value(t, 4, "mape_f");
  check.expect(last < first, "MAPE@1600 " + format_double(last) + " >= MAPE@100 " + format_double(first));
  check.expect(last < 10.0, "MAPE@1600 " + format_double(last) + " >= 10%");
  std::ostringstream s;
  s.precision(4);
  s << "MAPE% by size:";
  for (std::size_t r = 0; r < t.rows.size(); ++r) s << " " << t.rows[r][0] << "=" << table_value(t, r, "mape_f");
  check.note(s.str());
  return check.result();
}

// 5. Inpainting contracts.
Outcome inpainting() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  const auto problem = make_synthetic_problem("hierarchical", 5);
  const Dataset data = sample_synthetic_dataset(problem, 1200, 505);
  const auto [ref, test] = split_reference_test(data, 0.7, 5);
  const Matrix conditions = test.performances();
  const Matrix designs = test.parameters();
  RegressorSpec spec;
  const auto evaluate = [&](const Matrix& d) { return problem.evaluate_all(d); };

  GenerationTask none_missing;
  none_missing.conditions = conditions;
  none_missing.known_mask.assign(5, true);
  none_missing.known_values = designs;
  const auto full = inpaint(ref, spec, none_missing);
  check.expect(full.designs == designs, "0 missing changed the input");
  check.expect(full.fit_count == 0, "0 missing still fitted a model");
  const auto full_errors = performance_errors(conditions, evaluate(full.designs));
  check.expect(full_errors.mape[0] == 0.0 && full_errors.mape[1] == 0.0, "0 missing gave non-zero MAPE");

  GenerationTask plain;
  plain.conditions = conditions;
  plain.noise_std = 1e-4;
  plain.noise_seed = 55;
  GenerationTask all_missing = plain;
  all_missing.known_mask.assign(5, false);
  check.expect(matrix_text(generate(ref, spec, plain).designs) ==
                   matrix_text(inpaint(ref, spec, all_missing).designs),
               "all-missing differs from plain generation");

  Rng rng(5050);
  bool kept = true;
  for (int trial = 0; trial < 20; ++trial) {
    GenerationTask task;
    task.conditions = conditions;
    task.known_mask.resize(5);
    std::vector<std::size_t> known;
    for (std::size_t j = 0; j < 5; ++j) {
      task.known_mask[j] = rng.below(2) == 1;
      if (task.known_mask[j]) known.push_back(j);
    }
    if (!known.empty()) task.known_values = designs.select_cols(known);
    task.order = OrderPolicy::random(rng.next_u64());
    const auto result = inpaint(ref, spec, task);
    for (std::size_t r = 0; r < designs.rows(); ++r) {
      for (std::size_t j : known) kept = kept && result.designs(r, j) == designs(r, j);
    }
  }
  check.expect(kept, "a known parameter changed during inpainting");

  // Fig. 5 style harness end to end.
  const auto cfg = config_from(R"({"seed": 9,
      "dataset": {"kind": "synthetic", "problem": "hierarchical", "dimension": 5, "rows": 3000},
      "generation": {"condition_count": 500}, "study": {"workers": 0}})",
                               scratch("inpaint"));
  const auto sweep = run_inpainting_sweep(cfg, {}, 3).table("inpaint_sweep");
  const double elapsed = seconds_since(start);
  check.expect(sweep.rows.size() == 6, "sweep produced " + std::to_string(sweep.rows.size()) + " rows");
  check.expect(table_value(sweep, 0, "mape_drag") == 0.0, "sweep count 0 is not exact");
  check.expect(elapsed < 300.0, "took " + format_double(elapsed) + " s");
  check.note("0-missing identity, all-missing == generate, known values kept over 20 masks; sweep in " +
             std::to_string(static_cast<int>(elapsed * 1000)) + " ms");
  return check.result();
}

// 6. Repeated conditions with and without noise.
Outcome consistency_and_noise() {
  Checker check;
  const std::string text = R"({"seed": 6,
      "dataset": {"kind": "synthetic", "problem": "quadratic-bowl", "dimension": 4, "rows": 3000}})";
  const auto quiet = run_noise_study(config_from(text, scratch("noise0")), 0.0, 1500);
  const auto& qp = quiet.table("noise_parameters");
  bool zero = true;
  for (std::size_t r = 0; r < qp.rows.size(); ++r) zero = zero && table_value(qp, r, "std") == 0.0;
  check.expect(zero, "noise-free repeats are not identical");
  const auto& qd = quiet.table("noise_designs");
  bool rows_equal = qd.rows.size() == 1500;
  for (const auto& row : qd.rows) rows_equal = rows_equal && row == qd.rows.front();
  check.expect(rows_equal, "noise-free design rows differ");

  const auto a_dir = scratch("noise_a"), b_dir = scratch("noise_b");
  const auto noisy = run_noise_study(config_from(text, a_dir), 1e-4, 1500);
  run_noise_study(config_from(text, b_dir), 1e-4, 1500);
  const auto& np = noisy.table("noise_parameters");
  bool spread = true;
  for (std::size_t r = 0; r < np.rows.size(); ++r) spread = spread && table_value(np, r, "std") > 0.0;
  check.expect(spread, "noise did not spread every parameter");
  const double mape = table_value(noisy.table("noise_performance"), 0, "mape");
  check.expect(std::isfinite(mape), "performance MAPE is not finite");
  bool identical = true;
  for (const char* f : {"noise_designs.csv", "noise_parameters.csv", "noise_performance.csv", "noise_designs.svg"}) {
    identical = identical && read_text_file(a_dir / f) == read_text_file(b_dir / f);
  }
  check.expect(identical, "equal seeds gave different bytes");
  check.note("std 0 without noise; min std with noise " + [&] {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < np.rows.size(); ++r) lo = std::min(lo, table_value(np, r, "std"));
    return format_double(lo);
  }() + "; MAPE " + format_double(mape) + "%; reruns byte-identical");
  return check.result();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  }
  return files;
}

// 7. Every CLI study, run twice, writes identical bytes.
Outcome cli_determinism(const std::string& cli) {
  Checker check;
  const fs::path root = scratch("cli");
  const fs::path config = root / "study.json";
  write_text_file(config, R"({"seed": 77,
    "dataset": {"kind": "synthetic", "problem": "hierarchical", "dimension": 4, "rows": 600},
    "regressor": {"backend": "kernel"},
    "generation": {"condition_count": 60},
    "metrics": {"prd_seeds": 2, "prd_resolution": 101},
    "study": {"repeats": 3, "sizes": [50, 150, 400], "sweep_condition_count": 60,
              "repeats_per_count": 2, "repeat_count": 100, "noise_std": 0.0001,
              "num_reference_sets": 3, "workers": 0}})");
  const std::vector<std::string> commands{"gen", "inpaint", "eval", "sweep-refsize", "sweep-inpaint",
                                          "study-order", "study-noise", "study-refsets", "plot"};
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    for (const auto& cmd : commands) {
      const std::string line = "\"" + cli + "\" " + cmd + " --config \"" + config.string() + "\" --out \"" +
                               out.string() + "\" > /dev/null";
      const int rc = std::system(line.c_str());
      check.expect(rc == 0, cmd + " exited with " + std::to_string(rc));
    }
    runs.push_back(snapshot(out));
  }
  std::size_t csv = 0, svg = 0;
  for (const auto& [name, _] : runs[0]) {
    csv += name.ends_with(".csv");
    svg += name.ends_with(".svg");
  }
  check.expect(runs[0] == runs[1], "reruns differ");
  for (const char* f : {"generated_designs.csv", "inpainted_designs.csv", "inpaint_metrics.csv",
                        "eval_metrics.csv", "eval_prd.csv", "eval_prd.svg", "refsize_sweep.csv",
                        "refsize_sweep.svg", "inpaint_sweep.csv", "inpaint_sweep.svg", "order_study.csv",
                        "order_study.svg", "noise_designs.csv", "noise_designs.svg", "noise_parameters.csv",
                        "noise_performance.csv", "refsets_designs.csv", "refsets_designs.svg",
                        "refsets_summary.csv"}) {
    check.expect(runs[0].contains(f), std::string("missing output ") + f);
  }
  check.note(std::to_string(commands.size()) + " subcommands, " + std::to_string(csv) + " CSV + " +
             std::to_string(svg) + " SVG files byte-identical across reruns");
  return check.result();
}

// 8 (client half). The remote backend against the bundled stub.
Outcome bridge_client_half() {
  Checker check;
  bridge::StubServer stub;
  stub.start();
  Rng rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    bridge::FitPredictRequest r;
    const std::size_t n = 2 + rng.below(200), d = 1 + rng.below(6);
    r.x_train = random_matrix(n, d, rng);
    r.y_train.resize(n);
    for (double& v : r.y_train) v = rng.normal(0.0, 3.0);
    r.x_query = random_matrix(1 + rng.below(20), d, rng);
    r.request_id = bridge::make_request_id(r);
    const auto remote = bridge::BridgeClient(stub.endpoint()).fit_predict(r).means;
    const auto local = fit(RegressorSpec{}, r.x_train, r.y_train).predict_mean(r.x_query);
    for (std::size_t i = 0; i < local.size(); ++i) worst = std::max(worst, std::abs(remote[i] - local[i]));
  }
  check.expect(worst <= 1e-9, "max remote/local gap " + format_double(worst));
  bridge::FitPredictRequest big;
  big.x_train = Matrix(10001, 1, 0.0);
  big.y_train.assign(10001, 0.0);
  big.x_query = Matrix{{0.0}};
  bool client_side = false;
  try {
    bridge::BridgeClient("http://127.0.0.1:9", 200, 0).fit_predict(big);
  } catch (const CapacityError&) {
    client_side = true;
  } catch (const Error&) {
  }
  check.expect(client_side, "10,001 rows were not rejected client-side");
  check.expect(bridge::handle_fit_predict({}, bridge::serialize_request(big)).first == 413,
               "stub did not answer 413");
  check.note("100 instances within " + format_double(worst) + "; 10,001 rows rejected client-side and 413 from stub");
  return check.result();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-seqdesign-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 memorization round-trip", memorization},
      {"2 PRD closed form", prd_closed_form},
      {"3 MMD oracle equivalence", mmd_oracle},
      {"4 reference-size trend", reference_size_trend},
      {"5 inpainting contracts", inpainting},
      {"6 consistency and noise", consistency_and_noise},
      {"7 pipeline determinism", [&cli] { return cli_determinism(cli); }},
      {"8 bridge conformance (client half, secondary)", bridge_client_half},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  (" << o.detail << ")" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / ("seqdesign-acceptance-" + std::to_string(::getpid())), ec);
  return failures == 0 ? 0 : 1;
}
