#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "gscat/error.hpp"
#include "gscat/experiment.hpp"
#include "gscat/kernel_learning.hpp"
#include "gscat/scattering.hpp"
#include "gscat/wavelet.hpp"

using namespace gscat;
namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  if (!out) fail(ErrorCode::Format, "cannot write " + path);
}

Kernel kernel_from(const std::string& file, const std::string& descriptor, std::size_t random_J, std::uint64_t seed) {
  if (!file.empty()) return load_kernel_file(file, descriptor.empty() ? nullptr : build_from_descriptor(descriptor));
  if (descriptor.empty()) fail(ErrorCode::InvalidParameter, "give --kernel or --group with --random");
  std::mt19937_64 rng(seed);
  return random_parseval_kernel(build_from_descriptor(descriptor), random_J, rng, true, 0.3);
}

int group_table(const std::string& descriptor, const std::string& out) {
  const auto g = build_from_descriptor(descriptor);
  write_text(out, character_table_csv(*g));
  return 0;
}

int wavelet_check(const Kernel& k, int trials, std::uint64_t seed) {
  std::cout << std::setprecision(12);
  std::cout << "group," << k.group().descriptor() << "\nJ," << k.J() << "\n";
  std::cout << "parseval_defect," << parseval_defect(k) << "\n";
  const auto fb = frame_bounds(k, trials, seed);
  std::cout << "frame_A," << fb.A << "\nframe_B," << fb.B << "\n";
  std::cout << "empirical_ratio," << fb.min_ratio << ',' << fb.max_ratio << "\n";
  const bool parseval = is_parseval(k);
  if (parseval) {
    const auto adm = admissibility(k);
    std::cout << "beta," << adm.beta << "\nalpha," << adm.alpha << "\n";
  }
  std::cout << "r,C(r)\n";
  const auto C = calderon_sums(k);
  for (std::size_t r = 0; r < C.size(); ++r) std::cout << r << ',' << C[r] << "\n";
  if (!parseval) {
    std::cerr << "kernel is not Parseval (defect " << parseval_defect(k) << ")\n";
    return 1;
  }
  return 0;
}

int scatter_cmd(const Kernel& k, const std::string& signal_file, std::uint64_t seed, std::size_t M,
                const std::string& out_dir, double budget) {
  Signal f;
  if (signal_file.empty()) {
    std::mt19937_64 rng(seed);
    f = random_signal(k.group_ptr(), rng);
  } else {
    f = load_signal_file(signal_file, k.group_ptr());
  }
  ScatterOptions opt;
  opt.budget = budget;
  const auto out = scatter(k, f, M, opt);
  const auto adm = admissibility(k);
  const double energy = norm_squared(f);
  std::vector<EnergyRow> rows;
  for (std::size_t m = 0; m <= M; ++m) {
    EnergyRow e;
    e.m = m;
    e.sum_S = out.layer_feature_energy[m];
    e.sum_U = out.layer_propagated_energy[m];
    if (adm.beta > 0.0) e.tail_bound = std::pow(adm.alpha, double(m)) * energy;
    rows.push_back(e);
  }
  std::ostringstream es;
  write_energies_csv(es, rows);
  if (out_dir.empty()) {
    std::cout << es.str();
  } else {
    fs::create_directories(out_dir);
    write_text((fs::path(out_dir) / "energies.csv").string(), es.str());
    for (const auto& [p, s] : out.features) save_signal_file((fs::path(out_dir) / (p.file_stem() + ".csv")).string(), s);
  }
  std::cout << std::setprecision(12) << "energy," << energy << "\ncaptured," << out.feature_energy() << "\ntail,"
            << out.tail_energy() << "\n";
  return 0;
}

int kernel_learn(const std::string& recipe, const std::string& descriptor, const std::string& manifest,
                 const std::string& out) {
  const auto g = build_from_descriptor(descriptor);
  std::ifstream in(manifest);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open manifest " + manifest);
  std::vector<Signal> signals;
  std::vector<std::string> labels;
  const auto base = fs::path(manifest).parent_path();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::Format, "manifest line without label: " + line);
    fs::path file = line.substr(0, comma);
    if (file.is_relative()) file = base / file;
    signals.push_back(load_signal_file(file.string(), g));
    labels.push_back(line.substr(comma + 1));
  }
  const auto k = learn_kernel(parse_recipe(recipe), signals, labels);
  std::ostringstream os;
  write_kernel_csv(os, k);
  write_text(out, os.str());
  return 0;
}

int kernel_prototype(const std::string& descriptor, std::size_t J, const std::string& out) {
  const auto k = prototype_kernel(default_prototype_specs(J), build_from_descriptor(descriptor));
  std::ostringstream os;
  write_kernel_csv(os, k);
  write_text(out, os.str());
  return 0;
}

int verify(const std::string& descriptor, std::uint64_t seed, const SuiteOptions& opt) {
  const auto report = run_invariant_suite(build_from_descriptor(descriptor), seed, opt);
  write_suite_report(std::cout, report);
  if (!report.passed()) {
    std::cerr << "FAILED: " << report.failures() << "\n";
    return 1;
  }
  return 0;
}

int experiment(const std::string& path, const std::vector<std::string>& overrides) {
  auto config = load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::InvalidParameter, "override '" + kv + "' is not key=value");
    apply_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate_config(config);
  const auto result = run_experiment(config);
  write_metrics_csv(std::cout, result);
  save_experiment(config, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelets and scattering transforms on finite groups"};
  app.require_subcommand(1);
  int status = 0;

  auto* group = app.add_subcommand("group", "Finite group utilities");
  group->require_subcommand(1);
  auto* table = group->add_subcommand("table", "Print the character table as CSV");
  std::string descriptor, out;
  table->add_option("group", descriptor, "cyclic(n), units(p), affine(p), symmetric(n) or product(A,B)")->required();
  table->add_option("-o,--out", out, "Output file (stdout by default)");
  table->callback([&] { status = group_table(descriptor, out); });

  auto* wavelet = app.add_subcommand("wavelet", "Wavelet frames");
  wavelet->require_subcommand(1);
  auto* check = wavelet->add_subcommand("check", "Calderon sums, frame bounds and admissibility");
  std::string kernel_file;
  std::size_t random_J = 3;
  std::uint64_t seed = 1;
  int trials = 50;
  check->add_option("kernel", kernel_file, "Kernel CSV");
  check->add_option("-g,--group", descriptor, "Group for a random kernel, or to override the stored one");
  check->add_option("--random", random_J, "J of a random Parseval kernel")->capture_default_str();
  check->add_option("--seed", seed)->capture_default_str();
  check->add_option("--trials", trials, "Random signals in the empirical frame check")->capture_default_str();
  check->callback([&] { status = wavelet_check(kernel_from(kernel_file, descriptor, random_J, seed), trials, seed); });

  auto* scat = app.add_subcommand("scatter", "Scattering features and layer energies of one signal");
  std::string signal_file, out_dir;
  std::size_t depth = 2;
  double budget = 1e9;
  scat->add_option("-k,--kernel", kernel_file, "Kernel CSV");
  scat->add_option("-g,--group", descriptor, "Group for a random kernel");
  scat->add_option("--random", random_J, "J of a random Parseval kernel")->capture_default_str();
  scat->add_option("-s,--signal", signal_file, "Signal file (a random signal when absent)");
  scat->add_option("-M,--depth", depth)->capture_default_str();
  scat->add_option("--seed", seed)->capture_default_str();
  scat->add_option("--budget", budget)->capture_default_str();
  scat->add_option("-o,--out", out_dir, "Directory for energies.csv and one CSV per path");
  scat->callback([&] {
    status = scatter_cmd(kernel_from(kernel_file, descriptor, random_J, seed), signal_file, seed, depth, out_dir, budget);
  });

  auto* kernel = app.add_subcommand("kernel", "Kernel construction");
  kernel->require_subcommand(1);
  auto* learn = kernel->add_subcommand("learn", "Learn a kernel from labelled signals");
  std::string recipe, manifest;
  learn->add_option("recipe", recipe, "affine_twoclass, distance_classes or random_orbits")->required();
  learn->add_option("-g,--group", descriptor)->required();
  learn->add_option("-m,--manifest", manifest, "Lines of signal_file,label")->required();
  learn->add_option("-o,--out", out);
  learn->callback([&] { status = kernel_learn(recipe, descriptor, manifest, out); });
  auto* proto = kernel->add_subcommand("prototype", "Mexican hat and Shannon kernel on an image grid");
  std::size_t J = 8;
  proto->add_option("-g,--group", descriptor)->required();
  proto->add_option("-J", J)->capture_default_str();
  proto->add_option("-o,--out", out);
  proto->callback([&] { status = kernel_prototype(descriptor, J, out); });

  auto* ver = app.add_subcommand("verify", "Run the property suite on one group");
  SuiteOptions suite;
  ver->add_option("group", descriptor)->required();
  ver->add_option("--seed", seed)->capture_default_str();
  ver->add_option("-J", suite.J)->capture_default_str();
  ver->add_option("-M,--depth", suite.M)->capture_default_str();
  ver->add_option("--trials", suite.trials)->capture_default_str();
  ver->callback([&] { status = verify(descriptor, seed, suite); });

  auto* exp = app.add_subcommand("experiment", "Run a classification experiment from a key=value config");
  std::string config;
  std::vector<std::string> overrides;
  exp->add_option("config", config)->required()->check(CLI::ExistingFile);
  exp->add_option("--set", overrides, "key=value overrides");
  exp->callback([&] { status = experiment(config, overrides); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gscat::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
