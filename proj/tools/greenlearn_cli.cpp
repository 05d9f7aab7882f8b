// Command-line front end. Talks to the library only through the C API.

#include "greenlearn/greenlearn.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct Failure {
  int code;
};

// Exit codes: 0 ok, 1 usage, 2 numeric failure, 3 I/O.
int exit_code(gl_status s) {
  switch (s) {
    case GL_OK: return 0;
    case GL_ERROR_USAGE: return 1;
    case GL_ERROR_IO: return 3;
    default: return 2;
  }
}

void check(gl_status s) {
  if (s == GL_OK) return;
  std::cerr << "error: " << gl_last_error() << "\n";
  throw Failure{exit_code(s)};
}

struct ConfigDeleter {
  void operator()(gl_config* c) const { gl_config_free(c); }
};
struct DatasetDeleter {
  void operator()(gl_dataset* d) const { gl_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(gl_model* m) const { gl_model_free(m); }
};
using ConfigPtr = std::unique_ptr<gl_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<gl_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<gl_model, ModelDeleter>;

struct Common {
  std::string config_path;
  std::string out;
  std::string op;
  std::optional<std::uint64_t> seed;
  std::string activation;
  std::optional<int> lbfgs_max_iters;
  bool strict_resolution = false;
};

void set(gl_config* c, const char* section, const char* key, const std::string& value) {
  check(gl_config_set(c, section, key, value.c_str()));
}

// Config file first, then flags; a flag always wins over the file.
ConfigPtr load(const Common& o) {
  gl_config* raw = nullptr;
  check(o.config_path.empty() ? gl_config_new(&raw) : gl_config_load(o.config_path.c_str(), &raw));
  ConfigPtr c(raw);
  if (!o.op.empty()) set(c.get(), "generate", "operator", o.op);
  if (o.seed) {
    set(c.get(), "generate", "seed", std::to_string(*o.seed));
    set(c.get(), "train", "seed", std::to_string(*o.seed));
  }
  if (!o.activation.empty()) set(c.get(), "train", "activation", o.activation);
  if (o.lbfgs_max_iters) set(c.get(), "train", "lbfgs_max_iters", std::to_string(*o.lbfgs_max_iters));
  if (o.strict_resolution) set(c.get(), "generate", "strict_resolution", "true");
  return c;
}

std::string catalog_text() {
  std::ostringstream s;
  s << "Operators:\n";
  for (size_t i = 0; i < gl_catalog_size(); ++i) {
    std::string id = gl_catalog_id(i);
    id.resize(24, ' ');
    s << "  " << id << gl_catalog_description(i) << "\n";
  }
  return s.str();
}

int train_progress(void* user, int row, size_t iteration, const char* phase, double loss, double gnorm, double wall) {
  const size_t every = *static_cast<size_t*>(user);
  if (every > 0 && iteration % every == 0)
    std::fprintf(stderr, "row %d %-5s %6zu  loss %.6e  |g| %.3e  %.1fs\n", row, phase, iteration, loss, gnorm, wall);
  return 1;
}

void bench_progress(void*, const char* cell, uint64_t seed, double err, double runtime) {
  std::fprintf(stderr, "%-24s seed %llu  error %.3f%%  %.1fs\n", cell, static_cast<unsigned long long>(seed), err,
               runtime);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  gl_string_free(s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn Green's functions of hidden linear operators with rational neural networks."};
  app.footer(catalog_text());
  app.require_subcommand(1);
  app.set_version_flag("--version", gl_version());

  Common o;
  auto add_common = [&](CLI::App* sub, bool training) {
    sub->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--operator", o.op, "operator id from the catalog");
    sub->add_option("--seed", o.seed, "seed for data generation and initialization");
    sub->add_flag("--strict-resolution", o.strict_resolution,
                  "fail instead of warning when the forcing grid under-resolves the length scale");
    if (training) {
      sub->add_option("--activation", o.activation, "rational, relu or tanh");
      sub->add_option("--lbfgs-max-iters", o.lbfgs_max_iters, "L-BFGS iteration budget")->check(CLI::NonNegativeNumber);
    }
  };

  auto* gen = app.add_subcommand("generate", "Sample forcings, solve the operator, write a dataset directory");
  add_common(gen, false);
  gen->add_option("--out", o.out, "output dataset directory")->required();

  std::string data_dir, import_dir, resume_dir;
  size_t log_every = 500;
  auto* tr = app.add_subcommand("train", "Train the Green's function and homogeneous-solution networks");
  add_common(tr, true);
  tr->add_option("--out", o.out, "output checkpoint directory")->required();
  auto* data_opt = tr->add_option("--data", data_dir, "dataset directory written by generate");
  tr->add_option("--import", import_dir, "dataset directory produced by another tool")->excludes(data_opt);
  tr->add_option("--resume", resume_dir, "checkpoint to continue from");
  tr->add_option("--log-every", log_every, "progress line interval in iterations (0 disables)");

  std::string model_dir;
  auto* ex = app.add_subcommand("extract", "Compute the feature report and export CSV grids from a checkpoint");
  ex->add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  ex->add_option("--model", model_dir, "checkpoint directory")->required();
  ex->add_option("--out", o.out, "output directory")->required();

  auto* bm = app.add_subcommand("benchmark", "Run a benchmark suite and write its results table");
  add_common(bm, true);
  bm->add_option("--out", o.out, "output CSV path")->required();

  std::string manifest_dir;
  auto* rm = app.add_subcommand("render-manifest", "Verify a dataset or checkpoint directory and print its manifest");
  rm->add_option("dir", manifest_dir, "dataset or checkpoint directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      auto c = load(o);
      gl_dataset* d = nullptr;
      check(gl_generate(c.get(), &d));
      DatasetPtr dataset(d);
      check(gl_dataset_write(dataset.get(), o.out.c_str()));
    } else if (tr->parsed()) {
      auto c = load(o);
      gl_dataset* d = nullptr;
      if (!data_dir.empty() || !import_dir.empty()) {
        gl_dataset* raw = nullptr;
        check(data_dir.empty() ? gl_dataset_import(import_dir.c_str(), &raw) : gl_dataset_read(data_dir.c_str(), &raw));
        DatasetPtr loaded(raw);
        check(gl_dataset_transform(loaded.get(), c.get(), &d));
      } else {
        check(gl_generate(c.get(), &d));
      }
      DatasetPtr dataset(d);
      ModelPtr resume;
      if (!resume_dir.empty()) {
        gl_model* m = nullptr;
        check(gl_model_read(resume_dir.c_str(), &m));
        resume.reset(m);
      }
      gl_model* m = nullptr;
      check(gl_train(dataset.get(), c.get(), resume.get(), train_progress, &log_every, &m));
      ModelPtr model(m);
      check(gl_model_write(model.get(), o.out.c_str()));
      double loss = 0.0;
      check(gl_model_final_loss(model.get(), 0, &loss));
      std::printf("final_loss = %.17g\n", loss);
    } else if (ex->parsed()) {
      auto c = load(o);
      gl_model* m = nullptr;
      check(gl_model_read(model_dir.c_str(), &m));
      ModelPtr model(m);
      char* report = nullptr;
      check(gl_extract(model.get(), c.get(), o.out.c_str(), &report));
      std::cout << take(report);
    } else if (bm->parsed()) {
      auto c = load(o);
      check(gl_benchmark(c.get(), o.out.c_str(), bench_progress, nullptr));
    } else if (rm->parsed()) {
      char* text = nullptr;
      check(gl_render_manifest(manifest_dir.c_str(), &text));
      std::cout << take(text);
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
