#include "greenlearn/greenlearn.h"

#include "greenlearn/catalog.hpp"
#include "greenlearn/dataset_io.hpp"
#include "greenlearn/error.hpp"
#include "greenlearn/pipeline.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

using namespace greenlearn;

struct gl_config {
  io::ExperimentConfig value;
};
struct gl_dataset {
  train::Dataset value;
};
struct gl_model {
  train::TrainedModel value;
};

namespace {

thread_local std::string last_error;

template <class F>
gl_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return GL_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<gl_status>(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GL_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GL_ERROR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw UsageError(std::string(what) + " must not be NULL");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gl_version(void) { return "0.1.0"; }

const char* gl_last_error(void) { return last_error.c_str(); }

size_t gl_catalog_size(void) { return catalog::entries().size(); }

const char* gl_catalog_id(size_t index) {
  return index < catalog::entries().size() ? catalog::entries()[index].id.c_str() : nullptr;
}

const char* gl_catalog_description(size_t index) {
  return index < catalog::entries().size() ? catalog::entries()[index].description.c_str() : nullptr;
}

gl_status gl_config_new(gl_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gl_config{};
  });
}

gl_status gl_config_load(const char* path, gl_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gl_config{io::load_config(path)};
  });
}

gl_status gl_config_set(gl_config* config, const char* section, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(section, "section");
    require(key, "key");
    require(value, "value");
    io::ExperimentConfig next = config->value;
    io::apply_setting(next, section, key, value);
    next.train.validate();
    config->value = std::move(next);
  });
}

gl_status gl_config_operator(const gl_config* config, char* buf, size_t size) {
  return guarded([&] {
    require(config, "config");
    require(buf, "buf");
    const auto& id = config->value.operator_id;
    if (id.size() + 1 > size) throw UsageError("buffer too small for the operator id");
    std::memcpy(buf, id.c_str(), id.size() + 1);
  });
}

void gl_config_free(gl_config* config) { delete config; }

gl_status gl_generate(const gl_config* config, gl_dataset** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = new gl_dataset{pipeline::make_dataset(config->value)};
  });
}

gl_status gl_dataset_read(const char* dir, gl_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new gl_dataset{io::read_dataset(dir)};
  });
}

gl_status gl_dataset_import(const char* dir, gl_dataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new gl_dataset{io::import_external_dataset(dir)};
  });
}

gl_status gl_dataset_write(const gl_dataset* dataset, const char* dir) {
  return guarded([&] {
    require(dataset, "dataset");
    require(dir, "dir");
    io::write_dataset(dataset->value, dir);
  });
}

gl_status gl_dataset_transform(const gl_dataset* dataset, const gl_config* config, gl_dataset** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    *out = new gl_dataset{pipeline::apply_transforms(dataset->value, config->value)};
  });
}

gl_status gl_dataset_shape(const gl_dataset* dataset, size_t* samples, size_t* forcing_points, size_t* response_points,
                           int* forcing_components, int* response_components) {
  return guarded([&] {
    require(dataset, "dataset");
    const auto& d = dataset->value;
    if (samples) *samples = d.samples();
    if (forcing_points) *forcing_points = d.forcing_grid.size();
    if (response_points) *response_points = d.response_grid.size();
    if (forcing_components) *forcing_components = d.forcing_components();
    if (response_components) *response_components = d.response_components();
  });
}

void gl_dataset_free(gl_dataset* dataset) { delete dataset; }

gl_status gl_train(const gl_dataset* dataset, const gl_config* config, const gl_model* resume, gl_progress_fn progress,
                   void* user, gl_model** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    train::ProgressCallback cb;
    if (progress)
      cb = [&](const train::Progress& p) {
        const auto& e = *p.entry;
        return progress(user, p.row, e.iteration, e.phase.c_str(), e.loss, e.gradient_norm, e.wall_time) != 0;
      };
    auto model = train::train(dataset->value, config->value.train, resume ? &resume->value : nullptr, cb);
    *out = new gl_model{std::move(model)};
  });
}

gl_status gl_model_read(const char* dir, gl_model** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new gl_model{io::read_checkpoint(dir)};
  });
}

gl_status gl_model_write(const gl_model* model, const char* dir) {
  return guarded([&] {
    require(model, "model");
    require(dir, "dir");
    io::write_checkpoint(model->value, dir);
  });
}

gl_status gl_model_final_loss(const gl_model* model, int row, double* loss) {
  return guarded([&] {
    require(model, "model");
    require(loss, "loss");
    if (row < 0 || row >= model->value.response_components()) throw UsageError("row out of range");
    *loss = model->value.rows[static_cast<std::size_t>(row)].final_loss;
  });
}

gl_status gl_model_kernel_error(const gl_model* model, size_t n, double* percent) {
  return guarded([&] {
    require(model, "model");
    require(percent, "percent");
    *percent = pipeline::kernel_error(model->value, n);
  });
}

gl_status gl_model_prediction_error(const gl_model* model, const gl_dataset* dataset, double* error) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(error, "error");
    *error = pipeline::prediction_error(model->value, dataset->value);
  });
}

void gl_model_free(gl_model* model) { delete model; }

gl_status gl_extract(const gl_model* model, const gl_config* config, const char* dir, char** report) {
  return guarded([&] {
    require(model, "model");
    require(config, "config");
    require(dir, "dir");
    const auto r = pipeline::extract(model->value, config->value, dir);
    if (report) *report = dup(r.to_text());
  });
}

gl_status gl_benchmark(const gl_config* config, const char* csv_path, gl_benchmark_fn progress, void* user) {
  return guarded([&] {
    require(config, "config");
    require(csv_path, "csv_path");
    pipeline::BenchmarkProgress cb;
    if (progress)
      cb = [&](const pipeline::BenchmarkRow& r) { progress(user, r.cell.c_str(), r.seed, r.relative_error, r.runtime); };
    const auto rows = pipeline::run_benchmark(config->value, cb);
    io::write_text(csv_path, pipeline::format_benchmark(rows));
  });
}

gl_status gl_render_manifest(const char* dir, char** text) {
  return guarded([&] {
    require(dir, "dir");
    require(text, "text");
    const auto m = io::read_manifest(dir);
    io::verify_inventory(dir, m);
    std::ostringstream out;
    out << "kind: " << m.kind << " (format " << m.version << ")\n";
    for (const auto& [section, keys] : m.sections) {
      out << section << ":\n";
      for (const auto& [k, v] : keys) out << "  " << k << ": " << v << "\n";
    }
    out << "files (" << m.files.size() << ", checksums verified):\n";
    for (const auto& f : m.files) out << "  " << f.name << "  " << f.bytes << " bytes\n";
    *text = dup(out.str());
  });
}

void gl_string_free(char* text) { std::free(text); }

}  // extern "C"
