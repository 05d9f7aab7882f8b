#include "greenlearn/dataset_io.hpp"

#include "greenlearn/error.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace greenlearn::io {

using linalg::Matrix;
using linalg::Vector;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

template <class T>
T parse_integer(std::string_view text, const std::string& origin) {
  const std::string t = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw IoError(origin + ": expected an integer, found '" + t + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& origin) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw IoError(origin + ": expected true or false, found '" + text + "'");
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

Matrix column_matrix(const Vector& v) { return Matrix(v); }

// Writes a file and records it in the manifest inventory.
void put_file(const fs::path& dir, const std::string& name, const std::string& bytes, Manifest& m) {
  write_text(dir / name, bytes);
  m.files.push_back({name, crc32(bytes), bytes.size()});
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

Matrix read_checked(const fs::path& dir, const std::string& name) {
  return parse_matrix(read_text(dir / name), (dir / name).string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Numbers and matrices

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericError("cannot serialize a non-finite value");
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view text, const std::string& origin) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw IoError(origin + ": malformed number '" + t + "'");
  return v;
}

std::string format_matrix(const Matrix& m) {
  std::string out = std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(std::string_view text, const std::string& origin) {
  std::size_t pos = text.find('\n');
  if (pos == std::string_view::npos) throw IoError(origin + ": missing shape header");
  const auto header = split(text.substr(0, pos), ',');
  if (header.size() != 2) throw IoError(origin + ": shape header must read rows,cols");
  const auto rows = parse_integer<Eigen::Index>(header[0], origin);
  const auto cols = parse_integer<Eigen::Index>(header[1], origin);
  if (rows < 0 || cols < 0) throw IoError(origin + ": negative shape");
  Matrix m(rows, cols);
  std::size_t start = pos + 1;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (start >= text.size()) throw IoError(origin + ": truncated, expected " + std::to_string(rows) + " rows");
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    const auto fields = split(line, ',');
    if (static_cast<Eigen::Index>(fields.size()) != cols)
      throw IoError(origin + ": row " + std::to_string(r) + " has " + std::to_string(fields.size()) + " values");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_double(fields[static_cast<std::size_t>(c)], origin);
    start = end == std::string_view::npos ? text.size() : end + 1;
  }
  if (!trim(text.substr(std::min(start, text.size()))).empty()) throw IoError(origin + ": trailing data");
  return m;
}

void write_matrix(const fs::path& path, const Matrix& m) { write_text(path, format_matrix(m)); }

Matrix read_matrix(const fs::path& path) { return parse_matrix(read_text(path), path.string()); }

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

void write_text(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Manifest

const std::string& Manifest::get(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s != sections.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw IoError("manifest is missing " + section + "." + key);
}

std::optional<std::string> Manifest::find(const std::string& section, const std::string& key) const {
  const auto s = sections.find(section);
  if (s == sections.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Manifest::to_text() const {
  std::ostringstream out;
  out << "[manifest]\nformat_version = " << version << "\nkind = " << kind << "\n";
  for (const auto& [name, keys] : sections) {
    out << "\n[" << name << "]\n";
    for (const auto& [k, v] : keys) out << k << " = " << one_line(v) << "\n";
  }
  out << "\n[files]\ncount = " << files.size() << "\n";
  for (std::size_t i = 0; i < files.size(); ++i)
    out << "file" << i << " = " << files[i].name << " " << hex32(files[i].crc) << " " << files[i].bytes << "\n";
  return out.str();
}

Manifest Manifest::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError(std::string("manifest: ") + e.what());
  }
  Manifest m;
  bool have_header = false;
  for (const auto& [section, keys] : tree) {
    if (section == "manifest") {
      have_header = true;
      m.version = parse_integer<int>(keys.get<std::string>("format_version", ""), "manifest format_version");
      m.kind = keys.get<std::string>("kind", "");
    } else if (section == "files") {
      const auto count = parse_integer<std::size_t>(keys.get<std::string>("count", ""), "manifest file count");
      for (std::size_t i = 0; i < count; ++i) {
        const auto entry = keys.get_optional<std::string>("file" + std::to_string(i));
        if (!entry) throw IoError("manifest: inventory entry " + std::to_string(i) + " is missing");
        std::istringstream fields(*entry);
        FileRecord r;
        std::string crc;
        if (!(fields >> r.name >> crc >> r.bytes)) throw IoError("manifest: malformed inventory entry '" + *entry + "'");
        r.crc = static_cast<std::uint32_t>(std::stoul(crc, nullptr, 16));
        m.files.push_back(r);
      }
    } else {
      auto& out = m.sections[section];
      for (const auto& [k, v] : keys) out[k] = v.data();
    }
  }
  if (!have_header) throw IoError("manifest: missing [manifest] section");
  if (m.version != kFormatVersion)
    throw IoError("manifest: unsupported format version " + std::to_string(m.version));
  return m;
}

Manifest read_manifest(const fs::path& dir) { return Manifest::parse(read_text(dir / "manifest.txt")); }

void verify_inventory(const fs::path& dir, const Manifest& m) {
  for (const auto& f : m.files) {
    const std::string bytes = read_text(dir / f.name);
    if (bytes.size() != f.bytes || crc32(bytes) != f.crc) throw IoError("checksum mismatch in " + (dir / f.name).string());
  }
}

// ---------------------------------------------------------------------------
// Datasets

Manifest write_dataset(const train::Dataset& d, const fs::path& dir) {
  d.validate();
  Manifest m;
  m.kind = "dataset";
  auto& s = m.sections["dataset"];
  s["operator_id"] = d.operator_id;
  s["a"] = format_double(d.a);
  s["b"] = format_double(d.b);
  s["dim"] = std::to_string(d.dim());
  s["samples"] = std::to_string(d.samples());
  s["forcing_points"] = std::to_string(d.forcing_grid.size());
  s["response_points"] = std::to_string(d.response_grid.size());
  s["forcing_components"] = std::to_string(d.forcing_components());
  s["response_components"] = std::to_string(d.response_components());
  s["seed"] = std::to_string(d.seed);
  s["noise"] = format_double(d.noise);
  s["mask"] = d.mask;
  s["normalization"] = format_double(d.normalization);
  s["quadrature"] = d.quadrature;
  s["sampling"] = d.sampling;
  s["notes"] = d.notes;
  if (d.kernel) {
    auto& k = m.sections["kernel"];
    k["family"] = gp::to_string(d.kernel->family);
    k["length_scale"] = format_double(d.kernel->length_scale);
    k["period"] = format_double(d.kernel->period);
  }
  put_file(dir, "forcing_grid.csv", format_matrix(d.forcing_grid.points), m);
  put_file(dir, "response_grid.csv", format_matrix(d.response_grid.points), m);
  put_file(dir, "weights_forcing.csv", format_matrix(column_matrix(d.forcing_grid.weights)), m);
  put_file(dir, "weights_response.csv", format_matrix(column_matrix(d.response_grid.weights)), m);
  put_file(dir, "F.csv", format_matrix(d.forcing.front()), m);
  put_file(dir, "U.csv", format_matrix(d.response.front()), m);
  if (d.forcing_components() > 1 || d.response_components() > 1) {
    for (int k = 0; k < d.forcing_components(); ++k)
      put_file(dir, "components/F_" + std::to_string(k) + ".csv", format_matrix(d.forcing[static_cast<std::size_t>(k)]), m);
    for (int k = 0; k < d.response_components(); ++k)
      put_file(dir, "components/U_" + std::to_string(k) + ".csv", format_matrix(d.response[static_cast<std::size_t>(k)]), m);
  }
  write_text(dir / "manifest.txt", m.to_text());
  return m;
}

namespace {

train::Dataset read_dataset_impl(const fs::path& dir, bool external) {
  const Manifest m = read_manifest(dir);
  if (m.kind != "dataset") throw IoError(dir.string() + " does not hold a dataset");
  verify_inventory(dir, m);
  const std::string origin = (dir / "manifest.txt").string();
  train::Dataset d;
  d.operator_id = m.get("dataset", "operator_id");
  d.a = parse_double(m.get("dataset", "a"), origin);
  d.b = parse_double(m.get("dataset", "b"), origin);
  d.seed = parse_integer<std::uint64_t>(m.find("dataset", "seed").value_or("0"), origin);
  d.noise = parse_double(m.find("dataset", "noise").value_or("0"), origin);
  d.mask = m.find("dataset", "mask").value_or("none");
  d.normalization = parse_double(m.find("dataset", "normalization").value_or("1"), origin);
  d.quadrature = m.find("dataset", "quadrature").value_or("trapezoid");
  d.sampling = m.find("dataset", "sampling").value_or("uniform");
  d.notes = m.find("dataset", "notes").value_or("");
  if (m.sections.count("kernel")) {
    gp::KernelSpec k;
    k.family = gp::kernel_family_from_string(m.get("kernel", "family"));
    k.length_scale = parse_double(m.get("kernel", "length_scale"), origin);
    k.period = parse_double(m.get("kernel", "period"), origin);
    d.kernel = k;
  }
  d.forcing_grid.points = read_checked(dir, "forcing_grid.csv");
  d.response_grid.points = read_checked(dir, "response_grid.csv");
  const Matrix wf = read_checked(dir, "weights_forcing.csv");
  const Matrix wr = read_checked(dir, "weights_response.csv");
  if (wf.cols() != 1 || wr.cols() != 1) throw IoError(dir.string() + ": weight files must hold one column");
  d.forcing_grid.weights = wf.col(0);
  d.response_grid.weights = wr.col(0);

  const int nf = parse_integer<int>(m.find("dataset", "forcing_components").value_or("1"), origin);
  const int nu = parse_integer<int>(m.find("dataset", "response_components").value_or("1"), origin);
  if (nf < 1 || nu < 1) throw IoError(origin + ": component counts must be positive");
  if (nf == 1 && nu == 1) {
    d.forcing = {read_checked(dir, "F.csv")};
    d.response = {read_checked(dir, "U.csv")};
  } else {
    auto component = [&](const std::string& name) {
      if (external && !fs::exists(dir / name)) throw IoError(dir.string() + ": missing component file " + name);
      return read_checked(dir, name);
    };
    for (int k = 0; k < nf; ++k) d.forcing.push_back(component("components/F_" + std::to_string(k) + ".csv"));
    for (int k = 0; k < nu; ++k) d.response.push_back(component("components/U_" + std::to_string(k) + ".csv"));
  }
  const auto check = [&](const char* key, std::size_t actual) {
    if (const auto v = m.find("dataset", key); v && parse_integer<std::size_t>(*v, origin) != actual)
      throw IoError(origin + ": " + key + " disagrees with the stored matrices");
  };
  check("samples", d.forcing.front().rows());
  check("forcing_points", d.forcing_grid.size());
  check("response_points", d.response_grid.size());
  if (const auto v = m.find("dataset", "dim"); v && parse_integer<int>(*v, origin) != d.forcing_grid.dim())
    throw IoError(origin + ": dim disagrees with the grids");
  try {
    d.validate();
  } catch (const Error& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  return d;
}

}  // namespace

train::Dataset read_dataset(const fs::path& dir) { return read_dataset_impl(dir, false); }

train::Dataset import_external_dataset(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  if (!m.find("dataset", "forcing_components") || !m.find("dataset", "response_components"))
    throw IoError(dir.string() + ": external datasets must declare forcing_components and response_components");
  return read_dataset_impl(dir, true);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string format_log(const std::vector<train::LogEntry>& log) {
  std::string out = "iteration,phase,loss,gradient_norm,wall_time\n";
  for (const auto& e : log) {
    const double loss = std::isfinite(e.loss) ? e.loss : std::numeric_limits<double>::max();
    out += std::to_string(e.iteration) + "," + e.phase + "," + format_double(loss) + "," +
           format_double(e.gradient_norm) + "," + format_double(e.wall_time) + "\n";
  }
  return out;
}

std::vector<train::LogEntry> parse_log(std::string_view text, const std::string& origin) {
  std::vector<train::LogEntry> out;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    if (header) {
      if (trim(line) != "iteration,phase,loss,gradient_norm,wall_time") throw IoError(origin + ": unexpected log header");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 5) throw IoError(origin + ": malformed log line");
    train::LogEntry e;
    e.iteration = parse_integer<std::size_t>(f[0], origin);
    e.phase = f[1];
    e.loss = parse_double(f[2], origin);
    e.gradient_norm = parse_double(f[3], origin);
    e.wall_time = parse_double(f[4], origin);
    out.push_back(e);
  }
  if (header) throw IoError(origin + ": empty log");
  return out;
}

namespace {

Matrix as_column(std::span<const double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> parse_ints(const std::string& s, const std::string& origin) {
  std::vector<int> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_integer<int>(f, origin));
  return out;
}

nn::Mlp load_network(const fs::path& dir, const std::string& name, int input_dim, const std::vector<int>& hidden,
                     nn::Activation act) {
  nn::Mlp net(input_dim, hidden, act);
  const Matrix p = read_checked(dir, name);
  if (p.cols() != 1 || static_cast<std::size_t>(p.rows()) != net.parameter_count())
    throw IoError((dir / name).string() + ": parameter count does not match the architecture");
  std::copy(p.data(), p.data() + p.rows(), net.parameters().begin());
  return net;
}

}  // namespace

Manifest write_checkpoint(const train::TrainedModel& model, const fs::path& dir) {
  if (model.rows.empty()) throw UsageError("write_checkpoint: model has no rows");
  Manifest m;
  m.kind = "checkpoint";
  auto& s = m.sections["checkpoint"];
  s["operator_id"] = model.operator_id;
  s["a"] = format_double(model.a);
  s["b"] = format_double(model.b);
  s["dim"] = std::to_string(model.dim);
  s["seed"] = std::to_string(model.seed);
  s["activation"] = nn::to_string(model.activation);
  s["hidden"] = join_ints(model.rows.front().homogeneous.hidden());
  s["rows"] = std::to_string(model.response_components());
  s["columns"] = std::to_string(model.forcing_components());
  for (int r = 0; r < model.response_components(); ++r) {
    const auto& row = model.rows[static_cast<std::size_t>(r)];
    const std::string prefix = "row" + std::to_string(r);
    auto& rs = m.sections[prefix];
    rs["phase_boundary"] = std::to_string(row.phase_boundary);
    rs["final_loss"] = format_double(std::isfinite(row.final_loss) ? row.final_loss : std::numeric_limits<double>::max());
    rs["wall_time"] = format_double(row.wall_time);
    rs["adam_steps"] = std::to_string(row.adam_steps);
    rs["finished"] = row.finished ? "true" : "false";
    for (std::size_t k = 0; k < row.green.size(); ++k)
      put_file(dir, prefix + "/green_" + std::to_string(k) + ".csv", format_matrix(as_column(row.green[k].parameters())), m);
    put_file(dir, prefix + "/homogeneous.csv", format_matrix(as_column(row.homogeneous.parameters())), m);
    put_file(dir, prefix + "/log.csv", format_log(row.log), m);
    if (!row.adam_m.empty()) {
      put_file(dir, prefix + "/adam_m.csv", format_matrix(as_column(row.adam_m)), m);
      put_file(dir, prefix + "/adam_v.csv", format_matrix(as_column(row.adam_v)), m);
    }
  }
  write_text(dir / "manifest.txt", m.to_text());
  return m;
}

train::TrainedModel read_checkpoint(const fs::path& dir) {
  const Manifest m = read_manifest(dir);
  if (m.kind != "checkpoint") throw IoError(dir.string() + " does not hold a checkpoint");
  verify_inventory(dir, m);
  const std::string origin = (dir / "manifest.txt").string();
  train::TrainedModel model;
  model.operator_id = m.get("checkpoint", "operator_id");
  model.a = parse_double(m.get("checkpoint", "a"), origin);
  model.b = parse_double(m.get("checkpoint", "b"), origin);
  model.dim = parse_integer<int>(m.get("checkpoint", "dim"), origin);
  model.seed = parse_integer<std::uint64_t>(m.get("checkpoint", "seed"), origin);
  try {
    model.activation = nn::activation_from_string(m.get("checkpoint", "activation"));
  } catch (const UsageError& e) {
    throw IoError(origin + ": " + e.what());
  }
  const auto hidden = parse_ints(m.get("checkpoint", "hidden"), origin);
  const int rows = parse_integer<int>(m.get("checkpoint", "rows"), origin);
  const int cols = parse_integer<int>(m.get("checkpoint", "columns"), origin);
  if (rows < 1 || cols < 1 || model.dim < 1) throw IoError(origin + ": invalid shape");
  for (int r = 0; r < rows; ++r) {
    const std::string prefix = "row" + std::to_string(r);
    train::RowModel row;
    for (int k = 0; k < cols; ++k)
      row.green.push_back(
          load_network(dir, prefix + "/green_" + std::to_string(k) + ".csv", 2 * model.dim, hidden, model.activation));
    row.homogeneous = load_network(dir, prefix + "/homogeneous.csv", model.dim, hidden, model.activation);
    row.log = parse_log(read_text(dir / (prefix + "/log.csv")), (dir / prefix / "log.csv").string());
    row.phase_boundary = parse_integer<std::size_t>(m.get(prefix, "phase_boundary"), origin);
    row.final_loss = parse_double(m.get(prefix, "final_loss"), origin);
    row.wall_time = parse_double(m.get(prefix, "wall_time"), origin);
    row.adam_steps = parse_integer<int>(m.get(prefix, "adam_steps"), origin);
    row.finished = parse_bool(m.get(prefix, "finished"), origin);
    if (fs::exists(dir / (prefix + "/adam_m.csv"))) {
      const Matrix am = read_checked(dir, prefix + "/adam_m.csv");
      const Matrix av = read_checked(dir, prefix + "/adam_v.csv");
      row.adam_m.assign(am.data(), am.data() + am.size());
      row.adam_v.assign(av.data(), av.data() + av.size());
    }
    model.rows.push_back(std::move(row));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::vector<double> parse_doubles(const std::string& s, const std::string& origin) {
  std::vector<double> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_double(f, origin));
  return out;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& v,
                   const std::string& origin) {
  try {
    const std::string where = origin + " [" + section + "] " + key;
    auto num = [&] { return parse_double(v, where); };
    auto count = [&] { return parse_integer<std::size_t>(v, where); };
    auto integer = [&] { return parse_integer<int>(v, where); };
    auto seed = [&] { return parse_integer<std::uint64_t>(v, where); };
    bool known = true;
    if (section == "generate") {
      if (key == "operator") {
        if (!catalog::known(v)) throw UsageError(where + ": unknown operator '" + v + "'");
        c.operator_id = v;
      }
      else if (key == "samples") c.generate.samples = count();
      else if (key == "forcing_points") c.generate.forcing_points = count();
      else if (key == "response_points") c.generate.response_points = count();
      else if (key == "seed") c.generate.seed = seed();
      else if (key == "length_scale") c.generate.length_scale = num();
      else if (key == "strict_resolution") c.generate.strict_resolution = parse_bool(v, where);
      else if (key == "sampling") c.generate.sampling = v;
      else if (key == "quadrature") c.generate.quadrature = v;
      else if (key == "nodes_per_piece") c.generate.nodes_per_piece = integer();
      else known = false;
    } else if (section == "train") {
      if (key == "adam_epochs") c.train.adam_epochs = integer();
      else if (key == "adam_lr") c.train.adam_lr = num();
      else if (key == "beta1") c.train.beta1 = num();
      else if (key == "beta2") c.train.beta2 = num();
      else if (key == "adam_eps") c.train.adam_eps = num();
      else if (key == "lbfgs_max_iters") c.train.lbfgs_max_iters = integer();
      else if (key == "lbfgs_memory") c.train.lbfgs_memory = integer();
      else if (key == "gradient_tolerance") c.train.gradient_tolerance = num();
      else if (key == "wolfe_c1") c.train.wolfe_c1 = num();
      else if (key == "wolfe_c2") c.train.wolfe_c2 = num();
      else if (key == "seed") c.train.seed = seed();
      else if (key == "activation") c.train.activation = nn::activation_from_string(v);
      else if (key == "hidden") c.train.hidden = parse_ints(v, where);
      else known = false;
    } else if (section == "transform") {
      if (key == "noise") c.noise = num();
      else if (key == "noise_seed") c.noise_seed = seed();
      else if (key == "mask") {
        const auto lohi = parse_doubles(v, where);
        if (lohi.size() != 2 || !(lohi[0] < lohi[1])) throw UsageError(where + ": expected lo,hi with lo < hi");
        c.mask = std::make_pair(lohi[0], lohi[1]);
      } else known = false;
    } else if (section == "benchmark") {
      if (key == "suite") c.suite = v;
      else if (key == "values") c.values = parse_doubles(v, where);
      else if (key == "seeds") {
        c.seeds.clear();
        for (const auto& f : split(v, ',')) c.seeds.push_back(parse_integer<std::uint64_t>(f, where));
      } else known = false;
    } else if (section == "extract") {
      if (key == "grid_points") c.grid_points = count();
      else if (key == "eigen_count") c.eigen_count = count();
      else if (key == "pole_resolution") c.pole_resolution = count();
      else known = false;
    } else {
      throw UsageError(origin + ": unknown section [" + section + "]");
    }
    if (!known) throw UsageError(origin + ": unknown key '" + key + "' in [" + section + "]");
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(origin + ": " + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, keys] : tree) {
    if (!keys.data().empty()) throw UsageError(origin + ": key '" + section + "' outside of a section");
    for (const auto& [key, node] : keys) apply_setting(c, section, key, node.data(), origin);
  }
  c.train.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_text(path), path.string());
}

}  // namespace greenlearn::io
