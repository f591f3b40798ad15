#include "rotmix/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rotmix/errors.hpp"
#include "rotmix/random.hpp"

namespace rotmix {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool try_parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Dataset load_csv(const ObservationFile& file, const Family& family) {
  const std::vector<std::string> lines = read_lines(file.path);

  std::size_t first_row = 0;
  std::vector<std::string> header;
  if (file.has_header) {
    if (lines.empty()) throw ValidationError(file.path.string() + ": empty file");
    for (const auto& h : split_line(lines[0])) header.push_back(trim(h));
    first_row = 1;
  }

  // column roles: data, weight, or ignored
  std::optional<std::size_t> weight_col;
  if (file.weight_column) {
    const std::string& w = *file.weight_column;
    bool found = false;
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == w) {
        weight_col = c;
        found = true;
        break;
      }
    if (!found) {
      std::size_t idx = 0;
      const auto res = std::from_chars(w.data(), w.data() + w.size(), idx);
      if (res.ec == std::errc() && res.ptr == w.data() + w.size())
        weight_col = idx, found = true;
    }
    if (!found)
      throw ValidationError(file.path.string() + ": weight column '" + w +
                            "' not found");
  }
  auto ignored = [&](std::size_t c) {
    if (c < header.size())
      for (const auto& name : file.ignore_columns)
        if (header[c] == name) return true;
    return false;
  };

  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  std::size_t width = 0;
  for (std::size_t r = first_row; r < lines.size(); ++r) {
    if (trim(lines[r]).empty() && r + 1 == lines.size()) break;  // trailing newline
    const std::vector<std::string> cells = split_line(lines[r]);
    const std::size_t data_row = rows.size() + 1;
    if (width == 0) {
      width = cells.size();
      if (weight_col && *weight_col >= width)
        throw ValidationError(file.path.string() + ": weight column index " +
                              std::to_string(*weight_col) + " out of range");
    }
    if (cells.size() != width)
      throw ValidationError(file.path.string() + ": row " + std::to_string(data_row) +
                            " has " + std::to_string(cells.size()) +
                            " columns, expected " + std::to_string(width));
    std::vector<double> vals;
    double w = -1.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const bool is_weight = weight_col && c == *weight_col;
      if (!is_weight && ignored(c)) continue;
      double v = 0.0;
      if (!try_parse_double(cells[c], v))
        throw ValidationError(file.path.string() + ": row " + std::to_string(data_row) +
                              ", column " + std::to_string(c + 1) + ": cannot parse '" +
                              trim(cells[c]) + "' as a number");
      if (!std::isfinite(v))
        throw ValidationError(file.path.string() + ": row " + std::to_string(data_row) +
                              ", column " + std::to_string(c + 1) +
                              ": non-finite value");
      if (is_weight) {
        w = v;
      } else {
        vals.push_back(v);
      }
    }
    if (weight_col) {
      if (!(w > 0.0))
        throw ValidationError(file.path.string() + ": row " + std::to_string(data_row) +
                              ": weight must be > 0");
      weights.push_back(w);
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ValidationError(file.path.string() + ": no data rows");

  const std::size_t d = rows[0].size();
  if (d == 0) throw ValidationError(file.path.string() + ": no data columns");
  Dataset data;
  data.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < d; ++c) data.points(i, c) = rows[i][c];

  const Eigen::Index n = data.points.rows();
  if (weight_col) {
    data.upsilon.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) data.upsilon[i] = weights[i];
    data.upsilon /= data.upsilon.sum();
  } else {
    data.upsilon = Vec::Constant(n, 1.0 / static_cast<double>(n));
    data.upsilon /= data.upsilon.sum();
  }

  if (static_cast<int>(d) != family.dim)
    throw ValidationError(file.path.string() + ": data has dimension " +
                          std::to_string(d) + " but family " + family.name +
                          " expects " + std::to_string(family.dim));
  for (Eigen::Index i = 0; i < n; ++i)
    if (!family.data_domain(data.points.row(i)))
      throw ValidationError(file.path.string() + ": row " + std::to_string(i + 1) +
                            " violates the " + family.name + " data domain");
  return data;
}

SampleResult sample_mixture(const MixtureModel& model, Eigen::Index n,
                            std::uint64_t seed) {
  validate(model);
  const Family& family = model.family;
  const Eigen::Index d = family.dim;
  Rng rng(seed);

  SampleResult out;
  out.data.points.resize(n, d);
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = rng.categorical(model.omega);
    out.labels[i] = static_cast<int>(j);
    const Vec xi = model.xis.row(j);
    if (family.name == "gaussian_spherical") {
      for (Eigen::Index c = 0; c < d; ++c)
        out.data.points(i, c) = xi[c] + rng.normal();
    } else if (family.name == "poisson") {
      out.data.points(i, 0) = static_cast<double>(rng.poisson(xi[0]));
    } else if (family.name == "bernoulli") {
      out.data.points(i, 0) = rng.uniform() < xi[0] ? 1.0 : 0.0;
    } else if (family.name == "exponential") {
      out.data.points(i, 0) = rng.exponential(xi[0]);
    } else {
      throw ValidationError("sample_mixture: no sampler for family " + family.name);
    }
  }
  if (n > 0) {
    out.data.upsilon = Vec::Constant(n, 1.0 / static_cast<double>(n));
    out.data.upsilon /= out.data.upsilon.sum();
  } else {
    out.data.upsilon.resize(0);
  }
  return out;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

ModelDocument make_document(const MixtureModel& model, const FitConfig& config,
                            const FitTrace& trace) {
  ModelDocument doc;
  doc.family_name = model.family.name;
  doc.dim = model.family.dim;
  doc.k = static_cast<int>(model.k());
  doc.lambda = config.lambda;
  doc.regularizer = RegularizerSpec::make(config.regularizer, config.lambda).kind;
  doc.init = to_string(config.init);
  doc.seed = config.seed;
  doc.max_iters = config.max_iters;
  doc.rel_tol = config.rel_tol;
  doc.prune_threshold = config.prune_threshold;
  doc.status = to_string(trace.status);
  doc.iterations = trace.updates();
  doc.final_objective = trace.final_objective();
  doc.omega = model.omega;
  doc.xis = model.xis;
  return doc;
}

void save_model(const ModelDocument& doc, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "rotmix-model v1\n";
  out << "family " << doc.family_name << "\n";
  out << "dim " << doc.dim << "\n";
  out << "k " << doc.k << "\n";
  out << "lambda " << fmt_g17(doc.lambda) << "\n";
  out << "regularizer " << to_string(doc.regularizer) << "\n";
  out << "init " << doc.init << "\n";
  out << "seed " << doc.seed << "\n";
  out << "max_iters " << doc.max_iters << "\n";
  out << "rel_tol " << fmt_g17(doc.rel_tol) << "\n";
  out << "prune_threshold " << fmt_g17(doc.prune_threshold) << "\n";
  out << "status " << doc.status << "\n";
  out << "iterations " << doc.iterations << "\n";
  out << "final_objective " << fmt_g17(doc.final_objective) << "\n";
  out << "omega";
  for (Eigen::Index j = 0; j < doc.omega.size(); ++j)
    out << " " << fmt_g17(doc.omega[j]);
  out << "\n";
  for (Eigen::Index j = 0; j < doc.xis.rows(); ++j) {
    out << "xi " << j;
    for (Eigen::Index c = 0; c < doc.xis.cols(); ++c)
      out << " " << fmt_g17(doc.xis(j, c));
    out << "\n";
  }
  out << "end\n";
  atomic_write(path, out.str());
}

namespace {

class DocReader {
 public:
  DocReader(std::vector<std::string> lines, std::string path)
      : lines_(std::move(lines)), path_(std::move(path)) {}

  // Next line must start with `key`; returns the remainder.
  std::string expect(const std::string& key) {
    if (pos_ >= lines_.size())
      throw ValidationError(path_ + ": truncated model file, expected '" + key + "'");
    const std::string& line = lines_[pos_++];
    if (line.rfind(key, 0) != 0 ||
        (line.size() > key.size() && line[key.size()] != ' '))
      throw ValidationError(path_ + ": expected '" + key + "', found '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : "";
  }

  double number(const std::string& key) {
    const std::string v = expect(key);
    double out = 0.0;
    if (!try_parse_double(v, out))
      throw ValidationError(path_ + ": cannot parse value of '" + key + "'");
    return out;
  }

  long long integer(const std::string& key) {
    const double v = number(key);
    if (v != std::floor(v))
      throw ValidationError(path_ + ": '" + key + "' must be an integer");
    return static_cast<long long>(v);
  }

  std::vector<double> numbers(const std::string& key) {
    std::istringstream in(expect(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      double v = 0.0;
      if (!try_parse_double(tok, v))
        throw ValidationError(path_ + ": cannot parse value of '" + key + "'");
      out.push_back(v);
    }
    return out;
  }

 private:
  std::vector<std::string> lines_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

ModelDocument load_model(const std::filesystem::path& path) {
  DocReader reader(read_lines(path), path.string());
  reader.expect("rotmix-model v1");

  ModelDocument doc;
  doc.family_name = reader.expect("family");
  doc.dim = static_cast<int>(reader.integer("dim"));
  doc.k = static_cast<int>(reader.integer("k"));
  doc.lambda = reader.number("lambda");
  doc.regularizer = reg_kind_from_string(reader.expect("regularizer"));
  doc.init = reader.expect("init");
  doc.seed = static_cast<std::uint64_t>(reader.integer("seed"));
  doc.max_iters = static_cast<int>(reader.integer("max_iters"));
  doc.rel_tol = reader.number("rel_tol");
  doc.prune_threshold = reader.number("prune_threshold");
  doc.status = reader.expect("status");
  doc.iterations = static_cast<int>(reader.integer("iterations"));
  doc.final_objective = reader.number("final_objective");

  const std::vector<double> omega = reader.numbers("omega");
  if (static_cast<int>(omega.size()) != doc.k)
    throw ValidationError(path.string() + ": omega has " +
                          std::to_string(omega.size()) + " entries, expected k = " +
                          std::to_string(doc.k));
  doc.omega.resize(doc.k);
  for (int j = 0; j < doc.k; ++j) doc.omega[j] = omega[j];

  doc.xis.resize(doc.k, doc.dim);
  for (int j = 0; j < doc.k; ++j) {
    const std::vector<double> row = reader.numbers("xi");
    if (row.size() != static_cast<std::size_t>(doc.dim) + 1 ||
        row[0] != static_cast<double>(j))
      throw ValidationError(path.string() + ": malformed 'xi " + std::to_string(j) +
                            "' line");
    for (int c = 0; c < doc.dim; ++c) doc.xis(j, c) = row[c + 1];
  }
  reader.expect("end");

  // surface invariant violations at load time
  model_from_document(doc);
  return doc;
}

MixtureModel model_from_document(const ModelDocument& doc) {
  const Family family = make_family(doc.family_name, doc.dim);
  if (family.dim != doc.dim)
    throw ValidationError("model file: family " + doc.family_name +
                          " has dimension " + std::to_string(family.dim) +
                          ", file says " + std::to_string(doc.dim));
  MixtureModel model;
  model.family = family;
  model.omega = doc.omega;
  model.xis = doc.xis;
  validate(model);
  return model;
}

void write_samples_csv(const std::filesystem::path& path, const SampleResult& sample,
                       bool with_labels) {
  std::ostringstream out;
  const Eigen::Index d = sample.data.points.cols();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (c) out << ",";
    out << "x" << c;
  }
  if (with_labels) out << ",label";
  out << "\n";
  for (Eigen::Index i = 0; i < sample.data.points.rows(); ++i) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c) out << ",";
      out << fmt_g17(sample.data.points(i, c));
    }
    if (with_labels) out << "," << sample.labels[i];
    out << "\n";
  }
  atomic_write(path, out.str());
}

void write_trace_csv(const std::filesystem::path& path, const FitTrace& trace) {
  std::ostringstream out;
  const Eigen::Index k0 =
      trace.iterations.empty() ? 0 : trace.iterations.front().omega.size();
  out << "iteration,objective,k_active,mean_row_entropy";
  for (Eigen::Index j = 0; j < k0; ++j) out << ",omega_" << j;
  out << "\n";
  for (std::size_t t = 0; t < trace.iterations.size(); ++t) {
    const IterationRecord& row = trace.iterations[t];
    out << (t + 1) << "," << fmt_g17(row.objective) << "," << row.k_active << ","
        << fmt_g17(row.mean_row_entropy);
    for (Eigen::Index j = 0; j < k0; ++j)
      out << "," << fmt_g17(j < row.omega.size() ? row.omega[j] : 0.0);
    out << "\n";
  }
  atomic_write(path, out.str());
}

void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan) {
  std::ostringstream out;
  out << "upsilon";
  for (Eigen::Index j = 0; j < plan.pi.cols(); ++j) out << ",pi_" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < plan.pi.rows(); ++i) {
    out << fmt_g17(plan.row_masses[i]);
    for (Eigen::Index j = 0; j < plan.pi.cols(); ++j)
      out << "," << fmt_g17(plan.pi(i, j));
    out << "\n";
  }
  atomic_write(path, out.str());
}

}  // namespace rotmix
