#include "hyda/data.hpp"

#include "hyda/tensor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hyda {

using nlohmann::json;

namespace {

// Stream ids for the independent toy-generation draws.
enum ToyStream : std::uint64_t {
  kStreamBasis = 1,
  kStreamEpsMain = 2,
  kStreamEpsAux = 3,
  kStreamInputs = 4,
  kStreamNoiseMain = 5,
  kStreamNoiseAux = 6,
  kStreamAuxUniform = 7,
};

}  // namespace

const char* to_string(TaskKind k) {
  return k == TaskKind::regression ? "regression" : "classification";
}

std::uint64_t Dataset::checksum() const {
  std::uint64_t h = hyda::checksum(inputs);
  h = hyda::checksum(targets_main, h);
  return hyda::checksum(targets_aux, h);
}

ToySpec ToySpec::exp1(std::uint64_t seed) {
  ToySpec s;
  s.n_train = 10000;
  s.n_val = 2000;
  s.n_test = 2000;
  s.input_dim = 75;
  s.output_dim = 25;
  s.aux_mode = AuxMode::related;
  s.seed = seed;
  return s;
}

ToySpec ToySpec::exp2(std::uint64_t seed) {
  ToySpec s;
  s.n_train = 1000;
  s.n_val = 200;
  s.n_test = 200;
  s.input_dim = 25;
  s.output_dim = 5;
  s.aux_mode = AuxMode::unrelated;
  s.seed = seed;
  return s;
}

Dataset generate_toy(const ToySpec& spec) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0)
    throw ConfigError("generate_toy: dims must be positive");
  if (spec.b_variance < 0 || spec.eps_variance < 0)
    throw ConfigError("generate_toy: variances must be non-negative");

  const Index n = spec.total_rows();
  const Rng root(spec.seed);

  Rng rng_b = root.fork(kStreamBasis);
  Rng rng_em = root.fork(kStreamEpsMain);
  Rng rng_ea = root.fork(kStreamEpsAux);
  Rng rng_x = root.fork(kStreamInputs);
  Rng rng_nm = root.fork(kStreamNoiseMain);
  Rng rng_na = root.fork(kStreamNoiseAux);

  const Matrix basis = gaussian_matrix(rng_b, spec.output_dim, spec.input_dim, 0.0, spec.b_variance);
  const Matrix eps_main =
      gaussian_matrix(rng_em, spec.output_dim, spec.input_dim, 0.0, spec.eps_variance);
  const Matrix eps_aux =
      gaussian_matrix(rng_ea, spec.output_dim, spec.input_dim, 0.0, spec.eps_variance);

  Dataset ds;
  ds.inputs = gaussian_matrix(rng_x, n, spec.input_dim, 0.0, 1.0);

  const double noise_main = spec.noise_std >= 0.0 ? spec.noise_std : 0.05 * spec.sigma_main;
  const double noise_aux = spec.noise_std >= 0.0 ? spec.noise_std : 0.05 * spec.sigma_aux;
  const double scale = spec.projection_scale();

  ds.targets_main =
      spec.sigma_main *
      (scale * (ds.inputs * (basis + eps_main).transpose())).array().tanh().matrix();
  if (noise_main > 0.0)
    ds.targets_main += gaussian_matrix(rng_nm, n, spec.output_dim, 0.0, noise_main * noise_main);

  ds.targets_aux =
      spec.sigma_aux *
      (scale * (ds.inputs * (basis + eps_aux).transpose())).array().tanh().matrix();
  if (noise_aux > 0.0)
    ds.targets_aux += gaussian_matrix(rng_na, n, spec.output_dim, 0.0, noise_aux * noise_aux);

  if (spec.aux_mode == AuxMode::unrelated) {
    // Uniform over the main task's per-dimension output range, whole dataset.
    Rng rng_u = root.fork(kStreamAuxUniform);
    for (Index j = 0; j < spec.output_dim; ++j) {
      const double lo = ds.targets_main.col(j).minCoeff();
      const double hi = ds.targets_main.col(j).maxCoeff();
      for (Index i = 0; i < n; ++i) ds.targets_aux(i, j) = lo + (hi - lo) * rng_u.next_uniform();
    }
  }
  return ds;
}

Dataset select_rows(const Dataset& dataset, const std::vector<Index>& rows) {
  Dataset out;
  out.task_main = dataset.task_main;
  out.task_aux = dataset.task_aux;
  out.feature_names = dataset.feature_names;
  out.inputs.resize(static_cast<Index>(rows.size()), dataset.inputs.cols());
  out.targets_main.resize(static_cast<Index>(rows.size()), dataset.targets_main.cols());
  out.targets_aux.resize(static_cast<Index>(rows.size()), dataset.targets_aux.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Index>(i)) = dataset.inputs.row(rows[i]);
    out.targets_main.row(static_cast<Index>(i)) = dataset.targets_main.row(rows[i]);
    out.targets_aux.row(static_cast<Index>(i)) = dataset.targets_aux.row(rows[i]);
  }
  return out;
}

namespace {

std::vector<Index> shuffled_indices(Index n, Rng rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i)
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(rng.next_index(i + 1))]);
  return idx;
}

}  // namespace

Splits split(const Dataset& dataset, const SplitFractions& fractions, std::uint64_t seed) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");
  const Index n = dataset.rows();
  const Index n_train = static_cast<Index>(fractions.train * static_cast<double>(n));
  const Index n_val = static_cast<Index>(fractions.val * static_cast<double>(n));
  const Index n_test = n - n_train - n_val;
  if ((fractions.train > 0 && n_train == 0) || (fractions.val > 0 && n_val == 0) ||
      (fractions.test > 0 && n_test == 0))
    throw ConfigError("split: a requested split is empty");

  const std::vector<Index> order = shuffled_indices(n, Rng(seed));
  const std::vector<Index> train_ids(order.begin(), order.begin() + n_train);
  const std::vector<Index> val_ids(order.begin() + n_train, order.begin() + n_train + n_val);
  const std::vector<Index> test_ids(order.begin() + n_train + n_val, order.end());
  return {select_rows(dataset, train_ids), select_rows(dataset, val_ids),
          select_rows(dataset, test_ids)};
}

Splits split_counts(const Dataset& dataset, Index n_train, Index n_val, Index n_test) {
  if (n_train + n_val + n_test != dataset.rows())
    throw ConfigError("split_counts: counts must cover the dataset exactly");
  std::vector<Index> train_ids, val_ids, test_ids;
  for (Index i = 0; i < n_train; ++i) train_ids.push_back(i);
  for (Index i = 0; i < n_val; ++i) val_ids.push_back(n_train + i);
  for (Index i = 0; i < n_test; ++i) test_ids.push_back(n_train + n_val + i);
  return {select_rows(dataset, train_ids), select_rows(dataset, val_ids),
          select_rows(dataset, test_ids)};
}

// ---------------------------------------------------------------------------
// CSV.

namespace {

const char* to_string(ColumnRole r) {
  switch (r) {
    case ColumnRole::feature: return "feature";
    case ColumnRole::target_main: return "target_main";
    case ColumnRole::target_aux: return "target_aux";
    case ColumnRole::ignore: return "ignore";
  }
  return "feature";
}

ColumnRole role_from_string(const std::string& s) {
  if (s == "feature") return ColumnRole::feature;
  if (s == "target_main") return ColumnRole::target_main;
  if (s == "target_aux") return ColumnRole::target_aux;
  if (s == "ignore") return ColumnRole::ignore;
  throw ConfigError("schema: unknown column role: " + s);
}

const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::raw: return "raw";
    case ColumnKind::categorical: return "categorical";
  }
  return "continuous";
}

ColumnKind kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "raw") return ColumnKind::raw;
  if (s == "categorical") return ColumnKind::categorical;
  throw ConfigError("schema: unknown column kind: " + s);
}

TaskKind task_from_string(const std::string& s) {
  if (s == "regression") return TaskKind::regression;
  if (s == "classification") return TaskKind::classification;
  throw ConfigError("schema: unknown task kind: " + s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, const std::string& column, std::size_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    std::ostringstream oss;
    oss << "csv: non-numeric value '" << cell << "' in column '" << column << "' at data row "
        << row;
    throw DataError(oss.str());
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CsvSchema load_schema(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("schema: cannot open: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("schema: parse error in " + path.string() + ": " + e.what());
  }
  CsvSchema schema;
  for (const auto& jc : j.at("columns")) {
    ColumnSpec c;
    c.name = jc.at("name").get<std::string>();
    c.role = role_from_string(jc.at("role").get<std::string>());
    if (jc.contains("kind")) c.kind = kind_from_string(jc.at("kind").get<std::string>());
    schema.columns.push_back(std::move(c));
  }
  if (j.contains("task_main")) schema.task_main = task_from_string(j.at("task_main"));
  if (j.contains("task_aux")) schema.task_aux = task_from_string(j.at("task_aux"));
  if (j.contains("split")) {
    schema.split.train = j["split"].value("train", 0.8);
    schema.split.val = j["split"].value("val", 0.1);
    schema.split.test = j["split"].value("test", 0.1);
    schema.split_seed = j["split"].value("seed", 1);
  }
  return schema;
}

void save_schema(const CsvSchema& schema, const std::filesystem::path& path) {
  json j;
  j["columns"] = json::array();
  for (const auto& c : schema.columns)
    j["columns"].push_back({{"name", c.name}, {"role", to_string(c.role)}, {"kind", to_string(c.kind)}});
  j["task_main"] = to_string(schema.task_main);
  j["task_aux"] = to_string(schema.task_aux);
  j["split"] = {{"train", schema.split.train},
                {"val", schema.split.val},
                {"test", schema.split.test},
                {"seed", schema.split_seed}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("schema: cannot write: " + path.string());
  os << j.dump(2) << "\n";
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                 std::vector<std::string>* warnings) {
  std::ifstream is(path);
  if (!is) throw DataError("csv: cannot open: " + path.string());

  std::string line;
  if (!std::getline(is, line)) throw DataError("csv: empty file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  std::vector<Index> col_index(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), schema.columns[c].name);
    if (it == header.end())
      throw DataError("csv: missing column '" + schema.columns[c].name + "'");
    col_index[c] = static_cast<Index>(it - header.begin());
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream oss;
      oss << "csv: row " << rows.size() + 1 << " has " << cells.size() << " cells, header has "
          << header.size();
      throw DataError(oss.str());
    }
    rows.push_back(std::move(cells));
  }
  const Index n = static_cast<Index>(rows.size());
  if (n == 0) throw DataError("csv: no data rows: " + path.string());

  // Rows whose statistics define scaling and category sets.
  const Index n_train = static_cast<Index>(schema.split.train * static_cast<double>(n));
  std::vector<char> is_train(static_cast<std::size_t>(n), 0);
  {
    const std::vector<Index> order = shuffled_indices(n, Rng(schema.split_seed));
    for (Index i = 0; i < std::min(n_train, n); ++i) is_train[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  }

  struct EncodedColumn {
    const ColumnSpec* spec;
    Index src;
    std::vector<std::string> categories;  // categorical only, sorted
    double mean = 0.0, stddev = 1.0;      // continuous only
  };

  std::vector<EncodedColumn> feat_cols, main_cols, aux_cols;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& spec = schema.columns[c];
    if (spec.role == ColumnRole::ignore) continue;
    EncodedColumn ec;
    ec.spec = &spec;
    ec.src = col_index[c];
    if (spec.kind == ColumnKind::categorical) {
      std::set<std::string> cats;
      for (Index i = 0; i < n; ++i)
        if (is_train[static_cast<std::size_t>(i)])
          cats.insert(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ec.src)]);
      if (cats.empty())  // no training rows; fall back to the whole file
        for (Index i = 0; i < n; ++i)
          cats.insert(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ec.src)]);
      ec.categories.assign(cats.begin(), cats.end());
    } else if (spec.kind == ColumnKind::continuous) {
      double sum = 0.0, sq = 0.0;
      Index cnt = 0;
      for (Index i = 0; i < n; ++i) {
        if (!is_train[static_cast<std::size_t>(i)] && n_train > 0) continue;
        const double v = parse_number(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ec.src)],
                                      spec.name, static_cast<std::size_t>(i) + 1);
        sum += v;
        sq += v * v;
        ++cnt;
      }
      if (cnt > 0) {
        ec.mean = sum / static_cast<double>(cnt);
        const double var = sq / static_cast<double>(cnt) - ec.mean * ec.mean;
        ec.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
      }
    }
    switch (spec.role) {
      case ColumnRole::feature: feat_cols.push_back(std::move(ec)); break;
      case ColumnRole::target_main: main_cols.push_back(std::move(ec)); break;
      case ColumnRole::target_aux: aux_cols.push_back(std::move(ec)); break;
      case ColumnRole::ignore: break;
    }
  }
  if (main_cols.empty()) throw DataError("csv: schema names no target_main column");
  if (aux_cols.empty()) throw DataError("csv: schema names no target_aux column");

  auto width_of = [](const std::vector<EncodedColumn>& cols) {
    Index w = 0;
    for (const auto& ec : cols)
      w += ec.spec->kind == ColumnKind::categorical ? static_cast<Index>(ec.categories.size()) : 1;
    return w;
  };

  Dataset ds;
  ds.task_main = schema.task_main;
  ds.task_aux = schema.task_aux;
  ds.inputs.setZero(n, width_of(feat_cols));
  ds.targets_main.setZero(n, width_of(main_cols));
  ds.targets_aux.setZero(n, width_of(aux_cols));

  std::set<std::string> warned;
  auto encode = [&](const std::vector<EncodedColumn>& cols, Matrix& out) {
    Index at = 0;
    for (const auto& ec : cols) {
      if (ec.spec->kind == ColumnKind::categorical) {
        for (Index i = 0; i < n; ++i) {
          const std::string& cell = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ec.src)];
          auto it = std::lower_bound(ec.categories.begin(), ec.categories.end(), cell);
          if (it != ec.categories.end() && *it == cell) {
            out(i, at + static_cast<Index>(it - ec.categories.begin())) = 1.0;
          } else {
            const std::string key = ec.spec->name + "=" + cell;
            if (warnings && warned.insert(key).second)
              warnings->push_back("csv: unseen category '" + cell + "' in column '" +
                                  ec.spec->name + "' mapped to all-zeros");
          }
        }
        at += static_cast<Index>(ec.categories.size());
      } else {
        for (Index i = 0; i < n; ++i) {
          double v = parse_number(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(ec.src)],
                                  ec.spec->name, static_cast<std::size_t>(i) + 1);
          if (ec.spec->kind == ColumnKind::continuous) v = (v - ec.mean) / ec.stddev;
          out(i, at) = v;
        }
        at += 1;
      }
    }
  };
  encode(feat_cols, ds.inputs);
  encode(main_cols, ds.targets_main);
  encode(aux_cols, ds.targets_aux);

  for (const auto& ec : feat_cols) {
    if (ec.spec->kind == ColumnKind::categorical)
      for (const auto& cat : ec.categories) ds.feature_names.push_back(ec.spec->name + "=" + cat);
    else
      ds.feature_names.push_back(ec.spec->name);
  }

  auto check_binary = [](const Matrix& t, TaskKind kind, const char* which) {
    if (kind != TaskKind::classification) return;
    for (Index i = 0; i < t.size(); ++i)
      if (t.data()[i] != 0.0 && t.data()[i] != 1.0)
        throw DataError(std::string("csv: ") + which +
                        " declared classification but has values outside {0,1}");
  };
  check_binary(ds.targets_main, ds.task_main, "target_main");
  check_binary(ds.targets_aux, ds.task_aux, "target_aux");
  return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& csv_path) {
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw DataError("csv: cannot write: " + csv_path.string());
  for (Index j = 0; j < dataset.inputs.cols(); ++j) os << "x" << j << ",";
  for (Index j = 0; j < dataset.targets_main.cols(); ++j) os << "ym" << j << ",";
  for (Index j = 0; j < dataset.targets_aux.cols(); ++j)
    os << "ya" << j << (j + 1 < dataset.targets_aux.cols() ? "," : "");
  os << "\n";
  for (Index i = 0; i < dataset.rows(); ++i) {
    for (Index j = 0; j < dataset.inputs.cols(); ++j) os << fmt17(dataset.inputs(i, j)) << ",";
    for (Index j = 0; j < dataset.targets_main.cols(); ++j)
      os << fmt17(dataset.targets_main(i, j)) << ",";
    for (Index j = 0; j < dataset.targets_aux.cols(); ++j)
      os << fmt17(dataset.targets_aux(i, j)) << (j + 1 < dataset.targets_aux.cols() ? "," : "");
    os << "\n";
  }
}

CsvSchema raw_schema_for(const Dataset& dataset, SplitFractions split, std::uint64_t split_seed) {
  CsvSchema schema;
  schema.task_main = dataset.task_main;
  schema.task_aux = dataset.task_aux;
  schema.split = split;
  schema.split_seed = split_seed;
  for (Index j = 0; j < dataset.inputs.cols(); ++j)
    schema.columns.push_back({"x" + std::to_string(j), ColumnRole::feature, ColumnKind::raw});
  for (Index j = 0; j < dataset.targets_main.cols(); ++j)
    schema.columns.push_back({"ym" + std::to_string(j), ColumnRole::target_main, ColumnKind::raw});
  for (Index j = 0; j < dataset.targets_aux.cols(); ++j)
    schema.columns.push_back({"ya" + std::to_string(j), ColumnRole::target_aux, ColumnKind::raw});
  return schema;
}

namespace {

constexpr char kDataMagic[8] = {'H', 'Y', 'D', 'A', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kDataVersion = 1;

void write_matrix(std::ostream& os, const Matrix& m) {
  const std::uint64_t r = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t c = static_cast<std::uint64_t>(m.cols());
  os.write(reinterpret_cast<const char*>(&r), sizeof(r));
  os.write(reinterpret_cast<const char*>(&c), sizeof(c));
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
}

Matrix read_matrix(std::istream& is) {
  std::uint64_t r = 0, c = 0;
  is.read(reinterpret_cast<char*>(&r), sizeof(r));
  is.read(reinterpret_cast<char*>(&c), sizeof(c));
  if (!is) throw DataError("dataset: truncated header");
  Matrix m(static_cast<Index>(r), static_cast<Index>(c));
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!is) throw DataError("dataset: truncated payload");
  return m;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("dataset: cannot write: " + path.string());
  os.write(kDataMagic, sizeof(kDataMagic));
  os.write(reinterpret_cast<const char*>(&kDataVersion), sizeof(kDataVersion));
  const std::uint8_t tm = dataset.task_main == TaskKind::classification ? 1 : 0;
  const std::uint8_t ta = dataset.task_aux == TaskKind::classification ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&tm), 1);
  os.write(reinterpret_cast<const char*>(&ta), 1);
  write_matrix(os, dataset.inputs);
  write_matrix(os, dataset.targets_main);
  write_matrix(os, dataset.targets_aux);
  const std::uint64_t n_names = dataset.feature_names.size();
  os.write(reinterpret_cast<const char*>(&n_names), sizeof(n_names));
  for (const auto& name : dataset.feature_names) {
    const std::uint64_t len = name.size();
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(name.data(), static_cast<std::streamsize>(len));
  }
  if (!os) throw DataError("dataset: write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("dataset: cannot open: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kDataMagic, sizeof(magic)) != 0)
    throw DataError("dataset: bad magic: " + path.string());
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kDataVersion) throw DataError("dataset: unsupported version");
  std::uint8_t tm = 0, ta = 0;
  is.read(reinterpret_cast<char*>(&tm), 1);
  is.read(reinterpret_cast<char*>(&ta), 1);
  Dataset ds;
  ds.task_main = tm ? TaskKind::classification : TaskKind::regression;
  ds.task_aux = ta ? TaskKind::classification : TaskKind::regression;
  ds.inputs = read_matrix(is);
  ds.targets_main = read_matrix(is);
  ds.targets_aux = read_matrix(is);
  std::uint64_t n_names = 0;
  is.read(reinterpret_cast<char*>(&n_names), sizeof(n_names));
  for (std::uint64_t i = 0; is && i < n_names; ++i) {
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(len));
    ds.feature_names.push_back(std::move(name));
  }
  return ds;
}

// ---------------------------------------------------------------------------

SplitBatcher::SplitBatcher(const Dataset& dataset, Index batch_size, std::uint64_t shuffle_seed)
    : dataset_(&dataset), batch_size_(batch_size), seed_(shuffle_seed) {
  if (batch_size_ < 1) throw ConfigError("SplitBatcher: batch size must be >= 1");
  if (dataset.rows() == 0) throw ConfigError("SplitBatcher: empty dataset");
}

Index SplitBatcher::steps_per_epoch() const {
  return (dataset_->rows() + batch_size_ - 1) / batch_size_;
}

void SplitBatcher::start_epoch() {
  ++epoch_;
  cursor_ = 0;
  order_ = shuffled_indices(dataset_->rows(), Rng(seed_).fork(static_cast<std::uint64_t>(epoch_)));
}

Batch SplitBatcher::next_batch() {
  if (epoch_ < 0 || cursor_ >= dataset_->rows()) start_epoch();
  const Index end = std::min(cursor_ + batch_size_, dataset_->rows());
  std::vector<Index> ids(order_.begin() + cursor_, order_.begin() + end);
  cursor_ = end;
  Dataset rows = select_rows(*dataset_, ids);
  Batch b;
  b.inputs = std::move(rows.inputs);
  b.targets_main = std::move(rows.targets_main);
  b.targets_aux = std::move(rows.targets_aux);
  b.indices = std::move(ids);
  return b;
}

}  // namespace hyda
