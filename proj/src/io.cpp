#include "igam/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "igam/error.hpp"

namespace igam::io {
namespace {

static_assert(std::endian::native == std::endian::little, "binary embedding I/O assumes a little-endian host");

constexpr std::size_t kHeaderBytes = 8 + 4 + 8;

template <typename T>
T load_le(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

[[noreturn]] void fail_at(std::size_t offset, const std::string& what) {
  throw InputError("byte offset " + std::to_string(offset) + ": " + what);
}

// ---- JSON field helpers with path-qualified errors --------------------------

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "." + key + ": missing");
  return *it;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw InputError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path + ": expected a number");
  return v.get<double>();
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_double(v[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path + ": expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw InputError(path + ": expected a boolean");
  return v.get<bool>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw InputError(path + "." + key + ": unknown key");
  }
}

json matrix_row_major(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Matrix matrix_from_row_major(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols,
                             const std::string& path) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw InputError(path + ": expected " + std::to_string(rows * cols) + " entries, got " +
                     std::to_string(v.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string info_variant_name(InfoVariant v) {
  return v == InfoVariant::kPaperDoubleExp ? "paper-double-exp" : "softmax-single-exp";
}

InfoVariant info_variant_from(const std::string& s, const std::string& path) {
  if (s == "paper-double-exp") return InfoVariant::kPaperDoubleExp;
  if (s == "softmax-single-exp") return InfoVariant::kSoftmaxSingleExp;
  throw InputError(path + ": expected paper-double-exp or softmax-single-exp");
}

std::string margin_variant_name(MarginVariant v) { return v == MarginVariant::kClamped ? "clamped" : "signed"; }

MarginVariant margin_variant_from(const std::string& s, const std::string& path) {
  if (s == "clamped") return MarginVariant::kClamped;
  if (s == "signed") return MarginVariant::kSigned;
  throw InputError(path + ": expected clamped or signed");
}

ReferenceMode reference_from(const std::string& s, const std::string& path) {
  if (s == "sum") return ReferenceMode::kSum;
  if (s == "mean") return ReferenceMode::kMean;
  throw InputError(path + ": expected sum or mean");
}

}  // namespace

EmbeddingFormat embedding_format_from_string(const std::string& name) {
  if (name == "auto") return EmbeddingFormat::kAuto;
  if (name == "bin") return EmbeddingFormat::kBinary;
  if (name == "csv") return EmbeddingFormat::kCsv;
  throw InputError("unknown embedding format '" + name + "' (expected bin or csv)");
}

std::vector<EmbeddingRecord> parse_embeddings_binary(const std::string& bytes) {
  if (bytes.empty()) fail_at(0, "empty file");
  if (bytes.size() < kHeaderBytes) fail_at(bytes.size(), "truncated header");
  if (std::memcmp(bytes.data(), kEmbeddingMagic, sizeof(kEmbeddingMagic)) != 0) fail_at(0, "bad magic");
  const auto dim = load_le<std::uint32_t>(bytes, 8);
  const auto count = load_le<std::uint64_t>(bytes, 12);
  if (dim == 0) fail_at(8, "embedding dimension is zero");
  if (count == 0) fail_at(12, "file declares no records");

  const std::uint64_t record_bytes = 4 + 4 * static_cast<std::uint64_t>(dim);
  const std::uint64_t body = bytes.size() - kHeaderBytes;
  if (body / record_bytes < count) {
    fail_at(kHeaderBytes + (body / record_bytes) * record_bytes, "truncated record (declared " +
                                                                     std::to_string(count) + " records)");
  }
  if (body != count * record_bytes) fail_at(kHeaderBytes + count * record_bytes, "trailing bytes after last record");

  std::vector<EmbeddingRecord> out;
  out.reserve(count);
  std::size_t offset = kHeaderBytes;
  for (std::uint64_t r = 0; r < count; ++r) {
    EmbeddingRecord rec;
    rec.category = load_le<std::uint32_t>(bytes, offset);
    offset += 4;
    rec.vector.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      const float v = load_le<float>(bytes, offset);
      if (!std::isfinite(v)) fail_at(offset, "non-finite coordinate");
      rec.vector[k] = static_cast<double>(v);
      offset += 4;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EmbeddingRecord> parse_embeddings_csv(const std::string& text) {
  if (text.empty()) fail_at(0, "empty file");
  std::vector<EmbeddingRecord> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  int dim = -1;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> cells;
    std::vector<std::size_t> starts;
    std::size_t c0 = 0;
    while (true) {
      const std::size_t comma = line.find(',', c0);
      starts.push_back(line_start + c0);
      cells.push_back(line.substr(c0, comma == std::string_view::npos ? std::string_view::npos : comma - c0));
      if (comma == std::string_view::npos) break;
      c0 = comma + 1;
    }

    if (dim < 0) {
      if (cells.size() < 2 || cells[0] != "category") fail_at(line_start, "CSV header must be category,e0,...");
      for (std::size_t k = 1; k < cells.size(); ++k) {
        if (cells[k] != "e" + std::to_string(k - 1)) fail_at(starts[k], "unexpected header column");
      }
      dim = static_cast<int>(cells.size()) - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != dim + 1) {
      fail_at(line_start, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " columns, expected " + std::to_string(dim + 1));
    }
    EmbeddingRecord rec;
    std::uint32_t cat = 0;
    auto [p0, ec0] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), cat);
    if (ec0 != std::errc() || p0 != cells[0].data() + cells[0].size()) fail_at(starts[0], "bad category id");
    rec.category = cat;
    rec.vector.resize(dim);
    for (int k = 0; k < dim; ++k) {
      const auto& cell = cells[static_cast<std::size_t>(k) + 1];
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v)) {
        fail_at(starts[static_cast<std::size_t>(k) + 1], "bad coordinate '" + std::string(cell) + "'");
      }
      rec.vector[k] = v;
    }
    out.push_back(std::move(rec));
  }
  if (dim < 0) fail_at(0, "missing CSV header");
  if (out.empty()) fail_at(text.size(), "no records");
  return out;
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  const std::string bytes = read_file(path);
  if (format == EmbeddingFormat::kAuto) {
    const bool binary = bytes.size() >= 8 && std::memcmp(bytes.data(), kEmbeddingMagic, 8) == 0;
    format = binary ? EmbeddingFormat::kBinary : EmbeddingFormat::kCsv;
  }
  return format == EmbeddingFormat::kBinary ? parse_embeddings_binary(bytes) : parse_embeddings_csv(bytes);
}

std::string encode_embeddings_binary(const std::vector<EmbeddingRecord>& records) {
  if (records.empty()) throw InputError("no records to encode");
  const auto dim = static_cast<std::uint32_t>(records.front().vector.size());
  std::string out(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  store_le<std::uint32_t>(out, dim);
  store_le<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    if (r.vector.size() != static_cast<Eigen::Index>(dim)) throw InputError("ragged embedding dimensions");
    store_le<std::uint32_t>(out, r.category);
    for (Eigen::Index k = 0; k < r.vector.size(); ++k) store_le<float>(out, static_cast<float>(r.vector[k]));
  }
  return out;
}

std::string encode_embeddings_csv(const std::vector<EmbeddingRecord>& records) {
  if (records.empty()) throw InputError("no records to encode");
  const Eigen::Index dim = records.front().vector.size();
  std::string out = "category";
  for (Eigen::Index k = 0; k < dim; ++k) out += ",e" + std::to_string(k);
  out += '\n';
  char buf[64];
  for (const auto& r : records) {
    if (r.vector.size() != dim) throw InputError("ragged embedding dimensions");
    out += std::to_string(r.category);
    for (Eigen::Index k = 0; k < dim; ++k) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), r.vector[k]);
      out += ',';
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json to_json(const GlobalStats& stats) {
  json cats = json::array();
  for (const auto& [id, s] : stats.categories) {
    cats.push_back({{"id", id},
                    {"count", s.total},
                    {"windows", s.windows},
                    {"mean", vector_json(s.mean)},
                    {"cov_row_major", matrix_row_major(s.cov)}});
  }
  json doc = {{"p", stats.dim}, {"categories", cats}};
  if (!stats.absent.empty()) doc["absent"] = stats.absent;
  return doc;
}

GlobalStats stats_from_json(const json& doc) {
  GlobalStats out;
  const auto p = as_int(field(doc, "p", "stats"), "stats.p");
  if (p < 1) throw InputError("stats.p: must be >= 1");
  out.dim = static_cast<int>(p);
  const json& cats = field(doc, "categories", "stats");
  if (!cats.is_array()) throw InputError("stats.categories: expected an array");
  for (std::size_t k = 0; k < cats.size(); ++k) {
    const std::string path = "stats.categories[" + std::to_string(k) + "]";
    const json& c = cats[k];
    CategoryStats s;
    const auto id = as_int(field(c, "id", path), path + ".id");
    const auto count = as_int(field(c, "count", path), path + ".count");
    if (id < 0) throw InputError(path + ".id: must be >= 0");
    if (count < 1) throw InputError(path + ".count: must be >= 1");
    s.category = static_cast<CategoryId>(id);
    s.total = static_cast<std::size_t>(count);
    s.windows = c.contains("windows") ? static_cast<std::size_t>(as_int(c["windows"], path + ".windows")) : 1;
    const auto mean = as_doubles(field(c, "mean", path), path + ".mean");
    if (static_cast<std::int64_t>(mean.size()) != p) throw InputError(path + ".mean: expected " + std::to_string(p) + " entries");
    s.mean = Eigen::Map<const Vector>(mean.data(), p);
    s.cov = matrix_from_row_major(as_doubles(field(c, "cov_row_major", path), path + ".cov_row_major"), p, p,
                                  path + ".cov_row_major");
    if (!out.categories.emplace(s.category, std::move(s)).second) throw InputError(path + ".id: duplicate category");
  }
  if (doc.contains("absent")) {
    for (const auto& v : doc["absent"]) out.absent.push_back(static_cast<CategoryId>(as_int(v, "stats.absent")));
  }
  return out;
}

json to_json(const InfoAmountTable& table) {
  json info = json::object();
  for (const auto& [id, bits] : table.entries) info[std::to_string(id)] = bits;
  return {{"epoch", table.epoch}, {"info", info}};
}

InfoAmountTable info_from_json(const json& doc) {
  InfoAmountTable out;
  out.epoch = static_cast<int>(as_int(field(doc, "epoch", "info_table"), "info_table.epoch"));
  const json& info = field(doc, "info", "info_table");
  if (!info.is_object()) throw InputError("info_table.info: expected an object");
  for (const auto& [key, value] : info.items()) {
    const std::string path = "info_table.info." + key;
    std::uint32_t id = 0;
    auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
    if (ec != std::errc() || p != key.data() + key.size()) throw InputError(path + ": key is not a category id");
    const double bits = as_double(value, path);
    if (!std::isfinite(bits) || bits < 0.0) throw InputError(path + ": must be finite and >= 0");
    out.entries[id] = bits;
  }
  return out;
}

json to_json(const MarginMatrix& margins) {
  return {{"C", margins.classes()},
          {"categories", margins.categories},
          {"margins_row_major", matrix_row_major(margins.m)}};
}

MarginMatrix margins_from_json(const json& doc) {
  MarginMatrix out;
  const auto c = as_int(field(doc, "C", "margins"), "margins.C");
  if (c < 1) throw InputError("margins.C: must be >= 1");
  out.m = matrix_from_row_major(as_doubles(field(doc, "margins_row_major", "margins"), "margins.margins_row_major"), c,
                                c, "margins.margins_row_major");
  if (doc.contains("categories")) {
    for (const auto& v : doc["categories"]) out.categories.push_back(static_cast<CategoryId>(as_int(v, "margins.categories")));
    if (static_cast<std::int64_t>(out.categories.size()) != c) throw InputError("margins.categories: expected C entries");
  } else {
    for (std::int64_t k = 0; k < c; ++k) out.categories.push_back(static_cast<CategoryId>(k));
  }
  return out;
}

json to_json(const PlanResult& plan) {
  return {{"d_star", plan.d_star},
          {"R", plan.ratio},
          {"savings_percent", plan.savings_percent},
          {"windows", plan.windows},
          {"bytes_original", plan.bytes_original},
          {"bytes_new", plan.bytes_new},
          {"bytes_new_with_means", plan.bytes_new_with_means},
          {"mb_original", plan.megabytes_original()},
          {"mb_new", plan.megabytes_new()}};
}

json to_json(const EpochReport& r) {
  json doc = {{"epoch", r.epoch},
              {"per_class_accuracy", r.per_class_accuracy},
              {"info_amounts", r.info_amounts},
              {"bias_variance", r.bias_variance},
              {"pearson_info_acc", r.pearson_info_acc ? json(*r.pearson_info_acc) : json(nullptr)},
              {"pearson_count_acc", r.pearson_count_acc ? json(*r.pearson_count_acc) : json(nullptr)},
              {"loss_mean", r.loss_mean},
              {"snapshots", r.snapshots},
              {"max_margin", r.margins.size() > 0 ? r.margins.maxCoeff() : 0.0},
              {"margins_row_major", matrix_row_major(r.margins)}};
  if (!r.info_amounts_pooled.empty()) doc["info_amounts_pooled"] = r.info_amounts_pooled;
  return doc;
}

json to_json(const CosineClassifier& clf) {
  return {{"p", clf.weights.rows()}, {"C", clf.weights.cols()}, {"s", clf.scale},
          {"weights_row_major", matrix_row_major(clf.weights)}};
}

CosineClassifier classifier_from_json(const json& doc) {
  CosineClassifier clf;
  const auto p = as_int(field(doc, "p", "weights"), "weights.p");
  const auto c = as_int(field(doc, "C", "weights"), "weights.C");
  if (p < 1 || c < 1) throw InputError("weights: p and C must be >= 1");
  if (doc.contains("s")) clf.scale = as_double(doc["s"], "weights.s");
  clf.weights = matrix_from_row_major(as_doubles(field(doc, "weights_row_major", "weights"), "weights.weights_row_major"),
                                      p, c, "weights.weights_row_major");
  return clf;
}

RunConfig run_config_from_json(const json& doc) {
  reject_unknown(doc, {"dataset", "train"}, "config");
  RunConfig cfg;

  const json& ds = field(doc, "dataset", "config");
  reject_unknown(ds, {"classes", "dim", "n_train", "n_test", "spreads", "spread_min", "spread_max",
                      "mean_separation", "seed"},
                 "dataset");
  SyntheticSpec& spec = cfg.dataset;
  auto int_field = [](const json& obj, const char* key, const std::string& path, int fallback) {
    return obj.contains(key) ? static_cast<int>(as_int(obj[key], path + "." + key)) : fallback;
  };
  spec.classes = int_field(ds, "classes", "dataset", spec.classes);
  spec.dim = int_field(ds, "dim", "dataset", spec.dim);
  spec.n_train = int_field(ds, "n_train", "dataset", spec.n_train);
  spec.n_test = int_field(ds, "n_test", "dataset", spec.n_test);
  if (ds.contains("mean_separation")) spec.mean_separation = as_double(ds["mean_separation"], "dataset.mean_separation");
  if (ds.contains("seed")) spec.seed = static_cast<std::uint64_t>(as_int(ds["seed"], "dataset.seed"));
  if (ds.contains("spreads")) {
    if (ds.contains("spread_min") || ds.contains("spread_max")) {
      throw InputError("dataset.spreads: give either spreads or spread_min/spread_max");
    }
    spec.spreads = as_doubles(ds["spreads"], "dataset.spreads");
    if (static_cast<int>(spec.spreads.size()) != spec.classes) {
      throw InputError("dataset.spreads: expected " + std::to_string(spec.classes) + " entries, got " +
                       std::to_string(spec.spreads.size()));
    }
  } else {
    const double lo = as_double(field(ds, "spread_min", "dataset"), "dataset.spread_min");
    const double hi = as_double(field(ds, "spread_max", "dataset"), "dataset.spread_max");
    if (!(lo > 0.0) || !(hi > 0.0)) throw InputError("dataset.spread_min: spreads must be positive");
    spec.spreads = log_spaced(spec.classes, lo, hi);
  }

  TrainConfig& tc = cfg.train;
  if (doc.contains("train")) {
    const json& tr = doc["train"];
    reject_unknown(tr, {"loss", "epochs", "lr", "momentum", "batch_size", "s", "queue_len", "info_variant",
                        "ibar", "margin_variant", "margin_scale", "seed", "zero_margins", "verify_pooled"},
                   "train");
    if (tr.contains("loss")) {
      const json& l = tr["loss"];
      auto one = [](const json& v, const std::string& path) {
        try {
          return loss_kind_from_string(as_string(v, path));
        } catch (const InputError& e) {
          throw InputError(path + ": " + e.what());
        }
      };
      if (l.is_array()) {
        for (std::size_t k = 0; k < l.size(); ++k) cfg.losses.push_back(one(l[k], "train.loss[" + std::to_string(k) + "]"));
        if (cfg.losses.empty()) throw InputError("train.loss: empty sweep");
      } else {
        cfg.losses.push_back(one(l, "train.loss"));
      }
    }
    tc.epochs = int_field(tr, "epochs", "train", tc.epochs);
    tc.batch_size = int_field(tr, "batch_size", "train", tc.batch_size);
    if (tr.contains("lr")) tc.lr = as_double(tr["lr"], "train.lr");
    if (tr.contains("momentum")) tc.momentum = as_double(tr["momentum"], "train.momentum");
    if (tr.contains("s")) tc.scale = as_double(tr["s"], "train.s");
    if (tr.contains("queue_len")) {
      const auto d = as_int(tr["queue_len"], "train.queue_len");
      if (d < 1) throw InputError("train.queue_len: must be >= 1");
      tc.queue_len = static_cast<std::size_t>(d);
    }
    if (tr.contains("info_variant")) {
      tc.normalization.variant = info_variant_from(as_string(tr["info_variant"], "train.info_variant"), "train.info_variant");
    }
    if (tr.contains("ibar")) tc.normalization.reference = reference_from(as_string(tr["ibar"], "train.ibar"), "train.ibar");
    if (tr.contains("margin_variant")) {
      tc.margin_variant = margin_variant_from(as_string(tr["margin_variant"], "train.margin_variant"), "train.margin_variant");
    }
    if (tr.contains("margin_scale")) tc.margin_scale = as_double(tr["margin_scale"], "train.margin_scale");
    if (tr.contains("seed")) tc.seed = static_cast<std::uint64_t>(as_int(tr["seed"], "train.seed"));
    if (tr.contains("zero_margins")) tc.zero_margins = as_bool(tr["zero_margins"], "train.zero_margins");
    if (tr.contains("verify_pooled")) tc.verify_pooled = as_bool(tr["verify_pooled"], "train.verify_pooled");
  }
  if (cfg.losses.empty()) cfg.losses.push_back(tc.loss);
  tc.loss = cfg.losses.front();
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json losses = json::array();
  for (LossKind k : cfg.losses) losses.push_back(to_string(k));
  const SyntheticSpec& d = cfg.dataset;
  const TrainConfig& t = cfg.train;
  return {{"dataset",
           {{"classes", d.classes},
            {"dim", d.dim},
            {"n_train", d.n_train},
            {"n_test", d.n_test},
            {"spreads", d.spreads},
            {"mean_separation", d.mean_separation},
            {"seed", d.seed}}},
          {"train",
           {{"loss", losses},
            {"epochs", t.epochs},
            {"lr", t.lr},
            {"momentum", t.momentum},
            {"batch_size", t.batch_size},
            {"s", t.scale},
            {"queue_len", t.queue_len},
            {"info_variant", info_variant_name(t.normalization.variant)},
            {"ibar", t.normalization.reference == ReferenceMode::kSum ? "sum" : "mean"},
            {"margin_variant", margin_variant_name(t.margin_variant)},
            {"margin_scale", t.margin_scale},
            {"seed", t.seed},
            {"zero_margins", t.zero_margins},
            {"verify_pooled", t.verify_pooled}}}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << contents;
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace igam::io
