#include "fundmatch/embedding.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "fundmatch/error.hpp"
#include "fundmatch/kernels.hpp"
#include "fundmatch/parallel.hpp"

extern char** environ;

namespace fundmatch {

using nlohmann::json;

VectorStore::VectorStore(std::string model_tag, std::size_t dim) : model_tag_(std::move(model_tag)), dim_(dim) {}

void VectorStore::add(const EmbeddingVector& v) {
  if (v.dim() != dim_)
    throw ValidationError("vector '" + v.doc_id + "' has dim " + std::to_string(v.dim()) + ", store dim is " +
                          std::to_string(dim_));
  if (v.model_tag != model_tag_)
    throw ValidationError("vector '" + v.doc_id + "' has model_tag '" + v.model_tag + "', store has '" + model_tag_ +
                          "'");
  for (double x : v.components)
    if (!std::isfinite(x)) throw ValidationError("vector '" + v.doc_id + "' has a non-finite component");
  if (v.debiased && !baseline_) throw ValidationError("debiased vector '" + v.doc_id + "' in a store without baseline");
  if (!ids_.empty() && v.debiased != debiased_)
    throw ValidationError("vector '" + v.doc_id + "' mixes debiased and raw entries");
  if (index_.count(v.doc_id)) throw ValidationError("duplicate doc_id '" + v.doc_id + "'");
  debiased_ = v.debiased;
  index_.emplace(v.doc_id, ids_.size());
  ids_.push_back(v.doc_id);
  data_.insert(data_.end(), v.components.begin(), v.components.end());
}

void VectorStore::set_baseline(EmbeddingVector baseline) {
  if (baseline.dim() != dim_) throw ValidationError("baseline dim does not match the store");
  baseline_ = std::move(baseline);
}

std::span<const double> VectorStore::at(std::string_view doc_id) const {
  auto it = index_.find(doc_id);
  if (it == index_.end()) throw ValidationError("missing vector for doc_id '" + std::string(doc_id) + "'");
  return row(it->second);
}

EmbeddingVector VectorStore::vector(std::size_t i) const {
  auto r = row(i);
  return {ids_[i], {r.begin(), r.end()}, model_tag_, debiased_};
}

bool VectorStore::operator==(const VectorStore& other) const {
  return model_tag_ == other.model_tag_ && dim_ == other.dim_ && debiased_ == other.debiased_ &&
         baseline_ == other.baseline_ && ids_ == other.ids_ && data_ == other.data_;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> hash_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingVector hash_embed(const ScholarlyDocument& doc, std::size_t dim) {
  if (dim < 2) throw ValidationError("hash_embed: dim must be >= 2");
  std::vector<double> v(dim, 0.0);
  auto add = [&](std::string_view text, double weight) {
    for (const auto& tok : hash_tokens(text)) v[fnv1a64(tok) % dim] += weight;
  };
  add(doc.title, 2.0);
  add(doc.body, 1.0);
  for (const auto& k : doc.keywords) add(k, 1.0);
  const double n = kernels::norm(v);
  if (n > 0.0)
    for (auto& x : v) x /= n;
  return {doc.doc_id, std::move(v), "hash-fnv1a-" + std::to_string(dim), false};
}

HashProvider::HashProvider(std::size_t dim) : dim_(dim) {
  if (dim < 2) throw ValidationError("hash provider: dim must be >= 2");
}

std::string HashProvider::model_tag() const { return "hash-fnv1a-" + std::to_string(dim_); }

std::vector<EmbeddingVector> HashProvider::embed(std::span<const ScholarlyDocument> docs) {
  std::vector<EmbeddingVector> out(docs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(docs.size()); ++i)
    out[static_cast<std::size_t>(i)] = hash_embed(docs[static_cast<std::size_t>(i)], dim_);
  return out;
}

ImportProvider::ImportProvider(VectorStore store) : store_(std::move(store)) {}

std::vector<EmbeddingVector> ImportProvider::embed(std::span<const ScholarlyDocument> docs) {
  std::vector<EmbeddingVector> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    if (doc.doc_id == kBaselineDocId) {
      if (!store_.baseline()) throw ValidationError("imported vectors carry no '__baseline__' row");
      out.push_back(*store_.baseline());
      continue;
    }
    auto row = store_.at(doc.doc_id);
    out.push_back({doc.doc_id, {row.begin(), row.end()}, store_.model_tag(), false});
  }
  return out;
}

SidecarProvider::SidecarProvider(std::filesystem::path executable, std::string model,
                                 std::vector<std::string> extra_args)
    : executable_(std::move(executable)), model_(std::move(model)), extra_args_(std::move(extra_args)) {}

namespace {

std::filesystem::path make_temp_dir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto dir = std::filesystem::temp_directory_path() / ("fundmatch-sidecar-" + std::to_string(rd()));
    if (std::filesystem::create_directory(dir)) return dir;
  }
  throw IoError("cannot create a temporary directory");
}

struct TempDir {
  std::filesystem::path path = make_temp_dir();
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

int run_process(const std::vector<std::string>& argv, const std::filesystem::path& stderr_path) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw IoError("cannot start sidecar '" + argv[0] + "': " + std::strerror(rc));
  int status = 0;
  while (waitpid(pid, &status, 0) < 0)
    if (errno != EINTR) throw IoError("waitpid failed for sidecar");
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

std::vector<EmbeddingVector> SidecarProvider::embed(std::span<const ScholarlyDocument> docs) {
  if (docs.empty()) return {};
  TempDir tmp;
  const auto in_path = tmp.path / "docs.jsonl";
  const auto out_path = tmp.path / "vectors.jsonl";
  const auto err_path = tmp.path / "stderr.txt";
  {
    std::ofstream in(in_path, std::ios::binary);
    for (const auto& d : docs)
      in << json{{"doc_id", d.doc_id}, {"title", d.title}, {"body", d.body}, {"keywords", d.keywords}}.dump() << '\n';
    if (!in) throw IoError("cannot write " + in_path.string());
  }
  std::vector<std::string> argv{executable_.string(), "--in", in_path.string(), "--out", out_path.string(),
                                "--model", model_};
  argv.insert(argv.end(), extra_args_.begin(), extra_args_.end());
  const int code = run_process(argv, err_path);
  if (code != 0) {
    std::ifstream err(err_path);
    std::string first;
    std::getline(err, first);
    throw IoError("sidecar exited with code " + std::to_string(code) + ": " + first);
  }
  auto store = import_vectors(out_path);
  std::vector<EmbeddingVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    if (d.doc_id == kBaselineDocId && store.baseline()) {
      out.push_back(*store.baseline());
      continue;
    }
    auto row = store.at(d.doc_id);
    out.push_back({d.doc_id, {row.begin(), row.end()}, store.model_tag(), false});
  }
  return out;
}

std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider, std::span<const ScholarlyDocument> docs) {
  if (docs.empty()) return {};
  std::vector<EmbeddingVector> out;
  try {
    out = provider.embed(docs);
  } catch (const std::exception& e) {
    throw IoError("embedding provider '" + provider.model_tag() + "' failed on batch starting at doc_id '" +
                  docs.front().doc_id + "': " + e.what());
  }
  if (out.size() != docs.size())
    throw ValidationError("provider returned " + std::to_string(out.size()) + " vectors for " +
                          std::to_string(docs.size()) + " documents");
  const auto dim = out.front().dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].doc_id != docs[i].doc_id)
      throw ValidationError("provider returned '" + out[i].doc_id + "' where '" + docs[i].doc_id + "' was expected");
    if (out[i].dim() != dim)
      throw ValidationError("dimension mismatch at doc_id '" + docs[i].doc_id + "'");
    for (double x : out[i].components)
      if (!std::isfinite(x)) throw ValidationError("non-finite component at doc_id '" + docs[i].doc_id + "'");
  }
  return out;
}

EmbeddingVector compute_baseline(EmbeddingProvider& provider) {
  const ScholarlyDocument empty{std::string(kBaselineDocId), DocKind::publication, "", "", {}};
  return embed_batch(provider, std::span(&empty, 1)).front();
}

EmbeddingVector debias(const EmbeddingVector& v, const EmbeddingVector& baseline) {
  if (v.dim() != baseline.dim())
    throw ValidationError("debias: dim mismatch for doc_id '" + v.doc_id + "'");
  EmbeddingVector out = v;
  out.debiased = true;
  const double bb = kernels::dot(baseline.components, baseline.components);
  if (bb == 0.0) return out;
  const double scale = kernels::dot(v.components, baseline.components) / bb;
  for (std::size_t i = 0; i < out.components.size(); ++i) out.components[i] -= scale * baseline.components[i];
  return out;
}

VectorStore debias_store(const VectorStore& store, const EmbeddingVector& baseline) {
  VectorStore out(store.model_tag(), store.dim());
  out.set_baseline(baseline);
  std::vector<EmbeddingVector> projected(store.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(store.size()); ++i) {
    auto v = store.vector(static_cast<std::size_t>(i));
    projected[static_cast<std::size_t>(i)] = debias(v, baseline);
  }
  for (const auto& v : projected) out.add(v);
  return out;
}

VectorStore import_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) break;
  }
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw fail("malformed header");
  }
  std::string model_tag;
  std::size_t dim = 0;
  bool debiased = false;
  try {
    model_tag = header.at("model_tag").get<std::string>();
    dim = header.at("dim").get<std::size_t>();
    debiased = header.value("debiased", false);
  } catch (const json::exception&) {
    throw fail("header needs model_tag and dim");
  }

  VectorStore store(model_tag, dim);
  std::vector<EmbeddingVector> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    EmbeddingVector v;
    try {
      auto j = json::parse(line);
      v.doc_id = j.at("doc_id").get<std::string>();
      v.components = j.at("v").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw fail("malformed row");
    }
    v.model_tag = model_tag;
    if (v.dim() != dim)
      throw fail("doc_id '" + v.doc_id + "' has dim " + std::to_string(v.dim()) + ", header says " +
                 std::to_string(dim));
    if (v.doc_id == kBaselineDocId) {
      if (store.baseline()) throw fail("duplicate doc_id '__baseline__'");
      store.set_baseline(std::move(v));
      continue;
    }
    v.debiased = debiased;
    rows.push_back(std::move(v));
  }
  if (debiased && !store.baseline()) throw ValidationError(path.string() + ": debiased vectors without a baseline row");
  for (const auto& v : rows) store.add(v);
  return store;
}

void export_vectors(const VectorStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << json{{"model_tag", store.model_tag()}, {"dim", store.dim()}, {"debiased", store.debiased()}}.dump() << '\n';
  if (store.baseline())
    out << json{{"doc_id", kBaselineDocId}, {"v", store.baseline()->components}}.dump() << '\n';
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto r = store.row(i);
    out << json{{"doc_id", store.ids()[i]}, {"v", std::vector<double>(r.begin(), r.end())}}.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace fundmatch
