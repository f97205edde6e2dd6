#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fundmatch/corpus.hpp"

namespace fundmatch {

inline constexpr std::string_view kBaselineDocId = "__baseline__";

struct EmbeddingVector {
  std::string doc_id;
  std::vector<double> components;
  std::string model_tag;
  bool debiased = false;

  std::size_t dim() const { return components.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Vectors for one model, stored contiguously (row-major) for the scoring
/// kernels. Built by a single writer, then read-only.
class VectorStore {
 public:
  VectorStore() = default;
  VectorStore(std::string model_tag, std::size_t dim);

  /// Enforces equal dim and model_tag, unique doc_id, finite components, and
  /// consistent debias state (a debiased entry requires a baseline).
  void add(const EmbeddingVector& v);
  void set_baseline(EmbeddingVector baseline);

  const std::string& model_tag() const { return model_tag_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool debiased() const { return debiased_; }
  const std::optional<EmbeddingVector>& baseline() const { return baseline_; }
  const std::vector<std::string>& ids() const { return ids_; }

  bool contains(std::string_view doc_id) const { return index_.find(doc_id) != index_.end(); }
  /// Throws ValidationError naming the doc_id when absent.
  std::span<const double> at(std::string_view doc_id) const;
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  EmbeddingVector vector(std::size_t i) const;

  bool operator==(const VectorStore& other) const;

 private:
  std::string model_tag_;
  std::size_t dim_ = 0;
  bool debiased_ = false;
  std::optional<EmbeddingVector> baseline_;
  std::vector<std::string> ids_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<double> data_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string model_tag() const = 0;
  /// One vector per document, in input order. Must be deterministic for
  /// identical text and model_tag.
  virtual std::vector<EmbeddingVector> embed(std::span<const ScholarlyDocument> docs) = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercased ASCII alphanumeric runs; bytes >= 0x80 are kept inside tokens
/// so UTF-8 words are not split.
std::vector<std::string> hash_tokens(std::string_view text);

/// Feature-hashing embedding: FNV-1a bucket counts (title tokens weigh 2,
/// body and keyword tokens 1), L2-normalized. No tokens gives the zero vector.
EmbeddingVector hash_embed(const ScholarlyDocument& doc, std::size_t dim = 64);

class HashProvider final : public EmbeddingProvider {
 public:
  explicit HashProvider(std::size_t dim = 64);
  std::string model_tag() const override;
  std::vector<EmbeddingVector> embed(std::span<const ScholarlyDocument> docs) override;

 private:
  std::size_t dim_;
};

/// Serves precomputed vectors; the baseline request maps to the store's
/// "__baseline__" row.
class ImportProvider final : public EmbeddingProvider {
 public:
  explicit ImportProvider(VectorStore store);
  std::string model_tag() const override { return store_.model_tag(); }
  std::vector<EmbeddingVector> embed(std::span<const ScholarlyDocument> docs) override;

 private:
  VectorStore store_;
};

/// Runs an external executable: `<exe> --in docs.jsonl --out vectors.jsonl --model <tag>`.
class SidecarProvider final : public EmbeddingProvider {
 public:
  SidecarProvider(std::filesystem::path executable, std::string model, std::vector<std::string> extra_args = {});
  std::string model_tag() const override { return model_; }
  std::vector<EmbeddingVector> embed(std::span<const ScholarlyDocument> docs) override;

 private:
  std::filesystem::path executable_;
  std::string model_;
  std::vector<std::string> extra_args_;
};

/// Validated provider call: arity, equal dims, finite values; failures carry
/// doc_id context.
std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider, std::span<const ScholarlyDocument> docs);

/// Embedding of the empty document under the provider's own template.
EmbeddingVector compute_baseline(EmbeddingProvider& provider);

/// v - ((v.b)/(b.b)) b; a zero baseline leaves v unchanged. Both set debiased.
EmbeddingVector debias(const EmbeddingVector& v, const EmbeddingVector& baseline);

/// Projects every entry against the baseline; the result carries it.
VectorStore debias_store(const VectorStore& store, const EmbeddingVector& baseline);

VectorStore import_vectors(const std::filesystem::path& path);
void export_vectors(const VectorStore& store, const std::filesystem::path& path);

}  // namespace fundmatch
