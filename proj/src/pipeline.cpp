#include "fundmatch/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <set>

#include "fundmatch/error.hpp"

namespace fundmatch {

Corpus load_workspace(const std::filesystem::path& dir, int reference_year) {
  Corpus c;
  auto pubs = ingest_publications(dir / files::publications, FileFormat::jsonl, {reference_year});
  auto calls = ingest_calls(dir / files::calls, FileFormat::jsonl);
  if (!pubs.rejects.empty() || !calls.rejects.empty())
    throw ValidationError(dir.string() + ": workspace files contain invalid records (re-run ingest)");
  c.publications = std::move(pubs.records);
  c.calls = std::move(calls.records);
  c.researchers = read_researchers(dir / files::researchers);
  c.vectors = import_vectors(dir / files::vectors);
  return c;
}

std::string corpus_digest(const Corpus& corpus) {
  std::string canonical;
  for (const auto& p : corpus.publications) canonical += to_json(p).dump() + '\n';
  canonical += "--calls\n";
  for (const auto& c : corpus.calls) canonical += to_json(c).dump() + '\n';
  canonical += "--researchers\n";
  for (const auto& r : corpus.researchers) canonical += to_json(r).dump() + '\n';
  canonical += "--vectors\n";
  const auto& v = corpus.vectors;
  canonical += v.model_tag() + ' ' + std::to_string(v.dim()) + (v.debiased() ? " debiased\n" : " raw\n");
  auto hash_row = [&](std::span<const double> row) {
    canonical.append(reinterpret_cast<const char*>(row.data()), row.size_bytes());
  };
  if (v.baseline()) hash_row(v.baseline()->components);
  for (std::size_t i = 0; i < v.size(); ++i) {
    canonical += v.ids()[i];
    canonical.push_back('\0');
    hash_row(v.row(i));
  }
  return sha256_hex(canonical);
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineConfig& config,
                                                 const std::filesystem::path& workspace) {
  const auto& opts = config.provider_options;
  auto option = [&](const std::string& key, const std::string& fallback) {
    auto it = opts.find(key);
    return it == opts.end() ? fallback : it->second;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : workspace / path;
  };
  if (config.provider == "hash") {
    std::size_t dim = 0;
    try {
      dim = std::stoul(option("dim", "256"));
    } catch (const std::exception&) {
      throw ValidationError("provider_options.dim must be an integer");
    }
    return std::make_unique<HashProvider>(dim);
  }
  if (config.provider == "import") {
    auto path = option("path", "");
    if (path.empty()) throw ValidationError("provider 'import' needs provider_options.path");
    return std::make_unique<ImportProvider>(import_vectors(resolve(path)));
  }
  if (config.provider == "sidecar") {
    auto exe = option("executable", "");
    if (exe.empty()) throw ValidationError("provider 'sidecar' needs provider_options.executable");
    std::filesystem::path exe_path(exe);
    if (exe_path.has_parent_path()) exe_path = resolve(exe);
    return std::make_unique<SidecarProvider>(exe_path, option("model", "allenai/specter2_base"));
  }
  throw ValidationError("unknown provider '" + config.provider + "'");
}

VectorStore embed_corpus(EmbeddingProvider& provider, const std::vector<PublicationRecord>& pubs,
                         const std::vector<CallRecord>& calls, bool debias_vectors) {
  std::vector<ScholarlyDocument> docs;
  docs.reserve(pubs.size() + calls.size());
  for (const auto& p : pubs) docs.push_back(to_document(p));
  for (const auto& c : calls) docs.push_back(to_document(c));
  auto vectors = embed_batch(provider, docs);
  auto baseline = compute_baseline(provider);
  baseline.model_tag = provider.model_tag();
  const std::size_t dim = vectors.empty() ? baseline.dim() : vectors.front().dim();
  if (baseline.dim() != dim) throw ValidationError("baseline dim differs from document vectors");
  VectorStore raw(provider.model_tag(), dim);
  raw.set_baseline(baseline);
  for (auto& v : vectors) {
    v.model_tag = provider.model_tag();
    raw.add(v);
  }
  return debias_vectors ? debias_store(raw, baseline) : raw;
}

std::vector<std::string> indicator_names(const PipelineConfig& config) {
  std::vector<std::string> names;
  for (const auto& ind : config.indicators) names.push_back(ind.name);
  return names;
}

std::vector<std::string> call_ids(const std::vector<CallRecord>& calls) {
  std::vector<std::string> ids;
  for (const auto& c : calls) ids.push_back(c.call_id);
  return ids;
}

RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config, KernelChoice kernel) {
  validate(config);
  RunResult r;
  const auto index = index_publications(corpus.publications);
  r.population = filter_population(corpus.researchers, index, study_window(config), config.population_min_pubs);
  r.sets = build_sets(r.population, config.indicators, config.reference_year, index);
  const auto calls = call_ids(corpus.calls);
  r.scores = score_matrix(r.sets, corpus.vectors, calls,
                          {config.top_fraction_denominator, config.normalization_scope, kernel});
  std::set<std::string> researchers;
  for (const auto& p : r.population) researchers.insert(p.researcher_id);
  r.ranking = RankingBook(r.scores, config.percentile_cutoff, indicator_names(config), std::move(researchers),
                          std::set<std::string>(calls.begin(), calls.end()));
  r.analytics = analyze(r.ranking.assignments(), indicator_names(config), calls.size());
  return r;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::shared_ptr<const RunSnapshot> make_snapshot(std::shared_ptr<const Corpus> corpus, const PipelineConfig& config,
                                                 std::string corpus_digest_hint) {
  auto snap = std::make_shared<RunSnapshot>();
  snap->config = config;
  snap->config_digest = config_digest(config);
  snap->corpus_digest = corpus_digest_hint.empty() ? corpus_digest(*corpus) : std::move(corpus_digest_hint);
  snap->snapshot_id = sha256_hex(snap->config_digest + ':' + snap->corpus_digest).substr(0, 16);
  snap->created_at = utc_now();
  snap->result = run_pipeline(*corpus, config);
  snap->corpus = std::move(corpus);
  return snap;
}

}  // namespace fundmatch
