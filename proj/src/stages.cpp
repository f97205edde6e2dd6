#include "fundmatch/stages.hpp"

#include <fstream>
#include <set>

#include "fundmatch/error.hpp"
#include "fundmatch/pipeline.hpp"
#include "fundmatch/report.hpp"

namespace fundmatch::stages {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void collect(const Ingested<T>& in, const fs::path& file, std::vector<json>& lines, std::vector<std::string>& out) {
  for (const auto& r : in.rejects) {
    lines.push_back({{"file", file.filename().string()}, {"line", r.line}, {"reason", r.reason}, {"original", r.original}});
    out.push_back(file.string() + ":" + std::to_string(r.line) + ": " + r.reason);
  }
}

std::vector<PublicationRecord> read_publications(const fs::path& ws, const PipelineConfig& config) {
  auto pubs = ingest_publications(ws / files::publications, FileFormat::jsonl, {config.reference_year});
  if (!pubs.rejects.empty())
    throw ValidationError((ws / files::publications).string() + ":" + std::to_string(pubs.rejects.front().line) +
                          ": " + pubs.rejects.front().reason);
  return std::move(pubs.records);
}

std::vector<CallRecord> read_calls(const fs::path& ws) {
  auto calls = ingest_calls(ws / files::calls, FileFormat::jsonl);
  if (!calls.rejects.empty())
    throw ValidationError((ws / files::calls).string() + ":" + std::to_string(calls.rejects.front().line) + ": " +
                          calls.rejects.front().reason);
  return std::move(calls.records);
}

RankingBook book_from_workspace(const fs::path& ws, const PipelineConfig& config) {
  const auto pubs = read_publications(ws, config);
  const auto calls = read_calls(ws);
  const auto index = index_publications(pubs);
  const auto population = filter_population(read_researchers(ws / files::researchers), index, study_window(config),
                                            config.population_min_pubs);
  std::set<std::string> researchers;
  for (const auto& r : population) researchers.insert(r.researcher_id);
  const auto ids = call_ids(calls);
  const auto scores = read_scores(ws / files::scores);
  return RankingBook(scores, config.percentile_cutoff, indicator_names(config), std::move(researchers),
                     std::set<std::string>(ids.begin(), ids.end()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

IngestReport ingest(const IngestInputs& in, const fs::path& ws, const PipelineConfig& config) {
  validate(config);
  fs::create_directories(ws);
  IngestReport report;
  std::vector<json> reject_lines;

  auto pubs = ingest_publications(in.publications, format_from_path(in.publications), {config.reference_year});
  collect(pubs, in.publications, reject_lines, report.rejects);
  if (in.topics) report.enriched = enrich_topics(pubs.records, *in.topics);
  auto calls = ingest_calls(in.calls, format_from_path(in.calls));
  collect(calls, in.calls, reject_lines, report.rejects);
  auto masters = ingest_master_list(in.masters, format_from_path(in.masters));
  collect(masters, in.masters, reject_lines, report.rejects);
  auto profiles = ingest_author_profiles(in.profiles);
  collect(profiles, in.profiles, reject_lines, report.rejects);

  write_jsonl(ws / files::publications, pubs.records);
  write_jsonl(ws / files::calls, calls.records);
  write_jsonl(ws / files::masters, masters.records);
  write_jsonl(ws / files::author_profiles, profiles.records);
  write_json_lines(ws / files::rejects, reject_lines);
  report.publications = pubs.records.size();
  report.calls = calls.records.size();
  report.masters = masters.records.size();
  report.profiles = profiles.records.size();
  return report;
}

ResolveReport resolve(const fs::path& ws, const PipelineConfig& config) {
  auto masters = ingest_master_list(ws / files::masters, FileFormat::jsonl);
  auto profiles = ingest_author_profiles(ws / files::author_profiles);
  if (!masters.rejects.empty() || !profiles.rejects.empty())
    throw ValidationError(ws.string() + ": workspace files contain invalid records (re-run ingest)");
  auto res = resolve_identities(masters.records, profiles.records, read_publications(ws, config));
  write_jsonl(ws / files::researchers, res.researchers);
  std::vector<json> unmatched;
  for (const auto& id : res.unmatched_source_ids) unmatched.push_back({{"source_author_id", id}});
  write_json_lines(ws / files::unmatched, unmatched);
  return {res.researchers.size(), res.unmatched_source_ids.size(), res.absorbed_keys};
}

std::size_t embed(const fs::path& ws, const PipelineConfig& config) {
  validate(config);
  const auto pubs = read_publications(ws, config);
  const auto calls = read_calls(ws);
  auto provider = make_provider(config, ws);
  auto it = config.provider_options.find("debias");
  const bool debias = it == config.provider_options.end() || it->second != "false";
  auto store = embed_corpus(*provider, pubs, calls, debias);
  export_vectors(store, ws / files::vectors);
  return store.size();
}

std::size_t score(const fs::path& ws, const PipelineConfig& config, KernelChoice kernel) {
  validate(config);
  const auto corpus = load_workspace(ws, config.reference_year);
  const auto index = index_publications(corpus.publications);
  const auto population =
      filter_population(corpus.researchers, index, study_window(config), config.population_min_pubs);
  const auto sets = build_sets(population, config.indicators, config.reference_year, index);
  std::vector<json> set_lines;
  for (const auto& s : sets) set_lines.push_back(to_json(s));
  write_json_lines(ws / files::sets, set_lines);
  const auto rows = score_matrix(sets, corpus.vectors, call_ids(corpus.calls),
                                 {config.top_fraction_denominator, config.normalization_scope, kernel});
  write_scores(ws / files::scores, rows);
  return rows.size();
}

std::size_t rank(const fs::path& ws, const PipelineConfig& config) {
  validate(config);
  const auto book = book_from_workspace(ws, config);
  write_assignments_csv(ws / files::assignments, book.assignments());
  write_recommendations_csv(ws / files::recommendations, book);
  return book.assignments().size();
}

void analyze(const fs::path& ws, const PipelineConfig& config) {
  validate(config);
  const auto assignments = read_assignments_csv(ws / files::assignments);
  const auto n_calls = read_calls(ws).size();
  write_text(ws / files::analytics, to_json(fundmatch::analyze(assignments, indicator_names(config), n_calls)).dump(2) + "\n");
}

void report(const fs::path& ws, const PipelineConfig& config) {
  validate(config);
  const auto book = book_from_workspace(ws, config);
  const auto analytics = fundmatch::analyze(book.assignments(), indicator_names(config), read_calls(ws).size());
  write_text(ws / files::report, render_report(config, book, analytics));
}

}  // namespace fundmatch::stages
