#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fundmatch/corpus.hpp"

namespace testutil {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("fundmatch-test-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline fundmatch::AuthorSlot slot(std::string id, int pos, bool corr = false, std::string name = {}) {
  return {std::move(id), pos, corr, std::move(name)};
}

inline fundmatch::PublicationRecord pub(std::string id, int year, std::vector<fundmatch::AuthorSlot> authors,
                                        std::string title = "title") {
  fundmatch::PublicationRecord p;
  p.pub_id = std::move(id);
  p.year = year;
  p.title = std::move(title);
  p.authors = std::move(authors);
  return p;
}

inline fundmatch::ResearcherProfile researcher(std::string id, std::set<std::string> sources,
                                               std::set<std::string> pubs = {}) {
  fundmatch::ResearcherProfile r;
  r.researcher_id = std::move(id);
  r.merged_source_ids = std::move(sources);
  r.publication_ids = std::move(pubs);
  return r;
}

}  // namespace testutil
