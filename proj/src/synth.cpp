#include "clir/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "clir/error.hpp"

namespace clir {

namespace {

std::string padded(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, n);
  return buf;
}

std::string source_term(std::size_t cid) { return padded("src", cid, 4); }

std::string target_term(std::size_t cid, std::size_t synonym) {
  return padded("tgt", cid, 4) + static_cast<char>('a' + synonym);
}

std::vector<float> to_floats(const Eigen::VectorXd& v) {
  std::vector<float> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  return out;
}

Eigen::MatrixXd haar_orthogonal(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

SynthCollection generate_synthetic(const SynthConfig& c) {
  if (c.queries < 2 || c.terms_per_query < 2 || c.synonyms == 0 || c.synonyms > 26 || c.dimension == 0 ||
      c.relevant_per_query == 0) {
    throw Error("synth: empty or invalid configuration");
  }
  if (c.background_concepts == 0) throw Error("synth: need background concepts");
  const std::size_t stride = c.terms_per_query - 1;
  const std::size_t query_concepts = c.queries * stride + 1;
  const std::size_t concepts = query_concepts + c.background_concepts;
  const std::size_t doc_count = c.queries * c.relevant_per_query;
  const std::size_t must_judge = 3 * c.relevant_per_query;  // own relevant + both neighbors' relevant
  if (c.pool_size < must_judge || c.pool_size > doc_count) throw Error("synth: pool size out of range");
  auto query_concept = [&](std::size_t q, std::size_t t) { return q * stride + t; };

  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.dimension));
  const auto dim = static_cast<Eigen::Index>(c.dimension);

  SynthCollection out;
  std::vector<Eigen::VectorXd> latent(concepts, Eigen::VectorXd(dim));
  for (auto& z : latent) {
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = scale * gauss(rng);
  }
  std::vector<std::vector<Eigen::VectorXd>> target(concepts);
  for (std::size_t k = 0; k < concepts; ++k) {
    for (std::size_t s = 0; s < c.synonyms; ++s) {
      Eigen::VectorXd t = latent[k];
      for (Eigen::Index i = 0; i < dim; ++i) t[i] += c.synonym_spread * scale * gauss(rng);
      target[k].push_back(t);
    }
  }

  // Source language lives in a rotated, noisy copy of the latent space.
  const Eigen::MatrixXd rotation = haar_orthogonal(c.dimension, rng);
  std::vector<Eigen::VectorXd> source(concepts);
  for (std::size_t k = 0; k < concepts; ++k) {
    source[k] = rotation * latent[k];
    for (Eigen::Index i = 0; i < dim; ++i) source[k][i] += c.noise * gauss(rng);
  }

  // Orthogonal Procrustes on the (source term, target synonym) dictionary.
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < concepts; ++k) {
    for (const auto& t : target[k]) cross += t * source[k].transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd w = svd.matrixU() * svd.matrixV().transpose();
  out.rotation_recovery_error = (w * rotation - Eigen::MatrixXd::Identity(dim, dim)).norm();

  for (std::size_t k = 0; k < concepts; ++k) {
    out.source_vectors.emplace_back(source_term(k), to_floats(w * source[k]));
    for (std::size_t s = 0; s < c.synonyms; ++s) out.target_vectors.emplace_back(target_term(k, s), to_floats(target[k][s]));
  }

  out.stopwords = {"the", "and", "of", "in", "to"};
  std::uniform_int_distribution<std::size_t> pick_syn(0, c.synonyms - 1);
  std::uniform_int_distribution<std::size_t> pick_bg(query_concepts, concepts - 1);
  std::uniform_int_distribution<std::size_t> pick_stop(0, out.stopwords.size() - 1);
  auto mention = [&](std::size_t cid) { return target_term(cid, pick_syn(rng)); };

  auto make_doc = [&](const std::vector<std::pair<std::size_t, std::size_t>>& planted) {
    std::vector<std::string> tokens;
    for (auto [cid, lo] : planted) {
      std::uniform_int_distribution<std::size_t> times(lo, lo + 1);
      const std::size_t n = times(rng);
      for (std::size_t i = 0; i < n; ++i) tokens.push_back(mention(cid));
    }
    for (std::size_t i = 0; i < c.background_length; ++i) tokens.push_back(mention(pick_bg(rng)));
    for (std::size_t i = 0; i < c.stopwords_per_doc; ++i) tokens.push_back(out.stopwords[pick_stop(rng)]);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::string text;
    for (const auto& t : tokens) {
      if (!text.empty()) text += ' ';
      text += t;
    }
    return text;
  };

  std::vector<std::vector<std::string>> relevant(c.queries);
  std::size_t next_doc = 0;
  for (std::size_t q = 0; q < c.queries; ++q) {
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t t = 0; t < c.terms_per_query; ++t) all.emplace_back(query_concept(q, t), 1);
    for (std::size_t r = 0; r < c.relevant_per_query; ++r) {
      const std::string id = padded("d", next_doc++, 4);
      out.docs.emplace_back(id, make_doc(all));
      relevant[q].push_back(id);
    }
  }

  for (std::size_t q = 0; q < c.queries; ++q) {
    const std::string qid = padded("q", q + 1, 3);
    std::string text;
    for (std::size_t t = 0; t < c.terms_per_query; ++t) {
      if (!text.empty()) text += ' ';
      text += source_term(query_concept(q, t));
    }
    out.queries.emplace_back(qid, text);
    std::vector<std::string> hard;
    if (q > 0) hard.insert(hard.end(), relevant[q - 1].begin(), relevant[q - 1].end());
    if (q + 1 < c.queries) hard.insert(hard.end(), relevant[q + 1].begin(), relevant[q + 1].end());
    std::vector<std::string> others;
    for (const auto& [id, _] : out.docs) {
      if (std::find(relevant[q].begin(), relevant[q].end(), id) == relevant[q].end() &&
          std::find(hard.begin(), hard.end(), id) == hard.end()) {
        others.push_back(id);
      }
    }
    std::shuffle(others.begin(), others.end(), rng);
    others.resize(c.pool_size - relevant[q].size() - hard.size());
    std::vector<std::pair<std::string, int>> judged;
    for (const auto& id : relevant[q]) judged.emplace_back(id, 1);
    for (const auto& id : hard) judged.emplace_back(id, 0);
    for (const auto& id : others) judged.emplace_back(id, 0);
    std::sort(judged.begin(), judged.end());
    for (const auto& [id, grade] : judged) out.qrels.emplace_back(qid, id, grade);
  }
  return out;
}

SynthFiles synth_file_names(const std::filesystem::path& dir) {
  return {dir / "docs.tsv", dir / "queries.tsv", dir / "qrels.txt",
          dir / "src.vec",  dir / "tgt.vec",     dir / "stopwords.txt"};
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

void write_vectors(const std::filesystem::path& p, const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  auto out = open_out(p);
  const std::size_t dim = rows.empty() ? 0 : rows.front().second.size();
  out << rows.size() << ' ' << dim << '\n';
  char buf[64];
  for (const auto& [term, v] : rows) {
    out << term;
    for (float x : v) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      if (ec != std::errc{}) throw Error("cannot format number");
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace

SynthFiles write_synthetic(const std::filesystem::path& dir, const SynthCollection& s) {
  std::filesystem::create_directories(dir);
  const auto files = synth_file_names(dir);
  {
    auto out = open_out(files.docs);
    for (const auto& [id, text] : s.docs) out << id << '\t' << text << '\n';
  }
  {
    auto out = open_out(files.queries);
    for (const auto& [id, text] : s.queries) out << id << '\t' << text << '\n';
  }
  {
    auto out = open_out(files.qrels);
    for (const auto& [q, d, g] : s.qrels) out << q << " 0 " << d << ' ' << g << '\n';
  }
  {
    auto out = open_out(files.stopwords);
    for (const auto& w : s.stopwords) out << w << '\n';
  }
  write_vectors(files.source_vectors, s.source_vectors);
  write_vectors(files.target_vectors, s.target_vectors);
  return files;
}

}  // namespace clir
