#include "covgen/synthetic.hpp"

#include <stdexcept>

#include "covgen/util.hpp"

namespace covgen {

SyntheticSpec::Kind synthetic_kind_from_name(const std::string& name) {
  if (name == "copy-task") return SyntheticSpec::Kind::kCopyTask;
  if (name == "template-summary") return SyntheticSpec::Kind::kTemplateSummary;
  if (name == "repetition-trap") return SyntheticSpec::Kind::kRepetitionTrap;
  throw std::invalid_argument("unknown synthetic kind: " + name);
}

std::string synthetic_kind_name(SyntheticSpec::Kind kind) {
  switch (kind) {
    case SyntheticSpec::Kind::kCopyTask: return "copy-task";
    case SyntheticSpec::Kind::kTemplateSummary: return "template-summary";
    case SyntheticSpec::Kind::kRepetitionTrap: return "repetition-trap";
  }
  throw std::logic_error("bad synthetic kind");
}

namespace {

std::vector<std::string> make_pool(const std::string& prefix, size_t n) {
  std::vector<std::string> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = prefix + std::to_string(i);
  return pool;
}

std::vector<Document> gen_copy_task(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  const auto pool = make_pool("tok", std::max<size_t>(spec.vocab_size, 2));
  size_t oov_counter = 0;
  std::vector<Document> docs;
  for (size_t i = 0; i < spec.count; ++i) {
    const size_t prefix_len = 4 + rng.uniform_int(5);
    const size_t tail_len = 4 + rng.uniform_int(8);
    Document d;
    std::vector<std::string> prefix;
    for (size_t t = 0; t < prefix_len; ++t) {
      if (rng.uniform() < spec.oov_rate) {
        prefix.push_back("oov" + std::to_string(oov_counter++));
      } else {
        prefix.push_back(pool[rng.uniform_int(pool.size())]);
      }
    }
    d.article = prefix;
    d.article.push_back(".");
    for (size_t t = 0; t < tail_len; ++t) {
      d.article.push_back(pool[rng.uniform_int(pool.size())]);
    }
    prefix.push_back(".");
    d.abstract_sentences = {std::move(prefix)};
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> gen_template_summary(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  const size_t pool_n = std::max<size_t>(spec.vocab_size / 2, 4);
  const auto teams = make_pool("team", pool_n);
  const auto venues = make_pool("venue", std::max<size_t>(pool_n / 4, 2));
  const std::vector<std::string> days = {"monday",   "tuesday", "wednesday", "thursday",
                                         "friday",   "saturday", "sunday"};
  size_t oov_counter = 0;
  std::vector<Document> docs;
  for (size_t i = 0; i < spec.count; ++i) {
    auto pick_team = [&]() -> std::string {
      if (rng.uniform() < spec.oov_rate) return "club" + std::to_string(oov_counter++);
      return teams[rng.uniform_int(teams.size())];
    };
    const std::string x = pick_team();
    std::string y = pick_team();
    if (y == x) y = teams[(rng.uniform_int(teams.size() - 1) + 1) % teams.size()];
    const std::string day = days[rng.uniform_int(days.size())];
    const std::string venue = venues[rng.uniform_int(venues.size())];
    const std::string score =
        std::to_string(rng.uniform_int(5) + 1) + "-" + std::to_string(rng.uniform_int(5));

    Document d;
    auto sentence = [&](std::initializer_list<std::string> words) {
      for (const auto& w : words) d.article.push_back(w);
      d.article.push_back(".");
    };
    sentence({"on", day, ",", x, "played", "against", y, "at", venue});
    sentence({"the", "final", "score", "was", score});
    sentence({x, "fans", "were", "happy", "after", "the", "game"});
    d.abstract_sentences = {{x, "beat", y, score, "on", day, "."}};
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> gen_repetition_trap(const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  const auto items = make_pool("item", std::max<size_t>(spec.vocab_size, 8));
  std::vector<Document> docs;
  for (size_t i = 0; i < spec.count; ++i) {
    const size_t k = 3 + rng.uniform_int(5);  // 3..7 salient sentences
    std::vector<std::string> keys;
    while (keys.size() < k) {
      const std::string& cand = items[rng.uniform_int(items.size())];
      bool dup = false;
      for (const auto& seen : keys) dup = dup || seen == cand;
      if (!dup) keys.push_back(cand);
    }
    Document d;
    for (const auto& key : keys) {
      for (const auto& w : {std::string("the"), std::string("committee"), std::string("praised"),
                            key, std::string("for"), std::string("the"), std::string("report"),
                            std::string(".")}) {
        d.article.push_back(w);
      }
    }
    std::vector<std::string> abs = {"praised"};
    for (size_t t = 0; t < keys.size(); ++t) {
      if (t) abs.push_back(",");
      abs.push_back(keys[t]);
    }
    abs.push_back(".");
    d.abstract_sentences = {std::move(abs)};
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

std::vector<Document> gen_synthetic(const SyntheticSpec& spec) {
  if (spec.count == 0) throw std::invalid_argument("synthetic corpus count must be positive");
  switch (spec.kind) {
    case SyntheticSpec::Kind::kCopyTask: return gen_copy_task(spec);
    case SyntheticSpec::Kind::kTemplateSummary: return gen_template_summary(spec);
    case SyntheticSpec::Kind::kRepetitionTrap: return gen_repetition_trap(spec);
  }
  throw std::logic_error("bad synthetic kind");
}

}  // namespace covgen
