#include <catch2/catch_amalgamated.hpp>

#include "ovdet/data/tokenizer.hpp"

using namespace ovdet;

namespace {

ConceptDictionary tiny_dict() {
  ConceptDictionary d;
  d.entries["red circle"] =
      ConceptEntry{"red circle", "a solid round red disc", ConceptSource::detection, 1};
  d.entries["blue square"] =
      ConceptEntry{"blue square", "a solid blue box", ConceptSource::detection, 1};
  return d;
}

}  // namespace

TEST_CASE("empty text tokenizes to a lone EOS") {
  Tokenizer tok(tiny_dict());
  auto seq = tok.tokenize("");
  CHECK(seq.ids == std::vector<int>{kEosTokenId});
  CHECK(seq.eos_index == 0);
}

TEST_CASE("long text truncates to max_len ending in EOS") {
  Tokenizer tok(tiny_dict(), 48);
  std::string text;
  for (int i = 0; i < 100; ++i) text += "word" + std::to_string(i) + " ";
  auto seq = tok.tokenize(text);
  CHECK(seq.ids.size() == 48);
  CHECK(seq.ids.back() == kEosTokenId);
  CHECK(seq.eos_index == 47);
}

TEST_CASE("tokenization is deterministic and ids stay in range") {
  Tokenizer tok(tiny_dict(), 32);
  auto a = tok.tokenize("a red circle, a solid round red disc.");
  auto b = tok.tokenize("a red circle, a solid round red disc.");
  CHECK(a == b);
  for (int id : a.ids) {
    CHECK(id >= 0);
    CHECK(id < tok.table_size());
  }
}

TEST_CASE("dictionary words get dedicated ids, OOV words hash into buckets") {
  Tokenizer tok(tiny_dict(), 48, 16);
  auto known = tok.tokenize("red");
  auto unknown = tok.tokenize("zyzzyva");
  // vocab words: a solid round red disc blue box circle square -> 9 words
  CHECK(known.ids[0] >= 2);
  CHECK(known.ids[0] < tok.table_size() - 16);
  CHECK(unknown.ids[0] >= tok.table_size() - 16);
  CHECK(unknown.ids[0] < tok.table_size());
}

TEST_CASE("pad and EOS ids are reserved") {
  CHECK(kPadTokenId == 0);
  CHECK(kEosTokenId == 1);
  Tokenizer tok(tiny_dict());
  auto seq = tok.tokenize("red circle");
  for (size_t i = 0; i + 1 < seq.ids.size(); ++i) {
    CHECK(seq.ids[i] != kPadTokenId);
    CHECK(seq.ids[i] != kEosTokenId);
  }
}

TEST_CASE("same dictionary yields the same vocabulary across instances") {
  Tokenizer a(tiny_dict(), 48, 8);
  Tokenizer b(tiny_dict(), 48, 8);
  CHECK(a.table_size() == b.table_size());
  CHECK(a.tokenize("a solid blue box.") == b.tokenize("a solid blue box."));
}
