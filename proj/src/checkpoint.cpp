#include "slotfill/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "slotfill/errors.hpp"

namespace slotfill {

namespace {

constexpr std::string_view kMagic = "slotfill-checkpoint";

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

class LineReader {
 public:
  LineReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  std::string_view next() {
    if (pos_ >= text_.size()) fail("unexpected end of file");
    std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    std::string_view line = text_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_;
    return line;
  }

  /// Splits "key rest" and checks the key.
  std::string_view expect(std::string_view key) {
    std::string_view line = next();
    if (line.substr(0, key.size()) != key ||
        (line.size() > key.size() && line[key.size()] != ' ')) {
      fail("expected '" + std::string(key) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw LoadError(std::string(source_) + ":" + std::to_string(line_) + ": " + msg);
  }

 private:
  std::string_view text_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::size_t to_size(const LineReader& r, std::string_view s) {
  std::size_t value = 0;
  if (s.empty()) r.fail("expected a number");
  for (char c : s) {
    if (c < '0' || c > '9') r.fail("expected a number, got '" + std::string(s) + "'");
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

std::uint64_t to_hash(const LineReader& r, std::string_view s) {
  std::string str(s);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(str.c_str(), &end, 16);
  if (errno || end != str.c_str() + str.size() || str.empty()) r.fail("bad hash '" + str + "'");
  return v;
}

}  // namespace

std::string format_checkpoint(const Checkpoint& ck) {
  const ModelConfig& c = ck.params.config();
  std::string out;
  out += fmt::format("{} {}\n", kMagic, kCheckpointVersion);
  out += fmt::format("vocab_size {}\n", c.vocab_size);
  out += fmt::format("num_tags {}\n", c.num_tags);
  out += fmt::format("embedding_dim {}\n", c.embedding_dim);
  out += fmt::format("hidden_dim {}\n", c.hidden_dim);
  out += fmt::format("label_dim {}\n", c.label_dim);
  out += fmt::format("decoder_dim {}\n", c.decoder_dim);
  out += fmt::format("scorer_dim {}\n", c.scorer_dim);
  out += fmt::format("peephole {}\n", c.peephole ? 1 : 0);
  out += fmt::format("mechanism {}\n", to_string(c.mechanism));
  out += fmt::format("word_hash {:016x}\n", ck.vocab.words.hash());
  out += fmt::format("tag_hash {:016x}\n", ck.vocab.tags.hash());
  out += fmt::format("info {}\n", ck.info.size());
  for (const auto& [k, v] : ck.info) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("checkpoint info entries must be single-line with space-free keys");
    }
    out += fmt::format("{} {}\n", k, v);
  }
  out += fmt::format("words {}\n", ck.vocab.words.size());
  for (const std::string& w : ck.vocab.words.words()) out += w + "\n";
  out += fmt::format("tags {}\n", ck.vocab.tags.size());
  for (const std::string& t : ck.vocab.tags.tags()) out += t + "\n";
  ck.params.visit([&](const std::string& name, const Tensor<double>& t) {
    out += fmt::format("tensor {} {}", name, t.rank());
    for (std::size_t d : t.shape()) out += fmt::format(" {}", d);
    out += '\n';
    const auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      out += hex(data[i]);
      out += (i + 1 == data.size() || (i + 1) % 8 == 0) ? '\n' : ' ';
    }
  });
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text, std::string_view source) {
  LineReader r(text, source);
  const std::string_view header = r.expect(kMagic);
  if (header != std::to_string(kCheckpointVersion)) {
    r.fail("unsupported checkpoint version '" + std::string(header) + "'");
  }
  ModelConfig c;
  c.vocab_size = to_size(r, r.expect("vocab_size"));
  c.num_tags = to_size(r, r.expect("num_tags"));
  c.embedding_dim = to_size(r, r.expect("embedding_dim"));
  c.hidden_dim = to_size(r, r.expect("hidden_dim"));
  c.label_dim = to_size(r, r.expect("label_dim"));
  c.decoder_dim = to_size(r, r.expect("decoder_dim"));
  c.scorer_dim = to_size(r, r.expect("scorer_dim"));
  c.peephole = to_size(r, r.expect("peephole")) != 0;
  try {
    c.mechanism = parse_mechanism(r.expect("mechanism"));
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  const std::uint64_t word_hash = to_hash(r, r.expect("word_hash"));
  const std::uint64_t tag_hash = to_hash(r, r.expect("tag_hash"));

  Checkpoint ck;
  const std::size_t n_info = to_size(r, r.expect("info"));
  for (std::size_t i = 0; i < n_info; ++i) {
    std::string_view line = r.next();
    const std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos) r.fail("malformed info entry");
    ck.info.emplace(std::string(line.substr(0, sp)), std::string(line.substr(sp + 1)));
  }
  std::vector<std::string> words(to_size(r, r.expect("words")));
  for (std::string& w : words) w = std::string(r.next());
  std::vector<std::string> tags(to_size(r, r.expect("tags")));
  for (std::string& t : tags) t = std::string(r.next());
  ck.vocab = {WordVocabulary(std::move(words)), TagVocabulary(std::move(tags))};
  if (ck.vocab.words.hash() != word_hash) r.fail("word list does not match its hash");
  if (ck.vocab.tags.hash() != tag_hash) r.fail("tag list does not match its hash");
  if (ck.vocab.words.size() != c.vocab_size || ck.vocab.tags.size() != c.num_tags) {
    r.fail("vocabulary sizes disagree with the model configuration");
  }

  ck.params = ModelParams<double>(c);
  ck.params.visit([&](const std::string& name, Tensor<double>& t) {
    std::istringstream head{std::string(r.expect("tensor"))};
    std::string got_name;
    std::size_t rank = 0;
    head >> got_name >> rank;
    if (got_name != name) r.fail("expected tensor " + name + ", found '" + got_name + "'");
    Shape shape(rank);
    for (std::size_t& d : shape) head >> d;
    if (!head || shape != t.shape()) {
      r.fail("tensor " + name + " has shape " + shape_str(shape) + ", configuration implies " +
             shape_str(t.shape()));
    }
    auto data = t.data();
    std::size_t i = 0;
    while (i < data.size()) {
      std::string line(r.next());
      const char* p = line.c_str();
      while (*p && i < data.size()) {
        char* end = nullptr;
        data[i] = std::strtod(p, &end);
        if (end == p) r.fail("bad value in tensor " + name);
        ++i;
        p = end;
        while (*p == ' ') ++p;
      }
      if (*p) r.fail("too many values in tensor " + name);
    }
  });
  if (r.next() != "end") r.fail("expected 'end'");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string text = format_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), path.string());
}

}  // namespace slotfill
