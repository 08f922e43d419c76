#include "kflow/word_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "kflow/error.hpp"

namespace kflow {

namespace {

constexpr std::array<char, 4> kMagic{'K', 'W', 'R', 'D'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf;
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw Error("truncated word file");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void write_word_binary(std::ostream& out, const SymbolicWord& w) {
  w.validate();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, kVersion);
  put_le<std::uint32_t>(out, w.alphabet_size);
  put_le<std::uint64_t>(out, w.symbols.size());
  for (auto s : w.symbols) put_le<std::uint32_t>(out, s);
  if (!out) throw Error("failed to write word file");
}

SymbolicWord read_word_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a KWRD word file");
  if (get_le<std::uint8_t>(in) != kVersion) throw Error("unsupported word file version");
  SymbolicWord w;
  w.alphabet_size = get_le<std::uint32_t>(in);
  auto len = get_le<std::uint64_t>(in);
  if (len > (std::uint64_t{1} << 40)) throw Error("word file length implausible");
  w.symbols.resize(static_cast<std::size_t>(len));
  for (auto& s : w.symbols) s = get_le<std::uint32_t>(in);
  w.validate();
  return w;
}

void write_word_text(std::ostream& out, const SymbolicWord& w) {
  w.validate();
  for (auto s : w.symbols) out << s << '\n';
  if (!out) throw Error("failed to write word file");
}

SymbolicWord read_word_text(std::istream& in) {
  SymbolicWord w;
  bool have_alphabet = false;
  std::uint32_t max_sym = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      std::uint64_t n = 0;
      if (hs >> key >> n && key == "alphabet_size") {
        w.alphabet_size = static_cast<std::uint32_t>(n);
        have_alphabet = true;
      }
      continue;
    }
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(line, &pos);
    } catch (const std::exception&) {
      throw Error("bad symbol line: " + line);
    }
    if (pos != line.size() || v > 0xffffffffULL) throw Error("bad symbol line: " + line);
    w.symbols.push_back(static_cast<std::uint32_t>(v));
    max_sym = std::max(max_sym, static_cast<std::uint32_t>(v));
  }
  if (!have_alphabet) w.alphabet_size = w.symbols.empty() ? 0 : max_sym + 1;
  w.validate();
  return w;
}

void save_word(const std::string& path, const SymbolicWord& w, bool text) {
  std::ofstream out(path, text ? std::ios::out : std::ios::out | std::ios::binary);
  if (!out) throw Error("cannot open " + path);
  if (text)
    write_word_text(out, w);
  else
    write_word_binary(out, w);
}

SymbolicWord load_word(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_word_binary(in) : read_word_text(in);
}

}  // namespace kflow
