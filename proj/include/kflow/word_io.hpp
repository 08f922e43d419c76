#pragma once

#include <iosfwd>
#include <string>

#include "kflow/coding.hpp"

namespace kflow {

/// Binary word file: "KWRD", version byte 1, alphabet_size u32 LE, length u64 LE,
/// then `length` u32 LE symbols.
void write_word_binary(std::ostream& out, const SymbolicWord& w);
SymbolicWord read_word_binary(std::istream& in);

/// Text word file: one decimal symbol per line. The writer stores no alphabet;
/// the reader takes it from a "# alphabet_size <n>" line when present,
/// otherwise max + 1.
void write_word_text(std::ostream& out, const SymbolicWord& w);
SymbolicWord read_word_text(std::istream& in);

void save_word(const std::string& path, const SymbolicWord& w, bool text);
/// Detects the format from the magic bytes.
SymbolicWord load_word(const std::string& path);

}  // namespace kflow
