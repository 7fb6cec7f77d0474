#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tuple_array.hpp"
#include "types.hpp"

namespace arraylog {

// Symbol table mapping tokens to dense ids in first-appearance order.
class dictionary {
public:
    value_t intern(std::string_view token) {
        auto it = forward_.find(std::string(token));
        if (it != forward_.end()) return it->second;
        value_t id = reverse_.size();
        forward_.emplace(std::string(token), id);
        reverse_.emplace_back(token);
        return id;
    }

    const std::string& symbol(value_t id) const {
        if (id >= reverse_.size())
            throw std::logic_error("dictionary: id out of range");
        return reverse_[id];
    }

    std::size_t size() const { return reverse_.size(); }

private:
    std::unordered_map<std::string, value_t> forward_;
    std::vector<std::string> reverse_;
};

namespace detail {

inline void split_columns(std::string_view line,
                          std::vector<std::string_view>& out) {
    out.clear();
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (i < n) {
        while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < n && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
}

}  // namespace detail

// Reads a fact file: one tuple per line, columns separated by tabs or runs
// of spaces, `#` comment lines and blank lines skipped. Columns parse as
// unsigned decimal integers, or as arbitrary tokens when a dictionary is
// supplied. Duplicate lines collapse silently.
inline tuple_array read_facts(const std::filesystem::path& path,
                              std::uint32_t arity, dictionary* dict = nullptr,
                              unsigned workers = 1) {
    if (arity == 0) throw load_error("read_facts: arity must be positive");
    std::ifstream in(path);
    if (!in)
        throw load_error("cannot open fact file '" + path.string() + "'");

    tuple_array raw(arity);
    std::string line;
    std::vector<std::string_view> cols;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view view(line);
        std::size_t first = view.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        if (view[first] == '#') continue;

        detail::split_columns(view, cols);
        if (cols.size() != arity)
            throw load_error(path.string() + ":" + std::to_string(line_no) +
                             ": expected " + std::to_string(arity) +
                             " columns, got " + std::to_string(cols.size()));
        for (std::string_view tok : cols) {
            if (dict) {
                raw.data.push_back(dict->intern(tok));
                continue;
            }
            value_t v = 0;
            auto [p, ec] =
                std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || p != tok.data() + tok.size())
                throw load_error(path.string() + ":" +
                                 std::to_string(line_no) +
                                 ": '" + std::string(tok) +
                                 "' is not an unsigned integer");
            if (v == kEmptySlot)
                throw load_error(path.string() + ":" +
                                 std::to_string(line_no) +
                                 ": value is reserved");
            raw.data.push_back(v);
        }
    }
    return canonicalize(raw, workers);
}

// Tab-separated rows in canonical order, decimal columns or
// dictionary-decoded tokens. The same bytes serve as the debug dump
// format for fixtures.
inline std::string to_tsv(const tuple_array& rel,
                          const dictionary* dict = nullptr) {
    std::ostringstream out;
    const std::size_t n = rel.count();
    for (std::size_t r = 0; r < n; ++r) {
        auto row = rel.row(r);
        for (std::uint32_t c = 0; c < rel.arity; ++c) {
            if (c) out << '\t';
            if (dict)
                out << dict->symbol(row[c]);
            else
                out << row[c];
        }
        out << '\n';
    }
    return out.str();
}

inline void write_relation(const tuple_array& rel,
                           const std::filesystem::path& path,
                           const dictionary* dict = nullptr) {
    if (!rel.canonical)
        throw std::logic_error("write_relation: relation must be canonical");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw load_error("cannot open '" + path.string() + "' for writing");
    out << to_tsv(rel, dict);
    out.flush();
    if (!out)
        throw load_error("failed while writing '" + path.string() + "'");
}

// True when every data token in the file parses as an unsigned decimal
// integer below the reserved sentinel; drives the run-level choice
// between raw ids and dictionary encoding.
inline bool file_is_all_integers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw load_error("cannot open fact file '" + path.string() + "'");
    std::string line;
    std::vector<std::string_view> cols;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view view(line);
        std::size_t first = view.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        if (view[first] == '#') continue;
        detail::split_columns(view, cols);
        for (std::string_view tok : cols) {
            value_t v = 0;
            auto [p, ec] =
                std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || p != tok.data() + tok.size() ||
                v == kEmptySlot)
                return false;
        }
    }
    return true;
}

}  // namespace arraylog
