#pragma once

// Header-bearing CSV input: feature records, labels and signal frames.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ais/dca.hpp"
#include "ais/error.hpp"
#include "ais/representation.hpp"

namespace ais::csv {

struct Row {
    std::size_t line = 0;  // 1-based line in the source
    std::vector<std::string> cells;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

// Splits one line on commas; double quotes group cells and "" escapes a quote.
inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    cells.push_back(std::move(cur));
    return cells;
}

inline Table read(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line, line_no);
        if (!have_header) {
            std::set<std::string> seen;
            for (const auto& h : cells)
                if (h.empty() || !seen.insert(h).second)
                    throw ParseError("header has an empty or duplicate column name", line_no);
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             line_no);
        t.rows.push_back({line_no, std::move(cells)});
    }
    if (!have_header) throw ParseError("missing header row", std::max<std::size_t>(line_no, 1));
    return t;
}

inline std::string quote(std::string_view cell) {
    if (cell.find_first_of(",\"\n") == std::string_view::npos) return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << quote(cells[i]);
    }
    out << '\n';
}

// Rows become records. `id_column` supplies identities when present, otherwise
// the 0-based data-row index is used. Columns in `skip` are not features.
inline std::vector<RawRecord> records(const Table& t, std::string_view id_column = "id",
                                      const std::set<std::string>& skip = {}) {
    const auto id_col = t.column(id_column);
    std::vector<RawRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RawRecord rec;
        rec.id = id_col ? t.rows[r].cells[*id_col] : std::to_string(r);
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if ((id_col && c == *id_col) || skip.count(t.header[c])) continue;
            rec.fields.emplace_back(t.header[c], t.rows[r].cells[c]);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// Label text -> anomalous?
inline std::optional<bool> parse_label(std::string_view s) {
    static const std::set<std::string_view> pos{"1", "anomaly", "anomalous", "attack", "nonself", "true"};
    static const std::set<std::string_view> neg{"0", "normal", "self", "benign", "false"};
    if (pos.count(s)) return true;
    if (neg.count(s)) return false;
    return std::nullopt;
}

inline std::map<std::string, bool> labels(const Table& t, std::string_view id_column = "id",
                                          std::string_view label_column = "label") {
    const auto id_col = t.column(id_column);
    const auto lab_col = t.column(label_column);
    if (!id_col || !lab_col)
        throw ParseError("labels need '" + std::string(id_column) + "' and '" + std::string(label_column) +
                             "' columns",
                         1);
    std::map<std::string, bool> out;
    for (const auto& row : t.rows) {
        const auto v = parse_label(row.cells[*lab_col]);
        if (!v) throw ParseError("unrecognized label '" + row.cells[*lab_col] + "'", row.line);
        out[row.cells[*id_col]] = *v;
    }
    return out;
}

struct FrameColumns {
    std::string timestamp = "timestamp";
    std::string pamp = "pamp";
    std::string danger = "danger";
    std::string safe = "safe";
    std::string antigens = "antigens";
};

// Antigen ids in the antigens column are separated by ';'. Timestamps must
// strictly increase and signals must be finite and non-negative.
inline std::vector<SignalFrame> frames(const Table& t, const FrameColumns& cols = {}) {
    auto need = [&](const std::string& name) {
        const auto c = t.column(name);
        if (!c) throw ParseError("signal file has no '" + name + "' column", 1);
        return *c;
    };
    const std::size_t ct = need(cols.timestamp), cp = need(cols.pamp), cd = need(cols.danger),
                      cs = need(cols.safe), ca = need(cols.antigens);
    std::vector<SignalFrame> out;
    for (const auto& row : t.rows) {
        SignalFrame f;
        const auto ts = parse_number(row.cells[ct]);
        if (!ts || *ts != static_cast<double>(static_cast<std::int64_t>(*ts)))
            throw ParseError("timestamp '" + row.cells[ct] + "' is not an integer tick", row.line);
        f.timestamp = static_cast<std::int64_t>(*ts);
        auto signal = [&](std::size_t c, const std::string& name) {
            const auto v = parse_number(row.cells[c]);
            if (!v || *v < 0.0) throw ParseError(name + " must be a finite non-negative number", row.line);
            return *v;
        };
        f.pamp = signal(cp, cols.pamp);
        f.danger = signal(cd, cols.danger);
        f.safe = signal(cs, cols.safe);
        std::string_view ids = row.cells[ca];
        while (!ids.empty()) {
            const auto semi = ids.find(';');
            auto id = ids.substr(0, semi);
            while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
            while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
            if (!id.empty()) f.active_antigens.emplace_back(id);
            if (semi == std::string_view::npos) break;
            ids.remove_prefix(semi + 1);
        }
        if (!out.empty() && f.timestamp <= out.back().timestamp)
            throw ParseError("timestamp " + std::to_string(f.timestamp) + " does not increase", row.line);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace ais::csv
