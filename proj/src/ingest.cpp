#include "ckh/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace ckh {

using nlohmann::json;

namespace {

Error parse_error(const std::string& field, const std::string& what) {
    return Error(ErrorKind::ParseError, "field '" + field + "': " + what);
}

const json& require(const json& doc, const char* key, const std::string& where) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw parse_error(where + key, "missing");
    }
    return doc.at(key);
}

std::string require_string(const json& doc, const char* key, const std::string& where) {
    const json& v = require(doc, key, where);
    if (!v.is_string()) throw parse_error(where + key, "expected a string");
    return v.get<std::string>();
}

Relation relation_from_string(const std::string& s, const std::string& field) {
    if (s == "causes") return Relation::Forward;
    if (s == "caused_by") return Relation::Backward;
    if (s == "no_edge") return Relation::NoEdge;
    if (s == "undirected") return Relation::Undirected;
    throw parse_error(field, "unknown relation '" + s + "'");
}

std::vector<EdgeAssertion> parse_assertions(const json& doc, const std::string& owner) {
    std::vector<EdgeAssertion> out;
    if (!doc.contains("assertions")) return out;
    const json& list = doc.at("assertions");
    if (!list.is_array()) throw parse_error("assertions", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "assertions[" + std::to_string(i) + "].";
        const json& item = list[i];
        const VariableId from(require_string(item, "from", where));
        const VariableId to(require_string(item, "to", where));
        Relation rel = Relation::Forward;
        if (item.contains("relation")) {
            if (!item.at("relation").is_string()) {
                throw parse_error(where + "relation", "expected a string");
            }
            rel = relation_from_string(item.at("relation").get<std::string>(), where + "relation");
        }
        double conf = 1.0;
        if (item.contains("confidence")) {
            if (!item.at("confidence").is_number()) {
                throw parse_error(where + "confidence", "expected a number");
            }
            conf = item.at("confidence").get<double>();
        }
        if (!(conf >= 0.0 && conf <= 1.0)) {
            throw Error(ErrorKind::ValidationError, owner + ": " + where + "confidence " +
                                                        std::to_string(conf) + " outside [0,1]");
        }
        auto canon = canonical_pair(from, to, rel);
        for (const auto& prev : out) {
            if (prev.pair == canon.pair) {
                throw Error(ErrorKind::ValidationError,
                            owner + ": duplicate assertion on " + to_string(canon.pair));
            }
        }
        out.push_back({canon.pair, canon.relation, conf});
    }
    return out;
}

// Assertions are stored canonically; documents use from/to with the relation
// expressed relative to that orientation.
json assertion_to_json(const EdgeAssertion& a) {
    json item;
    item["from"] = a.pair.a.name();
    item["to"] = a.pair.b.name();
    item["relation"] = std::string(to_string(a.relation));
    item["confidence"] = a.confidence;
    return item;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw Error(ErrorKind::ParseError,
                    path.string() + ":" + std::to_string(line) + ": malformed JSON");
    }
}

KnowledgeSource parse_source(const json& doc) {
    if (!doc.is_object()) throw parse_error("<root>", "expected an object");
    KnowledgeSource s;
    s.id = require_string(doc, "id", "");
    try {
        s.tier = tier_from_string(require_string(doc, "tier", ""));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ValidationError) throw parse_error("tier", e.what());
        throw;
    }
    s.assertions = parse_assertions(doc, "source '" + s.id + "'");
    if (doc.contains("scope")) {
        const json& scope = doc.at("scope");
        if (scope.is_string() && scope.get<std::string>() == "global") {
            s.scope.global = true;
        } else if (scope.is_array()) {
            for (const auto& v : scope) {
                if (!v.is_string()) throw parse_error("scope", "expected variable names");
                s.scope.variables.emplace(v.get<std::string>());
            }
        } else {
            throw parse_error("scope", "expected \"global\" or a list of names");
        }
    } else {
        for (const auto& a : s.assertions) {
            s.scope.variables.insert(a.pair.a);
            s.scope.variables.insert(a.pair.b);
        }
    }
    validate_source(s);
    return s;
}

KnowledgeSource parse_source_file(const std::filesystem::path& path) {
    try {
        return parse_source(read_json_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw e.with_context(path.string());
    }
}

json source_to_json(const KnowledgeSource& source) {
    json doc;
    doc["id"] = source.id;
    doc["tier"] = std::string(to_string(source.tier));
    if (source.scope.global) {
        doc["scope"] = "global";
    } else {
        json names = json::array();
        for (const auto& v : source.scope.variables) names.push_back(v.name());
        doc["scope"] = names;
    }
    json list = json::array();
    for (const auto& a : source.assertions) list.push_back(assertion_to_json(a));
    doc["assertions"] = list;
    return doc;
}

ExpertSubmission parse_submission(const json& doc) {
    if (!doc.is_object()) throw parse_error("<root>", "expected an object");
    ExpertSubmission s;
    s.expert_id = require_string(doc, "expert_id", "");
    const std::string phase = require_string(doc, "phase", "");
    if (phase == "initial") {
        s.phase = Phase::Initial;
    } else if (phase == "informed") {
        s.phase = Phase::Informed;
    } else {
        throw parse_error("phase", "expected \"initial\" or \"informed\"");
    }
    s.assertions = parse_assertions(doc, "expert '" + s.expert_id + "'");
    return s;
}

ExpertSubmission parse_submission_file(const std::filesystem::path& path) {
    try {
        return parse_submission(read_json_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw e.with_context(path.string());
    }
}

json submission_to_json(const ExpertSubmission& submission) {
    json doc;
    doc["expert_id"] = submission.expert_id;
    doc["phase"] = submission.phase == Phase::Initial ? "initial" : "informed";
    json list = json::array();
    for (const auto& a : submission.assertions) list.push_back(assertion_to_json(a));
    doc["assertions"] = list;
    return doc;
}

MergedExperts merge_expert_phases(std::span<const ExpertSubmission> submissions,
                                  const VariableSet& published) {
    std::map<std::string, std::vector<const ExpertSubmission*>> by_expert;
    VariableSet superset = published;
    for (const auto& s : submissions) {
        by_expert[s.expert_id].push_back(&s);
        if (s.phase == Phase::Initial) {
            for (const auto& a : s.assertions) {
                superset.insert(a.pair.a);
                superset.insert(a.pair.b);
            }
        }
    }

    MergedExperts out;
    for (const auto& [id, phases] : by_expert) {
        const bool has_initial = std::any_of(phases.begin(), phases.end(), [](const auto* p) {
            return p->phase == Phase::Initial;
        });
        if (!has_initial) {
            throw Error(ErrorKind::ValidationError, "expert '" + id + "' has no initial submission");
        }

        // Per pair: summed confidence for Forward, Backward, NoEdge.
        std::map<VarPair, std::array<double, 3>> sums;
        KnowledgeSource merged;
        merged.id = id;
        merged.tier = Tier::Expert;
        for (const auto* p : phases) {
            for (const auto& a : p->assertions) {
                if (p->phase == Phase::Informed &&
                    (!superset.contains(a.pair.a) || !superset.contains(a.pair.b))) {
                    throw Error(ErrorKind::ValidationError,
                                "expert '" + id + "' informed phase uses " + to_string(a.pair) +
                                    " outside the published variable set");
                }
                auto& s = sums[a.pair];
                switch (a.relation) {
                    case Relation::Forward: s[0] += a.confidence; break;
                    case Relation::Backward: s[1] += a.confidence; break;
                    case Relation::NoEdge: s[2] += a.confidence; break;
                    case Relation::Undirected:
                        s[0] += 0.5 * a.confidence;
                        s[1] += 0.5 * a.confidence;
                        break;
                }
                merged.scope.variables.insert(a.pair.a);
                merged.scope.variables.insert(a.pair.b);
            }
        }

        const double count = static_cast<double>(phases.size());
        for (const auto& [pair, s] : sums) {
            const double fwd = s[0] / count;
            const double bwd = s[1] / count;
            const double none = s[2] / count;
            const double best = std::max({fwd, bwd, none});
            if (best <= 0.0) continue;
            EdgeAssertion a{pair, Relation::NoEdge, none};
            if (none < best) {
                if (fwd == bwd) {
                    a = {pair, Relation::Undirected, std::min(1.0, fwd + bwd)};
                } else if (fwd > bwd) {
                    a = {pair, Relation::Forward, fwd};
                } else {
                    a = {pair, Relation::Backward, bwd};
                }
            }
            merged.assertions.push_back(a);
        }
        validate_source(merged);
        out.variables.merge(merged.mentioned_variables());
        out.sources.push_back(std::move(merged));
    }
    return out;
}

namespace {

// Splits one CSV record starting at `pos`; advances `pos` past the line end.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    while (pos < text.size()) {
        const char c = text[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
        ++pos;
    }
    fields.push_back(std::move(field));
    return fields;
}

bool blank(const std::vector<std::string>& record) {
    return record.size() == 1 && record.front().empty();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset parse_dataset(const std::string& text, std::string name) {
    std::size_t pos = 0;
    if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;  // UTF-8 BOM
    const auto header = next_record(text, pos);
    if (blank(header)) throw Error(ErrorKind::ParseError, name + ": missing header row");

    Dataset d;
    d.name = std::move(name);
    std::set<std::string> seen;
    for (const auto& h : header) {
        const std::string col = trim(h);
        if (col.empty()) throw Error(ErrorKind::ParseError, d.name + ": empty column name");
        if (!seen.insert(col).second) {
            throw Error(ErrorKind::ValidationError, d.name + ": duplicate column '" + col + "'");
        }
        d.columns.emplace_back(col);
    }

    std::vector<double> values;
    std::size_t row_count = 0;
    while (pos < text.size()) {
        const auto record = next_record(text, pos);
        if (blank(record)) continue;
        ++row_count;
        if (record.size() != header.size()) {
            throw Error(ErrorKind::ParseError, d.name + ": row " + std::to_string(row_count) +
                                                   " has " + std::to_string(record.size()) +
                                                   " fields, expected " +
                                                   std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < record.size(); ++c) {
            const std::string cell = trim(record[c]);
            double v = 0.0;
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw Error(ErrorKind::ParseError, d.name + ": non-numeric cell at row " +
                                                       std::to_string(row_count) + ", column " +
                                                       std::to_string(c + 1) + " (" + d.columns[c].name() + ")");
            }
            values.push_back(v);
        }
    }
    if (row_count == 0) throw Error(ErrorKind::ParseError, d.name + ": no data rows");

    const auto cols = static_cast<Eigen::Index>(header.size());
    d.rows.resize(static_cast<Eigen::Index>(row_count), cols);
    for (Eigen::Index r = 0; r < d.rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            d.rows(r, c) = values[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_text(path), path.stem().string());
}

std::string dataset_to_csv(const Dataset& data) {
    std::string out;
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
        if (c) out.push_back(',');
        out += data.columns[c].name();
    }
    out.push_back('\n');
    char buf[32];
    for (Eigen::Index r = 0; r < data.n_rows(); ++r) {
        for (Eigen::Index c = 0; c < data.n_cols(); ++c) {
            if (c) out.push_back(',');
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, data.rows(r, c));
            out.append(buf, ptr);
        }
        out.push_back('\n');
    }
    return out;
}

bool Dataset::has(const VariableId& v) const {
    return std::find(columns.begin(), columns.end(), v) != columns.end();
}

Eigen::Index Dataset::index_of(const VariableId& v) const {
    auto it = std::find(columns.begin(), columns.end(), v);
    if (it == columns.end()) {
        throw Error(ErrorKind::InvalidInput, "dataset '" + name + "' has no column '" + v.name() + "'");
    }
    return static_cast<Eigen::Index>(it - columns.begin());
}

VariableSet Dataset::variables() const { return {columns.begin(), columns.end()}; }

Dataset Dataset::select(std::span<const VariableId> cols, std::string new_name) const {
    Dataset out;
    out.name = std::move(new_name);
    out.columns.assign(cols.begin(), cols.end());
    out.rows.resize(rows.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out.rows.col(static_cast<Eigen::Index>(i)) = rows.col(index_of(cols[i]));
    }
    return out;
}

}  // namespace ckh
