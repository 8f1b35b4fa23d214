#include "skillhub/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "skillhub/errors.hpp"
#include "skillhub/text.hpp"

namespace skillhub {

namespace {

constexpr std::string_view kMagic = "SKLXIDX1";
constexpr std::uint32_t kVersion = 1;

/// Document-level view of one scoring unit (a term or a phrase) in a field.
struct UnitPostings {
    std::vector<std::uint32_t> docs;
    std::vector<std::uint32_t> tfs;
};

using Unit = std::vector<std::string>;

std::vector<std::uint32_t> position_offsets(const PostingList& pl) {
    std::vector<std::uint32_t> offsets(pl.tfs.size() + 1, 0);
    for (std::size_t i = 0; i < pl.tfs.size(); ++i) offsets[i + 1] = offsets[i] + pl.tfs[i];
    return offsets;
}

std::vector<std::uint32_t> set_union(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<std::uint32_t> set_intersection(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::string_view to_string(Field field) {
    switch (field) {
        case Field::name: return "name";
        case Field::description: return "description";
        case Field::content: return "content";
    }
    return "unknown";
}

double LexicalConfig::weight(Field field) const {
    switch (field) {
        case Field::name: return weight_name;
        case Field::description: return weight_description;
        case Field::content: return weight_content;
    }
    return 0.0;
}

void LexicalConfig::validate() const {
    if (weight_name < 0 || weight_description < 0 || weight_content < 0) {
        throw InvalidArgument("field weights must be non-negative");
    }
    if (!(k1 > 0)) throw InvalidArgument("k1 must be positive");
    if (!(b >= 0 && b <= 1)) throw InvalidArgument("b must lie in [0, 1]");
}

InvertedIndex InvertedIndex::build(const CorpusManifest& manifest, const LexicalConfig& config) {
    config.validate();
    if (manifest.records.empty()) throw InvalidArgument("cannot build a lexical index over an empty corpus");

    InvertedIndex index;
    const std::size_t n = manifest.records.size();
    index.fields_[static_cast<std::size_t>(Field::name)].emplace();
    index.fields_[static_cast<std::size_t>(Field::description)].emplace();
    if (config.include_content_field) index.fields_[static_cast<std::size_t>(Field::content)].emplace();

    index.skill_ids_.reserve(n);
    for (std::uint32_t ord = 0; ord < n; ++ord) {
        const SkillRecord& rec = manifest.records[ord];
        index.skill_ids_.push_back(rec.skill_id);
        for (Field f : kAllFields) {
            auto& slot = index.fields_[static_cast<std::size_t>(f)];
            if (!slot) continue;
            const std::string& source = f == Field::name ? rec.name : f == Field::description ? rec.description : rec.content;
            const auto tokens = text::tokenize(source);
            slot->lengths.push_back(static_cast<std::uint32_t>(tokens.size()));

            // Gather positions per term for this document, then append postings.
            std::map<std::string_view, std::vector<std::uint32_t>> local;
            for (std::uint32_t pos = 0; pos < tokens.size(); ++pos) local[tokens[pos]].push_back(pos);
            for (auto& [term, positions] : local) {
                auto it = slot->terms.find(term);
                if (it == slot->terms.end()) it = slot->terms.emplace(std::string(term), PostingList{}).first;
                PostingList& pl = it->second;
                pl.docs.push_back(ord);
                pl.tfs.push_back(static_cast<std::uint32_t>(positions.size()));
                pl.positions.insert(pl.positions.end(), positions.begin(), positions.end());
            }
        }
    }
    index.finalize();
    return index;
}

void InvertedIndex::finalize() {
    ordinals_.clear();
    for (std::uint32_t i = 0; i < skill_ids_.size(); ++i) {
        if (!ordinals_.emplace(skill_ids_[i], i).second) throw FormatError("duplicate skill_id in index: " + skill_ids_[i]);
    }
    for (auto& slot : fields_) {
        if (!slot) continue;
        double total = 0.0;
        for (auto len : slot->lengths) total += len;
        slot->average_length = slot->lengths.empty() ? 0.0 : total / static_cast<double>(slot->lengths.size());
    }
}

std::optional<std::uint32_t> InvertedIndex::ordinal_of(std::string_view skill_id) const {
    auto it = ordinals_.find(std::string(skill_id));
    if (it == ordinals_.end()) return std::nullopt;
    return it->second;
}

const FieldIndex& InvertedIndex::field(Field f) const {
    const auto& slot = fields_[static_cast<std::size_t>(f)];
    if (!slot) throw InvalidArgument("field not indexed: " + std::string(to_string(f)));
    return *slot;
}

const PostingList* InvertedIndex::postings(Field f, std::string_view term) const {
    const auto& slot = fields_[static_cast<std::size_t>(f)];
    if (!slot) return nullptr;
    auto it = slot->terms.find(term);
    return it == slot->terms.end() ? nullptr : &it->second;
}

namespace {

class QueryEvaluator {
public:
    explicit QueryEvaluator(const InvertedIndex& index) : index_(index) {}

    /// Scoring units contributed by leaves that are not under a NOT.
    std::vector<Unit> positive_units(const QueryAst& q) const {
        std::vector<Unit> units;
        collect(q, true, units);
        return units;
    }

    std::vector<Unit> leaf_units(const QueryAst& leaf) const {
        switch (leaf.kind) {
            case QueryAst::Kind::term: return {Unit{leaf.terms.front()}};
            case QueryAst::Kind::phrase: return {leaf.terms};
            case QueryAst::Kind::prefix: {
                std::set<std::string> expanded;
                const std::string& stem = leaf.terms.front();
                for (Field f : kAllFields) {
                    if (!index_.has_field(f)) continue;
                    const auto& terms = index_.field(f).terms;
                    for (auto it = terms.lower_bound(stem); it != terms.end() && it->first.starts_with(stem); ++it) {
                        expanded.insert(it->first);
                    }
                }
                std::vector<Unit> units;
                for (const auto& t : expanded) units.push_back(Unit{t});
                return units;
            }
            default: return {};
        }
    }

    UnitPostings unit_postings(Field f, const Unit& unit) const {
        UnitPostings out;
        if (unit.size() == 1) {
            if (const PostingList* pl = index_.postings(f, unit.front())) {
                out.docs = pl->docs;
                out.tfs = pl->tfs;
            }
            return out;
        }

        std::vector<const PostingList*> lists;
        std::vector<std::vector<std::uint32_t>> offsets;
        for (const auto& term : unit) {
            const PostingList* pl = index_.postings(f, term);
            if (!pl) return out;
            lists.push_back(pl);
            offsets.push_back(position_offsets(*pl));
        }
        const PostingList& first = *lists.front();
        for (std::size_t i = 0; i < first.docs.size(); ++i) {
            const std::uint32_t doc = first.docs[i];
            std::vector<std::size_t> slot(lists.size());
            slot[0] = i;
            bool all = true;
            for (std::size_t j = 1; j < lists.size() && all; ++j) {
                const auto& docs = lists[j]->docs;
                auto it = std::lower_bound(docs.begin(), docs.end(), doc);
                if (it == docs.end() || *it != doc) all = false;
                else slot[j] = static_cast<std::size_t>(it - docs.begin());
            }
            if (!all) continue;

            std::uint32_t count = 0;
            for (auto p = offsets[0][i]; p < offsets[0][i + 1]; ++p) {
                const std::uint32_t start = first.positions[p];
                bool consecutive = true;
                for (std::size_t j = 1; j < lists.size() && consecutive; ++j) {
                    const auto b = lists[j]->positions.begin() + offsets[j][slot[j]];
                    const auto e = lists[j]->positions.begin() + offsets[j][slot[j] + 1];
                    consecutive = std::binary_search(b, e, start + static_cast<std::uint32_t>(j));
                }
                if (consecutive) ++count;
            }
            if (count > 0) {
                out.docs.push_back(doc);
                out.tfs.push_back(count);
            }
        }
        return out;
    }

    std::vector<std::uint32_t> matches(const QueryAst& q) const {
        using K = QueryAst::Kind;
        switch (q.kind) {
            case K::term:
            case K::prefix:
            case K::phrase: {
                std::vector<std::uint32_t> docs;
                for (const Unit& unit : leaf_units(q)) {
                    for (Field f : kAllFields) {
                        if (!index_.has_field(f)) continue;
                        docs = set_union(docs, unit_postings(f, unit).docs);
                    }
                }
                return docs;
            }
            case K::and_: {
                auto docs = matches(q.children.front());
                for (std::size_t i = 1; i < q.children.size() && !docs.empty(); ++i) {
                    docs = set_intersection(docs, matches(q.children[i]));
                }
                return docs;
            }
            case K::or_: {
                std::vector<std::uint32_t> docs;
                for (const auto& c : q.children) docs = set_union(docs, matches(c));
                return docs;
            }
            case K::not_: {
                const auto excluded = matches(q.children.front());
                std::vector<std::uint32_t> docs;
                std::size_t j = 0;
                for (std::uint32_t d = 0; d < index_.doc_count(); ++d) {
                    while (j < excluded.size() && excluded[j] < d) ++j;
                    if (j < excluded.size() && excluded[j] == d) continue;
                    docs.push_back(d);
                }
                return docs;
            }
        }
        return {};
    }

private:
    void collect(const QueryAst& q, bool positive, std::vector<Unit>& out) const {
        if (q.is_leaf()) {
            if (!positive) return;
            for (auto& u : leaf_units(q)) out.push_back(std::move(u));
            return;
        }
        const bool child_positive = q.kind == QueryAst::Kind::not_ ? !positive : positive;
        for (const auto& c : q.children) collect(c, child_positive, out);
    }

    const InvertedIndex& index_;
};

double bm25_term(double idf, double tf, double len, double avg_len, const LexicalConfig& c) {
    const double norm = avg_len > 0 ? len / avg_len : 0.0;
    return idf * tf * (c.k1 + 1.0) / (tf + c.k1 * (1.0 - c.b + c.b * norm));
}

double idf(std::size_t n, std::size_t df) {
    const double N = static_cast<double>(n);
    const double d = static_cast<double>(df);
    return std::log(1.0 + (N - d + 0.5) / (d + 0.5));
}

}  // namespace

double InvertedIndex::score(std::uint32_t ordinal, const QueryAst& query, const LexicalConfig& config) const {
    if (ordinal >= doc_count()) throw InvalidArgument("document ordinal out of range");
    QueryEvaluator eval(*this);
    double total = 0.0;
    for (const Unit& unit : eval.positive_units(query)) {
        for (Field f : kAllFields) {
            if (!has_field(f)) continue;
            const double w = config.weight(f);
            if (w == 0.0) continue;
            const UnitPostings up = eval.unit_postings(f, unit);
            auto it = std::lower_bound(up.docs.begin(), up.docs.end(), ordinal);
            if (it == up.docs.end() || *it != ordinal) continue;
            const auto& fi = field(f);
            const double tf = up.tfs[static_cast<std::size_t>(it - up.docs.begin())];
            total += w * bm25_term(idf(doc_count(), up.docs.size()), tf, fi.lengths[ordinal], fi.average_length, config);
        }
    }
    return total;
}

std::vector<std::uint32_t> InvertedIndex::matching_docs(const QueryAst& query) const {
    return QueryEvaluator(*this).matches(query);
}

RankedList InvertedIndex::search(const QueryAst& query, std::size_t top_k, const LexicalConfig& config) const {
    if (top_k == 0) throw InvalidArgument("top_k must be at least 1");
    config.validate();
    RankedList out;
    out.kind = ScoreKind::keyword;

    QueryEvaluator eval(*this);
    const auto candidates = eval.matches(query);
    if (candidates.empty()) return out;

    std::vector<double> scores(doc_count(), 0.0);
    for (const Unit& unit : eval.positive_units(query)) {
        for (Field f : kAllFields) {
            if (!has_field(f)) continue;
            const double w = config.weight(f);
            if (w == 0.0) continue;
            const UnitPostings up = eval.unit_postings(f, unit);
            if (up.docs.empty()) continue;
            const auto& fi = field(f);
            const double term_idf = idf(doc_count(), up.docs.size());
            for (std::size_t i = 0; i < up.docs.size(); ++i) {
                const auto d = up.docs[i];
                scores[d] += w * bm25_term(term_idf, up.tfs[i], fi.lengths[d], fi.average_length, config);
            }
        }
    }

    std::vector<std::uint32_t> order(candidates.begin(), candidates.end());
    auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return skill_ids_[a] < skill_ids_[b];
    };
    const std::size_t k = std::min(top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    out.hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double s = scores[order[i]];
        out.hits.push_back({skill_ids_[order[i]], s == 0.0 ? 0.0 : -s});
    }
    return out;
}

std::string InvertedIndex::serialize() const {
    detail::BinaryWriter w;
    w.put_raw(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint64_t>(skill_ids_.size()));
    for (const auto& id : skill_ids_) w.put_string(id);
    std::uint8_t field_count = 0;
    for (const auto& slot : fields_) field_count += slot ? 1 : 0;
    w.put(field_count);
    for (Field f : kAllFields) {
        const auto& slot = fields_[static_cast<std::size_t>(f)];
        if (!slot) continue;
        w.put(static_cast<std::uint8_t>(f));
        w.put_array(slot->lengths);
        w.put(static_cast<std::uint64_t>(slot->terms.size()));
        for (const auto& [term, pl] : slot->terms) {
            w.put_string(term);
            w.put(static_cast<std::uint32_t>(pl.docs.size()));
            w.put_array(pl.docs);
            w.put_array(pl.tfs);
            w.put_array(pl.positions);
        }
    }
    return w.bytes();
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
    detail::BinaryReader r(bytes, "lexical index");
    if (r.get_raw(kMagic.size()) != kMagic) r.fail("not a lexical index file");
    if (r.get<std::uint32_t>() != kVersion) r.fail("unsupported lexical index version");

    InvertedIndex index;
    const auto n = r.get<std::uint64_t>();
    if (n > bytes.size()) r.fail("implausible document count");
    for (std::uint64_t i = 0; i < n; ++i) index.skill_ids_.push_back(r.get_string());
    const auto field_count = r.get<std::uint8_t>();
    for (std::uint8_t k = 0; k < field_count; ++k) {
        const auto raw_field = r.get<std::uint8_t>();
        if (raw_field > 2 || index.fields_[raw_field]) r.fail("bad field tag");
        FieldIndex fi;
        fi.lengths = r.get_array<std::uint32_t>(n);
        const auto vocab = r.get<std::uint64_t>();
        for (std::uint64_t t = 0; t < vocab; ++t) {
            std::string term = r.get_string();
            PostingList pl;
            const auto count = r.get<std::uint32_t>();
            pl.docs = r.get_array<std::uint32_t>(count);
            pl.tfs = r.get_array<std::uint32_t>(count);
            std::uint64_t total = 0;
            for (std::size_t i = 0; i < count; ++i) {
                if (pl.docs[i] >= n || (i > 0 && pl.docs[i] <= pl.docs[i - 1])) r.fail("postings out of order");
                total += pl.tfs[i];
            }
            pl.positions = r.get_array<std::uint32_t>(total);
            fi.terms.emplace(std::move(term), std::move(pl));
        }
        index.fields_[raw_field] = std::move(fi);
    }
    if (!r.at_end()) r.fail("trailing bytes");
    if (!index.fields_[0] || !index.fields_[1]) throw FormatError("lexical index lacks name/description fields");
    index.finalize();
    return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    const std::string data = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("failed writing: " + path.string());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read lexical index: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
    if (a.skill_ids_ != b.skill_ids_) return false;
    for (std::size_t f = 0; f < a.fields_.size(); ++f) {
        const auto& x = a.fields_[f];
        const auto& y = b.fields_[f];
        if (x.has_value() != y.has_value()) return false;
        if (!x) continue;
        if (x->lengths != y->lengths || x->terms.size() != y->terms.size()) return false;
        for (auto i = x->terms.begin(), j = y->terms.begin(); i != x->terms.end(); ++i, ++j) {
            if (i->first != j->first || i->second.docs != j->second.docs || i->second.tfs != j->second.tfs ||
                i->second.positions != j->second.positions) {
                return false;
            }
        }
    }
    return true;
}

RankedList search_keyword(const InvertedIndex& index, std::string_view raw_query, std::size_t top_k,
                          const LexicalConfig& config) {
    return index.search(parse_query(raw_query), top_k, config);
}

}  // namespace skillhub
