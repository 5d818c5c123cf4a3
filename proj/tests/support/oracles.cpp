#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string_view>
#include <tuple>

namespace oracle {

using gest::ActionObservation;
using gest::AssociatedObservation;
using gest::BBox;
using gest::Event;

std::vector<ActionObservation> vote(const std::vector<ActionObservation>& stream, int radius, int min_count)
{
    std::set<std::tuple<int, std::string, int>> present;
    for (const auto& o : stream) {
        present.emplace(o.person_id, o.label, o.frame_index);
    }
    std::vector<ActionObservation> out;
    for (const auto& o : stream) {
        int votes = 0;
        for (int f = o.frame_index - radius; f <= o.frame_index + radius; ++f) {
            votes += present.contains({o.person_id, o.label, f}) ? 1 : 0;
        }
        if (votes >= min_count) {
            out.push_back(o);
        }
    }
    return out;
}

std::vector<Event> events(const std::vector<AssociatedObservation>& observations, int max_gap, double min_presence)
{
    struct Track {
        std::map<int, BBox> boxes;  // first observation per frame
        std::map<int, std::set<std::string>> objects;
    };
    std::map<std::pair<int, std::string>, Track> tracks;
    int last_frame = 0;
    for (const auto& a : observations) {
        auto& t = tracks[{a.observation.person_id, a.observation.label}];
        t.boxes.emplace(a.observation.frame_index, a.observation.bbox);
        auto& objs = t.objects[a.observation.frame_index];
        objs.insert(a.objects.begin(), a.objects.end());
        last_frame = std::max(last_frame, a.observation.frame_index);
    }

    std::vector<Event> out;
    for (const auto& [key, t] : tracks) {
        std::vector<char> mask(static_cast<std::size_t>(last_frame) + 2, 0);
        for (const auto& [f, _] : t.boxes) {
            mask[static_cast<std::size_t>(f)] = 1;
        }
        // Fill every hole bounded by occupied frames on both sides whose bridging gap is within max_gap.
        std::vector<char> filled = mask;
        int prev = -1;
        for (int f = 0; f <= last_frame; ++f) {
            if (!mask[static_cast<std::size_t>(f)]) {
                continue;
            }
            if (prev >= 0 && f - prev <= max_gap) {
                for (int g = prev; g <= f; ++g) {
                    filled[static_cast<std::size_t>(g)] = 1;
                }
            }
            prev = f;
        }
        for (int f = 0; f <= last_frame; ++f) {
            if (!filled[static_cast<std::size_t>(f)] || (f > 0 && filled[static_cast<std::size_t>(f - 1)])) {
                continue;
            }
            int end = f;
            while (end + 1 <= last_frame && filled[static_cast<std::size_t>(end + 1)]) {
                ++end;
            }
            Event e;
            e.person_id = key.first;
            e.action_label = key.second;
            e.start_frame = f;
            e.end_frame = end;
            for (int g = f; g <= end; ++g) {
                if (const auto it = t.boxes.find(g); it != t.boxes.end()) {
                    e.per_frame_bboxes.emplace(g, it->second);
                }
                if (const auto it = t.objects.find(g); it != t.objects.end()) {
                    for (const auto& label : it->second) {
                        e.object_frames[label].push_back(g);
                    }
                }
            }
            for (const auto& [label, frames] : e.object_frames) {
                const double presence = static_cast<double>(frames.size()) / static_cast<double>(end - f + 1);
                if (presence >= min_presence) {
                    e.candidate_objects.push_back({label, presence});
                }
            }
            for (std::size_t i = 0; i < e.candidate_objects.size(); ++i) {
                for (std::size_t j = i + 1; j < e.candidate_objects.size(); ++j) {
                    auto& a = e.candidate_objects[i];
                    auto& b = e.candidate_objects[j];
                    if (b.presence > a.presence || (b.presence == a.presence && b.label < a.label)) {
                        std::swap(a, b);
                    }
                }
            }
            out.push_back(std::move(e));
        }
    }

    // Number by (start, end, person, label) using a selection pass.
    std::vector<Event> ordered;
    while (!out.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < out.size(); ++i) {
            const auto& a = out[i];
            const auto& b = out[best];
            if (std::make_tuple(a.start_frame, a.end_frame, a.person_id, a.action_label) <
                std::make_tuple(b.start_frame, b.end_frame, b.person_id, b.action_label)) {
                best = i;
            }
        }
        ordered.push_back(std::move(out[best]));
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(best));
        ordered.back().event_id = static_cast<int>(ordered.size()) - 1;
    }
    return ordered;
}

namespace {

bool before(const Event& a, const Event& b)
{
    if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
    if (a.end_frame != b.end_frame) return a.end_frame < b.end_frame;
    if (a.person_id != b.person_id) return a.person_id < b.person_id;
    if (a.action_label != b.action_label) return a.action_label < b.action_label;
    return a.event_id < b.event_id;
}

const Event& by_id(const std::vector<Event>& events, int id)
{
    for (const auto& e : events) {
        if (e.event_id == id) {
            return e;
        }
    }
    throw std::out_of_range("no such event");
}

}  // namespace

std::vector<int> sort_ids(const std::vector<Event>& events)
{
    // Insertion sort: each event goes before the first one it precedes.
    std::vector<const Event*> order;
    for (const auto& e : events) {
        auto pos = order.begin();
        while (pos != order.end() && !before(e, **pos)) {
            ++pos;
        }
        order.insert(pos, &e);
    }
    std::vector<int> ids;
    for (const auto* e : order) {
        ids.push_back(e->event_id);
    }
    return ids;
}

std::vector<gest::ActionGroup> groups(const std::vector<int>& sorted_ids, const std::vector<Event>& events)
{
    std::vector<gest::ActionGroup> out;
    for (std::size_t i = 0; i < sorted_ids.size(); ++i) {
        const auto& e = by_id(events, sorted_ids[i]);
        const bool starts_run = i == 0 || by_id(events, sorted_ids[i - 1]).person_id != e.person_id;
        if (starts_run) {
            out.push_back({e.person_id, {}, e.start_frame});
        }
        out.back().event_ids.push_back(e.event_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// metrics

namespace {

std::string gram_at(const std::vector<std::string>& tokens, std::size_t i, std::size_t n)
{
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
        key += tokens[i + k];
        key.push_back('\x1f');
    }
    return key;
}

std::size_t occurrences(const std::vector<std::string>& tokens, const std::string& gram, std::size_t n)
{
    std::size_t count = 0;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        count += gram_at(tokens, i, n) == gram ? 1 : 0;
    }
    return count;
}

std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<std::vector<std::size_t>> table(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = a.size(); i-- > 0;) {
        for (std::size_t j = b.size(); j-- > 0;) {
            table[i][j] = a[i] == b[j] ? table[i + 1][j + 1] + 1 : std::max(table[i + 1][j], table[i][j + 1]);
        }
    }
    return table[0][0];
}

}  // namespace

double bleu4(const std::vector<std::string>& candidate, const std::vector<std::vector<std::string>>& references)
{
    if (candidate.empty()) {
        return 0.0;
    }
    double product = 1.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const std::size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
        std::set<std::string> distinct;
        for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
            distinct.insert(gram_at(candidate, i, n));
        }
        std::size_t clipped = 0;
        for (const auto& g : distinct) {
            std::size_t ref_max = 0;
            for (const auto& r : references) {
                ref_max = std::max(ref_max, occurrences(r, g, n));
            }
            clipped += std::min(occurrences(candidate, g, n), ref_max);
        }
        if (n == 1 && clipped == 0) {
            return 0.0;
        }
        const double p = clipped == 0 ? 1.0 / static_cast<double>(total + 1)
                                      : static_cast<double>(clipped) / static_cast<double>(total);
        product *= p;
    }
    const double c = static_cast<double>(candidate.size());
    double r = 0.0;
    double best = 1e300;
    for (const auto& ref : references) {
        const double len = static_cast<double>(ref.size());
        const double d = std::fabs(len - c);
        if (d < best || (d == best && len < r)) {
            best = d;
            r = len;
        }
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::pow(product, 0.25);
}

double rouge_l_f1(const std::vector<std::string>& candidate, const std::vector<std::vector<std::string>>& references)
{
    double best = 0.0;
    for (const auto& ref : references) {
        if (candidate.empty() || ref.empty()) {
            continue;
        }
        const double l = static_cast<double>(lcs(candidate, ref));
        if (l == 0.0) {
            continue;
        }
        const double p = l / static_cast<double>(candidate.size());
        const double r = l / static_cast<double>(ref.size());
        best = std::max(best, 2.0 * p * r / (p + r));
    }
    return best;
}

// ---------------------------------------------------------------------------
// DOT grammar

namespace {

enum class Tok { id, lbrace, rbrace, lbracket, rbracket, semi, comma, eq, colon, arrow, dash, end };

struct Token {
    Tok kind;
    std::string text;
    bool keyword_capable;  // bare identifier, may be a keyword
};

class DotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    bool line_start = true;
    while (i < s.size()) {
        const char c = s[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (line_start && c == '#') {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        line_start = false;
        if (s.substr(i, 2) == "//") {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        if (s.substr(i, 2) == "/*") {
            const auto end = s.find("*/", i + 2);
            if (end == std::string_view::npos) throw DotError("unterminated comment");
            i = end + 2;
            continue;
        }
        if (s.substr(i, 2) == "->") { out.push_back({Tok::arrow, "->", false}); i += 2; continue; }
        if (s.substr(i, 2) == "--") { out.push_back({Tok::dash, "--", false}); i += 2; continue; }
        switch (c) {
        case '{': out.push_back({Tok::lbrace, "{", false}); ++i; continue;
        case '}': out.push_back({Tok::rbrace, "}", false}); ++i; continue;
        case '[': out.push_back({Tok::lbracket, "[", false}); ++i; continue;
        case ']': out.push_back({Tok::rbracket, "]", false}); ++i; continue;
        case ';': out.push_back({Tok::semi, ";", false}); ++i; continue;
        case ',': out.push_back({Tok::comma, ",", false}); ++i; continue;
        case '=': out.push_back({Tok::eq, "=", false}); ++i; continue;
        case ':': out.push_back({Tok::colon, ":", false}); ++i; continue;
        default: break;
        }
        if (c == '"') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    text += s.substr(i, 2);
                    i += 2;
                    continue;
                }
                if (s[i] == '"') {
                    closed = true;
                    ++i;
                    break;
                }
                text.push_back(s[i++]);
            }
            if (!closed) throw DotError("unterminated string");
            out.push_back({Tok::id, text, false});
            continue;
        }
        if (c == '<') {
            int depth = 0;
            const std::size_t start = i;
            do {
                if (i >= s.size()) throw DotError("unterminated HTML string");
                if (s[i] == '<') ++depth;
                if (s[i] == '>') --depth;
                ++i;
            } while (depth > 0);
            out.push_back({Tok::id, std::string(s.substr(start, i - start)), false});
            continue;
        }
        const auto is_alpha = [](char ch) {
            return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' || static_cast<unsigned char>(ch) >= 0x80;
        };
        if (is_alpha(c)) {
            const std::size_t start = i;
            while (i < s.size() && (is_alpha(s[i]) || std::isdigit(static_cast<unsigned char>(s[i])))) ++i;
            out.push_back({Tok::id, std::string(s.substr(start, i - start)), true});
            continue;
        }
        if (c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = i;
            if (s[i] == '-') ++i;
            bool digits = false;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) { ++i; digits = true; }
            }
            if (!digits) throw DotError("malformed numeral");
            if (i < s.size() && is_alpha(s[i])) throw DotError("identifier may not start with a digit");
            out.push_back({Tok::id, std::string(s.substr(start, i - start)), false});
            continue;
        }
        throw DotError(std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::end, "", false});
    return out;
}

std::string lower(std::string s)
{
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

    void graph()
    {
        if (keyword("strict")) ++p_;
        if (keyword("digraph")) {
            directed_ = true;
        } else if (!keyword("graph")) {
            throw DotError("expected 'graph' or 'digraph'");
        }
        ++p_;
        if (plain_id()) ++p_;
        expect(Tok::lbrace);
        stmt_list();
        expect(Tok::rbrace);
        if (peek().kind != Tok::end) throw DotError("trailing content after graph");
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return t_[std::min(p_ + ahead, t_.size() - 1)]; }

    bool keyword(std::string_view k, std::size_t ahead = 0) const
    {
        const auto& tok = peek(ahead);
        return tok.kind == Tok::id && tok.keyword_capable && lower(tok.text) == k;
    }

    bool is_keyword(std::size_t ahead = 0) const
    {
        for (const auto* k : {"strict", "graph", "digraph", "node", "edge", "subgraph"}) {
            if (keyword(k, ahead)) return true;
        }
        return false;
    }

    bool plain_id(std::size_t ahead = 0) const { return peek(ahead).kind == Tok::id && !is_keyword(ahead); }

    void expect(Tok kind)
    {
        if (peek().kind != kind) throw DotError("unexpected token '" + peek().text + "'");
        ++p_;
    }

    void expect_id()
    {
        if (!plain_id()) throw DotError("expected an ID, got '" + peek().text + "'");
        ++p_;
    }

    void stmt_list()
    {
        while (peek().kind != Tok::rbrace && peek().kind != Tok::end) {
            stmt();
            if (peek().kind == Tok::semi) ++p_;
        }
    }

    void stmt()
    {
        if (keyword("graph") || keyword("node") || keyword("edge")) {
            ++p_;
            if (peek().kind != Tok::lbracket) throw DotError("attribute statement needs '['");
            attr_list();
            return;
        }
        if (plain_id() && peek(1).kind == Tok::eq) {
            p_ += 2;
            expect_id();
            return;
        }
        operand();
        bool edge = false;
        while (peek().kind == Tok::arrow || peek().kind == Tok::dash) {
            if ((peek().kind == Tok::arrow) != directed_) throw DotError("edge operator does not match graph type");
            ++p_;
            operand();
            edge = true;
        }
        (void)edge;
        if (peek().kind == Tok::lbracket) attr_list();
    }

    void operand()
    {
        if (keyword("subgraph") || peek().kind == Tok::lbrace) {
            subgraph();
            return;
        }
        expect_id();
        if (peek().kind == Tok::colon) {
            ++p_;
            expect_id();
            if (peek().kind == Tok::colon) {
                ++p_;
                expect_id();
            }
        }
    }

    void subgraph()
    {
        if (keyword("subgraph")) {
            ++p_;
            if (plain_id()) ++p_;
        }
        expect(Tok::lbrace);
        stmt_list();
        expect(Tok::rbrace);
    }

    void attr_list()
    {
        while (peek().kind == Tok::lbracket) {
            ++p_;
            while (peek().kind != Tok::rbracket) {
                expect_id();
                expect(Tok::eq);
                expect_id();
                if (peek().kind == Tok::comma || peek().kind == Tok::semi) ++p_;
            }
            expect(Tok::rbracket);
        }
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
    bool directed_ = false;
};

}  // namespace

std::string dot_syntax_error(const std::string& text)
{
    try {
        Parser(lex(text)).graph();
        return {};
    } catch (const DotError& e) {
        return e.what();
    }
}

// ---------------------------------------------------------------------------
// random inputs

namespace {

const std::vector<std::string> kLabels = {"read", "write", "walk", "sit", "talk to"};
const std::vector<std::string> kObjects = {"book", "cup", "desk", "pen"};

BBox random_box(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(0.0, 500.0);
    std::uniform_real_distribution<double> size(10.0, 200.0);
    const double x = pos(rng);
    const double y = pos(rng);
    return {x, y, x + size(rng), y + size(rng)};
}

}  // namespace

std::vector<ActionObservation> random_stream(std::mt19937_64& rng, int max_frames)
{
    const int frames = std::uniform_int_distribution<int>(1, max_frames)(rng);
    const int persons = std::uniform_int_distribution<int>(1, 3)(rng);
    const int labels = std::uniform_int_distribution<int>(1, static_cast<int>(kLabels.size()))(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Bursty on/off process per (person, label) so that both dense runs and sparse noise occur.
    std::map<std::pair<int, int>, std::pair<double, double>> rates;
    std::map<std::pair<int, int>, bool> on;
    for (int p = 1; p <= persons; ++p) {
        for (int l = 0; l < labels; ++l) {
            rates[{p, l}] = {unit(rng) * 0.9 + 0.05, unit(rng) * 0.4};
            on[{p, l}] = unit(rng) < 0.5;
        }
    }
    std::vector<ActionObservation> out;
    for (int f = 0; f < frames; ++f) {
        for (int p = 1; p <= persons; ++p) {
            for (int l = 0; l < labels; ++l) {
                auto& state = on[{p, l}];
                if (unit(rng) < 0.08) state = !state;
                const auto [dense, sparse] = rates[{p, l}];
                if (unit(rng) < (state ? dense : sparse)) {
                    out.push_back({f, p, kLabels[static_cast<std::size_t>(l)], 0.75 + 0.25 * unit(rng),
                                   random_box(rng), p});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const ActionObservation& a, const ActionObservation& b) {
        return std::tie(a.frame_index, a.person_id, a.label) < std::tie(b.frame_index, b.person_id, b.label);
    });
    return out;
}

std::vector<AssociatedObservation> random_associated(std::mt19937_64& rng, int max_frames)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> object_rate;
    for (std::size_t i = 0; i < kObjects.size(); ++i) {
        object_rate.push_back(unit(rng) * 0.5);
    }
    std::vector<AssociatedObservation> out;
    for (auto& o : random_stream(rng, max_frames)) {
        AssociatedObservation a{std::move(o), {}};
        for (std::size_t i = 0; i < kObjects.size(); ++i) {
            if (unit(rng) < object_rate[i]) {
                a.objects.push_back(kObjects[i]);
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<Event> random_events(std::mt19937_64& rng, int count, int max_frame)
{
    std::uniform_int_distribution<int> start(0, max_frame);
    std::uniform_int_distribution<int> length(0, std::max(1, max_frame / 4));
    std::uniform_int_distribution<int> person(1, 4);
    std::uniform_int_distribution<std::size_t> label(0, kLabels.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Event> out;
    for (int i = 0; i < count; ++i) {
        Event e;
        e.event_id = i;
        e.person_id = person(rng);
        e.action_label = kLabels[label(rng)];
        e.start_frame = start(rng);
        e.end_frame = e.start_frame + length(rng);
        BBox box = random_box(rng);
        for (int f = e.start_frame; f <= e.end_frame; ++f) {
            if (f == e.start_frame || unit(rng) < 0.5) {
                box.x1 += unit(rng) * 4.0 - 2.0;
                box.x2 += unit(rng) * 4.0 - 2.0;
                box.x1 = std::max(0.0, box.x1);
                box.x2 = std::max(box.x1, box.x2);
                e.per_frame_bboxes[f] = box;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace oracle
