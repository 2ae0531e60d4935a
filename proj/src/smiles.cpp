//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "chemhg/valence.hpp"

namespace chemhg::mol {

SmilesError::SmilesError(std::size_t position, const std::string& reason)
    : DataError("SMILES error at offset " + std::to_string(position) + ": " +
                reason),
      position_(position),
      reason_(reason) {}

namespace {

bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  MolGraph run() {
    if (s_.empty()) throw SyntaxError(0, "empty SMILES");
    out_.smiles_source = std::string(s_);
    while (pos_ < s_.size()) step();
    if (pending_) throw SyntaxError(pending_pos_, "dangling bond symbol");
    if (!branches_.empty()) throw SyntaxError(branch_pos_.back(), "unclosed branch");
    if (!rings_.empty()) {
      throw SyntaxError(rings_.begin()->second.pos,
                        "unclosed ring " + std::to_string(rings_.begin()->first));
    }
    if (out_.atoms.empty()) throw SyntaxError(0, "no atoms");
    return std::move(out_);
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t pos;
  };

  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0) throw SyntaxError(pos_, "branch without a preceding atom");
        if (pending_) throw SyntaxError(pos_, "bond symbol before '('");
        branches_.push_back(prev_);
        branch_pos_.push_back(pos_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw SyntaxError(pos_, "unmatched ')'");
        if (pending_) throw SyntaxError(pos_, "bond symbol before ')'");
        if (prev_ == branches_.back() && s_[pos_ - 1] == '(') {
          throw SyntaxError(pos_, "empty branch");
        }
        prev_ = branches_.back();
        branches_.pop_back();
        branch_pos_.pop_back();
        ++pos_;
        return;
      case '-':
      case '=':
      case '#':
      case ':':
        if (pending_) throw SyntaxError(pos_, "consecutive bond symbols");
        if (prev_ < 0) throw SyntaxError(pos_, "bond symbol without a preceding atom");
        pending_ = c == '-'   ? BondOrder::kSingle
                   : c == '=' ? BondOrder::kDouble
                   : c == '#' ? BondOrder::kTriple
                              : BondOrder::kAromatic;
        pending_pos_ = pos_;
        ++pos_;
        return;
      case '/':
      case '\\':
        if (prev_ < 0) throw SyntaxError(pos_, "bond symbol without a preceding atom");
        ++pos_;
        return;
      case '.':
        if (pending_) throw SyntaxError(pos_, "bond symbol before '.'");
        if (prev_ < 0) throw SyntaxError(pos_, "'.' without a preceding atom");
        prev_ = -1;
        ++pos_;
        return;
      case '%':
      case '0':
      case '1':
      case '2':
      case '3':
      case '4':
      case '5':
      case '6':
      case '7':
      case '8':
      case '9':
        ring_closure();
        return;
      case '[':
        bracket_atom();
        return;
      case '*':
        throw UnsupportedFeature(pos_, "wildcard atom '*'");
      default:
        organic_atom();
        return;
    }
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) throw SyntaxError(pos_, "ring closure without a preceding atom");
    int number;
    if (s_[pos_] == '%') {
      if (pos_ + 2 >= s_.size() || !is_digit(s_[pos_ + 1]) || !is_digit(s_[pos_ + 2])) {
        throw SyntaxError(pos_, "'%' must be followed by two digits");
      }
      number = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      number = s_[pos_] - '0';
      ++pos_;
    }
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_[number] = {prev_, pending_, start};
      pending_.reset();
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) throw SyntaxError(start, "ring closure onto the same atom");
    if (out_.find_bond(open.atom, prev_) >= 0) {
      throw SyntaxError(start, "ring closure duplicates an existing bond");
    }
    BondOrder order;
    if (open.order && pending_ && *open.order != *pending_) {
      throw SyntaxError(start, "conflicting ring-closure bond symbols");
    } else if (open.order) {
      order = *open.order;
    } else if (pending_) {
      order = *pending_;
    } else {
      order = default_order(open.atom, prev_);
    }
    pending_.reset();
    out_.bonds.push_back({open.atom, prev_, order});
  }

  BondOrder default_order(int a, int b) const {
    return out_.atoms[a].aromatic && out_.atoms[b].aromatic ? BondOrder::kAromatic
                                                            : BondOrder::kSingle;
  }

  void add_atom(const Atom& atom) {
    out_.atoms.push_back(atom);
    const int idx = out_.num_atoms() - 1;
    if (prev_ >= 0) {
      const BondOrder order = pending_ ? *pending_ : default_order(prev_, idx);
      out_.bonds.push_back({prev_, idx, order});
    }
    pending_.reset();
    prev_ = idx;
  }

  void organic_atom() {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    Atom atom;
    std::string sym;
    if (is_upper(c)) {
      if (pos_ + 1 < s_.size()) {
        std::string two{c, s_[pos_ + 1]};
        if (two == "Cl" || two == "Br") sym = two;
      }
      if (sym.empty()) sym = std::string(1, c);
      const int e = find_element(sym);
      if (e < 0 || !element_info(e).organic_subset) {
        std::string shown = sym;
        if (pos_ + 1 < s_.size() && is_lower(s_[pos_ + 1])) shown += s_[pos_ + 1];
        if (find_element(shown) >= 0 || is_upper(c)) {
          throw UnsupportedFeature(start, "atom '" + shown +
                                              "' must be bracketed or is outside the supported set");
        }
        throw SyntaxError(start, "unknown atom symbol");
      }
      atom.element = static_cast<std::uint8_t>(e);
    } else if (is_lower(c)) {
      sym = std::string(1, static_cast<char>(std::toupper(c)));
      const int e = find_element(sym);
      if (e < 0 || !element_info(e).aromatic_organic) {
        throw SyntaxError(start, std::string("unexpected character '") + c + "'");
      }
      atom.element = static_cast<std::uint8_t>(e);
      atom.aromatic = true;
    } else {
      throw SyntaxError(start, std::string("unexpected character '") + c + "'");
    }
    pos_ += sym.size();
    add_atom(atom);
  }

  int read_int() {
    int v = 0;
    while (pos_ < s_.size() && is_digit(s_[pos_])) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > 1000000) throw SyntaxError(pos_, "number too large");
      ++pos_;
    }
    return v;
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    auto need = [&](const char* what) {
      if (pos_ >= s_.size()) throw SyntaxError(start, std::string("unterminated bracket atom: ") + what);
    };
    need("symbol");
    read_int();  // isotope, ignored
    need("symbol");
    Atom atom;
    atom.bracket = true;
    const char c = s_[pos_];
    if (c == '*') throw UnsupportedFeature(pos_, "wildcard atom '*'");
    if (is_upper(c)) {
      std::string sym(1, c);
      if (pos_ + 1 < s_.size() && is_lower(s_[pos_ + 1])) {
        std::string two{c, s_[pos_ + 1]};
        if (find_element(two) >= 0) sym = two;
      }
      const int e = find_element(sym);
      if (e < 0) throw UnsupportedFeature(pos_, "element '" + sym + "' not supported");
      atom.element = static_cast<std::uint8_t>(e);
      pos_ += sym.size();
    } else if (is_lower(c)) {
      std::string sym(1, static_cast<char>(std::toupper(c)));
      if (pos_ + 1 < s_.size() && is_lower(s_[pos_ + 1])) {
        std::string two = sym + s_[pos_ + 1];
        if (two == "Se" || two == "As") {
          if (find_element(two) < 0) throw UnsupportedFeature(pos_, "element '" + two + "' not supported");
          sym = two;
        }
      }
      const int e = find_element(sym);
      if (e < 0) throw UnsupportedFeature(pos_, "aromatic element not supported");
      atom.element = static_cast<std::uint8_t>(e);
      atom.aromatic = true;
      pos_ += sym.size();
    } else {
      throw SyntaxError(pos_, "expected element symbol in bracket atom");
    }
    if (pos_ < s_.size() && is_lower(s_[pos_])) {
      throw UnsupportedFeature(pos_, "element not supported");
    }
    // chirality
    while (pos_ < s_.size() && s_[pos_] == '@') ++pos_;
    if (pos_ + 1 < s_.size()) {
      std::string_view tag = s_.substr(pos_, 2);
      if (tag == "TH" || tag == "AL" || tag == "SP" || tag == "TB" || tag == "OH") {
        pos_ += 2;
        read_int();
      }
    }
    need("']'");
    if (s_[pos_] == 'H') {
      ++pos_;
      atom.h_count = 1;
      if (pos_ < s_.size() && is_digit(s_[pos_])) atom.h_count = read_int();
    }
    need("']'");
    if (s_[pos_] == '+' || s_[pos_] == '-') {
      const char sign = s_[pos_];
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      if (pos_ < s_.size() && is_digit(s_[pos_])) {
        atom.charge = unit * read_int();
      } else {
        atom.charge = unit;
        while (pos_ < s_.size() && s_[pos_] == sign) {
          atom.charge += unit;
          ++pos_;
        }
      }
    }
    need("']'");
    if (s_[pos_] == ':') {
      ++pos_;
      if (pos_ >= s_.size() || !is_digit(s_[pos_])) {
        throw SyntaxError(pos_, "atom-map number expected after ':'");
      }
      atom.map_num = read_int();
      if (atom.map_num > 0 && !maps_.insert(atom.map_num).second) {
        throw SyntaxError(start, "duplicate atom-map number " + std::to_string(atom.map_num));
      }
    }
    need("']'");
    if (s_[pos_] != ']') throw SyntaxError(pos_, "expected ']'");
    ++pos_;
    add_atom(atom);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MolGraph out_;
  int prev_ = -1;
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<int> branches_;
  std::vector<std::size_t> branch_pos_;
  std::map<int, OpenRing> rings_;
  std::set<int> maps_;
};

std::string atom_text(const MolGraph& m, const Adjacency& adj, int i) {
  const Atom& a = m.atoms[i];
  const ElementInfo& info = element_info(a.element);
  std::string sym(info.symbol);
  if (a.aromatic) sym[0] = static_cast<char>(std::tolower(sym[0]));
  const bool plain_ok = !a.bracket && a.charge == 0 && a.map_num == 0 &&
                        info.organic_subset && (!a.aromatic || info.aromatic_organic);
  if (plain_ok) return sym;
  const int h = total_hydrogens(m, adj, i);
  std::string out = "[" + sym;
  if (h > 0) out += h == 1 ? "H" : "H" + std::to_string(h);
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  if (a.map_num > 0) out += ":" + std::to_string(a.map_num);
  out += "]";
  return out;
}

std::string bond_text(const MolGraph& m, const Bond& b) {
  const bool both_aromatic = m.atoms[b.a].aromatic && m.atoms[b.b].aromatic;
  switch (b.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int n) {
  return n < 10 ? std::to_string(n) : "%" + std::to_string(n);
}

class Writer {
 public:
  Writer(const MolGraph& m, std::span<const int> rank) : m_(m), adj_(adjacency(m)) {
    if (rank.empty()) return;
    if (rank.size() != m.atoms.size()) {
      throw std::invalid_argument("serialize_smiles: rank length differs from atom count");
    }
    for (auto& nbs : adj_) {
      std::stable_sort(nbs.begin(), nbs.end(), [&](const Neighbor& x, const Neighbor& y) {
        return rank[x.atom] < rank[y.atom];
      });
    }
    for (int i = 0; i < m.num_atoms(); ++i) start_order_.push_back(i);
    std::stable_sort(start_order_.begin(), start_order_.end(),
                     [&](int x, int y) { return rank[x] < rank[y]; });
  }

  SerializedSmiles run() {
    const int n = m_.num_atoms();
    if (start_order_.empty()) {
      for (int i = 0; i < n; ++i) start_order_.push_back(i);
    }
    visited_.assign(n, false);
    tree_children_.assign(n, {});
    closures_.assign(n, {});
    is_closure_.assign(m_.bonds.size(), false);
    // Pass 1: spanning forest and ring-closure bonds.
    std::vector<int> roots;
    for (int r : start_order_) {
      if (visited_[r]) continue;
      roots.push_back(r);
      discover(r);
    }
    // Pass 2: emit.
    for (std::size_t k = 0; k < roots.size(); ++k) {
      if (k) out_.smiles += '.';
      emit(roots[k]);
    }
    return std::move(out_);
  }

 private:
  void discover(int root) {
    struct Frame {
      int atom;
      int parent_bond;
      std::size_t next;
    };
    std::vector<Frame> stack{{root, -1, 0}};
    visited_[root] = true;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next >= adj_[f.atom].size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = adj_[f.atom][f.next++];
      if (nb.bond == f.parent_bond || is_closure_[nb.bond]) continue;
      if (visited_[nb.atom]) {
        // Back edge to an ancestor still on the stack.
        is_closure_[nb.bond] = true;
        closures_[nb.atom].push_back(nb.bond);
        closures_[f.atom].push_back(nb.bond);
        continue;
      }
      visited_[nb.atom] = true;
      tree_children_[f.atom].push_back(nb);
      stack.push_back({nb.atom, nb.bond, 0});
    }
  }

  int alloc_digit() {
    for (int d = 1; d < 100; ++d) {
      if (!digits_in_use_.count(d)) {
        digits_in_use_.insert(d);
        return d;
      }
    }
    throw std::runtime_error("serialize_smiles: more than 99 open rings");
  }

  void emit(int root) {
    // Iterative emission so deep chains do not exhaust the stack.
    struct Task {
      enum Kind { kAtom, kText } kind;
      int atom;
      std::string text;
    };
    std::vector<Task> todo{{Task::kAtom, root, {}}};
    while (!todo.empty()) {
      Task t = std::move(todo.back());
      todo.pop_back();
      if (t.kind == Task::kText) {
        out_.smiles += t.text;
        continue;
      }
      const int a = t.atom;
      out_.order.push_back(a);
      out_.smiles += atom_text(m_, adj_, a);
      for (int bond : closures_[a]) {
        auto it = open_digit_.find(bond);
        if (it == open_digit_.end()) {
          const int d = alloc_digit();
          open_digit_[bond] = d;
          out_.smiles += bond_text(m_, m_.bonds[bond]) + ring_label(d);
        } else {
          out_.smiles += ring_label(it->second);
          digits_in_use_.erase(it->second);
          open_digit_.erase(it);
        }
      }
      const auto& kids = tree_children_[a];
      // Push in reverse so the first child is emitted first.
      for (std::size_t k = kids.size(); k-- > 0;) {
        const bool last = k + 1 == kids.size();
        const std::string bt = bond_text(m_, m_.bonds[kids[k].bond]);
        if (!last) todo.push_back({Task::kText, -1, ")"});
        todo.push_back({Task::kAtom, kids[k].atom, {}});
        todo.push_back({Task::kText, -1, last ? bt : "(" + bt});
      }
    }
  }

  const MolGraph& m_;
  Adjacency adj_;
  std::vector<int> start_order_;
  std::vector<bool> visited_;
  std::vector<std::vector<Neighbor>> tree_children_;
  std::vector<std::vector<int>> closures_;
  std::vector<bool> is_closure_;
  std::map<int, int> open_digit_;
  std::set<int> digits_in_use_;
  SerializedSmiles out_;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    if (p == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<MolGraph> parse_block(std::string_view block, const char* side) {
  std::vector<MolGraph> mols;
  std::set<int> maps;
  const auto parts = split(block, '.');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) {
      throw ReactionParseError(std::string(side) + " " + std::to_string(i + 1) +
                               ": empty molecule");
    }
    try {
      mols.push_back(parse_smiles(parts[i]));
    } catch (const SmilesError& e) {
      throw ReactionParseError(std::string(side) + " " + std::to_string(i + 1) +
                               ": " + e.what());
    }
    for (const Atom& a : mols.back().atoms) {
      if (a.map_num > 0 && !maps.insert(a.map_num).second) {
        throw ReactionParseError(std::string(side) + " " + std::to_string(i + 1) +
                                 ": atom-map number " + std::to_string(a.map_num) +
                                 " repeated on the same side");
      }
    }
  }
  return mols;
}

}  // namespace

MolGraph parse_smiles(std::string_view s) { return Parser(s).run(); }

SerializedSmiles serialize_smiles_with_order(const MolGraph& m, std::span<const int> rank) {
  return Writer(m, rank).run();
}

std::string serialize_smiles(const MolGraph& m) {
  return serialize_smiles_with_order(m).smiles;
}

MolGraph strip_maps(const MolGraph& m) {
  MolGraph out = m;
  const Adjacency adj = adjacency(m);
  for (int i = 0; i < out.num_atoms(); ++i) {
    Atom& a = out.atoms[i];
    a.map_num = 0;
    if (!a.bracket || a.charge != 0) continue;
    const ElementInfo& info = element_info(a.element);
    if (!info.organic_subset || (a.aromatic && !info.aromatic_organic)) continue;
    Atom plain = a;
    plain.bracket = false;
    plain.h_count = 0;
    // Implicit H of the plain form, evaluated in the original environment.
    MolGraph ctx = m;
    ctx.atoms[i] = plain;
    if (implicit_hydrogens(ctx, adj, i) == a.h_count) a = plain;
  }
  out.smiles_source = serialize_smiles(out);
  return out;
}

Reaction parse_reaction(std::string_view line) {
  Reaction rxn;
  std::string_view body = line;
  const std::size_t tab = line.find('\t');
  if (tab != std::string_view::npos) {
    body = line.substr(0, tab);
    const std::string_view tid = trim(line.substr(tab + 1));
    if (!tid.empty()) {
      int v = 0;
      bool neg = false;
      std::size_t i = 0;
      if (tid[0] == '-') {
        neg = true;
        i = 1;
      }
      if (i == tid.size()) throw ReactionParseError("template id is not an integer");
      for (; i < tid.size(); ++i) {
        if (!is_digit(tid[i])) throw ReactionParseError("template id is not an integer");
        v = v * 10 + (tid[i] - '0');
      }
      rxn.template_id = neg ? -v : v;
    }
  }
  body = trim(body);
  const auto blocks = split(body, '>');
  if (blocks.size() != 1 && blocks.size() != 3) {
    throw ReactionParseError("expected 'reactants>>products' or reactants only");
  }
  if (blocks[0].empty()) throw ReactionParseError("no reactants");
  rxn.reactants = parse_block(blocks[0], "reactant");
  if (blocks.size() == 3 && !blocks[2].empty()) {
    rxn.products = parse_block(blocks[2], "product");
  }
  return rxn;
}

ReactionFile read_reactions(std::istream& in) {
  ReactionFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.reactions.push_back({line_no, parse_reaction(line)});
    } catch (const DataError& e) {
      out.failures.push_back({line_no, e.what()});
    }
  }
  return out;
}

ReactionFile read_reactions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open reaction file '" + path + "'");
  return read_reactions(in);
}

}  // namespace chemhg::mol
