#include "dap/data_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dap {

using nlohmann::ordered_json;

namespace {

constexpr const char* kGoalId = "goal";

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  return is;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Calls fn(record, where) for every nonblank line; JSON and type errors become
// ParseError tagged with file:line.
template <typename Fn>
void for_each_record(std::istream& is, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto rec = ordered_json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) throw Error(ErrorKind::ParseError, where + ": not a JSON object");
    try {
      fn(rec, where);
    } catch (const ordered_json::exception& e) {
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
  }
}

std::string text_field(const ordered_json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) throw Error(ErrorKind::ParseError, where + ": missing field '" + key + "'");
  const auto& v = rec.at(key);
  if (!v.is_string()) throw Error(ErrorKind::ParseError, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

// Builds the gold tree of a native record; throws on any defect.
GoldTree parse_gold(const ordered_json& rec, const ProofInstance& inst, const std::string& where) {
  std::map<std::string, std::string> inter;
  if (rec.contains("intermediates")) {
    for (const auto& [id, text] : rec.at("intermediates").items()) inter[id] = text.get<std::string>();
  }
  GoldTree tree;
  const auto& steps = rec.at("steps");
  if (!steps.is_array()) throw Error(ErrorKind::ParseError, where + ": 'steps' must be an array");
  for (const auto& s : steps) {
    if (!s.is_array() || s.size() != 3)
      throw Error(ErrorKind::ParseError, where + ": each step must be [left, right, conclusion]");
    GoldStep step{s[0].get<std::string>(), s[1].get<std::string>(), {}};
    const std::string cid = s[2].get<std::string>();
    std::string text;
    if (auto it = inter.find(cid); it != inter.end()) {
      text = it->second;
    } else if (cid == kGoalId) {
      text = inst.goal.text;
    } else {
      throw Error(ErrorKind::DanglingReference, where + ": conclusion '" + cid + "' has no text");
    }
    step.conclusion = {cid, std::move(text), Origin::Intermediate};
    tree.steps.push_back(std::move(step));
  }
  if (tree.steps.empty()) throw Error(ErrorKind::ParseError, where + ": 'steps' is empty");
  tree.root_id = rec.contains("root") ? rec.at("root").get<std::string>() : tree.steps.back().conclusion.id;
  return tree;
}

}  // namespace

std::vector<ProofInstance> read_instances(std::istream& is, const std::string& source, GoldMode mode) {
  std::vector<ProofInstance> out;
  for_each_record(is, source, [&](const ordered_json& rec, const std::string& where) {
    ProofInstance inst;
    inst.id = rec.contains("id") ? rec.at("id").get<std::string>() : source + "#" + std::to_string(out.size());
    inst.goal = {kGoalId, text_field(rec, "goal", where), Origin::Goal};
    std::unordered_set<std::string> facts;
    if (rec.contains("instance_facts")) {
      for (const auto& f : rec.at("instance_facts")) facts.insert(f.get<std::string>());
    }
    if (!rec.contains("premises") || !rec.at("premises").is_object())
      throw Error(ErrorKind::ParseError, where + ": 'premises' must be an id -> text object");
    for (const auto& [id, text] : rec.at("premises").items()) {
      inst.premises.push_back({id, text.get<std::string>(), facts.contains(id) ? Origin::InstanceFact : Origin::GeneralFact});
    }
    for (const auto& f : facts) {
      if (!inst.premise_index(f))
        throw Error(ErrorKind::DanglingReference, where + ": instance fact '" + f + "' is not a premise");
    }
    if (rec.contains("steps")) {
      try {
        inst.gold_tree = parse_gold(rec, inst, where);
        validate(inst);
      } catch (const Error& e) {
        if (mode == GoldMode::Strict) {
          if (e.kind() == ErrorKind::DanglingReference || e.kind() == ErrorKind::ParseError) throw;
          throw Error(ErrorKind::ParseError, where + ": " + e.what());
        }
        inst.gold_tree.reset();
      } catch (const ordered_json::exception&) {
        if (mode == GoldMode::Strict) throw;
        inst.gold_tree.reset();
      }
    }
    try {
      validate(inst);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DanglingReference) throw;
      throw Error(ErrorKind::ParseError, where + ": " + e.what());
    }
    out.push_back(std::move(inst));
  });
  return out;
}

std::vector<ProofInstance> load_instances(const std::string& path, GoldMode mode) {
  auto is = open_input(path);
  return read_instances(is, path, mode);
}

std::string serialize_instance(const ProofInstance& instance) {
  ordered_json j;
  j["id"] = instance.id;
  j["premises"] = ordered_json::object();
  ordered_json facts = ordered_json::array();
  for (const auto& p : instance.premises) {
    j["premises"][p.id] = p.text;
    if (p.origin == Origin::InstanceFact) facts.push_back(p.id);
  }
  j["goal"] = instance.goal.text;
  if (instance.gold_tree) {
    j["steps"] = ordered_json::array();
    j["intermediates"] = ordered_json::object();
    for (const auto& s : instance.gold_tree->steps) {
      j["steps"].push_back({s.left_id, s.right_id, s.conclusion.id});
      j["intermediates"][s.conclusion.id] = s.conclusion.text;
    }
    j["root"] = instance.gold_tree->root_id;
  }
  if (!facts.empty()) j["instance_facts"] = facts;
  return j.dump();
}

void write_instances(std::ostream& os, std::span<const ProofInstance> instances) {
  for (const auto& inst : instances) os << serialize_instance(inst) << '\n';
}

std::vector<ProofInstance> read_entailment_bank(std::istream& is, const std::string& source) {
  std::vector<ProofInstance> out;
  for_each_record(is, source, [&](const ordered_json& rec, const std::string& where) {
    ProofInstance inst;
    inst.id = rec.contains("id") ? rec.at("id").get<std::string>() : source + "#" + std::to_string(out.size());
    inst.goal = {kGoalId, text_field(rec, "hypothesis", where), Origin::Goal};
    const auto& meta = rec.at("meta");
    for (const auto& [id, text] : meta.at("triples").items()) inst.premises.push_back({id, text.get<std::string>(), Origin::GeneralFact});
    std::map<std::string, std::string> inter;
    if (meta.contains("intermediate_conclusions")) {
      for (const auto& [id, text] : meta.at("intermediate_conclusions").items()) inter[id] = text.get<std::string>();
    }
    GoldTree tree;
    bool representable = true;
    std::stringstream proof(meta.value("step_proof", std::string()));
    std::string part;
    while (std::getline(proof, part, ';')) {
      part = trim(part);
      if (part.empty()) continue;
      const auto arrow = part.find("->");
      if (arrow == std::string::npos) throw Error(ErrorKind::ParseError, where + ": malformed proof step '" + part + "'");
      std::vector<std::string> inputs;
      std::stringstream lhs(part.substr(0, arrow));
      std::string in;
      while (std::getline(lhs, in, '&')) inputs.push_back(trim(in));
      std::string rhs = trim(part.substr(arrow + 2));
      std::string cid = trim(rhs.substr(0, rhs.find(':')));
      if (inputs.size() != 2) {
        representable = false;
        break;
      }
      std::string text;
      if (cid == "hypothesis") {
        cid = kGoalId;
        text = inst.goal.text;
      } else if (auto it = inter.find(cid); it != inter.end()) {
        text = it->second;
      } else if (rhs.find(':') != std::string::npos) {
        text = trim(rhs.substr(rhs.find(':') + 1));
      } else {
        throw Error(ErrorKind::DanglingReference, where + ": conclusion '" + cid + "' has no text");
      }
      tree.steps.push_back({inputs[0], inputs[1], {cid, std::move(text), Origin::Intermediate}});
    }
    if (representable && !tree.steps.empty()) {
      tree.root_id = tree.steps.back().conclusion.id;
      inst.gold_tree = std::move(tree);
    }
    validate(inst);
    out.push_back(std::move(inst));
  });
  return out;
}

std::vector<ProofInstance> load_entailment_bank(const std::string& path) {
  auto is = open_input(path);
  return read_entailment_bank(is, path);
}

std::vector<SsrcExample> read_ssrc(std::istream& is, const std::string& source) {
  std::vector<SsrcExample> out;
  for_each_record(is, source, [&](const ordered_json& rec, const std::string& where) {
    SsrcExample ex;
    ex.id = rec.contains("id") ? rec.at("id").get<std::string>() : source + "#" + std::to_string(out.size());
    ex.category = parse_category(text_field(rec, "category", where));
    if (rec.contains("perturbation") && !rec.at("perturbation").is_null()) {
      const std::string p = rec.at("perturbation").get<std::string>();
      if (normalize_text(p) != "none") ex.perturbation = parse_perturbation(p);
    }
    const auto& prem = rec.at("premises");
    if (!prem.is_array() || prem.size() != 2) throw Error(ErrorKind::ParseError, where + ": 'premises' must hold two texts");
    ex.premises = {prem[0].get<std::string>(), prem[1].get<std::string>()};
    ex.conclusion = text_field(rec, "conclusion", where);
    if (rec.contains("variants")) {
      const auto& v = rec.at("variants");
      if (!v.is_array() || v.size() != 2)
        throw Error(ErrorKind::ParseError, where + ": 'variants' must hold one list per premise slot");
      for (std::size_t s = 0; s < 2; ++s) ex.variants[s] = v[s].get<std::vector<std::string>>();
    }
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<SsrcExample> load_ssrc(const std::string& path) {
  auto is = open_input(path);
  return read_ssrc(is, path);
}

void write_ssrc(std::ostream& os, std::span<const SsrcExample> examples) {
  for (const auto& ex : examples) {
    ordered_json j;
    j["id"] = ex.id;
    j["category"] = std::string(to_string(ex.category));
    j["perturbation"] = ex.perturbation ? ordered_json(std::string(to_string(*ex.perturbation))) : ordered_json(nullptr);
    j["premises"] = {ex.premises[0], ex.premises[1]};
    j["conclusion"] = ex.conclusion;
    j["variants"] = {ex.variants[0], ex.variants[1]};
    os << j.dump() << '\n';
  }
}

std::vector<Statement> read_corpus(std::istream& is, const std::string& source) {
  std::vector<Statement> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank(line)) continue;
    Statement st{"", "", Origin::GeneralFact};
    const std::string where = source + ":" + std::to_string(lineno);
    if (line.front() == '{') {
      auto rec = ordered_json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object()) throw Error(ErrorKind::ParseError, where + ": not a JSON object");
      st.text = text_field(rec, "text", where);
      st.id = rec.contains("id") ? rec.at("id").get<std::string>() : "c" + std::to_string(out.size());
    } else {
      st.text = trim(line);
      st.id = "c" + std::to_string(out.size());
    }
    if (!ids.insert(st.id).second) throw Error(ErrorKind::ParseError, where + ": duplicate corpus id '" + st.id + "'");
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<Statement> load_corpus(const std::string& path) {
  auto is = open_input(path);
  return read_corpus(is, path);
}

Bm25Index index_corpus(std::span<const Statement> corpus, Bm25Params params) {
  Bm25Index index(params);
  for (const auto& st : corpus) index.add_document(st.text);
  index.build();
  return index;
}

std::vector<Statement> t3_to_t2(std::string_view goal, const Bm25Index& index, std::span<const Statement> corpus,
                                std::size_t k, std::span<const Statement> instance_facts) {
  if (index.built() && index.size() != corpus.size())
    throw Error(ErrorKind::InvalidArgument, "index and corpus sizes differ");
  std::vector<Statement> out;
  std::unordered_set<std::string> seen;
  if (k > 0) {
    for (const auto& hit : index.top_k(tokenize(goal), k)) {
      const Statement& st = corpus[hit.doc];
      if (seen.insert(normalize_text(st.text)).second) out.push_back(st);
    }
  } else if (!index.built()) {
    throw Error(ErrorKind::IndexNotBuilt, "corpus index is not built");
  }
  for (const auto& f : instance_facts) {
    if (seen.insert(normalize_text(f.text)).second) {
      out.push_back(f);
      out.back().origin = Origin::InstanceFact;
    }
  }
  return out;
}

std::vector<TripletGroup> extract_triplets(std::span<const ProofInstance> instances, const Encoder& encoder,
                                           bool strict, std::vector<std::string>* skipped) {
  std::vector<TripletGroup> groups;
  for (const auto& inst : instances) {
    if (!inst.gold_tree) {
      if (strict) throw Error(ErrorKind::NoGoldTree, "instance '" + inst.id + "' has no gold tree");
      if (skipped) skipped->push_back(inst.id);
      continue;
    }
    TripletGroup group{inst.id, {}};
    for (const auto& step : inst.gold_tree->steps) {
      Triplet t;
      t.tree_id = inst.id;
      t.text_a = *inst.text_of(step.left_id);
      t.text_b = *inst.text_of(step.right_id);
      t.text_d = step.conclusion.text;
      const std::vector<std::string> texts{t.text_a, t.text_b, t.text_d};
      auto vecs = encoder.encode_batch(texts);
      t.e_a = std::move(vecs[0]);
      t.e_b = std::move(vecs[1]);
      t.e_d = std::move(vecs[2]);
      group.triplets.push_back(std::move(t));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(manifest.config)));
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

  ordered_json j;
  j["command"] = manifest.command;
  j["config_hash"] = hash;
  j["config"] = manifest.config;
  j["seed"] = manifest.seed;
  j["datasets"] = manifest.datasets;
  j["outputs"] = manifest.outputs;
  j["timestamp"] = stamp;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / "manifest.json").string());
  os << j.dump(2) << '\n';
}

}  // namespace dap
