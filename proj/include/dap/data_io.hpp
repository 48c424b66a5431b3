#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dap/bm25.hpp"
#include "dap/core.hpp"
#include "dap/encoders.hpp"
#include "dap/evaluation.hpp"
#include "dap/tuning.hpp"

namespace dap {

// How a gold tree that fails validation is handled while loading.
enum class GoldMode { Strict, Lenient };

// Native instance record, one JSON object per line:
//   {"id": "...", "premises": {"p1": "...", ...}, "goal": "...",
//    "steps": [["p1", "p2", "i1"], ...], "intermediates": {"i1": "...", ...},
//    "root": "i1", "instance_facts": ["p2", ...]}
// `steps`, `intermediates`, `root` and `instance_facts` are optional.
// Strict: any defect throws (ParseError / DanglingReference). Lenient: a
// broken gold tree is dropped and the instance kept.
std::vector<ProofInstance> read_instances(std::istream& is, const std::string& source = "<stream>",
                                          GoldMode mode = GoldMode::Strict);
std::vector<ProofInstance> load_instances(const std::string& path, GoldMode mode = GoldMode::Strict);

std::string serialize_instance(const ProofInstance& instance);
void write_instances(std::ostream& os, std::span<const ProofInstance> instances);

// EntailmentBank-style records (hypothesis, meta.triples,
// meta.intermediate_conclusions, meta.step_proof) converted to instances.
// Steps with more than two inputs cannot be represented; such trees are
// dropped (the instance keeps its premises and goal).
std::vector<ProofInstance> read_entailment_bank(std::istream& is, const std::string& source = "<stream>");
std::vector<ProofInstance> load_entailment_bank(const std::string& path);

// SSRC record:
//   {"id": "...", "category": "Modus Ponens", "perturbation": "Negation" | null,
//    "premises": ["...", "..."], "conclusion": "...",
//    "variants": [["...", ...], ["...", ...]]}
std::vector<SsrcExample> read_ssrc(std::istream& is, const std::string& source = "<stream>");
std::vector<SsrcExample> load_ssrc(const std::string& path);
void write_ssrc(std::ostream& os, std::span<const SsrcExample> examples);

// One fact per line: {"id": "...", "text": "..."}; plain text lines get
// sequential ids.
std::vector<Statement> read_corpus(std::istream& is, const std::string& source = "<stream>");
std::vector<Statement> load_corpus(const std::string& path);
Bm25Index index_corpus(std::span<const Statement> corpus, Bm25Params params = {});

// Top-k corpus facts by BM25 against the goal, then the instance facts,
// deduplicated by normalized text (first occurrence wins).
std::vector<Statement> t3_to_t2(std::string_view goal, const Bm25Index& index, std::span<const Statement> corpus,
                                std::size_t k, std::span<const Statement> instance_facts = {});

// One triplet per gold step, grouped by instance. Strict mode throws
// NoGoldTree; lenient mode skips and reports the instance id in `skipped`.
std::vector<TripletGroup> extract_triplets(std::span<const ProofInstance> instances, const Encoder& encoder,
                                           bool strict = true, std::vector<std::string>* skipped = nullptr);

std::uint64_t fnv1a64(std::string_view data);

struct RunManifest {
  std::string command;
  std::string config;  // canonical rendering of every option
  std::uint64_t seed = 0;
  std::map<std::string, std::string> datasets;
  std::map<std::string, std::string> outputs;
};

// Writes manifest.json under `dir` (created if missing). The timestamp is the
// only field that varies between identical runs.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace dap
