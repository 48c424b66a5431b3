// Command-line driver: every subcommand writes its artifacts and a manifest
// under the run directory given by --out.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dap/bm25.hpp"
#include "dap/data_io.hpp"
#include "dap/encoders.hpp"
#include "dap/evaluation.hpp"
#include "dap/heuristics.hpp"
#include "dap/projection_head.hpp"
#include "dap/search.hpp"
#include "dap/synthetic.hpp"
#include "dap/tuning.hpp"
#include "plot.hpp"

namespace fs = std::filesystem;
using namespace dap;

namespace {

struct Options {
  // global
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  std::string out = "run";
  std::string data_dir;
  std::string encoder_url, stepmodel_url, entail_url, scorer_url;
  double remote_timeout = 30.0;
  int remote_retries = 3;

  // data
  std::string dataset, format = "native", corpus, dev;
  bool lenient = false;

  // backends
  std::string encoder = "synthetic", embeddings, head;
  bool passthrough = false;
  std::string heuristic = "additive", scorer_table;
  bool both_orders = false;
  std::string step_model = "oracle", entailment = "oracle", dist_step_model = "none";

  // protocols
  std::string condition = "deduction";
  std::size_t exhaustive_limit = 40, sample_size = 500;
  std::string instance;
  std::size_t k = 25;
  std::string texts, input, title;

  SearchConfig search;
  TrainConfig train;
  bool no_consanguinity = false, no_agreement = false, no_dup_input = false, no_dup_prior = false;
};

std::string resolve_dataset(const Options& o, const std::string& name) {
  if (name.empty()) throw Error(ErrorKind::InvalidArgument, "no dataset given");
  if (fs::exists(name)) return name;
  std::string dir = o.data_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("DAP_DATA_DIR")) dir = env;
  }
  if (!dir.empty()) {
    for (const auto& candidate : {fs::path(dir) / name, fs::path(dir) / (name + ".jsonl")}) {
      if (fs::exists(candidate)) return candidate.string();
    }
  }
  throw Error(ErrorKind::Io, "dataset '" + name + "' not found (checked the path and the data directory)");
}

std::vector<ProofInstance> load_dataset(const Options& o, const std::string& name, GoldMode mode) {
  const std::string path = resolve_dataset(o, name);
  if (o.format == "eb") return load_entailment_bank(path);
  if (o.format != "native") throw Error(ErrorKind::InvalidArgument, "unknown format '" + o.format + "'");
  return load_instances(path, o.lenient ? GoldMode::Lenient : mode);
}

RemoteConfig remote(const Options& o, const std::string& url, const char* flag) {
  if (url.empty()) throw Error(ErrorKind::InvalidArgument, std::string("remote backend needs ") + flag);
  RemoteConfig c;
  c.url = url;
  c.timeout_seconds = o.remote_timeout;
  c.retries = o.remote_retries;
  return c;
}

std::vector<std::string> all_texts(std::span<const ProofInstance> instances) {
  std::vector<std::string> texts;
  for (const auto& inst : instances) {
    for (const auto& p : inst.premises) texts.push_back(p.text);
    texts.push_back(inst.goal.text);
    if (inst.gold_tree) {
      for (const auto& s : inst.gold_tree->steps) texts.push_back(s.conclusion.text);
    }
  }
  return texts;
}

EncoderPtr make_encoder(const Options& o, std::span<const std::string> lexicon_texts) {
  EncoderPtr base;
  if (o.encoder == "synthetic") {
    base = SyntheticAdditiveEncoder::from_texts(lexicon_texts);
  } else if (o.encoder == "file") {
    if (o.embeddings.empty()) throw Error(ErrorKind::InvalidArgument, "--encoder file needs --embeddings");
    base = FileLookupEncoder::from_file(o.embeddings, o.passthrough ? FileLookupEncoder::Mode::Passthrough
                                                                    : FileLookupEncoder::Mode::Strict);
  } else if (o.encoder == "remote") {
    base = std::make_shared<RemoteEncoder>(remote(o, o.encoder_url, "--encoder-url"));
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown encoder '" + o.encoder + "'");
  }
  if (!o.head.empty()) base = std::make_shared<ProjectedEncoder>(base, load_head(o.head));
  return std::make_shared<CachingEncoder>(base);
}

std::shared_ptr<const Heuristic> make_heuristic(const Options& o, const EncoderPtr& encoder) {
  if (o.heuristic == "additive") return std::make_shared<AdditiveHeuristic>(encoder);
  if (o.heuristic == "bm25") return std::make_shared<Bm25Heuristic>();
  if (o.heuristic == "external") {
    std::shared_ptr<const PairScorer> scorer;
    if (!o.scorer_table.empty())
      scorer = MockPairScorer::from_file(o.scorer_table, !o.both_orders, std::nullopt);
    else
      scorer = std::make_shared<RemotePairScorer>(remote(o, o.scorer_url, "--scorer-url or --scorer-table"));
    return std::make_shared<ExternalPairHeuristic>(scorer, o.both_orders);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown heuristic '" + o.heuristic + "'");
}

SearchConfig search_config(const Options& o) {
  SearchConfig c = o.search;
  c.seed = o.seed;
  c.validators.consanguinity = !o.no_consanguinity;
  c.validators.agreement = !o.no_agreement;
  c.validators.duplicate_input = !o.no_dup_input;
  c.validators.duplicate_prior = !o.no_dup_prior;
  c.check();
  return c;
}

ComponentFactory make_factory(const Options& o, const std::vector<ProofInstance>& instances) {
  // Non-additive heuristics still get deduction agreement when an encoder is configured.
  EncoderPtr encoder;
  if (o.heuristic == "additive" || o.encoder != "synthetic") encoder = make_encoder(o, all_texts(instances));
  std::shared_ptr<const Heuristic> shared_heuristic;
  if (o.heuristic != "oracle") shared_heuristic = make_heuristic(o, encoder);
  std::shared_ptr<const StepModel> shared_step;
  if (o.step_model == "remote")
    shared_step = std::make_shared<RemoteStepModel>(remote(o, o.stepmodel_url, "--stepmodel-url"));
  else if (o.step_model != "oracle")
    throw Error(ErrorKind::InvalidArgument, "unknown step model '" + o.step_model + "'");
  std::shared_ptr<const EntailmentScorer> shared_entail;
  if (o.entailment == "remote")
    shared_entail = std::make_shared<RemoteEntailment>(remote(o, o.entail_url, "--entail-url"));
  else if (o.entailment != "oracle")
    throw Error(ErrorKind::InvalidArgument, "unknown entailment model '" + o.entailment + "'");

  return [=](const ProofInstance& inst) {
    SearchComponents c;
    c.heuristic = shared_heuristic ? shared_heuristic : OracleHeuristic::from_gold(inst);
    c.step_model = shared_step ? shared_step : OracleStepModel::from_gold(inst);
    c.entailment = shared_entail ? shared_entail : std::make_shared<OracleEntailment>();
    if (o.heuristic != "additive") c.agreement_encoder = encoder;
    return c;
  };
}

std::ofstream create(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return os;
}

struct Run {
  const Options& o;
  CLI::App& app;
  std::string command;
  RunManifest manifest;

  fs::path dir() const { return fs::path(o.out); }
  fs::path output(const std::string& name) {
    manifest.outputs[name] = (dir() / name).string();
    return dir() / name;
  }
  void dataset(const std::string& role, const std::string& name) { manifest.datasets[role] = resolve_dataset(o, name); }
  void finish() {
    manifest.command = command;
    manifest.seed = o.seed;
    manifest.config = app.config_to_str(true, false);
    write_manifest(dir(), manifest);
  }
};

int cmd_embed(Run& run) {
  const Options& o = run.o;
  std::vector<std::string> texts;
  if (!o.texts.empty()) {
    std::ifstream is(o.texts);
    if (!is) throw Error(ErrorKind::Io, "cannot read " + o.texts);
    run.manifest.datasets["texts"] = o.texts;
    for (std::string line; std::getline(is, line);) {
      if (!normalize_text(line).empty()) texts.push_back(line);
    }
  } else {
    run.dataset("instances", o.dataset);
    const auto instances = load_dataset(o, o.dataset, GoldMode::Lenient);
    std::set<std::string> seen;
    for (auto& t : all_texts(instances)) {
      if (seen.insert(normalize_text(t)).second) texts.push_back(std::move(t));
    }
  }
  const EncoderPtr encoder = make_encoder(o, texts);
  const auto vectors = encoder->encode_batch(texts);
  auto os = create(run.output("embeddings.jsonl"));
  write_embedding_records(os, texts, vectors);
  std::cout << "encoded " << texts.size() << " texts (dim " << encoder->dim() << ")\n";
  return 0;
}

int cmd_index(Run& run) {
  const Options& o = run.o;
  run.dataset("corpus", o.corpus);
  const auto corpus = load_corpus(resolve_dataset(o, o.corpus));
  const Bm25Index index = index_corpus(corpus);
  fs::create_directories(run.dir());
  index.save(run.output("corpus.bm25").string());
  std::cout << "indexed " << index.size() << " facts, " << index.vocabulary_size() << " terms\n";
  if (!o.dataset.empty()) {
    run.dataset("instances", o.dataset);
    auto instances = load_dataset(o, o.dataset, GoldMode::Lenient);
    for (auto& inst : instances) {
      std::vector<Statement> facts;
      for (const auto& p : inst.premises) {
        if (p.origin == Origin::InstanceFact) facts.push_back(p);
      }
      auto reduced = t3_to_t2(inst.goal.text, index, corpus, o.k, facts);
      // Gold references must survive the reduction; keep cited premises.
      if (inst.gold_tree) {
        std::set<std::string> have;
        for (const auto& p : reduced) have.insert(p.id);
        for (const auto& s : inst.gold_tree->steps) {
          for (const auto* id : {&s.left_id, &s.right_id}) {
            if (auto idx = inst.premise_index(*id); idx && have.insert(*id).second) reduced.push_back(inst.premises[*idx]);
          }
        }
      }
      inst.premises = std::move(reduced);
    }
    auto os = create(run.output("t2.jsonl"));
    write_instances(os, instances);
  }
  return 0;
}

int cmd_prove(Run& run) {
  const Options& o = run.o;
  run.dataset("instances", o.dataset);
  auto instances = load_dataset(o, o.dataset, GoldMode::Lenient);
  if (!o.instance.empty()) {
    std::erase_if(instances, [&](const ProofInstance& i) { return i.id != o.instance; });
    if (instances.empty()) throw Error(ErrorKind::InvalidArgument, "no instance with id '" + o.instance + "'");
  }
  const auto factory = make_factory(o, instances);
  const SearchConfig config = search_config(o);
  std::size_t proved = 0;
  for (const auto& inst : instances) {
    const SearchComponents c = factory(inst);
    const SearchResult r = run_search(inst, *c.heuristic, *c.step_model, *c.entailment, config, c.agreement_encoder.get());
    auto os = create(run.output("traces/" + inst.id + ".jsonl"));
    write_trace(os, r, inst.premises);
    proved += r.proved;
    std::cout << inst.id << ": " << to_string(r.termination) << " after " << r.steps_taken.size() << " steps\n";
  }
  std::cout << proved << "/" << instances.size() << " proved\n";
  return 0;
}

MrrOptions mrr_options(const Options& o) { return {o.exhaustive_limit, o.sample_size, o.seed}; }

int cmd_eval_dist(Run& run) {
  const Options& o = run.o;
  run.dataset("instances", o.dataset);
  const auto instances = load_dataset(o, o.dataset, GoldMode::Strict);
  const auto texts = all_texts(instances);
  const EncoderPtr encoder = make_encoder(o, texts);
  std::shared_ptr<const StepModel> step;
  if (o.dist_step_model == "remote") step = std::make_shared<RemoteStepModel>(remote(o, o.stepmodel_url, "--stepmodel-url"));
  const DistributionReport report = distribution_report(instances, *encoder, step.get(), mrr_options(o));
  auto csv = create(run.output("distribution.csv"));
  write_distribution_csv(csv, report);
  auto json = create(run.output("distribution.json"));
  write_distribution_json(json, report);
  auto hist = create(run.output("histogram.json"));
  write_histogram_json(hist, report);
  write_distribution_csv(std::cout, report);
  return 0;
}

int cmd_eval_mrr(Run& run) {
  const Options& o = run.o;
  run.dataset("instances", o.dataset);
  const auto instances = load_dataset(o, o.dataset, GoldMode::Strict);
  EncoderPtr encoder;
  if (o.heuristic == "additive") encoder = make_encoder(o, all_texts(instances));
  const auto heuristic = make_heuristic(o, encoder);
  const MrrReport report = mrr(instances, *heuristic, parse_conditioning(o.condition), mrr_options(o));
  auto csv = create(run.output("mrr.csv"));
  write_mrr_csv(csv, report);
  auto json = create(run.output("mrr.json"));
  write_mrr_json(json, report, mrr_options(o));
  std::printf("MRR %.4f over %zu gold steps (%s-conditioned, %s)\n", report.mrr, report.examples.size(),
              std::string(to_string(report.conditioning)).c_str(), report.heuristic.c_str());
  return 0;
}

int cmd_eval_extrinsic(Run& run) {
  const Options& o = run.o;
  run.dataset("instances", o.dataset);
  const auto instances = load_dataset(o, o.dataset, GoldMode::Lenient);
  const ExtrinsicReport report = extrinsic(instances, make_factory(o, instances), search_config(o), o.jobs);
  auto csv = create(run.output("extrinsic.csv"));
  write_extrinsic_csv(csv, report);
  auto json = create(run.output("extrinsic.json"));
  write_extrinsic_json(json, report);
  std::printf("solved %.4f (%zu/%zu), mean steps %.3f, %zu failed\n", report.solved_fraction, report.solved,
              report.instances.size(), report.mean_steps, report.failed);
  return 0;
}

int cmd_eval_ssrc(Run& run) {
  const Options& o = run.o;
  run.dataset("ssrc", o.dataset);
  const auto examples = load_ssrc(resolve_dataset(o, o.dataset));
  EncoderPtr encoder;
  if (o.heuristic == "additive") {
    std::vector<std::string> texts;
    for (const auto& ex : examples) {
      texts.insert(texts.end(), ex.premises.begin(), ex.premises.end());
      texts.push_back(ex.conclusion);
      for (const auto& v : ex.variants) texts.insert(texts.end(), v.begin(), v.end());
    }
    encoder = make_encoder(o, texts);
  }
  const auto heuristic = make_heuristic(o, encoder);
  const SsrcReport report = ssrc_breakdown(examples, *heuristic);
  auto csv = create(run.output("ssrc.csv"));
  write_ssrc_csv(csv, report);
  auto json = create(run.output("ssrc.json"));
  write_ssrc_json(json, report);
  std::printf("overall SSRC MRR %.4f over %zu examples\n", report.overall, report.rows.size());
  return 0;
}

int cmd_train(Run& run) {
  const Options& o = run.o;
  run.dataset("train", o.dataset);
  run.dataset("dev", o.dev);
  const auto train_set = load_dataset(o, o.dataset, GoldMode::Strict);
  const auto dev_set = load_dataset(o, o.dev, GoldMode::Strict);
  auto texts = all_texts(train_set);
  const auto dev_texts = all_texts(dev_set);
  texts.insert(texts.end(), dev_texts.begin(), dev_texts.end());
  Options base_opts = o;
  base_opts.head.clear();  // the head being trained is never part of the frozen base
  const EncoderPtr base = make_encoder(base_opts, texts);
  const auto groups = extract_triplets(train_set, *base, true);
  TrainConfig cfg = o.train;
  cfg.seed = o.seed;
  std::optional<ProjectionHead> init;
  if (!o.head.empty()) init = load_head(o.head);
  const TrainResult result = train(groups, dev_set, base, cfg, init);
  save_head(run.output("head.txt").string(), result.head);
  auto hist = create(run.output("history.csv"));
  write_history_csv(hist, result.history);
  write_history_csv(std::cout, result.history);
  std::cout << "best epoch " << result.best_epoch << "\n";
  return 0;
}

int cmd_plot(Run& run) {
  const Options& o = run.o;
  run.manifest.datasets["report"] = o.input;
  const std::string svg = plot::render_file(o.input, o.title);
  auto os = create(run.output(fs::path(o.input).stem().string() + ".svg"));
  os << svg;
  return 0;
}

int cmd_selftest(Run& run) {
  bool ok = true;
  for (const auto& r : synthetic::run_property_suite(run.o.seed)) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok &= r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Embedding-space planning for natural language proof search"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags win");
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();
  app.add_option("--jobs", o.jobs, "Maximum worker threads (0 = all cores)");
  app.add_option("--seed", o.seed, "Top-level seed");
  app.add_option("--out", o.out, "Run directory");
  app.add_option("--data-dir", o.data_dir, "Directory searched for named datasets (also DAP_DATA_DIR)");
  app.add_option("--encoder-url", o.encoder_url, "Remote encoder endpoint");
  app.add_option("--stepmodel-url", o.stepmodel_url, "Remote step model endpoint");
  app.add_option("--entail-url", o.entail_url, "Remote entailment endpoint");
  app.add_option("--scorer-url", o.scorer_url, "Remote pair scorer endpoint");
  app.add_option("--remote-timeout", o.remote_timeout, "Seconds per remote request");
  app.add_option("--remote-retries", o.remote_retries, "Retries per remote request");

  auto add_data = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--dataset", o.dataset, "Dataset path or name");
    if (required) opt->required();
    sub->add_option("--format", o.format, "Instance file layout")->check(CLI::IsMember({"native", "eb"}));
    sub->add_flag("--lenient", o.lenient, "Drop broken gold trees instead of failing");
  };
  auto add_encoder = [&](CLI::App* sub) {
    sub->add_option("--encoder", o.encoder, "Encoder backend")->check(CLI::IsMember({"synthetic", "file", "remote"}));
    sub->add_option("--embeddings", o.embeddings, "Embedding file for --encoder file");
    sub->add_flag("--passthrough", o.passthrough, "Hash unknown texts instead of failing");
    sub->add_option("--head", o.head, "Projection head checkpoint applied on top of the encoder");
  };
  auto add_heuristic = [&](CLI::App* sub, bool allow_oracle) {
    std::vector<std::string> names{"additive", "bm25", "external"};
    if (allow_oracle) names.push_back("oracle");
    sub->add_option("--heuristic", o.heuristic, "Pair heuristic")->check(CLI::IsMember(names));
    sub->add_option("--scorer-table", o.scorer_table, "Logit table for the external heuristic");
    sub->add_flag("--both-orders", o.both_orders, "External scorer: max over both premise orders");
  };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--step-model", o.step_model, "Step model backend")->check(CLI::IsMember({"oracle", "remote"}));
    sub->add_option("--entailment", o.entailment, "Entailment backend")->check(CLI::IsMember({"oracle", "remote"}));
    sub->add_option("--max-steps", o.search.max_steps, "Counted expansions before giving up");
    sub->add_option("--samples", o.search.k_samples, "Generations per expansion");
    sub->add_option("--t-g", o.search.t_g, "Entailment threshold for the goal");
    sub->add_option("--t-da", o.search.t_da, "Deduction agreement threshold");
    sub->add_option("--agreement-min-count", o.search.agreement_min_count, "Branch size before agreement can prune");
    sub->add_flag("--no-consanguinity", o.no_consanguinity, "Disable the consanguinity validator");
    sub->add_flag("--no-agreement", o.no_agreement, "Disable deduction agreement");
    sub->add_flag("--no-duplicate-input", o.no_dup_input, "Keep generations equal to an input");
    sub->add_flag("--no-duplicate-prior", o.no_dup_prior, "Keep repeated generations");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--exhaustive-limit", o.exhaustive_limit, "Largest pool whose pairs are enumerated");
    sub->add_option("--sample-size", o.sample_size, "Random pairs sampled above the limit");
  };

  std::vector<std::pair<CLI::App*, int (*)(Run&)>> commands;
  auto sub = [&](const char* name, const char* help, int (*fn)(Run&)) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    commands.emplace_back(s, fn);
    return s;
  };

  auto* embed = sub("embed", "Encode texts and write an embedding file", cmd_embed);
  add_data(embed, false);
  add_encoder(embed);
  embed->add_option("--texts", o.texts, "One text per line (instead of --dataset)");

  auto* index = sub("index", "Build a BM25 corpus index; with --dataset also reduce instances to top-k facts", cmd_index);
  index->add_option("--corpus", o.corpus, "Fact corpus")->required();
  add_data(index, false);
  index->add_option("--k", o.k, "Facts kept per goal");

  auto* prove = sub("prove", "Run proof search and write one trace per instance", cmd_prove);
  add_data(prove, true);
  add_encoder(prove);
  add_heuristic(prove, true);
  add_search(prove);
  prove->add_option("--instance", o.instance, "Only this instance id");

  auto* dist = sub("eval-dist", "Cosine distributions of random, partial and gold pairs", cmd_eval_dist);
  add_data(dist, true);
  add_encoder(dist);
  add_sampling(dist);
  dist->add_option("--step-model", o.dist_step_model, "Add the model settings using a remote step model")
      ->check(CLI::IsMember({"none", "remote"}));

  auto* emrr = sub("eval-mrr", "Gold-pair mean reciprocal rank", cmd_eval_mrr);
  add_data(emrr, true);
  add_encoder(emrr);
  add_heuristic(emrr, false);
  add_sampling(emrr);
  emrr->add_option("--condition", o.condition, "Rank against the deduction or the goal")
      ->check(CLI::IsMember({"deduction", "goal"}));

  auto* ext = sub("eval-extrinsic", "Solved rate and mean steps over proof searches", cmd_eval_extrinsic);
  add_data(ext, true);
  add_encoder(ext);
  add_heuristic(ext, true);
  add_search(ext);

  auto* ssrc = sub("eval-ssrc", "Per-category and per-perturbation MRR on contrast examples", cmd_eval_ssrc);
  ssrc->add_option("--dataset", o.dataset, "SSRC file or name")->required();
  add_encoder(ssrc);
  add_heuristic(ssrc, false);

  auto* tr = sub("train", "Train the projection head with InfoNCE", cmd_train);
  add_data(tr, true);
  add_encoder(tr);
  tr->add_option("--dev", o.dev, "Dev dataset for early stopping")->required();
  tr->add_option("--tau", o.train.tau, "Temperature");
  tr->add_option("--lr", o.train.learning_rate, "Learning rate");
  tr->add_option("--trees-per-batch", o.train.trees_per_batch, "Gold trees per batch");
  tr->add_option("--epochs", o.train.max_epochs, "Maximum epochs");
  tr->add_option("--patience", o.train.patience, "Epochs without dev improvement before stopping");
  tr->add_option("--gate-init", o.train.gate_init_scale, "Uniform range of the initial gate parameters");

  auto* pl = sub("plot", "Render a report file as SVG", cmd_plot);
  pl->add_option("--input", o.input, "histogram.json, history.csv or ssrc.json")->required()->check(CLI::ExistingFile);
  pl->add_option("--title", o.title, "Figure title");

  sub("selftest", "Run the synthetic-oracle property suite", cmd_selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (o.jobs > 0) omp_set_num_threads(static_cast<int>(o.jobs));
  for (auto& [s, fn] : commands) {
    if (!s->parsed()) continue;
    Run run{o, app, s->get_name(), {}};
    try {
      const int rc = fn(run);
      run.finish();
      return rc;
    } catch (const std::exception& e) {
      std::cerr << "dap " << s->get_name() << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
