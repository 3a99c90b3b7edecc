// ovdet command-line interface: data generation, dictionary building,
// pseudo labeling, training and evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/concepts/enrich.hpp"
#include "ovdet/concepts/http_provider.hpp"
#include "ovdet/concepts/noun_phrases.hpp"
#include "ovdet/data/synthetic.hpp"
#include "ovdet/pseudo/http_scorer.hpp"
#include "ovdet/pseudo/labeler.hpp"
#include "ovdet/train/eval.hpp"
#include "ovdet/train/plot.hpp"
#include "ovdet/train/trainer.hpp"

namespace {

using namespace ovdet;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, size_t dim) {
  if (spec == "stub") return std::make_unique<TrigramHashProvider>(dim);
  if (spec.rfind("file:", 0) == 0) return std::make_unique<FileTableProvider>(spec.substr(5));
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0)
    return std::make_unique<HttpEmbeddingProvider>(spec, dim);
  throw std::runtime_error("unknown provider \"" + spec + "\" (want stub|file:PATH|http:URL)");
}

std::unique_ptr<RegionScorer> make_scorer(const std::string& spec, size_t dim) {
  if (spec == "stub") return std::make_unique<StubScorer>(dim);
  if (spec.rfind("file:", 0) == 0) return TableScorer::from_file(spec.substr(5), dim);
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0)
    return std::make_unique<HttpScorer>(spec, dim);
  throw std::runtime_error("unknown scorer \"" + spec + "\" (want stub|file:PATH|http:URL)");
}

// ---------------------------------------------------------------------------

int cmd_build_dict(const std::vector<std::string>& caption_files,
                   const std::string& detection_file, const std::string& things_file,
                   const std::string& lexicon_file, int64_t min_freq, const std::string& out) {
  std::vector<ConceptSourceInput> sources;
  if (!detection_file.empty())
    sources.push_back({ConceptSource::detection, read_lines(detection_file)});
  if (!things_file.empty()) sources.push_back({ConceptSource::things, read_lines(things_file)});

  ConceptSourceInput captions{ConceptSource::imagetext, {}};
  for (const auto& f : caption_files)
    for (const auto& caption : read_lines(f))
      for (auto& phrase : extract_noun_phrases(caption)) captions.concepts.push_back(phrase);
  if (!captions.concepts.empty()) sources.push_back(std::move(captions));

  Lexicon lexicon;
  if (!lexicon_file.empty()) lexicon = load_lexicon(lexicon_file);

  auto dict = build_dictionary(sources, min_freq, lexicon);
  save_dictionary(dict, out);
  std::cout << "wrote " << dict.size() << " concepts to " << out << "\n";
  return 0;
}

int cmd_gen_data(const std::string& spec_file, const std::string& out_dir, bool emit_proposals) {
  SyntheticSpec spec = spec_file.empty()
                           ? default_synthetic_spec()
                           : SyntheticSpec::from_json(json::parse(read_file(spec_file)));
  auto ds = generate_synthetic_dataset(spec);
  save_synthetic_dataset(ds, out_dir);

  if (emit_proposals) {
    JsonlWriter props((std::filesystem::path(out_dir) / "proposals.jsonl").string());
    int sz = spec.image_size;
    std::vector<int> windows = {sz / 4, sz / 3, sz / 2};
    for (const auto& rec : ds.records) {
      if (rec.kind != RecordKind::imagetext) continue;
      append_proposals(props, rec.image_id, sliding_window_proposals(rec.image, windows));
    }
  }

  // caption corpus (grounding + imagetext captions), ready for build-dict
  {
    std::ofstream captions((std::filesystem::path(out_dir) / "captions.txt").string());
    for (const auto& rec : ds.records)
      if (!rec.caption.empty()) captions << rec.caption << "\n";
  }
  std::cout << "wrote " << ds.records.size() << " records to " << out_dir << "\n";
  if (ds.placement_failures > 0)
    std::cerr << "warning: " << ds.placement_failures << " object placements failed\n";
  return 0;
}

int cmd_pseudo_label(const std::string& records_file, const std::string& proposals_file,
                     const std::string& dict_file, const std::string& scorer_spec,
                     double obj_thresh, double min_area, double score_thresh, bool use_dictionary,
                     const std::string& out, const std::string& records_out, int64_t max_records,
                     const std::string& cache_dir, size_t dim) {
  auto dict = load_dictionary(dict_file);
  auto records = load_records(records_file, RecordKind::imagetext);
  auto proposals = load_proposals(proposals_file);
  auto scorer = make_scorer(scorer_spec, dim);

  ConceptEmbeddings cache;
  if (use_dictionary) cache = precompute_concept_embeddings(dict, *scorer, cache_dir);

  JsonlWriter writer(out);
  std::map<std::string, std::vector<PseudoLabel>> all_labels;
  size_t warnings = 0;
  int64_t emitted = 0;
  for (auto& rec : records) {
    if (max_records > 0 && emitted >= max_records) break;
    auto it = proposals.find(rec.image_id);
    if (it == proposals.end()) continue;
    load_record_image(rec);
    auto filtered = filter_proposals(it->second, obj_thresh, min_area);
    auto labels = label_image(rec.image, filtered, dict, *scorer, score_thresh, use_dictionary,
                              extract_noun_phrases(rec.caption), use_dictionary ? &cache : nullptr,
                              &warnings);
    if (labels.empty()) continue;
    append_pseudo_labels(writer, rec.image_id, labels);
    all_labels[rec.image_id] = std::move(labels);
    ++emitted;
  }
  if (warnings > 0) std::cerr << "warning: " << warnings << " images had no candidate labels\n";

  if (!records_out.empty()) {
    auto det_records = pseudo_labels_to_records(all_labels, records);
    save_records(det_records, records_out);
    std::cout << "wrote " << det_records.size() << " detection records to " << records_out << "\n";
  }
  std::cout << "pseudo-labeled " << emitted << " images -> " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config_file, const json& overrides,
              const std::string& resume_from) {
  json merged = config_file.empty() ? json::object() : json::parse(read_file(config_file));
  for (const auto& [k, v] : overrides.items()) merged[k] = v;
  TrainConfig cfg = TrainConfig::from_json(merged);

  Trainer trainer(cfg);
  auto result = trainer.train(resume_from);
  if (result.diverged) {
    std::cerr << "training diverged (NaN loss); last finite checkpoint kept at "
              << result.checkpoint_path << "\n";
    return 2;
  }
  std::cout << "trained " << result.steps << " steps; checkpoint " << result.checkpoint_path
            << "; metrics " << result.metrics_path << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& records_file,
             const std::string& dict_file, const std::string& concepts_file, bool enrich_flag,
             const std::string& provider_spec, const std::string& out,
             const std::string& plot_path, double score_thresh, double nms_iou) {
  json meta;
  auto model = load_model(checkpoint, &meta);
  auto dict = load_dictionary(dict_file);
  Tokenizer tokenizer(dict, model->config().max_tokens);
  if (tokenizer.table_size() != model->config().vocab_size)
    throw std::runtime_error("dictionary does not match checkpoint vocabulary (" +
                             std::to_string(tokenizer.table_size()) + " vs " +
                             std::to_string(model->config().vocab_size) + ")");

  auto records = load_records(records_file, RecordKind::detection);
  std::vector<std::string> concepts =
      concepts_file.empty() ? dict.names() : read_lines(concepts_file);

  std::set<std::string> seen;
  if (meta.contains("train_concepts"))
    for (const auto& c : meta.at("train_concepts")) seen.insert(normalize_name(c.get<std::string>()));

  auto provider = make_provider(provider_spec, 64);
  EvalOptions opts;
  opts.enrich = enrich_flag;
  opts.score_thresh = score_thresh;
  opts.nms_iou = nms_iou;
  auto report = evaluate(*model, tokenizer, dict, records, concepts, seen, provider.get(), opts);

  write_file(out, report.to_json().dump(2) + "\n");
  if (!plot_path.empty()) save_pr_plot(report, plot_path);
  std::cout << "mean AP@0.5 " << report.mean_ap << " (seen " << report.seen_mean_ap << ", unseen "
            << report.unseen_mean_ap << ") over " << report.num_images << " images -> " << out
            << "\n";
  return 0;
}

int cmd_enrich(const std::string& dict_file, const std::string& name,
               const std::string& provider_spec) {
  auto dict = load_dictionary(dict_file);
  auto provider = make_provider(provider_spec, 64);
  std::cout << enrich(dict, name, provider.get()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale open-vocabulary detection pre-training pipeline"};
  app.require_subcommand(1);

  // build-dict
  auto* bd = app.add_subcommand("build-dict", "Build the concept dictionary");
  std::vector<std::string> bd_captions;
  std::string bd_det, bd_things, bd_lex, bd_out = "dict.jsonl";
  int64_t bd_minfreq = 100;
  bd->add_option("--captions", bd_captions, "Caption text files (one caption per line)");
  bd->add_option("--detection-names", bd_det, "Detection label names, one per line");
  bd->add_option("--things-names", bd_things, "Curated object names, one per line");
  bd->add_option("--lexicon", bd_lex, "Lexicon JSONL {\"name\",\"definition\"}");
  bd->add_option("--min-freq", bd_minfreq, "Minimum caption-phrase frequency")->capture_default_str();
  bd->add_option("--out", bd_out, "Output dictionary JSONL")->capture_default_str();

  // gen-data
  auto* gd = app.add_subcommand("gen-data", "Generate a synthetic shapes dataset");
  std::string gd_spec, gd_out = "data";
  bool gd_props = true;
  gd->add_option("--spec", gd_spec, "Dataset spec JSON (omit for the bundled default)");
  gd->add_option("--out", gd_out, "Output directory")->capture_default_str();
  gd->add_flag("--proposals,!--no-proposals", gd_props,
               "Emit sliding-window proposals for imagetext images");

  // pseudo-label
  auto* pl = app.add_subcommand("pseudo-label", "Pseudo-label imagetext records");
  std::string pl_records, pl_props, pl_dict, pl_scorer = "stub", pl_out = "plabels.jsonl";
  std::string pl_records_out, pl_cache;
  double pl_obj = 0.3, pl_area = 6000, pl_score = 0.24;
  bool pl_use_dict = true;
  int64_t pl_max = 0;
  size_t pl_dim = 64;
  pl->add_option("--records", pl_records, "Imagetext records JSONL")->required();
  pl->add_option("--proposals", pl_props, "Proposals JSONL")->required();
  pl->add_option("--dict", pl_dict, "Concept dictionary JSONL")->required();
  pl->add_option("--scorer", pl_scorer, "stub | file:PATH | http:URL")->capture_default_str();
  pl->add_option("--obj-thresh", pl_obj, "Objectness threshold")->capture_default_str();
  pl->add_option("--min-area", pl_area, "Minimum region area")->capture_default_str();
  pl->add_option("--score-thresh", pl_score, "Classification score threshold")
      ->capture_default_str();
  pl->add_flag("--use-dictionary,!--no-use-dictionary", pl_use_dict,
               "Label completion against the whole dictionary");
  pl->add_option("--out", pl_out, "Pseudo-label JSONL output")->capture_default_str();
  pl->add_option("--records-out", pl_records_out, "Also write detection-kind records");
  pl->add_option("--max-records", pl_max, "Cap on labeled images (0 = no cap)");
  pl->add_option("--cache-dir", pl_cache, "Concept embedding cache directory");
  pl->add_option("--dim", pl_dim, "Scorer embedding dimension")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train the dual-encoder detector");
  std::string tr_config, tr_resume;
  json tr_over = json::object();
  tr->add_option("--config", tr_config, "Train config JSON");
  tr->add_option("--resume", tr_resume, "Checkpoint to resume from");
  // common overrides
  auto add_override = [&](const std::string& flag, const std::string& key) {
    tr->add_option_function<std::string>(
        flag, [&tr_over, key](const std::string& v) { tr_over[key] = json::parse(v, nullptr, false).is_discarded() ? json(v) : json::parse(v); },
        "Override config key " + key);
  };
  add_override("--epochs", "epochs");
  add_override("--batch-size", "batch_size");
  add_override("--seed", "seed");
  add_override("--out-dir", "out_dir");
  add_override("--lr-visual", "lr_visual");
  add_override("--lr-text", "lr_text");
  add_override("--n-concepts", "n_concepts");
  add_override("--dict", "dictionary_path");
  bool tr_no_enrich = false, tr_no_neg = false;
  tr->add_flag("--no-enrich", tr_no_enrich, "Disable concept enrichment");
  tr->add_flag("--no-negative-sampling", tr_no_neg, "Pad with empty entries instead");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_records, ev_dict, ev_concepts, ev_provider = "stub";
  std::string ev_out = "report.json", ev_plot;
  bool ev_enrich = true;
  double ev_score = 0.05, ev_nms = 0.5;
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--records", ev_records, "Detection-kind records JSONL with ground truth")
      ->required();
  ev->add_option("--dict", ev_dict, "Concept dictionary JSONL")->required();
  ev->add_option("--concepts", ev_concepts, "Concept list file (default: all dictionary names)");
  ev->add_flag("--enrich,!--no-enrich", ev_enrich, "Append definitions to concept names");
  ev->add_option("--provider", ev_provider, "Retrieval embedding provider")->capture_default_str();
  ev->add_option("--out", ev_out, "Report JSON output")->capture_default_str();
  ev->add_option("--plot", ev_plot, "Write a precision-recall PNG");
  ev->add_option("--score-thresh", ev_score, "Detection score threshold")->capture_default_str();
  ev->add_option("--nms-iou", ev_nms, "NMS IoU threshold")->capture_default_str();

  // enrich
  auto* en = app.add_subcommand("enrich", "Print the enriched form of a concept");
  std::string en_dict, en_name, en_provider = "stub";
  en->add_option("--dict", en_dict, "Concept dictionary JSONL")->required();
  en->add_option("--name", en_name, "Concept name")->required();
  en->add_option("--provider", en_provider, "stub | file:PATH | http:URL")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (bd->parsed())
      return cmd_build_dict(bd_captions, bd_det, bd_things, bd_lex, bd_minfreq, bd_out);
    if (gd->parsed()) return cmd_gen_data(gd_spec, gd_out, gd_props);
    if (pl->parsed())
      return cmd_pseudo_label(pl_records, pl_props, pl_dict, pl_scorer, pl_obj, pl_area, pl_score,
                              pl_use_dict, pl_out, pl_records_out, pl_max, pl_cache, pl_dim);
    if (tr->parsed()) {
      if (tr_no_enrich) tr_over["enrich"] = false;
      if (tr_no_neg) tr_over["sample_negatives"] = false;
      return cmd_train(tr_config, tr_over, tr_resume);
    }
    if (ev->parsed())
      return cmd_eval(ev_ckpt, ev_records, ev_dict, ev_concepts, ev_enrich, ev_provider, ev_out,
                      ev_plot, ev_score, ev_nms);
    if (en->parsed()) return cmd_enrich(en_dict, en_name, en_provider);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
