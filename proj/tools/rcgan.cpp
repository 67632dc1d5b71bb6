// rcgan: schema inference, workload generation, training, sampling,
// evaluation and question answering from the command line.
//
// Exit status: 0 success, 2 usage/parse errors and missing inputs, 1 other
// runtime failures.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcgan/data.hpp"
#include "rcgan/evaluate.hpp"
#include "rcgan/model.hpp"
#include "rcgan/pipeline.hpp"
#include "rcgan/workload.hpp"

namespace fs = std::filesystem;
using namespace rcgan;

namespace {

struct Options {
  std::string data, schema, workload, checkpoint, generated, output, text, query, target = "income";
  std::string out_dir;
  std::vector<std::string> hints, workloads;
  std::uint64_t seed = 0;
  std::size_t n = 0, subsample = 0;
  bool structured = false, no_oracle = false;
  TrainConfig train;
  WorkloadParams params;
  double eps = kDefaultQErrorEps;
  FidelitySplit split;
};

std::string out_path(const Options& o, const std::string& default_name) {
  if (!o.output.empty()) return o.output;
  if (!o.out_dir.empty()) fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir.empty() ? "." : o.out_dir) / default_name).string();
}

// Side file carrying the seed and config digest for outputs whose own format
// (CSV) has no room for them.
void write_meta(const std::string& path, std::uint64_t seed, std::uint64_t digest, const std::string& source = {}) {
  text::KvWriter w;
  w.put("seed", seed);
  w.put("config_digest", text::hex64(digest));
  if (!source.empty()) w.put("source", source);
  text::write_file(path + ".meta", w.str());
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(Errc::usage, std::string("missing required option ") + flag);
}

Schema schema_of(const Options& o) {
  require(o.schema, "--schema");
  return load_schema(o.schema);
}

Table data_of(const Options& o, const Schema& schema) {
  require(o.data, "--data");
  return load_table(o.data, schema);
}

void cmd_schema_infer(const Options& o) {
  require(o.data, "--data");
  const std::set<std::string> hints(o.hints.begin(), o.hints.end());
  const Schema schema = infer_schema(text::parse_csv(text::read_file(o.data)), hints);
  const auto path = out_path(o, "schema.txt");
  text::write_file(path, schema.serialize());
  std::cout << "schema: " << schema.size() << " columns (" << schema.count(ColumnKind::numeric) << " numeric, "
            << schema.count(ColumnKind::categorical) << " categorical), encoded width " << schema.encoded_width()
            << " -> " << path << "\n";
}

void cmd_schema_show(const Options& o) {
  const Schema schema = schema_of(o);
  for (const auto& c : schema.columns()) {
    std::cout << c.name << "  ";
    if (c.is_numeric()) {
      std::cout << "numeric [" << text::format_double(c.domain_min) << ", " << text::format_double(c.domain_max)
                << "]\n";
    } else {
      std::cout << "categorical (" << c.categories.size() << " labels)\n";
    }
  }
  std::cout << "digest " << text::hex64(schema.digest()) << "\n";
}

void cmd_workload_gen(const Options& o) {
  const Schema schema = schema_of(o);
  if (o.n == 0) throw Error(Errc::usage, "--n must be at least 1");
  const Workload w = generate_workload(schema, o.n, o.seed, o.params);
  const auto path = out_path(o, "workload.txt");
  text::write_file(path, workload_to_text(w, schema));
  std::cout << "workload: " << w.size() << " queries, seed " << o.seed << " -> " << path << "\n";
}

int cmd_train(const Options& o) {
  const Schema schema = schema_of(o);
  Table table = data_of(o, schema);
  require(o.workload, "--workload");
  const Workload w = load_workload(o.workload, schema);
  TrainConfig cfg = o.train;
  cfg.seed = o.seed;
  cfg.validate();
  if (o.subsample) table = subsample(table, o.subsample, derive_seed(o.seed, 4));

  const auto ck_path = out_path(o, "checkpoint.txt");
  const auto log_path = ck_path + ".history";
  std::string log = "# seed=" + std::to_string(cfg.seed) + "\n# config_digest=" + text::hex64(config_digest(cfg)) +
                    "\n# rows=" + std::to_string(table.rows()) + "\n";
  text::write_file(log_path, log);
  const auto result = train(table, w, cfg, [&](const EpochRecord& e) {
    log += epoch_record_line(e) + "\n";
    text::write_file(log_path, log);
    std::cerr << epoch_record_line(e) << "\n";
  });
  if (result.failure) {
    log += "# aborted: " + *result.failure + "\n";
    text::write_file(log_path, log);
    std::cerr << "rcgan: training aborted after " << result.history.epochs.size() << " epochs: " << *result.failure
              << "\n";
    return 1;
  }
  save_checkpoint(result.generator, result.discriminator, cfg, ck_path);
  std::cout << "checkpoint -> " << ck_path << "\nhistory -> " << log_path << "\n";
  return 0;
}

void cmd_sample(const Options& o) {
  require(o.checkpoint, "--checkpoint");
  const auto ck = load_checkpoint(o.checkpoint);
  if (o.n == 0) throw Error(Errc::usage, "--n must be at least 1");
  const Table t = sample(ck.generator, o.n, o.seed);
  const auto path = out_path(o, "generated.csv");
  text::write_file(path, table_to_csv(t));
  write_meta(path, o.seed, config_digest(ck.config), o.checkpoint);
  std::cout << "generated " << t.rows() << " rows -> " << path << "\n";
}

void cmd_eval_qerror(const Options& o) {
  const Schema schema = schema_of(o);
  const Table real = data_of(o, schema);
  require(o.generated, "--generated");
  const Table gen = load_table(o.generated, schema);
  if (o.workloads.empty()) throw Error(Errc::usage, "missing required option --workload");

  std::vector<QErrorReport> reports;
  std::string txt = "seed=" + std::to_string(o.seed) + "\n";
  for (const auto& wp : o.workloads) {
    const Workload w = load_workload(wp, schema);
    reports.push_back(qerror_report(real, gen, w, o.eps, fs::path(wp).filename().string()));
    txt += qerror_report_text(reports.back());
    // Same workload against a single training-size batch from the checkpoint.
    if (!o.checkpoint.empty()) {
      const auto ck = load_checkpoint(o.checkpoint);
      const Table batch = sample(ck.generator, ck.config.batch_size, o.seed);
      reports.push_back(qerror_report(real, batch, w, o.eps, fs::path(wp).filename().string() + "@batch"));
      txt += qerror_report_text(reports.back());
    }
  }
  const auto path = out_path(o, "qerror.txt");
  const std::uint64_t digest = text::fnv1a("eps=" + text::format_double(o.eps));
  text::write_file(path, txt + "config_digest=" + text::hex64(digest) + "\n");
  const auto csv = fs::path(path).replace_extension(".csv").string();
  text::write_file(csv, qerror_report_csv(reports));
  write_meta(csv, o.seed, digest);
  std::cout << txt;
}

void cmd_eval_classify(const Options& o) {
  const Schema schema = schema_of(o);
  const Table real = data_of(o, schema);
  require(o.generated, "--generated");
  const Table gen = load_table(o.generated, schema);
  const auto rep = fidelity_experiment(real, gen, o.target, {}, o.split, o.seed);
  const std::uint64_t digest =
      text::fnv1a(o.target + " " + std::to_string(o.split.test_records) + " " +
                  text::format_double(o.split.real_fraction_a) + " " + text::format_double(o.split.real_fraction_b) +
                  " " + text::format_double(o.split.generated_fraction_b));
  const std::string txt = "seed=" + std::to_string(o.seed) + "\n" + fidelity_report_text(rep) +
                          "config_digest=" + text::hex64(digest) + "\n";
  const auto path = out_path(o, "fidelity.txt");
  text::write_file(path, txt);
  const auto csv = fs::path(path).replace_extension(".csv").string();
  text::write_file(csv, fidelity_report_csv(rep));
  write_meta(csv, o.seed, digest);
  std::cout << txt;
}

void cmd_ask(const Options& o) {
  require(o.text, "question text");
  const Schema schema = schema_of(o);
  const Table real = data_of(o, schema);
  pipeline::Registry reg;
  if (!o.no_oracle) reg["oracle"] = std::make_shared<pipeline::OracleResultGenerator>(real);
  if (!o.checkpoint.empty()) {
    const auto ck = load_checkpoint(o.checkpoint);
    if (!(ck.generator.schema == schema)) throw Error(Errc::structural, "checkpoint schema differs from --schema");
    reg["model"] = std::make_shared<pipeline::ModelResultGenerator>(sample(ck.generator, real.rows(), o.seed),
                                                                     real.rows());
  }
  const pipeline::Pipeline p(schema, real.rows(), std::move(reg));
  const auto ans = p.ask({o.text});
  if (o.structured) {
    std::cout << "seed=" << o.seed << "\n" << pipeline::answer_record(ans, schema);
  } else {
    std::cout << ans.text << "\n";
  }
}

void cmd_oracle_count(const Options& o) {
  const Schema schema = schema_of(o);
  const Table real = data_of(o, schema);
  require(o.query, "--query");
  const auto fields = text::split_csv_line(o.query);
  if (fields.empty() || fields.size() % 3 != 0) {
    throw Error(Errc::parse, "--query expects column,lo,hi triples");
  }
  RangeQuery q;
  for (std::size_t i = 0; i < fields.size(); i += 3) {
    const auto col = schema.find(fields[i]);
    if (!col) throw Error(Errc::query, "unknown column '" + fields[i] + "'");
    const auto lo = text::parse_double(fields[i + 1]);
    const auto hi = text::parse_double(fields[i + 2]);
    if (!lo || !hi) throw Error(Errc::parse, "bad bound in --query");
    q.predicates.push_back({*col, *lo, *hi});
  }
  std::sort(q.predicates.begin(), q.predicates.end(),
            [](const Predicate& a, const Predicate& b) { return a.column < b.column; });
  validate_query(q, schema);
  std::cout << exact_count(q, real) << "\n";
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::usage:
    case Errc::parse:
    case Errc::semantic:
    case Errc::io:
    case Errc::query:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("RCGAN_OUT_DIR")) o.out_dir = env;

  CLI::App app{"rcgan: query-aware tabular GAN toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // inherited: leaf commands accept the global flags
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--out", o.out_dir, "Output directory (default $RCGAN_OUT_DIR or .)");
  app.add_option("-o,--output", o.output, "Explicit output file");

  const auto data = [&](CLI::App* c) { c->add_option("--data", o.data, "CSV data file"); };
  const auto schema = [&](CLI::App* c) { c->add_option("--schema", o.schema, "Schema file"); };

  auto* sch = app.add_subcommand("schema", "Infer or show a schema");
  sch->require_subcommand(1);
  auto* sch_infer = sch->add_subcommand("infer", "Infer a schema from a CSV file");
  sch_infer->add_option("csv", o.data, "CSV data file (or --data)");
  data(sch_infer);
  sch_infer->add_option("--numeric", o.hints, "Columns forced numeric");
  auto* sch_show = sch->add_subcommand("show", "Print a schema");
  schema(sch_show);

  auto* wl = app.add_subcommand("workload", "Range-query workloads");
  wl->require_subcommand(1);
  auto* wl_gen = wl->add_subcommand("gen", "Generate a seeded workload");
  schema(wl_gen);
  wl_gen->add_option("--n", o.n, "Number of queries")->required();
  wl_gen->add_option("--min-attrs", o.params.min_attrs);
  wl_gen->add_option("--max-attrs", o.params.max_attrs, "0: all numeric columns");
  wl_gen->add_option("--min-half-width", o.params.min_half_width);
  wl_gen->add_option("--max-half-width", o.params.max_half_width);

  auto* tr = app.add_subcommand("train", "Train a generator; writes a checkpoint and history log");
  data(tr);
  schema(tr);
  tr->add_option("--workload", o.workload, "Training workload");
  tr->add_option("--epochs", o.train.epochs);
  tr->add_option("--batch", o.train.batch_size);
  tr->add_option("--tau", o.train.tau);
  tr->add_option("--tau-final", o.train.tau_final);
  tr->add_option("--lambda-q", o.train.lambda_q);
  tr->add_option("--queries-per-step", o.train.queries_per_step);
  tr->add_option("--train-eps", o.train.eps);
  tr->add_option("--instance-noise", o.train.instance_noise);
  tr->add_option("--real-smoothing", o.train.real_smoothing);
  tr->add_flag("--hard-max", o.train.hard_max);
  tr->add_option("--subsample", o.subsample, "Train on a uniform sample of this many rows");

  auto* sm = app.add_subcommand("sample", "Sample a generated table from a checkpoint");
  sm->add_option("--checkpoint", o.checkpoint);
  sm->add_option("--n", o.n, "Rows to generate")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a generated table");
  ev->require_subcommand(1);
  auto* ev_q = ev->add_subcommand("qerror", "Q-Error percentiles per workload");
  data(ev_q);
  schema(ev_q);
  ev_q->add_option("--generated", o.generated);
  ev_q->add_option("--workload", o.workloads, "Workload file (repeatable)");
  ev_q->add_option("--checkpoint", o.checkpoint, "Also report against one training-size batch");
  ev_q->add_option("--eps", o.eps);
  auto* ev_c = ev->add_subcommand("classify", "Mixed real/generated classifier fidelity");
  data(ev_c);
  schema(ev_c);
  ev_c->add_option("--generated", o.generated);
  ev_c->add_option("--target", o.target);
  ev_c->add_option("--test-records", o.split.test_records);

  auto* ask = app.add_subcommand("ask", "Answer a range-count question");
  ask->add_option("question", o.text)->required();
  data(ask);
  schema(ask);
  ask->add_option("--checkpoint", o.checkpoint, "Add the model-backed generator");
  ask->add_flag("--no-oracle", o.no_oracle, "Drop the oracle-backed generator");
  ask->add_flag("--structured", o.structured, "Print key=value output");

  auto* orc = app.add_subcommand("oracle", "Exact answers over the real table");
  orc->require_subcommand(1);
  auto* orc_count = orc->add_subcommand("count", "Exact count of a range query");
  data(orc_count);
  schema(orc_count);
  orc_count->add_option("--query", o.query, "column,lo,hi[,column,lo,hi...]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sch_infer) cmd_schema_infer(o);
    else if (*sch_show) cmd_schema_show(o);
    else if (*wl_gen) cmd_workload_gen(o);
    else if (*tr) return cmd_train(o);
    else if (*sm) cmd_sample(o);
    else if (*ev_q) cmd_eval_qerror(o);
    else if (*ev_c) cmd_eval_classify(o);
    else if (*ask) cmd_ask(o);
    else if (*orc_count) cmd_oracle_count(o);
  } catch (const Error& e) {
    std::cerr << "rcgan: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "rcgan: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
