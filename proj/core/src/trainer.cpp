#include "acf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "acf/errors.hpp"

namespace acf {

ModelDims dims_of(const ActionVocabulary& vocab) { return {vocab.size(), vocab.app_count()}; }

Eigen::VectorXd encode_context_block(const ActionRecord& record, const ActionVocabulary& vocab) {
  const ContextFeatures f = context_features(record, vocab.app_index_of());
  Eigen::VectorXd c(vocab.app_count() + 3);
  for (std::size_t i = 0; i < f.app_onehot.size(); ++i) c(static_cast<Eigen::Index>(i)) = f.app_onehot[i];
  c(vocab.app_count()) = f.rel_x;
  c(vocab.app_count() + 1) = f.rel_y;
  c(vocab.app_count() + 2) = f.elapsed_bucket;
  return c;
}

StepInput encode_step(const ActionRecord& record, const ActionVocabulary& vocab) {
  return {encode_action(record.action, vocab), encode_context_block(record, vocab)};
}

EncodedSequence encode_session(std::span<const ActionRecord> session, const ActionVocabulary& vocab) {
  EncodedSequence out;
  out.reserve(session.size());
  for (const auto& r : session) out.push_back(encode_step(r, vocab));
  return out;
}

std::vector<EncodedSequence> encode_corpus(const std::vector<ActionSession>& sessions,
                                           const ActionVocabulary& vocab) {
  std::vector<EncodedSequence> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) out.push_back(encode_session(s, vocab));
  return out;
}

StepInput pad_step(const ModelDims& dims) { return {kPadIndex, Eigen::VectorXd::Zero(dims.context_size())}; }

Window window_before(const EncodedSequence& seq, std::size_t position, int n_past, const ModelDims& dims) {
  if (position > seq.size()) throw ContractViolation("window position past end of sequence");
  Window w(static_cast<std::size_t>(n_past));
  std::size_t filled = 0;
  for (std::size_t p = position; p-- > 0 && filled < w.size();) {
    if (seq[p].action == kUnkIndex) continue;
    w[w.size() - 1 - filled] = seq[p];
    ++filled;
  }
  for (std::size_t i = 0; i < w.size() - filled; ++i) w[i] = pad_step(dims);
  return w;
}

std::vector<SamplePosition> sample_positions(const std::vector<EncodedSequence>& corpus) {
  std::vector<SamplePosition> out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (std::size_t p = 1; p < corpus[s].size(); ++p) {
      if (!ActionVocabulary::is_reserved(corpus[s][p].action)) out.push_back({s, p});
    }
  }
  return out;
}

EvalResult evaluate(const Model& model, const std::vector<EncodedSequence>& corpus, bool keep_records) {
  EvalResult r;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (std::size_t p = 1; p < corpus[s].size(); ++p) {
      const int actual = corpus[s][p].action;
      if (ActionVocabulary::is_reserved(actual)) {
        ++r.skipped_unknown;
        continue;
      }
      const auto dist = model.forward(window_before(corpus[s], p, model.config().n_past, model.dims()));
      const int predicted = dist.argmax(kReservedCount);
      ++r.total;
      if (predicted == actual) ++r.correct;
      if (keep_records)
        r.records.push_back({s, p, predicted, actual, dist.probs[static_cast<std::size_t>(predicted)]});
    }
  }
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

double marginal_baseline_accuracy(const std::vector<EncodedSequence>& train,
                                  const std::vector<EncodedSequence>& validation) {
  std::map<int, std::size_t> counts;
  for (const auto& sp : sample_positions(train)) ++counts[train[sp.sequence][sp.position].action];
  if (counts.empty()) return 0.0;
  const int mode = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
                     return a.second < b.second;
                   })->first;
  std::size_t hit = 0;
  const auto val = sample_positions(validation);
  for (const auto& sp : val) hit += validation[sp.sequence][sp.position].action == mode;
  return val.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(val.size());
}

namespace {

void shuffle(std::vector<SamplePosition>& v, std::mt19937_64& rng) {
  // Fisher-Yates with a fixed index mapping, so the order does not depend on
  // the standard library's distribution implementation.
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::size_t total_actions(const std::vector<EncodedSequence>& corpus) {
  std::size_t n = 0;
  for (const auto& s : corpus) n += s.size();
  return n;
}

}  // namespace

TrainResult train(const std::vector<EncodedSequence>& train_corpus,
                  const std::vector<EncodedSequence>& validation_corpus, const TrainingConfig& config,
                  const ModelDims& dims, const EpochCallback& on_epoch) {
  config.validate();
  if (total_actions(train_corpus) < 2) throw DataError("training corpus has fewer than 2 actions");
  auto samples = sample_positions(train_corpus);
  if (samples.empty()) throw DataError("training corpus has no predictable positions");
  if (sample_positions(validation_corpus).empty()) throw DataError("validation corpus has no predictable positions");

  Model model(config, dims);
  model.initialize(config.seed);
  AdamState adam = AdamState::zeros_like(model.params());
  const AdamConfig adam_config = AdamConfig::from(config);
  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  TrainResult result{model, adam, 0, {}};
  double best_accuracy = -1.0;
  ParameterSet grad = model.params().zeros_like();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    shuffle(samples, rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < samples.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(samples.size(), begin + static_cast<std::size_t>(config.batch_size));
      grad.set_zero();
      for (std::size_t i = begin; i < end; ++i) {
        const auto& sp = samples[i];
        const auto& seq = train_corpus[sp.sequence];
        loss_sum += model.accumulate_gradient(window_before(seq, sp.position, config.n_past, dims),
                                              seq[sp.position].action, grad);
      }
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (auto& t : grad) t.value *= scale;
      adam_step(model.params(), grad, adam, adam_config);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(samples.size());
    if (!std::isfinite(m.train_loss) || !model.params().all_finite())
      throw DataError("training diverged (non-finite loss or parameters) in epoch " + std::to_string(epoch));
    m.val_accuracy = evaluate(model, validation_corpus).accuracy;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.metrics.push_back(m);
    if (m.val_accuracy > best_accuracy) {
      best_accuracy = m.val_accuracy;
      result.model = model;
      result.adam = adam;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(m);
  }
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> metrics, bool with_seconds) {
  out << "epoch,train_loss,val_accuracy,seconds\n";
  for (const auto& m : metrics) {
    std::ostringstream row;
    row << std::setprecision(17) << m.epoch << ',' << m.train_loss << ',' << m.val_accuracy << ',';
    if (with_seconds) row << std::setprecision(6) << m.seconds;
    out << row.str() << '\n';
  }
}

std::pair<std::vector<ActionSession>, std::vector<ActionSession>> split_tail(
    const std::vector<ActionSession>& sessions, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractViolation("validation fraction must be in (0, 1)");
  std::size_t total = 0;
  for (const auto& s : sessions) total += s.size();
  const auto cut = static_cast<std::size_t>(std::llround(static_cast<double>(total) * (1.0 - fraction)));
  std::vector<ActionSession> head, tail;
  std::size_t seen = 0;
  for (const auto& s : sessions) {
    if (seen + s.size() <= cut) {
      head.push_back(s);
    } else if (seen >= cut) {
      tail.push_back(s);
    } else {
      const auto k = static_cast<std::ptrdiff_t>(cut - seen);
      head.emplace_back(s.begin(), s.begin() + k);
      tail.emplace_back(s.begin() + k, s.end());
    }
    seen += s.size();
  }
  return {std::move(head), std::move(tail)};
}

std::vector<RankedAction> predict_topk(const Model& model, const ActionVocabulary& vocab,
                                       std::span<const ActionRecord> history, int k, const std::set<int>* keep) {
  if (k < 1) throw ContractViolation("k must be >= 1");
  if (!(model.dims() == dims_of(vocab))) throw ContractViolation("model dimensions do not match the vocabulary");
  const auto n_past = static_cast<std::size_t>(model.config().n_past);
  // Only the tail can reach the window; encode just enough of it.
  EncodedSequence seq;
  for (std::size_t i = history.size(); i-- > 0 && seq.size() < n_past;) {
    StepInput s = encode_step(history[i], vocab);
    if (s.action != kUnkIndex) seq.push_back(std::move(s));
  }
  std::reverse(seq.begin(), seq.end());
  auto dist = model.forward(window_before(seq, seq.size(), model.config().n_past, model.dims()));
  if (keep) dist = filter_renormalize(dist, *keep);
  std::vector<RankedAction> out;
  for (const auto& r : dist.topk(k, kReservedCount)) {
    if (keep && !keep->count(r.index)) continue;  // fewer than k kept actions
    out.push_back({r.index, vocab.action_of(r.index), r.prob});
  }
  return out;
}

void check_compatible(const std::string& checkpoint_vocab_hash, const Model& model, const ActionVocabulary& vocab) {
  if (checkpoint_vocab_hash != vocab.hash())
    throw DataError("checkpoint was trained against vocabulary " + checkpoint_vocab_hash + ", not " + vocab.hash());
  if (!(model.dims() == dims_of(vocab))) throw DataError("checkpoint dimensions do not match the vocabulary");
}

}  // namespace acf
