#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "acf/action_log.hpp"
#include "acf/adam.hpp"
#include "acf/model.hpp"
#include "acf/vocabulary.hpp"

namespace acf {

/// One session encoded against a vocabulary. Actions outside the vocabulary
/// are kept as UNK so positions stay aligned with the source log.
using EncodedSequence = std::vector<StepInput>;

ModelDims dims_of(const ActionVocabulary& vocab);

/// [app one-hot | rel_x | rel_y | elapsed bucket]
Eigen::VectorXd encode_context_block(const ActionRecord& record, const ActionVocabulary& vocab);
StepInput encode_step(const ActionRecord& record, const ActionVocabulary& vocab);
EncodedSequence encode_session(std::span<const ActionRecord> session, const ActionVocabulary& vocab);
std::vector<EncodedSequence> encode_corpus(const std::vector<ActionSession>& sessions,
                                           const ActionVocabulary& vocab);

/// The PAD step: action index 0 with an all-zero context block.
StepInput pad_step(const ModelDims& dims);

/// Window predicting position `position` of `seq`: the last n_past non-UNK
/// steps before it, left-padded with PAD.
Window window_before(const EncodedSequence& seq, std::size_t position, int n_past, const ModelDims& dims);

struct SamplePosition {
  std::size_t sequence = 0;
  std::size_t position = 0;
};

/// Every (sequence, position >= 1) whose target is a retained action.
std::vector<SamplePosition> sample_positions(const std::vector<EncodedSequence>& corpus);

struct EvalRecord {
  std::size_t sequence = 0;
  std::size_t position = 0;
  int predicted = 0;
  int actual = 0;
  double predicted_prob = 0.0;
  bool correct() const { return predicted == actual; }
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t skipped_unknown = 0;  // positions whose target is UNK
  std::vector<EvalRecord> records;
};

/// Top-1 (ties: lower index, reserved indices never predicted) against the
/// actual next action at every position >= 1 with a retained target.
EvalResult evaluate(const Model& model, const std::vector<EncodedSequence>& corpus, bool keep_records = false);

/// Accuracy of always predicting the most frequent training target.
double marginal_baseline_accuracy(const std::vector<EncodedSequence>& train,
                                  const std::vector<EncodedSequence>& validation);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Model model;  // parameters of the best epoch
  AdamState adam;
  int best_epoch = 0;
  std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch Adam over all stride-1 windows, reshuffled every epoch with a
/// generator seeded from config.seed. Keeps the epoch with the highest
/// validation accuracy (earliest on ties). Throws DataError when the corpus
/// has fewer than 2 actions or no usable validation positions, and when a
/// loss or parameter becomes non-finite.
TrainResult train(const std::vector<EncodedSequence>& train_corpus,
                  const std::vector<EncodedSequence>& validation_corpus, const TrainingConfig& config,
                  const ModelDims& dims, const EpochCallback& on_epoch = {});

/// CSV with header epoch,train_loss,val_accuracy,seconds. Wall-clock seconds
/// are left empty unless `with_seconds`, so repeated runs produce equal files.
void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> metrics, bool with_seconds = false);

/// Splits off the last `fraction` of all actions (in log order) as validation.
/// A session straddling the cut is split in two.
std::pair<std::vector<ActionSession>, std::vector<ActionSession>> split_tail(
    const std::vector<ActionSession>& sessions, double fraction);

struct RankedAction {
  int index = 0;
  UserAction action;
  double prob = 0.0;
};

/// Top-k next actions after `history` (oldest first). Unknown actions are
/// dropped from the window. With `keep`, the distribution is restricted to
/// those indices and renormalized first, and only kept actions are returned
/// (possibly fewer than k). Throws ContractViolation for k < 1
/// or when the model does not fit the vocabulary.
std::vector<RankedAction> predict_topk(const Model& model, const ActionVocabulary& vocab,
                                       std::span<const ActionRecord> history, int k,
                                       const std::set<int>* keep = nullptr);

/// Throws DataError when a checkpoint was trained against another vocabulary.
void check_compatible(const std::string& checkpoint_vocab_hash, const Model& model, const ActionVocabulary& vocab);

}  // namespace acf
