// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genqa/config.hpp"
#include "genqa/io.hpp"
#include "genqa/model.hpp"
#include "genqa/parameters.hpp"

namespace genqa {

struct BatchLoss {
  double loss = 0.0;  ///< mean NLL + l2 * ||theta||^2
  double nll = 0.0;   ///< summed over the batch
  std::size_t tokens = 0;
};

/// Mean batch NLL plus the L2 term. When `grads` is given it receives the
/// gradient (it is zeroed first). Examples are split into contiguous chunks,
/// one per thread, and chunk gradients are reduced in chunk order.
BatchLoss batch_loss(const GenQaModel& model, std::span<const PreparedExample* const> batch,
                     double l2, Gradients* grads, std::size_t threads = 1);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;           ///< mean of batch losses
  double nll_per_token = 0.0;  ///< over the whole epoch
  double learning_rate = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Plain minibatch SGD with global-norm clipping and a halving schedule on
/// plateaus. Shuffles with a generator seeded from `config.seed`.
std::vector<EpochLog> train(GenQaModel& model, const std::vector<PreparedExample>& data,
                            const Config& config, const EpochCallback& on_epoch = {});

/// Prepares training instances; drops those whose gold triple is not among
/// their candidates (KB branch on). `dropped` receives the count.
std::vector<PreparedExample> prepare_dataset(const GenQaModel& model,
                                             const std::vector<GroundedInstance>& instances,
                                             const TripleStore& store,
                                             std::size_t* dropped = nullptr);

/// Mean NLL per token of a dataset under the current parameters.
double dataset_nll_per_token(const GenQaModel& model, const std::vector<PreparedExample>& data);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  Config config;
  json meta;
  ParameterSet params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ck);
/// Throws FormatError on bad magic, version mismatch, truncation or checksum
/// failure. Nothing is returned unless every slot verified.
Checkpoint parse_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const GenQaModel& model, const TripleStore& store);
GenQaModel model_from_checkpoint(const Checkpoint& ck);
TripleStore store_from_checkpoint(const Checkpoint& ck);
/// The store's triples as a JSON array of [subject, predicate, object].
json store_to_json(const TripleStore& store);

}  // namespace genqa
