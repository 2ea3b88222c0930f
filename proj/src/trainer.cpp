// SPDX-License-Identifier: Apache-2.0
#include "genqa/trainer.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <thread>

#include "genqa/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace genqa {

namespace {

struct ChunkResult {
  double nll = 0.0;
  std::size_t tokens = 0;
};

ChunkResult run_chunk(const GenQaModel& model, std::span<const PreparedExample* const> chunk,
                      Gradients* grads) {
  ChunkResult r;
  for (const PreparedExample* ex : chunk) {
    Tape tape(&model.params(), grads, grads != nullptr);
    Var ll = model.log_likelihood(tape, *ex);
    r.nll -= ll.value().item();
    r.tokens += ex->targets.size();
    if (grads) tape.backward(scale(ll, -1.0));
  }
  return r;
}

}  // namespace

BatchLoss batch_loss(const GenQaModel& model, std::span<const PreparedExample* const> batch,
                     double l2, Gradients* grads, std::size_t threads) {
  if (batch.empty()) throw InvalidArgument("batch_loss: empty batch");
  threads = std::max<std::size_t>(1, std::min(threads, batch.size()));
  std::vector<Gradients> partial;
  std::vector<ChunkResult> results(threads);
  if (grads) partial.assign(threads, Gradients(model.params()));
  const std::size_t per = (batch.size() + threads - 1) / threads;
  auto chunk = [&](std::size_t i) {
    const std::size_t b = std::min(batch.size(), i * per);
    const std::size_t e = std::min(batch.size(), b + per);
    return batch.subspan(b, e - b);
  };
  if (threads == 1) {
    results[0] = run_chunk(model, batch, grads ? &partial[0] : nullptr);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        try {
          results[i] = run_chunk(model, chunk(i), grads ? &partial[i] : nullptr);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BatchLoss out;
  for (const auto& r : results) {
    out.nll += r.nll;
    out.tokens += r.tokens;
  }
  const double n = static_cast<double>(batch.size());
  const ParameterSet& params = model.params();
  out.loss = out.nll / n + l2 * params.squared_norm();
  if (grads) {
    *grads = std::move(partial[0]);
    for (std::size_t i = 1; i < threads; ++i) grads->add(partial[i]);
    grads->scale(1.0 / n);
    if (l2 != 0.0) {
      for (std::size_t s = 0; s < params.size(); ++s) {
        const Tensor& v = params.value(static_cast<int>(s));
        Tensor& g = grads->slot(static_cast<int>(s));
        for (std::size_t i = 0; i < v.size(); ++i) g[i] += 2.0 * l2 * v[i];
      }
    }
  }
  return out;
}

std::vector<PreparedExample> prepare_dataset(const GenQaModel& model,
                                             const std::vector<GroundedInstance>& instances,
                                             const TripleStore& store, std::size_t* dropped) {
  std::vector<PreparedExample> out;
  std::size_t skipped = 0;
  for (const auto& g : instances) {
    PreparedExample ex = model.prepare(g.question, store, &g);
    if (model.kb_branch() && ex.gold_candidate < 0) {
      ++skipped;
      continue;
    }
    out.push_back(std::move(ex));
  }
  if (dropped) *dropped = skipped;
  return out;
}

double dataset_nll_per_token(const GenQaModel& model, const std::vector<PreparedExample>& data) {
  std::vector<const PreparedExample*> ptrs;
  for (const auto& ex : data) ptrs.push_back(&ex);
  BatchLoss b = batch_loss(model, ptrs, 0.0, nullptr);
  return b.nll / static_cast<double>(b.tokens);
}

std::vector<EpochLog> train(GenQaModel& model, const std::vector<PreparedExample>& data,
                            const Config& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  ParameterSet& params = model.params();
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients grads(params);
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::vector<EpochLog> log;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, nll_sum = 0.0;
    std::size_t batches = 0, tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const PreparedExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      BatchLoss b;
      try {
        b = batch_loss(model, batch, config.l2, &grads, config.threads);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch starting at position " +
                           std::to_string(start) + ": " + e.what());
      }
      if (!std::isfinite(b.loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                           ", batch starting at position " + std::to_string(start));
      }
      const double norm = grads.global_norm();
      if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      for (std::size_t s = 0; s < params.size(); ++s) {
        Tensor& v = params.value(static_cast<int>(s));
        const Tensor& g = grads.slot(static_cast<int>(s));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
        v.round_to(params.precision());
      }
      loss_sum += b.loss;
      nll_sum += b.nll;
      tokens += b.tokens;
      ++batches;
    }
    EpochLog e{epoch, loss_sum / static_cast<double>(batches),
               nll_sum / static_cast<double>(tokens), lr};
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (e.loss < best * (1.0 - 1e-3)) {
      best = std::min(best, e.loss);
    } else {
      lr *= config.lr_decay;
      best = std::min(best, e.loss);
    }
  }
  return log;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'E', 'N', 'Q', 'A', 'C', 'K', 'P'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf_.append(b, sizeof(T));
  }
  void bytes(const std::string& s) { buf_ += s; }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw FormatError("checkpoint truncated (checksum region incomplete)");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const void* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), static_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

std::string encode_values(const Tensor& t, Precision p) {
  std::string out;
  if (p == Precision::Float32) {
    out.resize(t.size() * sizeof(float));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const float f = static_cast<float>(t[i]);
      std::memcpy(out.data() + i * sizeof(float), &f, sizeof(float));
    }
  } else {
    out.resize(t.size() * sizeof(double));
    std::memcpy(out.data(), t.ptr(), out.size());
  }
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  const Precision p = ck.params.precision();
  json meta = ck.meta;
  meta["config"] = ck.config.to_text();
  const std::string meta_text = meta.dump();

  std::vector<std::string> payloads;
  for (std::size_t s = 0; s < ck.params.size(); ++s) {
    payloads.push_back(encode_values(ck.params.value(static_cast<int>(s)), p));
  }

  Writer w;
  w.bytes(std::string(kMagic, sizeof(kMagic)));
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(p == Precision::Float32 ? 1 : 0);
  w.put<std::uint64_t>(meta_text.size());
  w.bytes(meta_text);
  w.put<std::uint32_t>(crc(meta_text.data(), meta_text.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ck.params.size()));
  std::uint64_t offset = 0;
  for (std::size_t s = 0; s < ck.params.size(); ++s) {
    const std::string& name = ck.params.name(static_cast<int>(s));
    const Shape& shape = ck.params.value(static_cast<int>(s)).shape();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.rank()));
    w.put<std::uint64_t>(shape.rows());
    w.put<std::uint64_t>(shape.rank() == 2 ? shape.cols() : 1);
    w.put<std::uint64_t>(offset);
    w.put<std::uint32_t>(crc(payloads[s].data(), payloads[s].size()));
    offset += payloads[s].size();
  }
  w.put<std::uint32_t>(crc(w.str().data(), w.str().size()));
  for (const auto& pl : payloads) w.bytes(pl);
  return std::move(w.str());
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const auto prec = r.get<std::uint32_t>();
  if (prec > 1) throw FormatError("checkpoint has an unknown precision code");
  const Precision p = prec == 1 ? Precision::Float32 : Precision::Float64;
  const auto meta_len = r.get<std::uint64_t>();
  const std::string meta_text = r.bytes(meta_len);
  if (r.get<std::uint32_t>() != crc(meta_text.data(), meta_text.size())) {
    throw FormatError("checkpoint checksum mismatch in metadata");
  }
  struct SlotEntry {
    std::string name;
    Shape shape;
    std::uint64_t offset;
    std::uint32_t crc;
  };
  std::vector<SlotEntry> entries;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    SlotEntry e;
    e.name = r.bytes(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rank == 1) {
      e.shape = Shape{rows};
    } else if (rank == 2) {
      e.shape = Shape{rows, cols};
    } else {
      throw FormatError("checkpoint slot '" + e.name + "' has rank " + std::to_string(rank));
    }
    e.offset = r.get<std::uint64_t>();
    e.crc = r.get<std::uint32_t>();
    entries.push_back(std::move(e));
  }
  const std::size_t header_end = r.pos();
  if (r.get<std::uint32_t>() != crc(bytes.data(), header_end)) {
    throw FormatError("checkpoint checksum mismatch in header");
  }
  const std::size_t data_start = r.pos();
  const std::size_t width = p == Precision::Float32 ? sizeof(float) : sizeof(double);

  Checkpoint ck{Config{}, json::parse(meta_text), ParameterSet(p)};
  for (const auto& e : entries) {
    const std::size_t n = e.shape.size() * width;
    const std::size_t at = data_start + e.offset;
    if (at + n > bytes.size()) {
      throw FormatError("checkpoint truncated: checksum cannot be verified for slot '" + e.name + "'");
    }
    if (crc(bytes.data() + at, n) != e.crc) {
      throw FormatError("checkpoint checksum mismatch in slot '" + e.name + "'");
    }
    std::vector<double> values(e.shape.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (p == Precision::Float32) {
        float f;
        std::memcpy(&f, bytes.data() + at + i * width, width);
        values[i] = f;
      } else {
        std::memcpy(&values[i], bytes.data() + at + i * width, width);
      }
    }
    ck.params.add(e.name, Tensor(e.shape, std::move(values)));
  }
  ck.config.apply_text(ck.meta.at("config").get<std::string>(), "checkpoint config");
  ck.meta.erase("config");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  atomic_write(path, serialize_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

json store_to_json(const TripleStore& store) {
  json out = json::array();
  for (const auto& t : store.triples()) out.push_back({t.subject, t.predicate, t.object});
  return out;
}

namespace {

json vocab_to_json(const Vocabulary& v) {
  json out = json::array();
  for (std::size_t i = Vocabulary::kReserved; i < v.size(); ++i) {
    out.push_back(v.token(static_cast<int>(i)));
  }
  return out;
}

Vocabulary vocab_from_json(const json& j) {
  Vocabulary v;
  for (const auto& tok : j) v.add(tok.get<std::string>());
  return v;
}

}  // namespace

Checkpoint make_checkpoint(const GenQaModel& model, const TripleStore& store) {
  Checkpoint ck{model.config(), json::object(), model.params()};
  ck.meta["question_vocab"] = vocab_to_json(model.question_vocab());
  ck.meta["answer_vocab"] = vocab_to_json(model.answer_vocab());
  ck.meta["kb_tokens"] = model.kb_tokens();
  ck.meta["kb"] = store_to_json(store);
  return ck;
}

GenQaModel model_from_checkpoint(const Checkpoint& ck) {
  if (ck.config.system == SystemKind::Embedding) {
    throw FormatError("checkpoint holds an embedding baseline, not a GenQA model");
  }
  try {
    return GenQaModel::assemble(ck.config, vocab_from_json(ck.meta.at("question_vocab")),
                                ck.meta.at("kb_tokens").get<std::vector<std::string>>(),
                                vocab_from_json(ck.meta.at("answer_vocab")), ck.params);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
}

TripleStore store_from_checkpoint(const Checkpoint& ck) {
  std::vector<Triple> triples;
  try {
    for (const auto& t : ck.meta.at("kb")) {
      triples.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(),
                         t.at(2).get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  return TripleStore::build(triples);
}

}  // namespace genqa
