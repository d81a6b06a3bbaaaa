/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "wavesense/checkpoint.hpp"

#include <zlib.h>

#include <fstream>
#include <map>

#include "byteio.hpp"
#include "wavesense/error.hpp"

namespace fs = std::filesystem;

namespace wavesense {

namespace {

constexpr char kMagic[] = "WSCKPT1";
constexpr std::size_t kMagicSize = sizeof(kMagic) - 1;

struct Record {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

void put_record(std::string& buf, const std::string& name,
                const std::vector<std::uint32_t>& dims, const float* data,
                std::size_t count) {
  byteio::put(buf, static_cast<std::uint32_t>(name.size()));
  buf += name;
  byteio::put(buf, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) byteio::put(buf, d);
  for (std::size_t i = 0; i < count; ++i) byteio::put(buf, data[i]);
}

void put_tensor(std::string& buf, const std::string& name, const Tensor2<float>& t) {
  put_record(buf, name,
             {static_cast<std::uint32_t>(t.rows()), static_cast<std::uint32_t>(t.cols())},
             t.data().data(), t.size());
}

// Text stored one byte per element; every byte value is exact in f32.
void put_text(std::string& buf, const std::string& name, const std::string& text) {
  std::vector<float> v;
  v.reserve(text.size());
  for (unsigned char c : text) v.push_back(static_cast<float>(c));
  put_record(buf, name, {static_cast<std::uint32_t>(v.size())}, v.data(), v.size());
}

std::string get_text(const Record& r) {
  std::string s;
  s.reserve(r.data.size());
  for (float f : r.data) {
    if (!(f >= 0.0f && f <= 255.0f) || f != static_cast<float>(static_cast<int>(f))) {
      throw FormatError("text record holds a non-byte value");
    }
    s.push_back(static_cast<char>(static_cast<unsigned char>(f)));
  }
  return s;
}

// u64 values as four u16 chunks each, least significant first.
void put_words(std::string& buf, const std::string& name,
               const std::vector<std::uint64_t>& words) {
  std::vector<float> v;
  for (std::uint64_t w : words) {
    for (int k = 0; k < 4; ++k) v.push_back(static_cast<float>((w >> (16 * k)) & 0xFFFF));
  }
  put_record(buf, name, {static_cast<std::uint32_t>(v.size())}, v.data(), v.size());
}

std::vector<std::uint64_t> get_words(const Record& r) {
  if (r.data.size() % 4 != 0) throw FormatError("malformed state record");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < r.data.size(); i += 4) {
    std::uint64_t w = 0;
    for (int k = 0; k < 4; ++k) {
      const float f = r.data[i + k];
      if (!(f >= 0.0f && f <= 65535.0f)) throw FormatError("malformed state record");
      w |= static_cast<std::uint64_t>(f) << (16 * k);
    }
    out.push_back(w);
  }
  return out;
}

Tensor2<float> to_tensor(const Record& r, const std::string& name) {
  if (r.dims.size() != 2) throw FormatError("record " + name + " is not a matrix");
  Tensor2<float> t(r.dims[0], r.dims[1]);
  t.data() = r.data;
  return t;
}

}  // namespace

std::uint32_t crc32(const std::string& bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos),
                  static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

Network<float> Checkpoint::network() const {
  Network<float> net(config);
  if (net.parameters().size() != params.size()) {
    throw IncompatibleCheckpoint("checkpoint parameters do not match its config");
  }
  for (ParamId p = 0; p < params.size(); ++p) {
    auto& dst = net.parameters().value(p);
    const auto& src = params.value(p);
    if (net.parameters().name(p) != params.name(p) || dst.rows() != src.rows() ||
        dst.cols() != src.cols()) {
      throw IncompatibleCheckpoint("parameter " + params.name(p) + " does not match the config");
    }
    dst = src;
  }
  return net;
}

Trainer Checkpoint::trainer() const {
  TrainConfig tc = train.value_or(TrainConfig{});
  tc.seed = state.seed;
  Trainer t(network(), tc);
  if (!optimizer.first_moment().empty()) t.restore(optimizer, state);
  return t;
}

Checkpoint make_checkpoint(const Network<float>& net) {
  Checkpoint c;
  c.config = net.config();
  c.config_hash = net.config().hash();
  c.params = net.parameters();
  return c;
}

Checkpoint make_checkpoint(const Trainer& trainer) {
  Checkpoint c = make_checkpoint(trainer.network());
  c.train = trainer.config();
  c.optimizer = trainer.optimizer();
  c.state = trainer.state();
  return c;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string buf(kMagic, kMagicSize);
  byteio::put(buf, ckpt.version);
  byteio::put(buf, ckpt.config_hash);
  put_text(buf, "meta/config", ckpt.config.to_text());
  if (ckpt.train) {
    // The worker count does not change results, so it is not persisted.
    TrainConfig stored = *ckpt.train;
    stored.threads = 1;
    put_text(buf, "meta/train_config", stored.to_text());
  }
  put_words(buf, "meta/state", {ckpt.optimizer.steps(), ckpt.state.epoch,
                                ckpt.state.step_in_epoch, ckpt.state.seed});
  for (ParamId p = 0; p < ckpt.params.size(); ++p) {
    put_tensor(buf, "param/" + ckpt.params.name(p), ckpt.params.value(p));
  }
  const auto& m = ckpt.optimizer.first_moment();
  const auto& v = ckpt.optimizer.second_moment();
  if (!m.empty()) {
    if (m.size() != ckpt.params.size() || v.size() != ckpt.params.size()) {
      throw UsageError("optimizer state does not match the parameters");
    }
    for (ParamId p = 0; p < ckpt.params.size(); ++p) {
      put_tensor(buf, "adam.m/" + ckpt.params.name(p), m[p]);
      put_tensor(buf, "adam.v/" + ckpt.params.name(p), v[p]);
    }
  }
  byteio::put(buf, crc32(buf));
  return buf;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicSize + 4 + 8 + 4 || bytes.compare(0, kMagicSize, kMagic) != 0) {
    if (bytes.size() >= kMagicSize && bytes.compare(0, kMagicSize, kMagic) != 0) {
      throw FormatError("not a WSCKPT1 checkpoint");
    }
    throw ChecksumError("checkpoint truncated");
  }
  const std::string body = bytes.substr(0, bytes.size() - 4);
  byteio::Reader tail(bytes.data() + body.size(), 4);
  if (tail.get<std::uint32_t>() != crc32(body)) {
    throw ChecksumError("checkpoint checksum mismatch (corrupt or truncated file)");
  }

  byteio::Reader r(body.data(), body.size());
  r.bytes(kMagicSize);
  Checkpoint c;
  c.version = r.get<std::uint32_t>();
  if (c.version != kCheckpointVersion) {
    throw IncompatibleCheckpoint("checkpoint version " + std::to_string(c.version) +
                                 ", expected " + std::to_string(kCheckpointVersion));
  }
  c.config_hash = r.get<std::uint64_t>();

  std::vector<std::pair<std::string, Record>> records;
  std::map<std::string, std::size_t> index;
  while (r.remaining() > 0) {
    const auto len = r.get<std::uint32_t>();
    std::string name = r.bytes(len);
    Record rec;
    const auto rank = r.get<std::uint32_t>();
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      rec.dims.push_back(r.get<std::uint32_t>());
      count *= rec.dims.back();
    }
    if (count * 4 > r.remaining()) throw FormatError("record " + name + " overruns the file");
    rec.data.resize(count);
    for (auto& f : rec.data) f = r.get<float>();
    if (!index.emplace(name, records.size()).second) {
      throw FormatError("duplicate record " + name);
    }
    records.emplace_back(std::move(name), std::move(rec));
  }
  auto find = [&](const std::string& name) -> const Record* {
    auto it = index.find(name);
    return it == index.end() ? nullptr : &records[it->second].second;
  };

  const Record* cfg = find("meta/config");
  if (!cfg) throw FormatError("checkpoint has no config record");
  const std::string config_text = get_text(*cfg);
  if (fnv1a64(config_text) != c.config_hash) {
    throw FormatError("stored config does not match the header hash");
  }
  c.config = WaveSenseConfig::from(KeyValueConfig::parse(config_text));
  if (const Record* tc = find("meta/train_config")) {
    c.train = TrainConfig::from(KeyValueConfig::parse(get_text(*tc)));
  }
  std::uint64_t adam_steps = 0;
  if (const Record* st = find("meta/state")) {
    const auto words = get_words(*st);
    if (words.size() != 4) throw FormatError("malformed state record");
    adam_steps = words[0];
    c.state = {words[1], words[2], words[3]};
  }

  // Parameters in the network's registration order.
  const Network<float> layout(c.config);
  c.params = layout.parameters();
  bool have_moments = find("adam.m/" + c.params.name(0)) != nullptr;
  std::vector<Tensor2<float>> m, v;
  for (ParamId p = 0; p < c.params.size(); ++p) {
    const std::string& name = c.params.name(p);
    const Record* rec = find("param/" + name);
    if (!rec) throw IncompatibleCheckpoint("checkpoint lacks parameter " + name);
    Tensor2<float> t = to_tensor(*rec, name);
    if (t.rows() != c.params.value(p).rows() || t.cols() != c.params.value(p).cols()) {
      throw IncompatibleCheckpoint("parameter " + name + " has the wrong shape");
    }
    c.params.value(p) = std::move(t);
    if (have_moments) {
      const Record* rm = find("adam.m/" + name);
      const Record* rv = find("adam.v/" + name);
      if (!rm || !rv) throw FormatError("incomplete optimizer state for " + name);
      m.push_back(to_tensor(*rm, name));
      v.push_back(to_tensor(*rv, name));
    }
  }
  if (have_moments) {
    c.optimizer = Adam<float>(c.params, c.train ? c.train->lr : 1e-3);
    c.optimizer.first_moment() = std::move(m);
    c.optimizer.second_moment() = std::move(v);
    c.optimizer.set_steps(adam_steps);
  }
  return c;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  return decode_checkpoint(byteio::slurp(in));
}

Checkpoint load_checkpoint(const fs::path& path, std::uint64_t expected_hash) {
  Checkpoint c = load_checkpoint(path);
  if (c.config_hash != expected_hash) {
    throw IncompatibleCheckpoint("checkpoint config hash differs from the expected config");
  }
  return c;
}

}  // namespace wavesense
