#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "ncv/gf.hpp"

namespace ncv::rlnc {

using gf::Symbol;
using Payload = std::vector<Symbol>;
using Rng = std::mt19937_64;

struct CodedPacket {
  std::vector<Symbol> coefficients;
  Payload payload;
};

/// Number of field symbols needed for `bits` payload bits. Throws
/// ParameterError unless bits is a multiple of m.
std::size_t payload_symbols(gf::FieldSpec spec, std::size_t bits);

/// Source side of a generation: i equal-length source payloads.
class Encoder {
 public:
  Encoder(gf::FieldSpec spec, std::vector<Payload> sources);

  /// i random sources of `payload_bits` bits each.
  static Encoder random(gf::FieldSpec spec, std::size_t size, std::size_t payload_bits, Rng& rng);

  std::size_t size() const { return sources_.size(); }
  std::size_t payload_length() const { return payload_length_; }
  const std::vector<Payload>& sources() const { return sources_; }
  gf::FieldSpec spec() const { return field_->spec(); }

  /// Coefficients uniform i.i.d. over the whole field (all-zero allowed).
  CodedPacket encode(Rng& rng) const;
  CodedPacket encode_with(std::vector<Symbol> coefficients) const;

 private:
  const gf::GaloisField* field_;
  std::vector<Payload> sources_;
  std::size_t payload_length_ = 0;
};

/// Receiver side: incremental Gauss-Jordan elimination. The accumulated rows
/// are kept in reduced row-echelon form, so a full-rank decoder holds the
/// identity and its augmented payloads are the sources.
class Decoder {
 public:
  Decoder(gf::FieldSpec spec, std::size_t size, std::size_t payload_length);

  std::size_t size() const { return size_; }
  std::size_t rank() const { return rank_; }
  bool complete() const { return rank_ == size_; }

  /// Returns true iff the packet raised the rank. Throws DimensionError on a
  /// coefficient (or payload) length mismatch.
  bool absorb(const CodedPacket& pkt);

  /// Source payloads once rank == size, otherwise nullopt.
  std::optional<std::vector<Payload>> decode() const;

 private:
  const gf::GaloisField* field_;
  std::size_t size_;
  std::size_t payload_length_;
  std::size_t rank_ = 0;
  // Row with its pivot in column c lives at rows_[c]; empty when no pivot.
  std::vector<std::vector<Symbol>> rows_;
  std::vector<Payload> payloads_;
  std::vector<Symbol> scratch_;
  Payload scratch_payload_;
};

/// Sources plus one receiver's decoding state.
class Generation {
 public:
  explicit Generation(Encoder encoder)
      : encoder_(std::move(encoder)), decoder_(encoder_.spec(), encoder_.size(), encoder_.payload_length()) {}

  std::size_t size() const { return encoder_.size(); }
  std::size_t rank() const { return decoder_.rank(); }
  const std::vector<Payload>& source_payloads() const { return encoder_.sources(); }

  CodedPacket encode(Rng& rng) const { return encoder_.encode(rng); }
  bool absorb(const CodedPacket& pkt) { return decoder_.absorb(pkt); }
  std::optional<std::vector<Payload>> decode() const { return decoder_.decode(); }

  const Encoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }

 private:
  Encoder encoder_;
  Decoder decoder_;
};

}  // namespace ncv::rlnc
