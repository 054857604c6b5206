#include "ncv/rlnc.hpp"

#include <string>

#include "ncv/error.hpp"

namespace ncv::rlnc {

std::size_t payload_symbols(gf::FieldSpec spec, std::size_t bits) {
  const std::size_t m = spec.order_exponent;
  if (bits % m != 0) {
    throw ParameterError("payload of " + std::to_string(bits) + " bits is not a multiple of m=" + std::to_string(m));
  }
  return bits / m;
}

Encoder::Encoder(gf::FieldSpec spec, std::vector<Payload> sources) : field_(&gf::field(spec)), sources_(std::move(sources)) {
  if (sources_.empty()) throw ParameterError("generation size must be at least 1");
  payload_length_ = sources_.front().size();
  const Symbol mask = static_cast<Symbol>(field_->order() - 1);
  for (const auto& p : sources_) {
    if (p.size() != payload_length_) throw DimensionError("source payloads differ in length");
    for (Symbol s : p) {
      if ((s & mask) != s) throw ParameterError("source symbol outside the field");
    }
  }
}

Encoder Encoder::random(gf::FieldSpec spec, std::size_t size, std::size_t payload_bits, Rng& rng) {
  const std::size_t len = payload_symbols(spec, payload_bits);
  std::uniform_int_distribution<std::uint32_t> symbol(0, spec.order() - 1);
  std::vector<Payload> sources(size, Payload(len));
  for (auto& p : sources) {
    for (auto& s : p) s = static_cast<Symbol>(symbol(rng));
  }
  return Encoder(spec, std::move(sources));
}

CodedPacket Encoder::encode(Rng& rng) const {
  std::uniform_int_distribution<std::uint32_t> symbol(0, field_->order() - 1);
  std::vector<Symbol> coefficients(size());
  for (auto& c : coefficients) c = static_cast<Symbol>(symbol(rng));
  return encode_with(std::move(coefficients));
}

CodedPacket Encoder::encode_with(std::vector<Symbol> coefficients) const {
  if (coefficients.size() != size()) {
    throw DimensionError("expected " + std::to_string(size()) + " coefficients, got " +
                         std::to_string(coefficients.size()));
  }
  CodedPacket pkt{std::move(coefficients), Payload(payload_length_, 0)};
  for (std::size_t k = 0; k < size(); ++k) field_->axpy(pkt.payload, pkt.coefficients[k], sources_[k]);
  return pkt;
}

Decoder::Decoder(gf::FieldSpec spec, std::size_t size, std::size_t payload_length)
    : field_(&gf::field(spec)), size_(size), payload_length_(payload_length), rows_(size), payloads_(size) {
  if (size_ == 0) throw ParameterError("generation size must be at least 1");
}

bool Decoder::absorb(const CodedPacket& pkt) {
  if (pkt.coefficients.size() != size_) {
    throw DimensionError("packet has " + std::to_string(pkt.coefficients.size()) +
                         " coefficients, generation size is " + std::to_string(size_));
  }
  if (pkt.payload.size() != payload_length_) throw DimensionError("payload length mismatch");
  if (complete()) return false;

  scratch_.assign(pkt.coefficients.begin(), pkt.coefficients.end());
  scratch_payload_.assign(pkt.payload.begin(), pkt.payload.end());

  // Stored rows are zero in every other pivot column, so elimination order
  // does not matter.
  for (std::size_t c = 0; c < size_; ++c) {
    const Symbol v = scratch_[c];
    if (v == 0 || rows_[c].empty()) continue;
    field_->axpy(scratch_, v, rows_[c]);
    field_->axpy(scratch_payload_, v, payloads_[c]);
  }
  std::size_t pivot = 0;
  while (pivot < size_ && scratch_[pivot] == 0) ++pivot;
  if (pivot == size_) return false;

  const Symbol norm = field_->inv(scratch_[pivot]);
  field_->scale(scratch_, norm);
  field_->scale(scratch_payload_, norm);

  // Back-substitute so every stored row stays zero in the new pivot column.
  for (std::size_t c = 0; c < size_; ++c) {
    if (rows_[c].empty() || rows_[c][pivot] == 0) continue;
    const Symbol v = rows_[c][pivot];
    field_->axpy(rows_[c], v, scratch_);
    field_->axpy(payloads_[c], v, scratch_payload_);
  }
  rows_[pivot] = scratch_;
  payloads_[pivot] = scratch_payload_;
  ++rank_;
  return true;
}

std::optional<std::vector<Payload>> Decoder::decode() const {
  if (!complete()) return std::nullopt;
  return payloads_;
}

}  // namespace ncv::rlnc
