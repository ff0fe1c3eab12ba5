#pragma once

#include <map>
#include <string>

#include "mevlens/event_decoding.hpp"

namespace mevlens {

using FieldValues = std::map<std::string, WordValue>;

// Builds a log laid out per the registry schema of `topic`. Fields left out
// are zero. `extra_data`, when set, replaces the data blob (bridge payloads).
EventLog encode_event(const Hash32& topic, const FieldValues& fields, const Address& emitter, const ChainId& chain,
                      const LogPosition& position, const Hash32& tx_hash,
                      const TopicRegistry& registry = TopicRegistry::builtin());

EventLog encode_event_with_data(const Hash32& topic, const FieldValues& fields, Bytes data, const Address& emitter,
                                const ChainId& chain, const LogPosition& position, const Hash32& tx_hash,
                                const TopicRegistry& registry = TopicRegistry::builtin());

Hash32 word_of(const WordValue& v);

}  // namespace mevlens
