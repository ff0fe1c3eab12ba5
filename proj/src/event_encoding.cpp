#include "mevlens/event_encoding.hpp"

namespace mevlens {

Hash32 word_of(const WordValue& v)
{
    if (const auto* a = std::get_if<Address>(&v))
        return word_from_address(*a);
    if (const auto* i = std::get_if<BigInt>(&v))
        return word_from_uint(*i);
    return std::get<Hash32>(v);
}

namespace {

EventLog encode_impl(const Hash32& topic, const FieldValues& fields, const Bytes* data, const Address& emitter,
                     const ChainId& chain, const LogPosition& position, const Hash32& tx_hash,
                     const TopicRegistry& registry)
{
    const RegistryEntry* e = registry.lookup(topic);
    if (!e)
        throw Error("encode_event: topic " + to_hex(topic) + " is not registered");
    EventLog log;
    log.chain = chain;
    log.address = emitter;
    log.block_number = position.block;
    log.tx_index = position.tx_index;
    log.log_index = position.log_index;
    log.tx_hash = tx_hash;
    log.topics.assign(e->schema.topic_count, Hash32{});
    log.topics[0] = topic;
    if (data)
        log.data = *data;
    else
        log.data.assign(e->schema.min_data_slots() * 32, 0);
    for (const auto& [name, value] : fields) {
        const FieldSpec* f = e->schema.find(name);
        if (!f)
            throw Error("encode_event: " + e->event + " has no field '" + name + "'");
        const Hash32 w = word_of(value);
        if (f->source == FieldSource::topic) {
            log.topics.at(f->index) = w;
        } else {
            if (data)
                throw Error("encode_event: data fields conflict with an explicit data blob");
            std::copy(w.bytes.begin(), w.bytes.end(), log.data.begin() + static_cast<std::ptrdiff_t>(f->index * 32));
        }
    }
    return log;
}

}  // namespace

EventLog encode_event(const Hash32& topic, const FieldValues& fields, const Address& emitter, const ChainId& chain,
                      const LogPosition& position, const Hash32& tx_hash, const TopicRegistry& registry)
{
    return encode_impl(topic, fields, nullptr, emitter, chain, position, tx_hash, registry);
}

EventLog encode_event_with_data(const Hash32& topic, const FieldValues& fields, Bytes data, const Address& emitter,
                                const ChainId& chain, const LogPosition& position, const Hash32& tx_hash,
                                const TopicRegistry& registry)
{
    return encode_impl(topic, fields, &data, emitter, chain, position, tx_hash, registry);
}

}  // namespace mevlens
