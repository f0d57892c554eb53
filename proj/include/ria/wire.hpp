#pragma once

// Wire formats: SOAP-style request envelope, WSDL-subset service
// descriptor, XML service-request query, and the selection-result document.
// Only the element subset in the fixture files is understood; everything
// else is a typed error.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ria/error.hpp"
#include "ria/format.hpp"
#include "ria/model.hpp"
#include "ria/selector.hpp"
#include "ria/xml.hpp"

namespace ria::wire {

struct Envelope {
    std::optional<std::string> header;  // opaque text, absent when no Header element
    std::string message_id;
    std::string body_query;  // textual content of the Body subtree
};

inline Envelope parse_envelope(std::string_view bytes) {
    xml::Node root = xml::parse(bytes);
    if (root.local_name() != "Envelope") {
        raise(ErrorCode::XmlMalformed, "root element is not a SOAP envelope");
    }
    Envelope envelope;
    if (const xml::Node* header = root.child("Header")) {
        envelope.header = header->collapsed_text();
    }
    const xml::Node* body = root.child("Body");
    if (!body) raise(ErrorCode::MissingBody, "envelope has no Body element");
    const xml::Node* message_id = body->descendant("MessageID");
    if (!message_id || message_id->trimmed_text().empty()) {
        raise(ErrorCode::MissingMessageId, "Body carries no MessageID");
    }
    envelope.message_id = message_id->trimmed_text();
    envelope.body_query = body->collapsed_text();
    return envelope;
}

struct QueryDocument {
    std::string request_id;
    std::string requester;
    std::string port_name;
    std::string ip_address;
    int rec_port = 0;
    std::string country;

    // Free text the mapping stage sees: the service-targeting fields.
    std::string query_text() const {
        return port_name + " " + ip_address + " " + std::to_string(rec_port) + " " + country;
    }
};

inline QueryDocument parse_query(std::string_view bytes) {
    xml::Node root = xml::parse(bytes);
    if (root.local_name() != "service") {
        raise(ErrorCode::XmlMalformed, "root element is not a service query");
    }
    QueryDocument query;
    const std::string* request_id = root.attribute("requestid");
    if (!request_id) raise(ErrorCode::MissingField, "requestid");
    query.request_id = *request_id;

    auto required = [](const xml::Node& parent, const char* name) -> std::string {
        const xml::Node* child = parent.child(name);
        if (!child) raise(ErrorCode::MissingField, name);
        return child->trimmed_text();
    };
    query.requester = required(root, "requester");
    const xml::Node* target = root.child("serviceto");
    if (!target) raise(ErrorCode::MissingField, "serviceto");
    query.port_name = required(*target, "portname");
    query.ip_address = required(*target, "ipaddress");
    std::string port_text = required(*target, "recport");
    std::int64_t port = parse_int(port_text, ErrorCode::BadPort);
    if (port < 1 || port > 65535) {
        raise(ErrorCode::BadPort, "recport " + port_text + " outside 1..65535");
    }
    query.rec_port = static_cast<int>(port);
    query.country = required(*target, "country");
    return query;
}

// WSDL-subset descriptor: binding name becomes the id and name, operation
// names and documentation text become keywords, QoS comes from the
// artifact extension elements qosLatencyMs / qosAvailability.
inline ServiceDescriptor parse_descriptor(std::string_view bytes) {
    xml::Node root = xml::parse(bytes);
    const xml::Node* binding = root.descendant("binding");
    if (!binding) raise(ErrorCode::MissingBinding, "no wsdl:binding element");
    const std::string* name = binding->attribute("name");
    if (!name || name->empty()) raise(ErrorCode::MissingBinding, "binding has no name");

    ServiceDescriptor descriptor;
    descriptor.id = *name;
    descriptor.name = *name;

    std::vector<std::string> keywords = normalize(*name);
    auto absorb = [&keywords](const std::string& text) {
        for (auto& token : normalize(text)) keywords.push_back(std::move(token));
    };
    for (const auto& child : binding->children) {
        if (child.local_name() == "documentation") {
            absorb(child.collapsed_text());
        } else if (child.local_name() == "operation") {
            if (const std::string* op_name = child.attribute("name")) {
                absorb(*op_name);
            }
            if (const xml::Node* doc = child.child("documentation")) {
                absorb(doc->collapsed_text());
            }
        } else if (child.local_name() == "qosLatencyMs") {
            descriptor.qos_latency_ms = parse_double(child.trimmed_text(), ErrorCode::InvalidQos);
            if (descriptor.qos_latency_ms < 0.0) {
                raise(ErrorCode::InvalidQos, "negative qosLatencyMs");
            }
        } else if (child.local_name() == "qosAvailability") {
            descriptor.qos_availability =
                parse_double(child.trimmed_text(), ErrorCode::InvalidQos);
            if (descriptor.qos_availability < 0.0 || descriptor.qos_availability > 1.0) {
                raise(ErrorCode::InvalidQos,
                      "qosAvailability " + child.trimmed_text() + " outside [0,1]");
            }
        }
    }
    std::sort(keywords.begin(), keywords.end());
    descriptor.keywords = deduplicate(std::move(keywords));
    validate_descriptor(descriptor);
    return descriptor;
}

inline std::string serialize_descriptor(const ServiceDescriptor& descriptor) {
    xml::Node root;
    root.name = "wsdl:binding";
    root.attributes.emplace_back("name", descriptor.name);
    root.attributes.emplace_back("type", "qname");
    for (const auto& keyword : descriptor.keywords) {
        xml::Node operation;
        operation.name = "wsdl:operation";
        operation.attributes.emplace_back("name", keyword);
        root.children.push_back(std::move(operation));
    }
    xml::Node latency;
    latency.name = "qosLatencyMs";
    latency.text = format_double(descriptor.qos_latency_ms);
    root.children.push_back(std::move(latency));
    xml::Node availability;
    availability.name = "qosAvailability";
    availability.text = format_double(descriptor.qos_availability);
    root.children.push_back(std::move(availability));
    return xml::serialize(root);
}

// Result document: chosen id, ranked (id, score at six decimals) and the
// stage trace. Timings and request ids are deliberately absent so identical
// selections serialize identically.
inline std::string serialize_result(const SelectionResult& result) {
    xml::Node root;
    root.name = "selection";
    if (result.chosen) {
        xml::Node chosen;
        chosen.name = "chosen";
        chosen.text = *result.chosen;
        root.children.push_back(std::move(chosen));
    }
    xml::Node ranked;
    ranked.name = "ranked";
    for (const auto& entry : result.ranked) {
        xml::Node candidate;
        candidate.name = "candidate";
        candidate.attributes.emplace_back("id", entry.descriptor_id);
        candidate.attributes.emplace_back("score", format_fixed(entry.score, 6));
        ranked.children.push_back(std::move(candidate));
    }
    root.children.push_back(std::move(ranked));
    xml::Node trace;
    trace.name = "trace";
    trace.attributes.emplace_back("d", std::to_string(result.trace.d_count));
    trace.attributes.emplace_back("m", std::to_string(result.trace.m_removed));
    trace.attributes.emplace_back("f", std::to_string(result.trace.f_removed));
    trace.attributes.emplace_back("s", format_fixed(result.trace.s_aggregate, 6));
    root.children.push_back(std::move(trace));
    return xml::serialize(root);
}

inline SelectionResult parse_result(std::string_view bytes) {
    xml::Node root = xml::parse(bytes);
    if (root.local_name() != "selection") {
        raise(ErrorCode::XmlMalformed, "root element is not a selection result");
    }
    SelectionResult result;
    if (const xml::Node* chosen = root.child("chosen")) {
        result.chosen = chosen->text;
    }
    const xml::Node* ranked = root.child("ranked");
    if (!ranked) raise(ErrorCode::MissingField, "ranked");
    for (const auto& candidate : ranked->children) {
        if (candidate.local_name() != "candidate") {
            raise(ErrorCode::XmlMalformed, "unexpected element in ranked list");
        }
        const std::string* id = candidate.attribute("id");
        const std::string* score = candidate.attribute("score");
        if (!id || !score) raise(ErrorCode::MissingField, "candidate id/score");
        PriorityScore entry;
        entry.descriptor_id = *id;
        entry.score = parse_double(*score, ErrorCode::XmlMalformed);
        result.ranked.push_back(std::move(entry));
    }
    const xml::Node* trace = root.child("trace");
    if (!trace) raise(ErrorCode::MissingField, "trace");
    auto attr = [&trace](const char* name) -> const std::string& {
        const std::string* value = trace->attribute(name);
        if (!value) raise(ErrorCode::MissingField, name);
        return *value;
    };
    result.trace.d_count = parse_uint(attr("d"), ErrorCode::XmlMalformed);
    result.trace.m_removed = parse_uint(attr("m"), ErrorCode::XmlMalformed);
    result.trace.f_removed = parse_uint(attr("f"), ErrorCode::XmlMalformed);
    // s is redundant on the wire; recompute so the trace invariant holds
    // bit-exactly regardless of the six-decimal rendering.
    result.trace.s_aggregate =
        stage_aggregate(result.trace.d_count, result.trace.m_removed, result.trace.f_removed);
    return result;
}

}  // namespace ria::wire
