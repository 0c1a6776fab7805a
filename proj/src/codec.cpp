#include "toolrm/codec.hpp"

#include <set>

#include "toolrm/error.hpp"

namespace toolrm {

namespace {

const Json& require_field(const Json& j, const char* field, const char* where) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw UsageError(std::string(where) + ": missing \"" + field + "\"");
  }
  return *it;
}

std::string require_string(const Json& j, const char* field, const char* where) {
  const Json& v = require_field(j, field, where);
  if (!v.is_string()) {
    throw UsageError(std::string(where) + ": \"" + field + "\" must be a string");
  }
  return v.get<std::string>();
}

std::string optional_string(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

ToolCall call_from_json(const Json& element, std::size_t index) {
  const std::string where = "call " + std::to_string(index);
  if (!element.is_object()) throw UsageError(where + ": not an object");
  ToolCall call;
  if (element.size() == 2 && element.contains("name") && element.contains("arguments")) {
    const Json& name = element.at("name");
    if (!name.is_string()) throw UsageError(where + ": \"name\" must be a string");
    call.name = name.get<std::string>();
    Json args = element.at("arguments");
    if (args.is_string()) {
      try {
        args = Json::parse(args.get<std::string>());
      } catch (const Json::parse_error& e) {
        throw UsageError(where + ": \"arguments\" string is not JSON: " + e.what());
      }
    }
    if (!args.is_object()) throw UsageError(where + ": \"arguments\" must be an object");
    call.arguments = std::move(args);
  } else if (element.size() == 1 && element.begin().value().is_object()) {
    call.name = element.begin().key();
    call.arguments = element.begin().value();
  } else {
    throw UsageError(where + ": expected {name: {args}} or {\"name\", \"arguments\"}");
  }
  if (call.name.empty()) throw UsageError(where + ": empty function name");
  return call;
}

}  // namespace

ParamSpec param_from_json(const Json& j) {
  if (!j.is_object()) throw UsageError("parameter schema must be an object");
  ParamSpec p;
  const std::string type_name = require_string(j, "type", "parameter schema");
  auto type = param_type_from_string(type_name);
  if (!type) throw UsageError("unsupported parameter type \"" + type_name + "\"");
  p.type = *type;
  p.description = optional_string(j, "description");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "type" || key == "description") continue;
    if (key == "enum") {
      if (!it->is_array() || it->empty()) throw UsageError("\"enum\" must be a nonempty array");
      p.enum_values = std::vector<Json>(it->begin(), it->end());
    } else if (key == "items" && it->is_object() && it->contains("type")) {
      p.item_spec = std::make_shared<const ParamSpec>(param_from_json(*it));
    } else {
      p.extra[key] = *it;
    }
  }
  return p;
}

Json param_to_json(const ParamSpec& p) {
  Json j = Json::object();
  j["type"] = std::string(to_string(p.type));
  if (p.item_spec) j["items"] = param_to_json(*p.item_spec);
  if (p.enum_values) j["enum"] = Json(*p.enum_values);
  j["description"] = p.description;
  for (auto it = p.extra.begin(); it != p.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

ToolSpec tool_from_json(const Json& j) {
  if (!j.is_object()) throw UsageError("tool schema must be an object");
  ToolSpec tool;
  tool.name = require_string(j, "name", "tool schema");
  if (tool.name.empty()) throw UsageError("tool schema: empty name");
  tool.description = optional_string(j, "description");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "name" && it.key() != "description" && it.key() != "parameters") {
      tool.extra[it.key()] = *it;
    }
  }
  auto params = j.find("parameters");
  if (params == j.end()) return tool;
  if (!params->is_object()) throw UsageError("tool " + tool.name + ": parameters must be an object");
  tool.parameters_type = params->value("type", std::string("dict"));
  std::set<std::string> seen;
  if (auto props = params->find("properties"); props != params->end()) {
    if (!props->is_object()) throw UsageError("tool " + tool.name + ": properties must be an object");
    for (auto it = props->begin(); it != props->end(); ++it) {
      if (!seen.insert(it.key()).second) {
        throw UsageError("tool " + tool.name + ": duplicate property " + it.key());
      }
      try {
        tool.properties.emplace_back(it.key(), param_from_json(*it));
      } catch (const UsageError& e) {
        throw UsageError("tool " + tool.name + ", parameter " + it.key() + ": " + e.what());
      }
    }
  }
  if (auto req = params->find("required"); req != params->end()) {
    if (!req->is_array()) throw UsageError("tool " + tool.name + ": required must be an array");
    for (const auto& r : *req) {
      if (!r.is_string() || !seen.count(r.get<std::string>())) {
        throw UsageError("tool " + tool.name + ": required entry " + r.dump() +
                         " is not a declared property");
      }
      tool.required.push_back(r.get<std::string>());
    }
  }
  for (auto it = params->begin(); it != params->end(); ++it) {
    if (it.key() != "type" && it.key() != "properties" && it.key() != "required") {
      tool.parameters_extra[it.key()] = *it;
    }
  }
  return tool;
}

Json tool_to_json(const ToolSpec& tool) {
  Json props = Json::object();
  for (const auto& [name, spec] : tool.properties) props[name] = param_to_json(spec);
  Json params = Json::object();
  params["type"] = tool.parameters_type;
  params["properties"] = std::move(props);
  params["required"] = Json(tool.required);
  for (auto it = tool.parameters_extra.begin(); it != tool.parameters_extra.end(); ++it) {
    params[it.key()] = it.value();
  }
  Json j = Json::object();
  j["name"] = tool.name;
  j["description"] = tool.description;
  j["parameters"] = std::move(params);
  for (auto it = tool.extra.begin(); it != tool.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

ToolCatalog catalog_from_json(const Json& j) {
  if (!j.is_array()) throw UsageError("\"tools\" must be an array");
  ToolCatalog catalog;
  std::set<std::string> names;
  for (const auto& t : j) {
    ToolSpec tool = tool_from_json(t);
    if (!names.insert(tool.name).second) throw UsageError("duplicate tool name " + tool.name);
    catalog.tools.push_back(std::move(tool));
  }
  return catalog;
}

Json catalog_to_json(const ToolCatalog& catalog) {
  Json j = Json::array();
  for (const auto& tool : catalog.tools) j.push_back(tool_to_json(tool));
  return j;
}

std::vector<Message> conversation_from_json(const Json& j) {
  if (!j.is_array()) throw UsageError("\"conversation\" must be an array");
  std::vector<Message> out;
  for (const auto& m : j) {
    if (!m.is_object()) throw UsageError("conversation message must be an object");
    const std::string role_name = require_string(m, "role", "message");
    auto role = role_from_string(role_name);
    if (!role) throw UsageError("unknown message role \"" + role_name + "\"");
    const Json& content = require_field(m, "content", "message");
    // Tool responses sometimes arrive as structured JSON; store them as text.
    out.push_back({*role, content.is_string() ? content.get<std::string>() : content.dump()});
  }
  return out;
}

Json conversation_to_json(const std::vector<Message>& conversation) {
  Json j = Json::array();
  for (const auto& m : conversation) {
    Json msg = Json::object();
    msg["role"] = std::string(to_string(m.role));
    msg["content"] = m.content;
    j.push_back(std::move(msg));
  }
  return j;
}

ScoringContext make_context(ToolCatalog catalog, std::vector<Message> conversation) {
  if (conversation.empty()) throw UsageError("conversation must not be empty");
  const Role last = conversation.back().role;
  if (last != Role::User && last != Role::Tool) {
    throw UsageError("conversation must end with a user or tool turn");
  }
  return ScoringContext{std::move(catalog), std::move(conversation)};
}

ToolCallSequence sequence_from_json(const Json& j) {
  if (!j.is_array()) throw UsageError("tool call list must be a JSON array");
  ToolCallSequence seq;
  std::size_t index = 0;
  for (const auto& element : j) seq.calls.push_back(call_from_json(element, index++));
  return seq;
}

Json sequence_to_json(const ToolCallSequence& seq) {
  Json j = Json::array();
  for (const auto& call : seq.calls) {
    Json c = Json::object();
    c[call.name] = call.arguments;
    j.push_back(std::move(c));
  }
  return j;
}

Json sequence_to_wire(const ToolCallSequence& seq) {
  Json j = Json::array();
  for (const auto& call : seq.calls) {
    Json c = Json::object();
    c["name"] = call.name;
    c["arguments"] = call.arguments;
    j.push_back(std::move(c));
  }
  return j;
}

Json candidate_to_json(const ParsedCandidate& candidate) {
  if (candidate.wellformed()) return sequence_to_json(candidate.sequence());
  return Json(candidate.malformed().raw_text);
}

ParsedCandidate candidate_from_json(const Json& j) {
  if (j.is_string()) {
    return MalformedOutput{j.get<std::string>(), "recorded as malformed text"};
  }
  return sequence_from_json(j);
}

GoldAnswer gold_from_json(const Json& j) {
  if (!j.is_array()) throw UsageError("\"gold\" must be an array");
  GoldAnswer gold;
  std::size_t index = 0;
  for (const auto& element : j) {
    const std::string where = "gold call " + std::to_string(index++);
    if (!element.is_object() || element.size() != 1 || !element.begin().value().is_object()) {
      throw UsageError(where + ": expected {name: {param: [acceptable, ...]}}");
    }
    GoldCall call;
    call.name = element.begin().key();
    const Json& args = element.begin().value();
    for (auto it = args.begin(); it != args.end(); ++it) {
      if (!it->is_array()) {
        throw UsageError(where + ", parameter " + it.key() + ": acceptable values must be a list");
      }
      std::vector<Json> values;
      bool optional = false;
      for (const auto& v : *it) {
        if (v.is_string() && v.get<std::string>().empty()) {
          optional = true;
        } else {
          values.push_back(v);
        }
      }
      if (values.empty() && !optional) {
        throw UsageError(where + ", parameter " + it.key() + ": empty acceptable list");
      }
      if (optional) call.optional_params.insert(it.key());
      call.arguments.emplace_back(it.key(), std::move(values));
    }
    gold.calls.push_back(std::move(call));
  }
  return gold;
}

Json gold_to_json(const GoldAnswer& gold) {
  Json j = Json::array();
  for (const auto& call : gold.calls) {
    Json args = Json::object();
    for (const auto& [name, values] : call.arguments) {
      Json list = Json(values);
      if (call.optional_params.count(name)) list.push_back("");
      args[name] = std::move(list);
    }
    Json c = Json::object();
    c[call.name] = std::move(args);
    j.push_back(std::move(c));
  }
  return j;
}

}  // namespace toolrm
