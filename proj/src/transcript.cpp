#include "qcrypt/transcript.hpp"

#include <json.hpp>

#include <ostream>

namespace qcrypt {

void Transcript::write_jsonl(std::ostream& out, std::optional<int> trial) const {
  using nlohmann::json;
  for (const PulseEvent& p : pulses) {
    json line;
    if (trial) line["trial"] = *trial;
    line["type"] = "pulse";
    line["index"] = p.index;
    line["fate"] = to_string(p.fate);
    if (p.intercept) {
      line["eve_basis"] = p.intercept->basis;
      line["eve_outcome"] = p.intercept->outcome;
    }
    out << line.dump() << '\n';
  }
  for (const ClassicalMessage& m : messages) {
    json line;
    if (trial) line["trial"] = *trial;
    line["type"] = "message";
    line["seq"] = m.seq;
    line["sender"] = m.sender;
    line["body"] = m.body;
    if (m.delivered) line["delivered"] = *m.delivered;
    out << line.dump() << '\n';
  }
}

}  // namespace qcrypt
