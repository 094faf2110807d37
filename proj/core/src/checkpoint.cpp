#include "nid/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nid/errors.hpp"

namespace nid {

namespace {

static_assert(std::numeric_limits<float>::is_iec559);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

// Resizes the tensor named `name` so that a view over it has the given shape.
void shape_tensor(EncoderParams& p, const std::string& name, std::size_t rows, std::size_t cols) {
  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(cols);
  auto mat = [&](Matrix& m) { m.resize(r, c); };
  auto vec = [&](Vector& v) {
    if (cols != 1) throw BadInput("checkpoint tensor " + name + " must be a vector");
    v.resize(r);
  };
  if (name == "embedding") mat(p.embedding);
  else if (name == "hidden1.weight") mat(p.hidden1_w);
  else if (name == "hidden1.bias") vec(p.hidden1_b);
  else if (name == "hidden2.weight") mat(p.hidden2_w);
  else if (name == "hidden2.bias") vec(p.hidden2_b);
  else if (name == "proj1.weight") mat(p.proj1_w);
  else if (name == "proj1.bias") vec(p.proj1_b);
  else if (name == "proj2.weight") mat(p.proj2_w);
  else if (name == "proj2.bias") vec(p.proj2_b);
  else if (name == "classifier.weight") mat(p.cls_w);
  else if (name == "classifier.bias") vec(p.cls_b);
  else if (name == "mlm.weight") mat(p.mlm_w);
  else if (name == "mlm.bias") vec(p.mlm_b);
  else throw BadInput("unknown checkpoint tensor " + name);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params) {
  nlohmann::ordered_json header;
  header["format"] = "nid-checkpoint";
  header["version"] = 1;
  header["dtype"] = "f32le";
  header["tensors"] = nlohmann::ordered_json::array();
  std::string payload;
  for (const auto& t : params.tensors()) {
    nlohmann::ordered_json entry;
    entry["name"] = t.name;
    entry["shape"] = {t.rows, t.cols};
    entry["offset"] = payload.size();
    entry["bytes"] = t.size() * 4;
    header["tensors"].push_back(entry);
    for (std::size_t i = 0; i < t.size(); ++i) {
      put_u32(payload, std::bit_cast<std::uint32_t>(static_cast<float>(t.data[i])));
    }
  }
  const std::string head = header.dump();
  std::string out;
  const auto len = static_cast<std::uint64_t>(head.size());
  put_u32(out, static_cast<std::uint32_t>(len & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(len >> 32));
  out += head;
  out += payload;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 8) throw IoError(path.string() + ": truncated checkpoint");
  const std::uint64_t len = get_u32(raw) | static_cast<std::uint64_t>(get_u32(raw + 4)) << 32;
  if (8 + len > bytes.size()) throw IoError(path.string() + ": truncated checkpoint header");
  const auto header = nlohmann::json::parse(bytes.substr(8, len), nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "nid-checkpoint" ||
      header.value("dtype", "") != "f32le") {
    throw IoError(path.string() + ": not a checkpoint file");
  }
  const std::size_t base = 8 + len;
  EncoderParams params;
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto rows = entry.at("shape").at(0).get<std::size_t>();
    const auto cols = entry.at("shape").at(1).get<std::size_t>();
    const auto offset = entry.at("offset").get<std::size_t>();
    if (base + offset + rows * cols * 4 > bytes.size()) throw IoError(path.string() + ": truncated tensor " + name);
    shape_tensor(params, name, rows, cols);
  }
  auto views = params.tensors();
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto offset = entry.at("offset").get<std::size_t>();
    for (auto& v : views) {
      if (v.name != name) continue;
      for (std::size_t i = 0; i < v.size(); ++i) {
        v.data[i] = static_cast<double>(std::bit_cast<float>(get_u32(raw + base + offset + 4 * i)));
      }
    }
  }
  if (params.embedding.size() == 0 || params.hidden1_w.cols() != params.embedding.cols() ||
      params.mlm_w.rows() != params.embedding.rows()) {
    throw IoError(path.string() + ": inconsistent tensor shapes");
  }
  return params;
}

}  // namespace nid
