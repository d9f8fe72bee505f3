#include "egoav/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "egoav/config.hpp"

namespace egoav::checkpoint {

using nlohmann::json;

namespace {
constexpr char kMagic[4] = {'E', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save(const model::Model<float>& model, const std::string& path) {
  json header;
  header["model"] = config::model_config_to_json(model.cfg);
  json dir = json::array();
  std::vector<const Tensor<float>*> tensors;
  const_cast<model::Model<float>&>(model).visit([&](const nets::ParamRef<float>& p) {
    dir.push_back(json{{"name", p.name}, {"shape", p.tensor->shape()}});
    tensors.push_back(p.tensor);
  });
  header["tensors"] = dir;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint::save: cannot open " + path);
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  const std::uint64_t hlen = hs.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const Tensor<float>* t : tensors)
    f.write(reinterpret_cast<const char*>(t->data()),
            static_cast<std::streamsize>(t->size() * sizeof(float)));
  if (!f) throw std::runtime_error("checkpoint::save: short write to " + path);
}

model::Model<float> load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint::load: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint::load: not a checkpoint file: " + path);
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion)
    throw std::runtime_error("checkpoint::load: unsupported version in " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  f.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw std::runtime_error("checkpoint::load: truncated header in " + path);
  const json header = json::parse(hs);

  model::Model<float> model;
  model.init(config::model_config_from_json(header.at("model")));

  std::vector<std::pair<std::string, Tensor<float>*>> tensors;
  model.visit([&](const nets::ParamRef<float>& p) { tensors.push_back({p.name, p.tensor}); });
  const json& dir = header.at("tensors");
  if (dir.size() != tensors.size())
    throw std::runtime_error("checkpoint::load: tensor count mismatch in " + path);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string name = dir[i].at("name").get<std::string>();
    const auto shape = dir[i].at("shape").get<std::vector<int>>();
    if (name != tensors[i].first)
      throw std::runtime_error("checkpoint::load: tensor order mismatch at " + name);
    if (shape != tensors[i].second->shape())
      throw std::runtime_error("checkpoint::load: shape mismatch for " + name + " in " + path);
    f.read(reinterpret_cast<char*>(tensors[i].second->data()),
           static_cast<std::streamsize>(tensors[i].second->size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("checkpoint::load: truncated payload in " + path);
  return model;
}

}  // namespace egoav::checkpoint
