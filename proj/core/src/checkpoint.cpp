#include "nmla/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace nmla {
namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("checkpoint: tensor data does not match its shape");
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json config_to_json(const TrainConfig& c) {
  return {{"pretrain_objective", c.pretrain.name()},
          {"finetune_objective", c.finetune.name()},
          {"pretrain_steps", c.pretrain_steps},
          {"finetune_steps", c.finetune_steps},
          {"pretrain_lr", c.pretrain_lr},
          {"finetune_lr", c.finetune_lr},
          {"adam_beta1", c.adam.beta1},
          {"adam_beta2", c.adam.beta2},
          {"adam_epsilon", c.adam.epsilon},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  if (j.contains("pretrain_objective")) c.pretrain = Objective::parse(j["pretrain_objective"].get<std::string>());
  if (j.contains("finetune_objective")) c.finetune = Objective::parse(j["finetune_objective"].get<std::string>());
  c.pretrain_steps = j.value("pretrain_steps", c.pretrain_steps);
  c.finetune_steps = j.value("finetune_steps", c.finetune_steps);
  c.pretrain_lr = j.value("pretrain_lr", c.pretrain_lr);
  c.finetune_lr = j.value("finetune_lr", c.finetune_lr);
  c.adam.beta1 = j.value("adam_beta1", c.adam.beta1);
  c.adam.beta2 = j.value("adam_beta2", c.adam.beta2);
  c.adam.epsilon = j.value("adam_epsilon", c.adam.epsilon);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  return c;
}

json tensors_to_json(const std::vector<Matrix>& tensors) {
  json out = json::object();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    out[std::string(ToyModelParams::kTensorNames[i])] = matrix_to_json(tensors[i]);
  }
  return out;
}

std::vector<Matrix> tensors_from_json(const json& j) {
  std::vector<Matrix> out;
  if (j.empty()) return out;  // optimizer state before the first step
  for (auto name : ToyModelParams::kTensorNames) out.push_back(matrix_from_json(j.at(std::string(name))));
  return out;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& config) { return config_to_json(config).dump(2); }

TrainConfig train_config_from_json(const std::string& json_text) {
  return config_from_json(json::parse(json_text));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const TrainState& s = checkpoint.state;
  std::vector<Matrix> params;
  for (const Matrix* t : s.params.tensors()) params.push_back(*t);

  json doc = {{"format", "nmla-checkpoint"},
              {"version", 1},
              {"config", config_to_json(checkpoint.config)},
              {"model", {{"upsample_factor", s.params.upsample_factor}, {"tensors", tensors_to_json(params)}}},
              {"adam",
               {{"step", s.adam.step},
                {"first_moment", tensors_to_json(s.adam.first_moment)},
                {"second_moment", tensors_to_json(s.adam.second_moment)}}},
              {"progress",
               {{"pretrain_steps_done", s.pretrain_steps_done},
                {"finetune_steps_done", s.finetune_steps_done}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const json doc = json::parse(in);
  if (doc.value("format", "") != "nmla-checkpoint") {
    throw std::runtime_error(path.string() + " is not an nmla checkpoint");
  }
  if (doc.value("version", 0) != 1) throw std::runtime_error("unsupported checkpoint version");

  Checkpoint ck;
  ck.config = config_from_json(doc.at("config"));
  const json& model = doc.at("model");
  ck.state.params.upsample_factor = model.at("upsample_factor").get<int>();
  auto loaded = tensors_from_json(model.at("tensors"));
  auto targets = ck.state.params.tensors();
  for (std::size_t i = 0; i < targets.size(); ++i) *targets[i] = std::move(loaded[i]);

  const json& adam = doc.at("adam");
  ck.state.adam.step = adam.at("step").get<std::int64_t>();
  ck.state.adam.first_moment = tensors_from_json(adam.at("first_moment"));
  ck.state.adam.second_moment = tensors_from_json(adam.at("second_moment"));
  const json& progress = doc.at("progress");
  ck.state.pretrain_steps_done = progress.at("pretrain_steps_done").get<std::int64_t>();
  ck.state.finetune_steps_done = progress.at("finetune_steps_done").get<std::int64_t>();
  return ck;
}

}  // namespace nmla
