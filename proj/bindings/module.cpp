// Python bindings for the core operations: the simulator, object/pixel
// observations, the depth-first planner, the replay buffer, the Q-network,
// and the prompt builder/parser.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "frogger/config_io.hpp"
#include "frogger/dqn.hpp"
#include "frogger/env.hpp"
#include "frogger/llm.hpp"
#include "frogger/objects.hpp"
#include "frogger/replay.hpp"
#include "frogger/search.hpp"

namespace py = pybind11;
using namespace frogger;
using nlohmann::json;

namespace {

EnvConfig config_from_json_str(const std::string& text) {
    return env_config_from_json(json::parse(text, nullptr, true, true));
}

py::dict step_to_dict(const StepResult& r) {
    py::dict d;
    d["reward"] = r.reward;
    d["done"] = r.done;
    d["life_lost"] = r.info.life_lost;
    d["bay_entered"] = r.info.bay_entered;
    d["level_completed"] = r.info.level_completed;
    d["effective_action"] = static_cast<int>(r.info.effective_action);
    return d;
}

Frame frame_from_bytes(const py::bytes& data) {
    std::string s = data;
    if (s.size() != kScreenW * kScreenH)
        throw std::invalid_argument("frame must be 210*160 grayscale bytes");
    Frame f;
    std::copy(s.begin(), s.end(), f.pixels.begin());
    return f;
}

py::bytes frame_to_bytes(const Frame& f) {
    return py::bytes(reinterpret_cast<const char*>(f.pixels.data()), f.pixels.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Frogger workbench core: simulator, planner, replay, DQN, prompts";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
    py::register_exception<SnapshotError>(m, "SnapshotError", PyExc_ValueError);
    py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);

    py::enum_<Action>(m, "Action")
        .value("NOOP", Action::NOOP)
        .value("UP", Action::UP)
        .value("RIGHT", Action::RIGHT)
        .value("LEFT", Action::LEFT)
        .value("DOWN", Action::DOWN);

    m.def("action_name", [](int a) { return action_name(static_cast<Action>(a)); });
    m.def("action_from_name",
          [](const std::string& s) { return static_cast<int>(action_from_name(s)); });

    py::class_<EnvConfig>(m, "EnvConfig")
        .def_static("standard", &EnvConfig::standard)
        .def_static("mini", &EnvConfig::mini)
        .def_static("from_json", &config_from_json_str, py::arg("text"))
        .def("to_json", [](const EnvConfig& c) { return env_config_to_json(c).dump(2); })
        .def_readwrite("seed", &EnvConfig::seed)
        .def_readwrite("lives", &EnvConfig::lives)
        .def_readwrite("timer_ticks", &EnvConfig::timer_ticks)
        .def_readwrite("sticky_prob", &EnvConfig::sticky_prob)
        .def("validate", &EnvConfig::validate)
        .def("num_rows", &EnvConfig::num_rows)
        .def("home_row", &EnvConfig::home_row);

    py::class_<FroggerEnv>(m, "FroggerEnv")
        .def(py::init<EnvConfig>(), py::arg("config"))
        .def("reset", &FroggerEnv::reset)
        .def("reset_with_seed", &FroggerEnv::reset_with_seed, py::arg("seed"))
        .def("step",
             [](FroggerEnv& env, int a) {
                 return step_to_dict(env.step(static_cast<Action>(a)));
             },
             py::arg("action"))
        .def("clone", [](const FroggerEnv& env) { return FroggerEnv(env); })
        .def_property_readonly("frog_x", &FroggerEnv::frog_x)
        .def_property_readonly("frog_y", &FroggerEnv::frog_y)
        .def_property_readonly("frog_row", &FroggerEnv::frog_row)
        .def_property_readonly("lives_left", &FroggerEnv::lives_left)
        .def_property_readonly("timer_remaining", &FroggerEnv::timer_remaining)
        .def_property_readonly("score", &FroggerEnv::score)
        .def_property_readonly("level", &FroggerEnv::level)
        .def_property_readonly("tick", &FroggerEnv::tick)
        .def_property_readonly("done", &FroggerEnv::done)
        .def("state_hash", &FroggerEnv::state_hash)
        .def("snapshot",
             [](const FroggerEnv& env) {
                 std::vector<uint8_t> blob = env.snapshot();
                 return py::bytes(reinterpret_cast<const char*>(blob.data()), blob.size());
             })
        .def_static("restore", [](const py::bytes& data) {
            std::string s = data;
            return FroggerEnv::restore(std::vector<uint8_t>(s.begin(), s.end()));
        });

    py::class_<GameObject>(m, "GameObject")
        .def_property_readonly("category",
                               [](const GameObject& o) { return category_name(o.category); })
        .def_readonly("x", &GameObject::x)
        .def_readonly("y", &GameObject::y)
        .def_readonly("w", &GameObject::w)
        .def_readonly("h", &GameObject::h)
        .def("__repr__", [](const GameObject& o) { return format_objects({o}); });

    m.def("objects", &objects, py::arg("env"));
    m.def("format_objects", &format_objects, py::arg("objects"));
    m.def("parse_objects", &parse_objects, py::arg("text"));
    m.def("render",
          [](const FroggerEnv& env) { return frame_to_bytes(render(env)); },
          py::arg("env"), "210x160 grayscale frame as bytes, row-major");
    m.def("extract",
          [](const py::bytes& frame) { return extract(frame_from_bytes(frame)); },
          py::arg("frame"));
    m.def("preprocess",
          [](const std::vector<py::bytes>& frames) {
              std::vector<Frame> fs;
              for (const auto& b : frames) fs.push_back(frame_from_bytes(b));
              return preprocess(fs);
          },
          py::arg("frames"), "four frames -> 4*84*84 unit-scaled doubles");
    m.def("to_pgm",
          [](const py::bytes& frame) { return to_pgm(frame_from_bytes(frame)); },
          py::arg("frame"));

    py::class_<SearchResult>(m, "SearchResult")
        .def_readonly("achieved_score", &SearchResult::achieved_score)
        .def_property_readonly("plan",
                               [](const SearchResult& r) {
                                   std::vector<int> out;
                                   for (Action a : r.plan) out.push_back(static_cast<int>(a));
                                   return out;
                               })
        .def_readonly("nodes_expanded", &SearchResult::nodes_expanded)
        .def_readonly("budget_exhausted", &SearchResult::budget_exhausted);

    m.def("brute_dfs",
          [](const FroggerEnv& root, double target_score, int64_t max_expansions,
             int max_plan_length, bool random_order, uint64_t seed) {
              SearchConfig cfg;
              cfg.target_score = target_score;
              cfg.max_expansions = max_expansions;
              cfg.max_plan_length = max_plan_length;
              cfg.order_policy =
                  random_order ? OrderPolicy::SeededRandom : OrderPolicy::Fixed;
              cfg.seed = seed;
              return brute_dfs(root, cfg);
          },
          py::arg("root"), py::arg("target_score"), py::arg("max_expansions") = 100000,
          py::arg("max_plan_length") = 64, py::arg("random_order") = false,
          py::arg("seed") = 0);
    m.def("replay_plan",
          [](const FroggerEnv& root, const std::vector<int>& plan) {
              std::vector<Action> acts;
              for (int a : plan) acts.push_back(static_cast<Action>(a));
              return replay_plan(root, acts);
          },
          py::arg("root"), py::arg("plan"));

    py::class_<Transition>(m, "Transition")
        .def(py::init<>())
        .def_readwrite("state_features", &Transition::state_features)
        .def_readwrite("action", &Transition::action)
        .def_readwrite("reward", &Transition::reward)
        .def_readwrite("next_state_features", &Transition::next_state_features)
        .def_readwrite("done", &Transition::done)
        .def_readwrite("is_demo", &Transition::is_demo);

    py::class_<PrioritizedBuffer>(m, "PrioritizedBuffer")
        .def(py::init<size_t, size_t, double, double>(), py::arg("capacity") = 8000,
             py::arg("feature_len") = 0, py::arg("alpha") = 0.6, py::arg("epsilon") = 0.01)
        .def("push",
             [](PrioritizedBuffer& b, const Transition& t, std::optional<double> prio) {
                 return b.push(t, prio);
             },
             py::arg("transition"), py::arg("priority") = std::nullopt)
        .def("sample",
             [](const PrioritizedBuffer& b, size_t batch, double beta, uint64_t seed) {
                 SplitMix64 rng(seed);
                 SampleBatch s = b.sample(batch, beta, rng);
                 py::dict d;
                 d["indices"] = s.indices;
                 d["stamps"] = s.stamps;
                 d["is_weights"] = s.is_weights;
                 return d;
             },
             py::arg("batch"), py::arg("beta"), py::arg("seed"))
        .def("update_priorities", &PrioritizedBuffer::update_priorities)
        .def("preload_demos", &PrioritizedBuffer::preload_demos, py::arg("transitions"),
             py::arg("demo_initial_priority") = 5.0)
        .def("size", &PrioritizedBuffer::size)
        .def("capacity", &PrioritizedBuffer::capacity)
        .def("demo_count", &PrioritizedBuffer::demo_count)
        .def("max_priority", &PrioritizedBuffer::max_priority)
        .def("total_priority", &PrioritizedBuffer::total_priority)
        .def("to_csv", &PrioritizedBuffer::to_csv);

    m.def("priority", &priority, py::arg("delta"), py::arg("epsilon"), py::arg("alpha"));

    m.def("encode_object_state",
          [](const ObjectList& objs, int slots) {
              EncoderConfig cfg;
              cfg.slots = slots;
              return encode_object_state(objs, cfg);
          },
          py::arg("objects"), py::arg("slots") = 24);

    py::class_<QNetParams>(m, "QNetParams")
        .def_static("init",
                    [](const std::vector<int>& sizes, uint64_t seed) {
                        SplitMix64 rng(seed);
                        return QNetParams::init(sizes, rng);
                    },
                    py::arg("layer_sizes"), py::arg("seed"))
        .def_readonly("layer_sizes", &QNetParams::layer_sizes)
        .def("param_count", &QNetParams::param_count);

    m.def("q_forward", &q_forward, py::arg("params"), py::arg("features"));

    m.def("build_prompt",
          [](const std::string& objects_text, int t, int past_steps, bool show_rewards,
             const std::string& mode, const std::string& feedback) {
              PromptConfig cfg;
              cfg.past_steps = past_steps;
              cfg.show_rewards = show_rewards;
              cfg.mode = mode == "explore" ? PromptMode::Explore : PromptMode::Expert;
              cfg.feedback = feedback;
              std::vector<ChatMessage> msgs = build_prompt({}, objects_text, t, cfg);
              py::list out;
              for (const auto& msg : msgs) {
                  py::dict d;
                  d["role"] = msg.role;
                  d["content"] = msg.content;
                  out.append(d);
              }
              return out;
          },
          py::arg("objects_text"), py::arg("t") = 0, py::arg("past_steps") = 0,
          py::arg("show_rewards") = true, py::arg("mode") = "expert",
          py::arg("feedback") = "");

    m.def("parse_action", [](const std::string& raw) {
        ParsedAction p = parse_action(raw);
        py::dict d;
        d["ok"] = p.ok;
        d["action"] = static_cast<int>(p.action);
        d["game_state"] = p.game_state;
        d["reasoning"] = p.reasoning;
        d["action_text"] = p.action_text;
        d["error"] = p.error;
        return d;
    });

    m.def("token_reward_correlation", &token_reward_correlation, py::arg("records"));
}
