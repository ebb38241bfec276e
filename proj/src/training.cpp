#include "esr/training.hpp"

#include <json.hpp>

using nlohmann::json;

namespace esr {

std::string train_report_to_json(const TrainReport& r) {
    json j;
    j["stopping_epoch"] = r.stopping_epoch;
    j["best_epoch"] = r.best_epoch;
    j["best_val_accuracy"] = r.best_val_accuracy;
    if (!r.checkpoint_path.empty()) j["checkpoint"] = r.checkpoint_path;
    j["epochs"] = json::array();
    for (const auto& e : r.epochs) {
        j["epochs"].push_back({{"epoch", e.epoch},
                               {"train_loss", e.train_loss},
                               {"train_accuracy", e.train_accuracy},
                               {"val_accuracy", e.val_accuracy},
                               {"seconds", e.seconds}});
    }
    return j.dump(2);
}

}  // namespace esr
